//! `al-baxter`: run verification suites, Bäcklund sweeps and RK4 trajectories.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use al_baxter::algebra::c64;
use al_baxter::backlund::BtOptions;
use al_baxter::chain::ChainState;
use al_baxter::suite::{
    bt_sweep, run_suite, sweep_values, trajectory_csv, with_pool, BtOutcome, BtSweepReport, ConfigError, OutputFormat, Report,
    RunConfig, Suite,
};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "al-baxter", version, about = "Numerical checks for the classical and quantum Ablowitz-Ladik chain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite: classical, bt, quantum, bethe, baxter or all.
    Verify {
        suite: String,
        #[command(flatten)]
        common: Common,
        /// Include wall-clock timing in the report (makes it non-reproducible).
        #[arg(long)]
        timing: bool,
    },
    /// Apply Bäcklund transformations to a state and report all residuals.
    Bt {
        #[command(flatten)]
        common: Common,
        /// JSON state file {"N": .., "q": [[re, im], ..], "r": [[re, im], ..]}; random from the seed otherwise.
        #[arg(long)]
        state: Option<PathBuf>,
        /// Parameter sweep START:END:COUNT instead of the single --mu.
        #[arg(long)]
        sweep: Option<String>,
        /// Skip the finite-difference canonicity check.
        #[arg(long)]
        no_canonicity: bool,
    },
    /// Integrate the classical equations of motion with RK4 and write a CSV trajectory.
    Evolve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        state: Option<PathBuf>,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        /// Write every n-th step (the last step is always written).
        #[arg(long, default_value_t = 1)]
        every: usize,
    },
}

#[derive(Args)]
struct Common {
    /// JSON file with RunConfig fields; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    nmax: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Override every residual tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// json or csv
    #[arg(long)]
    format: Option<String>,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let mut cfg = match &self.config {
            Some(p) => serde_json::from_str::<RunConfig>(&fs::read_to_string(p)?)?,
            None => RunConfig::default(),
        };
        if let Some(n) = self.n {
            cfg.n = n;
        }
        if let Some(m) = self.m {
            cfg.m = m;
        }
        if let Some(a) = self.alpha {
            cfg.alpha = Some(a);
            cfg.eta = None;
        }
        if let Some(mu) = self.mu {
            cfg.mu = mu;
        }
        if let Some(n) = self.nmax {
            cfg.n_max = n;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(t) = self.tol {
            cfg.tolerances.residual = Some(t);
        }
        if let Some(o) = &self.out {
            cfg.output_path = Some(o.clone());
        }
        if let Some(f) = &self.format {
            cfg.format = f.parse()?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

enum Failure {
    Config(String),
    Check(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Config(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn load_state(path: Option<&Path>, cfg: &RunConfig) -> Result<ChainState, Failure> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Failure::Config(format!("cannot read {}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| Failure::Config(format!("rejected state {}: {e}", p.display())))
        }
        None => Ok(ChainState::random(cfg.n, 0.4, &mut ChaCha8Rng::seed_from_u64(cfg.seed))),
    }
}

fn parse_sweep(spec: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::Config(format!("sweep must be START:END:COUNT, got '{spec}'"));
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let start: f64 = parts[0].parse().map_err(|_| bad())?;
    let end: f64 = parts[1].parse().map_err(|_| bad())?;
    let count: usize = parts[2].parse().map_err(|_| bad())?;
    if count == 0 || !start.is_finite() || !end.is_finite() {
        return Err(bad());
    }
    Ok(sweep_values(start, end, count))
}

fn verify(suite: &str, common: &Common, timing: bool) -> Result<(), Failure> {
    let suite: Suite = suite.parse()?;
    let cfg = common.resolve()?;
    let report: Report = run_suite(suite, &cfg)?;
    let out = cfg.output_path.as_deref();
    let text = match cfg.format {
        OutputFormat::Json if timing => report.to_json() + "\n",
        OutputFormat::Json => report.deterministic_json() + "\n",
        OutputFormat::Csv => report.to_csv(),
    };
    emit(out, &text)?;
    if let Some(p) = out {
        for roots in &report.artifacts.bethe {
            emit(Some(&with_suffix(p, ".roots.csv")), &roots.to_csv())?;
        }
    }
    let s = &report.summary;
    eprintln!("verify {}: {}/{} checks passed", suite.name(), s.passed, s.total);
    for r in report.records.iter().filter(|r| !r.pass) {
        let detail = r.error.clone().unwrap_or_else(|| format!("residual {:e}, tolerance {:e}", r.residual.unwrap_or(f64::NAN), r.tolerance));
        eprintln!("  FAIL {}: {detail}", r.check_id);
    }
    if report.all_pass() {
        Ok(())
    } else {
        Err(Failure::Check(format!("{} checks failed", s.failed)))
    }
}

fn bt(common: &Common, state: Option<&Path>, sweep: Option<&str>, no_canonicity: bool) -> Result<(), Failure> {
    let cfg = common.resolve()?;
    if cfg.format != OutputFormat::Json {
        return Err(Failure::Config("bt writes JSON only".into()));
    }
    let source = load_state(state, &cfg)?;
    let mus: Vec<_> = match sweep {
        Some(s) => parse_sweep(s)?,
        None => vec![cfg.mu],
    }
    .into_iter()
    .map(|m| c64(m, 0.0))
    .collect();
    let opts = BtOptions { tol: cfg.tolerances.newton, ..BtOptions::default() };
    let records = with_pool(|| bt_sweep(&source, &mus, &opts, !no_canonicity))?;
    let failed = records.iter().filter(|r| !r.is_converged()).count();
    for r in &records {
        if let BtOutcome::Failed { mu, error } = r {
            eprintln!("  FAIL mu = {mu}: {error}");
        }
    }
    let report = BtSweepReport::new(source, records);
    let text = serde_json::to_string_pretty(&report).map_err(|e| Failure::Config(e.to_string()))? + "\n";
    emit(cfg.output_path.as_deref(), &text)?;
    eprintln!("bt: {}/{} transformations converged", mus.len() - failed, mus.len());
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::Check(format!("{failed} transformations failed")))
    }
}

fn evolve(common: &Common, state: Option<&Path>, dt: f64, steps: usize, every: usize) -> Result<(), Failure> {
    let cfg = common.resolve()?;
    if cfg.format != OutputFormat::Csv && common.format.is_some() {
        return Err(Failure::Config("evolve writes CSV only".into()));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Failure::Config(format!("dt must be positive, got {dt}")));
    }
    let source = load_state(state, &cfg)?;
    let csv = trajectory_csv(&source, dt, steps, every).map_err(|e| Failure::Check(e.to_string()))?;
    emit(cfg.output_path.as_deref(), &csv)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Verify { suite, common, timing } => verify(suite, common, *timing),
        Command::Bt { common, state, sweep, no_canonicity } => bt(common, state.as_deref(), sweep.as_deref(), *no_canonicity),
        Command::Evolve { common, state, dt, steps, every } => evolve(common, state.as_deref(), *dt, *steps, *every),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
