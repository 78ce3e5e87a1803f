//! Per-transformation records, sweeps and CSV tables.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{c64, C64};
use crate::backlund::{
    bt_apply, canonicity_from, conservation, intertwining_residual, map_residual, spectrality, BtError, BtOptions,
};
use crate::chain::{conserved_quantities, rk4_step, ChainError, ChainState};

pub const BT_SCHEMA: &str = "al-baxter/bt/v1";
pub const TRAJECTORY_SCHEMA: &str = "al-baxter/trajectory/v1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BtResiduals {
    pub bt: f64,
    pub intertwine: f64,
    pub spectrality: f64,
    pub trace: f64,
    /// Relative change of the conserved quantities.
    pub conservation: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub canonicity: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BtRecord {
    pub mu: C64,
    pub iters: usize,
    pub residuals: BtResiduals,
    #[serde(rename = "H_before")]
    pub h_before: Vec<C64>,
    #[serde(rename = "H_after")]
    pub h_after: Vec<C64>,
    pub det_before: C64,
    pub det_after: C64,
    pub gamma_k: Vec<C64>,
    pub target: ChainState,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum BtOutcome {
    Converged(BtRecord),
    Failed { mu: C64, error: String },
}

impl BtOutcome {
    pub fn is_converged(&self) -> bool {
        matches!(self, BtOutcome::Converged(_))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BtSweepReport {
    pub schema: String,
    pub version: String,
    pub source: ChainState,
    pub records: Vec<BtOutcome>,
}

impl BtSweepReport {
    pub fn new(source: ChainState, records: Vec<BtOutcome>) -> Self {
        Self { schema: BT_SCHEMA.to_string(), version: env!("CARGO_PKG_VERSION").to_string(), source, records }
    }
}

/// Unit-circle points used for the intertwining residual.
fn probe_lambdas() -> [C64; 4] {
    [c64(0.9, 0.3), c64(-0.4, 1.1), c64(1.2, -0.5), c64(-0.7, -0.6)]
}

/// Apply one BT and collect all residuals.
pub fn bt_record(state: &ChainState, mu: C64, opts: &BtOptions, with_canonicity: bool) -> Result<BtRecord, BtError> {
    let bt = bt_apply(state, mu, opts)?;
    let (before, after, dev) = conservation(&bt);
    let sp = spectrality(&bt)?;
    let canonicity = if with_canonicity { Some(canonicity_from(&bt, 1e-6, opts)?) } else { None };
    Ok(BtRecord {
        mu,
        iters: bt.newton_iters,
        residuals: BtResiduals {
            bt: map_residual(state, &bt.target, mu)?,
            intertwine: probe_lambdas().iter().map(|l| intertwining_residual(&bt, *l)).fold(0.0, f64::max),
            spectrality: sp.collinearity,
            trace: sp.trace_residual,
            conservation: dev,
            canonicity,
        },
        h_before: before.h,
        h_after: after.h,
        det_before: before.det,
        det_after: after.det,
        gamma_k: sp.gamma_k,
        target: bt.target,
    })
}

/// `count` evenly spaced values from `start` to `end` inclusive.
pub fn sweep_values(start: f64, end: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..count).map(|i| start + (end - start) * i as f64 / (count - 1) as f64).collect(),
    }
}

/// Independent BTs of one state, run concurrently and returned in input order.
pub fn bt_sweep(state: &ChainState, mus: &[C64], opts: &BtOptions, with_canonicity: bool) -> Vec<BtOutcome> {
    mus.par_iter()
        .map(|mu| match bt_record(state, *mu, opts, with_canonicity) {
            Ok(r) => BtOutcome::Converged(r),
            Err(e) => BtOutcome::Failed { mu: *mu, error: e.to_string() },
        })
        .collect()
}

/// RK4 trajectory with columns `t, q_k, r_k, H_i, det, drift` (complex values split into re/im).
pub fn trajectory_csv(state: &ChainState, dt: f64, steps: usize, every: usize) -> Result<String, ChainError> {
    let n = state.len();
    let every = every.max(1);
    let mut out = format!("# schema: {TRAJECTORY_SCHEMA}\nt");
    for name in ["q", "r"] {
        for k in 0..n {
            write!(out, ",{name}{k}_re,{name}{k}_im").expect("string write");
        }
    }
    for i in 0..=n {
        write!(out, ",H{i}_re,H{i}_im").expect("string write");
    }
    out.push_str(",det_re,det_im,drift\n");
    let start = conserved_quantities(state);
    let mut cur = state.clone();
    for step in 0..=steps {
        if step > 0 {
            cur = rk4_step(&cur, dt)?;
        }
        if step % every != 0 && step != steps {
            continue;
        }
        let c = conserved_quantities(&cur);
        let mut row = format!("{:e}", dt * step as f64);
        for z in cur.q().iter().chain(cur.r()).chain(&c.h).chain(std::iter::once(&c.det)) {
            write!(row, ",{:e},{:e}", z.re, z.im).expect("string write");
        }
        writeln!(row, ",{:e}", start.max_relative_deviation(&c)).expect("string write");
        out.push_str(&row);
    }
    Ok(out)
}
