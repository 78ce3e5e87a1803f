//! The check bodies of each suite.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::{params, BetheRoots, RunConfig, SuiteOutput};
use crate::algebra::{c64, MultiDual, C64};
use crate::backlund::{
    bt_apply, canonicity_from, classical_baxter_check, conservation, eigenvalues2, generating_function_check, intertwining_residual,
    map_residual, spectrality, BtError, BtOptions, BtResult,
};
use crate::bethe::{baxter_qdiff_residual, solve_bethe, BetheConfig};
use crate::chain::{conserved_quantities, monodromy_at, poisson_bracket, rk4_step, rmatrix_relation_residual, ChainState};
use crate::fock::{
    bethe_state, delta_eigen_residual, delta_transfer_commutator, eigen_residual, quantum_determinant, rll_residual,
    transfer_commutator_residual, ybe_residual, FockRep,
};
use crate::funspace::{baxter_action_residual, baxter_action_with_shift, triangular_check};
use crate::qcalc::{
    feq_residuals, g_hat, g_kernel, jackson_integral_between, q_exponential, q_inverse, q_operator, rho_functional_residual,
    JacksonOptions, KernelSite, QParam,
};
use crate::quadrature::QuadratureOptions;

/// Independent deterministic stream per check.
fn rng(cfg: &RunConfig, stream: u64) -> ChaCha8Rng {
    let mut g = ChaCha8Rng::seed_from_u64(cfg.seed);
    g.set_stream(stream);
    g
}

fn err(e: impl ToString) -> String {
    e.to_string()
}

fn cj(z: C64) -> Value {
    json!([z.re, z.im])
}

fn qparam(cfg: &RunConfig) -> QParam {
    cfg.qparam().expect("validated config")
}

fn spectral_samples(g: &mut ChaCha8Rng, count: usize) -> Vec<C64> {
    (0..count).map(|_| C64::from_polar(g.gen_range(0.6..1.4), g.gen_range(-PI..PI))).collect()
}

fn max_of(it: impl IntoIterator<Item = Result<f64, String>>) -> Result<f64, String> {
    it.into_iter().try_fold(0.0f64, |acc, r| r.map(|v| acc.max(v)))
}

pub(super) fn classical(cfg: &RunConfig) -> SuiteOutput {
    let mut out = SuiteOutput::default();
    let n = cfg.n;
    let mut g = rng(cfg, 1);
    let states: Vec<ChainState> = (0..cfg.sample_counts.states).map(|_| ChainState::random(n, 0.5, &mut g)).collect();
    let lambdas: Vec<(C64, C64)> = states
        .iter()
        .map(|_| (C64::from_polar(g.gen_range(0.5..1.5), g.gen_range(-PI..PI)), C64::from_polar(g.gen_range(0.5..1.5), g.gen_range(-PI..PI))))
        .collect();
    let p = params(&[("N", json!(n)), ("states", json!(states.len()))]);
    out.check(cfg, "classical.rmatrix", p.clone(), 1e-10, || {
        max_of(states.iter().zip(&lambdas).map(|(s, (l, v))| rmatrix_relation_residual(s, *l, *v).map_err(err)))
    });
    out.check(cfg, "classical.bracket", p.clone(), 1e-14, || {
        let mut worst = 0.0f64;
        for s in &states {
            for k in 0..n {
                let fq = move |q: &[MultiDual], _: &[MultiDual]| q[k].clone();
                let fr = move |_: &[MultiDual], r: &[MultiDual]| r[k].clone();
                let want = 1.0 - s.q()[k] * s.r()[k];
                worst = worst.max((poisson_bracket(&fq, &fr, s) - want).norm());
            }
        }
        Ok(worst)
    });
    out.check(cfg, "classical.cyclic_invariance", p.clone(), 1e-12, || {
        let mut worst = 0.0f64;
        for s in &states {
            let base = conserved_quantities(s);
            for shift in 1..n {
                worst = worst.max(base.max_relative_deviation(&conserved_quantities(&s.rotated(shift))));
            }
        }
        Ok(worst)
    });
    let (dt, steps) = (1e-3, 200);
    out.check(cfg, "classical.rk4_drift", params(&[("N", json!(n)), ("dt", json!(dt)), ("steps", json!(steps))]), 1e-9, || {
        let mut worst = 0.0f64;
        for s in &states {
            let start = conserved_quantities(s);
            let mut cur = s.clone();
            for _ in 0..steps {
                cur = rk4_step(&cur, dt).map_err(err)?;
            }
            worst = worst.max(start.max_relative_deviation(&conserved_quantities(&cur)));
        }
        Ok(worst)
    });
    out
}

struct BtSample {
    state: ChainState,
    bt: Result<BtResult, BtError>,
    lambdas: Vec<C64>,
}

fn bt_checks(cfg: &RunConfig, s: &BtSample, index: usize, opts: &BtOptions) -> SuiteOutput {
    let mut out = SuiteOutput::default();
    let p = params(&[("N", json!(cfg.n)), ("mu", json!(cfg.mu)), ("state", json!(index))]);
    let bt = s.bt.as_ref().map_err(err);
    out.check(cfg, "bt.map", p.clone(), 1e-12, || {
        let bt = bt.clone()?;
        map_residual(&s.state, &bt.target, bt.mu).map_err(err)
    });
    out.check(cfg, "bt.conservation", p.clone(), 1e-10, || Ok(conservation(bt.clone()?).2));
    out.check(cfg, "bt.intertwining", p.clone(), 1e-10, || {
        let bt = bt.clone()?;
        Ok(s.lambdas.iter().map(|l| intertwining_residual(bt, *l)).fold(0.0, f64::max))
    });
    let sp = bt.clone().and_then(|b| spectrality(b).map_err(err));
    out.check(cfg, "bt.spectrality", p.clone(), 1e-10, || Ok(sp.clone()?.collinearity));
    out.check(cfg, "bt.trace_formula", p.clone(), 1e-10, || Ok(sp.clone()?.trace_residual));
    out.check(cfg, "bt.eigenvalues", p.clone(), 1e-10, || {
        let rep = sp.clone()?;
        let l = monodromy_at(s.state.q(), s.state.r(), bt.clone()?.mu);
        let ev = eigenvalues2(&l);
        let pair = [rep.gamma, l.det() / rep.gamma];
        let direct = (ev[0] - pair[0]).norm().max((ev[1] - pair[1]).norm());
        let swapped = (ev[0] - pair[1]).norm().max((ev[1] - pair[0]).norm());
        Ok(direct.min(swapped) / (1.0 + ev[0].norm().max(ev[1].norm())))
    });
    out.check(cfg, "bt.classical_baxter", p.clone(), 1e-10, || {
        let rep = classical_baxter_check(bt.clone()?).map_err(err)?;
        Ok(rep.trace_residual.max(rep.consistency_residual))
    });
    out.check(cfg, "bt.canonicity", p, 1e-5, || canonicity_from(bt.clone()?, 1e-6, opts).map_err(err));
    out
}

pub(super) fn backlund(cfg: &RunConfig) -> SuiteOutput {
    let opts = BtOptions { tol: cfg.tolerances.newton, ..BtOptions::default() };
    let mu = cfg.mu_c();
    let mut g = rng(cfg, 2);
    let inputs: Vec<(ChainState, Vec<C64>)> = (0..cfg.sample_counts.states)
        .map(|_| {
            let s = ChainState::random(cfg.n, 0.4, &mut g);
            let lambdas = (0..cfg.sample_counts.points).map(|_| C64::from_polar(g.gen_range(0.5..1.5), g.gen_range(-PI..PI))).collect();
            (s, lambdas)
        })
        .collect();
    let samples: Vec<BtSample> =
        inputs.into_par_iter().map(|(state, lambdas)| BtSample { bt: bt_apply(&state, mu, &opts), state, lambdas }).collect();
    let parts: Vec<SuiteOutput> = samples.par_iter().enumerate().map(|(i, s)| bt_checks(cfg, s, i, &opts)).collect();
    let mut out = SuiteOutput::default();
    for part in parts {
        out.extend(part);
    }

    let real = ChainState::random_real(cfg.n, (0.1, 0.5), (0.2, 0.8), &mut g);
    let gf = |m: f64| -> Result<f64, BtError> {
        let bt = bt_apply(&real, c64(m, 0.0), &opts)?;
        let rep = generating_function_check(&bt, 1e-6, QuadratureOptions::default())?;
        Ok(rep.grad_residual_r.max(rep.grad_residual_rtilde).max(rep.phi_residual))
    };
    // the gradient identity needs real positive r~; fall back to a small parameter otherwise
    let (gf_mu, gf_res) = match gf(cfg.mu) {
        Err(BtError::BranchCrossing(_)) => (0.3, gf(0.3)),
        other => (cfg.mu, other),
    };
    out.check(cfg, "bt.generating_function", params(&[("N", json!(cfg.n)), ("mu", json!(gf_mu))]), 1e-6, || gf_res.map_err(err));

    let (mu1, mu2) = (mu, mu * 0.5);
    let base = &samples[0].state;
    out.check(cfg, "bt.commuting", params(&[("N", json!(cfg.n)), ("mu1", cj(mu1)), ("mu2", cj(mu2))]), 1e-9, || {
        let twice = |a: C64, b: C64| -> Result<ChainState, String> {
            let first = bt_apply(base, a, &opts).map_err(err)?;
            Ok(bt_apply(&first.target, b, &opts).map_err(err)?.target)
        };
        let (x, y) = (twice(mu1, mu2)?, twice(mu2, mu1)?);
        Ok(conserved_quantities(&x).max_relative_deviation(&conserved_quantities(&y)))
    });
    out
}

pub(super) fn quantum(cfg: &RunConfig) -> SuiteOutput {
    let mut out = SuiteOutput::default();
    let q = qparam(cfg);
    let mut g = rng(cfg, 3);
    let mut triples = Vec::new();
    while triples.len() < cfg.sample_counts.ybe {
        let l = c64(g.gen_range(0.2..2.0), g.gen_range(-1.0..1.0));
        let n = c64(g.gen_range(0.2..2.0), g.gen_range(-1.0..1.0));
        let e = c64(g.gen_range(-1.0..1.0), g.gen_range(-1.0..1.0));
        if [l * l - n * n, l * l - 1.0, n * n - 1.0].iter().all(|d| d.norm() > 0.1) {
            triples.push((l, n, e));
        }
    }
    out.check(cfg, "quantum.ybe", params(&[("samples", json!(triples.len()))]), 1e-12, || {
        max_of(triples.iter().map(|(l, n, e)| ybe_residual(*l, *n, *e).map_err(err)))
    });
    let p = params(&[("N", json!(cfg.n)), ("n_max", json!(cfg.n_max)), ("alpha", cj(q.alpha()))]);
    let rep = FockRep::new(cfg.n, cfg.n_max, q).map_err(err);
    let pairs: Vec<(C64, C64)> = (0..4)
        .map(|_| (C64::from_polar(g.gen_range(0.6..1.4), g.gen_range(-PI..PI)), C64::from_polar(g.gen_range(0.6..1.4), g.gen_range(-PI..PI))))
        .collect();
    out.check(cfg, "quantum.rll", p.clone(), 1e-11, || {
        let rep = rep.as_ref().map_err(Clone::clone)?;
        max_of(pairs.iter().map(|(l, v)| rll_residual(rep, *l, *v).map_err(err)))
    });
    out.check(cfg, "quantum.transfer_commutator", p.clone(), 1e-10, || {
        let rep = rep.as_ref().map_err(Clone::clone)?;
        max_of(pairs.iter().map(|(l, v)| transfer_commutator_residual(rep, *l, *v).map_err(err)))
    });
    out.check(cfg, "quantum.qdet", p.clone(), 1e-11, || {
        let rep = rep.as_ref().map_err(Clone::clone)?;
        max_of(pairs.iter().map(|(l, _)| quantum_determinant(rep, *l).map(|d| d.pairwise.max(d.to_product)).map_err(err)))
    });
    out.check(cfg, "quantum.delta_transfer", p, 1e-10, || {
        let rep = rep.as_ref().map_err(Clone::clone)?;
        max_of(pairs.iter().map(|(l, v)| delta_transfer_commutator(rep, *l, *v).map_err(err)))
    });
    out
}

fn bethe_config(cfg: &RunConfig) -> Result<BetheConfig, String> {
    let q = qparam(cfg);
    if cfg.m == 0 {
        return Ok(BetheConfig::from_roots(cfg.n, q, Vec::new()));
    }
    solve_bethe(cfg.n, q, &(0..cfg.m).collect::<Vec<_>>()).map_err(err)
}

fn bethe_params(cfg: &RunConfig) -> Value {
    params(&[("N", json!(cfg.n)), ("m", json!(cfg.m)), ("alpha", cj(qparam(cfg).alpha()))])
}

pub(super) fn bethe(cfg: &RunConfig) -> SuiteOutput {
    let mut out = SuiteOutput::default();
    let solved = bethe_config(cfg);
    let p = bethe_params(cfg);
    out.check(cfg, "bethe.solve", p.clone(), 1e-12, || Ok(solved.clone()?.residual));
    if let Ok(c) = &solved {
        out.artifacts.bethe.push(BetheRoots::from_config(c));
    }
    if cfg.m == 1 {
        out.check(cfg, "bethe.roots_of_unity", p.clone(), 1e-14, || {
            let c = solved.clone()?;
            Ok(c.roots.iter().map(|l| (l.powi(2 * cfg.n as i32) - 1.0).norm()).fold(0.0, f64::max))
        });
    }
    let fock_p = params(&[("N", json!(cfg.n)), ("m", json!(cfg.m)), ("n_max", json!(cfg.n_max))]);
    let rep = FockRep::new(cfg.n, cfg.n_max, qparam(cfg)).map_err(err);
    let state = match (&rep, &solved) {
        (Ok(r), Ok(c)) => bethe_state(r, &c.roots).map_err(err),
        (Err(e), _) | (_, Err(e)) => Err(e.clone()),
    };
    let nus = spectral_samples(&mut rng(cfg, 4), cfg.sample_counts.spectral);
    out.check(cfg, "bethe.fock_eigen", fock_p.clone(), 1e-10, || {
        let (r, c, v) = (rep.as_ref().map_err(Clone::clone)?, solved.clone()?, state.clone()?);
        max_of(nus.iter().map(|nu| eigen_residual(r, &v, &c.roots, *nu).map_err(err)))
    });
    out.check(cfg, "bethe.delta_eigen", fock_p, 1e-10, || {
        let (r, v) = (rep.as_ref().map_err(Clone::clone)?, state.clone()?);
        delta_eigen_residual(r, &v, cfg.m).map_err(err)
    });
    out
}

fn positive_points(g: &mut ChaCha8Rng, n: usize, count: usize) -> Vec<Vec<C64>> {
    (0..count).map(|_| (0..n).map(|_| c64(g.gen_range(0.1..0.9), 0.0)).collect()).collect()
}

type Poly = [f64; 4];

fn poly_eval(c: &Poly, x: C64, y: C64) -> C64 {
    c.iter().rev().fold(C64::default(), |acc, a| acc * x + a) * (1.0 + 0.5 * y)
}

fn qcalc_laws(cfg: &RunConfig, out: &mut SuiteOutput) {
    let mut g = rng(cfg, 6);
    let count = cfg.sample_counts.polynomials;
    let draw = |g: &mut ChaCha8Rng| -> Poly { [0; 4].map(|_| g.gen_range(-2.0..2.0)) };
    let pairs: Vec<(Poly, Poly, f64, f64, f64)> =
        (0..count).map(|_| (draw(&mut g), draw(&mut g), g.gen_range(0.1..0.9), g.gen_range(0.1..0.9), g.gen_range(0.1..0.9))).collect();
    let p = params(&[("pairs", json!(count))]);
    let o = JacksonOptions::default();
    out.check(cfg, "qcalc.leibniz", p.clone(), 1e-10, || {
        let mut worst = 0.0f64;
        for (a, b, x, y, alpha) in &pairs {
            let q = QParam::real(*alpha).map_err(err)?;
            let f = |r: &[C64]| poly_eval(a, r[0], r[1]);
            let h = |r: &[C64]| poly_eval(b, r[0], r[1]);
            let fh = |r: &[C64]| f(r) * h(r);
            let pt = [c64(*x, 0.0), c64(*y, 0.0)];
            let lhs = q_operator(&fh, 0, &q, &pt).map_err(err)?;
            let rhs = f(&pt) * q_operator(&h, 0, &q, &pt).map_err(err)? + h(&[pt[0] * q.alpha(), pt[1]]) * q_operator(&f, 0, &q, &pt).map_err(err)?;
            worst = worst.max((lhs - rhs).norm() / (1.0 + lhs.norm()));
        }
        Ok(worst)
    });
    out.check(cfg, "qcalc.integration_by_parts", p.clone(), 1e-10, || {
        let mut worst = 0.0f64;
        for (a, b, x, y, alpha) in &pairs {
            let q = QParam::real(*alpha).map_err(err)?;
            let f = |r: &[C64]| poly_eval(a, r[0], r[1]);
            let h = |r: &[C64]| poly_eval(b, r[0], r[1]);
            let qop = |fun: &dyn Fn(&[C64]) -> C64, r: &[C64]| q_operator(&|s: &[C64]| fun(s), 0, &q, r).unwrap_or_default();
            let f_qh = |r: &[C64]| if r[0].norm() == 0.0 { C64::default() } else { f(r) * qop(&h, r) };
            let hs_qf = |r: &[C64]| if r[0].norm() == 0.0 { C64::default() } else { h(&[r[0] * q.alpha(), r[1]]) * qop(&f, r) };
            let pt = [C64::default(), c64(*y, 0.0)];
            let (lo, hi) = (c64(-x, 0.0), c64(*x, 0.0));
            let lhs = jackson_integral_between(&f_qh, 0, &q, lo, hi, &pt, o).map_err(err)?;
            let at = |v: C64| f(&[v, pt[1]]) * h(&[v, pt[1]]);
            let rhs = at(hi) - at(lo) - jackson_integral_between(&hs_qf, 0, &q, lo, hi, &pt, o).map_err(err)?;
            worst = worst.max((lhs - rhs).norm() / (1.0 + lhs.norm()));
        }
        Ok(worst)
    });
    out.check(cfg, "qcalc.jackson_inverse", p, 1e-12, || {
        let mut worst = 0.0f64;
        for (a, _, x, y, alpha) in &pairs {
            let q = QParam::real(*alpha).map_err(err)?;
            let f = |r: &[C64]| poly_eval(a, r[0], r[1]);
            let inner = |r: &[C64]| q_inverse(&f, 0, &q, r, o).unwrap_or(c64(f64::NAN, 0.0));
            let pt = [c64(*x, 0.0), c64(*y, 0.0)];
            let v = q_operator(&inner, 0, &q, &pt).map_err(err)?;
            worst = worst.max((v - f(&pt)).norm() / (1.0 + f(&pt).norm()));
        }
        Ok(worst)
    });
    out.check(cfg, "qcalc.q_exponential_limit", params(&[("alpha", json!(1.0 - 1e-4))]), 1e-3, || {
        let q = QParam::real(1.0 - 1e-4).map_err(err)?;
        max_of((0..=8).map(|i| {
            let x = -1.0 + 0.25 * i as f64;
            q_exponential(c64(x, 0.0), &q).map(|v| (v - x.exp()).norm()).map_err(err)
        }))
    });
}

pub(super) fn baxter(cfg: &RunConfig) -> SuiteOutput {
    let mut out = SuiteOutput::default();
    let q = qparam(cfg);
    let mu = cfg.mu_c();
    let solved = bethe_config(cfg);
    let nus = spectral_samples(&mut rng(cfg, 5), cfg.sample_counts.spectral);
    let p = bethe_params(cfg);
    out.check(cfg, "baxter.qdiff", p.clone(), 1e-10, || {
        let rep = baxter_qdiff_residual(&solved.clone()?, &nus).map_err(err)?;
        Ok(rep.residual.max(rep.residual_hat).max(rep.eigenvalue_mismatch))
    });
    out.control("baxter.qdiff_offshell", p, 1e-2, || {
        let roots = match &solved {
            Ok(c) if !c.roots.is_empty() => c.roots.iter().map(|l| l + c64(0.1, 0.2)).collect(),
            _ => vec![c64(0.9, 0.2)],
        };
        Ok(baxter_qdiff_residual(&BetheConfig::from_roots(cfg.n, q, roots), &nus).map_err(err)?.residual)
    });

    let mut g = rng(cfg, 7);
    let rtilde: Vec<C64> = (0..cfg.n).map(|_| c64(g.gen_range(1.0..2.0), 0.0)).collect();
    let pts = positive_points(&mut g, cfg.n, cfg.sample_counts.points);
    let kp = params(&[("N", json!(cfg.n)), ("mu", json!(cfg.mu)), ("points", json!(pts.len()))]);
    out.check(cfg, "baxter.kernel_action", kp.clone(), 1e-10, || {
        let rep = baxter_action_residual(mu, q, &rtilde, &pts).map_err(err)?;
        Ok(rep.trace_form.max(rep.delta_form))
    });
    out.control("baxter.kernel_action_wrong_shift", kp.clone(), 1e-2, || {
        Ok(baxter_action_with_shift(mu, q, &rtilde, &pts, q.alpha()).map_err(err)?.trace_form)
    });
    let tri = || -> Result<Vec<_>, String> {
        let mut reps = Vec::new();
        for k in 0..cfg.n {
            for pt in &pts {
                reps.push(triangular_check(mu, q, &rtilde, k, pt[k]).map_err(err)?);
            }
        }
        Ok(reps)
    };
    let tri = tri();
    out.check(cfg, "baxter.triangular_annihilation", kp.clone(), 1e-12, || {
        Ok(tri.clone()?.iter().map(|r| r.upper_right.max(r.det_m)).fold(0.0, f64::max))
    });
    out.check(cfg, "baxter.triangular_diagonal", kp.clone(), 1e-11, || {
        Ok(tri.clone()?.iter().map(|r| r.upper_left.max(r.lower_right)).fold(0.0, f64::max))
    });
    out.check(cfg, "baxter.rho_functional", kp, 1e-12, || {
        let mut worst = 0.0f64;
        for k in 0..cfg.n {
            let ks = KernelSite::new(mu, rtilde[k], rtilde[(k + cfg.n - 1) % cfg.n]).map_err(err)?;
            for pt in &pts {
                worst = worst.max(rho_functional_residual(&ks, &q, pt[k]).map_err(err)?);
            }
        }
        Ok(worst)
    });
    let triples: Vec<(C64, C64, C64)> = (0..cfg.sample_counts.points)
        .map(|_| (c64(g.gen_range(0.3..1.2), 0.0), c64(g.gen_range(0.3..1.2), 0.0), c64(g.gen_range(0.05..0.5), 0.0)))
        .collect();
    let fp = params(&[("mu", json!(cfg.mu)), ("points", json!(triples.len()))]);
    out.check(cfg, "baxter.kernel_equations", fp.clone(), 1e-10, || {
        max_of(triples.iter().map(|(c, cn, r)| feq_residuals(*c, *cn, *r, mu, &q).map(|e| e.into_iter().fold(0.0, f64::max)).map_err(err)))
    });
    out.check(cfg, "baxter.g_relations", fp, 1e-12, || {
        let a = q.alpha();
        max_of(triples.iter().map(|(c, cn, _)| -> Result<f64, String> {
            let z = c / cn;
            let hat = (g_hat(z, &q).map_err(err)? - z * g_hat(a * z, &q).map_err(err)?).norm() / g_hat(z, &q).map_err(err)?.norm();
            let gk = g_kernel(*c, *cn, mu, &q).map_err(err)?;
            let hom = (gk - a * g_kernel(a * c, a * cn, mu, &q).map_err(err)?).norm() / gk.norm();
            Ok(hat.max(hom))
        }))
    });
    qcalc_laws(cfg, &mut out);
    out
}
