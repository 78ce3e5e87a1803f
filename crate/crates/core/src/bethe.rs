//! Bethe equations, transfer-matrix eigenvalues and the q-difference Baxter
//! equation at the eigenvalue level.
//!
//! The Bethe equations
//! `Π_{j≠k} (λ_j²(1+η) − λ_k²)/(λ_j² − (1+η)λ_k²) = λ_k^{2N}`
//! are solved in `x_k = λ_k²` by Newton on their logarithmic form, following
//! a homotopy from `η = 0` (where every root is a `2N`-th root of unity).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{c64, solve_dense, LaurentPoly, Ring, C64};
use crate::qcalc::QParam;

use std::f64::consts::PI;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BetheError {
    #[error("seed index {index} is out of range 0..{limit}")]
    SeedOutOfRange { index: usize, limit: usize },
    #[error("seed indices {a} and {b} give the same lambda^2 (indices must differ mod N)")]
    DegenerateSeed { a: usize, b: usize },
    #[error("the seed selection is empty")]
    EmptySeed,
    #[error("roots collide or approach a singular denominator at homotopy parameter {s}")]
    Collision { s: f64 },
    #[error("homotopy step fell below the minimum at s = {s}")]
    PathStalled { s: f64 },
    #[error("Newton failed to reach the required residual ({residual:e})")]
    NewtonDivergence { residual: f64 },
    #[error("nu^2 = {0} coincides with a root")]
    Pole(C64),
    #[error("the sample list is empty")]
    NoSamples,
}

/// One accepted homotopy step: fraction `s` of the way to the target `η`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomotopyStep {
    pub s: f64,
    pub newton_iters: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetheConfig {
    pub n_sites: usize,
    pub q: QParam,
    pub roots: Vec<C64>,
    pub residual: f64,
    pub homotopy_path: Vec<HomotopyStep>,
}

impl BetheConfig {
    /// A configuration with given roots (not necessarily solutions).
    pub fn from_roots(n_sites: usize, q: QParam, roots: Vec<C64>) -> Self {
        let mut cfg = Self { n_sites, q, roots, residual: 0.0, homotopy_path: Vec::new() };
        cfg.residual = bethe_residuals(&cfg).into_iter().fold(0.0, f64::max);
        cfg
    }

    pub fn m(&self) -> usize {
        self.roots.len()
    }

    /// `δ = α^m`.
    pub fn delta(&self) -> C64 {
        self.q.alpha().powi(self.m() as i32)
    }
}

/// Wrap an angle into `(−π, π]`.
fn wrap_angle(t: f64) -> f64 {
    let w = t - 2.0 * PI * (t / (2.0 * PI)).round();
    if w <= -PI {
        w + 2.0 * PI
    } else {
        w
    }
}

/// Branch-free per-root residuals `|Log(λ_k^{2N} / Π_{j≠k}(…))|`.
pub fn bethe_residuals(cfg: &BetheConfig) -> Vec<f64> {
    let x: Vec<C64> = cfg.roots.iter().map(|l| l * l).collect();
    let e1 = 1.0 + cfg.q.eta();
    (0..x.len())
        .map(|k| {
            let mut ratio = x[k].powi(cfg.n_sites as i32);
            for j in (0..x.len()).filter(|&j| j != k) {
                ratio *= (x[j] - e1 * x[k]) / (x[j] * e1 - x[k]);
            }
            let l = ratio.ln();
            c64(l.re, wrap_angle(l.im)).norm()
        })
        .collect()
}

/// Logarithms tracked continuously: each is the principal value shifted by
/// the multiple of `2πi` closest to a reference.
fn unwrap_log(z: C64, reference: C64) -> C64 {
    let p = z.ln();
    let turns = ((reference.im - p.im) / (2.0 * PI)).round();
    c64(p.re, p.im + 2.0 * PI * turns)
}

struct LogSystem<'a> {
    n: f64,
    eta: C64,
    branch: &'a [f64],
}

impl LogSystem<'_> {
    /// Residuals and the tracked logarithms (`log x_k` then pair terms).
    fn eval(&self, x: &[C64], refs: &[C64]) -> (Vec<C64>, Vec<C64>) {
        let m = x.len();
        let e1 = 1.0 + self.eta;
        let mut logs = Vec::with_capacity(refs.len());
        let mut f = vec![C64::default(); m];
        for k in 0..m {
            let lx = unwrap_log(x[k], refs[k]);
            logs.push(lx);
            f[k] = self.n * lx - c64(0.0, 2.0 * PI * self.branch[k]);
        }
        let mut idx = m;
        for k in 0..m {
            for j in (0..m).filter(|&j| j != k) {
                let a = unwrap_log(x[j] * e1 - x[k], refs[idx]);
                let b = unwrap_log(x[j] - e1 * x[k], refs[idx + 1]);
                logs.push(a);
                logs.push(b);
                f[k] -= a - b;
                idx += 2;
            }
        }
        (f, logs)
    }

    fn jacobian(&self, x: &[C64]) -> Vec<Vec<C64>> {
        let m = x.len();
        let e1 = 1.0 + self.eta;
        let mut jac = vec![vec![C64::default(); m]; m];
        for k in 0..m {
            jac[k][k] = self.n / x[k];
            for j in (0..m).filter(|&j| j != k) {
                let da = x[j] * e1 - x[k];
                let db = x[j] - e1 * x[k];
                jac[k][k] -= -1.0 / da + e1 / db;
                jac[k][j] -= e1 / da - 1.0 / db;
            }
        }
        jac
    }
}

fn max_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn initial_logs(x: &[C64], eta: C64) -> Vec<C64> {
    let m = x.len();
    let e1 = 1.0 + eta;
    let mut logs: Vec<C64> = x.iter().map(|z| z.ln()).collect();
    for k in 0..m {
        for j in (0..m).filter(|&j| j != k) {
            logs.push((x[j] * e1 - x[k]).ln());
            logs.push((x[j] - e1 * x[k]).ln());
        }
    }
    logs
}

/// Newton at fixed `η`; returns the new point, its tracked logs and iteration count.
fn newton(sys: &LogSystem, x0: &[C64], refs: &[C64], max_iter: usize) -> Option<(Vec<C64>, Vec<C64>, usize, f64)> {
    let mut x = x0.to_vec();
    let (mut f, mut logs) = sys.eval(&x, refs);
    for iter in 1..=max_iter {
        let rhs: Vec<C64> = f.iter().map(|v| -v).collect();
        let dx = solve_dense(&sys.jacobian(&x), &rhs)?;
        let f0 = max_norm(&f);
        let mut t = 1.0;
        loop {
            let cand: Vec<C64> = x.iter().zip(&dx).map(|(a, d)| a + d * t).collect();
            let (fc, lc) = sys.eval(&cand, &logs);
            if max_norm(&fc) < f0 || max_norm(&fc) < 1e-14 || t < 1e-3 {
                x = cand;
                f = fc;
                logs = lc;
                break;
            }
            t *= 0.5;
        }
        if !x.iter().all(|z| z.is_finite()) {
            return None;
        }
        if max_norm(&dx) * t <= 1e-15 * (1.0 + max_norm(&x)) {
            let res = max_norm(&f);
            return Some((x, logs, iter, res));
        }
    }
    let res = max_norm(&f);
    (res < 1e-12).then_some((x, logs, max_iter, res))
}

fn well_separated(x: &[C64], eta: C64) -> bool {
    let e1 = 1.0 + eta;
    let scale = 1.0 + max_norm(x);
    for k in 0..x.len() {
        if x[k].norm() < 1e-10 {
            return false;
        }
        for j in (0..x.len()).filter(|&j| j != k) {
            if (x[j] - x[k]).norm() < 1e-8 * scale || (x[j] - e1 * x[k]).norm() < 1e-10 * scale {
                return false;
            }
        }
    }
    true
}

/// Solve the Bethe equations for `m = seed_selection.len()` particles.
///
/// Seeds are `λ = exp(iπ j/N)` for the selected `j ∈ 0..2N`; indices equal
/// mod `N` give the same `λ²` and are rejected.
pub fn solve_bethe(n_sites: usize, q: QParam, seed_selection: &[usize]) -> Result<BetheConfig, BetheError> {
    if seed_selection.is_empty() {
        return Err(BetheError::EmptySeed);
    }
    for (p, &a) in seed_selection.iter().enumerate() {
        if a >= 2 * n_sites {
            return Err(BetheError::SeedOutOfRange { index: a, limit: 2 * n_sites });
        }
        if let Some(&b) = seed_selection[..p].iter().find(|&&b| b % n_sites == a % n_sites) {
            return Err(BetheError::DegenerateSeed { a: b, b: a });
        }
    }
    let n = n_sites as f64;
    let mut lambdas: Vec<C64> = seed_selection.iter().map(|&j| C64::from_polar(1.0, PI * j as f64 / n)).collect();
    let mut x: Vec<C64> = lambdas.iter().map(|l| l * l).collect();
    let branch: Vec<f64> = x.iter().map(|z| (n * z.ln().im / (2.0 * PI)).round()).collect();
    let target = q.eta();
    let mut logs = initial_logs(&x, C64::default());
    let mut path = Vec::new();
    let mut s = 0.0;
    let mut h: f64 = 0.1;
    let min_step = 1e-6;
    while s < 1.0 {
        let s_next = (s + h).min(1.0);
        let sys = LogSystem { n, eta: target * s_next, branch: &branch };
        match newton(&sys, &x, &logs, 50) {
            Some((xn, ln, iters, _)) if well_separated(&xn, target * s_next) => {
                for (l, z) in lambdas.iter_mut().zip(&xn) {
                    let r = z.sqrt();
                    *l = if (r - *l).norm() <= (r + *l).norm() { r } else { -r };
                }
                x = xn;
                logs = ln;
                s = s_next;
                path.push(HomotopyStep { s, newton_iters: iters });
                h = (h * 1.5).min(0.25);
            }
            Some(_) if h <= min_step => return Err(BetheError::Collision { s: s_next }),
            _ => {
                h /= 2.0;
                if h < min_step {
                    return Err(BetheError::PathStalled { s });
                }
            }
        }
    }
    let cfg = BetheConfig::from_roots(n_sites, q, lambdas);
    cfg.residual_ok()?;
    Ok(BetheConfig { homotopy_path: path, ..cfg })
}

impl BetheConfig {
    fn residual_ok(&self) -> Result<(), BetheError> {
        if self.residual < 1e-12 {
            Ok(())
        } else {
            Err(BetheError::NewtonDivergence { residual: self.residual })
        }
    }
}

/// Eigenvalue of the transfer matrix on the Bethe state with the given roots:
/// `t(ν) = ν^N/(1+η)^m Π(1 − ην²/(λ_j²−ν²)) + ν^{−N}/(1+η)^m Π(1 + ηλ_j²/(λ_j²−ν²))`.
pub fn transfer_eigenvalue_roots(n_sites: usize, roots: &[C64], nu: C64, q: &QParam) -> C64 {
    let eta = q.eta();
    let nu2 = nu * nu;
    let n = n_sites as i32;
    let mut plus = nu.powi(n);
    let mut minus = nu.powi(-n);
    for l in roots {
        let l2 = l * l;
        plus *= (1.0 - eta * nu2 / (l2 - nu2)) / (1.0 + eta);
        minus *= (1.0 + eta * l2 / (l2 - nu2)) / (1.0 + eta);
    }
    plus + minus
}

pub fn transfer_eigenvalue(cfg: &BetheConfig, nu: C64) -> Result<C64, BetheError> {
    check_pole(cfg, nu)?;
    Ok(transfer_eigenvalue_roots(cfg.n_sites, &cfg.roots, nu, &cfg.q))
}

fn check_pole(cfg: &BetheConfig, nu: C64) -> Result<(), BetheError> {
    let nu2 = nu * nu;
    if nu.norm() == 0.0 || cfg.roots.iter().any(|l| (l * l - nu2).norm() < 1e-12 * (1.0 + nu2.norm())) {
        return Err(BetheError::Pole(nu2));
    }
    Ok(())
}

/// `ψ(ν) = Π_j (ν² − λ_j²)` as a Laurent polynomial in `ν`.
pub fn psi_poly(cfg: &BetheConfig) -> LaurentPoly {
    cfg.roots.iter().fold(LaurentPoly::constant(c64(1.0, 0.0)), |acc, l| {
        acc.mul(&LaurentPoly::from_terms([(2, c64(1.0, 0.0)), (0, -(l * l))]))
    })
}

fn psi_at(cfg: &BetheConfig, nu: C64) -> C64 {
    cfg.roots.iter().map(|l| nu * nu - l * l).product()
}

/// Ascending coefficients of `Π_j (s·x − x_j)`.
fn product_poly(xs: &[C64], s: C64) -> Vec<C64> {
    let mut p = vec![c64(1.0, 0.0)];
    for &xj in xs {
        let mut next = vec![C64::default(); p.len() + 1];
        for (i, &c) in p.iter().enumerate() {
            next[i + 1] += c * s;
            next[i] -= c * xj;
        }
        p = next;
    }
    p
}

/// Division of `num` by a monic `den` (ascending coefficients).
fn divide_monic(num: &[C64], den: &[C64]) -> (Vec<C64>, Vec<C64>) {
    let m = den.len() - 1;
    let mut rem = num.to_vec();
    if num.len() <= m {
        return (vec![C64::default()], rem);
    }
    let mut quot = vec![C64::default(); num.len() - m];
    for i in (0..quot.len()).rev() {
        let c = rem[i + m];
        quot[i] = c;
        for (d, &dc) in den.iter().enumerate() {
            rem[i + d] -= c * dc;
        }
    }
    rem.truncate(m);
    (quot, rem)
}

fn horner(p: &[C64], x: C64) -> C64 {
    p.iter().rev().fold(C64::default(), |acc, c| acc * x + c)
}

/// Transfer eigenvalue implied by the q-difference equation: the quotient of
/// `ν^N[δν^Nψ(ν/√α) + ν^{−N}ψ(ν√α)]` by `ψ(ν)` as a polynomial in `x = ν²`,
/// together with the division remainder (identically zero exactly on-shell).
#[derive(Clone, Debug, PartialEq)]
pub struct BaxterQuotient {
    /// `t(ν) = ν^{−N} Σ_i quotient[i] ν^{2i}`.
    pub quotient: Vec<C64>,
    pub remainder: Vec<C64>,
    n_sites: usize,
}

impl BaxterQuotient {
    pub fn transfer(&self, nu: C64) -> C64 {
        horner(&self.quotient, nu * nu) * nu.powi(-(self.n_sites as i32))
    }

    pub fn remainder_at(&self, nu: C64) -> C64 {
        horner(&self.remainder, nu * nu) * nu.powi(-(self.n_sites as i32))
    }
}

pub fn baxter_quotient(cfg: &BetheConfig) -> BaxterQuotient {
    let xs: Vec<C64> = cfg.roots.iter().map(|l| l * l).collect();
    let al = cfg.q.alpha();
    let n = cfg.n_sites;
    let scaled_up = product_poly(&xs, al.inv());
    let scaled_down = product_poly(&xs, al);
    let mut num = vec![C64::default(); n + xs.len() + 1];
    for (i, c) in scaled_up.iter().enumerate() {
        num[i + n] += cfg.delta() * c;
    }
    for (i, c) in scaled_down.iter().enumerate() {
        num[i] += c;
    }
    let (quotient, remainder) = divide_monic(&num, &product_poly(&xs, c64(1.0, 0.0)));
    BaxterQuotient { quotient, remainder, n_sites: n }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaxterReport {
    /// `max |t(ν)ψ(ν) − δν^Nψ(ν/√α) − ν^{−N}ψ(ν√α)|` with `t` from the quotient.
    pub residual: f64,
    /// Same identity in the normalization `ψ̂(ν) = ψ(ν)ν^{−2m}`.
    pub residual_hat: f64,
    /// `max |t_quotient(ν) − t_eigenvalue(ν)|`.
    pub eigenvalue_mismatch: f64,
}

/// Evaluate the q-difference Baxter equation at sample points.
pub fn baxter_qdiff_residual(cfg: &BetheConfig, samples: &[C64]) -> Result<BaxterReport, BetheError> {
    if samples.is_empty() {
        return Err(BetheError::NoSamples);
    }
    let bq = baxter_quotient(cfg);
    let (sa, delta) = (cfg.q.sqrt_alpha(), cfg.delta());
    let n = cfg.n_sites as i32;
    let m2 = 2 * cfg.m() as i32;
    let psi_hat = |nu: C64| psi_at(cfg, nu) * nu.powi(-m2);
    let mut report = BaxterReport { residual: 0.0, residual_hat: 0.0, eigenvalue_mismatch: 0.0 };
    for &nu in samples {
        check_pole(cfg, nu)?;
        let t = bq.transfer(nu);
        let lhs = t * psi_at(cfg, nu);
        let rhs = delta * nu.powi(n) * psi_at(cfg, nu / sa) + nu.powi(-n) * psi_at(cfg, nu * sa);
        report.residual = report.residual.max((lhs - rhs).norm());
        let hat = t * psi_hat(nu) - nu.powi(n) * psi_hat(nu / sa) - delta * nu.powi(-n) * psi_hat(nu * sa);
        report.residual_hat = report.residual_hat.max(hat.norm());
        let t13 = transfer_eigenvalue_roots(cfg.n_sites, &cfg.roots, nu, &cfg.q);
        report.eigenvalue_mismatch = report.eigenvalue_mismatch.max((t - t13).norm());
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemiclassicalReport {
    /// `δν^Nψ(ν/√α)/ψ(ν)`, the branch `ν^N e^{νS_0'/2}`.
    pub plus: C64,
    /// `ν^{−N}ψ(ν√α)/ψ(ν)`.
    pub minus: C64,
    /// `|t − plus − minus|`, exact for every `α`.
    pub exact_residual: f64,
    /// `|t − plus − δ/plus|`: deviation from the classical two-branch form, `O(1−α)`.
    pub classical_defect: f64,
}

pub fn semiclassical_check(cfg: &BetheConfig, nu: C64) -> Result<SemiclassicalReport, BetheError> {
    check_pole(cfg, nu)?;
    let sa = cfg.q.sqrt_alpha();
    let n = cfg.n_sites as i32;
    let psi = psi_at(cfg, nu);
    let plus = cfg.delta() * nu.powi(n) * psi_at(cfg, nu / sa) / psi;
    let minus = nu.powi(-n) * psi_at(cfg, nu * sa) / psi;
    let t = transfer_eigenvalue(cfg, nu)?;
    Ok(SemiclassicalReport {
        plus,
        minus,
        exact_residual: (t - plus - minus).norm(),
        classical_defect: (t - plus - cfg.delta() / plus).norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn q(a: f64) -> QParam {
        QParam::real(a).unwrap()
    }

    fn samples(count: usize, seed: u64) -> Vec<C64> {
        let mut g = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| C64::from_polar(g.gen_range(0.6..1.4), g.gen_range(-PI..PI))).collect()
    }

    #[test]
    fn one_particle_roots_are_roots_of_unity() {
        for n in 1..=6 {
            for a in [0.3, 0.5, 0.8] {
                for j in 0..2 * n {
                    let cfg = solve_bethe(n, q(a), &[j]).unwrap();
                    let seed = C64::from_polar(1.0, PI * j as f64 / n as f64);
                    assert!((cfg.roots[0] - seed).norm() < 1e-15, "N={n} j={j}");
                    assert!(cfg.residual < 1e-14);
                }
            }
        }
    }

    #[test]
    fn two_particle_solution() {
        let cfg = solve_bethe(2, q(0.5), &[0, 1]).unwrap();
        assert!(bethe_residuals(&cfg).iter().all(|r| *r < 1e-12));
        assert!(!cfg.homotopy_path.is_empty());
        assert_eq!(cfg.homotopy_path.last().unwrap().s, 1.0);
        let flipped = BetheConfig::from_roots(2, cfg.q, cfg.roots.iter().map(|l| -l).collect());
        assert!(flipped.residual < 1e-12);
    }

    #[test]
    fn residual_sensitivity() {
        let cfg = solve_bethe(3, q(0.5), &[0, 1]).unwrap();
        let mut roots = cfg.roots.clone();
        roots[0] += 1e-4;
        let pert = bethe_residuals(&BetheConfig::from_roots(3, cfg.q, roots));
        assert!(pert[0] > 1e-6 && pert[0] < 1e-2, "{pert:?}");
    }

    #[test]
    fn seed_validation() {
        assert_eq!(solve_bethe(2, q(0.5), &[0, 2]), Err(BetheError::DegenerateSeed { a: 0, b: 2 }));
        assert_eq!(solve_bethe(2, q(0.5), &[4]), Err(BetheError::SeedOutOfRange { index: 4, limit: 4 }));
        assert_eq!(solve_bethe(2, q(0.5), &[]), Err(BetheError::EmptySeed));
    }

    #[test]
    fn eigenvalue_examples() {
        let vac = BetheConfig::from_roots(3, q(0.5), vec![]);
        let nu = c64(0.8, 0.3);
        assert!((transfer_eigenvalue(&vac, nu).unwrap() - (nu.powi(3) + nu.powi(-3))).norm() < 1e-14);
        let cfg = solve_bethe(2, q(0.5), &[0, 1]).unwrap();
        let big = c64(1e4, 0.0);
        let t = transfer_eigenvalue(&cfg, big).unwrap();
        assert!((t / big.powi(2) - 1.0).norm() < 1e-6);
        assert!(transfer_eigenvalue(&cfg, cfg.roots[0]).is_err());
    }

    #[test]
    fn psi_examples() {
        let vac = BetheConfig::from_roots(2, q(0.5), vec![]);
        assert_eq!(psi_poly(&vac), LaurentPoly::constant(c64(1.0, 0.0)));
        let one = BetheConfig::from_roots(2, q(0.5), vec![c64(1.0, 0.0)]);
        assert_eq!(psi_poly(&one), LaurentPoly::from_terms([(2, c64(1.0, 0.0)), (0, c64(-1.0, 0.0))]));
        let cfg = solve_bethe(3, q(0.3), &[1, 2]).unwrap();
        let p = psi_poly(&cfg);
        for l in &cfg.roots {
            assert!(p.eval_scalar(*l).unwrap().norm() < 1e-14);
        }
        let at_zero = cfg.roots[0] * cfg.roots[0] * cfg.roots[1] * cfg.roots[1];
        assert!((p.eval_scalar(C64::default()).unwrap() - at_zero).norm() < 1e-14);
    }

    #[test]
    fn baxter_equation_on_and_off_shell() {
        for (n, sel, a) in [(2, vec![1], 0.5), (2, vec![0, 1], 0.5), (3, vec![0, 1], 0.8)] {
            let cfg = solve_bethe(n, q(a), &sel).unwrap();
            let rep = baxter_qdiff_residual(&cfg, &samples(16, 3)).unwrap();
            assert!(rep.residual < 1e-10 && rep.residual_hat < 1e-10 && rep.eigenvalue_mismatch < 1e-10, "{rep:?}");
        }
        let vac = BetheConfig::from_roots(2, q(0.5), vec![]);
        assert!(baxter_qdiff_residual(&vac, &samples(4, 4)).unwrap().residual < 1e-14);
        let off = BetheConfig::from_roots(2, q(0.5), vec![c64(0.9, 0.2), c64(-0.3, 1.1)]);
        assert!(baxter_qdiff_residual(&off, &samples(16, 5)).unwrap().residual > 1e-2);
    }

    #[test]
    fn semiclassical_branches() {
        let nu = c64(0.9, 0.4);
        let defect = |eps: f64| {
            let cfg = solve_bethe(2, q(1.0 - eps), &[0, 1]).unwrap();
            let rep = semiclassical_check(&cfg, nu).unwrap();
            assert!(rep.exact_residual < 1e-12);
            rep.classical_defect
        };
        let (d1, d2) = (defect(1e-3), defect(5e-4));
        assert!(d1 < 1e-2);
        // at least first order in 1 − α (second order is observed)
        let ratio = d1 / d2;
        assert!(ratio > 1.8, "defect ratio {ratio}");
    }
}
