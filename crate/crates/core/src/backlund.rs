//! Classical Bäcklund transformation of the periodic chain.
//!
//! The map `(q, r) → (q̃, r̃)` with parameter `μ` is defined through the
//! intertwining relation `L̃_k D_k = D_{k+1} L_k` with the dressing matrix
//!
//! ```text
//! D_k(λ) = ( λ² − μ²(1 − b_k c_k)   λ b_k )      b_k = q_k,  c_k = r̃_{k−1}
//!          ( λ c_k                   1     )
//! ```
//!
//! Entry (2,1) of the relation gives, site by site,
//! `1 − q_k r_k = (r̃_{k−1} − r_k)(μ² r̃_k + r_k) / (μ² r̃_k r̃_{k−1})`,
//! which is solved for `r̃` by damped Newton with continuation in `|μ|`.
//! Entry (1,2) then gives `q̃_k = q_{k+1} − μ² q_k (1 − q_{k+1} r̃_k)` explicitly.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{c64, solve_dense, Mat2, C64};
use crate::chain::{conserved_quantities, monodromy_at, wrap, ChainError, ChainState, ConservedSet};
use crate::quadrature::{integrate, QuadratureOptions};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BtError {
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error("the transformation parameter must be nonzero")]
    ZeroParameter,
    #[error("Newton did not converge at mu = {mu} after {iterations} iterations (residual {residual:e})")]
    NonConvergence { mu: C64, iterations: usize, residual: f64 },
    #[error("singular Newton Jacobian at mu = {mu}")]
    SingularJacobian { mu: C64 },
    #[error("continuation in |mu| stalled at |mu| = {reached}")]
    ContinuationStalled { reached: f64 },
    #[error("vanishing denominator mu^2 r~_k r~_(k-1) at site {site}")]
    VanishingDenominator { site: usize },
    #[error("transformation result fails the map equations (residual {residual:e})")]
    InvalidResult { residual: f64 },
    #[error("kernel vector at site {site} is numerically zero")]
    ZeroKernelVector { site: usize },
    #[error("generating function needs real data with r, r~ > 0 and positive log arguments: {0}")]
    BranchCrossing(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BtOptions {
    /// Required residual of both map equations.
    pub tol: f64,
    /// Newton iteration cap per continuation step.
    pub max_iter: usize,
    /// Starting `|μ|` of the continuation path.
    pub seed_mu: f64,
}

impl Default for BtOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_iter: 100, seed_mu: 1e-3 }
    }
}

/// A converged transformation `(q, r) → (q̃, r̃)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BtResult {
    pub mu: C64,
    pub source: ChainState,
    pub target: ChainState,
    /// Spectrality factors `γ_k` with `L_k(μ)|w_k⟩ = γ_k |w_{k+1}⟩`.
    pub gamma: Vec<C64>,
    pub newton_iters: usize,
    pub residual: f64,
}

impl BtResult {
    pub fn rtilde(&self) -> &[C64] {
        self.target.r()
    }

    pub fn qtilde(&self) -> &[C64] {
        self.target.q()
    }

    pub fn gamma_product(&self) -> C64 {
        self.gamma.iter().product()
    }

    pub fn dressing(&self) -> DressingMatrix {
        let n = self.source.len() as isize;
        DressingMatrix {
            b: self.source.q().to_vec(),
            c: (0..n).map(|k| self.target.r_at(k - 1)).collect(),
            mu: self.mu,
        }
    }

    /// Re-check the map equations; rejects hand-built or corrupted results.
    pub fn validate(&self) -> Result<(), BtError> {
        if self.source.len() != self.target.len() || self.gamma.len() != self.source.len() {
            return Err(BtError::InvalidResult { residual: f64::INFINITY });
        }
        let residual = map_residual(&self.source, &self.target, self.mu)?;
        if !(residual < self.residual.max(1e-12) * 10.0) {
            return Err(BtError::InvalidResult { residual });
        }
        if let Some(site) = self.gamma.iter().position(|g| g.norm() < 1e-300) {
            return Err(BtError::ZeroKernelVector { site });
        }
        Ok(())
    }
}

/// Dressing matrices `D_k(λ)` of one transformation.
#[derive(Clone, Debug, PartialEq)]
pub struct DressingMatrix {
    /// `b_k = q_k`
    pub b: Vec<C64>,
    /// `c_k = r̃_{k−1}`
    pub c: Vec<C64>,
    pub mu: C64,
}

impl DressingMatrix {
    pub fn at(&self, k: isize, lambda: C64) -> Mat2<C64> {
        let i = wrap(k, self.b.len());
        let (b, c) = (self.b[i], self.c[i]);
        let mu2 = self.mu * self.mu;
        Mat2::new(lambda * lambda - mu2 * (1.0 - b * c), lambda * b, lambda * c, c64(1.0, 0.0))
    }

    /// Kernel of `D_k(μ)`: `(1, −μ c_k)`.
    pub fn kernel(&self, k: isize) -> [C64; 2] {
        [c64(1.0, 0.0), -self.mu * self.c[wrap(k, self.c.len())]]
    }
}

/// `D_k(λ)` for a converged transformation.
pub fn dressing_matrix(bt: &BtResult, k: usize, lambda: C64) -> Mat2<C64> {
    bt.dressing().at(k as isize, lambda)
}

fn lax(q: C64, r: C64, lambda: C64) -> Mat2<C64> {
    Mat2::new(lambda, q, r, lambda.inv())
}

/// Polynomial form of the first map equation, `f_k(r̃) = 0`.
fn first_line(q: &[C64], r: &[C64], mu2: C64, x: &[C64]) -> Vec<C64> {
    let n = x.len() as isize;
    (0..n)
        .map(|k| {
            let i = k as usize;
            let xm = x[wrap(k - 1, n as usize)];
            let w = 1.0 - q[i] * r[i];
            (xm - r[i]) * (mu2 * x[i] + r[i]) - w * mu2 * x[i] * xm
        })
        .collect()
}

fn first_line_jacobian(q: &[C64], r: &[C64], mu2: C64, x: &[C64]) -> Vec<Vec<C64>> {
    let n = x.len();
    let mut jac = vec![vec![C64::default(); n]; n];
    for k in 0..n {
        let km = wrap(k as isize - 1, n);
        let w = 1.0 - q[k] * r[k];
        jac[k][k] += (x[km] - r[k]) * mu2 - w * mu2 * x[km];
        jac[k][km] += (mu2 * x[k] + r[k]) - w * mu2 * x[k];
    }
    jac
}

fn max_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Damped Newton for `r̃` at fixed `μ`, starting from `guess`.
fn newton_rtilde(q: &[C64], r: &[C64], mu: C64, guess: Vec<C64>, max_iter: usize) -> Result<(Vec<C64>, usize), BtError> {
    let mu2 = mu * mu;
    let mut x = guess;
    let mut fx = first_line(q, r, mu2, &x);
    for iter in 1..=max_iter {
        let jac = first_line_jacobian(q, r, mu2, &x);
        let rhs: Vec<C64> = fx.iter().map(|v| -v).collect();
        let dx = solve_dense(&jac, &rhs).ok_or(BtError::SingularJacobian { mu })?;
        let f0 = max_norm(&fx);
        let mut t = 1.0;
        let (x_new, f_new) = loop {
            let cand: Vec<C64> = x.iter().zip(&dx).map(|(a, d)| a + d * t).collect();
            let fc = first_line(q, r, mu2, &cand);
            if max_norm(&fc) < f0 || t < 1e-4 {
                break (cand, fc);
            }
            t *= 0.5;
        };
        let step = max_norm(&dx) * t;
        x = x_new;
        fx = f_new;
        if !x.iter().all(|z| z.is_finite()) {
            break;
        }
        if step <= 1e-15 * (1.0 + max_norm(&x)) {
            return Ok((x, iter));
        }
    }
    let residual = max_norm(&fx);
    if residual <= 1e-15 * (1.0 + max_norm(&x)) {
        return Ok((x, max_iter));
    }
    Err(BtError::NonConvergence { mu, iterations: max_iter, residual })
}

/// `q̃_k = q_{k+1} − μ² q_k (1 − q_{k+1} r̃_k)`.
fn qtilde_from(q: &[C64], mu: C64, rt: &[C64]) -> Vec<C64> {
    let n = q.len();
    (0..n)
        .map(|k| {
            let qp = q[(k + 1) % n];
            qp - mu * mu * q[k] * (1.0 - qp * rt[k])
        })
        .collect()
}

/// Max residual of both map equations at `(source, target)`.
///
/// Each equation is used with its denominator cleared and divided by the
/// magnitude of its terms, so the value stays meaningful as `μ → 0`.
pub fn map_residual(source: &ChainState, target: &ChainState, mu: C64) -> Result<f64, BtError> {
    let n = source.len() as isize;
    let mu2 = mu * mu;
    let mut worst: f64 = 0.0;
    for k in 0..n {
        let (q, r) = (source.q_at(k), source.r_at(k));
        let (qt, rt) = (target.q_at(k), target.r_at(k));
        let (rtm, rtp) = (target.r_at(k - 1), target.r_at(k + 1));
        let rn = source.r_at(k + 1);
        let d1 = mu2 * rt * rtm;
        let d2 = mu2 * rtp * rtm;
        if d1.norm() < 1e-300 || d2.norm() < 1e-300 {
            return Err(BtError::VanishingDenominator { site: k as usize });
        }
        let right = rt * mu2 + r;
        let (w, wt) = (1.0 - q * r, 1.0 - qt * rt);
        let line1 = (w * d1 - (rtm - r) * right).norm() / ((w * d1).norm() + (rtm.norm() + r.norm()) * right.norm());
        let line2 = (wt * d2 - (rt - rn) * right).norm() / ((wt * d2).norm() + (rt.norm() + rn.norm()) * right.norm());
        worst = worst.max(line1).max(line2);
    }
    Ok(worst)
}

fn finish(state: &ChainState, mu: C64, rt: Vec<C64>, iters: usize, opts: &BtOptions) -> Result<BtResult, BtError> {
    let scale = 1.0 + max_norm(state.r());
    if let Some(site) = rt.iter().position(|z| z.norm() < 1e-12 * scale) {
        return Err(BtError::VanishingDenominator { site });
    }
    let qt = qtilde_from(state.q(), mu, &rt);
    let target = ChainState::new(qt, rt)?;
    let residual = map_residual(state, &target, mu)?;
    if !(residual < opts.tol) {
        return Err(BtError::NonConvergence { mu, iterations: iters, residual });
    }
    let mut bt = BtResult { mu, source: state.clone(), target, gamma: Vec::new(), newton_iters: iters, residual };
    bt.gamma = spectral_factors(&bt)?.0;
    Ok(bt)
}

/// Solve the transformation at parameter `μ` by continuation from a small seed.
pub fn bt_apply(state: &ChainState, mu: C64, opts: &BtOptions) -> Result<BtResult, BtError> {
    if mu.norm() == 0.0 {
        return Err(BtError::ZeroParameter);
    }
    let n = state.len();
    if let Some(site) = state.r().iter().position(|z| z.norm() < 1e-12) {
        return Err(BtError::VanishingDenominator { site });
    }
    let shift_guess: Vec<C64> = (0..n).map(|k| state.r()[(k + 1) % n]).collect();
    let target_abs = mu.norm();
    let dir = mu / target_abs;
    let mut s = opts.seed_mu.min(target_abs);
    let (mut x, mut iters) = newton_rtilde(state.q(), state.r(), dir * s, shift_guess, opts.max_iter)?;
    let mut ratio: f64 = 2.0;
    while s < target_abs {
        let s_next = (s * ratio).min(target_abs);
        match newton_rtilde(state.q(), state.r(), dir * s_next, x.clone(), opts.max_iter) {
            Ok((xn, it)) if it < opts.max_iter => {
                x = xn;
                iters += it;
                s = s_next;
                ratio = (ratio * 1.5).min(4.0);
            }
            _ => {
                ratio = 1.0 + (ratio - 1.0) / 2.0;
                if ratio - 1.0 < 1e-6 {
                    return Err(BtError::ContinuationStalled { reached: s });
                }
            }
        }
    }
    finish(state, mu, x, iters, opts)
}

/// Solve at `μ` directly from a nearby known `r̃` (no continuation).
pub fn bt_apply_from(state: &ChainState, mu: C64, guess: &[C64], opts: &BtOptions) -> Result<BtResult, BtError> {
    let (x, iters) = newton_rtilde(state.q(), state.r(), mu, guess.to_vec(), opts.max_iter)?;
    finish(state, mu, x, iters, opts)
}

/// Max-entry magnitude of `L̃_k(λ) D_k(λ) − D_{k+1}(λ) L_k(λ)` over all sites.
pub fn intertwining_residual(bt: &BtResult, lambda: C64) -> f64 {
    let d = bt.dressing();
    let n = bt.source.len() as isize;
    (0..n)
        .map(|k| {
            let lt = lax(bt.target.q_at(k), bt.target.r_at(k), lambda);
            let l = lax(bt.source.q_at(k), bt.source.r_at(k), lambda);
            lt.mul(&d.at(k, lambda)).sub(&d.at(k + 1, lambda).mul(&l)).max_abs()
        })
        .fold(0.0, f64::max)
}

/// γ_k by least squares and the per-site collinearity residual.
fn spectral_factors(bt: &BtResult) -> Result<(Vec<C64>, f64), BtError> {
    let d = bt.dressing();
    let n = bt.source.len() as isize;
    let mut gammas = Vec::with_capacity(n as usize);
    let mut worst: f64 = 0.0;
    for k in 0..n {
        let w = d.kernel(k);
        let wn = d.kernel(k + 1);
        let norm2 = wn[0].norm_sqr() + wn[1].norm_sqr();
        if norm2 < 1e-300 {
            return Err(BtError::ZeroKernelVector { site: wrap(k + 1, n as usize) });
        }
        let v = lax(bt.source.q_at(k), bt.source.r_at(k), bt.mu).apply(w);
        let g = (wn[0].conj() * v[0] + wn[1].conj() * v[1]) / norm2;
        let res = ((v[0] - g * wn[0]).norm_sqr() + (v[1] - g * wn[1]).norm_sqr()).sqrt();
        worst = worst.max(res);
        gammas.push(g);
    }
    Ok((gammas, worst))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralityReport {
    pub gamma_k: Vec<C64>,
    pub gamma: C64,
    /// Max over sites of `‖L_k(μ) w_k − γ_k w_{k+1}‖`.
    pub collinearity: f64,
    /// `|Tr L(μ) − (det L(μ)/γ + γ)|`.
    pub trace_residual: f64,
}

pub fn spectrality(bt: &BtResult) -> Result<SpectralityReport, BtError> {
    let (gamma_k, collinearity) = spectral_factors(bt)?;
    let gamma: C64 = gamma_k.iter().product();
    let l = monodromy_at(bt.source.q(), bt.source.r(), bt.mu);
    let trace_residual = (l.trace() - (l.det() / gamma + gamma)).norm();
    Ok(SpectralityReport { gamma_k, gamma, collinearity, trace_residual })
}

/// The two eigenvalues of a numeric 2x2 matrix.
pub fn eigenvalues2(m: &Mat2<C64>) -> [C64; 2] {
    let tr = m.trace();
    let disc = (tr * tr - 4.0 * m.det()).sqrt();
    [(tr + disc) / 2.0, (tr - disc) / 2.0]
}

/// Generating function `F(r, r̃)` of the transformation on real positive data.
pub fn generating_function(r: &[f64], rt: &[f64], mu: f64, quad: QuadratureOptions) -> f64 {
    let n = r.len();
    let mu2 = mu * mu;
    let lnmu = mu.ln();
    (0..n)
        .map(|k| {
            let rn = r[(k + 1) % n];
            let rk = r[k];
            let first = integrate(|z| (z - rn).ln() / z, rn + 1.0, rt[k], quad);
            let second = integrate(|z| (mu2 * z + rk).ln() / z, 1.0 / mu2, rt[k], quad);
            let rtm = rt[(k + n - 1) % n];
            first + second - rt[k].ln() * (mu2 * rtm).ln() - 2.0 * lnmu * lnmu
        })
        .sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratingFunctionReport {
    /// Max over k of `|∂F/∂r_k + ln(1 − q_k r_k)/r_k|`.
    pub grad_residual_r: f64,
    /// Max over k of `|∂F/∂r̃_k − ln(1 − q̃_k r̃_k)/r̃_k|`.
    pub grad_residual_rtilde: f64,
    /// `|∂F/∂μ − (2/μ) Σ ln((μ² r̃_k + r_k)/(μ² r̃_k))|`.
    pub phi_residual: f64,
    /// Change of F when the initial quadrature panels are doubled.
    pub node_doubling_delta: f64,
}

fn real_parts(v: &[C64], what: &str) -> Result<Vec<f64>, BtError> {
    v.iter()
        .map(|z| {
            if z.im.abs() > 1e-12 * (1.0 + z.re.abs()) || !(z.re > 0.0) {
                Err(BtError::BranchCrossing(format!("{what} = {z} is not real positive")))
            } else {
                Ok(z.re)
            }
        })
        .collect()
}

/// Check `dF = Σ ln(1 − q̃ r̃)/r̃ dr̃ − ln(1 − q r)/r dr` by central differences.
pub fn generating_function_check(bt: &BtResult, step: f64, quad: QuadratureOptions) -> Result<GeneratingFunctionReport, BtError> {
    bt.validate()?;
    let r = real_parts(bt.source.r(), "r")?;
    let rt = real_parts(bt.rtilde(), "r~")?;
    if bt.mu.im.abs() > 1e-15 || !(bt.mu.re > 0.0) {
        return Err(BtError::BranchCrossing(format!("mu = {} is not real positive", bt.mu)));
    }
    let mu = bt.mu.re;
    let n = r.len();
    let w: Vec<f64> = real_parts(&bt.source.q().iter().zip(bt.source.r()).map(|(q, r)| 1.0 - q * r).collect::<Vec<_>>(), "1 - q r")?;
    let wt: Vec<f64> = real_parts(&bt.qtilde().iter().zip(bt.rtilde()).map(|(q, r)| 1.0 - q * r).collect::<Vec<_>>(), "1 - q~ r~")?;
    for k in 0..n {
        if !(rt[k] - r[(k + 1) % n] > 0.0) {
            return Err(BtError::BranchCrossing(format!("r~_{k} - r_{} <= 0", (k + 1) % n)));
        }
    }
    let f = |r: &[f64], rt: &[f64], mu: f64| generating_function(r, rt, mu, quad);
    let mut grad_r: f64 = 0.0;
    let mut grad_rt: f64 = 0.0;
    for k in 0..n {
        let bump = |v: &[f64], h: f64| -> Vec<f64> {
            let mut out = v.to_vec();
            out[k] += h;
            out
        };
        let d_rt = (f(&r, &bump(&rt, step), mu) - f(&r, &bump(&rt, -step), mu)) / (2.0 * step);
        grad_rt = grad_rt.max((d_rt - wt[k].ln() / rt[k]).abs());
        let d_r = (f(&bump(&r, step), &rt, mu) - f(&bump(&r, -step), &rt, mu)) / (2.0 * step);
        grad_r = grad_r.max((d_r + w[k].ln() / r[k]).abs());
    }
    let d_mu = (f(&r, &rt, mu + step) - f(&r, &rt, mu - step)) / (2.0 * step);
    let phi: f64 = (2.0 / mu) * (0..n).map(|k| ((mu * mu * rt[k] + r[k]) / (mu * mu * rt[k])).ln()).sum::<f64>();
    let doubled = QuadratureOptions { initial_panels: quad.initial_panels.max(1) * 2, ..quad };
    let node_doubling_delta = (f(&r, &rt, mu) - generating_function(&r, &rt, mu, doubled)).abs();
    Ok(GeneratingFunctionReport {
        grad_residual_r: grad_r,
        grad_residual_rtilde: grad_rt,
        phi_residual: (d_mu - phi).abs(),
        node_doubling_delta,
    })
}

/// `Φ = (2/μ) Σ_k ln((μ² r̃_k + r_k)/(μ² r̃_k))`, principal logs summed site by site.
pub fn phi(bt: &BtResult) -> C64 {
    let mu2 = bt.mu * bt.mu;
    let s: C64 = bt.source.r().iter().zip(bt.rtilde()).map(|(r, rt)| ((mu2 * rt + r) / (mu2 * rt)).ln()).sum();
    s * 2.0 / bt.mu
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalBaxterReport {
    pub phi: C64,
    /// `|Tr L(μ) − μ^N e^{μΦ/2} − det L(μ) μ^{−N} e^{−μΦ/2}|`.
    pub trace_residual: f64,
    /// `|μ^N e^{μΦ/2} − det L(μ)/γ|`.
    pub consistency_residual: f64,
}

pub fn classical_baxter_check(bt: &BtResult) -> Result<ClassicalBaxterReport, BtError> {
    bt.validate()?;
    let n = bt.source.len() as i32;
    let mu = bt.mu;
    let phi = phi(bt);
    let l = monodromy_at(bt.source.q(), bt.source.r(), mu);
    let det = l.det();
    let e = (mu * phi / 2.0).exp();
    let plus = mu.powi(n) * e;
    let minus = det * mu.powi(-n) / e;
    let gamma = bt.gamma_product();
    Ok(ClassicalBaxterReport {
        phi,
        trace_residual: (l.trace() - plus - minus).norm(),
        consistency_residual: (plus - det / gamma).norm(),
    })
}

fn map_outputs(bt: &BtResult) -> Vec<C64> {
    bt.qtilde().iter().chain(bt.rtilde()).copied().collect()
}

/// Max deviation of the transformed brackets from the canonical ones.
///
/// The Jacobian of `(q, r) → (q̃, r̃)` is taken by central differences with
/// the given step; each of the `4N` neighbours is solved by Newton started
/// from the unperturbed `r̃`.
pub fn canonicity_check(state: &ChainState, mu: C64, step: f64, opts: &BtOptions) -> Result<f64, BtError> {
    let base = bt_apply(state, mu, opts)?;
    canonicity_from(&base, step, opts)
}

pub fn canonicity_from(base: &BtResult, step: f64, opts: &BtOptions) -> Result<f64, BtError> {
    let state = &base.source;
    let n = state.len();
    let loose = BtOptions { tol: opts.tol.max(1e-10), ..*opts };
    // jac[a][v]: derivative of output a (q̃ then r̃) w.r.t. input v (q then r)
    let mut jac = vec![vec![C64::default(); 2 * n]; 2 * n];
    for v in 0..2 * n {
        let mut outs = Vec::with_capacity(2);
        for sign in [1.0, -1.0] {
            let (mut q, mut r) = (state.q().to_vec(), state.r().to_vec());
            if v < n {
                q[v] += sign * step;
            } else {
                r[v - n] += sign * step;
            }
            let s = ChainState::new(q, r)?;
            outs.push(map_outputs(&bt_apply_from(&s, base.mu, base.rtilde(), &loose)?));
        }
        for a in 0..2 * n {
            jac[a][v] = (outs[0][a] - outs[1][a]) / (2.0 * step);
        }
    }
    let weights: Vec<C64> = state.q().iter().zip(state.r()).map(|(q, r)| 1.0 - q * r).collect();
    let bracket = |a: usize, b: usize| -> C64 {
        (0..n).map(|l| (jac[a][l] * jac[b][n + l] - jac[a][n + l] * jac[b][l]) * weights[l]).sum()
    };
    let (qt, rt) = (base.qtilde(), base.rtilde());
    let mut worst: f64 = 0.0;
    for k in 0..n {
        for j in 0..n {
            let want = if k == j { 1.0 - qt[k] * rt[k] } else { C64::default() };
            worst = worst
                .max((bracket(k, n + j) - want).norm())
                .max(bracket(k, j).norm())
                .max(bracket(n + k, n + j).norm());
        }
    }
    Ok(worst)
}

/// Conserved quantities before and after, and their max relative deviation.
pub fn conservation(bt: &BtResult) -> (ConservedSet, ConservedSet, f64) {
    let a = conserved_quantities(&bt.source);
    let b = conserved_quantities(&bt.target);
    let dev = a.max_relative_deviation(&b);
    (a, b, dev)
}
