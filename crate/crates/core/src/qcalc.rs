//! q-calculus: q-Pochhammer symbols, Jackson derivative and integral, and the
//! kernel functions of the Baxter operator.
//!
//! The deformation parameter is `α = 1/(1+η)`. The operator `q_k` acts on
//! functions of `r_1..r_N` as `q_k f = (f(r) − f(…αr_k…))/r_k`, i.e.
//! `(1−α)` times the Jackson derivative in `r_k`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{c64, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QError {
    #[error("invalid deformation parameter alpha = {0}")]
    InvalidAlpha(C64),
    #[error("infinite products need |alpha| < 1, got |alpha| = {0}")]
    NonConvergent(f64),
    #[error("coordinate r_{site} is zero")]
    ZeroCoordinate { site: usize },
    #[error("site {site} is out of range for a point of length {len}")]
    SiteOutOfRange { site: usize, len: usize },
    #[error("pole: {0}")]
    Pole(String),
    #[error("argument {0} lies on the branch cut of the principal logarithm")]
    BranchCut(C64),
    #[error("Jackson series tail did not decay within {terms} terms")]
    TailNotDecaying { terms: usize },
}

/// Deformation parameter `α` with derived `η = 1/α − 1` and principal `√α`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QParam {
    alpha: C64,
    eta: C64,
    sqrt_alpha: C64,
}

impl QParam {
    pub fn new(alpha: C64) -> Result<Self, QError> {
        if !alpha.is_finite() || alpha.norm() == 0.0 || alpha == c64(1.0, 0.0) {
            return Err(QError::InvalidAlpha(alpha));
        }
        Ok(Self { alpha, eta: alpha.inv() - 1.0, sqrt_alpha: alpha.sqrt() })
    }

    /// Real `α` in `(0, 1)`.
    pub fn real(alpha: f64) -> Result<Self, QError> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(QError::InvalidAlpha(c64(alpha, 0.0)));
        }
        Self::new(c64(alpha, 0.0))
    }

    pub fn from_eta(eta: C64) -> Result<Self, QError> {
        Self::new((1.0 + eta).inv())
    }

    pub fn alpha(&self) -> C64 {
        self.alpha
    }

    pub fn eta(&self) -> C64 {
        self.eta
    }

    pub fn sqrt_alpha(&self) -> C64 {
        self.sqrt_alpha
    }

    pub fn require_convergent(&self) -> Result<(), QError> {
        let m = self.alpha.norm();
        if m < 1.0 {
            Ok(())
        } else {
            Err(QError::NonConvergent(m))
        }
    }
}

/// `(x; α)_∞ = Π_{p≥0} (1 − x α^p)`, truncated once `|x α^p| < 1e-17`.
pub fn qpochhammer_inf(x: C64, q: &QParam) -> Result<C64, QError> {
    q.require_convergent()?;
    let mut prod = c64(1.0, 0.0);
    let mut term = x;
    while term.norm() >= 1e-17 {
        prod *= 1.0 - term;
        term *= q.alpha;
    }
    Ok(prod)
}

/// `1/((x(1−α); α)_∞)`, which tends to `e^x` as `α → 1`.
pub fn q_exponential(x: C64, q: &QParam) -> Result<C64, QError> {
    let p = qpochhammer_inf(x * (1.0 - q.alpha), q)?;
    if p.norm() == 0.0 {
        return Err(QError::Pole(format!("q-exponential at x = {x}")));
    }
    Ok(p.inv())
}

/// A function of the coordinates `r_1..r_N`.
pub trait MultiFn {
    fn eval(&self, r: &[C64]) -> C64;
}

impl<F: Fn(&[C64]) -> C64> MultiFn for F {
    fn eval(&self, r: &[C64]) -> C64 {
        self(r)
    }
}

fn scaled(point: &[C64], k: usize, factor: C64) -> Vec<C64> {
    let mut p = point.to_vec();
    p[k] *= factor;
    p
}

fn with_coordinate(point: &[C64], k: usize, value: C64) -> Vec<C64> {
    let mut p = point.to_vec();
    p[k] = value;
    p
}

fn check_site(point: &[C64], k: usize) -> Result<(), QError> {
    if k >= point.len() {
        return Err(QError::SiteOutOfRange { site: k, len: point.len() });
    }
    if point[k].norm() == 0.0 {
        return Err(QError::ZeroCoordinate { site: k });
    }
    Ok(())
}

/// `D_{α,k} f = (f(…αr_k…) − f(r)) / (αr_k − r_k)`.
pub fn jackson_derivative(f: &dyn MultiFn, k: usize, q: &QParam, point: &[C64]) -> Result<C64, QError> {
    check_site(point, k)?;
    let shifted = f.eval(&scaled(point, k, q.alpha));
    Ok((shifted - f.eval(point)) / ((q.alpha - 1.0) * point[k]))
}

/// `q_k f = (f(r) − f(…αr_k…)) / r_k`.
pub fn q_operator(f: &dyn MultiFn, k: usize, q: &QParam, point: &[C64]) -> Result<C64, QError> {
    check_site(point, k)?;
    Ok((f.eval(point) - f.eval(&scaled(point, k, q.alpha))) / point[k])
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JacksonOptions {
    /// Maximum number of series terms.
    pub max_terms: usize,
    /// Stop once a term is below this fraction of the running sum.
    pub rel_tol: f64,
}

impl Default for JacksonOptions {
    fn default() -> Self {
        Self { max_terms: 10_000, rel_tol: 1e-17 }
    }
}

/// Definite Jackson sum `∫_0^b d_α r_k f = Σ_{n≥0} α^n b f(…α^n b…)`.
///
/// The other coordinates are taken from `point`.
pub fn jackson_integral(f: &dyn MultiFn, k: usize, q: &QParam, b: C64, point: &[C64], opts: JacksonOptions) -> Result<C64, QError> {
    q.require_convergent()?;
    if k >= point.len() {
        return Err(QError::SiteOutOfRange { site: k, len: point.len() });
    }
    let mut sum = C64::default();
    let mut x = b;
    let mut small_run = 0;
    for _ in 0..opts.max_terms {
        let term = x * f.eval(&with_coordinate(point, k, x));
        if !term.is_finite() {
            return Err(QError::Pole(format!("integrand at r_{k} = {x}")));
        }
        sum += term;
        if term.norm() <= opts.rel_tol * sum.norm() || term.norm() < 1e-300 {
            small_run += 1;
            if small_run >= 2 {
                return Ok(sum);
            }
        } else {
            small_run = 0;
        }
        x *= q.alpha;
    }
    Err(QError::TailNotDecaying { terms: opts.max_terms })
}

/// `∫_a^b d_α r_k f = ∫_0^b − ∫_0^a`.
pub fn jackson_integral_between(
    f: &dyn MultiFn,
    k: usize,
    q: &QParam,
    a: C64,
    b: C64,
    point: &[C64],
    opts: JacksonOptions,
) -> Result<C64, QError> {
    Ok(jackson_integral(f, k, q, b, point, opts)? - jackson_integral(f, k, q, a, point, opts)?)
}

/// `(q_k)^{-1} f` at `point`: the Jackson sum with upper limit `r_k`.
pub fn q_inverse(f: &dyn MultiFn, k: usize, q: &QParam, point: &[C64], opts: JacksonOptions) -> Result<C64, QError> {
    check_site(point, k)?;
    jackson_integral(f, k, q, point[k], point, opts)
}

/// Per-site parameters of the kernel `ρ_k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSite {
    pub mu: C64,
    pub rtilde_k: C64,
    pub rtilde_km1: C64,
    /// The free constant `G_k`.
    pub normalization: C64,
}

impl KernelSite {
    pub fn new(mu: C64, rtilde_k: C64, rtilde_km1: C64) -> Result<Self, QError> {
        if mu.norm() == 0.0 || rtilde_k.norm() == 0.0 || rtilde_km1.norm() == 0.0 {
            return Err(QError::Pole("kernel parameters mu, r~_k, r~_(k-1) must be nonzero".into()));
        }
        Ok(Self { mu, rtilde_k, rtilde_km1, normalization: c64(1.0, 0.0) })
    }

    pub fn with_mu(&self, mu: C64) -> Self {
        Self { mu, ..*self }
    }
}

fn nonzero(v: C64, what: &str) -> Result<C64, QError> {
    if v.norm() < 1e-300 || !v.is_finite() {
        Err(QError::Pole(what.to_string()))
    } else {
        Ok(v)
    }
}

/// `ρ_k = G_k / ((r_k/r̃_{k−1}; α)_∞ (−r_k/(μ² r̃_k); α)_∞)`.
pub fn rho_site(ks: &KernelSite, q: &QParam, r_k: C64) -> Result<C64, QError> {
    let a = qpochhammer_inf(r_k / ks.rtilde_km1, q)?;
    let b = qpochhammer_inf(-r_k / (ks.mu * ks.mu * ks.rtilde_k), q)?;
    Ok(ks.normalization / nonzero(a * b, "rho_k")?)
}

/// Relative residual of `ρ_k(r) = μ²r̃_k r̃_{k−1} / ((μ²r̃_k + r_k)(r̃_{k−1} − r_k)) · ρ_k(αr)`.
pub fn rho_functional_residual(ks: &KernelSite, q: &QParam, r_k: C64) -> Result<f64, QError> {
    let mu2 = ks.mu * ks.mu;
    let factor = mu2 * ks.rtilde_k * ks.rtilde_km1 / nonzero((mu2 * ks.rtilde_k + r_k) * (ks.rtilde_km1 - r_k), "rho_k recursion")?;
    let lhs = rho_site(ks, q, r_k)?;
    let rhs = factor * rho_site(ks, q, q.alpha * r_k)?;
    Ok((lhs - rhs).norm() / lhs.norm())
}

fn principal_ln(z: C64) -> Result<C64, QError> {
    if z.im == 0.0 && z.re <= 0.0 {
        return Err(QError::BranchCut(z));
    }
    Ok(z.ln())
}

/// `Ĝ(z) = z^{1/2 − ln z/(2 ln α)}`, a solution of `Ĝ(z) = z Ĝ(αz)`.
pub fn g_hat(z: C64, q: &QParam) -> Result<C64, QError> {
    let lz = principal_ln(z)?;
    let la = principal_ln(q.alpha)?;
    Ok(((0.5 - lz / (2.0 * la)) * lz).exp())
}

/// `G(c, c') = (1/c') (c/c')^{2 ln μ/ln α} Ĝ(c/c')`, homogeneous of degree −1.
pub fn g_kernel(c: C64, c_next: C64, mu: C64, q: &QParam) -> Result<C64, QError> {
    let z = c / nonzero(c_next, "c_(k+1) = 0")?;
    let lz = principal_ln(z)?;
    let s = 2.0 * principal_ln(mu)? / principal_ln(q.alpha)?;
    Ok((s * lz).exp() * g_hat(z, q)? / c_next)
}

/// `F_k(x, c_{k+1}, r_k) = G(x, c_{k+1}) / ((−r_k/(μ²c_{k+1}); α)_∞ (αr_k/x; α)_∞)`.
///
/// With `x = αc_k` this is the closed-form solution of the kernel equations.
pub fn kernel_f(x: C64, c_next: C64, r: C64, mu: C64, q: &QParam) -> Result<C64, QError> {
    let x = nonzero(x, "c_k = 0")?;
    let g = g_kernel(x, c_next, mu, q)?;
    let a = qpochhammer_inf(-r / (mu * mu * c_next), q)?;
    let b = qpochhammer_inf(q.alpha * r / x, q)?;
    Ok(g / nonzero(a * b, "F_k")?)
}

/// Residuals of the four functional equations for `F_k`, relative to `|F_k(αc, c', r)|`.
pub fn feq_residuals(c: C64, c_next: C64, r: C64, mu: C64, q: &QParam) -> Result<[f64; 4], QError> {
    let a = q.alpha;
    let mu2 = mu * mu;
    let f = |x: C64, y: C64, z: C64| kernel_f(x, y, z, mu, q);
    let base = f(a * c, c_next, r)?;
    let shifted_all = f(a * c, a * c_next, a * r)?;
    let shifted_c = f(a * c, a * c_next, r)?;
    let unshifted = f(c, c_next, r)?;
    let shifted_r = f(a * c, c_next, a * r)?;
    let e1 = r * base + mu2 * a * c_next * shifted_all - (r + mu2 * a * c_next) * shifted_c;
    let e2 = (r - c) * base - (r * unshifted - c * shifted_r);
    let e3 = c * base - (r + mu2 * a * c_next) * shifted_c;
    let e4 = (c - r) * base - mu2 * c_next * unshifted;
    let scale = base.norm();
    Ok([e1.norm() / scale, e2.norm() / scale, e3.norm() / scale, e4.norm() / scale])
}

/// `Q̂_μ(αr̃ | r) = A Π_k [r̃_k (r_k/r̃_{k−1}; α)_∞ (−r_k/(μ²r̃_k); α)_∞]^{-1}`, periodic in k.
pub fn qhat_kernel(mu: C64, q: &QParam, rtilde: &[C64], r: &[C64], normalization: C64) -> Result<C64, QError> {
    let n = rtilde.len();
    if r.len() != n || n == 0 {
        return Err(QError::SiteOutOfRange { site: r.len(), len: n });
    }
    let mut denom = c64(1.0, 0.0);
    for k in 0..n {
        let rt = nonzero(rtilde[k], "r~_k = 0")?;
        let rtm = nonzero(rtilde[(k + n - 1) % n], "r~_(k-1) = 0")?;
        denom *= rt * qpochhammer_inf(r[k] / rtm, q)? * qpochhammer_inf(-r[k] / (mu * mu * rt), q)?;
    }
    Ok(normalization / nonzero(denom, "Q kernel")?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(a: f64) -> QParam {
        QParam::real(a).unwrap()
    }

    #[test]
    fn qparam_relations() {
        let p = q(0.3);
        assert!((p.alpha() * (1.0 + p.eta()) - 1.0).norm() < 1e-15);
        assert!((p.sqrt_alpha() * p.sqrt_alpha() - p.alpha()).norm() < 1e-15);
        assert!(QParam::real(1.0).is_err());
        assert!(QParam::real(0.0).is_err());
        let back = QParam::from_eta(p.eta()).unwrap();
        assert!((back.alpha() - p.alpha()).norm() < 1e-15);
        let big = QParam::new(c64(1.5, 0.0)).unwrap();
        assert!(matches!(qpochhammer_inf(c64(0.1, 0.0), &big), Err(QError::NonConvergent(_))));
    }

    #[test]
    fn qpochhammer_examples() {
        assert_eq!(qpochhammer_inf(C64::default(), &q(0.5)).unwrap(), c64(1.0, 0.0));
        let tiny = QParam::real(1e-20).unwrap();
        assert!((qpochhammer_inf(c64(0.3, 0.0), &tiny).unwrap() - 0.7).norm() < 1e-15);
        let v = qpochhammer_inf(c64(0.5, 0.0), &q(0.5)).unwrap();
        assert!((v.re - 0.288_788_095_086_602_4).abs() < 1e-15);
    }

    #[test]
    fn monomial_q_action() {
        let f = |r: &[C64]| r[0].powi(3);
        let v = q_operator(&f, 0, &q(0.5), &[c64(2.0, 0.0)]).unwrap();
        assert!((v - 3.5).norm() < 1e-14);
        let konst = |_: &[C64]| c64(4.0, 1.0);
        assert_eq!(q_operator(&konst, 0, &q(0.5), &[c64(0.7, 0.0)]).unwrap(), C64::default());
        assert!(matches!(q_operator(&f, 0, &q(0.5), &[C64::default()]), Err(QError::ZeroCoordinate { site: 0 })));
    }

    #[test]
    fn jackson_derivative_tends_to_derivative() {
        let f = |r: &[C64]| (r[0] * r[1]).sin();
        let p = [c64(0.7, 0.0), c64(1.3, 0.0)];
        let d = jackson_derivative(&f, 0, &q(1.0 - 1e-7), &p).unwrap();
        let exact = p[1] * (p[0] * p[1]).cos();
        assert!((d - exact).norm() < 1e-6);
    }

    #[test]
    fn jackson_integral_examples() {
        let p = q(0.5);
        let one = |_: &[C64]| c64(1.0, 0.0);
        let b = c64(0.8, 0.0);
        let v = jackson_integral(&one, 0, &p, b, &[c64(0.1, 0.0)], JacksonOptions::default()).unwrap();
        assert!((v - b / (1.0 - p.alpha())).norm() < 1e-15);
        let odd = |r: &[C64]| r[0].powi(3) - 2.0 * r[0];
        let v = jackson_integral_between(&odd, 0, &p, -b, b, &[C64::default()], JacksonOptions::default()).unwrap();
        assert!(v.norm() < 1e-15);
        let grow = |r: &[C64]| r[0].powi(-3);
        let res = jackson_integral(&grow, 0, &p, b, &[C64::default()], JacksonOptions { max_terms: 200, rel_tol: 1e-17 });
        assert!(res.is_err());
    }

    #[test]
    fn q_inverse_round_trips() {
        let p = q(0.4);
        let f = |r: &[C64]| 1.0 + r[0] * r[1] - r[0].powi(3);
        let point = [c64(0.6, 0.0), c64(-0.3, 0.2)];
        let o = JacksonOptions::default();
        let inner = |x: &[C64]| q_inverse(&f, 0, &p, x, o).unwrap();
        let v = q_operator(&inner, 0, &p, &point).unwrap();
        assert!((v - f(&point)).norm() < 1e-12);
        // the other order loses the r_k = 0 value
        let qf = |x: &[C64]| q_operator(&f, 0, &p, x).unwrap();
        let back = q_inverse(&qf, 0, &p, &point, o).unwrap();
        let at_zero = f(&[C64::default(), point[1]]);
        assert!((back - (f(&point) - at_zero)).norm() < 1e-12);
    }

    #[test]
    fn rho_examples() {
        let p = q(0.5);
        let ks = KernelSite::new(c64(1.3, 0.0), c64(0.7, 0.0), c64(1.1, 0.0)).unwrap();
        assert_eq!(rho_site(&ks, &p, C64::default()).unwrap(), ks.normalization);
        for r in [0.1, 0.35, 0.6] {
            assert!(rho_functional_residual(&ks, &p, c64(r, 0.0)).unwrap() < 1e-12);
        }
        let pole = rho_site(&ks, &p, ks.rtilde_km1);
        assert!(matches!(pole, Err(QError::Pole(_))));
    }

    #[test]
    fn q_exponential_limit() {
        let p = q(1.0 - 1e-4);
        for x in [-1.0, -0.3, 0.5, 1.0] {
            let v = q_exponential(c64(x, 0.0), &p).unwrap();
            assert!((v.re - f64::exp(x)).abs() < 1e-3);
        }
    }

    #[test]
    fn kernel_equations_and_g_relations() {
        let p = q(0.5);
        let mu = c64(1.3, 0.0);
        let (c, cn, r) = (c64(0.55, 0.0), c64(0.8, 0.0), c64(0.3, 0.0));
        for res in feq_residuals(c, cn, r, mu, &p).unwrap() {
            assert!(res < 1e-10);
        }
        let g = g_kernel(c64(0.3, 0.0), cn, mu, &p).unwrap();
        let g_scaled = g_kernel(p.alpha() * 0.3, p.alpha() * cn, mu, &p).unwrap();
        assert!((g - p.alpha() * g_scaled).norm() < 1e-12 * g.norm());
        let z = c64(0.7, 0.0);
        assert!((g_hat(z, &p).unwrap() - z * g_hat(p.alpha() * z, &p).unwrap()).norm() < 1e-12);
        assert!(matches!(g_hat(c64(-0.5, 0.0), &p), Err(QError::BranchCut(_))));
    }

    #[test]
    fn qhat_matches_rho_product() {
        let p = q(0.5);
        let mu = c64(1.3, 0.0);
        let rt = [c64(0.7, 0.0), c64(1.2, 0.0), c64(0.9, 0.0)];
        let r = [c64(0.2, 0.0), c64(0.45, 0.0), c64(0.1, 0.0)];
        let zero = [C64::default(); 3];
        let at_zero = qhat_kernel(mu, &p, &rt, &zero, c64(2.0, 0.0)).unwrap();
        assert!((at_zero - 2.0 / (rt[0] * rt[1] * rt[2])).norm() < 1e-14);
        let rho: C64 = (0..3)
            .map(|k| rho_site(&KernelSite::new(mu, rt[k], rt[(k + 2) % 3]).unwrap(), &p, r[k]).unwrap())
            .product();
        let qh = qhat_kernel(mu, &p, &rt, &r, c64(1.0, 0.0)).unwrap();
        assert!((qh - rho / (rt[0] * rt[1] * rt[2])).norm() < 1e-13 * qh.norm());
    }

    fn poly(coeffs: &[f64; 4], k: usize) -> impl Fn(&[C64]) -> C64 + '_ {
        move |r: &[C64]| coeffs.iter().rev().fold(C64::default(), |acc, c| acc * r[k] + c) * (1.0 + 0.5 * r[1 - k])
    }

    proptest! {
        #[test]
        fn q_leibniz(a in prop::array::uniform4(-2.0..2.0f64), b in prop::array::uniform4(-2.0..2.0f64),
                     x in 0.1..0.9f64, y in 0.1..0.9f64, alpha in 0.1..0.9f64) {
            let p = q(alpha);
            let (f, g) = (poly(&a, 0), poly(&b, 0));
            let fg = |r: &[C64]| f(r) * g(r);
            let pt = [c64(x, 0.0), c64(y, 0.0)];
            let lhs = q_operator(&fg, 0, &p, &pt).unwrap();
            let g_shift = g(&[pt[0] * p.alpha(), pt[1]]);
            let rhs = f(&pt) * q_operator(&g, 0, &p, &pt).unwrap() + g_shift * q_operator(&f, 0, &p, &pt).unwrap();
            prop_assert!((lhs - rhs).norm() < 1e-12 * (1.0 + lhs.norm()));
        }

        #[test]
        fn q_integration_by_parts(a in prop::array::uniform4(-2.0..2.0f64), b in prop::array::uniform4(-2.0..2.0f64),
                                  lo in -0.9..0.0f64, hi in 0.1..0.9f64, y in 0.1..0.9f64, alpha in 0.1..0.9f64) {
            let p = q(alpha);
            let o = JacksonOptions::default();
            let (f, g) = (poly(&a, 0), poly(&b, 0));
            let f_qg = |r: &[C64]| if r[0].norm() == 0.0 { C64::default() } else { f(r) * q_operator(&g, 0, &p, r).unwrap() };
            let gs_qf = |r: &[C64]| if r[0].norm() == 0.0 { C64::default() } else { g(&[r[0] * p.alpha(), r[1]]) * q_operator(&f, 0, &p, r).unwrap() };
            let pt = [C64::default(), c64(y, 0.0)];
            let (ca, cb) = (c64(lo, 0.0), c64(hi, 0.0));
            let lhs = jackson_integral_between(&f_qg, 0, &p, ca, cb, &pt, o).unwrap();
            let at = |v: C64| f(&[v, pt[1]]) * g(&[v, pt[1]]);
            let rhs = at(cb) - at(ca) - jackson_integral_between(&gs_qf, 0, &p, ca, cb, &pt, o).unwrap();
            prop_assert!((lhs - rhs).norm() < 1e-10 * (1.0 + lhs.norm()));
        }
    }
}
