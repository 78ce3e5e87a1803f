//! Function-space realization of the quantum chain.
//!
//! Operators act on evaluable functions of `r_1..r_N`: `r_k` multiplies and
//! `q_k` acts as `q_k f = (f(r) − f(…αr_k…))/r_k`. Operator expressions are
//! applied by evaluation at scaled points `r_k α^{n_k}`, memoized on the
//! scaling multi-index, so no symbolic normal ordering is needed.

use std::collections::HashMap;
use std::ops;
use std::rc::Rc;

use thiserror::Error;

use crate::algebra::{c64, Mat2, Ring, C64};
use crate::qcalc::{qpochhammer_inf, KernelSite, MultiFn, QError, QParam};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FunError {
    #[error("coordinate r_{site} is zero where q_{site} acts")]
    ZeroCoordinate { site: usize },
    #[error("variable r_{site} is outside a point of length {len}")]
    SiteOutOfRange { site: usize, len: usize },
    #[error("division by zero in a function expression")]
    DivisionByZero,
    #[error("pole of an infinite product")]
    Pole,
    #[error("chains longer than {max} sites are not evaluated")]
    TooManySites { max: usize },
    #[error("the chain has no sites")]
    EmptyChain,
    #[error("parameters r~_k and mu must be nonzero")]
    ZeroParameter,
    #[error(transparent)]
    Q(#[from] QError),
}

/// Evaluable expression in the variables `r_1..r_N`.
#[derive(Clone, Debug)]
pub enum FuncExpr {
    Const(C64),
    Var(usize),
    Add(Rc<FuncExpr>, Rc<FuncExpr>),
    Sub(Rc<FuncExpr>, Rc<FuncExpr>),
    Mul(Rc<FuncExpr>, Rc<FuncExpr>),
    Div(Rc<FuncExpr>, Rc<FuncExpr>),
    Pow(Rc<FuncExpr>, i32),
    /// `1/(arg; α)_∞`
    PochInv(Rc<FuncExpr>, QParam),
}

impl FuncExpr {
    pub fn constant(c: C64) -> Self {
        FuncExpr::Const(c)
    }

    pub fn var(k: usize) -> Self {
        FuncExpr::Var(k)
    }

    pub fn powi(self, n: i32) -> Self {
        FuncExpr::Pow(Rc::new(self), n)
    }

    pub fn poch_inv(self, q: QParam) -> Self {
        FuncExpr::PochInv(Rc::new(self), q)
    }

    pub fn eval(&self, r: &[C64]) -> Result<C64, FunError> {
        Ok(match self {
            FuncExpr::Const(c) => *c,
            FuncExpr::Var(k) => *r.get(*k).ok_or(FunError::SiteOutOfRange { site: *k, len: r.len() })?,
            FuncExpr::Add(a, b) => a.eval(r)? + b.eval(r)?,
            FuncExpr::Sub(a, b) => a.eval(r)? - b.eval(r)?,
            FuncExpr::Mul(a, b) => a.eval(r)? * b.eval(r)?,
            FuncExpr::Div(a, b) => {
                let d = b.eval(r)?;
                if d.norm() == 0.0 {
                    return Err(FunError::DivisionByZero);
                }
                a.eval(r)? / d
            }
            FuncExpr::Pow(a, n) => {
                let v = a.eval(r)?;
                if *n < 0 && v.norm() == 0.0 {
                    return Err(FunError::DivisionByZero);
                }
                v.powi(*n)
            }
            FuncExpr::PochInv(a, q) => {
                let p = qpochhammer_inf(a.eval(r)?, q)?;
                if p.norm() < 1e-300 {
                    return Err(FunError::Pole);
                }
                p.inv()
            }
        })
    }

    /// Substitute `r_k → factor·r_k`.
    pub fn substitute_scale(&self, k: usize, factor: C64) -> FuncExpr {
        let sub = |e: &Rc<FuncExpr>| Rc::new(e.substitute_scale(k, factor));
        match self {
            FuncExpr::Const(c) => FuncExpr::Const(*c),
            FuncExpr::Var(j) if *j == k => FuncExpr::Mul(Rc::new(FuncExpr::Const(factor)), Rc::new(FuncExpr::Var(k))),
            FuncExpr::Var(j) => FuncExpr::Var(*j),
            FuncExpr::Add(a, b) => FuncExpr::Add(sub(a), sub(b)),
            FuncExpr::Sub(a, b) => FuncExpr::Sub(sub(a), sub(b)),
            FuncExpr::Mul(a, b) => FuncExpr::Mul(sub(a), sub(b)),
            FuncExpr::Div(a, b) => FuncExpr::Div(sub(a), sub(b)),
            FuncExpr::Pow(a, n) => FuncExpr::Pow(sub(a), *n),
            FuncExpr::PochInv(a, q) => FuncExpr::PochInv(sub(a), *q),
        }
    }

    /// Substitute `r_k → factor·r_k` for every k.
    pub fn substitute_scale_all(&self, n: usize, factor: C64) -> FuncExpr {
        (0..n).fold(self.clone(), |f, k| f.substitute_scale(k, factor))
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $variant:ident) => {
        impl ops::$tr for FuncExpr {
            type Output = FuncExpr;
            fn $method(self, rhs: FuncExpr) -> FuncExpr {
                FuncExpr::$variant(Rc::new(self), Rc::new(rhs))
            }
        }
    };
}

binop!(Add, add, Add);
binop!(Sub, sub, Sub);
binop!(Mul, mul, Mul);
binop!(Div, div, Div);

impl MultiFn for FuncExpr {
    /// Evaluation failures become NaN.
    fn eval(&self, r: &[C64]) -> C64 {
        FuncExpr::eval(self, r).unwrap_or(c64(f64::NAN, f64::NAN))
    }
}

/// Operator expression acting on functions of `r_1..r_N`.
#[derive(Clone, Debug)]
pub enum OpExpr {
    Identity,
    /// Multiplication by `r_k`.
    MulVar(usize),
    /// The q-difference operator `q_k`.
    Q(usize),
    Scalar(C64),
    /// Multiplication by `λ^p`, with `λ` supplied at application time.
    Spectral(i32),
    Sum(Rc<OpExpr>, Rc<OpExpr>),
    /// `Compose(a, b) = a ∘ b` (b acts first).
    Compose(Rc<OpExpr>, Rc<OpExpr>),
}

impl OpExpr {
    pub fn then(self, outer: OpExpr) -> OpExpr {
        OpExpr::Compose(Rc::new(outer), Rc::new(self))
    }
}

impl Ring for OpExpr {
    fn add(&self, other: &Self) -> Self {
        OpExpr::Sum(Rc::new(self.clone()), Rc::new(other.clone()))
    }

    fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    fn mul(&self, other: &Self) -> Self {
        OpExpr::Compose(Rc::new(self.clone()), Rc::new(other.clone()))
    }

    fn neg(&self) -> Self {
        OpExpr::Compose(Rc::new(OpExpr::Scalar(c64(-1.0, 0.0))), Rc::new(self.clone()))
    }
}

type MemoKey = (Vec<usize>, Vec<i32>);

struct Evaluator<'a> {
    f: &'a FuncExpr,
    base: &'a [C64],
    alpha: C64,
    lambda: C64,
    fmemo: HashMap<Vec<i32>, C64>,
    memo: HashMap<MemoKey, C64>,
}

impl Evaluator<'_> {
    fn coordinate(&self, k: usize, idx: &[i32]) -> C64 {
        self.base[k] * self.alpha.powi(idx[k])
    }

    fn leaf(&mut self, idx: &[i32]) -> Result<C64, FunError> {
        if let Some(v) = self.fmemo.get(idx) {
            return Ok(*v);
        }
        let point: Vec<C64> = (0..self.base.len()).map(|k| self.coordinate(k, idx)).collect();
        let v = self.f.eval(&point)?;
        self.fmemo.insert(idx.to_vec(), v);
        Ok(v)
    }

    fn tail<'o>(&mut self, rest: &[&'o OpExpr], idx: &[i32]) -> Result<C64, FunError> {
        match rest.split_first() {
            None => self.leaf(idx),
            Some((op, more)) => self.apply(op, more, idx),
        }
    }

    /// `(op ∘ rest[0] ∘ rest[1] ∘ … ∘ f)` at the scaled point `idx`.
    fn apply<'o>(&mut self, op: &'o OpExpr, rest: &[&'o OpExpr], idx: &[i32]) -> Result<C64, FunError> {
        let key: MemoKey = (
            std::iter::once(op as *const OpExpr as usize).chain(rest.iter().map(|o| *o as *const OpExpr as usize)).collect(),
            idx.to_vec(),
        );
        if let Some(v) = self.memo.get(&key) {
            return Ok(*v);
        }
        let v = match op {
            OpExpr::Identity => self.tail(rest, idx)?,
            OpExpr::Scalar(c) => *c * self.tail(rest, idx)?,
            OpExpr::Spectral(p) => self.lambda.powi(*p) * self.tail(rest, idx)?,
            OpExpr::MulVar(k) => {
                self.check(*k)?;
                self.coordinate(*k, idx) * self.tail(rest, idx)?
            }
            OpExpr::Q(k) => {
                self.check(*k)?;
                let x = self.coordinate(*k, idx);
                if x.norm() == 0.0 {
                    return Err(FunError::ZeroCoordinate { site: *k });
                }
                let mut shifted = idx.to_vec();
                shifted[*k] += 1;
                (self.tail(rest, idx)? - self.tail(rest, &shifted)?) / x
            }
            OpExpr::Sum(a, b) => self.apply(a, rest, idx)? + self.apply(b, rest, idx)?,
            OpExpr::Compose(a, b) => {
                let mut chain: Vec<&'o OpExpr> = Vec::with_capacity(rest.len() + 1);
                chain.push(b.as_ref());
                chain.extend_from_slice(rest);
                self.apply(a.as_ref(), &chain, idx)?
            }
        };
        self.memo.insert(key, v);
        Ok(v)
    }

    fn check(&self, k: usize) -> Result<(), FunError> {
        if k >= self.base.len() {
            return Err(FunError::SiteOutOfRange { site: k, len: self.base.len() });
        }
        Ok(())
    }
}

/// `(op f)(point)` with the spectral parameter set to `lambda`.
pub fn apply_opexpr(op: &OpExpr, f: &FuncExpr, q: &QParam, point: &[C64], lambda: C64) -> Result<C64, FunError> {
    let mut ev = Evaluator {
        f,
        base: point,
        alpha: q.alpha(),
        lambda,
        fmemo: HashMap::new(),
        memo: HashMap::new(),
    };
    ev.apply(op, &[], &vec![0; point.len()])
}

/// `L_k(λ) = (λ, q_k; r_k, λ⁻¹)` with operator entries.
pub fn lax_op(k: usize) -> Mat2<OpExpr> {
    Mat2::new(OpExpr::Spectral(1), OpExpr::Q(k), OpExpr::MulVar(k), OpExpr::Spectral(-1))
}

/// `Tr(L_N ··· L_1)` as an operator expression.
pub fn transfer_op(n: usize) -> OpExpr {
    let factors: Vec<_> = (0..n).map(lax_op).collect();
    Mat2::ordered_product(&factors).map(|m| m.trace()).unwrap_or(OpExpr::Scalar(C64::default()))
}

/// `Δ = Π_k (1 − r_k q_k)`.
pub fn delta_op(n: usize) -> OpExpr {
    (0..n).fold(OpExpr::Identity, |acc, k| {
        let factor = OpExpr::Identity.sub(&OpExpr::MulVar(k).mul(&OpExpr::Q(k)));
        acc.mul(&factor)
    })
}

fn site(mu: C64, rtilde: &[C64], k: usize) -> Result<KernelSite, FunError> {
    let n = rtilde.len();
    KernelSite::new(mu, rtilde[k], rtilde[(k + n - 1) % n]).map_err(|_| FunError::ZeroParameter)
}

/// `ρ_k` as a function of `r_k` (normalization `G_k`).
pub fn rho_factor(ks: &KernelSite, q: QParam, k: usize) -> FuncExpr {
    let r = FuncExpr::var(k);
    let a = (r.clone() * FuncExpr::constant(ks.rtilde_km1.inv())).poch_inv(q);
    let b = (r * FuncExpr::constant(-(ks.mu * ks.mu * ks.rtilde_k).inv())).poch_inv(q);
    FuncExpr::constant(ks.normalization) * a * b
}

/// `ρ(μ, r) = Π_k ρ_k(μ, r_k)` with `G_k = 1`.
pub fn rho_product(mu: C64, q: QParam, rtilde: &[C64]) -> Result<FuncExpr, FunError> {
    if rtilde.is_empty() {
        return Err(FunError::EmptyChain);
    }
    let mut out: Option<FuncExpr> = None;
    for k in 0..rtilde.len() {
        let f = rho_factor(&site(mu, rtilde, k)?, q, k);
        out = Some(match out {
            None => f,
            Some(acc) => acc * f,
        });
    }
    Ok(out.expect("nonempty"))
}

/// Largest chain evaluated by the pointwise checks.
pub const MAX_SITES: usize = 10;

#[derive(Clone, Debug, PartialEq)]
pub struct BaxterActionReport {
    /// `|Tr L(μ)ρ − μ^Nρ_{μ/s}(r) − μ^{−N}ρ_{μs}(αr)|`, relative, max over samples.
    pub trace_form: f64,
    /// Same with `ρ_{μs}(αr)` replaced by `(Δρ_{μs})(r)`.
    pub delta_form: f64,
}

/// The q-difference trace identity with parameter shift `s` (the identity
/// holds for `s = √α`; any other shift serves as a control).
pub fn baxter_action_with_shift(
    mu: C64,
    q: QParam,
    rtilde: &[C64],
    samples: &[Vec<C64>],
    shift: C64,
) -> Result<BaxterActionReport, FunError> {
    let n = rtilde.len();
    if n > MAX_SITES {
        return Err(FunError::TooManySites { max: MAX_SITES });
    }
    let rho = rho_product(mu, q, rtilde)?;
    let up = rho_product(mu / shift, q, rtilde)?;
    let down = rho_product(mu * shift, q, rtilde)?;
    let down_scaled = down.substitute_scale_all(n, q.alpha());
    let tr = transfer_op(n);
    let delta = delta_op(n);
    let mut report = BaxterActionReport { trace_form: 0.0, delta_form: 0.0 };
    for point in samples {
        let lhs = apply_opexpr(&tr, &rho, &q, point, mu)?;
        let plus = mu.powi(n as i32) * up.eval(point)?;
        let minus = mu.powi(-(n as i32)) * down_scaled.eval(point)?;
        let minus_delta = mu.powi(-(n as i32)) * apply_opexpr(&delta, &down, &q, point, mu)?;
        let scale = plus.norm() + minus.norm();
        report.trace_form = report.trace_form.max((lhs - plus - minus).norm() / scale);
        report.delta_form = report.delta_form.max((lhs - plus - minus_delta).norm() / scale);
    }
    Ok(report)
}

pub fn baxter_action_residual(mu: C64, q: QParam, rtilde: &[C64], samples: &[Vec<C64>]) -> Result<BaxterActionReport, FunError> {
    baxter_action_with_shift(mu, q, rtilde, samples, q.sqrt_alpha())
}

#[derive(Clone, Debug, PartialEq)]
pub struct TriangularReport {
    /// `|(L̂_k)_{12} ρ_k| / |ρ_k|`.
    pub upper_right: f64,
    /// `(L̂_k)_{11} ρ_k` against `(μr̃_k/r̃_{k−1}) ρ_k(μ/√α, r_k)`, relative.
    pub upper_left: f64,
    /// `(L̂_k)_{22} ρ_k` against `(r̃_{k−1}/(μr̃_k)) ρ_k(μ√α, αr_k)`, relative.
    pub lower_right: f64,
    /// `|det M_k − 1|`.
    pub det_m: f64,
}

/// `M_k = ((0, 1), (−1, −μ r̃_{k−1}))`.
pub fn gauge_matrix(mu: C64, rtilde_km1: C64) -> Mat2<C64> {
    Mat2::new(C64::default(), c64(1.0, 0.0), c64(-1.0, 0.0), -mu * rtilde_km1)
}

fn scalar_mat(m: &Mat2<C64>) -> Mat2<OpExpr> {
    m.map(|c| OpExpr::Scalar(*c))
}

/// Check `M_{k+1}^{-1} L_k(μ) M_k` on `ρ_k` at a point (value of `r_k`).
pub fn triangular_check(mu: C64, q: QParam, rtilde: &[C64], k: usize, r_k: C64) -> Result<TriangularReport, FunError> {
    let ks = site(mu, rtilde, k)?;
    let m_k = gauge_matrix(mu, ks.rtilde_km1);
    let m_next = gauge_matrix(mu, ks.rtilde_k);
    let det = m_next.det();
    let inv_next = Mat2::new(m_next.a22 / det, -m_next.a12 / det, -m_next.a21 / det, m_next.a11 / det);
    let lhat = scalar_mat(&inv_next).mul(&lax_op(0)).mul(&scalar_mat(&m_k));
    let rho = rho_factor(&ks, q, 0);
    let point = [r_k];
    let at = |op: &OpExpr| apply_opexpr(op, &rho, &q, &point, mu);
    let rho_val = rho.eval(&point)?;
    let up = rho_factor(&ks.with_mu(mu / q.sqrt_alpha()), q, 0).eval(&point)?;
    let down = rho_factor(&ks.with_mu(mu * q.sqrt_alpha()), q, 0).eval(&[q.alpha() * r_k])?;
    let want_11 = mu * ks.rtilde_k / ks.rtilde_km1 * up;
    let want_22 = ks.rtilde_km1 / (mu * ks.rtilde_k) * down;
    Ok(TriangularReport {
        upper_right: at(&lhat.a12)?.norm() / rho_val.norm(),
        upper_left: (at(&lhat.a11)? - want_11).norm() / want_11.norm(),
        lower_right: (at(&lhat.a22)? - want_22).norm() / want_22.norm(),
        det_m: (gauge_matrix(mu, ks.rtilde_km1).det() - 1.0).norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn q(a: f64) -> QParam {
        QParam::real(a).unwrap()
    }

    fn points(n: usize, count: usize, seed: u64) -> Vec<Vec<C64>> {
        let mut g = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| (0..n).map(|_| c64(g.gen_range(0.1..0.9), 0.0)).collect()).collect()
    }

    fn rtilde(n: usize, seed: u64) -> Vec<C64> {
        let mut g = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| c64(g.gen_range(1.0..2.0), 0.0)).collect()
    }

    #[test]
    fn operator_examples() {
        let p = q(0.5);
        let pt = [c64(0.6, 0.0), c64(0.3, 0.0)];
        let f = FuncExpr::var(0).powi(2);
        let v = apply_opexpr(&OpExpr::Q(0), &f, &p, &pt, c64(1.0, 0.0)).unwrap();
        assert!((v - 0.75 * 0.6).norm() < 1e-15);
        let g = FuncExpr::var(0) * FuncExpr::var(1) + FuncExpr::constant(c64(2.0, 0.0));
        let v = apply_opexpr(&OpExpr::MulVar(1), &g, &p, &pt, c64(1.0, 0.0)).unwrap();
        assert!((v - 0.3 * g.eval(&pt).unwrap()).norm() < 1e-15);
        assert!(matches!(
            apply_opexpr(&OpExpr::Q(1), &g, &p, &[c64(0.5, 0.0), C64::default()], c64(1.0, 0.0)),
            Err(FunError::ZeroCoordinate { site: 1 })
        ));
    }

    #[test]
    fn commutator_in_function_realization() {
        let p = q(0.4);
        let f = (FuncExpr::var(0).powi(3) + FuncExpr::var(1)) / (FuncExpr::var(0) + FuncExpr::constant(c64(2.0, 0.0)));
        let pt = [c64(0.7, 0.0), c64(0.2, 0.0)];
        let (qo, ro) = (OpExpr::Q(0), OpExpr::MulVar(0));
        let comm = qo.mul(&ro).sub(&ro.mul(&qo));
        let lhs = apply_opexpr(&comm, &f, &p, &pt, c64(1.0, 0.0)).unwrap();
        let rhs_op = OpExpr::Identity.sub(&qo.mul(&ro));
        let rhs = p.eta() * apply_opexpr(&rhs_op, &f, &p, &pt, c64(1.0, 0.0)).unwrap();
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn rho_product_examples() {
        let p = q(0.5);
        let mu = c64(1.3, 0.0);
        let rt = rtilde(3, 1);
        let rho = rho_product(mu, p, &rt).unwrap();
        assert!((rho.eval(&[C64::default(); 3]).unwrap() - 1.0).norm() < 1e-15);
        // Δρ = ρ(αr)
        for pt in points(3, 4, 2) {
            let lhs = apply_opexpr(&delta_op(3), &rho, &p, &pt, mu).unwrap();
            let scaled: Vec<C64> = pt.iter().map(|x| x * p.alpha()).collect();
            let rhs = rho.eval(&scaled).unwrap();
            assert!((lhs - rhs).norm() < 1e-12 * rhs.norm());
        }
        // each factor depends on a single coordinate
        let f0 = rho_factor(&site(mu, &rt, 0).unwrap(), p, 0);
        let a = f0.eval(&[c64(0.3, 0.0), c64(0.1, 0.0), c64(0.2, 0.0)]).unwrap();
        let b = f0.eval(&[c64(0.3, 0.0), c64(0.8, 0.0), c64(0.7, 0.0)]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn baxter_action_identity() {
        let p = q(0.5);
        let mu = c64(1.3, 0.0);
        let single = baxter_action_residual(mu, p, &rtilde(1, 3), &points(1, 8, 4)).unwrap();
        assert!(single.trace_form < 1e-12 && single.delta_form < 1e-12, "{single:?}");
        for n in [2, 3] {
            let rep = baxter_action_residual(mu, p, &rtilde(n, 5), &points(n, 8, 6)).unwrap();
            assert!(rep.trace_form < 1e-10 && rep.delta_form < 1e-10, "N={n} {rep:?}");
        }
        let wrong = baxter_action_with_shift(mu, p, &rtilde(2, 5), &points(2, 8, 6), p.alpha()).unwrap();
        assert!(wrong.trace_form > 1e-2, "{wrong:?}");
    }

    #[test]
    fn residual_invariant_under_rtilde_rescaling() {
        let p = q(0.5);
        let mu = c64(1.3, 0.0);
        let mut g = ChaCha8Rng::seed_from_u64(7);
        let base = rtilde(2, 8);
        for _ in 0..10 {
            let s = g.gen_range(0.5..3.0);
            let rt: Vec<C64> = base.iter().map(|x| x * s).collect();
            assert!(baxter_action_residual(mu, p, &rt, &points(2, 3, 9)).unwrap().trace_form < 1e-10);
        }
    }

    #[test]
    fn triangularization() {
        let p = q(0.5);
        let mu = c64(1.3, 0.0);
        let rt = rtilde(3, 10);
        for k in 0..3 {
            for r in [0.15, 0.5, 0.85] {
                let rep = triangular_check(mu, p, &rt, k, c64(r, 0.0)).unwrap();
                assert!(rep.upper_right < 1e-12, "{rep:?}");
                assert!(rep.upper_left < 1e-11 && rep.lower_right < 1e-11, "{rep:?}");
                assert!(rep.det_m < 1e-15);
            }
        }
    }

    #[test]
    fn linearity() {
        let p = q(0.3);
        let op = transfer_op(2);
        let f = FuncExpr::var(0).powi(2) * FuncExpr::var(1);
        let g = FuncExpr::var(1).powi(3) + FuncExpr::var(0);
        let (a, b) = (c64(0.7, -0.2), c64(-1.1, 0.4));
        let comb = FuncExpr::constant(a) * f.clone() + FuncExpr::constant(b) * g.clone();
        let pt = [c64(0.4, 0.0), c64(0.6, 0.0)];
        let lam = c64(1.2, 0.1);
        let lhs = apply_opexpr(&op, &comb, &p, &pt, lam).unwrap();
        let rhs = a * apply_opexpr(&op, &f, &p, &pt, lam).unwrap() + b * apply_opexpr(&op, &g, &p, &pt, lam).unwrap();
        assert!((lhs - rhs).norm() < 1e-12);
    }

    fn arb_expr() -> impl Strategy<Value = FuncExpr> {
        let leaf = prop_oneof![
            (-2.0..2.0f64).prop_map(|v| FuncExpr::constant(c64(v, 0.0))),
            (0..2usize).prop_map(FuncExpr::var),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
                (inner.clone(), 0..3i32).prop_map(|(a, n)| a.powi(n)),
                inner.prop_map(|a| (a * FuncExpr::constant(c64(0.3, 0.0))).poch_inv(QParam::real(0.5).unwrap())),
            ]
        })
    }

    proptest! {
        #[test]
        fn substitution_commutes_with_evaluation(f in arb_expr(), x in 0.1..0.9f64, y in 0.1..0.9f64, s in 0.2..0.9f64) {
            let pt = [c64(x, 0.0), c64(y, 0.0)];
            let lhs = f.substitute_scale(0, c64(s, 0.0)).eval(&pt);
            let rhs = f.eval(&[pt[0] * c64(s, 0.0), pt[1]]);
            match (lhs, rhs) {
                (Ok(a), Ok(b)) => prop_assert!(a == b || (a.is_nan() && b.is_nan())),
                (a, b) => prop_assert_eq!(a.is_err(), b.is_err()),
            }
        }
    }
}
