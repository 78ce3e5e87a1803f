//! Classical Ablowitz–Ladik phase space.
//!
//! Sites are indexed from zero and wrap periodically. The monodromy is the
//! ordered product `L_{N-1} ··· L_1 L_0` of the local Lax matrices
//! `L_k(λ) = (λ, q_k; r_k, λ⁻¹)`, and the Poisson structure is
//! `{q_k, r_j} = (1 − q_k r_k) δ_kj`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{c64, kron2, max_abs4, LaurentPoly, Mat2, Mat4, MultiDual, Ring, C64};

/// States with `|1 − q_k r_k|` below this are rejected.
pub const DEGENERACY_GUARD: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChainError {
    #[error("a chain needs at least one site")]
    Empty,
    #[error("q has {q} entries but r has {r}")]
    LengthMismatch { q: usize, r: usize },
    #[error("declared N = {declared} but arrays have {actual} entries")]
    DeclaredLength { declared: usize, actual: usize },
    #[error("degenerate site {site}: |1 - q r| = {weight:e}")]
    Degenerate { site: usize, weight: f64 },
    #[error("non-finite value at site {site}")]
    NonFinite { site: usize },
    #[error("site {site} out of range for N = {n}")]
    SiteOutOfRange { site: usize, n: usize },
    #[error("r-matrix is singular at λ² = ν²")]
    SingularParameters,
    #[error("step size must be positive, got {0}")]
    BadStep(f64),
}

/// Periodic chain configuration `(q_k, r_k)`, immutable once built.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateRecord", into = "StateRecord")]
pub struct ChainState {
    q: Vec<C64>,
    r: Vec<C64>,
}

#[derive(Serialize, Deserialize)]
struct StateRecord {
    #[serde(rename = "N")]
    n: usize,
    q: Vec<C64>,
    r: Vec<C64>,
}

impl TryFrom<StateRecord> for ChainState {
    type Error = ChainError;

    fn try_from(rec: StateRecord) -> Result<Self, Self::Error> {
        if rec.q.len() != rec.n {
            return Err(ChainError::DeclaredLength { declared: rec.n, actual: rec.q.len() });
        }
        ChainState::new(rec.q, rec.r)
    }
}

impl From<ChainState> for StateRecord {
    fn from(s: ChainState) -> Self {
        StateRecord { n: s.len(), q: s.q, r: s.r }
    }
}

impl ChainState {
    pub fn new(q: Vec<C64>, r: Vec<C64>) -> Result<Self, ChainError> {
        if q.len() != r.len() {
            return Err(ChainError::LengthMismatch { q: q.len(), r: r.len() });
        }
        if q.is_empty() {
            return Err(ChainError::Empty);
        }
        for (site, (qk, rk)) in q.iter().zip(&r).enumerate() {
            if !(qk.is_finite() && rk.is_finite()) {
                return Err(ChainError::NonFinite { site });
            }
            let weight = (C64::new(1.0, 0.0) - qk * rk).norm();
            if weight < DEGENERACY_GUARD {
                return Err(ChainError::Degenerate { site, weight });
            }
        }
        Ok(Self { q, r })
    }

    pub fn zero(n: usize) -> Result<Self, ChainError> {
        Self::new(vec![C64::default(); n], vec![C64::default(); n])
    }

    /// Random complex state with entries uniform in the disc-like box `[-scale, scale]²`.
    pub fn random<R: rand::Rng>(n: usize, scale: f64, rng: &mut R) -> Self {
        loop {
            let mut draw = || c64(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale));
            let q: Vec<C64> = (0..n).map(|_| draw()).collect();
            let r: Vec<C64> = (0..n).map(|_| draw()).collect();
            if let Ok(s) = Self::new(q, r) {
                return s;
            }
        }
    }

    /// Random real state with `q_k ∈ [q_lo, q_hi]`, `r_k ∈ [r_lo, r_hi]`.
    pub fn random_real<R: rand::Rng>(n: usize, q_range: (f64, f64), r_range: (f64, f64), rng: &mut R) -> Self {
        loop {
            let q: Vec<C64> = (0..n).map(|_| c64(rng.gen_range(q_range.0..q_range.1), 0.0)).collect();
            let r: Vec<C64> = (0..n).map(|_| c64(rng.gen_range(r_range.0..r_range.1), 0.0)).collect();
            if let Ok(s) = Self::new(q, r) {
                return s;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn q(&self) -> &[C64] {
        &self.q
    }

    pub fn r(&self) -> &[C64] {
        &self.r
    }

    /// `q` at a periodic (possibly negative) index.
    pub fn q_at(&self, k: isize) -> C64 {
        self.q[wrap(k, self.len())]
    }

    pub fn r_at(&self, k: isize) -> C64 {
        self.r[wrap(k, self.len())]
    }

    /// Cyclic relabeling `k → k + shift`.
    pub fn rotated(&self, shift: usize) -> Self {
        let n = self.len();
        let idx = |k: usize| (k + shift) % n;
        Self { q: (0..n).map(|k| self.q[idx(k)]).collect(), r: (0..n).map(|k| self.r[idx(k)]).collect() }
    }

    /// `Π_k (1 − q_k r_k)`.
    pub fn determinant(&self) -> C64 {
        self.q.iter().zip(&self.r).map(|(q, r)| 1.0 - q * r).product()
    }
}

pub(crate) fn wrap(k: isize, n: usize) -> usize {
    k.rem_euclid(n as isize) as usize
}

/// `L_k(λ) = (λ, q_k; r_k, λ⁻¹)` with Laurent entries.
pub fn local_lax(state: &ChainState, k: usize) -> Result<Mat2<LaurentPoly>, ChainError> {
    if k >= state.len() {
        return Err(ChainError::SiteOutOfRange { site: k, n: state.len() });
    }
    let one = c64(1.0, 0.0);
    Ok(Mat2::new(
        LaurentPoly::monomial(1, one),
        LaurentPoly::constant(state.q[k]),
        LaurentPoly::constant(state.r[k]),
        LaurentPoly::monomial(-1, one),
    ))
}

/// Numeric local Lax matrix at a given spectral parameter.
pub fn local_lax_at<T: Ring>(lambda: T, lambda_inv: T, q: T, r: T) -> Mat2<T> {
    Mat2::new(lambda, q, r, lambda_inv)
}

/// Ordered product `L_{N-1} ··· L_0` as Laurent polynomials.
pub fn monodromy(state: &ChainState) -> Mat2<LaurentPoly> {
    let factors: Vec<_> = (0..state.len()).map(|k| local_lax(state, k).expect("site in range")).collect();
    Mat2::ordered_product(&factors).expect("non-empty chain")
}

/// Numeric monodromy at `λ` for arbitrary site data (used by the BT code too).
pub fn monodromy_at(q: &[C64], r: &[C64], lambda: C64) -> Mat2<C64> {
    let inv = lambda.inv();
    let factors: Vec<_> = q.iter().zip(r).map(|(qk, rk)| Mat2::new(lambda, *qk, *rk, inv)).collect();
    Mat2::ordered_product(&factors).unwrap_or_else(Mat2::identity)
}

/// Trace coefficients `H_i` (at `λ^{N−2i}`) and the determinant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConservedSet {
    pub h: Vec<C64>,
    pub det: C64,
}

impl ConservedSet {
    /// Largest relative deviation between two sets, H's and det together.
    pub fn max_relative_deviation(&self, other: &ConservedSet) -> f64 {
        self.h
            .iter()
            .chain(std::iter::once(&self.det))
            .zip(other.h.iter().chain(std::iter::once(&other.det)))
            .map(|(a, b)| (a - b).norm() / a.norm().max(b.norm()).max(1.0))
            .fold(0.0, f64::max)
    }
}

pub fn conserved_quantities(state: &ChainState) -> ConservedSet {
    let n = state.len() as i32;
    let tr = monodromy(state).trace();
    let h = (0..=n).map(|i| tr.coeff(n - 2 * i).copied().unwrap_or_default()).collect();
    ConservedSet { h, det: state.determinant() }
}

/// Right-hand side of the lattice equations of motion.
pub fn eom_rhs(state: &ChainState) -> (Vec<C64>, Vec<C64>) {
    eom_raw(&state.q, &state.r)
}

fn eom_raw(q: &[C64], r: &[C64]) -> (Vec<C64>, Vec<C64>) {
    let n = q.len() as isize;
    let at = |v: &[C64], k: isize| v[wrap(k, n as usize)];
    let mut dq = Vec::with_capacity(q.len());
    let mut dr = Vec::with_capacity(q.len());
    for k in 0..n {
        let (qk, rk) = (at(q, k), at(r, k));
        let qs = at(q, k + 1) + at(q, k - 1);
        let rs = at(r, k + 1) + at(r, k - 1);
        dq.push(qs - 2.0 * qk - qk * rk * qs);
        dr.push(-rs + 2.0 * rk + qk * rk * rs);
    }
    (dq, dr)
}

/// One classical fourth-order Runge–Kutta step.
pub fn rk4_step(state: &ChainState, dt: f64) -> Result<ChainState, ChainError> {
    if dt.is_nan() || dt <= 0.0 {
        return Err(ChainError::BadStep(dt));
    }
    let axpy = |x: &[C64], k: &[C64], h: f64| -> Vec<C64> { x.iter().zip(k).map(|(a, b)| a + b * h).collect() };
    let (q, r) = (&state.q, &state.r);
    let (k1q, k1r) = eom_raw(q, r);
    let (k2q, k2r) = eom_raw(&axpy(q, &k1q, dt / 2.0), &axpy(r, &k1r, dt / 2.0));
    let (k3q, k3r) = eom_raw(&axpy(q, &k2q, dt / 2.0), &axpy(r, &k2r, dt / 2.0));
    let (k4q, k4r) = eom_raw(&axpy(q, &k3q, dt), &axpy(r, &k3r, dt));
    let combine = |x: &[C64], a: &[C64], b: &[C64], c: &[C64], d: &[C64]| -> Vec<C64> {
        (0..x.len()).map(|i| x[i] + (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i]) * (dt / 6.0)).collect()
    };
    ChainState::new(combine(q, &k1q, &k2q, &k3q, &k4q), combine(r, &k1r, &k2r, &k3r, &k4r))
}

/// A phase-space function evaluable on dual numbers, so its gradient is exact.
pub trait Observable {
    fn eval(&self, q: &[MultiDual], r: &[MultiDual]) -> MultiDual;
}

impl<F> Observable for F
where
    F: Fn(&[MultiDual], &[MultiDual]) -> MultiDual,
{
    fn eval(&self, q: &[MultiDual], r: &[MultiDual]) -> MultiDual {
        self(q, r)
    }
}

/// Dual-number seeds for `(q_0..q_{N-1}, r_0..r_{N-1})`, variables ordered q first.
pub fn dual_variables(state: &ChainState) -> (Vec<MultiDual>, Vec<MultiDual>) {
    let n = state.len();
    let q = (0..n).map(|k| MultiDual::variable(state.q[k], k, 2 * n)).collect();
    let r = (0..n).map(|k| MultiDual::variable(state.r[k], n + k, 2 * n)).collect();
    (q, r)
}

/// Bracket of two already-differentiated observables.
pub fn bracket_of_duals(f: &MultiDual, g: &MultiDual, state: &ChainState) -> C64 {
    let n = state.len();
    (0..n)
        .map(|k| {
            let w = 1.0 - state.q[k] * state.r[k];
            (f.partials[k] * g.partials[n + k] - f.partials[n + k] * g.partials[k]) * w
        })
        .sum()
}

/// `{f, g} = Σ_k (∂_q f ∂_r g − ∂_r f ∂_q g)(1 − q_k r_k)`.
pub fn poisson_bracket(f: &dyn Observable, g: &dyn Observable, state: &ChainState) -> C64 {
    let (q, r) = dual_variables(state);
    bracket_of_duals(&f.eval(&q, &r), &g.eval(&q, &r), state)
}

/// Monodromy entries at numeric `λ` as dual numbers over the phase space.
pub fn monodromy_duals(q: &[MultiDual], r: &[MultiDual], lambda: C64) -> Mat2<MultiDual> {
    let nv = q[0].n_vars();
    let l = MultiDual::constant(lambda, nv);
    let li = MultiDual::constant(lambda.inv(), nv);
    let factors: Vec<_> = q.iter().zip(r).map(|(qk, rk)| local_lax_at(l.clone(), li.clone(), qk.clone(), rk.clone())).collect();
    Mat2::ordered_product(&factors).expect("non-empty chain")
}

/// Classical r-matrix on `C²⊗C²`.
pub fn classical_rmatrix(lambda: C64, nu: C64) -> Result<Mat4, ChainError> {
    let d = nu * nu - lambda * lambda;
    if d.norm() < 1e-14 * (1.0 + nu.norm_sqr() + lambda.norm_sqr()) {
        return Err(ChainError::SingularParameters);
    }
    let z = C64::default();
    let corner = 0.5 * (nu * nu + lambda * lambda) / d;
    let off = lambda * nu / d;
    let half = c64(0.5, 0.0);
    Ok([[corner, z, z, z], [z, -half, off, z], [z, off, half, z], [z, z, z, corner]])
}

pub(crate) fn mat4_mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = [[C64::default(); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub(crate) fn mat4_sub(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = *a;
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] -= b[i][j];
        }
    }
    out
}

/// Max-entry residual of `{L(λ)⊗L(ν)} − [r(λ,ν), L(λ)⊗L(ν)]`.
pub fn rmatrix_relation_residual(state: &ChainState, lambda: C64, nu: C64) -> Result<f64, ChainError> {
    if lambda.norm() == 0.0 || nu.norm() == 0.0 {
        return Err(ChainError::SingularParameters);
    }
    let rm = classical_rmatrix(lambda, nu)?;
    let (q, r) = dual_variables(state);
    let ll = monodromy_duals(&q, &r, lambda);
    let ln = monodromy_duals(&q, &r, nu);
    let mut brackets = [[C64::default(); 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    brackets[2 * i + k][2 * j + l] = bracket_of_duals(ll.get(i, j), ln.get(k, l), state);
                }
            }
        }
    }
    let t = kron2(&ll.map(|d| d.value).to_array(), &ln.map(|d| d.value).to_array());
    let comm = mat4_sub(&mat4_mul(&rm, &t), &mat4_mul(&t, &rm));
    Ok(max_abs4(&mat4_sub(&brackets, &comm)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn n2_state() -> ChainState {
        ChainState::new(vec![c64(0.2, 0.0), c64(0.1, 0.0)], vec![c64(0.3, 0.0), c64(-0.4, 0.0)]).unwrap()
    }

    #[test]
    fn local_lax_entries() {
        let s = ChainState::new(vec![c64(2.0, 0.0)], vec![c64(3.0, 0.0)]).unwrap();
        let l = local_lax(&s, 0).unwrap();
        assert_eq!(l.a12, LaurentPoly::constant(c64(2.0, 0.0)));
        assert_eq!(l.a21, LaurentPoly::constant(c64(3.0, 0.0)));
        assert_eq!(l.a11, LaurentPoly::lambda());
        let det = l.det();
        assert_eq!(det, LaurentPoly::constant(c64(1.0 - 6.0, 0.0)));
        let z = ChainState::zero(1).unwrap();
        let l0 = local_lax(&z, 0).unwrap();
        assert!(l0.a12.is_zero() && l0.a21.is_zero());
        assert_eq!(local_lax(&z, 1), Err(ChainError::SiteOutOfRange { site: 1, n: 1 }));
    }

    #[test]
    fn n2_trace_and_det() {
        let s = n2_state();
        let m = monodromy(&s);
        let tr = m.trace();
        assert_eq!(tr.support().collect::<Vec<_>>(), vec![-2, 0, 2]);
        assert!((tr.coeff(0).unwrap() - c64(-0.05, 0.0)).norm() < 1e-15);
        let det = m.det().eval_scalar(c64(1.7, 0.0)).unwrap();
        assert!((det - c64(0.9776, 0.0)).norm() < 1e-13);
        let cs = conserved_quantities(&s);
        assert_eq!(cs.h[0], c64(1.0, 0.0));
        assert_eq!(cs.h[2], c64(1.0, 0.0));
        assert!((cs.det - c64(0.9776, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn zero_state_monodromy_is_diagonal() {
        let m = monodromy(&ChainState::zero(3).unwrap());
        assert_eq!(m.a11, LaurentPoly::monomial(3, c64(1.0, 0.0)));
        assert_eq!(m.a22, LaurentPoly::monomial(-3, c64(1.0, 0.0)));
        assert!(m.a12.is_zero() && m.a21.is_zero());
        let cs = conserved_quantities(&ChainState::zero(4).unwrap());
        assert!(cs.h[1..4].iter().all(|h| h.norm() == 0.0));
    }

    #[test]
    fn trace_support_has_parity_of_n() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..6 {
            let s = ChainState::random(n, 0.5, &mut rng);
            let tr = monodromy(&s).trace();
            assert!(tr.support().all(|e| (e - n as i32) % 2 == 0 && e.abs() <= n as i32));
            let cs = conserved_quantities(&s);
            assert!((cs.h[0] - 1.0).norm() < 1e-15 && (cs.h[n] - 1.0).norm() < 1e-15);
        }
    }

    #[test]
    fn conserved_quantities_invariant_under_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = ChainState::random(5, 0.6, &mut rng);
        let a = conserved_quantities(&s);
        for shift in 1..5 {
            assert!(a.max_relative_deviation(&conserved_quantities(&s.rotated(shift))) < 1e-13);
        }
    }

    #[test]
    fn eom_examples() {
        let c = c64(0.7, -0.2);
        let s = ChainState::new(vec![c; 4], vec![C64::default(); 4]).unwrap();
        let (dq, dr) = eom_rhs(&s);
        assert!(dq.iter().chain(&dr).all(|v| v.norm() < 1e-15));
        let (dq, dr) = eom_rhs(&ChainState::zero(3).unwrap());
        assert!(dq.iter().chain(&dr).all(|v| v.norm() == 0.0));

        let s = ChainState::new(
            vec![c64(0.1, 0.2), c64(-0.3, 0.1), c64(0.25, -0.15)],
            vec![c64(0.4, 0.0), c64(0.05, -0.3), c64(-0.2, 0.1)],
        )
        .unwrap();
        let (dq, dr) = eom_rhs(&s);
        // site 1 by hand: neighbours 0 and 2
        let (q0, q1, q2) = (c64(0.1, 0.2), c64(-0.3, 0.1), c64(0.25, -0.15));
        let (r0, r1, r2) = (c64(0.4, 0.0), c64(0.05, -0.3), c64(-0.2, 0.1));
        let want_q = q2 + q0 - 2.0 * q1 - q1 * r1 * (q2 + q0);
        let want_r = -r2 - r0 + 2.0 * r1 + q1 * r1 * (r2 + r0);
        assert!((dq[1] - want_q).norm() < 1e-15 && (dr[1] - want_r).norm() < 1e-15);
    }

    #[test]
    fn rk4_conservation_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let s = ChainState::random(4, 0.4, &mut rng);
        let h0 = conserved_quantities(&s);
        let drift = |dt: f64| {
            let h1 = conserved_quantities(&rk4_step(&s, dt).unwrap());
            ((h1.h[1] - h0.h[1]).norm(), (h1.det - h0.det).norm())
        };
        // one-step drift is at least fifth order in dt
        let (a, b) = (drift(0.1), drift(0.05));
        assert!(a.0 / b.0 > 28.0, "H_1 ratio {}", a.0 / b.0);
        assert!(a.1 / b.1 > 28.0, "det ratio {}", a.1 / b.1);
        assert!(drift(1e-12).0 < 1e-14);
        let z = ChainState::zero(3).unwrap();
        assert_eq!(rk4_step(&z, 0.1).unwrap(), z);
        assert!(rk4_step(&z, 0.0).is_err());
    }

    #[test]
    fn rk4_global_drift_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for n in [2, 4, 6] {
            let s0 = ChainState::random(n, 0.4, &mut rng);
            let h0 = conserved_quantities(&s0);
            for dt in [1e-2, 5e-3] {
                let steps = (0.5 / dt) as usize;
                let mut s = s0.clone();
                for _ in 0..steps {
                    s = rk4_step(&s, dt).unwrap();
                }
                let dev = h0.max_relative_deviation(&conserved_quantities(&s));
                assert!(dev <= 10.0 * dt.powi(4) * 0.5, "N={n} dt={dt} dev={dev:e}");
            }
        }
    }

    #[test]
    fn canonical_brackets() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = ChainState::random(3, 0.5, &mut rng);
        for k in 0..3 {
            for j in 0..3 {
                let qk = move |q: &[MultiDual], _r: &[MultiDual]| q[k].clone();
                let rj = move |_q: &[MultiDual], r: &[MultiDual]| r[j].clone();
                let qj = move |q: &[MultiDual], _r: &[MultiDual]| q[j].clone();
                let want = if k == j { 1.0 - s.q()[k] * s.r()[k] } else { C64::default() };
                assert!((poisson_bracket(&qk, &rj, &s) - want).norm() < 1e-15);
                assert!(poisson_bracket(&qk, &qj, &s).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn conserved_quantities_in_involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = ChainState::random(3, 0.5, &mut rng);
        // H_1 is the λ^1 coefficient of the trace, extracted from two samples: for N=3,
        // Tr = λ³ + H_1 λ + H_2 λ⁻¹ + λ⁻³.
        let h1 = |q: &[MultiDual], r: &[MultiDual]| {
            let a = monodromy_duals(q, r, c64(1.0, 0.0)).trace();
            let b = monodromy_duals(q, r, c64(2.0, 0.0)).trace();
            // a = 2 + H1 + H2, b = 8.125 + 2 H1 + H2/2, so H1 = (2b − a − 14.25)/3
            let nv = a.n_vars();
            let shift = MultiDual::constant(c64(14.25, 0.0), nv);
            b.scale(c64(2.0, 0.0)).sub(&a).sub(&shift).scale(c64(1.0 / 3.0, 0.0))
        };
        let det = |q: &[MultiDual], r: &[MultiDual]| {
            let nv = q[0].n_vars();
            q.iter().zip(r).fold(MultiDual::constant(c64(1.0, 0.0), nv), |acc, (qk, rk)| {
                acc.mul(&MultiDual::constant(c64(1.0, 0.0), nv).sub(&qk.mul(rk)))
            })
        };
        let (qd, rd) = dual_variables(&s);
        let cs = conserved_quantities(&s);
        assert!((h1(&qd, &rd).value - cs.h[1]).norm() < 1e-13);
        assert!(poisson_bracket(&h1, &det, &s).norm() < 1e-10);
    }

    #[test]
    fn traces_commute() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..5 {
            let s = ChainState::random(3, 0.5, &mut rng);
            let l = c64(rng.gen_range(0.5..1.5), rng.gen_range(-0.5..0.5));
            let v = c64(rng.gen_range(0.5..1.5), rng.gen_range(-0.5..0.5));
            let tl = move |q: &[MultiDual], r: &[MultiDual]| monodromy_duals(q, r, l).trace();
            let tv = move |q: &[MultiDual], r: &[MultiDual]| monodromy_duals(q, r, v).trace();
            assert!(poisson_bracket(&tl, &tv, &s).norm() < 1e-10);
        }
    }

    #[test]
    fn rmatrix_entries_and_antisymmetry() {
        let r = classical_rmatrix(c64(1.0, 0.0), c64(2.0, 0.0)).unwrap();
        assert!((r[1][2] - c64(2.0 / 3.0, 0.0)).norm() < 1e-15);
        assert!((r[0][0] - c64(5.0 / 6.0, 0.0)).norm() < 1e-15);
        assert!((r[3][3] - c64(5.0 / 6.0, 0.0)).norm() < 1e-15);
        let (l, v) = (c64(0.8, 0.3), c64(1.4, -0.2));
        let a = classical_rmatrix(l, v).unwrap();
        let b = classical_rmatrix(v, l).unwrap();
        let swap = |i: usize| [0, 2, 1, 3][i];
        for i in 0..4 {
            for j in 0..4 {
                assert!((a[i][j] + b[swap(i)][swap(j)]).norm() < 1e-14);
            }
        }
        assert_eq!(classical_rmatrix(c64(1.0, 0.0), c64(-1.0, 0.0)), Err(ChainError::SingularParameters));
    }

    #[test]
    fn rmatrix_relation_small_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (l, v) = (c64(1.1, 0.2), c64(0.7, -0.3));
        let s1 = ChainState::random(1, 0.5, &mut rng);
        assert!(rmatrix_relation_residual(&s1, l, v).unwrap() < 1e-12);
        let s3 = ChainState::random(3, 0.5, &mut rng);
        assert!(rmatrix_relation_residual(&s3, l, v).unwrap() < 1e-10);
        assert!(rmatrix_relation_residual(&ChainState::zero(2).unwrap(), l, v).unwrap() < 1e-15);
    }

    #[test]
    fn degenerate_states_rejected() {
        let e = ChainState::new(vec![c64(2.0, 0.0)], vec![c64(0.5, 0.0)]).unwrap_err();
        assert!(matches!(e, ChainError::Degenerate { site: 0, .. }));
        assert!(ChainState::new(vec![], vec![]).is_err());
        assert!(ChainState::new(vec![c64(0.0, 0.0)], vec![]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let s = n2_state();
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(text, r#"{"N":2,"q":[[0.2,0.0],[0.1,0.0]],"r":[[0.3,0.0],[-0.4,0.0]]}"#);
        let back: ChainState = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
        let bad = r#"{"N":3,"q":[[0.2,0.0]],"r":[[0.3,0.0]]}"#;
        assert!(serde_json::from_str::<ChainState>(bad).is_err());
    }
}
