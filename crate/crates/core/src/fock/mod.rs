//! Truncated q-boson Fock representation of the quantum chain.
//!
//! Each site carries occupations `0..=n_max`, with `r|n⟩ = |n+1⟩` (zero at
//! the cutoff) and `q|n⟩ = (1−α^n)|n−1⟩`, so that `[q, r] = η(1 − q r)` holds
//! below the cutoff. Identities are checked on the "safe" subspace where no
//! raising operator in the identity can reach the cutoff.

mod sparse;

pub use sparse::SparseOp;

use thiserror::Error;

use crate::algebra::{c64, AlgebraError, Coefficient, LaurentPoly, Mat2, Mat4, Ring, C64};
use crate::bethe::transfer_eigenvalue_roots;
use crate::qcalc::QParam;

/// Default cap on the Fock basis dimension.
pub const DEFAULT_MAX_BASIS: usize = 200_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FockError {
    #[error("a Fock representation needs at least one site and n_max >= 1")]
    Empty,
    #[error("basis dimension {dim} exceeds the cap of {cap}")]
    TooLarge { dim: usize, cap: usize },
    #[error("singular spectral parameters lambda = {lambda}, nu = {nu}")]
    Singular { lambda: C64, nu: C64 },
    #[error("spectral parameter must be nonzero")]
    ZeroSpectral,
    #[error("{m} particles need n_max >= {needed} (have {n_max})")]
    InsufficientHeadroom { m: usize, n_max: usize, needed: usize },
    #[error("the Bethe vector vanishes (degenerate roots)")]
    ZeroVector,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Multi-site truncated q-boson representation.
#[derive(Clone, Debug)]
pub struct FockRep {
    n_sites: usize,
    n_max: usize,
    q: QParam,
    dim: usize,
    q_ops: Vec<SparseOp>,
    r_ops: Vec<SparseOp>,
}

impl FockRep {
    pub fn new(n_sites: usize, n_max: usize, q: QParam) -> Result<Self, FockError> {
        Self::with_cap(n_sites, n_max, q, DEFAULT_MAX_BASIS)
    }

    pub fn with_cap(n_sites: usize, n_max: usize, q: QParam, cap: usize) -> Result<Self, FockError> {
        if n_sites == 0 || n_max == 0 {
            return Err(FockError::Empty);
        }
        let dim = (0..n_sites)
            .try_fold(1usize, |d, _| d.checked_mul(n_max + 1))
            .filter(|d| *d <= cap)
            .ok_or(FockError::TooLarge { dim: (n_max + 1).saturating_pow(n_sites as u32), cap })?;
        let base = n_max + 1;
        let alpha = q.alpha();
        let mut q_ops = Vec::with_capacity(n_sites);
        let mut r_ops = Vec::with_capacity(n_sites);
        for k in 0..n_sites {
            let stride = base.pow(k as u32);
            let occ = |idx: usize| (idx / stride) % base;
            q_ops.push(SparseOp::from_triplets(
                dim,
                (0..dim).filter(|&i| occ(i) > 0).map(|i| (i - stride, i, 1.0 - alpha.powi(occ(i) as i32))),
            ));
            r_ops.push(SparseOp::from_triplets(dim, (0..dim).filter(|&i| occ(i) < n_max).map(|i| (i + stride, i, c64(1.0, 0.0)))));
        }
        Ok(Self { n_sites, n_max, q, dim, q_ops, r_ops })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn qparam(&self) -> &QParam {
        &self.q
    }

    pub fn q_op(&self, k: usize) -> &SparseOp {
        &self.q_ops[k]
    }

    pub fn r_op(&self, k: usize) -> &SparseOp {
        &self.r_ops[k]
    }

    pub fn identity(&self) -> SparseOp {
        SparseOp::identity(self.dim)
    }

    /// Occupation numbers `(n_1, …, n_N)` of a basis index.
    pub fn occupations(&self, idx: usize) -> Vec<usize> {
        let base = self.n_max + 1;
        (0..self.n_sites).map(|k| (idx / base.pow(k as u32)) % base).collect()
    }

    pub fn index_of(&self, occ: &[usize]) -> usize {
        let base = self.n_max + 1;
        occ.iter().rev().fold(0, |acc, n| acc * base + n)
    }

    pub fn total_occupation(&self, idx: usize) -> usize {
        self.occupations(idx).iter().sum()
    }

    /// Mask of basis states with every `n_k ≤ n_max − headroom`.
    pub fn safe_mask(&self, headroom: usize) -> Vec<bool> {
        (0..self.dim)
            .map(|i| self.occupations(i).iter().all(|&n| n + headroom <= self.n_max))
            .collect()
    }

    pub fn vacuum(&self) -> Vec<C64> {
        let mut v = vec![C64::default(); self.dim];
        v[0] = c64(1.0, 0.0);
        v
    }

    /// `L_k(λ) = (λ, q_k; r_k, λ⁻¹)` with operator entries.
    pub fn local_lax_at(&self, k: usize, lambda: C64) -> Mat2<SparseOp> {
        let id = self.identity();
        Mat2::new(id.scale(lambda), self.q_ops[k].clone(), self.r_ops[k].clone(), id.scale(lambda.inv()))
    }

    /// Ordered product `L_N(λ) ··· L_1(λ)` at a numeric spectral parameter.
    pub fn monodromy_at(&self, lambda: C64) -> Result<Mat2<SparseOp>, FockError> {
        if lambda.norm() == 0.0 {
            return Err(FockError::ZeroSpectral);
        }
        let factors: Vec<_> = (0..self.n_sites).map(|k| self.local_lax_at(k, lambda)).collect();
        Ok(Mat2::ordered_product(&factors).expect("at least one site"))
    }

    pub fn transfer_at(&self, lambda: C64) -> Result<SparseOp, FockError> {
        Ok(self.monodromy_at(lambda)?.trace())
    }

    /// `Δ = Π_k (1 − r_k q_k)`.
    pub fn delta_product(&self) -> SparseOp {
        let id = self.identity();
        (0..self.n_sites).fold(id.clone(), |acc, k| acc.mul(&id.sub(&self.r_ops[k].mul(&self.q_ops[k]))))
    }
}

/// Monodromy entries as Laurent polynomials in `λ` with operator coefficients.
#[derive(Clone, Debug)]
pub struct OperatorMonodromy {
    pub a: LaurentPoly<SparseOp>,
    pub b: LaurentPoly<SparseOp>,
    pub c: LaurentPoly<SparseOp>,
    pub d: LaurentPoly<SparseOp>,
    dim: usize,
}

impl OperatorMonodromy {
    pub fn eval(&self, lambda: C64) -> Result<Mat2<SparseOp>, FockError> {
        let at = |p: &LaurentPoly<SparseOp>| -> Result<SparseOp, FockError> {
            Ok(p.eval(lambda)?.unwrap_or_else(|| SparseOp::zero(self.dim)))
        };
        Ok(Mat2::new(at(&self.a)?, at(&self.b)?, at(&self.c)?, at(&self.d)?))
    }
}

pub fn operator_monodromy(rep: &FockRep) -> OperatorMonodromy {
    let id = rep.identity();
    let factors: Vec<Mat2<LaurentPoly<SparseOp>>> = (0..rep.n_sites)
        .map(|k| {
            Mat2::new(
                LaurentPoly::monomial(1, id.clone()),
                LaurentPoly::monomial(0, rep.q_ops[k].clone()),
                LaurentPoly::monomial(0, rep.r_ops[k].clone()),
                LaurentPoly::monomial(-1, id.clone()),
            )
        })
        .collect();
    let m = Mat2::ordered_product(&factors).expect("at least one site");
    OperatorMonodromy { a: m.a11, b: m.a12, c: m.a21, d: m.a22, dim: rep.dim }
}

/// Quantum R-matrix `R(λ/ν)` with `c = λ²/(λ²−ν²)`, `b = λν/(λ²−ν²)`.
pub fn quantum_rmatrix(lambda: C64, nu: C64, eta: C64) -> Result<Mat4, FockError> {
    let den = lambda * lambda - nu * nu;
    if den.norm() < 1e-14 * (lambda.norm_sqr() + nu.norm_sqr()) || nu.norm() == 0.0 {
        return Err(FockError::Singular { lambda, nu });
    }
    let c = lambda * lambda / den;
    let b = lambda * nu / den;
    let z = C64::default();
    let one = c64(1.0, 0.0);
    Ok([
        [one + eta * c, z, z, z],
        [z, one + eta, eta * b, z],
        [z, eta * b, one, z],
        [z, z, z, one + eta * c],
    ])
}

/// Four-index view `R_{αβ,γδ}` with `(A⊗B)_{αβ,γδ} = A_{αβ} B_{γδ}`.
fn four_index(m: &Mat4, a: usize, b: usize, c: usize, d: usize) -> C64 {
    m[2 * a + c][2 * b + d]
}

/// Max residual of the index-contracted Yang–Baxter equation
/// `R_{ic,ja}(λ/ν) R_{cm,kb}(λ) R_{an,br}(ν) = R_{ja,kb}(ν) R_{ic,br}(λ) R_{cm,an}(λ/ν)`,
/// where a single argument `x` means `R(x, 1)`.
pub fn ybe_residual(lambda: C64, nu: C64, eta: C64) -> Result<f64, FockError> {
    let one = c64(1.0, 0.0);
    if nu.norm() == 0.0 {
        return Err(FockError::Singular { lambda, nu });
    }
    let r12 = quantum_rmatrix(lambda / nu, one, eta)?;
    let r13 = quantum_rmatrix(lambda, one, eta)?;
    let r23 = quantum_rmatrix(nu, one, eta)?;
    let mut worst: f64 = 0.0;
    for free in 0..64usize {
        let [i, j, k, m, n, r] = std::array::from_fn(|p| (free >> p) & 1);
        let mut lhs = C64::default();
        let mut rhs = C64::default();
        for sum in 0..8usize {
            let [a, b, c] = std::array::from_fn(|p| (sum >> p) & 1);
            lhs += four_index(&r12, i, c, j, a) * four_index(&r13, c, m, k, b) * four_index(&r23, a, n, b, r);
            rhs += four_index(&r23, j, a, k, b) * four_index(&r13, i, c, b, r) * four_index(&r12, c, m, a, n);
        }
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}

/// `Σ_j rows[i][j] · ops[j][k]` for a 4x4 scalar matrix times a 4x4 operator matrix.
fn scalar_times_ops(s: &Mat4, ops: &[Vec<SparseOp>], dim: usize, left: bool) -> Vec<Vec<SparseOp>> {
    (0..4)
        .map(|i| {
            (0..4)
                .map(|k| {
                    (0..4).fold(SparseOp::zero(dim), |acc, j| {
                        if left {
                            acc.add(&ops[j][k].scale(s[i][j]))
                        } else {
                            acc.add(&ops[i][j].scale(s[j][k]))
                        }
                    })
                })
                .collect()
        })
        .collect()
}

/// Max matrix element of `R(λ/ν) L¹(λ) L²(ν) − L²(ν) L¹(λ) R(λ/ν)` on the safe subspace.
pub fn rll_residual(rep: &FockRep, lambda: C64, nu: C64) -> Result<f64, FockError> {
    let r = quantum_rmatrix(lambda, nu, rep.q.eta())?;
    let a = rep.monodromy_at(lambda)?;
    let b = rep.monodromy_at(nu)?;
    let mut l1l2 = vec![vec![SparseOp::zero(rep.dim); 4]; 4];
    let mut l2l1 = l1l2.clone();
    for (i, j, k, m) in (0..16).map(|x| (x >> 3 & 1, x >> 2 & 1, x >> 1 & 1, x & 1)) {
        let (aij, bkm) = (a.get(i, j), b.get(k, m));
        l1l2[2 * i + k][2 * j + m] = aij.mul(bkm);
        l2l1[2 * i + k][2 * j + m] = bkm.mul(aij);
    }
    let lhs = scalar_times_ops(&r, &l1l2, rep.dim, true);
    let rhs = scalar_times_ops(&r, &l2l1, rep.dim, false);
    let mask = rep.safe_mask(2);
    Ok((0..16).map(|x| lhs[x / 4][x % 4].sub(&rhs[x / 4][x % 4]).max_abs_on(&mask)).fold(0.0, f64::max))
}

/// `[Tr L(λ), Tr L(ν)]` on the safe subspace.
pub fn transfer_commutator_residual(rep: &FockRep, lambda: C64, nu: C64) -> Result<f64, FockError> {
    let t1 = rep.transfer_at(lambda)?;
    let t2 = rep.transfer_at(nu)?;
    Ok(t1.commutator(&t2).max_abs_on(&rep.safe_mask(2)))
}

#[derive(Clone, Debug)]
pub struct QuantumDeterminant {
    /// The four expressions, each divided by `(√α)^{N−1}`.
    pub forms: [SparseOp; 4],
    pub product_form: SparseOp,
    /// Max pairwise difference of the forms on the safe subspace.
    pub pairwise: f64,
    /// Max difference of any form from the product form on the safe subspace.
    pub to_product: f64,
}

/// The four quantum-determinant expressions at `λ` and the product form.
pub fn quantum_determinant(rep: &FockRep, lambda: C64) -> Result<QuantumDeterminant, FockError> {
    let sa = rep.q.sqrt_alpha();
    let al = rep.q.alpha();
    let m1 = rep.monodromy_at(lambda)?;
    let m2 = rep.monodromy_at(lambda * sa)?;
    let (a, b, c, d) = (&m1.a11, &m1.a12, &m1.a21, &m1.a22);
    let (a2, b2, c2, d2) = (&m2.a11, &m2.a12, &m2.a21, &m2.a22);
    let norm = sa.powi(rep.n_sites as i32 - 1).inv();
    let forms = [
        a.mul(d2).scale(sa.inv()).sub(&b.mul(c2).scale(al.inv())),
        d.mul(a2).scale(sa.inv()).sub(&c.mul(b2)),
        a2.mul(d).scale(sa.inv()).sub(&c2.mul(b)),
        d2.mul(a).scale(sa.inv()).sub(&b2.mul(c).scale(al.inv())),
    ]
    .map(|f| f.scale(norm));
    let product_form = rep.delta_product();
    let mask = rep.safe_mask(2);
    let mut pairwise: f64 = 0.0;
    for i in 0..4 {
        for j in i + 1..4 {
            pairwise = pairwise.max(forms[i].sub(&forms[j]).max_abs_on(&mask));
        }
    }
    let to_product = forms.iter().map(|f| f.sub(&product_form).max_abs_on(&mask)).fold(0.0, f64::max);
    Ok(QuantumDeterminant { forms, product_form, pairwise, to_product })
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `Π_k C(λ_k)|0⟩`.
pub fn bethe_state(rep: &FockRep, roots: &[C64]) -> Result<Vec<C64>, FockError> {
    let m = roots.len();
    if m + 2 > rep.n_max {
        return Err(FockError::InsufficientHeadroom { m, n_max: rep.n_max, needed: m + 2 });
    }
    let mut v = rep.vacuum();
    for &l in roots {
        v = rep.monodromy_at(l)?.a21.apply(&v);
    }
    if norm(&v) < 1e-300 {
        return Err(FockError::ZeroVector);
    }
    Ok(v)
}

/// `‖Tr L(ν)φ − t(ν)φ‖ / ‖φ‖` with the Bethe-ansatz eigenvalue `t(ν)`.
pub fn eigen_residual(rep: &FockRep, state: &[C64], roots: &[C64], nu: C64) -> Result<f64, FockError> {
    if nu.norm() == 0.0 {
        return Err(FockError::ZeroSpectral);
    }
    if let Some(l) = roots.iter().find(|l| (*l * *l - nu * nu).norm() < 1e-12) {
        return Err(FockError::Singular { lambda: *l, nu });
    }
    let t = transfer_eigenvalue_roots(rep.n_sites, roots, nu, &rep.q);
    eigen_residual_with(&rep.transfer_at(nu)?, state, t)
}

/// `‖Oφ − eφ‖ / ‖φ‖`.
pub fn eigen_residual_with(op: &SparseOp, state: &[C64], eigenvalue: C64) -> Result<f64, FockError> {
    let n = norm(state);
    if n < 1e-300 {
        return Err(FockError::ZeroVector);
    }
    let w = op.apply(state);
    Ok(w.iter().zip(state).map(|(a, b)| (a - eigenvalue * b).norm_sqr()).sum::<f64>().sqrt() / n)
}

/// `‖Δφ − α^m φ‖ / ‖φ‖` with the product form of `Δ`.
pub fn delta_eigen_residual(rep: &FockRep, state: &[C64], m: usize) -> Result<f64, FockError> {
    eigen_residual_with(&rep.delta_product(), state, rep.q.alpha().powi(m as i32))
}

/// Prop. 2 check: the determinant form at `λ` acts on a Bethe state as
/// `α^m d(λ) a(λ√α) / (√α)^N` with `a(λ) = λ^N`, `d(λ) = λ^{−N}`.
pub fn delta_lambda_eigen_residual(rep: &FockRep, state: &[C64], m: usize, lambda: C64) -> Result<f64, FockError> {
    let qd = quantum_determinant(rep, lambda)?;
    let n = rep.n_sites as i32;
    let sa = rep.q.sqrt_alpha();
    let expected = rep.q.alpha().powi(m as i32) * lambda.powi(-n) * (lambda * sa).powi(n) / sa.powi(n);
    eigen_residual_with(&qd.forms[0], state, expected)
}

/// `[Δ(λ), Tr L(μ)]` on the subspace with three units of headroom.
pub fn delta_transfer_commutator(rep: &FockRep, lambda: C64, mu: C64) -> Result<f64, FockError> {
    let qd = quantum_determinant(rep, lambda)?;
    let t = rep.transfer_at(mu)?;
    Ok(qd.forms[0].commutator(&t).max_abs_on(&rep.safe_mask(3)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::max_abs4;
    use crate::chain::classical_rmatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rep(n: usize, n_max: usize, alpha: f64) -> FockRep {
        FockRep::new(n, n_max, QParam::real(alpha).unwrap()).unwrap()
    }

    #[test]
    fn site_operators_and_commutators() {
        let f = rep(2, 4, 0.5);
        let eta = f.qparam().eta();
        let mask = f.safe_mask(1);
        for j in 0..2 {
            for k in 0..2 {
                let c = f.q_op(j).commutator(f.r_op(k));
                let want = if j == k { f.identity().sub(&f.q_op(j).mul(f.r_op(j))).scale(eta) } else { SparseOp::zero(f.dim()) };
                assert!(c.sub(&want).max_abs_on(&mask) < 1e-15);
                assert_eq!(f.q_op(j).commutator(f.q_op(k)).max_abs(), 0.0);
                assert_eq!(f.r_op(j).commutator(f.r_op(k)).max_abs(), 0.0);
            }
        }
        // the Δ factors act as α^n
        let d = f.delta_product();
        for i in 0..f.dim() {
            let n: usize = f.total_occupation(i);
            assert!((d.get(i, i) - 0.5f64.powi(n as i32)).norm() < 1e-15);
        }
    }

    #[test]
    fn memory_cap() {
        let q = QParam::real(0.5).unwrap();
        assert!(matches!(FockRep::with_cap(4, 9, q, 1000), Err(FockError::TooLarge { .. })));
        assert!(matches!(FockRep::new(40, 9, q), Err(FockError::TooLarge { .. })));
    }

    #[test]
    fn rmatrix_examples() {
        let mut g = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let l = c64(g.gen_range(0.2..2.0), g.gen_range(-1.0..1.0));
            let n = c64(g.gen_range(0.2..2.0), g.gen_range(-1.0..1.0));
            let eta = c64(g.gen_range(-1.0..1.0), g.gen_range(-1.0..1.0));
            let rq = quantum_rmatrix(l, n, eta).unwrap();
            let rc = classical_rmatrix(l, n).unwrap();
            let mut diff = [[C64::default(); 4]; 4];
            for i in 0..4 {
                for j in 0..4 {
                    let id = if i == j { 1.0 + eta / 2.0 } else { C64::default() };
                    diff[i][j] = rq[i][j] - (id - eta * rc[i][j]);
                }
            }
            assert!(max_abs4(&diff) < 1e-13);
        }
        let r0 = quantum_rmatrix(c64(1.3, 0.0), c64(0.7, 0.0), C64::default()).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(r0[i][j], if i == j { c64(1.0, 0.0) } else { C64::default() });
            }
        }
        let r = quantum_rmatrix(c64(1.3, 0.0), c64(0.7, 0.0), c64(1.0, 0.0)).unwrap();
        assert!((r[0][0] - (1.0 + 1.69 / 1.2)).norm() < 1e-14);
        assert!(quantum_rmatrix(c64(1.0, 0.0), c64(-1.0, 0.0), c64(0.1, 0.0)).is_err());
    }

    #[test]
    fn yang_baxter() {
        let mut g = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..30 {
            let l = c64(g.gen_range(0.2..2.0), g.gen_range(-1.0..1.0));
            let n = c64(g.gen_range(0.2..2.0), g.gen_range(-1.0..1.0));
            let eta = c64(g.gen_range(-1.0..1.0), g.gen_range(-1.0..1.0));
            if [l * l - n * n, l * l - 1.0, n * n - 1.0].iter().any(|d| d.norm() < 0.1) {
                continue;
            }
            assert!(ybe_residual(l, n, eta).unwrap() < 1e-12);
            let s = c64(0.7, 0.4);
            // only λ/ν enters the first factor
            let scaled = quantum_rmatrix(l * s, n * s, eta).unwrap();
            let plain = quantum_rmatrix(l, n, eta).unwrap();
            let mut d = [[C64::default(); 4]; 4];
            for i in 0..4 {
                for j in 0..4 {
                    d[i][j] = scaled[i][j] - plain[i][j];
                }
            }
            assert!(max_abs4(&d) < 1e-12);
        }
        assert_eq!(ybe_residual(c64(1.7, 0.2), c64(0.4, -0.3), C64::default()).unwrap(), 0.0);
    }

    #[test]
    fn monodromy_structure() {
        let f = rep(1, 3, 0.5);
        let m = operator_monodromy(&f);
        let l = c64(1.2, 0.3);
        let at = m.eval(l).unwrap();
        assert!(at.a11.sub(&f.identity().scale(l)).max_abs() < 1e-15);
        assert_eq!(at.a12, *f.q_op(0));
        assert_eq!(at.a21, *f.r_op(0));
        assert!(at.a22.sub(&f.identity().scale(l.inv())).max_abs() < 1e-15);

        let f = rep(3, 3, 0.4);
        let m = operator_monodromy(&f);
        let at = m.eval(l).unwrap();
        let direct = f.monodromy_at(l).unwrap();
        for (x, y) in at.entries().iter().zip(direct.entries()) {
            assert!(x.sub(y).max_abs() < 1e-13);
        }
        let vac = f.vacuum();
        let av = at.a11.apply(&vac);
        let dv = at.a22.apply(&vac);
        let bv = at.a12.apply(&vac);
        assert!((av[0] - l.powi(3)).norm() < 1e-13 && (dv[0] - l.powi(-3)).norm() < 1e-13);
        assert!(bv.iter().all(|z| z.norm() == 0.0));
        let cv = at.a21.apply(&vac);
        for (i, z) in cv.iter().enumerate() {
            if z.norm() > 0.0 {
                assert_eq!(f.total_occupation(i), 1);
            }
        }
    }

    #[test]
    fn rll_and_commuting_transfer() {
        for (n, tol) in [(1, 1e-12), (2, 1e-11)] {
            let f = rep(n, 6, 0.5);
            let (l, nu) = (c64(1.1, 0.2), c64(0.7, -0.3));
            assert!(rll_residual(&f, l, nu).unwrap() < tol);
            assert!(transfer_commutator_residual(&f, l, nu).unwrap() < 1e-10);
        }
    }

    #[test]
    fn quantum_determinant_forms() {
        let f = rep(2, 5, 0.5);
        let qd = quantum_determinant(&f, c64(1.3, 0.4)).unwrap();
        assert!(qd.pairwise < 1e-11, "{}", qd.pairwise);
        assert!(qd.to_product < 1e-11, "{}", qd.to_product);
        let idx = f.index_of(&[2, 1]);
        assert!((qd.product_form.get(idx, idx) - 0.125).norm() < 1e-15);
    }

    #[test]
    fn vacuum_and_one_particle_states() {
        let f = rep(2, 4, 0.5);
        let vac = bethe_state(&f, &[]).unwrap();
        assert_eq!(vac, f.vacuum());
        let nu = c64(0.9, 0.35);
        assert!(eigen_residual(&f, &vac, &[], nu).unwrap() < 1e-12);
        // m = 1: λ^{2N} = 1
        let root = c64(0.0, 1.0);
        let state = bethe_state(&f, &[root]).unwrap();
        for (i, z) in state.iter().enumerate() {
            if z.norm() > 0.0 {
                assert_eq!(f.total_occupation(i), 1);
            }
        }
        assert!(eigen_residual(&f, &state, &[root], nu).unwrap() < 1e-10);
        assert!(delta_eigen_residual(&f, &state, 1).unwrap() < 1e-10);
    }

    #[test]
    fn creation_operators_commute_on_vacuum() {
        let f = rep(2, 5, 0.5);
        let (a, b) = (c64(0.8, 0.3), c64(-0.4, 1.1));
        let ab = bethe_state(&f, &[a, b]).unwrap();
        let ba = bethe_state(&f, &[b, a]).unwrap();
        assert!(ab.iter().zip(&ba).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) < 1e-11);
        assert!(matches!(bethe_state(&rep(2, 3, 0.5), &[a, b]), Err(FockError::InsufficientHeadroom { .. })));
    }

    #[test]
    fn determinant_commutes_with_transfer() {
        let f = rep(2, 5, 0.5);
        assert!(delta_transfer_commutator(&f, c64(1.2, 0.3), c64(0.8, -0.2)).unwrap() < 1e-10);
    }
}
