//! Scalar and matrix algebra shared by the classical and quantum chains.
//!
//! Everything here is generic over [`Ring`], a minimal by-reference ring
//! interface. Complex scalars, Laurent polynomials, sparse operators, dual
//! numbers and operator expressions all implement it, so the same 2x2 matrix
//! product builds numeric, symbolic and operator-valued monodromies.

mod dual;
mod laurent;
mod mat2;

pub use dual::MultiDual;
pub use laurent::{laurent_mul, LaurentPoly};
pub use mat2::{kron2, mat2_mul, max_abs4, Mat2, Mat4};

use num_complex::Complex64;
use thiserror::Error;

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;

/// Shorthand constructor for a complex number.
#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("cannot evaluate a Laurent polynomial with negative exponents at zero")]
    ZeroArgument,
}

/// Minimal ring interface, by reference.
///
/// Products keep their left-right order so non-commutative rings (operators)
/// behave correctly inside [`Mat2`] products.
pub trait Ring: Clone {
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
}

/// Coefficient types that can be scaled by complex numbers and measured.
pub trait Coefficient: Ring {
    fn scale(&self, c: C64) -> Self;
    /// Size used for pruning negligible coefficients.
    fn magnitude(&self) -> f64;
}

impl Ring for C64 {
    #[inline]
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    #[inline]
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    #[inline]
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    #[inline]
    fn neg(&self) -> Self {
        -self
    }
}

impl Coefficient for C64 {
    #[inline]
    fn scale(&self, c: C64) -> Self {
        self * c
    }
    #[inline]
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Solve the dense complex system `A x = b` by LU with partial pivoting.
///
/// `rows[i][j]` is `A_ij`. Returns `None` when the matrix is numerically
/// singular or the solution is not finite.
pub fn solve_dense(rows: &[Vec<C64>], b: &[C64]) -> Option<Vec<C64>> {
    let n = b.len();
    let a = nalgebra::DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    let lu = a.lu();
    let u = lu.u();
    let scale = u.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let min_pivot = (0..n).map(|i| u[(i, i)].norm()).fold(f64::INFINITY, f64::min);
    if !(scale > 0.0) || min_pivot <= 1e-14 * scale {
        return None;
    }
    let x = lu.solve(&nalgebra::DVector::from_column_slice(b))?;
    x.iter().all(|z| z.is_finite()).then(|| x.iter().copied().collect())
}
