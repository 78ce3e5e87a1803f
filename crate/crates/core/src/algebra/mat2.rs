use super::{Ring, C64};

/// 2x2 matrix over a (possibly non-commutative) ring.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat2<T> {
    pub a11: T,
    pub a12: T,
    pub a21: T,
    pub a22: T,
}

impl<T> Mat2<T> {
    pub const fn new(a11: T, a12: T, a21: T, a22: T) -> Self {
        Self { a11, a12, a21, a22 }
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> Mat2<U> {
        Mat2::new(f(&self.a11), f(&self.a12), f(&self.a21), f(&self.a22))
    }

    /// Entry by zero-based (row, column).
    pub fn get(&self, i: usize, j: usize) -> &T {
        match (i, j) {
            (0, 0) => &self.a11,
            (0, 1) => &self.a12,
            (1, 0) => &self.a21,
            (1, 1) => &self.a22,
            _ => panic!("Mat2 index ({i}, {j}) out of range"),
        }
    }

    pub fn entries(&self) -> [&T; 4] {
        [&self.a11, &self.a12, &self.a21, &self.a22]
    }
}

impl<T: Ring> Mat2<T> {
    /// Standard product; entry products keep left-right order.
    pub fn mul(&self, other: &Self) -> Self {
        Mat2::new(
            self.a11.mul(&other.a11).add(&self.a12.mul(&other.a21)),
            self.a11.mul(&other.a12).add(&self.a12.mul(&other.a22)),
            self.a21.mul(&other.a11).add(&self.a22.mul(&other.a21)),
            self.a21.mul(&other.a12).add(&self.a22.mul(&other.a22)),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        Mat2::new(
            self.a11.add(&other.a11),
            self.a12.add(&other.a12),
            self.a21.add(&other.a21),
            self.a22.add(&other.a22),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        Mat2::new(
            self.a11.sub(&other.a11),
            self.a12.sub(&other.a12),
            self.a21.sub(&other.a21),
            self.a22.sub(&other.a22),
        )
    }

    pub fn trace(&self) -> T {
        self.a11.add(&self.a22)
    }

    /// `a11 a22 − a12 a21`; meaningful for commuting entries only.
    pub fn det(&self) -> T {
        self.a11.mul(&self.a22).sub(&self.a12.mul(&self.a21))
    }

    /// Ordered product `factors[n-1] ··· factors[1] · factors[0]`.
    pub fn ordered_product(factors: &[Self]) -> Option<Self> {
        let mut it = factors.iter();
        let mut acc = it.next()?.clone();
        for f in it {
            acc = f.mul(&acc);
        }
        Some(acc)
    }
}

impl Mat2<C64> {
    pub fn identity() -> Self {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        Mat2::new(one, zero, zero, one)
    }

    pub fn apply(&self, v: [C64; 2]) -> [C64; 2] {
        [self.a11 * v[0] + self.a12 * v[1], self.a21 * v[0] + self.a22 * v[1]]
    }

    pub fn max_abs(&self) -> f64 {
        self.entries().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn to_array(&self) -> [[C64; 2]; 2] {
        [[self.a11, self.a12], [self.a21, self.a22]]
    }
}

/// Free-function form of [`Mat2::mul`].
pub fn mat2_mul<T: Ring>(a: &Mat2<T>, b: &Mat2<T>) -> Mat2<T> {
    a.mul(b)
}

/// 4x4 complex matrix on `C² ⊗ C²`, row index `2i + k` for the pair `(i, k)`.
pub type Mat4 = [[C64; 4]; 4];

/// Kronecker product with `(A⊗B)_{(ik),(jl)} = A_ij B_kl`.
pub fn kron2(a: &[[C64; 2]; 2], b: &[[C64; 2]; 2]) -> Mat4 {
    let mut out = [[C64::new(0.0, 0.0); 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[2 * i + k][2 * j + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn max_abs4(m: &Mat4) -> f64 {
    m.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::c64;

    #[test]
    fn identity_is_neutral() {
        let a = Mat2::new(c64(1.0, 2.0), c64(-0.5, 0.0), c64(3.0, -1.0), c64(0.25, 0.75));
        assert_eq!(a.mul(&Mat2::identity()), a);
        assert_eq!(Mat2::identity().mul(&a), a);
    }

    #[test]
    fn hand_checked_product() {
        // (1 2; 3 4)(0 1; i 2) = (2i, 5; 4i, 11)
        let a = Mat2::new(c64(1.0, 0.0), c64(2.0, 0.0), c64(3.0, 0.0), c64(4.0, 0.0));
        let b = Mat2::new(c64(0.0, 0.0), c64(1.0, 0.0), c64(0.0, 1.0), c64(2.0, 0.0));
        let p = a.mul(&b);
        assert_eq!(p, Mat2::new(c64(0.0, 2.0), c64(5.0, 0.0), c64(0.0, 4.0), c64(11.0, 0.0)));
    }

    #[test]
    fn ordered_product_applies_right_to_left() {
        let a = Mat2::new(c64(1.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0));
        let b = Mat2::new(c64(1.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0), c64(1.0, 0.0));
        // factors [a, b] → b·a
        assert_eq!(Mat2::ordered_product(&[a.clone(), b.clone()]).unwrap(), b.mul(&a));
        assert!(Mat2::<C64>::ordered_product(&[]).is_none());
    }
}
