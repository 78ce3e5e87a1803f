use super::{Ring, C64};

/// Forward-mode dual number carrying every first partial derivative.
///
/// Exact to rounding for rational expressions and the elementary functions
/// provided here; used to compute Poisson brackets without finite differences.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiDual {
    pub value: C64,
    pub partials: Vec<C64>,
}

impl MultiDual {
    pub fn constant(value: C64, n_vars: usize) -> Self {
        Self { value, partials: vec![C64::new(0.0, 0.0); n_vars] }
    }

    /// Independent variable number `index` out of `n_vars`.
    pub fn variable(value: C64, index: usize, n_vars: usize) -> Self {
        let mut d = Self::constant(value, n_vars);
        d.partials[index] = C64::new(1.0, 0.0);
        d
    }

    pub fn n_vars(&self) -> usize {
        self.partials.len()
    }

    fn chain(&self, value: C64, derivative: C64) -> Self {
        Self { value, partials: self.partials.iter().map(|p| p * derivative).collect() }
    }

    pub fn scale(&self, c: C64) -> Self {
        self.chain(self.value * c, c)
    }

    pub fn add_scalar(&self, c: C64) -> Self {
        Self { value: self.value + c, partials: self.partials.clone() }
    }

    pub fn recip(&self) -> Self {
        let inv = self.value.inv();
        self.chain(inv, -inv * inv)
    }

    pub fn div(&self, other: &Self) -> Self {
        self.mul(&other.recip())
    }

    pub fn powi(&self, n: i32) -> Self {
        if n == 0 {
            return Self::constant(C64::new(1.0, 0.0), self.n_vars());
        }
        self.chain(self.value.powi(n), self.value.powi(n - 1) * n as f64)
    }

    pub fn ln(&self) -> Self {
        self.chain(self.value.ln(), self.value.inv())
    }

    pub fn exp(&self) -> Self {
        let e = self.value.exp();
        self.chain(e, e)
    }

    pub fn sqrt(&self) -> Self {
        let s = self.value.sqrt();
        self.chain(s, (s * 2.0).inv())
    }
}

impl Ring for MultiDual {
    fn add(&self, other: &Self) -> Self {
        Self {
            value: self.value + other.value,
            partials: self.partials.iter().zip(&other.partials).map(|(a, b)| a + b).collect(),
        }
    }

    fn sub(&self, other: &Self) -> Self {
        Self {
            value: self.value - other.value,
            partials: self.partials.iter().zip(&other.partials).map(|(a, b)| a - b).collect(),
        }
    }

    fn mul(&self, other: &Self) -> Self {
        Self {
            value: self.value * other.value,
            partials: self
                .partials
                .iter()
                .zip(&other.partials)
                .map(|(a, b)| a * other.value + self.value * b)
                .collect(),
        }
    }

    fn neg(&self) -> Self {
        Self { value: -self.value, partials: self.partials.iter().map(|p| -p).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::c64;
    use proptest::prelude::*;

    // f(x, y) = ln(1 + x y) / (x - 2y)^2 + exp(x) sqrt(y + 3)
    fn f_dual(x: &MultiDual, y: &MultiDual) -> MultiDual {
        let one = c64(1.0, 0.0);
        let num = x.mul(y).add_scalar(one).ln();
        let den = x.sub(&y.scale(c64(2.0, 0.0))).powi(2);
        num.div(&den).add(&x.exp().mul(&y.add_scalar(c64(3.0, 0.0)).sqrt()))
    }

    fn f_plain(x: C64, y: C64) -> C64 {
        (1.0 + x * y).ln() / (x - 2.0 * y).powi(2) + x.exp() * (y + 3.0).sqrt()
    }

    #[test]
    fn variables_form_unit_basis() {
        let v = MultiDual::variable(c64(2.0, 0.0), 1, 3);
        assert_eq!(v.partials, vec![c64(0.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0)]);
    }

    proptest! {
        #[test]
        fn partials_match_central_differences(xr in 0.2f64..0.8, xi in -0.3f64..0.3,
                                              yr in -0.9f64..-0.4, yi in -0.3f64..0.3) {
            let x0 = c64(xr, xi);
            let y0 = c64(yr, yi);
            let d = f_dual(&MultiDual::variable(x0, 0, 2), &MultiDual::variable(y0, 1, 2));
            let h = 1e-6;
            let fx = (f_plain(x0 + h, y0) - f_plain(x0 - h, y0)) / (2.0 * h);
            let fy = (f_plain(x0, y0 + h) - f_plain(x0, y0 - h)) / (2.0 * h);
            prop_assert!((d.partials[0] - fx).norm() <= 1e-6 * (1.0 + fx.norm()));
            prop_assert!((d.partials[1] - fy).norm() <= 1e-6 * (1.0 + fy.norm()));
            prop_assert!((d.value - f_plain(x0, y0)).norm() <= 1e-13 * (1.0 + d.value.norm()));
        }
    }
}
