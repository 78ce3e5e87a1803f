use std::collections::BTreeMap;

use super::{AlgebraError, Coefficient, Ring, C64};

/// Coefficients below this absolute size are never stored.
const ABS_FLOOR: f64 = 1e-300;
/// Coefficients below this fraction of the largest one are dropped after arithmetic.
const REL_DROP: f64 = 1e-15;

/// Sparse Laurent polynomial `Σ c_e λ^e` in the spectral parameter.
///
/// The coefficient ring is generic: complex numbers for the classical chain,
/// sparse operators for the quantum monodromy.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentPoly<T = C64> {
    coeffs: BTreeMap<i32, T>,
}

impl<T: Coefficient> LaurentPoly<T> {
    pub fn zero() -> Self {
        Self { coeffs: BTreeMap::new() }
    }

    /// Single term `c λ^e`.
    pub fn monomial(exponent: i32, c: T) -> Self {
        Self::from_terms([(exponent, c)])
    }

    pub fn from_terms<I: IntoIterator<Item = (i32, T)>>(terms: I) -> Self {
        let mut coeffs: BTreeMap<i32, T> = BTreeMap::new();
        for (e, c) in terms {
            match coeffs.get_mut(&e) {
                Some(existing) => *existing = existing.add(&c),
                None => {
                    coeffs.insert(e, c);
                }
            }
        }
        let mut p = Self { coeffs };
        p.prune();
        p
    }

    fn prune(&mut self) {
        let max = self.coeffs.values().map(|c| c.magnitude()).fold(0.0, f64::max);
        let cut = (max * REL_DROP).max(ABS_FLOOR);
        self.coeffs.retain(|_, c| c.magnitude() >= cut);
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of `λ^e`, if stored.
    pub fn coeff(&self, exponent: i32) -> Option<&T> {
        self.coeffs.get(&exponent)
    }

    /// Exponents with a stored coefficient, ascending.
    pub fn support(&self) -> impl Iterator<Item = i32> + '_ {
        self.coeffs.keys().copied()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &T)> + '_ {
        self.coeffs.iter().map(|(e, c)| (*e, c))
    }

    pub fn min_exponent(&self) -> Option<i32> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_exponent(&self) -> Option<i32> {
        self.coeffs.keys().next_back().copied()
    }

    /// Evaluate at a numeric spectral parameter.
    ///
    /// Returns `None` for the zero polynomial (the coefficient ring has no
    /// intrinsic zero element).
    pub fn eval(&self, lambda: C64) -> Result<Option<T>, AlgebraError> {
        if lambda == C64::new(0.0, 0.0) && self.min_exponent().is_some_and(|e| e < 0) {
            return Err(AlgebraError::ZeroArgument);
        }
        let mut acc: Option<T> = None;
        for (e, c) in &self.coeffs {
            let term = c.scale(lambda.powi(*e));
            acc = Some(match acc {
                Some(a) => a.add(&term),
                None => term,
            });
        }
        Ok(acc)
    }

    /// Substitute `λ → s·λ`.
    pub fn rescale_argument(&self, s: C64) -> Self {
        Self::from_terms(self.coeffs.iter().map(|(e, c)| (*e, c.scale(s.powi(*e)))))
    }
}

impl LaurentPoly<C64> {
    /// Scalar evaluation; the zero polynomial evaluates to 0.
    pub fn eval_scalar(&self, lambda: C64) -> Result<C64, AlgebraError> {
        Ok(self.eval(lambda)?.unwrap_or_default())
    }

    /// The monomial `λ`.
    pub fn lambda() -> Self {
        Self::monomial(1, C64::new(1.0, 0.0))
    }

    pub fn constant(c: C64) -> Self {
        Self::monomial(0, c)
    }
}

fn add_exponents(a: i32, b: i32) -> i32 {
    a.checked_add(b).expect("Laurent exponent overflow")
}

impl<T: Coefficient> Ring for LaurentPoly<T> {
    fn add(&self, other: &Self) -> Self {
        Self::from_terms(self.coeffs.iter().chain(other.coeffs.iter()).map(|(e, c)| (*e, c.clone())))
    }

    fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    fn mul(&self, other: &Self) -> Self {
        let mut terms = Vec::with_capacity(self.coeffs.len() * other.coeffs.len());
        for (ea, ca) in &self.coeffs {
            for (eb, cb) in &other.coeffs {
                terms.push((add_exponents(*ea, *eb), ca.mul(cb)));
            }
        }
        Self::from_terms(terms)
    }

    fn neg(&self) -> Self {
        Self { coeffs: self.coeffs.iter().map(|(e, c)| (*e, c.neg())).collect() }
    }
}

impl<T: Coefficient> Coefficient for LaurentPoly<T> {
    fn scale(&self, c: C64) -> Self {
        Self::from_terms(self.coeffs.iter().map(|(e, v)| (*e, v.scale(c))))
    }

    fn magnitude(&self) -> f64 {
        self.coeffs.values().map(|c| c.magnitude()).fold(0.0, f64::max)
    }
}

/// Product of two Laurent polynomials (exact convolution of exponents).
pub fn laurent_mul<T: Coefficient>(p: &LaurentPoly<T>, q: &LaurentPoly<T>) -> LaurentPoly<T> {
    p.mul(q)
}
