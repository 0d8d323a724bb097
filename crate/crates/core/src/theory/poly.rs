use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::Rational;

/// Sparse polynomial in one variable with exact rational coefficients.
///
/// Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RationalPolynomial {
    coefficients: BTreeMap<usize, Rational>,
}

impl RationalPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_terms([(0, Rational::one())])
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (usize, Rational)>) -> Self {
        let mut p = Self::zero();
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    /// Truncated exponential series `1 + x + x^2/2! + ... + x^d/d!`.
    pub fn exp_partial_sum(degree: usize) -> Self {
        let mut fact = BigInt::one();
        let mut terms = Vec::with_capacity(degree + 1);
        for j in 0..=degree {
            if j > 0 {
                fact *= j;
            }
            terms.push((j, Rational::new(BigInt::one(), fact.clone())));
        }
        Self::from_terms(terms)
    }

    fn add_term(&mut self, exponent: usize, c: Rational) {
        if c.is_zero() {
            return;
        }
        let slot = self.coefficients.entry(exponent).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.coefficients.remove(&exponent);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coefficients.keys().next_back().copied()
    }

    /// Coefficient of `x^exponent` (zero when absent).
    pub fn coefficient(&self, exponent: usize) -> Rational {
        self.coefficients
            .get(&exponent)
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, &Rational)> {
        self.coefficients.iter().map(|(e, c)| (*e, c))
    }

    /// Product, dropping every term above `max_degree` when given.
    pub fn mul_truncated(&self, other: &Self, max_degree: Option<usize>) -> Self {
        let mut out = Self::zero();
        for (ea, ca) in &self.coefficients {
            for (eb, cb) in &other.coefficients {
                let e = ea + eb;
                if max_degree.is_some_and(|d| e > d) {
                    break;
                }
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    /// `self^k` by repeated squaring, optionally truncated.
    pub fn pow_truncated(&self, mut k: usize, max_degree: Option<usize>) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul_truncated(&base, max_degree);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul_truncated(&base, max_degree);
            }
        }
        acc
    }

    pub fn pow(&self, k: usize) -> Self {
        self.pow_truncated(k, None)
    }
}

impl std::ops::Mul for &RationalPolynomial {
    type Output = RationalPolynomial;

    fn mul(self, rhs: Self) -> RationalPolynomial {
        self.mul_truncated(rhs, None)
    }
}

impl fmt::Display for RationalPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (k, (e, c)) in self.coefficients.iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            match e {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c} x")?,
                _ => write!(f, "{c} x^{e}")?,
            }
        }
        Ok(())
    }
}

/// The generating function `(sum_{j<i} x^j / j!)^(m-1)`.
///
/// Its coefficient of `x^D`, times `D!`, counts the ways to spread `D` wrong
/// votes over the `m - 1` wrong classes with fewer than `i` votes each.
pub fn generating_function(m: usize, i: usize) -> RationalPolynomial {
    assert!(m >= 2 && i >= 1, "need m >= 2 and i >= 1");
    RationalPolynomial::exp_partial_sum(i - 1).pow(m - 1)
}

/// Coefficient of `x^(n-i)` in [`generating_function`]`(m, i)`.
pub fn gen_fun_coeff(m: usize, i: usize, n: usize) -> Rational {
    assert!(m >= 2, "need m >= 2");
    assert!((1..=n).contains(&i), "need 1 <= i <= n");
    let target = n - i;
    if target > (i - 1) * (m - 1) {
        return Rational::zero();
    }
    RationalPolynomial::exp_partial_sum(i - 1)
        .pow_truncated(m - 1, Some(target))
        .coefficient(target)
}
