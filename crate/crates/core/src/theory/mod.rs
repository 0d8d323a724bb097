//! Exact accuracy analysis of plurality ensembles.
//!
//! Everything here is computed with arbitrary-precision rationals; floats
//! appear only when a value is presented.

mod formulas;
mod oracle;
mod poly;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub use formulas::{
    audit, binomial, k_constant, mu_pid, overlap_bound, p_tilde, t_hetero, t_hetero_partition_sum,
    t_p_binary, t_p_derivative_binary, t_p_paper, FormulaAudit, HETERO_MAX_N,
};
pub use oracle::{t_p_oracle, OracleInput, OracleTie, ORACLE_MAX_M, ORACLE_MAX_N};
pub use poly::{gen_fun_coeff, generating_function, RationalPolynomial};

pub type Rational = BigRational;

/// `num / den` as an exact rational.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Parses `"0.8"`, `"4/5"`, `"1"` or `"1e-3"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::InvalidInput(format!("'{s}' is not a rational number"));
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(num, den));
    }
    let (mantissa, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.trim_start_matches(['-', '+']).is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let num: BigInt = digits.parse().map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    Ok(if scale >= 0 {
        Rational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(num, num_traits::pow(ten, (-scale) as usize))
    })
}

fn check_probability(name: &str, p: &Rational) -> Result<()> {
    if p.is_negative() || *p > Rational::one() {
        return invalid(format!("{name} = {p} must lie in [0, 1]"));
    }
    Ok(())
}

/// `n` independent classifiers with common accuracy `p` over `m` classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TheoryParams {
    pub n: usize,
    pub m: usize,
    pub p: Rational,
}

impl TheoryParams {
    pub fn new(n: usize, m: usize, p: Rational) -> Result<Self> {
        if n == 0 {
            return invalid("ensemble size n must be >= 1");
        }
        if m < 2 {
            return invalid("class count m must be >= 2");
        }
        check_probability("p", &p)?;
        Ok(TheoryParams { n, m, p })
    }
}

/// Independent classifiers with individual accuracies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeteroParams {
    pub accuracies: Vec<Rational>,
    pub m: usize,
}

impl HeteroParams {
    pub fn new(accuracies: Vec<Rational>, m: usize) -> Result<Self> {
        if accuracies.is_empty() {
            return invalid("need at least one classifier accuracy");
        }
        if m < 2 {
            return invalid("class count m must be >= 2");
        }
        for (i, p) in accuracies.iter().enumerate() {
            check_probability(&format!("p_{}", i + 1), p)?;
        }
        Ok(HeteroParams { accuracies, m })
    }

    /// All classifiers share accuracy `p`.
    pub fn uniform(params: &TheoryParams) -> Self {
        HeteroParams {
            accuracies: vec![params.p.clone(); params.n],
            m: params.m,
        }
    }

    pub fn n(&self) -> usize {
        self.accuracies.len()
    }
}

/// Homogeneous ensemble with a fraction `rho` of easy inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverlapParams {
    pub n: usize,
    pub m: usize,
    pub p: Rational,
    pub rho: Rational,
}

impl OverlapParams {
    pub fn new(n: usize, m: usize, p: Rational, rho: Rational) -> Result<Self> {
        TheoryParams::new(n, m, p.clone())?;
        if rho.is_negative() || rho > p {
            return invalid(format!("overlap rho = {rho} must lie in [0, p = {p}]"));
        }
        Ok(OverlapParams { n, m, p, rho })
    }
}

/// Normalization used when evaluating the closed-form plurality accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KVariant {
    /// `K = sum_j C(n,j) p^j ((m-1)(1-p))^(n-j)`.
    Theorem,
    /// `K = sum_j C(n,j) p^j ((m-2)(1-p))^(n-j)`, which gives 1664/1728
    /// at n=3, m=4, p=0.8.
    Example,
    /// No `K`; each wrong vote lands on a given wrong class with
    /// probability `(1-p)/(m-1)`.
    Model,
}

impl KVariant {
    pub const ALL: [KVariant; 3] = [KVariant::Theorem, KVariant::Example, KVariant::Model];

    pub fn name(self) -> &'static str {
        match self {
            KVariant::Theorem => "theorem",
            KVariant::Example => "example",
            KVariant::Model => "model",
        }
    }
}

impl FromStr for KVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        KVariant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| {
                Error::InvalidInput(format!(
                    "unknown variant '{s}' (expected theorem, example or model)"
                ))
            })
    }
}

impl fmt::Display for KVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Tie handling for the binary binomial-tail form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BinaryTie {
    /// Sum from `ceil(n/2)`: an even-`n` tie counts as a win.
    AsWritten,
    /// Sum from `floor(n/2) + 1`: only strict majorities win.
    Strict,
}

impl FromStr for BinaryTie {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "as-written" => Ok(BinaryTie::AsWritten),
            "strict" => Ok(BinaryTie::Strict),
            other => invalid(format!("unknown binary tie mode '{other}' (expected as-written or strict)")),
        }
    }
}
