use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{
    gen_fun_coeff, oracle, to_f64, BinaryTie, HeteroParams, KVariant, OverlapParams,
    Rational, TheoryParams,
};
use crate::error::{invalid, Error, Result};

/// Largest ensemble accepted by [`t_hetero`].
pub const HETERO_MAX_N: usize = 200;

/// Binomial coefficient `C(n, k)` as a big integer.
pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut c = BigInt::one();
    for j in 0..k {
        c = c * (n - j) / (j + 1);
    }
    c
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// `base^exp` with `0^0 = 1`.
fn rpow(base: &Rational, exp: usize) -> Rational {
    num_traits::pow(base.clone(), exp)
}

fn int(n: usize) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// The normalization constant `K` for the theorem or example variant.
///
/// Returns 1 for the model variant.
pub fn k_constant(params: &TheoryParams, variant: KVariant) -> Rational {
    let TheoryParams { n, m, p } = params;
    let wrong_classes = match variant {
        KVariant::Theorem => m - 1,
        KVariant::Example => m - 2,
        KVariant::Model => return Rational::one(),
    };
    let q = Rational::one() - p;
    let spread = int(wrong_classes) * q;
    (0..=*n)
        .map(|j| Rational::from_integer(binomial(*n, j)) * rpow(p, j) * rpow(&spread, n - j))
        .fold(Rational::zero(), |acc, t| acc + t)
}

/// Closed-form probability that plurality elects the correct class.
///
/// Sums `C(n,i) p^i phi_i (n-i)! w^(n-i)` for `i` from `ceil(n/m)` to `n`,
/// where `phi_i` is [`gen_fun_coeff`]`(m, i, n)`. For the theorem and example
/// variants `w = 1 - p` and the sum is divided by [`k_constant`]; the model
/// variant uses `w = (1 - p)/(m - 1)` and no normalization.
pub fn t_p_paper(params: &TheoryParams, variant: KVariant) -> Result<Rational> {
    let TheoryParams { n, m, p } = params;
    let (n, m) = (*n, *m);
    let q = Rational::one() - p;
    let wrong_weight = match variant {
        KVariant::Model => q / int(m - 1),
        _ => q,
    };
    let first = n.div_ceil(m);
    let mut total = Rational::zero();
    for i in first.max(1)..=n {
        let phi = gen_fun_coeff(m, i, n);
        if phi.is_zero() {
            continue;
        }
        total += Rational::from_integer(binomial(n, i) * factorial(n - i))
            * phi
            * rpow(p, i)
            * rpow(&wrong_weight, n - i);
    }
    let k = k_constant(params, variant);
    if k.is_zero() {
        return invalid(format!(
            "the {variant} normalization vanishes at n = {n}, m = {m}, p = {p}"
        ));
    }
    Ok(total / k)
}

/// Binomial tail for two classes, `sum_{i >= lo} C(n,i) p^i (1-p)^(n-i)`.
///
/// `lo` is `ceil(n/2)` as written and `floor(n/2) + 1` for strict wins.
/// With `p = a/b` every term shares the denominator `b^n`, so the sum is
/// accumulated over integers.
pub fn t_p_binary(n: usize, p: &Rational, tie: BinaryTie) -> Rational {
    let lo = match tie {
        BinaryTie::AsWritten => n.div_ceil(2),
        BinaryTie::Strict => n / 2 + 1,
    };
    binomial_tail(n, p, lo)
}

fn binomial_tail(n: usize, p: &Rational, lo: usize) -> Rational {
    if lo > n {
        return Rational::zero();
    }
    let a = p.numer().clone();
    let b = p.denom().clone();
    let c = &b - &a;
    // a^i for i >= lo, c^(n-i) descending
    let mut a_pow = num_traits::pow(a.clone(), lo);
    let mut c_pows = Vec::with_capacity(n - lo + 1);
    let mut acc = BigInt::one();
    for _ in 0..=(n - lo) {
        c_pows.push(acc.clone());
        acc *= &c;
    }
    let mut coeff = binomial(n, lo);
    let mut sum = BigInt::zero();
    for i in lo..=n {
        sum += &coeff * &a_pow * &c_pows[n - i];
        a_pow *= &a;
        coeff = coeff * (n - i) / (i + 1);
    }
    Rational::new(sum, num_traits::pow(b, n))
}

/// Closed-form derivative of the as-written binary tail:
/// `k C(n,k) p^(k-1) (1-p)^(n-k)` with `k = ceil(n/2)`.
pub fn t_p_derivative_binary(n: usize, p: &Rational) -> Rational {
    let k = n.div_ceil(2);
    let q = Rational::one() - p;
    Rational::from_integer(binomial(n, k) * k) * rpow(p, k - 1) * rpow(&q, n - k)
}

/// Distribution of the number of correct votes among independent
/// classifiers (Poisson binomial), by dynamic programming.
fn correct_count_distribution(accuracies: &[Rational]) -> Vec<Rational> {
    let mut dist = vec![Rational::one()];
    for p in accuracies {
        let q = Rational::one() - p;
        let mut next = vec![Rational::zero(); dist.len() + 1];
        for (s, mass) in dist.iter().enumerate() {
            next[s] += mass * &q;
            next[s + 1] += mass * p;
        }
        dist = next;
    }
    dist
}

/// Number of ways to assign `n - s` wrong votes to `m - 1` labelled wrong
/// classes with fewer than `s` votes per class, `phi_s (n-s)!`.
fn valid_wrong_assignments(m: usize, s: usize, n: usize) -> Rational {
    if s == 0 {
        return Rational::zero();
    }
    gen_fun_coeff(m, s, n) * Rational::from_integer(factorial(n - s))
}

fn hetero_sum(params: &HeteroParams, normalize: bool) -> Result<Rational> {
    let n = params.n();
    if n > HETERO_MAX_N {
        return Err(Error::TooLarge(format!(
            "heterogeneous accuracy is limited to n <= {HETERO_MAX_N}, got {n}"
        )));
    }
    let m = params.m;
    let dist = correct_count_distribution(&params.accuracies);
    let mut total = Rational::zero();
    for (s, mass) in dist.iter().enumerate() {
        let mut w = valid_wrong_assignments(m, s, n);
        if w.is_zero() {
            continue;
        }
        if normalize {
            w /= rpow(&int(m - 1), n - s);
        }
        total += mass * w;
    }
    Ok(total)
}

/// Probability that plurality strictly elects the correct class when
/// classifier `i` is right with probability `p_i` and otherwise picks one of
/// the `m - 1` wrong classes uniformly.
///
/// Correct-vote subsets of equal size contribute the same wrong-vote factor,
/// so the subset sum is grouped by size.
pub fn t_hetero(params: &HeteroParams) -> Result<Rational> {
    hetero_sum(params, true)
}

/// The literal partition sum over correct subsets and valid wrong-class
/// partitions, without any normalization.
pub fn t_hetero_partition_sum(params: &HeteroParams) -> Result<Rational> {
    hetero_sum(params, false)
}

/// Residual accuracy on hard inputs, `(p - rho)/(1 - rho)`.
pub fn p_tilde(p: &Rational, rho: &Rational) -> Result<Rational> {
    if rho > p {
        return invalid(format!("overlap rho = {rho} exceeds accuracy p = {p}"));
    }
    if *rho >= Rational::one() {
        return invalid("overlap rho must be < 1");
    }
    if *rho < Rational::zero() {
        return invalid("overlap rho must be >= 0");
    }
    Ok((p - rho) / (Rational::one() - rho))
}

/// Lower bound `(1 - rho) T(p~) + rho` on ensemble accuracy with overlap.
///
/// `T` is the strict binary tail for two classes and the model-normalized
/// closed form otherwise.
pub fn overlap_bound(params: &OverlapParams) -> Result<Rational> {
    let pt = p_tilde(&params.p, &params.rho)?;
    let t = if params.m == 2 {
        t_p_binary(params.n, &pt, BinaryTie::Strict)
    } else {
        t_p_paper(&TheoryParams::new(params.n, params.m, pt)?, KVariant::Model)?
    };
    Ok((Rational::one() - &params.rho) * t + &params.rho)
}

fn binomial_pmf(n: usize, p: &Rational) -> Vec<Rational> {
    let q = Rational::one() - p;
    (0..=n)
        .map(|j| Rational::from_integer(binomial(n, j)) * rpow(p, j) * rpow(&q, n - j))
        .collect()
}

/// Identification-rate estimate that treats the correct-class count and the
/// largest wrong-class count as independent.
///
/// `N_t ~ Bin(n, p)`, each wrong class `N_s ~ Bin(n, e)` with
/// `e = (1-p)/(m-1)`, and the maximum over `m - 1` wrong classes has
/// `P(max = k) = sum_h C(m-1,h) P(N_s = k)^h P(N_s < k)^(m-1-h)`.
/// Gives `p^2` instead of `p` for a single binary classifier.
pub fn mu_pid(n: usize, m: usize, p: &Rational) -> Result<Rational> {
    TheoryParams::new(n, m, p.clone())?;
    let e = (Rational::one() - p) / int(m - 1);
    let correct = binomial_pmf(n, p);
    let wrong = binomial_pmf(n, &e);
    let mut below = Rational::zero();
    let mut max_pmf = Vec::with_capacity(n + 1);
    for pk in &wrong {
        let mut mass = Rational::zero();
        for h in 1..m {
            mass += Rational::from_integer(binomial(m - 1, h)) * rpow(pk, h) * rpow(&below, m - 1 - h);
        }
        max_pmf.push(mass);
        below += pk;
    }
    let mut total = Rational::zero();
    let mut max_below = Rational::zero();
    for j in 1..=n {
        max_below += &max_pmf[j - 1];
        total += &correct[j] * &max_below;
    }
    Ok(total)
}

/// Side-by-side values of every normalization on one instance, with the
/// enumerated model probability as reference.
#[derive(Debug, Clone)]
pub struct FormulaAudit {
    pub params: TheoryParams,
    pub phi: Vec<Rational>,
    pub k_theorem: Rational,
    pub k_example: Rational,
    pub t_theorem: Option<Rational>,
    pub t_example: Option<Rational>,
    pub t_model: Rational,
    pub t_oracle: Option<Rational>,
}

impl FormulaAudit {
    /// Variants whose value differs from the enumerated probability.
    pub fn discrepancies(&self) -> Vec<(KVariant, Rational)> {
        let Some(oracle) = &self.t_oracle else {
            return Vec::new();
        };
        [
            (KVariant::Theorem, &self.t_theorem),
            (KVariant::Example, &self.t_example),
            (KVariant::Model, &Some(self.t_model.clone())),
        ]
        .into_iter()
        .filter_map(|(v, t)| t.as_ref().filter(|t| *t != oracle).map(|t| (v, t - oracle)))
        .collect()
    }
}

fn show(r: &Rational) -> String {
    format!("{r} (~{:.6})", to_f64(r))
}

impl fmt::Display for FormulaAudit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let TheoryParams { n, m, p } = &self.params;
        writeln!(f, "instance: n = {n}, m = {m}, p = {}", show(p))?;
        for (i, phi) in self.phi.iter().enumerate() {
            writeln!(f, "  phi_{} = {phi}", i + 1)?;
        }
        writeln!(f, "  K (theorem) = {}", show(&self.k_theorem))?;
        writeln!(f, "  K (example) = {}", show(&self.k_example))?;
        let opt = |t: &Option<Rational>| t.as_ref().map_or("undefined".to_string(), show);
        writeln!(f, "  T theorem   = {}", opt(&self.t_theorem))?;
        writeln!(f, "  T example   = {}", opt(&self.t_example))?;
        writeln!(f, "  T model     = {}", show(&self.t_model))?;
        writeln!(f, "  T oracle    = {}", opt(&self.t_oracle))?;
        for (v, d) in self.discrepancies() {
            writeln!(f, "  MISMATCH {v}: differs from oracle by {}", show(&d))?;
        }
        Ok(())
    }
}

/// Evaluates all normalizations and, when feasible, the oracle.
pub fn audit(params: &TheoryParams) -> FormulaAudit {
    let phi = (1..=params.n)
        .map(|i| gen_fun_coeff(params.m, i, params.n))
        .collect();
    let t_oracle = oracle::t_p_oracle(
        &oracle::OracleInput::Homogeneous(params.clone()),
        oracle::OracleTie::StrictWin,
    )
    .ok();
    FormulaAudit {
        params: params.clone(),
        phi,
        k_theorem: k_constant(params, KVariant::Theorem),
        k_example: k_constant(params, KVariant::Example),
        t_theorem: t_p_paper(params, KVariant::Theorem).ok(),
        t_example: t_p_paper(params, KVariant::Example).ok(),
        t_model: t_p_paper(params, KVariant::Model).expect("model variant has no normalization"),
        t_oracle,
    }
}
