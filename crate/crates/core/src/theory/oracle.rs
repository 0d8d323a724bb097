//! Brute-force reference for the plurality accuracy formulas.
//!
//! Enumerates vote-count outcomes directly and never touches the generating
//! function, so it can audit the closed forms.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::{HeteroParams, Rational, TheoryParams};
use crate::error::{Error, Result};

/// Largest ensemble the oracle will enumerate.
pub const ORACLE_MAX_N: usize = 20;
/// Largest class count the oracle will enumerate.
pub const ORACLE_MAX_M: usize = 6;

/// When the correct class (index 0) counts as elected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleTie {
    /// Strictly more votes than every wrong class.
    StrictWin,
    /// Ties for the top count are broken uniformly at random.
    UniformTiebreak,
    /// Ties go to the lowest index, which is the correct class.
    Lexicographic,
}

impl std::str::FromStr for OracleTie {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" | "strict-win" => Ok(OracleTie::StrictWin),
            "uniform" | "uniform-tiebreak" => Ok(OracleTie::UniformTiebreak),
            "lexicographic" => Ok(OracleTie::Lexicographic),
            other => Err(Error::InvalidInput(format!(
                "unknown oracle tie mode '{other}' (expected strict-win, uniform-tiebreak or lexicographic)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub enum OracleInput {
    Homogeneous(TheoryParams),
    Heterogeneous(HeteroParams),
}

/// Exact probability that plurality elects the correct class under the
/// independent-voter model: each voter is right with its accuracy, and
/// otherwise votes for one of the `m - 1` wrong classes uniformly.
pub fn t_p_oracle(input: &OracleInput, tie: OracleTie) -> Result<Rational> {
    let (n, m) = match input {
        OracleInput::Homogeneous(p) => (p.n, p.m),
        OracleInput::Heterogeneous(h) => (h.n(), h.m),
    };
    if n > ORACLE_MAX_N || m > ORACLE_MAX_M {
        return Err(Error::TooLarge(format!(
            "oracle enumeration needs n <= {ORACLE_MAX_N} and m <= {ORACLE_MAX_M}, got n = {n}, m = {m}"
        )));
    }
    // win_given[s]: probability of electing the correct class given s
    // correct votes, with the other n - s spread uniformly
    let win_given: Vec<Rational> = (0..=n).map(|s| win_given_correct(s, n, m, tie)).collect();
    let by_size = match input {
        OracleInput::Homogeneous(p) => homogeneous_sizes(n, &p.p),
        OracleInput::Heterogeneous(h) => subset_sizes(&h.accuracies),
    };
    Ok(by_size
        .iter()
        .zip(&win_given)
        .fold(Rational::zero(), |acc, (mass, w)| acc + mass * w))
}

/// `P(exactly s correct)` for identical voters, from `n` Bernoulli draws
/// multiplied out term by term.
fn homogeneous_sizes(n: usize, p: &Rational) -> Vec<Rational> {
    let q = Rational::one() - p;
    let mut out = Vec::with_capacity(n + 1);
    for s in 0..=n {
        let ways = multinomial(&[s, n - s]);
        out.push(Rational::from_integer(ways) * num_traits::pow(p.clone(), s) * num_traits::pow(q.clone(), n - s));
    }
    out
}

/// Enumerates every subset of voters that votes correctly and accumulates
/// its probability by size.
fn subset_sizes(accuracies: &[Rational]) -> Vec<Rational> {
    fn walk(acc: &[Rational], i: usize, size: usize, mass: Rational, out: &mut [Rational]) {
        if i == acc.len() {
            out[size] += mass;
            return;
        }
        if mass.is_zero() {
            return;
        }
        let right = &mass * &acc[i];
        let wrong = mass * (Rational::one() - &acc[i]);
        walk(acc, i + 1, size + 1, right, out);
        walk(acc, i + 1, size, wrong, out);
    }
    let mut out = vec![Rational::zero(); accuracies.len() + 1];
    walk(accuracies, 0, 0, Rational::one(), &mut out);
    out
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

fn multinomial(parts: &[usize]) -> BigInt {
    let total: usize = parts.iter().sum();
    parts
        .iter()
        .fold(factorial(total), |acc, &k| acc / factorial(k))
}

/// Walks all compositions of `wrong` votes over `classes` wrong classes.
fn for_each_composition(wrong: usize, classes: usize, f: &mut impl FnMut(&[usize])) {
    fn go(left: usize, slots: usize, buf: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if slots == 1 {
            buf.push(left);
            f(buf);
            buf.pop();
            return;
        }
        for k in 0..=left {
            buf.push(k);
            go(left - k, slots - 1, buf, f);
            buf.pop();
        }
    }
    go(wrong, classes, &mut Vec::with_capacity(classes), f);
}

fn win_given_correct(s: usize, n: usize, m: usize, tie: OracleTie) -> Rational {
    let wrong = n - s;
    let classes = m - 1;
    let mut favourable = Rational::zero();
    let mut total = BigInt::zero();
    for_each_composition(wrong, classes, &mut |counts| {
        let ways = multinomial(counts);
        total += &ways;
        let top_wrong = counts.iter().copied().max().unwrap_or(0);
        let share = if s > top_wrong {
            Rational::one()
        } else if s == top_wrong && s > 0 {
            match tie {
                OracleTie::StrictWin => Rational::zero(),
                OracleTie::Lexicographic => Rational::one(),
                OracleTie::UniformTiebreak => {
                    let tied = 1 + counts.iter().filter(|&&c| c == s).count();
                    Rational::new(BigInt::one(), BigInt::from(tied))
                }
            }
        } else {
            Rational::zero()
        };
        favourable += share * Rational::from_integer(ways);
    });
    // total = (m-1)^wrong: every wrong vote sequence is equally likely
    favourable / Rational::from_integer(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::ratio;

    fn homogeneous(n: usize, m: usize, p: Rational) -> OracleInput {
        OracleInput::Homogeneous(TheoryParams::new(n, m, p).unwrap())
    }

    #[test]
    fn worked_instance() {
        let v = t_p_oracle(&homogeneous(3, 4, ratio(4, 5)), OracleTie::StrictWin).unwrap();
        assert_eq!(v, ratio(896, 1000));
    }

    #[test]
    fn single_voter_is_its_accuracy() {
        for tie in [OracleTie::StrictWin, OracleTie::UniformTiebreak, OracleTie::Lexicographic] {
            let v = t_p_oracle(&homogeneous(1, 2, ratio(3, 10)), tie).unwrap();
            assert_eq!(v, ratio(3, 10));
        }
    }

    #[test]
    fn binary_reference_point() {
        let v = t_p_oracle(&homogeneous(10, 2, ratio(3, 5)), OracleTie::StrictWin).unwrap();
        assert!((crate::theory::to_f64(&v) - 0.633103).abs() < 1e-6);
    }

    #[test]
    fn tie_modes_are_ordered() {
        let input = homogeneous(4, 3, ratio(1, 2));
        let strict = t_p_oracle(&input, OracleTie::StrictWin).unwrap();
        let uniform = t_p_oracle(&input, OracleTie::UniformTiebreak).unwrap();
        let lex = t_p_oracle(&input, OracleTie::Lexicographic).unwrap();
        assert!(strict < uniform && uniform < lex);
    }

    #[test]
    fn binary_uniform_tiebreak_halves_ties() {
        // n = 2, m = 2: win 2-0 with p^2, tie 1-1 with 2p(1-p)
        let p = ratio(3, 5);
        let v = t_p_oracle(&homogeneous(2, 2, p.clone()), OracleTie::UniformTiebreak).unwrap();
        assert_eq!(v, &p * &p + &p * (ratio(1, 1) - &p));
    }

    #[test]
    fn hetero_matches_direct_enumeration() {
        // strict majority of three: 0.9*0.6*0.5 + 0.9*0.6*0.5 + 0.9*0.4*0.5 + 0.1*0.6*0.5
        let h = HeteroParams::new(vec![ratio(9, 10), ratio(6, 10), ratio(5, 10)], 2).unwrap();
        let v = t_p_oracle(&OracleInput::Heterogeneous(h), OracleTie::StrictWin).unwrap();
        assert_eq!(v, ratio(3, 4));
    }

    #[test]
    fn refuses_large_instances() {
        let big = homogeneous(21, 2, ratio(1, 2));
        assert!(matches!(t_p_oracle(&big, OracleTie::StrictWin), Err(Error::TooLarge(_))));
        let wide = homogeneous(3, 7, ratio(1, 2));
        assert!(matches!(t_p_oracle(&wide, OracleTie::StrictWin), Err(Error::TooLarge(_))));
    }
}
