//! Shared domain types: class labels, score vectors, rankings and profiles.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Tolerance for the sum-to-one check on classifier probability outputs.
pub const PROBABILITY_SUM_TOLERANCE: f64 = 1e-6;

/// A class (candidate) identified by its index in `[0, m)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ClassLabel {
    pub index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl ClassLabel {
    pub fn new(index: usize) -> Self {
        ClassLabel { index, name: None }
    }

    pub fn named(index: usize, name: impl Into<String>) -> Self {
        ClassLabel {
            index,
            name: Some(name.into()),
        }
    }
}

impl std::fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.name {
            Some(name) => write!(f, "{name}"),
            None => write!(f, "c{}", self.index + 1),
        }
    }
}

/// Per-class nonnegative scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ScoreVector(Vec<f64>);

impl ScoreVector {
    /// Builds a score vector; entries must be finite and nonnegative.
    pub fn new(scores: Vec<f64>) -> Result<Self> {
        if scores.is_empty() {
            return invalid("score vector is empty");
        }
        if let Some((i, s)) = scores
            .iter()
            .enumerate()
            .find(|(_, s)| !s.is_finite() || **s < 0.0)
        {
            return invalid(format!("score {i} is {s}; scores must be finite and >= 0"));
        }
        Ok(ScoreVector(scores))
    }

    /// Builds a classifier probability output, which must also sum to one.
    pub fn probabilities(scores: Vec<f64>) -> Result<Self> {
        let v = Self::new(scores)?;
        let sum: f64 = v.0.iter().sum();
        if (sum - 1.0).abs() > PROBABILITY_SUM_TOLERANCE {
            return invalid(format!("probabilities sum to {sum}, expected 1"));
        }
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Index of the largest score; ties go to the lowest index.
    pub fn argmax(&self) -> usize {
        self.ranking().top()
    }

    /// Classes sorted by descending score, equal scores by ascending index.
    pub fn ranking(&self) -> Ranking {
        let mut order: Vec<usize> = (0..self.0.len()).collect();
        // stable sort keeps ascending index among equal scores
        order.sort_by(|&a, &b| self.0[b].total_cmp(&self.0[a]));
        Ranking(order)
    }
}

impl TryFrom<Vec<f64>> for ScoreVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        ScoreVector::new(v)
    }
}

impl From<ScoreVector> for Vec<f64> {
    fn from(v: ScoreVector) -> Self {
        v.0
    }
}

/// Converts a score vector into a ranking, highest score first.
///
/// Equal scores are ordered by ascending class index so the result is
/// deterministic.
pub fn ranking_from_scores(scores: &[f64]) -> Result<Ranking> {
    Ok(ScoreVector::new(scores.to_vec())?.ranking())
}

/// A strict total order over `m` classes, most preferred first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Ranking(Vec<usize>);

impl Ranking {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let m = order.len();
        if m == 0 {
            return invalid("ranking is empty");
        }
        let mut seen = vec![false; m];
        for &c in &order {
            if c >= m || seen[c] {
                return invalid(format!("{order:?} is not a permutation of 0..{m}"));
            }
            seen[c] = true;
        }
        Ok(Ranking(order))
    }

    /// The identity order `0, 1, ..., m-1`.
    pub fn identity(m: usize) -> Self {
        Ranking((0..m).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn top(&self) -> usize {
        self.0[0]
    }

    pub fn order(&self) -> &[usize] {
        &self.0
    }

    /// `positions()[c]` is the 0-based rank of class `c`.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.0.len()];
        for (i, &c) in self.0.iter().enumerate() {
            pos[c] = i;
        }
        pos
    }

    pub fn position(&self, class: usize) -> Option<usize> {
        self.0.iter().position(|&c| c == class)
    }

    pub fn prefers(&self, a: usize, b: usize) -> bool {
        self.position(a) < self.position(b)
    }
}

impl TryFrom<Vec<usize>> for Ranking {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        Ranking::new(v)
    }
}

impl From<Ranking> for Vec<usize> {
    fn from(r: Ranking) -> Self {
        r.0
    }
}

/// `n` ballots over the same `m` classes, with optional per-voter
/// validation accuracies and weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProfile", into = "RawProfile")]
pub struct Profile {
    m: usize,
    rankings: Vec<Ranking>,
    validation_accuracy: Option<Vec<f64>>,
    weights: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct RawProfile {
    m: usize,
    rankings: Vec<Vec<usize>>,
    #[serde(default)]
    validation_accuracy: Option<Vec<f64>>,
    #[serde(default)]
    weights: Option<Vec<f64>>,
}

impl Profile {
    pub fn new(rankings: Vec<Ranking>) -> Result<Self> {
        Self::with_details(rankings, None, None)
    }

    pub fn with_accuracies(rankings: Vec<Ranking>, accuracies: Vec<f64>) -> Result<Self> {
        Self::with_details(rankings, Some(accuracies), None)
    }

    pub fn with_details(
        rankings: Vec<Ranking>,
        validation_accuracy: Option<Vec<f64>>,
        weights: Option<Vec<f64>>,
    ) -> Result<Self> {
        let Some(first) = rankings.first() else {
            return invalid("profile needs at least one ranking");
        };
        let m = first.len();
        if m < 2 {
            return invalid("profile needs at least two classes");
        }
        if let Some(i) = rankings.iter().position(|r| r.len() != m) {
            return invalid(format!("ranking {i} has {} classes, expected {m}", rankings[i].len()));
        }
        let n = rankings.len();
        if let Some(acc) = &validation_accuracy {
            if acc.len() != n {
                return invalid(format!("{} accuracies for {n} rankings", acc.len()));
            }
            if acc.iter().any(|a| !(0.0..=1.0).contains(a)) {
                return invalid("validation accuracies must lie in [0, 1]");
            }
        }
        if let Some(w) = &weights {
            if w.len() != n {
                return invalid(format!("{} weights for {n} rankings", w.len()));
            }
            if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
                return invalid("weights must be finite and >= 0");
            }
        }
        Ok(Profile {
            m,
            rankings,
            validation_accuracy,
            weights,
        })
    }

    /// Profile built from classifier outputs, one ranking per score vector.
    pub fn from_scores(scores: &[ScoreVector], accuracies: Option<Vec<f64>>) -> Result<Self> {
        let rankings = scores.iter().map(ScoreVector::ranking).collect();
        Self::with_details(rankings, accuracies, None)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("profile serializes")
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.rankings.len()
    }

    pub fn rankings(&self) -> &[Ranking] {
        &self.rankings
    }

    pub fn validation_accuracy(&self) -> Option<&[f64]> {
        self.validation_accuracy.as_deref()
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    /// Weight of voter `v`; 1 when the profile is unweighted.
    pub fn weight(&self, v: usize) -> f64 {
        self.weights.as_ref().map_or(1.0, |w| w[v])
    }
}

impl TryFrom<RawProfile> for Profile {
    type Error = Error;

    fn try_from(raw: RawProfile) -> Result<Self> {
        let rankings = raw
            .rankings
            .into_iter()
            .map(Ranking::new)
            .collect::<Result<Vec<_>>>()?;
        let p = Profile::with_details(rankings, raw.validation_accuracy, raw.weights)?;
        if p.m != raw.m {
            return invalid(format!("declared m = {} but rankings cover {} classes", raw.m, p.m));
        }
        Ok(p)
    }
}

impl From<Profile> for RawProfile {
    fn from(p: Profile) -> Self {
        RawProfile {
            m: p.m,
            rankings: p.rankings.into_iter().map(Vec::from).collect(),
            validation_accuracy: p.validation_accuracy,
            weights: p.weights,
        }
    }
}
