//! Voting rules over classifier profiles.
//!
//! Every rule assigns a score to each class; the classes sharing the highest
//! score form the tied set and a [`TiePolicy`] picks the winner among them.

mod kemeny;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::types::{Profile, Ranking, ScoreVector};

pub use kemeny::{
    agreement, kemeny_exact, kemeny_exact_with_threshold, kemeny_heuristic, pairwise_matrix,
    KemenyOutcome, DEFAULT_KEMENY_THRESHOLD, MAX_KEMENY_THRESHOLD,
};

/// Relative tolerance when deciding whether two rule scores are tied.
const TIE_TOLERANCE: f64 = 1e-9;

pub(crate) fn scores_tie(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_TOLERANCE * a.abs().max(b.abs()).max(1.0)
}

/// How a winner is chosen among classes with equal top score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TiePolicy {
    /// Smallest class index wins.
    Lexicographic,
    /// The class ranked highest by the most accurate classifier wins.
    BestClassifier,
}

impl TiePolicy {
    /// Best-classifier when the profile records accuracies, else lexicographic.
    pub fn default_for(profile: &Profile) -> Self {
        if profile.validation_accuracy().is_some() {
            TiePolicy::BestClassifier
        } else {
            TiePolicy::Lexicographic
        }
    }
}

impl FromStr for TiePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lexicographic" | "lex" => Ok(TiePolicy::Lexicographic),
            "best-classifier" | "best" => Ok(TiePolicy::BestClassifier),
            other => invalid(format!(
                "unknown tie policy '{other}' (expected lexicographic or best-classifier)"
            )),
        }
    }
}

impl fmt::Display for TiePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TiePolicy::Lexicographic => "lexicographic",
            TiePolicy::BestClassifier => "best-classifier",
        })
    }
}

/// Scores, tied set and elected winner of one election.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleResult {
    pub rule_scores: Vec<f64>,
    pub winner: usize,
    pub tied_set: Vec<usize>,
    /// Consensus ranking, for Kemeny rules.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub consensus: Option<Ranking>,
}

impl RuleResult {
    /// Builds a result from raw scores, resolving ties with `tie`.
    ///
    /// `profile` supplies the rankings and accuracies for best-classifier
    /// tie-breaking.
    pub fn from_scores(rule_scores: Vec<f64>, profile: &Profile, tie: TiePolicy) -> Result<Self> {
        let tied_set = argmax_set(&rule_scores);
        let winner = break_tie(&tied_set, profile, tie)?;
        Ok(RuleResult {
            rule_scores,
            winner,
            tied_set,
            consensus: None,
        })
    }

    /// True when `class` is the only class with the top score.
    pub fn strict_winner_is(&self, class: usize) -> bool {
        self.tied_set == [class]
    }
}

/// Indices whose score ties the maximum, in ascending order.
pub fn argmax_set(scores: &[f64]) -> Vec<usize> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (0..scores.len())
        .filter(|&c| scores_tie(scores[c], max))
        .collect()
}

/// Picks one class from a nonempty tied set.
pub fn break_tie(tied: &[usize], profile: &Profile, tie: TiePolicy) -> Result<usize> {
    let Some(&first) = tied.iter().min() else {
        return invalid("tie-breaking needs a nonempty tied set");
    };
    if tied.len() == 1 {
        return Ok(first);
    }
    match tie {
        TiePolicy::Lexicographic => Ok(first),
        TiePolicy::BestClassifier => {
            let Some(acc) = profile.validation_accuracy() else {
                return invalid("best-classifier tie-breaking needs validation accuracies");
            };
            // first maximum wins, so equal accuracies go to the lower voter index
            let best = acc
                .iter()
                .enumerate()
                .fold(0, |best, (i, a)| if *a > acc[best] { i } else { best });
            let ranking = &profile.rankings()[best];
            Ok(*ranking
                .order()
                .iter()
                .find(|c| tied.contains(c))
                .expect("tied classes appear in every ranking"))
        }
    }
}

/// Identifier of a voting rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    Plurality,
    Borda,
    Copeland,
    /// Exact Kemeny up to the configured class threshold, heuristic above.
    Kemeny,
    KemenyExact,
    KemenyHeuristic,
    /// Sum of classifier probabilities; needs score vectors, not rankings.
    Sum,
}

impl Rule {
    pub const ALL: [Rule; 7] = [
        Rule::Plurality,
        Rule::Borda,
        Rule::Copeland,
        Rule::Kemeny,
        Rule::KemenyExact,
        Rule::KemenyHeuristic,
        Rule::Sum,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rule::Plurality => "plurality",
            Rule::Borda => "borda",
            Rule::Copeland => "copeland",
            Rule::Kemeny => "kemeny",
            Rule::KemenyExact => "kemeny-exact",
            Rule::KemenyHeuristic => "kemeny-heuristic",
            Rule::Sum => "sum",
        }
    }

    /// Runs a ranking-based rule on a profile.
    pub fn elect(self, profile: &Profile, tie: TiePolicy, kemeny_threshold: usize) -> Result<RuleResult> {
        match self {
            Rule::Plurality => plurality(profile, tie),
            Rule::Borda => borda(profile, tie),
            Rule::Copeland => copeland(profile, tie),
            Rule::Kemeny => {
                if profile.m() <= kemeny_threshold {
                    kemeny_exact_with_threshold(profile, tie, kemeny_threshold)
                } else {
                    kemeny_heuristic(profile, tie)
                }
            }
            Rule::KemenyExact => kemeny_exact_with_threshold(profile, tie, kemeny_threshold),
            Rule::KemenyHeuristic => kemeny_heuristic(profile, tie),
            Rule::Sum => invalid("the sum rule aggregates score vectors; use sum_aggregate"),
        }
    }

    /// Runs the rule on classifier score vectors.
    pub fn elect_scores(
        self,
        predictions: &[ScoreVector],
        accuracies: Option<&[f64]>,
        tie: TiePolicy,
        kemeny_threshold: usize,
    ) -> Result<RuleResult> {
        if self == Rule::Sum {
            return sum_aggregate(predictions, accuracies, tie);
        }
        let profile = Profile::from_scores(predictions, accuracies.map(<[f64]>::to_vec))?;
        self.elect(&profile, tie, kemeny_threshold)
    }
}

impl FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.to_ascii_lowercase().replace('_', "-");
        Rule::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Rule::ALL.iter().map(|r| r.name()).collect();
                Error::InvalidInput(format!(
                    "unknown rule '{s}' (valid rules: {})",
                    names.join(", ")
                ))
            })
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Weighted count of first-place votes.
pub fn plurality(profile: &Profile, tie: TiePolicy) -> Result<RuleResult> {
    let mut scores = vec![0.0; profile.m()];
    for (v, r) in profile.rankings().iter().enumerate() {
        scores[r.top()] += profile.weight(v);
    }
    RuleResult::from_scores(scores, profile, tie)
}

/// Positional scores: the class at 1-based rank `i` earns `m - i`.
pub fn borda(profile: &Profile, tie: TiePolicy) -> Result<RuleResult> {
    let m = profile.m();
    let mut scores = vec![0.0; m];
    for (v, r) in profile.rankings().iter().enumerate() {
        let w = profile.weight(v);
        for (pos, &c) in r.order().iter().enumerate() {
            scores[c] += w * (m - 1 - pos) as f64;
        }
    }
    RuleResult::from_scores(scores, profile, tie)
}

/// One point per pairwise majority win, half a point per pairwise tie.
pub fn copeland(profile: &Profile, tie: TiePolicy) -> Result<RuleResult> {
    let m = profile.m();
    let w = pairwise_matrix(profile);
    let mut scores = vec![0.0; m];
    for a in 0..m {
        for b in 0..m {
            if a == b {
                continue;
            }
            if scores_tie(w[a][b], w[b][a]) {
                scores[a] += 0.5;
            } else if w[a][b] > w[b][a] {
                scores[a] += 1.0;
            }
        }
    }
    RuleResult::from_scores(scores, profile, tie)
}

/// Sums the classifiers' probability vectors class by class.
pub fn sum_aggregate(
    predictions: &[ScoreVector],
    accuracies: Option<&[f64]>,
    tie: TiePolicy,
) -> Result<RuleResult> {
    let Some(first) = predictions.first() else {
        return invalid("sum needs at least one prediction");
    };
    let m = first.len();
    if let Some(i) = predictions.iter().position(|p| p.len() != m) {
        return invalid(format!(
            "prediction {i} has {} entries, expected {m}",
            predictions[i].len()
        ));
    }
    let mut scores = vec![0.0; m];
    for p in predictions {
        for (s, x) in scores.iter_mut().zip(p.as_slice()) {
            *s += x;
        }
    }
    let profile = Profile::from_scores(predictions, accuracies.map(<[f64]>::to_vec))?;
    RuleResult::from_scores(scores, &profile, tie)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(rankings: &[&[usize]]) -> Profile {
        Profile::new(
            rankings
                .iter()
                .map(|r| Ranking::new(r.to_vec()).unwrap())
                .collect(),
        )
        .unwrap()
    }

    fn four_class() -> Profile {
        profile(&[&[0, 3, 1, 2], &[3, 1, 2, 0], &[0, 3, 1, 2]])
    }

    const LEX: TiePolicy = TiePolicy::Lexicographic;

    #[test]
    fn plurality_four_class() {
        let r = plurality(&four_class(), LEX).unwrap();
        assert_eq!(r.rule_scores, vec![2.0, 0.0, 0.0, 1.0]);
        assert_eq!(r.winner, 0);
    }

    #[test]
    fn plurality_two_way_tie_goes_lexicographic() {
        let r = plurality(&profile(&[&[0, 1, 2], &[1, 0, 2]]), LEX).unwrap();
        assert_eq!(r.tied_set, vec![0, 1]);
        assert_eq!(r.winner, 0);
    }

    #[test]
    fn borda_four_class() {
        let r = borda(&four_class(), LEX).unwrap();
        assert_eq!(r.rule_scores, vec![6.0, 4.0, 1.0, 7.0]);
        assert_eq!(r.winner, 3);
    }

    #[test]
    fn borda_single_voter() {
        let r = borda(&profile(&[&[2, 0, 1]]), LEX).unwrap();
        assert_eq!(r.winner, 2);
    }

    #[test]
    fn copeland_four_class() {
        // c1 beats c2,c3,c4 (2-1 each); c4 beats c2,c3 (3-0); c2 beats c3 (3-0)
        let r = copeland(&four_class(), LEX).unwrap();
        assert_eq!(r.rule_scores, vec![3.0, 1.0, 0.0, 2.0]);
        assert_eq!(r.winner, 0);
    }

    #[test]
    fn copeland_reversed_pair_is_all_ties() {
        let r = copeland(&profile(&[&[0, 1, 2, 3], &[3, 2, 1, 0]]), LEX).unwrap();
        assert_eq!(r.rule_scores, vec![1.5; 4]);
        assert_eq!(r.tied_set, vec![0, 1, 2, 3]);
        assert_eq!(r.winner, 0);
    }

    #[test]
    fn copeland_unanimous_top_scores_m_minus_one() {
        let r = copeland(&profile(&[&[2, 0, 1], &[2, 0, 1]]), LEX).unwrap();
        assert_eq!(r.winner, 2);
        assert_eq!(r.rule_scores[2], 2.0);
    }

    #[test]
    fn sum_four_class() {
        let ys = [
            vec![0.4, 0.2, 0.1, 0.3],
            vec![0.1, 0.3, 0.2, 0.4],
            vec![0.4, 0.2, 0.1, 0.3],
        ]
        .map(|v| ScoreVector::probabilities(v).unwrap());
        let r = sum_aggregate(&ys, None, LEX).unwrap();
        for (s, e) in r.rule_scores.iter().zip([0.9, 0.7, 0.4, 1.0]) {
            assert!((s - e).abs() < 1e-12);
        }
        assert_eq!(r.winner, 3);
    }

    #[test]
    fn sum_uniform_is_full_tie() {
        let ys = vec![ScoreVector::new(vec![0.25; 4]).unwrap(); 3];
        let r = sum_aggregate(&ys, None, LEX).unwrap();
        assert_eq!(r.tied_set, vec![0, 1, 2, 3]);
        assert_eq!(r.winner, 0);
    }

    #[test]
    fn sum_length_mismatch() {
        let ys = [
            ScoreVector::new(vec![0.5, 0.5]).unwrap(),
            ScoreVector::new(vec![0.2, 0.3, 0.5]).unwrap(),
        ];
        assert!(sum_aggregate(&ys, None, LEX).is_err());
    }

    #[test]
    fn tie_breaks() {
        let p = Profile::with_accuracies(
            vec![
                Ranking::new(vec![0, 1, 2, 3]).unwrap(),
                Ranking::new(vec![3, 2, 1, 0]).unwrap(),
            ],
            vec![0.6, 0.9],
        )
        .unwrap();
        assert_eq!(break_tie(&[1, 2], &p, LEX).unwrap(), 1);
        assert_eq!(break_tie(&[0, 3], &p, TiePolicy::BestClassifier).unwrap(), 3);
        assert_eq!(break_tie(&[0], &p, TiePolicy::BestClassifier).unwrap(), 0);
        assert!(break_tie(&[], &p, LEX).is_err());
        let no_acc = four_class();
        assert!(break_tie(&[0, 3], &no_acc, TiePolicy::BestClassifier).is_err());
    }

    #[test]
    fn equal_accuracies_prefer_lower_voter() {
        let p = Profile::with_accuracies(
            vec![
                Ranking::new(vec![1, 0]).unwrap(),
                Ranking::new(vec![0, 1]).unwrap(),
            ],
            vec![0.8, 0.8],
        )
        .unwrap();
        assert_eq!(break_tie(&[0, 1], &p, TiePolicy::BestClassifier).unwrap(), 1);
    }

    #[test]
    fn weights_scale_votes() {
        let p = Profile::with_details(
            vec![
                Ranking::new(vec![0, 1]).unwrap(),
                Ranking::new(vec![1, 0]).unwrap(),
            ],
            None,
            Some(vec![1.0, 2.5]),
        )
        .unwrap();
        let r = plurality(&p, LEX).unwrap();
        assert_eq!(r.rule_scores, vec![1.0, 2.5]);
        assert_eq!(r.winner, 1);
        assert_eq!(borda(&p, LEX).unwrap().winner, 1);
        assert_eq!(copeland(&p, LEX).unwrap().winner, 1);
    }

    #[test]
    fn rule_names_parse() {
        for r in Rule::ALL {
            assert_eq!(r.name().parse::<Rule>().unwrap(), r);
        }
        let err = "approval".parse::<Rule>().unwrap_err().to_string();
        assert!(err.contains("plurality"), "{err}");
    }

    #[test]
    fn default_tie_policy() {
        assert_eq!(TiePolicy::default_for(&four_class()), LEX);
        let p = Profile::with_accuracies(vec![Ranking::identity(2)], vec![0.5]).unwrap();
        assert_eq!(TiePolicy::default_for(&p), TiePolicy::BestClassifier);
    }
}
