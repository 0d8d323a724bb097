//! Kemeny consensus: the ranking that agrees with the most pairwise
//! preferences across all ballots.

use serde::{Deserialize, Serialize};

use super::{argmax_set, break_tie, borda, scores_tie, RuleResult, TiePolicy};
use crate::error::{invalid, Error, Result};
use crate::types::{Profile, Ranking};

/// Largest class count solved exactly unless configured otherwise.
pub const DEFAULT_KEMENY_THRESHOLD: usize = 5;
/// Hard cap on the configurable exact threshold.
pub const MAX_KEMENY_THRESHOLD: usize = 8;

/// `w[a][b]` is the total weight of voters ranking `a` above `b`.
pub fn pairwise_matrix(profile: &Profile) -> Vec<Vec<f64>> {
    let m = profile.m();
    let mut w = vec![vec![0.0; m]; m];
    for (v, r) in profile.rankings().iter().enumerate() {
        let weight = profile.weight(v);
        let order = r.order();
        for (i, &a) in order.iter().enumerate() {
            for &b in &order[i + 1..] {
                w[a][b] += weight;
            }
        }
    }
    w
}

/// Total (weighted) number of voter/pair agreements with `ranking`.
pub fn agreement(profile: &Profile, ranking: &Ranking) -> f64 {
    ranking_agreement(&pairwise_matrix(profile), ranking.order())
}

fn ranking_agreement(w: &[Vec<f64>], order: &[usize]) -> f64 {
    let mut total = 0.0;
    for (i, &a) in order.iter().enumerate() {
        for &b in &order[i + 1..] {
            total += w[a][b];
        }
    }
    total
}

/// Consensus found by a Kemeny search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KemenyOutcome {
    pub consensus: Ranking,
    pub agreement: f64,
    /// Best agreement reached with each class on top.
    pub best_by_top: Vec<f64>,
    /// A ranking reaching `best_by_top[c]`, with `c` on top.
    pub ranking_by_top: Vec<Ranking>,
}

struct Search<'a> {
    w: &'a [Vec<f64>],
    m: usize,
    best: Vec<f64>,
    best_order: Vec<Option<Vec<usize>>>,
}

impl Search<'_> {
    /// Upper bound on the agreement still obtainable among `remaining`.
    fn bound(&self, remaining: &[usize]) -> f64 {
        let mut total = 0.0;
        for (i, &a) in remaining.iter().enumerate() {
            for &b in &remaining[i + 1..] {
                total += self.w[a][b].max(self.w[b][a]);
            }
        }
        total
    }

    fn descend(&mut self, prefix: &mut Vec<usize>, remaining: &mut Vec<usize>, value: f64) {
        let top = prefix[0];
        if remaining.is_empty() {
            let improves = value > self.best[top] && !scores_tie(value, self.best[top]);
            if improves || self.best_order[top].is_none() {
                self.best[top] = value;
                self.best_order[top] = Some(prefix.clone());
            }
            return;
        }
        let optimistic = value + self.bound(remaining);
        if self.best_order[top].is_some()
            && optimistic < self.best[top]
            && !scores_tie(optimistic, self.best[top])
        {
            return;
        }
        for k in 0..remaining.len() {
            let x = remaining.remove(k);
            let gain: f64 = remaining.iter().map(|&y| self.w[x][y]).sum();
            prefix.push(x);
            self.descend(prefix, remaining, value + gain);
            prefix.pop();
            remaining.insert(k, x);
        }
    }
}

/// Exact branch-and-bound search over all rankings.
pub fn kemeny_consensus(profile: &Profile) -> KemenyOutcome {
    let m = profile.m();
    let w = pairwise_matrix(profile);
    let mut search = Search {
        w: &w,
        m,
        best: vec![f64::NEG_INFINITY; m],
        best_order: vec![None; m],
    };
    for top in 0..search.m {
        let mut remaining: Vec<usize> = (0..m).filter(|&c| c != top).collect();
        let gain: f64 = remaining.iter().map(|&y| w[top][y]).sum();
        search.descend(&mut vec![top], &mut remaining, gain);
    }
    let ranking_by_top: Vec<Ranking> = search
        .best_order
        .into_iter()
        .map(|o| Ranking::new(o.expect("every top explored")).expect("search yields permutations"))
        .collect();
    let top = argmax_set(&search.best)[0];
    KemenyOutcome {
        consensus: ranking_by_top[top].clone(),
        agreement: search.best[top],
        best_by_top: search.best,
        ranking_by_top,
    }
}

/// Kemeny winner by exact search, for profiles with at most
/// [`DEFAULT_KEMENY_THRESHOLD`] classes.
pub fn kemeny_exact(profile: &Profile, tie: TiePolicy) -> Result<RuleResult> {
    kemeny_exact_with_threshold(profile, tie, DEFAULT_KEMENY_THRESHOLD)
}

/// Kemeny winner by exact search with a custom class-count threshold
/// (at most [`MAX_KEMENY_THRESHOLD`]).
///
/// `rule_scores[c]` is the best agreement of any ranking with `c` on top.
/// When several consensus rankings are optimal, the tie policy chooses among
/// their top classes.
pub fn kemeny_exact_with_threshold(
    profile: &Profile,
    tie: TiePolicy,
    threshold: usize,
) -> Result<RuleResult> {
    if threshold > MAX_KEMENY_THRESHOLD {
        return invalid(format!(
            "exact Kemeny threshold {threshold} exceeds the maximum of {MAX_KEMENY_THRESHOLD}"
        ));
    }
    if profile.m() > threshold {
        return Err(Error::TooLarge(format!(
            "exact Kemeny is limited to {threshold} classes, profile has {}; use kemeny-heuristic",
            profile.m()
        )));
    }
    let outcome = kemeny_consensus(profile);
    finish(outcome.best_by_top, outcome.ranking_by_top, profile, tie)
}

fn finish(
    rule_scores: Vec<f64>,
    mut ranking_by_top: Vec<Ranking>,
    profile: &Profile,
    tie: TiePolicy,
) -> Result<RuleResult> {
    let tied_set = argmax_set(&rule_scores);
    let winner = break_tie(&tied_set, profile, tie)?;
    Ok(RuleResult {
        rule_scores,
        winner,
        tied_set,
        consensus: Some(ranking_by_top.swap_remove(winner)),
    })
}

/// Adjacent-swap hill climbing on positions `from..`, first improvement
/// first, until no swap increases agreement.
fn climb(w: &[Vec<f64>], order: &mut [usize], from: usize) {
    loop {
        let mut improved = false;
        for i in from..order.len().saturating_sub(1) {
            let (a, b) = (order[i], order[i + 1]);
            if w[b][a] > w[a][b] && !scores_tie(w[b][a], w[a][b]) {
                order.swap(i, i + 1);
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
}

/// Local-search approximation of the Kemeny consensus for any class count.
///
/// Starts from the Borda ranking and applies adjacent swaps while they
/// increase agreement. `rule_scores[c]` is the agreement reached by the same
/// climb with `c` pinned on top of the consensus.
pub fn kemeny_heuristic(profile: &Profile, tie: TiePolicy) -> Result<RuleResult> {
    let w = pairwise_matrix(profile);
    let borda_scores = borda(profile, TiePolicy::Lexicographic)?.rule_scores;
    let mut order = crate::types::ScoreVector::new(borda_scores)?.ranking().order().to_vec();
    climb(&w, &mut order, 0);

    let (rule_scores, ranking_by_top) = (0..profile.m())
        .map(|c| {
            let mut pinned = order.clone();
            pinned.retain(|&x| x != c);
            pinned.insert(0, c);
            climb(&w, &mut pinned, 1);
            let value = ranking_agreement(&w, &pinned);
            (value, Ranking::new(pinned).expect("permutation"))
        })
        .unzip();
    finish(rule_scores, ranking_by_top, profile, tie)
}
