//! Seeded simulation of independent (or overlapping) voter models.
//!
//! Each trial draws from its own ChaCha8 stream keyed by `(seed, trial)`, so
//! results do not depend on how trials are split across threads.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::types::{Profile, Ranking};
use crate::voting::{Rule, TiePolicy, DEFAULT_KEMENY_THRESHOLD};

/// How each voter's ballot is generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum VoterModel {
    /// Every voter is right with probability `p`.
    Iid { p: f64 },
    /// Voter `i` is right with probability `accuracies[i]`.
    Hetero { accuracies: Vec<f64> },
    /// With probability `rho` the input is easy and every voter is right;
    /// otherwise voters are right with probability `(p - rho)/(1 - rho)`.
    Overlap { p: f64, rho: f64 },
}

/// When the correct class counts as elected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimTie {
    /// The correct class must be the unique top-scoring class.
    Strict,
    Lexicographic,
    BestClassifier,
}

impl std::str::FromStr for SimTie {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(SimTie::Strict),
            "lexicographic" => Ok(SimTie::Lexicographic),
            "best-classifier" => Ok(SimTie::BestClassifier),
            other => invalid(format!(
                "unknown tie mode '{other}' (expected strict, lexicographic or best-classifier)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: usize,
    pub m: usize,
    pub trials: u64,
    pub seed: u64,
    pub model: VoterModel,
    pub rule: Rule,
    pub tie: SimTie,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return invalid("n must be >= 1");
        }
        if self.m < 2 {
            return invalid("m must be >= 2");
        }
        if self.trials == 0 {
            return invalid("trials must be >= 1");
        }
        if self.rule == Rule::Sum {
            return invalid("the sum rule needs probability vectors and cannot be simulated");
        }
        let prob = |name: &str, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                invalid(format!("{name} = {p} must lie in [0, 1]"))
            }
        };
        match &self.model {
            VoterModel::Iid { p } => prob("p", *p),
            VoterModel::Hetero { accuracies } => {
                if accuracies.len() != self.n {
                    return invalid(format!("{} accuracies for n = {}", accuracies.len(), self.n));
                }
                accuracies.iter().try_for_each(|p| prob("accuracy", *p))
            }
            VoterModel::Overlap { p, rho } => {
                prob("p", *p)?;
                if !(0.0..=*p).contains(rho) || *rho >= 1.0 {
                    return invalid(format!("rho = {rho} must lie in [0, p] and below 1"));
                }
                Ok(())
            }
        }
    }

    /// Per-voter accuracies on a hard input (all inputs for non-overlap models).
    fn hard_accuracies(&self) -> Vec<f64> {
        match &self.model {
            VoterModel::Iid { p } => vec![*p; self.n],
            VoterModel::Hetero { accuracies } => accuracies.clone(),
            VoterModel::Overlap { p, rho } => vec![(p - rho) / (1.0 - rho); self.n],
        }
    }

    fn reported_accuracies(&self) -> Vec<f64> {
        match &self.model {
            VoterModel::Overlap { p, .. } => vec![*p; self.n],
            _ => self.hard_accuracies(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub wins: u64,
    pub trials: u64,
    pub rate: f64,
    pub stderr: f64,
    /// Fraction of all ballots whose top choice was the correct class.
    pub voter_accuracy: f64,
}

impl SimResult {
    fn new(wins: u64, trials: u64, correct_votes: u64, n: usize) -> Self {
        let rate = wins as f64 / trials as f64;
        SimResult {
            wins,
            trials,
            rate,
            stderr: (rate * (1.0 - rate) / trials as f64).sqrt(),
            voter_accuracy: correct_votes as f64 / (trials as f64 * n as f64),
        }
    }
}

/// Substream for one trial.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// One sampled election: the correct class and every voter's ballot.
#[derive(Debug, Clone)]
pub struct SampledTrial {
    pub correct: usize,
    pub ballots: Vec<Ranking>,
}

/// Draws the ballots of one trial.
///
/// The correct class is uniform over the `m` classes. A wrong voter's top
/// choice is uniform over the other classes, and the rest of every ballot
/// is a uniform random order of the remaining classes.
pub fn sample_trial(config: &SimConfig, hard: &[f64], rng: &mut impl Rng) -> SampledTrial {
    let m = config.m;
    let correct = rng.gen_range(0..m);
    let easy = match config.model {
        VoterModel::Overlap { rho, .. } => rng.gen::<f64>() < rho,
        _ => false,
    };
    let ballots = hard
        .iter()
        .map(|&p| {
            let top = if easy || rng.gen::<f64>() < p {
                correct
            } else {
                let k = rng.gen_range(0..m - 1);
                if k >= correct {
                    k + 1
                } else {
                    k
                }
            };
            let mut rest: Vec<usize> = (0..m).filter(|&c| c != top).collect();
            rest.shuffle(rng);
            rest.insert(0, top);
            Ranking::new(rest).expect("permutation")
        })
        .collect();
    SampledTrial { correct, ballots }
}

fn elected(rule: Rule, tie: SimTie, profile: &Profile, correct: usize) -> Result<bool> {
    let policy = match tie {
        SimTie::Strict | SimTie::Lexicographic => TiePolicy::Lexicographic,
        SimTie::BestClassifier => TiePolicy::BestClassifier,
    };
    let result = rule.elect(profile, policy, DEFAULT_KEMENY_THRESHOLD)?;
    Ok(match tie {
        SimTie::Strict => result.strict_winner_is(correct),
        _ => result.winner == correct,
    })
}

/// Runs `config.trials` elections for each rule in `rules` on the same
/// sampled ballots.
pub fn simulate_rules(config: &SimConfig, rules: &[Rule]) -> Result<Vec<SimResult>> {
    config.validate()?;
    if let Some(r) = rules.iter().find(|r| **r == Rule::Sum) {
        return invalid(format!("rule {r} cannot be simulated"));
    }
    let hard = config.hard_accuracies();
    let reported = config.reported_accuracies();
    let k = rules.len();
    let zero = || (vec![0u64; k], 0u64);
    let (wins, correct_votes) = (0..config.trials)
        .into_par_iter()
        .map(|t| -> Result<(Vec<u64>, u64)> {
            let mut rng = trial_rng(config.seed, t);
            let trial = sample_trial(config, &hard, &mut rng);
            let correct_votes = trial
                .ballots
                .iter()
                .filter(|b| b.top() == trial.correct)
                .count() as u64;
            let profile = Profile::with_accuracies(trial.ballots, reported.clone())?;
            let mut wins = vec![0u64; k];
            for (w, rule) in wins.iter_mut().zip(rules) {
                *w = elected(*rule, config.tie, &profile, trial.correct)? as u64;
            }
            Ok((wins, correct_votes))
        })
        .try_reduce(zero, |(mut a, ca), (b, cb)| {
            a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
            Ok((a, ca + cb))
        })?;
    Ok(wins
        .into_iter()
        .map(|w| SimResult::new(w, config.trials, correct_votes, config.n))
        .collect())
}

/// Estimates how often the configured rule elects the correct class.
pub fn simulate(config: &SimConfig) -> Result<SimResult> {
    Ok(simulate_rules(config, &[config.rule])?.remove(0))
}
