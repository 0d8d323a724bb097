//! The voting ensemble: a profile of randomly configured classifiers whose
//! per-sample rankings are aggregated by a voting rule.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{f1_score, stratified_kfold, stratified_split, Dataset, F1Mode};
use crate::error::{invalid, Result};
use crate::learners::{sample_learner_config, train, TrainedClassifier};
use crate::types::ScoreVector;
use crate::voting::{Rule, RuleResult, TiePolicy, DEFAULT_KEMENY_THRESHOLD};

/// Share of each fold's training rows held out to measure validation
/// accuracy for tie-breaking.
pub const VALIDATION_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub n: usize,
    pub rule: Rule,
    /// `None` picks best-classifier tie-breaking, since trained profiles
    /// always carry validation accuracies.
    pub tie: Option<TiePolicy>,
    pub seed: u64,
    pub kemeny_exact_threshold: usize,
}

impl EnsembleConfig {
    pub fn new(n: usize, rule: Rule, seed: u64) -> Self {
        EnsembleConfig {
            n,
            rule,
            tie: None,
            seed,
            kemeny_exact_threshold: DEFAULT_KEMENY_THRESHOLD,
        }
    }

    fn tie_policy(&self) -> TiePolicy {
        self.tie.unwrap_or(TiePolicy::BestClassifier)
    }
}

/// Seed of substream `stream` under `seed`.
pub fn substream_seed(seed: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.gen()
}

/// Trains `config.n` classifiers with independently sampled configurations
/// on the same training data. Classifier `i` draws from substream `i`.
pub fn build_profile(
    train_set: &Dataset,
    validation: &Dataset,
    config: &EnsembleConfig,
) -> Result<Vec<TrainedClassifier>> {
    if config.n == 0 {
        return invalid("profile size n must be >= 1");
    }
    (0..config.n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(i);
            let learner = sample_learner_config(&mut rng);
            train(&learner, train_set, validation)
        })
        .collect()
}

/// Aggregates classifier outputs for one sample.
pub fn aggregate(
    predictions: &[ScoreVector],
    accuracies: Option<&[f64]>,
    config: &EnsembleConfig,
) -> Result<RuleResult> {
    let tie = match (config.tie, accuracies) {
        (Some(t), _) => t,
        (None, Some(_)) => TiePolicy::BestClassifier,
        (None, None) => TiePolicy::Lexicographic,
    };
    config
        .rule
        .elect_scores(predictions, accuracies, tie, config.kemeny_exact_threshold)
}

/// Elects a class for `sample` from the profile's rankings.
pub fn vorace_predict(profile: &[TrainedClassifier], sample: &[f64], config: &EnsembleConfig) -> Result<usize> {
    if profile.is_empty() {
        return invalid("profile is empty");
    }
    let predictions = profile
        .iter()
        .map(|c| c.predict_proba(sample))
        .collect::<Result<Vec<_>>>()?;
    let accuracies: Vec<f64> = profile.iter().map(|c| c.validation_accuracy).collect();
    let tie = config.tie_policy();
    Ok(config
        .rule
        .elect_scores(&predictions, Some(&accuracies), tie, config.kemeny_exact_threshold)?
        .winner)
}

/// Ensemble F1 over repeated stratified cross-validation, alongside the
/// profile members' own scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub rule: Rule,
    pub n: usize,
    pub folds: usize,
    pub repeats: usize,
    pub seed: u64,
    pub fold_f1: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    /// Per fold, the mean F1 of the profile members; averaged over folds.
    pub mean_individual_f1: f64,
    /// Per fold, the F1 of the best profile member; averaged over folds.
    pub best_individual_f1: f64,
}

impl EvalReport {
    pub const CSV_HEADER: &'static str = "rule,n,folds,repeats,seed,mean_f1,std_f1,mean_individual_f1,best_individual_f1";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:.6},{:.6},{:.6},{:.6}",
            self.rule,
            self.n,
            self.folds,
            self.repeats,
            self.seed,
            self.mean,
            self.std,
            self.mean_individual_f1,
            self.best_individual_f1
        )
    }
}

struct FoldScore {
    ensemble: f64,
    individual_mean: f64,
    individual_best: f64,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn run_fold(dataset: &Dataset, train_idx: &[usize], test_idx: &[usize], config: &EnsembleConfig, seed: u64) -> Result<FoldScore> {
    let (fit_idx, val_idx) = stratified_split(train_idx, &dataset.labels, VALIDATION_FRACTION, seed);
    let fit = dataset.subset(&fit_idx);
    let validation = dataset.subset(&val_idx);
    let profile = build_profile(&fit, &validation, &EnsembleConfig { seed, ..config.clone() })?;
    let accuracies: Vec<f64> = profile.iter().map(|c| c.validation_accuracy).collect();
    let test = dataset.subset(test_idx);

    let mut member_preds = vec![Vec::with_capacity(test.len()); profile.len()];
    let mut ensemble_preds = Vec::with_capacity(test.len());
    for row in &test.rows {
        let scores = profile
            .iter()
            .map(|c| c.predict_proba(row))
            .collect::<Result<Vec<_>>>()?;
        for (preds, s) in member_preds.iter_mut().zip(&scores) {
            preds.push(s.argmax());
        }
        let result = config.rule.elect_scores(
            &scores,
            Some(&accuracies),
            config.tie_policy(),
            config.kemeny_exact_threshold,
        )?;
        ensemble_preds.push(result.winner);
    }
    let member_f1 = member_preds
        .iter()
        .map(|p| f1_score(&test.labels, p, F1Mode::Macro))
        .collect::<Result<Vec<_>>>()?;
    Ok(FoldScore {
        ensemble: f1_score(&test.labels, &ensemble_preds, F1Mode::Macro)?,
        individual_mean: mean(&member_f1),
        individual_best: member_f1.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}

/// `repeats` rounds of stratified `folds`-fold cross-validation. Within each
/// fold, [`VALIDATION_FRACTION`] of the training rows (stratified) measure
/// the members' validation accuracies. F1 is macro-averaged.
pub fn evaluate(dataset: &Dataset, config: &EnsembleConfig, folds: usize, repeats: usize) -> Result<EvalReport> {
    if repeats == 0 {
        return invalid("repeats must be >= 1");
    }
    let plans = (0..repeats)
        .map(|r| stratified_kfold(&dataset.labels, folds, substream_seed(config.seed, r as u64)))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, usize)> = (0..repeats).flat_map(|r| (0..folds).map(move |f| (r, f))).collect();
    let scores = jobs
        .par_iter()
        .map(|&(r, f)| {
            let (train_idx, test_idx) = plans[r].train_test(f);
            let stream = (1 << 32) + (r * folds + f) as u64;
            run_fold(dataset, &train_idx, &test_idx, config, substream_seed(config.seed, stream))
        })
        .collect::<Result<Vec<_>>>()?;

    let fold_f1: Vec<f64> = scores.iter().map(|s| s.ensemble).collect();
    let mu = mean(&fold_f1);
    let var = fold_f1.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / fold_f1.len() as f64;
    Ok(EvalReport {
        rule: config.rule,
        n: config.n,
        folds,
        repeats,
        seed: config.seed,
        mean: mu,
        std: var.sqrt(),
        mean_individual_f1: mean(&scores.iter().map(|s| s.individual_mean).collect::<Vec<_>>()),
        best_individual_f1: mean(&scores.iter().map(|s| s.individual_best).collect::<Vec<_>>()),
        fold_f1,
    })
}
