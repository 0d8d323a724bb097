use serde::{Deserialize, Serialize};

use crate::data::Feature;

/// Per-class likelihood model of one feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FeatureModel {
    /// `mean[c]`, `var[c]` of the feature within class `c`.
    Gaussian { mean: Vec<f64>, var: Vec<f64> },
    /// `log_prob[c][v]` with Laplace smoothing.
    Categorical { log_prob: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayes {
    /// Natural-log class priors; absent classes are `-inf`.
    pub log_prior: Vec<f64>,
    pub features: Vec<FeatureModel>,
}

const LAPLACE: f64 = 1.0;
const VAR_SMOOTHING: f64 = 1e-9;

impl NaiveBayes {
    pub fn fit(features: &[Feature], rows: &[Vec<f64>], labels: &[usize], m: usize) -> Self {
        let n = rows.len() as f64;
        let mut class_count = vec![0usize; m];
        for &l in labels {
            class_count[l] += 1;
        }
        let log_prior = class_count
            .iter()
            .map(|&c| if c == 0 { f64::NEG_INFINITY } else { (c as f64 / n).ln() })
            .collect();

        let mut max_var: f64 = 0.0;
        let mut models: Vec<FeatureModel> = features
            .iter()
            .enumerate()
            .map(|(j, f)| match f {
                Feature::Categorical { categories, .. } => {
                    let k = categories.len();
                    let mut counts = vec![vec![0.0; k]; m];
                    for (row, &l) in rows.iter().zip(labels) {
                        counts[l][row[j] as usize] += 1.0;
                    }
                    let log_prob = counts
                        .iter()
                        .zip(&class_count)
                        .map(|(cc, &total)| {
                            cc.iter()
                                .map(|&c| ((c + LAPLACE) / (total as f64 + LAPLACE * k as f64)).ln())
                                .collect()
                        })
                        .collect();
                    FeatureModel::Categorical { log_prob }
                }
                Feature::Numerical { .. } => {
                    let mut sum = vec![0.0; m];
                    let mut sq = vec![0.0; m];
                    for (row, &l) in rows.iter().zip(labels) {
                        sum[l] += row[j];
                        sq[l] += row[j] * row[j];
                    }
                    let mut mean = vec![0.0; m];
                    let mut var = vec![0.0; m];
                    for c in 0..m {
                        if class_count[c] > 0 {
                            let k = class_count[c] as f64;
                            mean[c] = sum[c] / k;
                            var[c] = (sq[c] / k - mean[c] * mean[c]).max(0.0);
                        }
                    }
                    let all_mean = rows.iter().map(|r| r[j]).sum::<f64>() / n;
                    let all_var = rows.iter().map(|r| (r[j] - all_mean).powi(2)).sum::<f64>() / n;
                    max_var = max_var.max(all_var);
                    FeatureModel::Gaussian { mean, var }
                }
            })
            .collect();
        let epsilon = VAR_SMOOTHING * max_var.max(1.0);
        for model in &mut models {
            if let FeatureModel::Gaussian { var, .. } = model {
                var.iter_mut().for_each(|v| *v += epsilon);
            }
        }
        NaiveBayes {
            log_prior,
            features: models,
        }
    }

    /// Normalized class posteriors for `sample`.
    pub fn posterior(&self, sample: &[f64]) -> Vec<f64> {
        let mut log_post = self.log_prior.clone();
        for (c, lp) in log_post.iter_mut().enumerate() {
            if lp.is_infinite() {
                continue;
            }
            for (model, &x) in self.features.iter().zip(sample) {
                *lp += match model {
                    FeatureModel::Gaussian { mean, var } => {
                        let d = x - mean[c];
                        -0.5 * ((2.0 * std::f64::consts::PI * var[c]).ln() + d * d / var[c])
                    }
                    FeatureModel::Categorical { log_prob } => {
                        // unseen category codes get the smoothed floor
                        let probs = &log_prob[c];
                        probs
                            .get(x as usize)
                            .copied()
                            .unwrap_or_else(|| probs.iter().copied().fold(f64::INFINITY, f64::min))
                    }
                };
            }
        }
        let max = log_post.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exp: Vec<f64> = log_post.iter().map(|lp| (lp - max).exp()).collect();
        let z: f64 = exp.iter().sum();
        exp.into_iter().map(|e| e / z).collect()
    }
}
