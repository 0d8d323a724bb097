use serde::{Deserialize, Serialize};

use crate::data::Feature;

/// Stores the training set; probabilities are neighbour class shares.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    pub k: usize,
    pub categorical: Vec<bool>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub m: usize,
}

impl Knn {
    pub fn fit(features: &[Feature], rows: &[Vec<f64>], labels: &[usize], m: usize, k: usize) -> Self {
        Knn {
            k: k.max(1),
            categorical: features.iter().map(Feature::is_categorical).collect(),
            rows: rows.to_vec(),
            labels: labels.to_vec(),
            m,
        }
    }

    /// Squared euclidean distance on numeric features plus 0/1 mismatch on
    /// categorical ones.
    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .zip(&self.categorical)
            .map(|((x, y), &cat)| if cat { f64::from(u8::from(x != y)) } else { (x - y) * (x - y) })
            .sum()
    }

    pub fn shares(&self, sample: &[f64]) -> Vec<f64> {
        let mut order: Vec<(f64, usize)> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| (self.distance(sample, r), i))
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let k = self.k.min(order.len());
        let mut shares = vec![0.0; self.m];
        for &(_, i) in &order[..k] {
            shares[self.labels[i]] += 1.0;
        }
        shares.iter_mut().for_each(|s| *s /= k as f64);
        shares
    }
}
