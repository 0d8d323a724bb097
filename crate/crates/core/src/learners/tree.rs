use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Criterion;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        counts: Vec<usize>,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

impl Node {
    pub fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    /// Class frequencies of the leaf reached by `sample`.
    pub fn leaf_counts(&self, sample: &[f64]) -> &[usize] {
        let mut node = self;
        loop {
            match node {
                Node::Leaf { counts } => return counts,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if sample[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }
}

pub(crate) fn impurity(counts: &[usize], criterion: Criterion) -> f64 {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let total = total as f64;
    match criterion {
        Criterion::Gini => 1.0 - counts.iter().map(|&c| (c as f64 / total).powi(2)).sum::<f64>(),
        Criterion::Entropy => -counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / total;
                p * p.log2()
            })
            .sum::<f64>(),
    }
}

pub(crate) struct TreeBuilder<'a> {
    pub rows: &'a [Vec<f64>],
    pub labels: &'a [usize],
    pub m: usize,
    pub criterion: Criterion,
    pub max_depth: usize,
    /// Order in which features are scanned; the first best split wins.
    pub feature_order: Vec<usize>,
}

impl<'a> TreeBuilder<'a> {
    pub fn new(
        rows: &'a [Vec<f64>],
        labels: &'a [usize],
        m: usize,
        criterion: Criterion,
        max_depth: usize,
        seed: u64,
    ) -> Self {
        let width = rows.first().map_or(0, Vec::len);
        let mut feature_order: Vec<usize> = (0..width).collect();
        feature_order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        TreeBuilder {
            rows,
            labels,
            m,
            criterion,
            max_depth,
            feature_order,
        }
    }

    fn counts(&self, idx: &[usize]) -> Vec<usize> {
        let mut counts = vec![0; self.m];
        for &i in idx {
            counts[self.labels[i]] += 1;
        }
        counts
    }

    pub fn build(&self, idx: &[usize], depth: usize) -> Node {
        let counts = self.counts(idx);
        let parent = impurity(&counts, self.criterion);
        if depth >= self.max_depth || idx.len() < 2 || parent == 0.0 {
            return Node::Leaf { counts };
        }
        let Some((feature, threshold)) = self.best_split(idx, &counts, parent) else {
            return Node::Leaf { counts };
        };
        let (l, r): (Vec<usize>, Vec<usize>) =
            idx.iter().partition(|&&i| self.rows[i][feature] <= threshold);
        Node::Split {
            feature,
            threshold,
            left: Box::new(self.build(&l, depth + 1)),
            right: Box::new(self.build(&r, depth + 1)),
        }
    }

    fn best_split(&self, idx: &[usize], counts: &[usize], parent: f64) -> Option<(usize, f64)> {
        let n = idx.len() as f64;
        let mut best: Option<(usize, f64)> = None;
        let mut best_gain = 1e-12;
        let mut sorted = idx.to_vec();
        for &f in &self.feature_order {
            sorted.sort_by(|&a, &b| self.rows[a][f].total_cmp(&self.rows[b][f]));
            let mut left = vec![0usize; self.m];
            let mut right = counts.to_vec();
            for k in 0..sorted.len() - 1 {
                let label = self.labels[sorted[k]];
                left[label] += 1;
                right[label] -= 1;
                let (x, next) = (self.rows[sorted[k]][f], self.rows[sorted[k + 1]][f]);
                if x == next {
                    continue;
                }
                let nl = (k + 1) as f64;
                let child = (nl * impurity(&left, self.criterion)
                    + (n - nl) * impurity(&right, self.criterion))
                    / n;
                let gain = parent - child;
                if gain > best_gain {
                    best_gain = gain;
                    best = Some((f, (x + next) / 2.0));
                }
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn impurity_values() {
        assert_eq!(impurity(&[5, 5], Criterion::Gini), 0.5);
        assert_eq!(impurity(&[5, 5], Criterion::Entropy), 1.0);
        assert_eq!(impurity(&[4, 0], Criterion::Entropy), 0.0);
        assert!((impurity(&[3, 1], Criterion::Gini) - 0.375).abs() < 1e-12);
    }

    #[test]
    fn depth_cap_is_respected() {
        let rows: Vec<Vec<f64>> = (0..64).map(|i| vec![i as f64]).collect();
        let labels: Vec<usize> = (0..64).map(|i| i % 2).collect();
        let idx: Vec<usize> = (0..64).collect();
        for depth in [1, 3, 5] {
            let tree = TreeBuilder::new(&rows, &labels, 2, Criterion::Gini, depth, 0).build(&idx, 0);
            assert!(tree.depth() <= depth);
        }
    }
}
