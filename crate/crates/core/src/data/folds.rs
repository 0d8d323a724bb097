use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// A partition of row indices into `k` stratified folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub folds: Vec<Vec<usize>>,
    pub seed: u64,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.folds.len()
    }

    /// `(train, test)` indices for fold `i`. With a single fold the whole
    /// set is used for both.
    pub fn train_test(&self, i: usize) -> (Vec<usize>, Vec<usize>) {
        let test = self.folds[i].clone();
        if self.k() == 1 {
            return (test.clone(), test);
        }
        let mut train: Vec<usize> = self
            .folds
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .flat_map(|(_, f)| f.iter().copied())
            .collect();
        train.sort_unstable();
        (train, test)
    }
}

fn by_class(labels: &[usize], rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let m = labels.iter().copied().max().map_or(0, |x| x + 1);
    let mut groups = vec![Vec::new(); m];
    for (i, &l) in labels.iter().enumerate() {
        groups[l].push(i);
    }
    for g in &mut groups {
        g.shuffle(rng);
    }
    groups
}

/// Stratified `k`-fold partition of `labels`, deterministic given `seed`.
///
/// Each class is shuffled and dealt round-robin, continuing where the
/// previous class stopped, so fold sizes and per-class counts differ by at
/// most one.
pub fn stratified_kfold(labels: &[usize], k: usize, seed: u64) -> Result<FoldPlan> {
    if k == 0 {
        return invalid("k must be >= 1");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let groups = by_class(labels, &mut rng);
    let smallest = groups.iter().map(Vec::len).filter(|&c| c > 0).min().unwrap_or(0);
    if k > smallest {
        return invalid(format!(
            "k = {k} exceeds the smallest class count {smallest}"
        ));
    }
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for g in groups {
        for i in g {
            folds[next].push(i);
            next = (next + 1) % k;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(FoldPlan { folds, seed })
}

/// Splits `indices` (labelled by `labels[i]`) into `(kept, held_out)` with
/// about `fraction` of every class held out. A class never loses its last
/// example to the held-out side.
pub fn stratified_split(
    indices: &[usize],
    labels: &[usize],
    fraction: f64,
    seed: u64,
) -> (Vec<usize>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let local: Vec<usize> = indices.iter().map(|&i| labels[i]).collect();
    let mut kept = Vec::new();
    let mut held = Vec::new();
    for g in by_class(&local, &mut rng) {
        let take = ((g.len() as f64 * fraction).round() as usize).min(g.len().saturating_sub(1));
        held.extend(g[..take].iter().map(|&j| indices[j]));
        kept.extend(g[take..].iter().map(|&j| indices[j]));
    }
    kept.sort_unstable();
    held.sort_unstable();
    (kept, held)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iris_like() -> Vec<usize> {
        (0..150).map(|i| i / 50).collect()
    }

    #[test]
    fn ten_folds_of_iris_shape() {
        let plan = stratified_kfold(&iris_like(), 10, 3).unwrap();
        for f in &plan.folds {
            assert_eq!(f.len(), 15);
            for c in 0..3 {
                assert_eq!(f.iter().filter(|&&i| i / 50 == c).count(), 5);
            }
        }
        let mut all: Vec<usize> = plan.folds.concat();
        all.sort_unstable();
        assert_eq!(all, (0..150).collect::<Vec<_>>());
    }

    #[test]
    fn single_fold_is_everything() {
        let plan = stratified_kfold(&iris_like(), 1, 0).unwrap();
        assert_eq!(plan.folds[0].len(), 150);
        let (train, test) = plan.train_test(0);
        assert_eq!(train, test);
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let a = stratified_kfold(&iris_like(), 5, 11).unwrap();
        assert_eq!(a, stratified_kfold(&iris_like(), 5, 11).unwrap());
        assert_ne!(a.folds, stratified_kfold(&iris_like(), 5, 12).unwrap().folds);
    }

    #[test]
    fn k_too_large() {
        let labels = [0, 0, 0, 1, 1];
        assert!(stratified_kfold(&labels, 3, 0).is_err());
        assert!(stratified_kfold(&labels, 2, 0).is_ok());
        assert!(stratified_kfold(&labels, 0, 0).is_err());
    }

    #[test]
    fn uneven_classes_stay_within_one() {
        let labels: Vec<usize> = (0..37).map(|i| usize::from(i % 3 == 0)).collect();
        let plan = stratified_kfold(&labels, 4, 5).unwrap();
        let total: Vec<usize> = (0..2).map(|c| labels.iter().filter(|&&l| l == c).count()).collect();
        for f in &plan.folds {
            for c in 0..2 {
                let got = f.iter().filter(|&&i| labels[i] == c).count() as f64;
                let expected = total[c] as f64 / 4.0;
                assert!((got - expected).abs() <= 1.0);
            }
        }
        let sizes: Vec<usize> = plan.folds.iter().map(Vec::len).collect();
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    }

    #[test]
    fn split_holds_out_per_class() {
        let labels = iris_like();
        let idx: Vec<usize> = (0..150).collect();
        let (kept, held) = stratified_split(&idx, &labels, 0.1, 1);
        assert_eq!(held.len(), 15);
        assert_eq!(kept.len(), 135);
        let (kept, held) = stratified_split(&[0, 50], &labels, 0.5, 1);
        assert_eq!(kept.len(), 2);
        assert!(held.is_empty());
    }
}
