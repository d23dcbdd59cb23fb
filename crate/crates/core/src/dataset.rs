//! In-memory labelled datasets, min-max normalization, and stratified fold
//! assignment.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng::{substream, Purpose};

/// A dense feature matrix (row-major) with encoded class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    feature_names: Vec<String>,
    n_features: usize,
    values: Vec<f64>,
    labels: Vec<usize>,
    class_names: Vec<String>,
    column_min: Vec<f64>,
    column_max: Vec<f64>,
}

impl Dataset {
    /// `values` holds `labels.len()` rows of `feature_names.len()` entries.
    /// Labels are indices into `class_names`.
    pub fn new(
        name: impl Into<String>,
        feature_names: Vec<String>,
        values: Vec<f64>,
        labels: Vec<usize>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        let n_features = feature_names.len();
        if n_features == 0 {
            return Err(Error::arg("dataset needs at least one feature"));
        }
        if values.len() != n_features * labels.len() {
            return Err(Error::arg(format!(
                "{} values do not form {} rows of {} features",
                values.len(),
                labels.len(),
                n_features
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::arg(format!(
                "non-finite value at row {}, column {}",
                i / n_features,
                i % n_features
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_names.len()) {
            return Err(Error::arg(format!("label {bad} has no class name")));
        }
        let present = {
            let mut seen = vec![false; class_names.len()];
            for &l in &labels {
                seen[l] = true;
            }
            seen.iter().filter(|&&s| s).count()
        };
        if present < 2 {
            return Err(Error::arg(format!(
                "dataset needs at least two classes, found {present}"
            )));
        }
        let mut column_min = vec![f64::INFINITY; n_features];
        let mut column_max = vec![f64::NEG_INFINITY; n_features];
        for row in values.chunks_exact(n_features) {
            for (j, &v) in row.iter().enumerate() {
                column_min[j] = column_min[j].min(v);
                column_max[j] = column_max[j].max(v);
            }
        }
        Ok(Dataset {
            name: name.into(),
            feature_names,
            n_features,
            values,
            labels,
            class_names,
            column_min,
            column_max,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_instances(&self) -> usize {
        self.labels.len()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Row-major feature values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values
            .iter()
            .skip(j)
            .step_by(self.n_features)
            .copied()
            .collect()
    }

    /// Per-column minima of the values currently held.
    pub fn column_min(&self) -> &[f64] {
        &self.column_min
    }

    pub fn column_max(&self) -> &[f64] {
        &self.column_max
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Maps every column to `[0, 1]` via `(x - min) / (max - min)`;
    /// constant columns become all zeros.
    pub fn min_max_normalize(mut self) -> Self {
        let n = self.n_features;
        for row in self.values.chunks_exact_mut(n) {
            for (j, v) in row.iter_mut().enumerate() {
                let (lo, hi) = (self.column_min[j], self.column_max[j]);
                let range = hi - lo;
                *v = if range > 0.0 {
                    ((*v - lo) / range).clamp(0.0, 1.0)
                } else {
                    0.0
                };
            }
        }
        for j in 0..n {
            let range = self.column_max[j] - self.column_min[j];
            self.column_min[j] = 0.0;
            self.column_max[j] = if range > 0.0 { 1.0 } else { 0.0 };
        }
        self
    }

    /// Stratified fold index per instance.
    ///
    /// Each class is shuffled with a seeded stream and dealt round-robin,
    /// continuing the deal across classes, so per-class counts per fold
    /// differ by at most one and so do the fold sizes.
    pub fn stratified_folds(&self, folds: usize, seed: u64) -> Result<Vec<usize>> {
        if folds < 2 {
            return Err(Error::arg("need at least two folds"));
        }
        if folds > self.n_instances() {
            return Err(Error::arg(format!(
                "{folds} folds exceed {} instances",
                self.n_instances()
            )));
        }
        let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); self.n_classes()];
        for (i, &l) in self.labels.iter().enumerate() {
            by_class[l].push(i);
        }
        let mut rng = substream(seed, 0, 0, Purpose::Folds);
        let mut assignment = vec![0; self.n_instances()];
        let mut deal = 0usize;
        for members in &mut by_class {
            members.shuffle(&mut rng);
            for &i in members.iter() {
                assignment[i] = deal % folds;
                deal += 1;
            }
        }
        Ok(assignment)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use proptest::prelude::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("f{i}")).collect()
    }

    fn classes(c: usize) -> Vec<String> {
        (0..c).map(|i| i.to_string()).collect()
    }

    fn one_column(col: &[f64], labels: Vec<usize>) -> Dataset {
        Dataset::new("t", names(1), col.to_vec(), labels, classes(2)).unwrap()
    }

    #[test]
    fn normalization_examples() {
        let d = one_column(&[2.0, 4.0, 6.0], vec![0, 1, 0]).min_max_normalize();
        assert_eq!(d.values(), &[0.0, 0.5, 1.0]);
        let d = one_column(&[5.0, 5.0], vec![0, 1]).min_max_normalize();
        assert_eq!(d.values(), &[0.0, 0.0]);
        let d = one_column(&[0.0, 0.25, 1.0], vec![0, 1, 1]).min_max_normalize();
        assert_eq!(d.values(), &[0.0, 0.25, 1.0]);
    }

    #[test]
    fn single_class_rejected() {
        assert!(Dataset::new("t", names(1), vec![1.0, 2.0], vec![0, 0], classes(2)).is_err());
    }

    #[test]
    fn shape_mismatch_rejected() {
        assert!(Dataset::new("t", names(2), vec![1.0, 2.0, 3.0], vec![0, 1], classes(2)).is_err());
    }

    #[test]
    fn perfect_stratification() {
        let labels = vec![0, 1, 0, 1, 0, 1, 0, 1, 0, 1];
        let d = one_column(&[0.0; 10], labels.clone());
        let folds = d.stratified_folds(5, 3).unwrap();
        for f in 0..5 {
            let members: Vec<usize> = (0..10).filter(|&i| folds[i] == f).collect();
            assert_eq!(members.len(), 2);
            assert_ne!(labels[members[0]], labels[members[1]]);
        }
        assert_eq!(folds, d.stratified_folds(5, 3).unwrap());
    }

    #[test]
    fn uneven_class_spreads_one_or_two() {
        let mut labels = vec![0; 7];
        labels.extend([1; 5]);
        let d = one_column(&[0.0; 12], labels);
        let folds = d.stratified_folds(5, 11).unwrap();
        for f in 0..5 {
            let c = (0..7).filter(|&i| folds[i] == f).count();
            assert!((1..=2).contains(&c));
        }
    }

    #[test]
    fn too_many_folds_rejected() {
        let d = one_column(&[0.0; 3], vec![0, 1, 0]);
        assert!(d.stratified_folds(4, 0).is_err());
        assert!(d.stratified_folds(1, 0).is_err());
    }

    proptest! {
        #[test]
        fn folds_partition_evenly(
            labels in prop::collection::vec(0usize..4, 8..120),
            folds in 2usize..8,
            seed in any::<u64>(),
        ) {
            let mut labels = labels;
            labels[0] = 0;
            labels[1] = 1;
            let n = labels.len();
            let d = Dataset::new("p", names(1), vec![0.0; n], labels.clone(), classes(4)).unwrap();
            let assignment = d.stratified_folds(folds, seed).unwrap();
            let sizes: Vec<usize> = (0..folds).map(|f| assignment.iter().filter(|&&a| a == f).count()).collect();
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
            for c in 0..4 {
                let per: Vec<usize> = (0..folds)
                    .map(|f| (0..n).filter(|&i| labels[i] == c && assignment[i] == f).count())
                    .collect();
                prop_assert!(per.iter().max().unwrap() - per.iter().min().unwrap() <= 1);
            }
        }

        #[test]
        fn normalized_values_in_unit_interval(col in prop::collection::vec(-1e6f64..1e6, 2..50)) {
            let n = col.len();
            let labels: Vec<usize> = (0..n).map(|i| i % 2).collect();
            let d = one_column(&col, labels).min_max_normalize();
            prop_assert!(d.values().iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }
}
