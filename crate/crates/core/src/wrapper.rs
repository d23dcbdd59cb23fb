//! Wrapper fitness: KNN accuracy under stratified k-fold cross-validation,
//! folded together with subset size into one score.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicU64, Ordering};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::model::FitnessRecord;

/// `fitness = alpha * accuracy + beta * (n - selected) / n`.
pub fn wrapper_fitness(
    accuracy: f64,
    selected_count: usize,
    n: usize,
    alpha: f64,
    beta: f64,
) -> Result<FitnessRecord> {
    if selected_count < 1 || selected_count > n {
        return Err(Error::arg(format!(
            "selected_count {selected_count} outside [1, {n}]"
        )));
    }
    if !(0.0..=1.0).contains(&accuracy) {
        return Err(Error::arg(format!("accuracy {accuracy} outside [0, 1]")));
    }
    let fitness = alpha * accuracy + beta * (n - selected_count) as f64 / n as f64;
    Ok(FitnessRecord {
        fitness,
        accuracy,
        selected_count,
    })
}

/// Keeps the `k` smallest distances seen so far. Candidates arrive in
/// increasing instance order and only a strictly smaller distance displaces
/// a kept one, so distance ties go to the lower index.
struct Neighbours {
    k: usize,
    kept: Vec<(f64, usize)>,
}

impl Neighbours {
    fn new(k: usize) -> Self {
        Neighbours {
            k,
            kept: Vec::with_capacity(k + 1),
        }
    }

    fn clear(&mut self) {
        self.kept.clear();
    }

    #[inline]
    fn offer(&mut self, dist: f64, label: usize) {
        if self.kept.len() == self.k {
            if dist >= self.kept[self.k - 1].0 {
                return;
            }
            self.kept.pop();
        }
        // insert after every entry with distance <= dist
        let at = self.kept.partition_point(|&(d, _)| d <= dist);
        self.kept.insert(at, (dist, label));
    }

    /// Majority label; vote ties go to the smaller class id.
    fn vote(&self, votes: &mut [usize]) -> usize {
        votes.iter_mut().for_each(|v| *v = 0);
        for &(_, label) in &self.kept {
            votes[label] += 1;
        }
        let mut best = 0;
        for (label, &count) in votes.iter().enumerate() {
            if count > votes[best] {
                best = label;
            }
        }
        best
    }
}

#[inline]
fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Predicts the label of `query` by majority vote among the `k` nearest
/// training rows (Euclidean distance; `k` is capped at the training size).
///
/// Rows must already be restricted to the active features. Distance ties
/// prefer the lower training index; vote ties prefer the smaller label.
pub fn knn_predict(train_rows: &[&[f64]], train_labels: &[usize], query: &[f64], k: usize) -> Result<usize> {
    if train_rows.is_empty() {
        return Err(Error::arg("knn_predict needs a non-empty training set"));
    }
    if train_rows.len() != train_labels.len() {
        return Err(Error::arg("training rows and labels differ in length"));
    }
    if k == 0 {
        return Err(Error::arg("k must be at least 1"));
    }
    if let Some(r) = train_rows.iter().find(|r| r.len() != query.len()) {
        return Err(Error::arg(format!(
            "training row has {} features, query has {}",
            r.len(),
            query.len()
        )));
    }
    let k = k.min(train_rows.len());
    let mut nn = Neighbours::new(k);
    for (row, &label) in train_rows.iter().zip(train_labels) {
        nn.offer(squared_distance(row, query), label);
    }
    let classes = train_labels.iter().max().map_or(1, |m| m + 1);
    Ok(nn.vote(&mut vec![0; classes]))
}

/// Everything needed to score feature subsets on one dataset with fixed
/// folds.
#[derive(Debug)]
pub struct EvalContext<'a> {
    data: &'a Dataset,
    k: usize,
    folds: Vec<usize>,
    n_folds: usize,
    evaluations: AtomicU64,
}

impl<'a> EvalContext<'a> {
    pub fn new(data: &'a Dataset, k: usize, cv_folds: usize, seed: u64) -> Result<Self> {
        let folds = data.stratified_folds(cv_folds, seed)?;
        Self::with_folds(data, k, folds)
    }

    /// Uses an explicit per-instance fold assignment.
    pub fn with_folds(data: &'a Dataset, k: usize, folds: Vec<usize>) -> Result<Self> {
        if k == 0 {
            return Err(Error::arg("k must be at least 1"));
        }
        if folds.len() != data.n_instances() {
            return Err(Error::arg("fold assignment length differs from instance count"));
        }
        let n_folds = folds.iter().max().map_or(0, |m| m + 1);
        if n_folds < 2 {
            return Err(Error::arg("need at least two folds"));
        }
        for f in 0..n_folds {
            if !folds.contains(&f) {
                return Err(Error::arg(format!("fold {f} is empty")));
            }
        }
        Ok(EvalContext {
            data,
            k,
            folds,
            n_folds,
            evaluations: AtomicU64::new(0),
        })
    }

    pub fn dataset(&self) -> &Dataset {
        self.data
    }

    pub fn folds(&self) -> &[usize] {
        &self.folds
    }

    /// Wrapper evaluations performed so far.
    pub fn evaluations(&self) -> u64 {
        self.evaluations.load(Ordering::Relaxed)
    }

    /// Mean held-out KNN accuracy over the folds, using only the masked
    /// features. Counts as one wrapper evaluation.
    pub fn cv_accuracy(&self, mask: &[bool]) -> Result<f64> {
        let n = self.data.n_features();
        if mask.len() != n {
            return Err(Error::arg(format!(
                "mask has {} entries, dataset has {n} features",
                mask.len()
            )));
        }
        let selected: Vec<usize> = (0..n).filter(|&j| mask[j]).collect();
        if selected.is_empty() {
            return Err(Error::arg("mask selects no features; repair it first"));
        }
        self.evaluations.fetch_add(1, Ordering::Relaxed);

        let s = selected.len();
        let rows = self.data.n_instances();
        let mut packed = Vec::with_capacity(rows * s);
        for i in 0..rows {
            let row = self.data.row(i);
            packed.extend(selected.iter().map(|&j| row[j]));
        }
        let labels = self.data.labels();
        let mut nn = Neighbours::new(self.k);
        let mut votes = vec![0; self.data.n_classes()];
        let mut total = 0.0;
        for fold in 0..self.n_folds {
            let train: Vec<usize> = (0..rows).filter(|&i| self.folds[i] != fold).collect();
            let k = self.k.min(train.len());
            nn.k = k;
            let mut tested = 0usize;
            let mut correct = 0usize;
            for q in (0..rows).filter(|&i| self.folds[i] == fold) {
                let query = &packed[q * s..(q + 1) * s];
                nn.clear();
                for &t in &train {
                    nn.offer(squared_distance(&packed[t * s..(t + 1) * s], query), labels[t]);
                }
                if nn.vote(&mut votes) == labels[q] {
                    correct += 1;
                }
                tested += 1;
            }
            total += correct as f64 / tested as f64;
        }
        Ok(total / self.n_folds as f64)
    }
}
