//! The filter half of the hybrid: equal-width discretization, plug-in
//! mutual information, the mRMR subset score, and the set-algebra local
//! search that uses it.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicU64, Ordering};

use once_cell::race::OnceBox;
use rand::Rng;

use crate::dataset::Dataset;
use crate::engine::Executor;
use crate::error::{Error, Result};
use crate::model::Whale;

/// Equal-width binning over `[min, max]`. The maximum lands in the last bin
/// and a constant column maps entirely to bin 0.
pub fn discretize(column: &[f64], bins: usize) -> Result<Vec<u32>> {
    if column.is_empty() {
        return Err(Error::arg("cannot discretize an empty column"));
    }
    if bins < 2 {
        return Err(Error::arg("need at least two bins"));
    }
    let lo = column.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = column.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    if range.is_nan() || range <= 0.0 {
        return Ok(vec![0; column.len()]);
    }
    let top = (bins - 1) as f64;
    Ok(column
        .iter()
        .map(|&x| libm::floor((x - lo) / range * bins as f64).clamp(0.0, top) as u32)
        .collect())
}

/// Relabels arbitrary symbols as `0..k` and returns `k`.
fn dense_codes(u: &[u32]) -> (Vec<u32>, usize) {
    let mut symbols = u.to_vec();
    symbols.sort_unstable();
    symbols.dedup();
    let codes = u
        .iter()
        .map(|s| symbols.binary_search(s).expect("symbol present") as u32)
        .collect();
    (codes, symbols.len())
}

fn entropy_dense(u: &[u32], k: usize) -> f64 {
    let mut counts = vec![0usize; k];
    for &a in u {
        counts[a as usize] += 1;
    }
    let n = u.len() as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let c = c as f64;
            (c / n) * libm::log(n / c)
        })
        .sum()
}

/// Plug-in MI between two symbol vectors whose values are below `ku` and `kv`.
fn mi_dense(u: &[u32], ku: usize, v: &[u32], kv: usize) -> f64 {
    let mut joint = vec![0usize; ku * kv];
    let mut cu = vec![0usize; ku];
    let mut cv = vec![0usize; kv];
    for (&a, &b) in u.iter().zip(v) {
        joint[a as usize * kv + b as usize] += 1;
        cu[a as usize] += 1;
        cv[b as usize] += 1;
    }
    let n = u.len() as f64;
    let mut mi = 0.0;
    for a in 0..ku {
        for b in 0..kv {
            let c = joint[a * kv + b];
            if c == 0 {
                continue;
            }
            let c = c as f64;
            mi += (c / n) * libm::log(c * n / (cu[a] as f64 * cv[b] as f64));
        }
    }
    mi.max(0.0)
}

/// Empirical (plug-in) entropy in nats.
pub fn entropy(u: &[u32]) -> f64 {
    if u.is_empty() {
        return 0.0;
    }
    let (codes, k) = dense_codes(u);
    entropy_dense(&codes, k)
}

/// Plug-in mutual information in nats:
/// `sum p(a,b) ln(p(a,b) / (p(a) p(b)))` over the empirical joint.
pub fn mutual_information(u: &[u32], v: &[u32]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::arg(format!(
            "mutual_information: lengths differ ({} vs {})",
            u.len(),
            v.len()
        )));
    }
    if u.is_empty() {
        return Err(Error::arg("mutual_information needs at least one sample"));
    }
    let (cu, ku) = dense_codes(u);
    let (cv, kv) = dense_codes(v);
    Ok(mi_dense(&cu, ku, &cv, kv))
}

/// Sorted, duplicate-free feature indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct FeatureSet(Vec<usize>);

impl FeatureSet {
    pub fn new(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        FeatureSet(indices)
    }

    pub fn from_mask(mask: &[bool]) -> Self {
        FeatureSet(
            mask.iter()
                .enumerate()
                .filter_map(|(i, &b)| b.then_some(i))
                .collect(),
        )
    }

    pub fn to_mask(&self, n: usize) -> Vec<bool> {
        let mut mask = vec![false; n];
        for &i in &self.0 {
            mask[i] = true;
        }
        mask
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn union(&self, other: &FeatureSet) -> FeatureSet {
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut a, mut b) = (self.0.iter().peekable(), other.0.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some(&&x), Some(&&y)) => {
                    if x <= y {
                        out.push(x);
                        a.next();
                        if x == y {
                            b.next();
                        }
                    } else {
                        out.push(y);
                        b.next();
                    }
                }
                (Some(&&x), None) => {
                    out.push(x);
                    a.next();
                }
                (None, Some(&&y)) => {
                    out.push(y);
                    b.next();
                }
                (None, None) => break,
            }
        }
        FeatureSet(out)
    }

    /// `self \ other`.
    pub fn difference(&self, other: &FeatureSet) -> FeatureSet {
        FeatureSet(
            self.0
                .iter()
                .copied()
                .filter(|&i| !other.contains(i))
                .collect(),
        )
    }
}

/// The two local-search neighbours of `x_i`:
/// `x_i ∪ (x_j \ x_k)` and `x_i \ (x_j \ x_k)`.
pub fn make_neighbors(
    x_i: &FeatureSet,
    x_j: &FeatureSet,
    x_k: &FeatureSet,
) -> (FeatureSet, FeatureSet) {
    let dif = x_j.difference(x_k);
    (x_i.union(&dif), x_i.difference(&dif))
}

const UNSET: u64 = u64::MAX;

/// Slots holding `f64` bits, `UNSET` until first computed. Concurrent
/// writers all store the same value, so a plain relaxed store suffices.
fn slots(len: usize) -> Box<[AtomicU64]> {
    (0..len).map(|_| AtomicU64::new(UNSET)).collect()
}

fn memo(slot: &AtomicU64, compute: impl FnOnce() -> f64) -> f64 {
    let bits = slot.load(Ordering::Relaxed);
    if bits != UNSET {
        return f64::from_bits(bits);
    }
    let v = compute();
    slot.store(v.to_bits(), Ordering::Relaxed);
    v
}

/// Discretized view of a dataset with a lazily filled MI cache.
///
/// Feature-class MI lives in one flat table. Feature-feature MI lives in a
/// lower-triangular table whose rows are allocated on first touch, which
/// keeps memory proportional to the features a run actually visits.
pub struct DiscretizedDataset {
    columns: Vec<Vec<u32>>,
    bins: usize,
    labels: Vec<u32>,
    n_classes: usize,
    relevance: Box<[AtomicU64]>,
    redundancy: Box<[OnceBox<Box<[AtomicU64]>>]>,
}

impl core::fmt::Debug for DiscretizedDataset {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("DiscretizedDataset")
            .field("features", &self.columns.len())
            .field("instances", &self.labels.len())
            .field("bins", &self.bins)
            .field("classes", &self.n_classes)
            .finish()
    }
}

impl DiscretizedDataset {
    pub fn from_dataset(data: &Dataset, bins: usize) -> Result<Self> {
        let columns = (0..data.n_features())
            .map(|j| discretize(&data.column(j), bins))
            .collect::<Result<Vec<_>>>()?;
        let labels = data.labels().iter().map(|&l| l as u32).collect();
        Ok(Self::from_columns(columns, bins, labels, data.n_classes()))
    }

    /// Builds from already-binned columns; every value must be `< bins` and
    /// every label `< n_classes`.
    pub fn from_parts(columns: Vec<Vec<u32>>, bins: usize, labels: Vec<u32>, n_classes: usize) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::arg("need at least one feature column"));
        }
        if let Some(c) = columns.iter().find(|c| c.len() != labels.len()) {
            return Err(Error::arg(format!(
                "column of length {} does not match {} labels",
                c.len(),
                labels.len()
            )));
        }
        if columns.iter().flatten().any(|&v| v as usize >= bins) {
            return Err(Error::arg("bin index out of range"));
        }
        if labels.iter().any(|&l| l as usize >= n_classes) {
            return Err(Error::arg("label out of range"));
        }
        Ok(Self::from_columns(columns, bins, labels, n_classes))
    }

    fn from_columns(columns: Vec<Vec<u32>>, bins: usize, labels: Vec<u32>, n_classes: usize) -> Self {
        let n = columns.len();
        DiscretizedDataset {
            columns,
            bins,
            labels,
            n_classes,
            relevance: slots(n),
            redundancy: (0..n).map(|_| OnceBox::new()).collect(),
        }
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn column(&self, j: usize) -> &[u32] {
        &self.columns[j]
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// `MI(feature_j, class)`, memoized.
    pub fn relevance(&self, j: usize) -> f64 {
        memo(&self.relevance[j], || {
            mi_dense(&self.columns[j], self.bins, &self.labels, self.n_classes)
        })
    }

    /// `MI(feature_i, feature_j)`, memoized; `redundancy(i, i)` is the
    /// entropy of feature `i`.
    pub fn redundancy(&self, i: usize, j: usize) -> f64 {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        let row = self.redundancy[hi].get_or_init(|| Box::new(slots(hi + 1)));
        memo(&row[lo], || {
            mi_dense(&self.columns[hi], self.bins, &self.columns[lo], self.bins)
        })
    }

    /// Mean relevance minus mean pairwise redundancy over all ordered pairs
    /// (self-pairs included). The empty set scores negative infinity.
    pub fn mrmr_fitness(&self, set: &FeatureSet) -> f64 {
        if set.is_empty() {
            return f64::NEG_INFINITY;
        }
        let s = set.len() as f64;
        let relevance: f64 = set.indices().iter().map(|&i| self.relevance(i)).sum();
        let mut redundancy = 0.0;
        for &i in set.indices() {
            for &j in set.indices() {
                redundancy += self.redundancy(i, j);
            }
        }
        relevance / s - redundancy / (s * s)
    }
}

/// Result of one local-search pass.
#[derive(Debug, Clone)]
pub struct LocalSearchOutcome {
    pub population: Vec<Whale>,
    pub replaced: usize,
    /// True when the population was too small to draw two partners.
    pub skipped: bool,
}

/// Two distinct indices in `0..m`, both different from `i`.
fn two_partners<R: Rng + ?Sized>(m: usize, i: usize, rng: &mut R) -> (usize, usize) {
    let mut r1 = rng.random_range(0..m - 1);
    if r1 >= i {
        r1 += 1;
    }
    let (lo, hi) = if i < r1 { (i, r1) } else { (r1, i) };
    let mut r2 = rng.random_range(0..m - 2);
    if r2 >= lo {
        r2 += 1;
    }
    if r2 >= hi {
        r2 += 1;
    }
    (r1, r2)
}

/// One pass of the mRMR local search.
///
/// For each whale `i`, two partners `r1 != r2` (both `!= i`) are drawn from
/// the pass-start population, the two neighbours of `x_i` built from
/// `x_r1 \ x_r2` are scored, and the whale is replaced by a neighbour only
/// when that neighbour's mRMR score is strictly higher. Neighbour 1 is
/// tried first; neighbour 2 must then beat the (possibly updated) whale.
/// Replacements get `±1` positions and no cached fitness.
pub fn local_search<X, R, F>(
    population: &[Whale],
    data: &DiscretizedDataset,
    exec: &X,
    rng_for: F,
) -> Result<LocalSearchOutcome>
where
    X: Executor + ?Sized,
    R: Rng,
    F: Fn(usize) -> R + Sync + Send,
{
    let m = population.len();
    if m < 3 {
        return Ok(LocalSearchOutcome {
            population: population.to_vec(),
            replaced: 0,
            skipped: true,
        });
    }
    let n = data.n_features();
    if let Some(w) = population.iter().find(|w| w.dim() != n) {
        return Err(Error::arg(format!(
            "whale has {} coordinates, filter data has {n} features",
            w.dim()
        )));
    }
    let sets: Vec<FeatureSet> = population
        .iter()
        .map(|w| FeatureSet::from_mask(w.mask()))
        .collect();
    let replacements: Vec<Option<FeatureSet>> = exec.map(m, |i| {
        let mut rng = rng_for(i);
        let (r1, r2) = two_partners(m, i, &mut rng);
        let (n1, n2) = make_neighbors(&sets[i], &sets[r1], &sets[r2]);
        if n1 == sets[i] && n2 == sets[i] {
            return None;
        }
        let mut current = data.mrmr_fitness(&sets[i]);
        let mut chosen = None;
        let f1 = data.mrmr_fitness(&n1);
        if f1 > current {
            current = f1;
            chosen = Some(n1);
        }
        let f2 = data.mrmr_fitness(&n2);
        if f2 > current {
            chosen = Some(n2);
        }
        chosen
    });
    let mut replaced = 0;
    let mut next = Vec::with_capacity(m);
    for (whale, replacement) in population.iter().zip(replacements) {
        match replacement {
            Some(set) => {
                replaced += 1;
                next.push(Whale::from_mask(&set.to_mask(n))?);
            }
            None => next.push(whale.clone()),
        }
    }
    Ok(LocalSearchOutcome {
        population: next,
        replaced,
        skipped: false,
    })
}
