//! Runs with a memoized wrapper.
//!
//! Once the folds are fixed, the cross-validated accuracy is a pure function
//! of the feature mask, so repeated masks are answered from a cache. Results
//! are identical to an uncached run; `evaluations` still counts every
//! request the optimizer makes.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use ecwsa_core::{
    check_inputs, run_seed, run_with, Dataset, DiscretizedDataset, EvalContext, Executor, IterationRecord,
    RunConfig, RunOutcome, RunReport, SubsetEvaluator,
};

use crate::error::Result;

pub struct Memoized<E> {
    inner: E,
    cache: Mutex<HashMap<Vec<bool>, f64>>,
    hits: AtomicU64,
}

impl<E: SubsetEvaluator> Memoized<E> {
    pub fn new(inner: E) -> Self {
        Memoized {
            inner,
            cache: Mutex::new(HashMap::new()),
            hits: AtomicU64::new(0),
        }
    }

    pub fn hits(&self) -> u64 {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn distinct(&self) -> usize {
        self.cache.lock().expect("cache lock").len()
    }
}

impl<E: SubsetEvaluator> SubsetEvaluator for Memoized<E> {
    fn accuracy(&self, mask: &[bool]) -> ecwsa_core::Result<f64> {
        if let Some(&acc) = self.cache.lock().expect("cache lock").get(mask) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(acc);
        }
        let acc = self.inner.accuracy(mask)?;
        self.cache.lock().expect("cache lock").insert(mask.to_vec(), acc);
        Ok(acc)
    }
}

/// One run on a normalized dataset: KNN cross-validation as the wrapper,
/// the discretized data as the local-search filter.
pub fn run_dataset<X: Executor + ?Sized>(
    cfg: &RunConfig,
    data: &Dataset,
    exec: &X,
    observer: &mut dyn FnMut(&IterationRecord),
) -> Result<RunReport> {
    check_inputs(cfg, data)?;
    let wrapper = Memoized::new(EvalContext::new(data, cfg.knn_k, cfg.cv_folds, cfg.seed)?);
    let filter = if cfg.local_search_enabled {
        Some(DiscretizedDataset::from_dataset(data, cfg.mi_bins)?)
    } else {
        None
    };
    Ok(run_with(cfg, data.n_features(), &wrapper, filter.as_ref(), exec, observer)?)
}

/// `runs` independent runs; run `r` uses `run_seed(cfg.seed, r)` as its
/// seed, for the optimizer and the folds alike.
pub fn repeat_dataset<X: Executor + ?Sized>(
    cfg: &RunConfig,
    data: &Dataset,
    runs: usize,
    exec: &X,
) -> Result<Vec<RunOutcome>> {
    let results: Vec<Result<RunOutcome>> = exec.map(runs, |r| {
        let seed = run_seed(cfg.seed, r);
        let run_cfg = RunConfig {
            seed,
            ..cfg.clone()
        };
        let report = run_dataset(&run_cfg, data, exec, &mut |_| {})?;
        Ok(RunOutcome::from_report(r, seed, data.n_features(), &report))
    });
    results.into_iter().collect()
}
