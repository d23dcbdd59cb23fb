//! The main optimization loop.
//!
//! Each iteration: score every unscored whale with the wrapper, stable-sort
//! by descending fitness, refresh the prey (global best so far), advance the
//! chaos stream once per whale, move every whale, run the mRMR local search,
//! then cut the population to `max(base, floor((1 - death) * size))`.

use alloc::vec::Vec;

use rand::Rng;

use crate::chaos::ChaosState;
use crate::dataset::Dataset;
use crate::dynamics::{decay_a, dispatch_move, DynamicsParams, Movement};
use crate::error::{Error, Result};
use crate::model::{IterationRecord, MoveCounts, RunConfig, RunReport, Whale};
use crate::mrmr::{local_search, DiscretizedDataset};
use crate::rng::{derive_seed, substream, Purpose};
use crate::wrapper::{wrapper_fitness, EvalContext};

/// Runs an indexed map, possibly in parallel. Implementations must return
/// results in index order.
pub trait Executor: Sync {
    fn map<T, F>(&self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs everything on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T, F>(&self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..len).map(f).collect()
    }
}

/// Scores a feature mask; each call is one wrapper evaluation.
pub trait SubsetEvaluator: Sync {
    /// Classification accuracy in `[0, 1]` for the masked features.
    fn accuracy(&self, mask: &[bool]) -> Result<f64>;
}

impl SubsetEvaluator for EvalContext<'_> {
    fn accuracy(&self, mask: &[bool]) -> Result<f64> {
        self.cv_accuracy(mask)
    }
}

impl<F> SubsetEvaluator for F
where
    F: Fn(&[bool]) -> f64 + Sync,
{
    fn accuracy(&self, mask: &[bool]) -> Result<f64> {
        Ok(self(mask))
    }
}

/// `max(base, floor(current * (1 - death)))`.
pub fn shrink_population(current_size: usize, death: f64, base: usize) -> usize {
    let survivors = libm::floor(current_size as f64 * (1.0 - death));
    base.max(survivors as usize)
}

/// Keeps the first `new_size` members of a population already sorted by
/// descending fitness.
pub fn apply_death<T>(mut population: Vec<T>, new_size: usize) -> Result<Vec<T>> {
    if new_size > population.len() {
        return Err(Error::arg(alloc::format!(
            "cannot keep {new_size} of {} whales",
            population.len()
        )));
    }
    population.truncate(new_size);
    Ok(population)
}

/// The population size at each iteration for a given configuration.
pub fn survival_schedule(cfg: &RunConfig) -> Vec<usize> {
    let mut size = cfg.initial_population;
    (0..cfg.max_iterations)
        .map(|_| {
            let now = size;
            size = shrink_population(size, cfg.death, cfg.base);
            now
        })
        .collect()
}

fn sort_descending(population: &mut [Whale]) {
    population.sort_by(|a, b| {
        b.fitness_value()
            .partial_cmp(&a.fitness_value())
            .unwrap_or(core::cmp::Ordering::Equal)
    });
}

/// Runs the optimizer against any evaluator.
///
/// `filter` feeds the mRMR local search; without it (or with local search
/// disabled in `cfg`) that phase is skipped. `observer` sees every trace
/// row as soon as its iteration finishes.
pub fn run_with<E, X>(
    cfg: &RunConfig,
    n_features: usize,
    evaluator: &E,
    filter: Option<&DiscretizedDataset>,
    exec: &X,
    observer: &mut dyn FnMut(&IterationRecord),
) -> Result<RunReport>
where
    E: SubsetEvaluator + ?Sized,
    X: Executor + ?Sized,
{
    cfg.validate().map_err(Error::InvalidConfig)?;
    if n_features == 0 {
        return Err(Error::arg("need at least one feature"));
    }
    if let Some(f) = filter {
        if f.n_features() != n_features {
            return Err(Error::arg("filter data and evaluator disagree on feature count"));
        }
    }
    let seed = cfg.seed;
    let init: Vec<Result<Whale>> = exec.map(cfg.initial_population, |i| {
        let mut rng = substream(seed, 0, i as u64, Purpose::Init);
        let position = (0..n_features).map(|_| rng.random_range(-1.0..=1.0)).collect();
        Whale::new(position, &mut rng)
    });
    let mut population = init.into_iter().collect::<Result<Vec<_>>>()?;
    let mut chaos = ChaosState::new(cfg.chaos_map, cfg.chaos_params, cfg.chaos_initial_p, seed)?;
    let mut prey: Option<Whale> = None;
    let mut evaluations = 0u64;
    let mut trace = Vec::with_capacity(cfg.max_iterations);

    for t in 0..cfg.max_iterations {
        let scores: Vec<Option<Result<_>>> = exec.map(population.len(), |i| {
            let w = &population[i];
            w.fitness().is_none().then(|| {
                let acc = evaluator.accuracy(w.mask())?;
                wrapper_fitness(acc, w.selected_count(), n_features, cfg.alpha, cfg.beta)
            })
        });
        let mut scored = Vec::with_capacity(population.len());
        for (whale, score) in population.into_iter().zip(scores) {
            scored.push(match score {
                Some(record) => {
                    evaluations += 1;
                    whale.with_fitness(record?)
                }
                None => whale,
            });
        }
        population = scored;
        sort_descending(&mut population);
        if prey
            .as_ref()
            .is_none_or(|p| population[0].fitness_value() > p.fitness_value())
        {
            prey = Some(population[0].clone());
        }
        let prey_ref = prey.as_ref().expect("prey set after first evaluation");
        let evaluated_size = population.len();

        let a = decay_a(t, cfg.max_iterations)?;
        let ps = (0..population.len())
            .map(|_| chaos.advance())
            .collect::<Result<Vec<f64>>>()?;
        let iter_key = t as u64 + 1;
        let moved: Vec<Result<(Whale, Movement)>> = exec.map(population.len(), |i| {
            let mut rng = substream(seed, iter_key, i as u64, Purpose::Move);
            let params = DynamicsParams::draw(a, cfg.spiral_b, ps[i], n_features, &mut rng);
            dispatch_move(&population[i], prey_ref, &population, &params, &mut rng)
        });
        let mut moves = MoveCounts::default();
        let mut next = Vec::with_capacity(moved.len());
        for m in moved {
            let (whale, movement) = m?;
            match movement {
                Movement::Exploit => moves.exploit += 1,
                Movement::Explore(_) => moves.explore += 1,
                Movement::Spiral => moves.spiral += 1,
            }
            next.push(whale);
        }
        population = next;

        let mut local_search_replacements = None;
        if let (true, Some(data)) = (cfg.local_search_enabled, filter) {
            let outcome = local_search(&population, data, exec, |i| {
                substream(seed, iter_key, i as u64, Purpose::LocalSearch)
            })?;
            if !outcome.skipped {
                local_search_replacements = Some(outcome.replaced);
            }
            population = outcome.population;
        }

        let best = prey_ref.fitness().expect("prey is scored");
        let record = IterationRecord {
            iteration: t,
            population_size: evaluated_size,
            best_fitness: best.fitness,
            best_accuracy: best.accuracy,
            best_selected_count: best.selected_count,
            moves,
            local_search_replacements,
        };
        observer(&record);
        trace.push(record);

        let size = population.len();
        let survivors = shrink_population(size, cfg.death, cfg.base).min(size);
        population = apply_death(population, survivors)?;
    }

    Ok(RunReport {
        trace,
        best: prey.expect("at least one iteration ran"),
        evaluations,
        wall_time_secs: None,
    })
}

/// Checks a configuration against a dataset before a run: the config must
/// be valid, and the data needs two classes and two instances per fold.
pub fn check_inputs(cfg: &RunConfig, data: &Dataset) -> Result<()> {
    cfg.validate().map_err(Error::InvalidConfig)?;
    let classes = data.class_counts().iter().filter(|&&c| c > 0).count();
    if classes < 2 {
        return Err(Error::arg("dataset needs at least two classes"));
    }
    if data.n_instances() < cfg.cv_folds * 2 {
        return Err(Error::arg(alloc::format!(
            "{} instances are too few for {} folds (need at least {})",
            data.n_instances(),
            cfg.cv_folds,
            cfg.cv_folds * 2
        )));
    }
    Ok(())
}

/// Runs the optimizer on a normalized dataset with KNN cross-validation as
/// the wrapper and the discretized dataset as the local-search filter.
pub fn run_on<X: Executor + ?Sized>(
    cfg: &RunConfig,
    data: &Dataset,
    exec: &X,
    observer: &mut dyn FnMut(&IterationRecord),
) -> Result<RunReport> {
    check_inputs(cfg, data)?;
    let ctx = EvalContext::new(data, cfg.knn_k, cfg.cv_folds, cfg.seed)?;
    let filter = if cfg.local_search_enabled {
        Some(DiscretizedDataset::from_dataset(data, cfg.mi_bins)?)
    } else {
        None
    };
    run_with(cfg, data.n_features(), &ctx, filter.as_ref(), exec, observer)
}

/// Single-threaded [`run_on`] without an observer.
pub fn run(cfg: &RunConfig, data: &Dataset) -> Result<RunReport> {
    run_on(cfg, data, &Sequential, &mut |_| {})
}

/// Seed of run `index` in a repeated experiment.
pub fn run_seed(seed: u64, index: usize) -> u64 {
    derive_seed(seed, index as u64, 0, Purpose::Run)
}

/// Summary of one run of a repeated experiment.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RunOutcome {
    pub run: usize,
    pub seed: u64,
    pub best_fitness: f64,
    pub best_accuracy: f64,
    pub selected_count: usize,
    pub n_features: usize,
    pub selected_features: Vec<usize>,
    pub evaluations: u64,
}

impl RunOutcome {
    pub fn from_report(run: usize, seed: u64, n_features: usize, report: &RunReport) -> Self {
        let best = report.best_record();
        RunOutcome {
            run,
            seed,
            best_fitness: best.fitness,
            best_accuracy: best.accuracy,
            selected_count: best.selected_count,
            n_features,
            selected_features: report.best.selected_indices(),
            evaluations: report.evaluations,
        }
    }

    pub fn selected_percent(&self) -> f64 {
        100.0 * self.selected_count as f64 / self.n_features as f64
    }
}

/// Statistics over repeated runs. `std` uses the population convention
/// (divide by the number of runs).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Aggregate {
    pub runs: usize,
    pub min_accuracy: f64,
    pub avg_accuracy: f64,
    pub std_accuracy: f64,
    pub max_accuracy: f64,
    pub avg_selected_percent: f64,
    pub avg_fitness: f64,
}

/// Aggregates run outcomes; `None` for an empty slice.
pub fn aggregate(outcomes: &[RunOutcome]) -> Option<Aggregate> {
    if outcomes.is_empty() {
        return None;
    }
    let r = outcomes.len() as f64;
    let accs = outcomes.iter().map(|o| o.best_accuracy);
    let min = accs.clone().fold(f64::INFINITY, f64::min);
    let max = accs.clone().fold(f64::NEG_INFINITY, f64::max);
    let avg = accs.clone().sum::<f64>() / r;
    let var = accs.map(|a| (a - avg) * (a - avg)).sum::<f64>() / r;
    Some(Aggregate {
        runs: outcomes.len(),
        min_accuracy: min,
        avg_accuracy: avg,
        std_accuracy: libm::sqrt(var),
        max_accuracy: max,
        avg_selected_percent: outcomes.iter().map(RunOutcome::selected_percent).sum::<f64>() / r,
        avg_fitness: outcomes.iter().map(|o| o.best_fitness).sum::<f64>() / r,
    })
}

/// Runs `runs` independent seeds and aggregates them. Runs go through
/// `exec` as well, so they may execute concurrently.
pub fn repeat_runs_with<X: Executor + ?Sized>(
    cfg: &RunConfig,
    data: &Dataset,
    runs: usize,
    exec: &X,
) -> Result<(Vec<RunOutcome>, Aggregate)> {
    if runs == 0 {
        return Err(Error::arg("need at least one run"));
    }
    let results: Vec<Result<RunOutcome>> = exec.map(runs, |r| {
        let seed = run_seed(cfg.seed, r);
        let run_cfg = RunConfig {
            seed,
            ..cfg.clone()
        };
        let report = run_on(&run_cfg, data, exec, &mut |_| {})?;
        Ok(RunOutcome::from_report(r, seed, data.n_features(), &report))
    });
    let outcomes = results.into_iter().collect::<Result<Vec<_>>>()?;
    let agg = aggregate(&outcomes).expect("runs >= 1");
    Ok((outcomes, agg))
}

/// Single-threaded [`repeat_runs_with`].
pub fn repeat_runs(cfg: &RunConfig, data: &Dataset, runs: usize) -> Result<(Vec<RunOutcome>, Aggregate)> {
    repeat_runs_with(cfg, data, runs, &Sequential)
}
