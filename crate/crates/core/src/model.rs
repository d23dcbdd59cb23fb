//! Shared domain types: whales, fitness records, run configuration, and
//! run output.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use crate::chaos::{ChaosKind, ChaosParams};
use crate::error::{Error, Result};

/// Positions are clipped to `[-POSITION_BOUND, POSITION_BOUND]` after every
/// move so the sign threshold stays reachable from both sides.
pub const POSITION_BOUND: f64 = 4.0;

/// A coordinate selects its feature iff `sigmoid(x) >= 0.5`, i.e. `x >= 0`.
#[inline]
pub fn binarize(x: f64) -> bool {
    x >= 0.0
}

#[inline]
pub(crate) fn clip(x: f64) -> f64 {
    x.clamp(-POSITION_BOUND, POSITION_BOUND)
}

/// Outcome of one wrapper evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FitnessRecord {
    pub fitness: f64,
    pub accuracy: f64,
    pub selected_count: usize,
}

/// A candidate feature subset.
///
/// The mask is always the binarization of the position and always selects
/// at least one feature.
#[derive(Debug, Clone, PartialEq)]
pub struct Whale {
    position: Vec<f64>,
    mask: Vec<bool>,
    fitness: Option<FitnessRecord>,
}

impl Whale {
    /// Builds a whale from a position, repairing an empty subset by forcing
    /// one uniformly chosen coordinate to `+1`.
    pub fn new<R: Rng + ?Sized>(mut position: Vec<f64>, rng: &mut R) -> Result<Self> {
        if position.is_empty() {
            return Err(Error::arg("whale position must be non-empty"));
        }
        let mut mask: Vec<bool> = position.iter().copied().map(binarize).collect();
        if !mask.iter().any(|&b| b) {
            let j = rng.random_range(0..position.len());
            position[j] = 1.0;
            mask[j] = true;
        }
        Ok(Whale {
            position,
            mask,
            fitness: None,
        })
    }

    /// Builds a whale whose position is `+1` on selected features and `-1`
    /// elsewhere. The mask must select at least one feature.
    pub fn from_mask(mask: &[bool]) -> Result<Self> {
        if mask.is_empty() || !mask.iter().any(|&b| b) {
            return Err(Error::arg("mask must select at least one feature"));
        }
        Ok(Whale {
            position: mask.iter().map(|&b| if b { 1.0 } else { -1.0 }).collect(),
            mask: mask.to_vec(),
            fitness: None,
        })
    }

    pub fn position(&self) -> &[f64] {
        &self.position
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn dim(&self) -> usize {
        self.position.len()
    }

    pub fn fitness(&self) -> Option<&FitnessRecord> {
        self.fitness.as_ref()
    }

    /// Fitness value, or negative infinity for an unscored whale.
    pub fn fitness_value(&self) -> f64 {
        self.fitness.map_or(f64::NEG_INFINITY, |f| f.fitness)
    }

    pub fn with_fitness(mut self, record: FitnessRecord) -> Self {
        self.fitness = Some(record);
        self
    }

    pub fn selected_count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn selected_indices(&self) -> Vec<usize> {
        self.mask
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect()
    }
}

/// Every tunable of a run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RunConfig {
    pub initial_population: usize,
    pub max_iterations: usize,
    /// Fraction of the population that dies each iteration; survival ratio
    /// is `1 - death`.
    pub death: f64,
    /// Floor the population never shrinks below.
    pub base: usize,
    pub alpha: f64,
    pub beta: f64,
    pub spiral_b: f64,
    pub chaos_map: ChaosKind,
    pub chaos_params: ChaosParams,
    pub chaos_initial_p: f64,
    pub knn_k: usize,
    pub cv_folds: usize,
    pub seed: u64,
    pub local_search_enabled: bool,
    pub mi_bins: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            initial_population: 80,
            max_iterations: 25,
            death: 0.1,
            base: 15,
            alpha: 0.99,
            beta: 0.01,
            spiral_b: 1.0,
            chaos_map: ChaosKind::Circular,
            chaos_params: ChaosParams::default(),
            chaos_initial_p: 0.3,
            knn_k: 5,
            cv_folds: 5,
            seed: 0,
            local_search_enabled: true,
            mi_bins: 10,
        }
    }
}

const SUM_TOLERANCE: f64 = 1e-9;

impl RunConfig {
    /// Checks every invariant and reports all violations, not just the
    /// first one.
    pub fn validate(&self) -> core::result::Result<(), Vec<String>> {
        let mut problems = Vec::new();
        if self.initial_population < 3 {
            problems.push(String::from("population must allow local search (≥3)"));
        }
        if self.max_iterations < 1 {
            problems.push(String::from("max_iterations must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.death) {
            problems.push(format!("death must lie in [0, 1), got {}", self.death));
        }
        if self.base < 3 {
            problems.push(format!("base must be at least 3, got {}", self.base));
        }
        if self.base > self.initial_population {
            problems.push(format!(
                "base ({}) must not exceed the initial population ({})",
                self.base, self.initial_population
            ));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            problems.push(format!("alpha must lie in [0, 1], got {}", self.alpha));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            problems.push(format!("beta must lie in [0, 1], got {}", self.beta));
        }
        if !((self.alpha + self.beta) - 1.0).abs().le(&SUM_TOLERANCE) {
            problems.push(String::from("alpha+beta must equal 1"));
        }
        if !(self.spiral_b > 0.0 && self.spiral_b.is_finite()) {
            problems.push(format!("spiral_b must be positive, got {}", self.spiral_b));
        }
        if !(0.0..=1.0).contains(&self.chaos_initial_p) {
            problems.push(format!(
                "chaos_initial_p must lie in [0, 1], got {}",
                self.chaos_initial_p
            ));
        }
        if let Err(msg) = self.chaos_params.validate() {
            problems.push(msg);
        }
        if self.knn_k < 1 {
            problems.push(String::from("knn_k must be at least 1"));
        }
        if self.cv_folds < 2 {
            problems.push(format!("cv_folds must be at least 2, got {}", self.cv_folds));
        }
        if self.mi_bins < 2 {
            problems.push(format!("mi_bins must be at least 2, got {}", self.mi_bins));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(problems)
        }
    }
}

/// Counts of the movement branches taken in one iteration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MoveCounts {
    pub exploit: usize,
    pub explore: usize,
    pub spiral: usize,
}

/// One row of the convergence trace, recorded after the evaluation phase.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IterationRecord {
    pub iteration: usize,
    pub population_size: usize,
    pub best_fitness: f64,
    pub best_accuracy: f64,
    pub best_selected_count: usize,
    pub moves: MoveCounts,
    /// Whales replaced by the mRMR local search; `None` when the search was
    /// disabled or skipped for lack of whales.
    pub local_search_replacements: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub trace: Vec<IterationRecord>,
    /// Global best whale (the prey) at the end of the run.
    pub best: Whale,
    pub evaluations: u64,
    /// Filled in by callers that have a clock.
    pub wall_time_secs: Option<f64>,
}

impl RunReport {
    pub fn best_record(&self) -> &FitnessRecord {
        self.best
            .fitness()
            .expect("prey is always a scored whale")
    }
}
