//! Embedded chaotic whale survival algorithm for feature selection.
//!
//! A population of whales, each a continuous position vector whose sign
//! pattern selects a feature subset, hunts for the subset that maximizes
//! KNN cross-validated accuracy while keeping the subset small. Three
//! mechanisms sit on top of the plain whale optimizer:
//!
//! * a chaotic map drives the choice between encircling and spiral moves
//!   ([`chaos`]);
//! * an mRMR filter score powers a cheap local search over set-algebra
//!   neighbours ([`mrmr`]);
//! * the population shrinks every iteration down to a fixed base size,
//!   dropping the least fit whales ([`engine`]).
//!
//! The crate is `no_std` with `alloc`. File formats, CLI, and the threaded
//! executor live in the companion `ecwsa` crate; parallelism reaches this
//! crate only through the [`engine::Executor`] trait.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod chaos;
pub mod dataset;
pub mod dynamics;
pub mod engine;
mod error;
pub mod model;
pub mod mrmr;
pub mod rng;
pub mod wrapper;

pub use chaos::{ChaosKind, ChaosParams, ChaosState};
pub use dataset::Dataset;
pub use engine::{
    aggregate, apply_death, check_inputs, repeat_runs, repeat_runs_with, run, run_on, run_seed, run_with,
    shrink_population, survival_schedule, Aggregate, Executor, RunOutcome, Sequential,
    SubsetEvaluator,
};
pub use error::{Error, Result};
pub use model::{FitnessRecord, IterationRecord, MoveCounts, RunConfig, RunReport, Whale};
pub use mrmr::{DiscretizedDataset, FeatureSet};
pub use wrapper::{wrapper_fitness, EvalContext};
