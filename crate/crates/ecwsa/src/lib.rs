//! File formats, reports, a rayon executor, and the command-line front end
//! for [`ecwsa_core`].

pub mod cli;
mod error;
pub mod exec;
pub mod io;
pub mod report;
pub mod runner;
pub mod variant;

pub use ecwsa_core as core;
pub use error::{Error, Result};
pub use exec::RayonExecutor;
pub use runner::{repeat_dataset, run_dataset, Memoized};
pub use io::{load_csv, parse_csv, HeaderMode, LabelColumn, LoadOptions, Loaded};
pub use variant::{resolve, Overrides, Variant};
