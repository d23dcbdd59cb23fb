//! Run and experiment artifacts.
//!
//! Everything except the top-level `timing` object is a pure function of
//! the input file and the effective configuration, so two reports from the
//! same inputs compare equal once `timing` is dropped.

use std::fs;
use std::io::Write as _;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use ecwsa_core::{aggregate, Aggregate, IterationRecord, RunConfig, RunOutcome, RunReport};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::Loaded;

pub const RUN_FORMAT: &str = "ecwsa-run-report/1";
pub const EXPERIMENT_FORMAT: &str = "ecwsa-experiment/1";
pub const STD_CONVENTION: &str = "population (divide by runs)";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub path: String,
    pub name: String,
    pub sha256: String,
    pub features: usize,
    pub instances: usize,
    pub classes: usize,
    pub class_names: Vec<String>,
    pub label_column: usize,
    pub rejected_rows: Vec<usize>,
}

impl DatasetInfo {
    pub fn new(path: &str, loaded: &Loaded) -> Self {
        let d = &loaded.dataset;
        DatasetInfo {
            path: path.to_string(),
            name: d.name().to_string(),
            sha256: loaded.sha256.clone(),
            features: d.n_features(),
            instances: d.n_instances(),
            classes: d.n_classes(),
            class_names: d.class_names().to_vec(),
            label_column: loaded.label_column,
            rejected_rows: loaded.rejected_rows.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestSubset {
    pub features: Vec<usize>,
    pub feature_names: Vec<String>,
    pub selected_count: usize,
    pub selected_percent: f64,
    pub accuracy: f64,
    pub fitness: f64,
}

/// The only fields allowed to differ between identical runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub generated_at_unix: u64,
    pub wall_time_secs: f64,
}

impl Timing {
    pub fn now(wall_time_secs: f64) -> Self {
        Timing {
            generated_at_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
            wall_time_secs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFile {
    pub format: String,
    pub variant: String,
    pub config: RunConfig,
    pub dataset: DatasetInfo,
    pub evaluations: u64,
    pub best: BestSubset,
    pub trace: Vec<IterationRecord>,
    pub timing: Timing,
}

impl RunFile {
    pub fn new(variant: &str, config: &RunConfig, dataset: DatasetInfo, loaded: &Loaded, report: &RunReport) -> Self {
        let best = report.best_record();
        let features = report.best.selected_indices();
        let names = loaded.dataset.feature_names();
        RunFile {
            format: RUN_FORMAT.into(),
            variant: variant.into(),
            config: config.clone(),
            evaluations: report.evaluations,
            best: BestSubset {
                feature_names: features.iter().map(|&j| names[j].clone()).collect(),
                selected_count: best.selected_count,
                selected_percent: 100.0 * best.selected_count as f64 / dataset.features as f64,
                accuracy: best.accuracy,
                fitness: best.fitness,
                features,
            },
            dataset,
            trace: report.trace.clone(),
            timing: Timing::now(report.wall_time_secs.unwrap_or(0.0)),
        }
    }
}

/// One row of an aggregate table: a variant on a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub dataset: String,
    pub variant: String,
    #[serde(flatten)]
    pub stats: Aggregate,
}

/// All runs of one variant on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub dataset: DatasetInfo,
    pub variant: String,
    /// Base configuration; run `r` replaces the seed with its own.
    pub config: RunConfig,
    pub runs: Vec<RunOutcome>,
}

impl Cell {
    pub fn row(&self) -> Option<AggregateRow> {
        Some(AggregateRow {
            dataset: self.dataset.name.clone(),
            variant: self.variant.clone(),
            stats: aggregate(&self.runs)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentFile {
    pub format: String,
    pub std_convention: String,
    pub rows: Vec<AggregateRow>,
    pub cells: Vec<Cell>,
    pub timing: Timing,
}

impl ExperimentFile {
    pub fn new(cells: Vec<Cell>, wall_time_secs: f64) -> Self {
        let rows = cells.iter().filter_map(Cell::row).collect();
        ExperimentFile {
            format: EXPERIMENT_FORMAT.into(),
            std_convention: STD_CONVENTION.into(),
            rows,
            cells,
            timing: Timing::now(wall_time_secs),
        }
    }

    /// Recomputes the table from the stored per-run outcomes.
    pub fn rederive_rows(&self) -> Vec<AggregateRow> {
        self.cells.iter().filter_map(Cell::row).collect()
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| Error::Json {
        path: path.display().to_string(),
        source,
    })?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.display().to_string(),
        source,
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

/// `iteration,best_accuracy` rows.
pub fn convergence_csv(trace: &[IterationRecord]) -> String {
    let mut out = String::from("iteration,best_accuracy\n");
    for r in trace {
        out.push_str(&format!("{},{}\n", r.iteration, r.best_accuracy));
    }
    out
}

pub fn write_convergence(path: &Path, trace: &[IterationRecord]) -> Result<()> {
    write_text(path, &convergence_csv(trace))
}

pub const AGGREGATE_HEADER: &str = "dataset,variant,runs,min_accuracy,avg_accuracy,std_accuracy_population,max_accuracy,avg_selected_percent,avg_fitness";

pub fn aggregate_csv(rows: &[AggregateRow]) -> String {
    let mut out = String::from(AGGREGATE_HEADER);
    out.push('\n');
    for r in rows {
        let s = &r.stats;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.dataset,
            r.variant,
            s.runs,
            s.min_accuracy,
            s.avg_accuracy,
            s.std_accuracy,
            s.max_accuracy,
            s.avg_selected_percent,
            s.avg_fitness
        ));
    }
    out
}

pub fn write_aggregate_csv(path: &Path, rows: &[AggregateRow]) -> Result<()> {
    write_text(path, &aggregate_csv(rows))
}
