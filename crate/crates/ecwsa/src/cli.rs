//! The `ecwsa` command line.

use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use ecwsa_core::{ChaosKind, ChaosParams, ChaosState, Dataset, RunConfig};

use crate::error::{Error, Result};
use crate::exec::RayonExecutor;
use crate::io::{load_csv, HeaderMode, LabelColumn, LoadOptions, Loaded};
use crate::report::{
    aggregate_csv, write_aggregate_csv, write_convergence, write_json, Cell, DatasetInfo, ExperimentFile, RunFile,
};
use crate::runner::{repeat_dataset, run_dataset};
use crate::variant::{resolve, Overrides, Variant};

#[derive(Debug, Parser)]
#[command(name = "ecwsa", version, about = "Chaotic whale survival feature selection")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the optimizer once and write report.json and convergence.csv.
    Run(RunArgs),
    /// Repeat runs over datasets and variants and write aggregate tables.
    Experiment(ExperimentArgs),
    /// Print a chaotic map orbit as `step,p` rows.
    ChaosOrbit(OrbitArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Label column: zero-based index, header name, or "last".
    #[arg(long = "label-col", default_value = "last")]
    pub label_col: LabelColumn,
    /// Header row handling: auto, yes or no.
    #[arg(long, default_value = "auto")]
    pub header: HeaderMode,
}

#[derive(Debug, Args)]
pub struct TuningArgs {
    /// Initial number of whales.
    #[arg(long)]
    pub pop: Option<usize>,
    #[arg(long)]
    pub iters: Option<usize>,
    /// Fraction of whales removed each iteration.
    #[arg(long)]
    pub death: Option<f64>,
    /// Population floor.
    #[arg(long)]
    pub base: Option<usize>,
    /// Weight on accuracy in the fitness.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Weight on the fraction of unselected features.
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long = "knn-k")]
    pub knn_k: Option<usize>,
    /// Cross-validation folds.
    #[arg(long)]
    pub folds: Option<usize>,
    /// Equal-width bins for mutual information.
    #[arg(long = "mi-bins")]
    pub mi_bins: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Disable the mRMR local search (custom variant only).
    #[arg(long = "no-local-search")]
    pub no_local_search: bool,
    /// Chaotic map (custom variant only).
    #[arg(long)]
    pub chaos: Option<ChaosKind>,
    /// Starting point of the chaotic map.
    #[arg(long = "chaos-init")]
    pub chaos_init: Option<f64>,
}

impl TuningArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            population: self.pop,
            iterations: self.iters,
            death: self.death,
            base: self.base,
            alpha: self.alpha,
            beta: self.beta,
            knn_k: self.knn_k,
            folds: self.folds,
            mi_bins: self.mi_bins,
            seed: self.seed,
            no_local_search: self.no_local_search,
            chaos: self.chaos,
            chaos_init: self.chaos_init,
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, default_value = "ecwsa-1")]
    pub variant: Variant,
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub tuning: TuningArgs,
    /// Output directory, created if needed.
    #[arg(long, default_value = "ecwsa-out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Dataset file; repeat for several datasets.
    #[arg(long, required = true)]
    pub dataset: Vec<PathBuf>,
    /// Variant; repeat for several variants.
    #[arg(long, default_value = "ecwsa-1")]
    pub variant: Vec<Variant>,
    /// Independent runs per dataset and variant.
    #[arg(long, default_value_t = 20)]
    pub runs: usize,
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub tuning: TuningArgs,
    #[arg(long, default_value = "ecwsa-out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct OrbitArgs {
    #[arg(long, alias = "chaos")]
    pub map: ChaosKind,
    #[arg(long = "chaos-init", alias = "initial-p", default_value_t = 0.3)]
    pub chaos_init: f64,
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    /// Seed for the uniform-random map.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Parses arguments and runs the chosen command. Help and version requests
/// print and return `Ok`.
pub fn main_with<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return Ok(());
        }
        Err(e) => return Err(Error::InvalidOptions(e.to_string().trim_end().to_string())),
    };
    match cli.command {
        Command::Run(a) => cmd_run(&a),
        Command::Experiment(a) => cmd_experiment(&a),
        Command::ChaosOrbit(a) => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(chaos_orbit_csv(&a)?.as_bytes())
                .map_err(|e| Error::io(Path::new("<stdout>"), e))
        }
    }
}

fn load(path: &Path, input: &InputArgs) -> Result<(Loaded, Dataset)> {
    let opts = LoadOptions {
        header: input.header,
        label: input.label_col.clone(),
        name: None,
    };
    let loaded = load_csv(path, &opts)?;
    let normalized = loaded.dataset.clone().min_max_normalize();
    Ok((loaded, normalized))
}

fn config_for(variant: Variant, tuning: &TuningArgs) -> Result<RunConfig> {
    resolve(variant, &tuning.overrides()).map_err(Error::Config)
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub fn cmd_run(a: &RunArgs) -> Result<()> {
    let cfg = config_for(a.variant, &a.tuning)?;
    let (loaded, data) = load(&a.dataset, &a.input)?;
    let exec = RayonExecutor::from_env()?;
    create_dir(&a.out)?;

    let start = Instant::now();
    let mut report = run_dataset(&cfg, &data, &exec, &mut |_| {})?;
    report.wall_time_secs = Some(start.elapsed().as_secs_f64());

    let info = DatasetInfo::new(&a.dataset.display().to_string(), &loaded);
    let file = RunFile::new(a.variant.as_str(), &cfg, info, &loaded, &report);
    write_json(&a.out.join("report.json"), &file)?;
    write_convergence(&a.out.join("convergence.csv"), &report.trace)?;
    println!(
        "{} [{}]: accuracy {:.4}, {} of {} features ({:.1}%), {} evaluations, features {:?}",
        file.dataset.name,
        a.variant,
        file.best.accuracy,
        file.best.selected_count,
        file.dataset.features,
        file.best.selected_percent,
        file.evaluations,
        file.best.features
    );
    Ok(())
}

pub fn cmd_experiment(a: &ExperimentArgs) -> Result<()> {
    if a.runs == 0 {
        return Err(Error::InvalidOptions("--runs must be at least 1".into()));
    }
    let mut variants = Vec::new();
    for &v in &a.variant {
        if !variants.contains(&v) {
            variants.push(v);
        }
    }
    let configs = variants
        .iter()
        .map(|&v| config_for(v, &a.tuning).map(|c| (v, c)))
        .collect::<Result<Vec<_>>>()?;
    let datasets = a
        .dataset
        .iter()
        .map(|p| load(p, &a.input).map(|(l, d)| (p, l, d)))
        .collect::<Result<Vec<_>>>()?;
    let exec = RayonExecutor::from_env()?;
    create_dir(&a.out)?;

    let start = Instant::now();
    let mut cells = Vec::new();
    for (path, loaded, data) in &datasets {
        for (variant, cfg) in &configs {
            let runs = repeat_dataset(cfg, data, a.runs, &exec)?;
            cells.push(Cell {
                dataset: DatasetInfo::new(&path.display().to_string(), loaded),
                variant: variant.as_str().into(),
                config: cfg.clone(),
                runs,
            });
        }
    }
    let file = ExperimentFile::new(cells, start.elapsed().as_secs_f64());
    write_json(&a.out.join("aggregate.json"), &file)?;
    write_aggregate_csv(&a.out.join("aggregate.csv"), &file.rows)?;
    print!("{}", aggregate_csv(&file.rows));
    Ok(())
}

pub fn chaos_orbit_csv(a: &OrbitArgs) -> Result<String> {
    let mut state = ChaosState::new(a.map, ChaosParams::default(), a.chaos_init, a.seed)?;
    let orbit = state.orbit(a.steps)?;
    let mut out = String::from("step,p\n");
    for (i, p) in orbit.iter().enumerate() {
        out.push_str(&format!("{},{}\n", i + 1, p));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn orbit(map: ChaosKind, p: f64, steps: usize) -> Result<String> {
        chaos_orbit_csv(&OrbitArgs {
            map,
            chaos_init: p,
            steps,
            seed: 0,
        })
    }

    #[test]
    fn tent_first_step() {
        let csv = orbit(ChaosKind::Tent, 0.3, 1).unwrap();
        let row = csv.lines().nth(1).unwrap();
        assert!(row.starts_with("1,0.428571"), "{row}");
    }

    #[test]
    fn logistic_from_zero_stays_zero() {
        let csv = orbit(ChaosKind::Logistic, 0.0, 5).unwrap();
        let rows: Vec<&str> = csv.lines().skip(1).collect();
        assert_eq!(rows, ["1,0", "2,0", "3,0", "4,0", "5,0"]);
    }

    #[test]
    fn default_initial_point() {
        let cli = Cli::try_parse_from(["ecwsa", "chaos-orbit", "--map", "tent"]).unwrap();
        match cli.command {
            Command::ChaosOrbit(a) => assert_eq!(a.chaos_init, 0.3),
            _ => unreachable!(),
        }
    }

    #[test]
    fn bad_map_is_an_error() {
        assert!(main_with(["ecwsa", "chaos-orbit", "--map", "sine"]).is_err());
    }

    #[test]
    fn out_of_range_start_is_an_error() {
        assert!(orbit(ChaosKind::Tent, 1.5, 3).is_err());
    }
}
