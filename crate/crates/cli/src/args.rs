//! Command-line surface and dispatch.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{Experiment, Mode, PartialConfig, RunConfig};
use crate::error::CliError;
use crate::gradcheck::{render, run_gradcheck};
use crate::run::{run_problem, run_sweep, sweep_table, write_file};

#[derive(Debug, Parser)]
#[command(name = "blocc", version, about = "Bilevel optimization with coupled lower-level constraints")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Nonconvex toy problem from random starts.
    Toy(Flags),
    /// One-dimensional instance with v(x) = x².
    Pedagogical(Flags),
    /// SVM hyperparameter selection on a LIBSVM dataset.
    Svm(Flags),
    /// Transportation network design.
    Transport(Flags),
    /// Derivative audit and value-function gradient check.
    Gradcheck(Flags),
    /// γ × η sensitivity grid.
    Sweep(Flags),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Flat `key = value` config file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub outer_iters: Option<usize>,
    #[arg(long)]
    pub inner_iters: Option<usize>,
    /// Primal steps per dual step in accelerated mode.
    #[arg(long)]
    pub ty: Option<usize>,
    /// accelerated | single-loop
    #[arg(long)]
    pub mode: Option<Mode>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long = "dataset")]
    pub dataset_path: Option<PathBuf>,
    #[arg(long = "network")]
    pub network_path: Option<PathBuf>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    #[arg(long)]
    pub repeats: Option<usize>,
    /// Problem targeted by `sweep` and `gradcheck`.
    #[arg(long)]
    pub experiment: Option<Experiment>,
    #[arg(long, value_delimiter = ',')]
    pub gammas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub etas: Option<Vec<f64>>,
    #[arg(long)]
    pub ridge: Option<f64>,
    /// Zero wall-clock fields so artifacts are bitwise reproducible.
    #[arg(long)]
    pub deterministic: bool,
}

impl Flags {
    fn partial(&self) -> PartialConfig {
        PartialConfig {
            gamma: self.gamma,
            eta: self.eta,
            outer_iters: self.outer_iters,
            inner_iters: self.inner_iters,
            ty: self.ty,
            mode: self.mode,
            seed: self.seed,
            dataset_path: self.dataset_path.clone(),
            network_path: self.network_path.clone(),
            output_dir: self.output_dir.clone(),
            repeats: self.repeats,
            target: self.experiment,
            gammas: self.gammas.clone(),
            etas: self.etas.clone(),
            ridge: self.ridge,
            deterministic: self.deterministic.then_some(true),
        }
    }

    /// File values first, then flags on top.
    pub fn resolve(&self, experiment: Experiment) -> Result<RunConfig, CliError> {
        let base = match &self.config {
            Some(p) => PartialConfig::from_file(p)?,
            None => PartialConfig::default(),
        };
        RunConfig::resolve(experiment, base.merge(self.partial()))
    }
}

impl Command {
    pub fn split(&self) -> (Experiment, &Flags) {
        match self {
            Command::Toy(f) => (Experiment::Toy, f),
            Command::Pedagogical(f) => (Experiment::Pedagogical, f),
            Command::Svm(f) => (Experiment::Svm, f),
            Command::Transport(f) => (Experiment::Transport, f),
            Command::Gradcheck(f) => (Experiment::Gradcheck, f),
            Command::Sweep(f) => (Experiment::Sweep, f),
        }
    }
}

/// Runs the command and returns the report printed on success.
pub fn execute(cli: &Cli) -> Result<String, CliError> {
    let (experiment, flags) = cli.command.split();
    let run = flags.resolve(experiment)?;
    log::info!("{} with {:?}", experiment.name(), run);
    match experiment {
        Experiment::Gradcheck => {
            let report = run_gradcheck(&run)?;
            let json = serde_json::to_string_pretty(&report).expect("report serializes");
            write_file(&run.output_dir, "gradcheck.json", &(json + "\n"))?;
            let text = render(&report);
            if report.passed {
                Ok(text)
            } else {
                Err(CliError::CheckFailed(text.lines().next().unwrap_or("").to_string()))
            }
        }
        Experiment::Sweep => {
            let cells = run_sweep(&run)?;
            Ok(format!("lower-level gap mean ± std\n{}", sweep_table(&run, &cells)))
        }
        problem => {
            let summary = run_problem(problem, &run)?;
            Ok(format!(
                "{} finished; metrics {}\nartifacts in {}\n",
                problem.name(),
                summary["metrics"],
                run.output_dir.display()
            ))
        }
    }
}
