//! Run configuration: flat `key = value` files merged with command-line flags.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Toy,
    Pedagogical,
    Svm,
    Transport,
    Gradcheck,
    Sweep,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Toy => "toy",
            Experiment::Pedagogical => "pedagogical",
            Experiment::Svm => "svm",
            Experiment::Transport => "transport",
            Experiment::Gradcheck => "gradcheck",
            Experiment::Sweep => "sweep",
        }
    }
}

impl FromStr for Experiment {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "toy" => Ok(Experiment::Toy),
            "pedagogical" => Ok(Experiment::Pedagogical),
            "svm" => Ok(Experiment::Svm),
            "transport" => Ok(Experiment::Transport),
            "gradcheck" => Ok(Experiment::Gradcheck),
            "sweep" => Ok(Experiment::Sweep),
            other => Err(format!("unknown experiment '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Accelerated,
    SingleLoop,
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "accelerated" => Ok(Mode::Accelerated),
            "single-loop" => Ok(Mode::SingleLoop),
            other => Err(format!("unknown mode '{other}' (expected accelerated or single-loop)")),
        }
    }
}

/// Values a config file or flags may set. `None` means "not given".
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PartialConfig {
    pub gamma: Option<f64>,
    pub eta: Option<f64>,
    pub outer_iters: Option<usize>,
    pub inner_iters: Option<usize>,
    pub ty: Option<usize>,
    pub mode: Option<Mode>,
    pub seed: Option<u64>,
    pub dataset_path: Option<PathBuf>,
    pub network_path: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub repeats: Option<usize>,
    pub target: Option<Experiment>,
    pub gammas: Option<Vec<f64>>,
    pub etas: Option<Vec<f64>>,
    pub ridge: Option<f64>,
    pub deterministic: Option<bool>,
}

pub const VALID_KEYS: &[&str] = &[
    "gamma",
    "eta",
    "outer_iters",
    "inner_iters",
    "ty",
    "mode",
    "seed",
    "dataset_path",
    "network_path",
    "output_dir",
    "repeats",
    "experiment",
    "gammas",
    "etas",
    "ridge",
    "deterministic",
];

fn parse_value<T: FromStr>(key: &str, raw: &str, line: usize) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    raw.parse::<T>()
        .map_err(|e| CliError::Config(format!("line {line}: bad value for {key}: {e}")))
}

fn parse_list(key: &str, raw: &str, line: usize) -> Result<Vec<f64>, CliError> {
    raw.split(',')
        .map(|s| parse_value::<f64>(key, s.trim(), line))
        .collect()
}

impl PartialConfig {
    /// Parse `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut c = PartialConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {line}: expected key = value")))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "gamma" => c.gamma = Some(parse_value(key, value, line)?),
                "eta" => c.eta = Some(parse_value(key, value, line)?),
                "outer_iters" => c.outer_iters = Some(parse_value(key, value, line)?),
                "inner_iters" => c.inner_iters = Some(parse_value(key, value, line)?),
                "ty" => c.ty = Some(parse_value(key, value, line)?),
                "mode" => c.mode = Some(parse_value(key, value, line)?),
                "seed" => c.seed = Some(parse_value(key, value, line)?),
                "dataset_path" => c.dataset_path = Some(PathBuf::from(value)),
                "network_path" => c.network_path = Some(PathBuf::from(value)),
                "output_dir" => c.output_dir = Some(PathBuf::from(value)),
                "repeats" => c.repeats = Some(parse_value(key, value, line)?),
                "experiment" => c.target = Some(parse_value(key, value, line)?),
                "gammas" => c.gammas = Some(parse_list(key, value, line)?),
                "etas" => c.etas = Some(parse_list(key, value, line)?),
                "ridge" => c.ridge = Some(parse_value(key, value, line)?),
                "deterministic" => c.deterministic = Some(parse_value(key, value, line)?),
                other => {
                    return Err(CliError::Config(format!(
                        "line {line}: unknown key '{other}'; valid keys: {}",
                        VALID_KEYS.join(", ")
                    )))
                }
            }
        }
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Fields set in `over` replace those in `self`.
    pub fn merge(self, over: PartialConfig) -> PartialConfig {
        PartialConfig {
            gamma: over.gamma.or(self.gamma),
            eta: over.eta.or(self.eta),
            outer_iters: over.outer_iters.or(self.outer_iters),
            inner_iters: over.inner_iters.or(self.inner_iters),
            ty: over.ty.or(self.ty),
            mode: over.mode.or(self.mode),
            seed: over.seed.or(self.seed),
            dataset_path: over.dataset_path.or(self.dataset_path),
            network_path: over.network_path.or(self.network_path),
            output_dir: over.output_dir.or(self.output_dir),
            repeats: over.repeats.or(self.repeats),
            target: over.target.or(self.target),
            gammas: over.gammas.or(self.gammas),
            etas: over.etas.or(self.etas),
            ridge: over.ridge.or(self.ridge),
            deterministic: over.deterministic.or(self.deterministic),
        }
    }
}

/// A fully resolved run configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub gamma: f64,
    pub eta: f64,
    pub outer_iters: usize,
    pub inner_iters: usize,
    pub ty: usize,
    pub mode: Mode,
    pub seed: u64,
    pub dataset_path: Option<PathBuf>,
    pub network_path: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub repeats: usize,
    /// Experiment swept or checked by `sweep` and `gradcheck`.
    pub target: Option<Experiment>,
    pub gammas: Vec<f64>,
    pub etas: Vec<f64>,
    pub ridge: f64,
    pub deterministic: bool,
}

struct Defaults {
    gamma: f64,
    eta: f64,
    outer_iters: usize,
    inner_iters: usize,
    ty: usize,
    repeats: usize,
}

fn defaults_for(e: Experiment) -> Defaults {
    match e {
        Experiment::Toy => Defaults {
            gamma: 5.0,
            eta: 0.01,
            outer_iters: 3000,
            inner_iters: 2000,
            ty: 10,
            repeats: 1,
        },
        Experiment::Pedagogical | Experiment::Gradcheck => Defaults {
            gamma: 10.0,
            eta: 0.05,
            outer_iters: 400,
            inner_iters: 300,
            ty: 20,
            repeats: 1,
        },
        Experiment::Svm => Defaults {
            gamma: 12.0,
            eta: 0.01,
            outer_iters: 2000,
            inner_iters: 2000,
            ty: 10,
            repeats: 1,
        },
        Experiment::Transport => Defaults {
            gamma: 3.0,
            eta: 1.6e-4,
            outer_iters: 5000,
            inner_iters: 2000,
            ty: 5,
            repeats: 1,
        },
        Experiment::Sweep => Defaults {
            gamma: 1.0,
            eta: 0.01,
            outer_iters: 300,
            inner_iters: 200,
            ty: 10,
            repeats: 40,
        },
    }
}

impl RunConfig {
    /// Fill unset fields from the experiment's defaults and validate.
    pub fn resolve(experiment: Experiment, p: PartialConfig) -> Result<Self, CliError> {
        let d = defaults_for(experiment);
        let cfg = RunConfig {
            experiment,
            gamma: p.gamma.unwrap_or(d.gamma),
            eta: p.eta.unwrap_or(d.eta),
            outer_iters: p.outer_iters.unwrap_or(d.outer_iters),
            inner_iters: p.inner_iters.unwrap_or(d.inner_iters),
            ty: p.ty.unwrap_or(d.ty),
            mode: p.mode.unwrap_or(Mode::Accelerated),
            seed: p.seed.unwrap_or(0),
            dataset_path: p.dataset_path,
            network_path: p.network_path,
            output_dir: p.output_dir.unwrap_or_else(|| PathBuf::from("out")),
            repeats: p.repeats.unwrap_or(d.repeats),
            target: p.target,
            gammas: p.gammas.unwrap_or_else(|| vec![0.001, 0.01, 0.1, 1.0]),
            etas: p.etas.unwrap_or_else(|| vec![0.001, 0.01, 0.1, 1.0, 10.0]),
            ridge: p.ridge.unwrap_or(1e-3),
            deterministic: p.deterministic.unwrap_or(false),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.repeats < 1 {
            return bad("repeats must be at least 1".into());
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return bad(format!("gamma must be positive, got {}", self.gamma));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return bad(format!("eta must be positive, got {}", self.eta));
        }
        if self.inner_iters == 0 || self.ty == 0 {
            return bad("inner_iters and ty must be positive".into());
        }
        if !(self.ridge >= 0.0) {
            return bad(format!("ridge must be nonnegative, got {}", self.ridge));
        }
        let problem = match self.experiment {
            Experiment::Gradcheck | Experiment::Sweep => self.target,
            e => Some(e),
        };
        if problem == Some(Experiment::Svm) && self.dataset_path.is_none() {
            return bad("svm needs dataset_path".into());
        }
        if problem == Some(Experiment::Transport) && self.network_path.is_none() {
            return bad("transport needs network_path".into());
        }
        match (self.experiment, self.target) {
            (Experiment::Sweep, Some(Experiment::Toy | Experiment::Transport))
            | (Experiment::Sweep, None) => {}
            (Experiment::Sweep, Some(t)) => {
                return bad(format!("sweep supports toy and transport, not {}", t.name()))
            }
            (Experiment::Gradcheck, Some(Experiment::Gradcheck | Experiment::Sweep)) => {
                return bad("gradcheck target must be a problem".into())
            }
            _ => {}
        }
        if self.experiment == Experiment::Sweep {
            if self.gammas.is_empty() || self.etas.is_empty() {
                return bad("sweep needs nonempty gammas and etas".into());
            }
            if self.gammas.iter().chain(&self.etas).any(|v| !(*v > 0.0 && v.is_finite())) {
                return bad("sweep gammas and etas must be positive".into());
            }
        }
        Ok(())
    }

    /// Problem targeted by `sweep` / `gradcheck`.
    pub fn target_or(&self, fallback: Experiment) -> Experiment {
        self.target.unwrap_or(fallback)
    }
}
