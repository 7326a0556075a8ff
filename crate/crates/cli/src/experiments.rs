//! Problem instances, solver presets and per-repeat metrics.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use blocc::linalg;
use blocc::maxmin::{MaxMinConfig, MaxMinMode};
use blocc::problems::{
    build_pedagogical, build_transport, parse_libsvm, LabeledData, NetworkSpec, Pedagogical,
    PedagogicalUpper, Svm, SvmDataset, Toy, Transport,
};
use blocc::solver::{default_inner_configs, solve, BloccConfig, SolveResult, StopReason};
use blocc::{BilevelOracle, PrimalDualPair};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{Experiment, Mode, RunConfig};
use crate::error::CliError;

/// A built problem; SVM instances differ per split, the others are shared.
pub enum Instance {
    Toy(Toy),
    Pedagogical(Pedagogical),
    Svm(Box<Svm>),
    Transport(Box<Transport>),
}

impl Instance {
    pub fn oracle(&self) -> &dyn BilevelOracle {
        match self {
            Instance::Toy(p) => p,
            Instance::Pedagogical(p) => p,
            Instance::Svm(p) => p.as_ref(),
            Instance::Transport(p) => p.as_ref(),
        }
    }
}

/// Inputs read once per run and shared by every repeat.
pub enum ProblemSource {
    Toy,
    Pedagogical,
    Svm { data: LabeledData, ridge: f64 },
    Transport(Box<Transport>),
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))
}

impl ProblemSource {
    pub fn load(problem: Experiment, run: &RunConfig) -> Result<Self, CliError> {
        match problem {
            Experiment::Toy => Ok(ProblemSource::Toy),
            Experiment::Pedagogical => Ok(ProblemSource::Pedagogical),
            Experiment::Svm => {
                let path = run
                    .dataset_path
                    .as_ref()
                    .ok_or_else(|| CliError::Config("svm needs dataset_path".into()))?;
                let data = parse_libsvm(&read_text(path)?)?;
                Ok(ProblemSource::Svm { data, ridge: run.ridge })
            }
            Experiment::Transport => {
                let path = run
                    .network_path
                    .as_ref()
                    .ok_or_else(|| CliError::Config("transport needs network_path".into()))?;
                let spec = NetworkSpec::parse(&read_text(path)?)?;
                Ok(ProblemSource::Transport(Box::new(build_transport(spec)?)))
            }
            Experiment::Gradcheck | Experiment::Sweep => Err(CliError::Config(format!(
                "{} is not a problem",
                problem.name()
            ))),
        }
    }

    pub fn kind(&self) -> Experiment {
        match self {
            ProblemSource::Toy => Experiment::Toy,
            ProblemSource::Pedagogical => Experiment::Pedagogical,
            ProblemSource::Svm { .. } => Experiment::Svm,
            ProblemSource::Transport(_) => Experiment::Transport,
        }
    }

    /// Instance for repeat seed `seed` (the SVM split depends on it).
    pub fn instance(&self, seed: u64) -> Result<Instance, CliError> {
        Ok(match self {
            ProblemSource::Toy => Instance::Toy(Toy),
            ProblemSource::Pedagogical => {
                Instance::Pedagogical(build_pedagogical(PedagogicalUpper::ShiftedSquare))
            }
            ProblemSource::Svm { data, ridge } => {
                let mut ds = SvmDataset::split(data, seed);
                ds.standardize();
                Instance::Svm(Box::new(blocc::problems::build_svm(&ds, *ridge)?))
            }
            ProblemSource::Transport(t) => Instance::Transport(t.clone()),
        })
    }
}

fn maxmin_mode(m: Mode) -> MaxMinMode {
    match m {
        Mode::Accelerated => MaxMinMode::Accelerated,
        Mode::SingleLoop => MaxMinMode::SingleLoop,
    }
}

/// Budget multiplier for the final tight `g`-side solve at `x_final`.
const FINAL_BUDGET_FACTOR: usize = 100;

/// Solver configuration for `problem` under the run's knobs.
///
/// `inner_tol = None` keeps the inner budgets fixed (no early stop), which
/// is what the sensitivity sweeps use.
pub fn solver_config(
    problem: Experiment,
    oracle: &dyn BilevelOracle,
    run: &RunConfig,
    inner_tol: Option<f64>,
) -> Result<BloccConfig, CliError> {
    let mode = maxmin_mode(run.mode);
    let tol = inner_tol.unwrap_or(0.0);
    let (mut g, mut f) = default_inner_configs(oracle, run.gamma, mode, run.inner_iters, run.ty, tol)?;
    let mut cfg = BloccConfig::new(run.gamma, run.eta, run.outer_iters, g, f);
    cfg.seed = run.seed;
    cfg.record_timing = !run.deterministic;
    match problem {
        Experiment::Toy => {
            cfg.outer_tol = if inner_tol.is_some() { 1e-9 } else { 0.0 };
        }
        Experiment::Svm => {
            // Scaled g-side steps are exact minimizations, so one y step per
            // dual step suffices; the F side spends its budget on y steps.
            g.inner_y_iters = 1;
            if mode == MaxMinMode::Accelerated {
                f.outer_iters = (run.inner_iters / run.ty).max(1);
            }
            cfg.maxmin_g = g;
            cfg.maxmin_f = f;
            cfg.scaled_y_steps = true;
            cfg.f_update_tol = Some(1e-5);
        }
        Experiment::Transport => {
            cfg.scaled_y_steps = true;
        }
        _ => {}
    }
    cfg.final_inner_solve = true;
    cfg.final_maxmin_g = Some(MaxMinConfig {
        outer_iters: cfg.maxmin_g.outer_iters * FINAL_BUDGET_FACTOR,
        tol: 1e-12,
        ..cfg.maxmin_g
    });
    Ok(cfg)
}

/// Uniform draw from the oracle's initialization box.
pub fn initial_point(oracle: &dyn BilevelOracle, rng: &mut ChaCha8Rng) -> Vec<f64> {
    oracle
        .init_box()
        .into_iter()
        .map(|(lo, hi)| if hi > lo { rng.gen_range(lo..hi) } else { lo })
        .collect()
}

/// Seed used by repeat `r`.
pub fn repeat_seed(base: u64, r: usize) -> u64 {
    base.wrapping_add(r as u64)
}

#[derive(Debug, Clone, Serialize)]
pub struct RepeatOutcome {
    pub repeat: usize,
    pub seed: u64,
    pub iterations: usize,
    pub stop_reason: String,
    pub x_final: Vec<f64>,
    /// Final values as recorded in the last trace row.
    pub last: BTreeMap<String, f64>,
    /// Metrics evaluated after the final inner solves.
    pub metrics: BTreeMap<String, f64>,
    #[serde(skip)]
    pub result: SolveResult,
}

fn stop_name(s: StopReason) -> &'static str {
    match s {
        StopReason::IterationLimit => "iteration-limit",
        StopReason::StepTolerance => "step-tolerance",
        StopReason::UpdateTolerance => "update-tolerance",
    }
}

fn last_row(r: &SolveResult) -> BTreeMap<String, f64> {
    let mut m = BTreeMap::new();
    if let Some(t) = r.trace.last() {
        m.insert("f_at_yF".into(), t.f_at_yf);
        m.insert("f_at_yg".into(), t.f_at_yg);
        m.insert("g_gap".into(), t.g_gap);
        m.insert("gen_grad_norm".into(), t.gen_grad_norm);
        m.insert("max_violation".into(), t.max_violation);
    }
    m
}

fn max_violation(oracle: &dyn BilevelOracle, x: &[f64], y: &[f64]) -> f64 {
    let r = oracle.gc(x, y);
    let m = oracle.num_ineq();
    blocc::problem::max_ineq_violation(&r, m).max(blocc::problem::max_eq_violation(&r, m))
}

pub fn metrics(instance: &Instance, r: &SolveResult) -> BTreeMap<String, f64> {
    let oracle = instance.oracle();
    let x = &r.x_final;
    let mut m = BTreeMap::new();
    m.insert("f_final".into(), oracle.f(x, &r.pd_g.y));
    m.insert("lower_gap".into(), linalg::dist(&r.pd_g.y, &r.pd_f.y));
    m.insert("violation_final".into(), max_violation(oracle, x, &r.pd_g.y));
    m.insert("avg_sq_gen_grad".into(), r.avg_sq_gen_grad);
    match instance {
        Instance::Toy(_) | Instance::Pedagogical(_) => {
            m.insert("x_final".into(), x[0]);
            m.insert("y_g".into(), r.pd_g.y[0]);
            m.insert("y_F".into(), r.pd_f.y[0]);
        }
        Instance::Svm(s) => {
            m.insert("test_accuracy".into(), s.test_accuracy(&r.pd_g.y));
            m.insert("val_accuracy".into(), s.val_accuracy(&r.pd_g.y));
            m.insert("test_accuracy_F".into(), s.test_accuracy(&r.pd_f.y));
            m.insert("val_loss".into(), s.val_loss(&r.pd_g.y));
        }
        Instance::Transport(t) => {
            m.insert("utility".into(), t.utility(x, &r.pd_g.y));
            m.insert("utility_F".into(), t.utility(x, &r.pd_f.y));
            m.insert("conservation_residual".into(), t.conservation_residual(x, &r.pd_g.y));
            m.insert("capacity_violation".into(), t.capacity_violation(x, &r.pd_g.y));
        }
    }
    m
}

/// One solve from a random start drawn with the repeat's seed.
pub fn run_repeat(
    source: &ProblemSource,
    run: &RunConfig,
    repeat: usize,
    inner_tol: Option<f64>,
) -> Result<RepeatOutcome, CliError> {
    let seed = repeat_seed(run.seed, repeat);
    let instance = source.instance(seed)?;
    let oracle = instance.oracle();
    let cfg = solver_config(source.kind(), oracle, run, inner_tol)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x0 = initial_point(oracle, &mut rng);
    let init = PrimalDualPair::projected_origin(oracle);
    let start = Instant::now();
    let result = solve(oracle, &cfg, &x0, &init, &init)?;
    let elapsed = start.elapsed().as_secs_f64();
    let mut metrics = metrics(&instance, &result);
    if !run.deterministic {
        metrics.insert("elapsed_s".into(), elapsed);
    }
    Ok(RepeatOutcome {
        repeat,
        seed,
        iterations: result.trace.len(),
        stop_reason: stop_name(result.stop_reason).into(),
        x_final: result.x_final.clone(),
        last: last_row(&result),
        metrics,
        result,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::PartialConfig;

    #[test]
    fn pedagogical_repeat_converges() {
        let run = RunConfig::resolve(Experiment::Pedagogical, PartialConfig::default()).unwrap();
        let src = ProblemSource::load(Experiment::Pedagogical, &run).unwrap();
        let out = run_repeat(&src, &run, 0, Some(1e-10)).unwrap();
        assert!((out.metrics["x_final"] - 1.0).abs() < 1e-3);
        assert!((out.metrics["y_g"] - 3.0).abs() < 1e-2);
    }

    #[test]
    fn repeat_seeds_offset() {
        assert_eq!(repeat_seed(7, 3), 10);
        let mut a = ChaCha8Rng::seed_from_u64(5);
        let mut b = ChaCha8Rng::seed_from_u64(5);
        assert_eq!(initial_point(&Toy, &mut a), initial_point(&Toy, &mut b));
    }

    #[test]
    fn svm_without_dataset_is_config_error() {
        let mut run = RunConfig::resolve(Experiment::Toy, PartialConfig::default()).unwrap();
        run.dataset_path = None;
        assert!(matches!(
            ProblemSource::load(Experiment::Svm, &run),
            Err(CliError::Config(_))
        ));
    }
}
