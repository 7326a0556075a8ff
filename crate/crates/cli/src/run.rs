//! Experiment driver: repeats, trace/summary artifacts and the sweep grid.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Experiment, RunConfig};
use crate::error::CliError;
use crate::experiments::{run_repeat, ProblemSource, RepeatOutcome};

pub const TRACE_HEADER: &str = "repeat,iter,f_at_yF,f_at_yg,g_gap,gen_grad_norm,max_violation,wall_time_s";

/// Inner early-stop tolerance for single experiments (sweeps use fixed budgets).
pub const INNER_TOL: f64 = 1e-10;

/// Toy cluster merge radius for `x_final`.
pub const CLUSTER_RADIUS: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Sample standard deviation (`n − 1` denominator, 0 for one value).
    pub std: f64,
}

pub fn mean_std(values: &[f64]) -> MeanStd {
    let n = values.len() as f64;
    if values.is_empty() {
        return MeanStd { mean: f64::NAN, std: f64::NAN };
    }
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    MeanStd { mean, std }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cluster {
    pub center: f64,
    pub count: usize,
}

/// Greedy 1-D clustering: sorted values join the current cluster while
/// within `radius` of its running mean.
pub fn cluster_1d(values: &[f64], radius: f64) -> Vec<Cluster> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut out: Vec<Cluster> = Vec::new();
    for v in sorted {
        match out.last_mut() {
            Some(c) if (v - c.center).abs() <= radius => {
                c.center = (c.center * c.count as f64 + v) / (c.count as f64 + 1.0);
                c.count += 1;
            }
            _ => out.push(Cluster { center: v, count: 1 }),
        }
    }
    out
}

/// Runs `run.repeats` solves, in parallel over repeats, returned in order.
pub fn run_repeats(
    source: &ProblemSource,
    run: &RunConfig,
    inner_tol: Option<f64>,
) -> Result<Vec<RepeatOutcome>, CliError> {
    (0..run.repeats)
        .into_par_iter()
        .map(|r| run_repeat(source, run, r, inner_tol))
        .collect()
}

pub fn trace_csv(outcomes: &[RepeatOutcome]) -> String {
    let mut s = String::from(TRACE_HEADER);
    s.push('\n');
    for o in outcomes {
        for t in &o.result.trace {
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                o.repeat, t.iter, t.f_at_yf, t.f_at_yg, t.g_gap, t.gen_grad_norm, t.max_violation, t.wall_time_s
            ));
        }
    }
    s
}

/// Mean/std per key across repeats; keys missing from any repeat are skipped.
fn aggregate<'a>(maps: impl Iterator<Item = &'a BTreeMap<String, f64>> + Clone) -> BTreeMap<String, MeanStd> {
    let mut out = BTreeMap::new();
    let Some(first) = maps.clone().next() else {
        return out;
    };
    for key in first.keys() {
        let vals: Option<Vec<f64>> = maps.clone().map(|m| m.get(key).copied()).collect();
        if let Some(v) = vals {
            out.insert(key.clone(), mean_std(&v));
        }
    }
    out
}

pub fn summary_json(run: &RunConfig, problem: Experiment, outcomes: &[RepeatOutcome]) -> Value {
    let mut summary = json!({
        "experiment": problem.name(),
        "config": run,
        "repeats": outcomes,
        "last_row": aggregate(outcomes.iter().map(|o| &o.last)),
        "metrics": aggregate(outcomes.iter().map(|o| &o.metrics)),
    });
    if problem == Experiment::Toy {
        let xs: Vec<f64> = outcomes.iter().map(|o| o.x_final[0]).collect();
        summary["x_final_clusters"] = json!(cluster_1d(&xs, CLUSTER_RADIUS));
    }
    summary
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    let mut f = fs::File::create(&path).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    f.write_all(contents.as_bytes())
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("summary values serialize");
    s.push('\n');
    s
}

/// Runs a single problem experiment and writes `trace.csv` and `summary.json`.
pub fn run_problem(problem: Experiment, run: &RunConfig) -> Result<Value, CliError> {
    let source = ProblemSource::load(problem, run)?;
    let outcomes = run_repeats(&source, run, Some(INNER_TOL))?;
    let summary = summary_json(run, problem, &outcomes);
    write_file(&run.output_dir, "trace.csv", &trace_csv(&outcomes))?;
    write_file(&run.output_dir, "summary.json", &pretty(&summary))?;
    Ok(summary)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepCell {
    pub gamma: f64,
    pub eta: f64,
    pub lower_gap: MeanStd,
    pub f_at_yg: MeanStd,
    pub g_gap: MeanStd,
}

/// γ × η grid with fixed inner budgets; every cell runs `run.repeats` solves
/// with the same seeds. Writes `sweep.csv` and `summary.json`.
pub fn run_sweep(run: &RunConfig) -> Result<Vec<SweepCell>, CliError> {
    let target = run.target_or(Experiment::Toy);
    let source = ProblemSource::load(target, run)?;
    let cells: Vec<(f64, f64)> = run
        .gammas
        .iter()
        .flat_map(|&g| run.etas.iter().map(move |&e| (g, e)))
        .collect();
    let results: Vec<SweepCell> = cells
        .par_iter()
        .map(|&(gamma, eta)| {
            let cell_run = RunConfig {
                gamma,
                eta,
                ..run.clone()
            };
            let outcomes: Vec<RepeatOutcome> = (0..run.repeats)
                .map(|r| run_repeat(&source, &cell_run, r, None))
                .collect::<Result<_, _>>()?;
            let pick = |f: &dyn Fn(&RepeatOutcome) -> f64| mean_std(&outcomes.iter().map(f).collect::<Vec<_>>());
            Ok(SweepCell {
                gamma,
                eta,
                lower_gap: pick(&|o| o.metrics["lower_gap"]),
                f_at_yg: pick(&|o| o.result.trace.last().map_or(f64::NAN, |t| t.f_at_yg)),
                g_gap: pick(&|o| o.result.trace.last().map_or(f64::NAN, |t| t.g_gap)),
            })
        })
        .collect::<Result<_, CliError>>()?;

    let mut csv = String::from("gamma,eta,lower_gap_mean,lower_gap_std,f_at_yg_mean,f_at_yg_std,g_gap_mean,g_gap_std\n");
    for c in &results {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            c.gamma, c.eta, c.lower_gap.mean, c.lower_gap.std, c.f_at_yg.mean, c.f_at_yg.std, c.g_gap.mean, c.g_gap.std
        ));
    }
    write_file(&run.output_dir, "sweep.csv", &csv)?;
    let summary = json!({
        "experiment": "sweep",
        "target": target.name(),
        "config": run,
        "cells": results,
    });
    write_file(&run.output_dir, "summary.json", &pretty(&summary))?;
    Ok(results)
}

/// Human-readable table of `lower_gap` mean ± std, rows γ, columns η.
pub fn sweep_table(run: &RunConfig, cells: &[SweepCell]) -> String {
    let mut s = format!("{:>10}", "gamma\\eta");
    for e in &run.etas {
        s.push_str(&format!(" {:>22}", e));
    }
    s.push('\n');
    for g in &run.gammas {
        s.push_str(&format!("{:>10}", g));
        for e in &run.etas {
            let c = cells.iter().find(|c| c.gamma == *g && c.eta == *e);
            let text = c.map_or("-".to_string(), |c| format!("{:.3e} ± {:.1e}", c.lower_gap.mean, c.lower_gap.std));
            s.push_str(&format!(" {:>22}", text));
        }
        s.push('\n');
    }
    s
}
