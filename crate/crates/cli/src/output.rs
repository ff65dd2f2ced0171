//! CSV, JSON and SVG writers.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use clrrt_core::{ControllerParams, PlannerParams, PlannerStats, SimLimits, Trajectory};
use serde::Serialize;

use crate::run::{GraphCounts, PlanResult, SequentialResult};
use crate::scenario::Scenario;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OutputOptions {
    pub svg: bool,
    /// Record wall-clock times. Off by default so repeated runs produce
    /// identical files.
    pub timing: bool,
}

impl Default for OutputOptions {
    fn default() -> Self {
        OutputOptions {
            svg: true,
            timing: false,
        }
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))
}

pub fn write_costs_csv(path: &Path, result: &PlanResult, timing: bool) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["iteration", "best_cost", "nodes_y", "nodes_sigma", "elapsed_ms"])?;
    for r in &result.log {
        w.write_record([
            r.iteration.to_string(),
            r.best_cost.map(|c| c.to_string()).unwrap_or_default(),
            r.output_nodes.to_string(),
            r.trajectory_nodes.to_string(),
            if timing {
                format!("{:.3}", r.elapsed.as_secs_f64() * 1e3)
            } else {
                String::new()
            },
        ])?;
    }
    w.flush().with_context(|| format!("writing {}", path.display()))
}

pub fn write_solution_csv(path: &Path, trajectory: &Trajectory) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["t", "x1", "x2", "x3", "x4", "u1", "u2"])?;
    for s in trajectory.samples() {
        let x = s.state;
        w.write_record(
            [
                s.t,
                x.x1,
                x.x2,
                x.heading,
                x.speed,
                s.control.turn_rate,
                s.control.accel,
            ]
            .map(|v| v.to_string()),
        )?;
    }
    w.flush().with_context(|| format!("writing {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

#[derive(Serialize)]
struct Params<'a> {
    iterations: usize,
    planner: &'a PlannerParams,
    controller: &'a ControllerParams,
    limits: &'a SimLimits,
}

#[derive(Serialize)]
struct RunSummary {
    seed: u64,
    best_cost: Option<f64>,
    first_solution_iteration: Option<usize>,
    solution_samples: usize,
    counts: GraphCounts,
    stats: PlannerStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_time_ms: Option<f64>,
}

impl RunSummary {
    fn new(r: &PlanResult, timing: bool) -> Self {
        RunSummary {
            seed: r.seed,
            best_cost: r.best_cost(),
            first_solution_iteration: r.first_solution_iteration(),
            solution_samples: r.solution.best.as_ref().map_or(1, |b| b.trajectory.len()),
            counts: r.counts,
            stats: r.stats,
            wall_time_ms: timing.then_some(r.wall_time.as_secs_f64() * 1e3),
        }
    }
}

#[derive(Serialize)]
struct PlanSummary<'a> {
    scenario: &'a str,
    mode: &'static str,
    params: Params<'a>,
    #[serde(flatten)]
    run: RunSummary,
}

#[derive(Serialize)]
struct SequentialSummary<'a> {
    scenario: &'a str,
    mode: &'static str,
    params: Params<'a>,
    completed: bool,
    failed_stage: Option<usize>,
    total_cost: Option<f64>,
    stages: Vec<RunSummary>,
}

fn params(s: &Scenario) -> Params<'_> {
    Params {
        iterations: s.iterations,
        planner: &s.planner,
        controller: &s.controller,
        limits: &s.limits,
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

fn write_run_files(dir: &Path, result: &PlanResult, opts: OutputOptions) -> Result<()> {
    write_costs_csv(&dir.join("costs.csv"), result, opts.timing)?;
    write_solution_csv(&dir.join("solution.csv"), &result.trajectory())?;
    if let (true, Some(svg)) = (opts.svg, &result.svg) {
        write_text(&dir.join("graph.svg"), svg)?;
    }
    Ok(())
}

/// Writes costs.csv, solution.csv, result.json and optionally graph.svg.
pub fn emit_plan(dir: &Path, scenario: &Scenario, result: &PlanResult, opts: OutputOptions) -> Result<()> {
    create_dir(dir)?;
    write_run_files(dir, result, opts)?;
    let summary = PlanSummary {
        scenario: &scenario.name,
        mode: "point_to_point",
        params: params(scenario),
        run: RunSummary::new(result, opts.timing),
    };
    write_json(&dir.join("result.json"), &summary)
}

/// Per-stage files go to `stage_<k>/`; the joined trajectory and overall
/// summary go to `dir`.
pub fn emit_sequential(dir: &Path, scenario: &Scenario, result: &SequentialResult, opts: OutputOptions) -> Result<()> {
    create_dir(dir)?;
    for (k, stage) in result.stages.iter().enumerate() {
        let sub = dir.join(format!("stage_{}", k + 1));
        create_dir(&sub)?;
        write_run_files(&sub, stage, opts)?;
    }
    if let Some(traj) = result.trajectory() {
        write_solution_csv(&dir.join("solution.csv"), &traj)?;
    }
    let summary = SequentialSummary {
        scenario: &scenario.name,
        mode: "sequential",
        params: params(scenario),
        completed: result.completed(),
        failed_stage: result.failed_stage.map(|k| k + 1),
        total_cost: result.total_cost(),
        stages: result.stages.iter().map(|s| RunSummary::new(s, opts.timing)).collect(),
    };
    write_json(&dir.join("result.json"), &summary)
}
