//! Point-to-point and sequential experiments.

use std::time::{Duration, Instant};

use anyhow::{Context, Result};
use clrrt_core::{
    plan, GoalRegion, IterationRecord, Planner, PlannerStats, Propagate, Solution, State, Trajectory, Workspace,
};
use serde::Serialize;

use crate::scenario::Scenario;
use crate::svg;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GraphCounts {
    pub output_nodes: usize,
    pub output_edges: usize,
    pub trajectory_nodes: usize,
    pub trajectory_edges: usize,
}

/// Everything kept from one planning run once the graphs are dropped.
#[derive(Clone, Debug)]
pub struct PlanResult {
    pub seed: u64,
    pub start: State,
    pub goal: GoalRegion,
    pub log: Vec<IterationRecord>,
    pub solution: Solution,
    pub counts: GraphCounts,
    pub stats: PlannerStats,
    pub wall_time: Duration,
    /// Rendered graph snapshot, when requested.
    pub svg: Option<String>,
}

impl PlanResult {
    pub fn best_cost(&self) -> Option<f64> {
        self.solution.best_cost()
    }

    pub fn first_solution_iteration(&self) -> Option<usize> {
        self.log.iter().find(|r| r.best_cost.is_some()).map(|r| r.iteration)
    }

    /// Best trajectory, or the start state alone when the goal was not reached.
    pub fn trajectory(&self) -> Trajectory {
        match &self.solution.best {
            Some(best) => best.trajectory.clone(),
            None => Trajectory::single(self.start),
        }
    }
}

/// Runs `iterations` planner iterations from `start` toward `workspace`'s
/// goal.
pub fn run_stage<P: Propagate>(
    start: State,
    workspace: Workspace,
    scenario: &Scenario,
    propagator: P,
    render_svg: bool,
) -> Result<PlanResult> {
    let goal = *workspace.goal();
    let t0 = Instant::now();
    let mut planner = Planner::new(start, workspace, scenario.planner, propagator)?;
    let log = plan(&mut planner, scenario.iterations, scenario.seed)?;
    let solution = planner.construct_solution();
    let wall_time = t0.elapsed();
    let counts = GraphCounts {
        output_nodes: planner.outputs().len(),
        output_edges: planner.outputs().edge_count(),
        trajectory_nodes: planner.trajectories().len(),
        trajectory_edges: planner.trajectories().edge_count(),
    };
    let svg = render_svg.then(|| svg::render(&planner, &solution));
    Ok(PlanResult {
        seed: scenario.seed,
        start,
        goal,
        log,
        solution,
        counts,
        stats: planner.stats(),
        wall_time,
        svg,
    })
}

pub fn run_point_to_point(scenario: &Scenario, render_svg: bool) -> Result<PlanResult> {
    run_stage(
        scenario.start_state(),
        scenario.workspace()?,
        scenario,
        scenario.propagator()?,
        render_svg,
    )
}

#[derive(Clone, Debug)]
pub struct SequentialResult {
    pub stages: Vec<PlanResult>,
    /// Index of the first stage that found no solution; later stages were
    /// not run.
    pub failed_stage: Option<usize>,
}

impl SequentialResult {
    pub fn completed(&self) -> bool {
        self.failed_stage.is_none()
    }

    /// Stage trajectories joined end to end.
    pub fn trajectory(&self) -> Option<Trajectory> {
        let parts: Vec<Trajectory> = self.stages.iter().map(PlanResult::trajectory).collect();
        Trajectory::concat(parts.iter())
    }

    pub fn total_cost(&self) -> Option<f64> {
        self.stages.iter().map(PlanResult::best_cost).sum()
    }
}

/// Plans to each waypoint in turn. Every stage starts a fresh planner at the
/// terminal state of the previous stage's best trajectory.
pub fn run_sequential(scenario: &Scenario, render_svg: bool) -> Result<SequentialResult> {
    let base = scenario.workspace()?;
    let mut start = scenario.start_state();
    let mut stages = Vec::new();
    for (k, goal) in scenario.stage_goals()?.into_iter().enumerate() {
        let ws = base.with_goal(goal)?;
        let result = run_stage(start, ws, scenario, scenario.propagator()?, render_svg)
            .with_context(|| format!("stage {}", k + 1))?;
        let reached = result.solution.best.as_ref().map(|b| b.trajectory.last().state);
        stages.push(result);
        match reached {
            Some(x) => start = x,
            None => {
                return Ok(SequentialResult {
                    stages,
                    failed_stage: Some(k),
                })
            }
        }
    }
    Ok(SequentialResult {
        stages,
        failed_stage: None,
    })
}
