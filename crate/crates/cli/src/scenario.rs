//! Scenario files: one TOML document per experiment.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use clrrt_core::{
    Bounds, ClosedLoop, ControllerParams, GoalRegion, Obstacle, PlannerParams, Point2, SimLimits, State, Workspace,
};
use serde::{Deserialize, Serialize};

const BUNDLED: [(&str, &str); 2] = [
    ("track_pt1", include_str!("../scenarios/track_pt1.toml")),
    ("track_pt2", include_str!("../scenarios/track_pt2.toml")),
];

/// Names accepted by [`Scenario::load`] without a file on disk.
pub fn bundled_names() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(name, _)| *name)
}

fn default_iterations() -> usize {
    1500
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkspaceSpec {
    pub bounds: Bounds,
    #[serde(default)]
    pub obstacles: Vec<Obstacle>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    /// TOML integers are signed, so files can hold seeds up to 2^63 - 1;
    /// the command line accepts the full range.
    #[serde(default)]
    pub seed: u64,
    /// Sequential mode visits these in order. Empty for point-to-point runs.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub waypoints: Vec<Point2>,
    pub start: State,
    /// Point-to-point goal; in sequential mode only its radius is used.
    pub goal: GoalRegion,
    pub workspace: WorkspaceSpec,
    #[serde(default)]
    pub planner: PlannerParams,
    #[serde(default)]
    pub controller: ControllerParams,
    #[serde(default)]
    pub limits: SimLimits,
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let scenario: Scenario = toml::from_str(text)?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        Ok(toml::to_string_pretty(self)?)
    }

    /// Loads a bundled scenario by name, or a TOML file by path.
    pub fn load(name_or_path: &str) -> Result<Self> {
        if let Some((_, text)) = BUNDLED.iter().find(|(name, _)| *name == name_or_path) {
            return Scenario::from_toml_str(text).with_context(|| format!("bundled scenario {name_or_path}"));
        }
        let path = Path::new(name_or_path);
        let text = fs::read_to_string(path).with_context(|| format!("reading scenario {}", path.display()))?;
        Scenario::from_toml_str(&text).with_context(|| format!("parsing scenario {}", path.display()))
    }

    pub fn bundled(name: &str) -> Result<Self> {
        match BUNDLED.iter().find(|(n, _)| *n == name) {
            Some((_, text)) => Scenario::from_toml_str(text),
            None => bail!("no bundled scenario named {name}"),
        }
    }

    /// Start state with its heading wrapped.
    pub fn start_state(&self) -> State {
        let s = self.start;
        State::new(s.x1, s.x2, s.heading, s.speed)
    }

    pub fn workspace(&self) -> Result<Workspace> {
        Ok(Workspace::new(
            self.workspace.bounds,
            self.workspace.obstacles.clone(),
            self.goal,
        )?)
    }

    pub fn propagator(&self) -> Result<ClosedLoop> {
        Ok(ClosedLoop::unicycle(self.controller, self.limits)?)
    }

    /// Goal region of each sequential stage.
    pub fn stage_goals(&self) -> Result<Vec<GoalRegion>> {
        self.waypoints
            .iter()
            .map(|&w| Ok(GoalRegion::new(w, self.goal.radius)?))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if !self.start.is_finite() {
            bail!("start: state must be finite");
        }
        let ws = self.workspace()?;
        self.planner.validate()?;
        self.propagator()?;
        // The vehicle may start faster than it cruises.
        let fastest = self.controller.cruise_speed.max(self.start.speed.abs());
        self.limits.check_resolution(fastest)?;
        let p = self.start.position();
        if !ws.point_in_free(p) {
            bail!("start: ({}, {}) is not in free space", p.x1, p.x2);
        }
        for goal in self.stage_goals()? {
            ws.with_goal(goal)
                .with_context(|| format!("waypoint ({}, {})", goal.center.x1, goal.center.x2))?;
        }
        Ok(())
    }
}
