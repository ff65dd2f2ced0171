//! Closed-loop prediction: run the controller against the plant along a
//! reference path and score the resulting trajectory.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{integrate_step, pure_pursuit_control, Control, ControllerParams, Model, State, Unicycle};
use crate::error::ConfigError;
use crate::geometry::{Point2, Workspace};

/// Piecewise-linear path in output space, parameterized by arc length.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferencePath {
    waypoints: Vec<Point2>,
    // cumulative[i] = arc length at waypoints[i]
    cumulative: Vec<f64>,
}

impl ReferencePath {
    pub fn new(waypoints: Vec<Point2>) -> Result<Self, ConfigError> {
        if waypoints.is_empty() {
            return Err(ConfigError::invalid("reference", "needs at least one waypoint"));
        }
        if waypoints.iter().any(|p| !p.is_finite()) {
            return Err(ConfigError::invalid("reference", "waypoints must be finite"));
        }
        if waypoints.windows(2).any(|w| w[0] == w[1]) {
            return Err(ConfigError::invalid("reference", "consecutive waypoints must differ"));
        }
        let mut cumulative = Vec::with_capacity(waypoints.len());
        let mut acc = 0.0;
        cumulative.push(acc);
        for w in waypoints.windows(2) {
            acc += w[0].distance(w[1]);
            cumulative.push(acc);
        }
        Ok(ReferencePath { waypoints, cumulative })
    }

    /// Straight segment `a -> b`; collapses to a single point when `a == b`.
    pub fn segment(a: Point2, b: Point2) -> Self {
        let waypoints = if a == b { vec![a] } else { vec![a, b] };
        ReferencePath::new(waypoints).expect("segment endpoints must be finite")
    }

    pub fn waypoints(&self) -> &[Point2] {
        &self.waypoints
    }

    pub fn start(&self) -> Point2 {
        self.waypoints[0]
    }

    pub fn end(&self) -> Point2 {
        *self.waypoints.last().unwrap()
    }

    pub fn length(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    /// Point at arc length `s`, clamped to the path.
    pub fn point_at(&self, s: f64) -> Point2 {
        if s <= 0.0 || self.waypoints.len() == 1 {
            return self.start();
        }
        if s >= self.length() {
            return self.end();
        }
        let i = self.cumulative.partition_point(|&c| c <= s) - 1;
        let (a, b) = (self.waypoints[i], self.waypoints[i + 1]);
        let seg = self.cumulative[i + 1] - self.cumulative[i];
        a + (b - a) * ((s - self.cumulative[i]) / seg)
    }

    /// Arc length of the point nearest to `p` among points at or after `from`.
    pub fn project_forward(&self, p: Point2, from: f64) -> f64 {
        let from = from.clamp(0.0, self.length());
        if self.waypoints.len() == 1 {
            return 0.0;
        }
        let first = (self.cumulative.partition_point(|&c| c <= from) - 1).min(self.waypoints.len() - 2);
        let mut best_s = from;
        let mut best_d = f64::INFINITY;
        for i in first..self.waypoints.len() - 1 {
            let (a, b) = (self.waypoints[i], self.waypoints[i + 1]);
            let seg = self.cumulative[i + 1] - self.cumulative[i];
            let lo = if i == first {
                (from - self.cumulative[i]) / seg
            } else {
                0.0
            };
            let ab = b - a;
            let t = ((p - a).dot(ab) / (seg * seg)).clamp(lo.clamp(0.0, 1.0), 1.0);
            let d = p.distance_squared(a + ab * t);
            if d < best_d {
                best_d = d;
                best_s = self.cumulative[i] + t * seg;
            }
        }
        best_s.max(from)
    }
}

/// One recorded step: the state at `t` and the control applied from it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub state: State,
    pub control: Control,
}

/// Time-stamped closed-loop state trajectory with its arc-length cost.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    samples: Vec<Sample>,
    cost: f64,
}

impl Trajectory {
    /// Panics on an empty sample list.
    pub fn new(samples: Vec<Sample>) -> Self {
        assert!(!samples.is_empty(), "trajectory needs at least one sample");
        let cost = arc_length(&samples);
        Trajectory { samples, cost }
    }

    /// Zero-length trajectory holding only `x`.
    pub fn single(x: State) -> Self {
        Trajectory::new(vec![Sample {
            t: 0.0,
            state: x,
            control: Control::ZERO,
        }])
    }

    /// Joins trajectories that share their boundary states, shifting time so
    /// the result is continuous. The duplicated boundary sample is dropped.
    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a Trajectory>) -> Option<Trajectory> {
        let mut samples: Vec<Sample> = Vec::new();
        for part in parts {
            let offset = samples.last().map_or(0.0, |s| s.t) - part.samples[0].t;
            let skip = usize::from(!samples.is_empty());
            samples.extend(part.samples[skip..].iter().map(|s| Sample { t: s.t + offset, ..*s }));
        }
        if samples.is_empty() {
            None
        } else {
            Some(Trajectory::new(samples))
        }
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn first(&self) -> &Sample {
        &self.samples[0]
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn positions(&self) -> impl Iterator<Item = Point2> + '_ {
        self.samples.iter().map(|s| s.state.position())
    }
}

fn arc_length(samples: &[Sample]) -> f64 {
    samples
        .windows(2)
        .map(|w| w[0].state.position().distance(w[1].state.position()))
        .sum()
}

/// Sum of chord lengths between consecutive output samples.
pub fn trajectory_cost(sigma: &Trajectory) -> f64 {
    arc_length(&sigma.samples)
}

/// Every chord between consecutive samples must be collision free.
pub fn trajectory_collision_free(ws: &Workspace, sigma: &Trajectory) -> bool {
    if sigma.len() == 1 {
        return ws.point_in_free(sigma.first().state.position());
    }
    sigma
        .samples
        .windows(2)
        .all(|w| ws.segment_collision_free(w[0].state.position(), w[1].state.position()))
}

fn default_dt() -> f64 {
    0.05
}
fn default_reach_tolerance() -> f64 {
    0.5
}
fn default_max_time_factor() -> f64 {
    3.0
}
fn default_spacing() -> f64 {
    0.25
}

/// Step size and termination policy for closed-loop prediction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimLimits {
    /// seconds
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// meters
    #[serde(default = "default_reach_tolerance")]
    pub reach_tolerance: f64,
    #[serde(default = "default_max_time_factor")]
    pub max_time_factor: f64,
    /// Upper bound on the distance travelled between samples, meters.
    #[serde(default = "default_spacing")]
    pub collision_check_spacing: f64,
}

impl Default for SimLimits {
    fn default() -> Self {
        SimLimits {
            dt: default_dt(),
            reach_tolerance: default_reach_tolerance(),
            max_time_factor: default_max_time_factor(),
            collision_check_spacing: default_spacing(),
        }
    }
}

impl SimLimits {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, v) in [
            ("sim.dt", self.dt),
            ("sim.reach_tolerance", self.reach_tolerance),
            ("sim.max_time_factor", self.max_time_factor),
            ("sim.collision_check_spacing", self.collision_check_spacing),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(ConfigError::invalid(name, "must be > 0"));
            }
        }
        Ok(())
    }

    /// Checks that a vehicle moving at up to `max_speed` advances at most
    /// `collision_check_spacing` per step.
    pub fn check_resolution(&self, max_speed: f64) -> Result<(), ConfigError> {
        if self.dt * max_speed > self.collision_check_spacing {
            return Err(ConfigError::invalid(
                "sim.dt",
                format!(
                    "dt * max speed = {} exceeds collision_check_spacing = {}",
                    self.dt * max_speed,
                    self.collision_check_spacing
                ),
            ));
        }
        Ok(())
    }
}

/// The reference could not be tracked to its endpoint within the time budget.
#[derive(Clone, Copy, Debug, PartialEq, Error)]
#[error("closed-loop prediction did not reach the reference endpoint within {time_budget} s")]
pub struct Diverged {
    pub time_budget: f64,
}

/// Closed-loop prediction: the planner only needs this.
pub trait Propagate {
    fn propagate(&self, x0: &State, reference: &ReferencePath) -> Result<Trajectory, Diverged>;
}

/// Plant plus pure-pursuit controller, integrated with fixed-step RK4.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedLoop<M = Unicycle> {
    pub model: M,
    pub controller: ControllerParams,
    pub limits: SimLimits,
}

impl ClosedLoop<Unicycle> {
    pub fn unicycle(controller: ControllerParams, limits: SimLimits) -> Result<Self, ConfigError> {
        controller.validate()?;
        limits.validate()?;
        Ok(ClosedLoop {
            model: Unicycle,
            controller,
            limits,
        })
    }
}

impl<M: Model> ClosedLoop<M> {
    pub fn time_budget(&self, reference: &ReferencePath) -> f64 {
        self.limits.max_time_factor * reference.length() / self.controller.cruise_speed + 10.0
    }
}

impl<M: Model> Propagate for ClosedLoop<M> {
    fn propagate(&self, x0: &State, reference: &ReferencePath) -> Result<Trajectory, Diverged> {
        let goal = reference.end();
        let budget = self.time_budget(reference);
        let tol2 = self.limits.reach_tolerance * self.limits.reach_tolerance;
        let dt = self.limits.dt;

        let mut samples = Vec::with_capacity((reference.length() / (self.controller.cruise_speed * dt)) as usize + 8);
        let mut x = *x0;
        let mut progress = 0.0;
        let mut step: u32 = 0;
        loop {
            let t = f64::from(step) * dt;
            let (u, p) = pure_pursuit_control(&self.controller, &x, reference, progress);
            progress = p;
            samples.push(Sample {
                t,
                state: x,
                control: u,
            });
            if self.model.output(&x).distance_squared(goal) <= tol2 {
                return Ok(Trajectory::new(samples));
            }
            if t > budget || !x.is_finite() {
                return Err(Diverged { time_budget: budget });
            }
            x = integrate_step(&self.model, &x, &u, dt);
            step += 1;
        }
    }
}
