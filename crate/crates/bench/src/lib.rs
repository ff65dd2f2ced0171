//! Fixtures shared by the benchmarks.

use clrrt_cli::Scenario;
use clrrt_core::{ClosedLoop, Planner, State, Workspace};

/// The bundled point-to-point track scenario.
pub fn track() -> Scenario {
    Scenario::bundled("track_pt1").expect("bundled scenario is valid")
}

pub fn track_planner(s: &Scenario) -> Planner<ClosedLoop> {
    Planner::new(
        s.start_state(),
        track_workspace(s),
        s.planner,
        s.propagator().expect("valid controller"),
    )
    .expect("start is free")
}

pub fn track_workspace(s: &Scenario) -> Workspace {
    s.workspace().expect("valid workspace")
}

/// Vehicle at rest on the bottom straight, facing along the track.
pub fn straight_start() -> State {
    State::new(-20.0, -40.0, std::f64::consts::FRAC_PI_2, 0.0)
}
