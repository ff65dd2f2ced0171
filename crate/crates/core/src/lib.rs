//! Closed-loop RRT# motion planning for a unicycle with a pure-pursuit
//! controller: geometry, dynamics, closed-loop simulation, the output and
//! trajectory graphs, and the planner itself.

pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod output_graph;
pub mod planner;
pub mod queue;
pub mod sim;
pub mod trajectory_graph;

pub use dynamics::{
    integrate_step, pure_pursuit_control, wrap_angle, Control, ControllerParams, Model, State, Unicycle,
};
pub use error::{ConfigError, GraphError, PlanError};
pub use geometry::{Bounds, GoalRegion, Obstacle, Point2, Workspace};
pub use output_graph::{near_radius, steer, OutputEdge, OutputEdgeId, OutputGraph, OutputNode, OutputNodeId};
pub use planner::{
    plan, sample_free, BestPath, ExtendOutcome, IterationRecord, Planner, PlannerParams, PlannerStats, Solution,
    SolutionEdge,
};
pub use queue::{Key, PriorityQueue};
pub use sim::{
    trajectory_collision_free, trajectory_cost, ClosedLoop, Diverged, Propagate, ReferencePath, Sample, SimLimits,
    Trajectory,
};
pub use trajectory_graph::{TrajEdgeId, TrajNodeId, TrajectoryEdge, TrajectoryGraph, TrajectoryNode};
