//! The closed-loop RRT# planning loop.
//!
//! Two graphs are grown side by side. The output graph holds reference
//! points and the straight segments between them; the trajectory graph holds
//! every closed-loop trajectory obtained by tracking one of those segments
//! from the internal state of its tail. Each output node carries a
//! cost-to-come `g` and a one-step look-ahead `g_bar` computed from evaluated
//! trajectories. Nodes with `g != g_bar` sit in a priority queue keyed by
//! `[g_bar + h; g_bar]`, and `replan` pops them while they can still beat the
//! best goal node. Outgoing references of a node are only simulated when the
//! node is popped.
//!
//! Invariant kept throughout: for every node with finite `g_bar`,
//! `g_bar == cost_to_come(parent_trajectory)`, so the reported cost of a
//! solution is exactly the cost of the trajectory chain that realizes it.

use std::collections::HashSet;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::State;
use crate::error::{ConfigError, PlanError};
use crate::geometry::{Point2, Workspace};
use crate::output_graph::{steer, OutputGraph, OutputNode, OutputNodeId};
use crate::queue::{Key, PriorityQueue};
use crate::sim::{trajectory_collision_free, Propagate, ReferencePath, Trajectory};
use crate::trajectory_graph::{TrajNodeId, TrajectoryGraph};

fn default_eta() -> f64 {
    8.0
}
fn default_gamma_scale() -> f64 {
    1.1
}
fn default_true() -> bool {
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlannerParams {
    /// Steering distance and cap on the near-neighbor radius, meters.
    #[serde(default = "default_eta")]
    pub eta: f64,
    /// Near radius scale, as a multiple of the workspace side length.
    #[serde(default = "default_gamma_scale")]
    pub gamma_scale: f64,
    /// When false every node gets `h = 0` (uninformed search).
    #[serde(default = "default_true")]
    pub use_heuristic: bool,
}

impl Default for PlannerParams {
    fn default() -> Self {
        PlannerParams {
            eta: default_eta(),
            gamma_scale: default_gamma_scale(),
            use_heuristic: true,
        }
    }
}

impl PlannerParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return Err(ConfigError::invalid("planner.eta", "must be > 0"));
        }
        if !(self.gamma_scale.is_finite() && self.gamma_scale > 0.0) {
            return Err(ConfigError::invalid("planner.gamma_scale", "must be > 0"));
        }
        Ok(())
    }
}

/// What a single `extend` call did.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExtendOutcome {
    Added(OutputNodeId),
    /// The steered segment from the nearest node hits an obstacle.
    Blocked,
    /// The sample coincides with its nearest node.
    Duplicate,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PlannerStats {
    pub propagations: u64,
    pub diverged: u64,
    pub collided: u64,
    pub pops: u64,
}

/// One edge of the extracted solution tree: the trajectory realizing
/// `output_node`, hanging below the trajectory node `from`.
#[derive(Clone, Debug)]
pub struct SolutionEdge {
    pub output_node: OutputNodeId,
    pub parent_output: Option<OutputNodeId>,
    pub from: TrajNodeId,
    pub to: TrajNodeId,
    /// Reference segment the trajectory was generated from.
    pub reference: ReferencePath,
    pub trajectory: Arc<Trajectory>,
}

/// Root-to-goal chain of trajectories for the best goal node.
#[derive(Clone, Debug)]
pub struct BestPath {
    pub goal: OutputNodeId,
    pub cost: f64,
    /// Trajectory nodes from the root (inclusive) to the goal.
    pub segments: Vec<TrajNodeId>,
    /// The segments joined into one state trajectory.
    pub trajectory: Trajectory,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub root: TrajNodeId,
    /// One edge per reached non-root output node: its parent trajectory.
    pub tree: Vec<SolutionEdge>,
    /// Ancestors of tree trajectories that are no longer any node's parent
    /// trajectory. This happens when an output node improved through a new
    /// internal state while a successor kept the cheaper chain through its
    /// old one. `tree` and `support` together are closed under parents.
    pub support: Vec<SolutionEdge>,
    pub best: Option<BestPath>,
}

impl Solution {
    pub fn best_cost(&self) -> Option<f64> {
        self.best.as_ref().map(|b| b.cost)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub best_cost: Option<f64>,
    pub output_nodes: usize,
    pub trajectory_nodes: usize,
    /// Time since the loop started.
    pub elapsed: Duration,
}

#[derive(Clone, Debug)]
pub struct Planner<P> {
    workspace: Workspace,
    params: PlannerParams,
    propagator: P,
    outputs: OutputGraph,
    trajectories: TrajectoryGraph,
    queue: PriorityQueue<OutputNodeId>,
    goal_queue: PriorityQueue<OutputNodeId>,
    stats: PlannerStats,
}

impl<P: Propagate> Planner<P> {
    /// Root output node at the start position with `g = g_bar = 0`, a
    /// single-state root trajectory, and empty queues.
    pub fn new(x_init: State, workspace: Workspace, params: PlannerParams, propagator: P) -> Result<Self, PlanError> {
        params.validate()?;
        if !x_init.is_finite() {
            return Err(ConfigError::invalid("start", "state must be finite").into());
        }
        let y_init = x_init.position();
        if !workspace.point_in_free(y_init) {
            return Err(PlanError::StartInCollision {
                x1: y_init.x1,
                x2: y_init.x2,
            });
        }
        let mut outputs = OutputGraph::new(params.eta);
        let h = if params.use_heuristic {
            workspace.heuristic(y_init)
        } else {
            0.0
        };
        let root = outputs.add_node(y_init, h);
        let trajectories = TrajectoryGraph::new(Trajectory::single(x_init), root);
        let node = outputs.node_mut(root);
        node.g = 0.0;
        node.g_bar = 0.0;
        node.parent_trajectory = Some(TrajectoryGraph::ROOT);
        Ok(Planner {
            workspace,
            params,
            propagator,
            outputs,
            trajectories,
            queue: PriorityQueue::new(),
            goal_queue: PriorityQueue::new(),
            stats: PlannerStats::default(),
        })
    }

    pub fn workspace(&self) -> &Workspace {
        &self.workspace
    }

    pub fn params(&self) -> &PlannerParams {
        &self.params
    }

    pub fn propagator(&self) -> &P {
        &self.propagator
    }

    pub fn outputs(&self) -> &OutputGraph {
        &self.outputs
    }

    pub fn trajectories(&self) -> &TrajectoryGraph {
        &self.trajectories
    }

    pub fn queue(&self) -> &PriorityQueue<OutputNodeId> {
        &self.queue
    }

    pub fn goal_queue(&self) -> &PriorityQueue<OutputNodeId> {
        &self.goal_queue
    }

    pub fn stats(&self) -> PlannerStats {
        self.stats
    }

    pub fn root(&self) -> OutputNodeId {
        OutputNodeId(0)
    }

    /// Lowest known cost-to-come among goal nodes.
    pub fn best_cost(&self) -> Option<f64> {
        let k = self.goal_queue.top_key().k1;
        k.is_finite().then_some(k)
    }

    fn heuristic(&self, y: Point2) -> f64 {
        if self.params.use_heuristic {
            self.workspace.heuristic(y)
        } else {
            0.0
        }
    }

    fn near_gamma(&self) -> f64 {
        self.params.gamma_scale * self.workspace.bounds().side_length()
    }

    // Closed-loop prediction followed by the trajectory collision test.
    fn evaluate(&mut self, x: &State, reference: &ReferencePath) -> Option<Trajectory> {
        self.stats.propagations += 1;
        match self.propagator.propagate(x, reference) {
            Err(_) => {
                self.stats.diverged += 1;
                None
            }
            Ok(sigma) if !trajectory_collision_free(&self.workspace, &sigma) => {
                self.stats.collided += 1;
                None
            }
            Ok(sigma) => Some(sigma),
        }
    }

    /// Grows the output graph toward `y_sample` and evaluates every incoming
    /// reference of the new node from its predecessor's internal state.
    pub fn extend(&mut self, y_sample: Point2) -> Result<ExtendOutcome, PlanError> {
        let eta = self.params.eta;
        let nearest = self.outputs.nearest(y_sample)?;
        let from = self.outputs.node(nearest).y;
        let y_new = steer(from, y_sample, eta);
        if y_new == from {
            return Ok(ExtendOutcome::Duplicate);
        }
        if !self.workspace.segment_collision_free(from, y_new) {
            return Ok(ExtendOutcome::Blocked);
        }

        let mut near = self.outputs.near(y_new, self.near_gamma(), eta);
        if let Err(pos) = near.binary_search(&nearest) {
            near.insert(pos, nearest);
        }

        let v = self.outputs.add_node(y_new, self.heuristic(y_new));
        let mut succ_edges = Vec::new();
        let mut pred_edges = Vec::new();
        for u in near {
            let uy = self.outputs.node(u).y;
            // Edges join node positions exactly. The near radius is capped
            // at eta, and the nearest node sits at eta up to rounding.
            if uy == y_new || !self.workspace.segment_collision_free(y_new, uy) {
                continue;
            }
            succ_edges.push(self.outputs.add_edge(v, u)?);
            pred_edges.push(self.outputs.add_edge(u, v)?);
        }

        for &e in &pred_edges {
            let edge = self.outputs.edge(e);
            let u = edge.tail;
            // A predecessor that was never reached has no internal state.
            let Some(pred_traj) = self.outputs.node(u).parent_trajectory else {
                continue;
            };
            let x = *self.trajectories.node(pred_traj).terminal_state();
            let reference = edge.reference.clone();
            let Some(sigma) = self.evaluate(&x, &reference) else {
                continue;
            };
            let cost = sigma.cost();
            let t = self
                .trajectories
                .add_trajectory(pred_traj, sigma, e, v, succ_edges.clone())?;

            // Relax only through stationary predecessors: there g equals the
            // cost of the chain ending at pred_traj. A nonstationary one
            // relaxes this trajectory node when it is popped.
            let pred = self.outputs.node(u);
            if pred.is_stationary() {
                let candidate = pred.g + cost;
                debug_assert_eq!(candidate, self.trajectories.node(t).cost_to_come);
                let node = self.outputs.node_mut(v);
                if node.g_bar > candidate {
                    node.g_bar = candidate;
                    node.parent_output = Some(u);
                    node.parent_trajectory = Some(t);
                }
            }
        }

        self.update_queue(v);
        self.update_goal(v);
        self.debug_check();
        Ok(ExtendOutcome::Added(v))
    }

    /// Pops promising nonstationary nodes until none can improve on the
    /// best goal node.
    pub fn replan(&mut self) -> Result<(), PlanError> {
        self.replan_while(|q, goal| q.top_key() < goal.top_key())
    }

    /// Pops until the queue is empty, ignoring the goal queue.
    pub fn replan_exhaustive(&mut self) -> Result<(), PlanError> {
        self.replan_while(|q, _| !q.is_empty())
    }

    fn replan_while<F>(&mut self, guard: F) -> Result<(), PlanError>
    where
        F: Fn(&PriorityQueue<OutputNodeId>, &PriorityQueue<OutputNodeId>) -> bool,
    {
        while guard(&self.queue, &self.goal_queue) {
            let Some((v, _)) = self.queue.pop() else { break };
            self.stats.pops += 1;
            let node = self.outputs.node_mut(v);
            node.g = node.g_bar;
            let g = node.g;
            let v_traj = node.parent_trajectory.expect("queued node has a parent trajectory");
            let x = *self.trajectories.node(v_traj).terminal_state();

            for e in self.trajectories.take_pending(v_traj) {
                let edge = self.outputs.edge(e);
                let w = edge.head;
                let reference = edge.reference.clone();
                if let Some(sigma) = self.evaluate(&x, &reference) {
                    let pending = self.outputs.outgoing(w).to_vec();
                    self.trajectories.add_trajectory(v_traj, sigma, e, w, pending)?;
                }
            }

            for k in 0..self.trajectories.successors(v_traj).len() {
                let s = self.trajectories.successors(v_traj)[k];
                let succ = self.trajectories.node(s);
                let w = succ.realizes;
                let candidate = g + succ.trajectory.cost();
                debug_assert_eq!(candidate, succ.cost_to_come);
                let node = self.outputs.node_mut(w);
                if node.g_bar > candidate {
                    node.g_bar = candidate;
                    node.parent_output = Some(v);
                    node.parent_trajectory = Some(s);
                    // `s` may predate edges added to `w` since it was created
                    // in extend; it has never been expanded, so its pending
                    // list is exactly the current outgoing set.
                    debug_assert!(self.trajectories.successors(s).is_empty());
                    let pending = self.outputs.outgoing(w).to_vec();
                    self.trajectories.set_pending(s, pending);
                    self.update_queue(w);
                    self.update_goal(w);
                }
            }
        }
        self.debug_check();
        Ok(())
    }

    fn key(node: &OutputNode) -> Key {
        Key::new(node.g_bar + node.h, node.g_bar)
    }

    /// Inserts, re-keys or removes `v` depending on whether it is stationary.
    pub fn update_queue(&mut self, v: OutputNodeId) {
        let node = self.outputs.node(v);
        if node.is_stationary() {
            self.queue.remove(v);
        } else {
            self.queue.insert(v, Self::key(node));
        }
    }

    /// Keys goal nodes by `[g_bar; 0]`; other nodes are ignored.
    pub fn update_goal(&mut self, v: OutputNodeId) {
        let node = self.outputs.node(v);
        if self.workspace.in_goal(node.y) {
            self.goal_queue.insert(v, Key::new(node.g_bar, 0.0));
        }
    }

    /// Tree of parent trajectories over all reached output nodes, plus the
    /// chain to the best goal node if one is reached.
    pub fn construct_solution(&self) -> Solution {
        let root = self.root();
        let tree_edge = |to: TrajNodeId| {
            let t = self.trajectories.node(to);
            let edge = self
                .outputs
                .edge(t.generating_edge.expect("non-root trajectory has a generating edge"));
            SolutionEdge {
                output_node: t.realizes,
                parent_output: Some(edge.tail),
                from: t.parent.expect("non-root trajectory has a parent"),
                to,
                reference: edge.reference.clone(),
                trajectory: Arc::clone(&t.trajectory),
            }
        };
        let tree: Vec<SolutionEdge> = self
            .outputs
            .nodes()
            .iter()
            .filter(|n| n.id != root && n.g_bar.is_finite())
            .map(|n| tree_edge(n.parent_trajectory.expect("reached node has a parent trajectory")))
            .collect();

        let mut included: HashSet<TrajNodeId> = tree.iter().map(|e| e.to).collect();
        included.insert(TrajectoryGraph::ROOT);
        let mut missing = Vec::new();
        for e in &tree {
            let mut cur = e.from;
            while included.insert(cur) {
                missing.push(cur);
                cur = self.trajectories.node(cur).parent.expect("root is always included");
            }
        }
        missing.sort_unstable();
        let support = missing.into_iter().map(tree_edge).collect();

        let best = self
            .goal_queue
            .peek()
            .filter(|(_, k)| k.k1.is_finite())
            .map(|(goal, key)| {
                let last = self
                    .outputs
                    .node(goal)
                    .parent_trajectory
                    .expect("reached goal has a parent trajectory");
                let segments = self.trajectories.lineage(last);
                let trajectory = Trajectory::concat(segments.iter().map(|&id| &*self.trajectories.node(id).trajectory))
                    .expect("lineage contains the root");
                BestPath {
                    goal,
                    cost: key.k1,
                    segments,
                    trajectory,
                }
            });

        Solution {
            root: TrajectoryGraph::ROOT,
            tree,
            support,
            best,
        }
    }

    #[cfg(debug_assertions)]
    fn debug_check(&self) {
        if let Err(e) = self.check_queue_membership() {
            panic!("planner invariant violated: {e}");
        }
    }

    #[cfg(not(debug_assertions))]
    fn debug_check(&self) {}

    /// The queue holds exactly the nonstationary nodes, each with its current
    /// key, and every node satisfies `g_bar <= g`.
    pub fn check_queue_membership(&self) -> Result<(), String> {
        for n in self.outputs.nodes() {
            if n.g_bar > n.g {
                return Err(format!("{}: g_bar {} > g {}", n.id, n.g_bar, n.g));
            }
            match (n.is_stationary(), self.queue.key_of(n.id)) {
                (true, Some(_)) => return Err(format!("{} is stationary but queued", n.id)),
                (false, None) => return Err(format!("{} is nonstationary but not queued", n.id)),
                (false, Some(k)) if k != Self::key(n) => return Err(format!("{} has a stale key", n.id)),
                _ => {}
            }
        }
        Ok(())
    }

    /// Full structural check; linear in the total size of both graphs.
    pub fn check_invariants(&self) -> Result<(), String> {
        self.check_queue_membership()?;
        self.outputs.check_consistency()?;
        let root = self.outputs.node(self.root());
        if root.g != 0.0 || root.g_bar != 0.0 || root.parent_output.is_some() {
            return Err("root must have g = g_bar = 0 and no parent".into());
        }
        for n in self.outputs.nodes().iter().skip(1) {
            if n.g_bar.is_finite() {
                let (Some(py), Some(ps)) = (n.parent_output, n.parent_trajectory) else {
                    return Err(format!("{} has finite g_bar but missing parents", n.id));
                };
                let t = self.trajectories.node(ps);
                if t.realizes != n.id || t.cost_to_come != n.g_bar {
                    return Err(format!("{}: parent trajectory does not realize g_bar", n.id));
                }
                let e = self.outputs.edge(t.generating_edge.expect("non-root trajectory"));
                if e.head != n.id || e.tail != py {
                    return Err(format!(
                        "{}: parent output is not the tail of the generating edge",
                        n.id
                    ));
                }
            }
            let in_goal = self.workspace.in_goal(n.y);
            if in_goal != self.goal_queue.contains(n.id) {
                return Err(format!("{}: goal queue membership wrong", n.id));
            }
            if in_goal && self.goal_queue.key_of(n.id) != Some(Key::new(n.g_bar, 0.0)) {
                return Err(format!("{}: stale goal key", n.id));
            }
        }
        if self.trajectories.edge_count() + 1 != self.trajectories.len() {
            return Err("trajectory graph is not a forest".into());
        }
        for t in self.trajectories.nodes() {
            if let Some(p) = t.parent {
                if t.trajectory.first().state != *self.trajectories.node(p).terminal_state() {
                    return Err(format!("trajectory {:?} is discontinuous", t.id));
                }
            }
            for &e in &t.pending {
                if self.outputs.edge(e).tail != t.realizes {
                    return Err(format!("trajectory {:?} has a foreign pending edge", t.id));
                }
            }
        }
        Ok(())
    }
}

/// Uniform rejection sampling over the free part of the workspace bounds.
pub fn sample_free<R: Rng>(ws: &Workspace, rng: &mut R) -> Result<Point2, PlanError> {
    const MAX_DRAWS: usize = 1_000_000;
    let b = ws.bounds();
    for _ in 0..MAX_DRAWS {
        let p = Point2::new(rng.gen_range(b.min.x1..b.max.x1), rng.gen_range(b.min.x2..b.max.x2));
        if ws.point_in_free(p) {
            return Ok(p);
        }
    }
    Err(PlanError::SamplingExhausted(MAX_DRAWS))
}

/// Runs `iterations` rounds of sample, extend and replan, recording the best
/// goal cost after each round.
pub fn plan<P: Propagate>(
    planner: &mut Planner<P>,
    iterations: usize,
    seed: u64,
) -> Result<Vec<IterationRecord>, PlanError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = Instant::now();
    let mut log = Vec::with_capacity(iterations);
    for iteration in 1..=iterations {
        let y = sample_free(planner.workspace(), &mut rng)?;
        planner.extend(y)?;
        planner.replan()?;
        log.push(IterationRecord {
            iteration,
            best_cost: planner.best_cost(),
            output_nodes: planner.outputs().len(),
            trajectory_nodes: planner.trajectories().len(),
            elapsed: start.elapsed(),
        });
    }
    Ok(log)
}
