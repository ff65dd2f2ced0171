//! Append-only forest of closed-loop trajectories.

use std::sync::Arc;

use serde::Serialize;

use crate::error::GraphError;
use crate::output_graph::{OutputEdgeId, OutputNodeId};
use crate::sim::Trajectory;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct TrajNodeId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct TrajEdgeId(pub usize);

#[derive(Clone, Debug)]
pub struct TrajectoryNode {
    pub id: TrajNodeId,
    pub trajectory: Arc<Trajectory>,
    /// `None` only for the root.
    pub generating_edge: Option<OutputEdgeId>,
    /// Output node whose internal state is this trajectory's terminal state.
    pub realizes: OutputNodeId,
    pub parent: Option<TrajNodeId>,
    /// Sum of trajectory costs from the root through this node.
    pub cost_to_come: f64,
    /// Output edges still to be simulated from the terminal state.
    pub pending: Vec<OutputEdgeId>,
}

impl TrajectoryNode {
    pub fn terminal_state(&self) -> &crate::dynamics::State {
        &self.trajectory.last().state
    }
}

#[derive(Clone, Debug)]
pub struct TrajectoryEdge {
    pub id: TrajEdgeId,
    pub tail: TrajNodeId,
    pub head: TrajNodeId,
    pub trajectory: Arc<Trajectory>,
}

#[derive(Clone, Debug)]
pub struct TrajectoryGraph {
    nodes: Vec<TrajectoryNode>,
    edges: Vec<TrajectoryEdge>,
    successors: Vec<Vec<TrajNodeId>>,
}

impl TrajectoryGraph {
    /// Graph holding only the root trajectory, which realizes `root_output`.
    pub fn new(root: Trajectory, root_output: OutputNodeId) -> Self {
        let node = TrajectoryNode {
            id: TrajNodeId(0),
            trajectory: Arc::new(root),
            generating_edge: None,
            realizes: root_output,
            parent: None,
            cost_to_come: 0.0,
            pending: Vec::new(),
        };
        TrajectoryGraph {
            nodes: vec![node],
            edges: Vec::new(),
            successors: vec![Vec::new()],
        }
    }

    pub const ROOT: TrajNodeId = TrajNodeId(0);

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[TrajectoryNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[TrajectoryEdge] {
        &self.edges
    }

    pub fn node(&self, id: TrajNodeId) -> &TrajectoryNode {
        &self.nodes[id.0]
    }

    /// Heads of the edges leaving `id`, in ascending id order.
    pub fn successors(&self, id: TrajNodeId) -> &[TrajNodeId] {
        &self.successors[id.0]
    }

    /// Appends `trajectory` as a child of `pred`. The trajectory must start
    /// exactly at `pred`'s terminal state.
    pub fn add_trajectory(
        &mut self,
        pred: TrajNodeId,
        trajectory: Trajectory,
        generating_edge: OutputEdgeId,
        realizes: OutputNodeId,
        pending: Vec<OutputEdgeId>,
    ) -> Result<TrajNodeId, GraphError> {
        let parent = self.nodes.get(pred.0).ok_or(GraphError::UnknownNode(pred.0))?;
        if trajectory.first().state != *parent.terminal_state() {
            return Err(GraphError::Discontinuous(pred.0));
        }
        let id = TrajNodeId(self.nodes.len());
        let cost_to_come = parent.cost_to_come + trajectory.cost();
        let trajectory = Arc::new(trajectory);
        self.edges.push(TrajectoryEdge {
            id: TrajEdgeId(self.edges.len()),
            tail: pred,
            head: id,
            trajectory: Arc::clone(&trajectory),
        });
        self.nodes.push(TrajectoryNode {
            id,
            trajectory,
            generating_edge: Some(generating_edge),
            realizes,
            parent: Some(pred),
            cost_to_come,
            pending,
        });
        self.successors.push(Vec::new());
        self.successors[pred.0].push(id);
        Ok(id)
    }

    /// Empties and returns the pending edge list of `id`.
    pub fn take_pending(&mut self, id: TrajNodeId) -> Vec<OutputEdgeId> {
        std::mem::take(&mut self.nodes[id.0].pending)
    }

    /// Replaces the pending edge list of `id`.
    pub fn set_pending(&mut self, id: TrajNodeId, pending: Vec<OutputEdgeId>) {
        self.nodes[id.0].pending = pending;
    }

    /// Trajectory nodes from the root down to `id`.
    pub fn lineage(&self, id: TrajNodeId) -> Vec<TrajNodeId> {
        let mut chain = vec![id];
        let mut cur = id;
        while let Some(p) = self.nodes[cur.0].parent {
            chain.push(p);
            cur = p;
        }
        chain.reverse();
        chain
    }
}
