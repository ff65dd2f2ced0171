//! Graph of reference points and straight reference segments.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use crate::error::GraphError;
use crate::geometry::Point2;
use crate::sim::ReferencePath;
use crate::trajectory_graph::TrajNodeId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct OutputNodeId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct OutputEdgeId(pub usize);

impl fmt::Display for OutputNodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "y{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputNode {
    pub id: OutputNodeId,
    pub y: Point2,
    /// cost-to-come
    pub g: f64,
    /// one-step look-ahead cost-to-come
    pub g_bar: f64,
    pub h: f64,
    pub parent_output: Option<OutputNodeId>,
    pub parent_trajectory: Option<TrajNodeId>,
}

impl OutputNode {
    pub fn is_stationary(&self) -> bool {
        self.g == self.g_bar
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputEdge {
    pub id: OutputEdgeId,
    pub tail: OutputNodeId,
    pub head: OutputNodeId,
    pub reference: ReferencePath,
}

/// Uniform bucket grid over node positions.
#[derive(Clone, Debug)]
struct GridIndex {
    cell: f64,
    buckets: HashMap<(i64, i64), Vec<OutputNodeId>>,
    // bounding box of occupied cells, to stop ring searches early
    lo: (i64, i64),
    hi: (i64, i64),
}

impl GridIndex {
    fn new(cell: f64) -> Self {
        GridIndex {
            cell,
            buckets: HashMap::new(),
            lo: (i64::MAX, i64::MAX),
            hi: (i64::MIN, i64::MIN),
        }
    }

    fn key(&self, p: Point2) -> (i64, i64) {
        ((p.x1 / self.cell).floor() as i64, (p.x2 / self.cell).floor() as i64)
    }

    fn insert(&mut self, id: OutputNodeId, p: Point2) {
        let k = self.key(p);
        self.lo = (self.lo.0.min(k.0), self.lo.1.min(k.1));
        self.hi = (self.hi.0.max(k.0), self.hi.1.max(k.1));
        self.buckets.entry(k).or_default().push(id);
    }

    fn len(&self) -> usize {
        self.buckets.values().map(Vec::len).sum()
    }

    fn nearest(&self, nodes: &[OutputNode], p: Point2) -> Option<OutputNodeId> {
        if self.buckets.is_empty() {
            return None;
        }
        let (cx, cy) = self.key(p);
        let mut best: Option<(f64, OutputNodeId)> = None;
        let mut ring: i64 = 0;
        loop {
            for i in (cx - ring)..=(cx + ring) {
                for j in (cy - ring)..=(cy + ring) {
                    if (i - cx).abs() != ring && (j - cy).abs() != ring {
                        continue;
                    }
                    let Some(bucket) = self.buckets.get(&(i, j)) else {
                        continue;
                    };
                    for &id in bucket {
                        let d = nodes[id.0].y.distance_squared(p);
                        let better = match best {
                            None => true,
                            Some((bd, bid)) => d < bd || (d == bd && id < bid),
                        };
                        if better {
                            best = Some((d, id));
                        }
                    }
                }
            }
            // Every point outside the searched square is farther than
            // ring * cell from p.
            if let Some((bd, _)) = best {
                let reach = ring as f64 * self.cell;
                if reach * reach > bd {
                    break;
                }
            }
            let covers =
                cx - ring <= self.lo.0 && cy - ring <= self.lo.1 && cx + ring >= self.hi.0 && cy + ring >= self.hi.1;
            if covers && best.is_some() {
                break;
            }
            ring += 1;
        }
        best.map(|(_, id)| id)
    }

    fn within(&self, nodes: &[OutputNode], p: Point2, radius: f64) -> Vec<OutputNodeId> {
        let r2 = radius * radius;
        let (x0, y0) = self.key(p - Point2::new(radius, radius));
        let (x1, y1) = self.key(p + Point2::new(radius, radius));
        let (x0, y0) = (x0.max(self.lo.0), y0.max(self.lo.1));
        let (x1, y1) = (x1.min(self.hi.0), y1.min(self.hi.1));
        let mut out = Vec::new();
        for i in x0..=x1 {
            for j in y0..=y1 {
                if let Some(bucket) = self.buckets.get(&(i, j)) {
                    out.extend(
                        bucket
                            .iter()
                            .copied()
                            .filter(|id| nodes[id.0].y.distance_squared(p) <= r2),
                    );
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// Radius of the shrinking near-neighbor ball for a 2-D output space,
/// `min(gamma * sqrt(ln n / n), eta)`; `n <= 1` yields `eta`.
pub fn near_radius(n: usize, gamma: f64, eta: f64) -> f64 {
    if n <= 1 {
        return eta;
    }
    let n = n as f64;
    (gamma * (n.ln() / n).sqrt()).min(eta)
}

/// Moves from `from` toward `to` by at most `eta`.
pub fn steer(from: Point2, to: Point2, eta: f64) -> Point2 {
    let d = from.distance(to);
    if d <= eta {
        to
    } else {
        from + (to - from) * (eta / d)
    }
}

#[derive(Clone, Debug)]
pub struct OutputGraph {
    nodes: Vec<OutputNode>,
    edges: Vec<OutputEdge>,
    incoming: Vec<Vec<OutputEdgeId>>,
    outgoing: Vec<Vec<OutputEdgeId>>,
    index: GridIndex,
}

impl OutputGraph {
    /// `cell` sets the spatial-index bucket size; the steering distance is a
    /// good choice.
    pub fn new(cell: f64) -> Self {
        assert!(cell > 0.0 && cell.is_finite(), "index cell size must be positive");
        OutputGraph {
            nodes: Vec::new(),
            edges: Vec::new(),
            incoming: Vec::new(),
            outgoing: Vec::new(),
            index: GridIndex::new(cell),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[OutputNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[OutputEdge] {
        &self.edges
    }

    pub fn node(&self, id: OutputNodeId) -> &OutputNode {
        &self.nodes[id.0]
    }

    pub fn node_mut(&mut self, id: OutputNodeId) -> &mut OutputNode {
        &mut self.nodes[id.0]
    }

    pub fn edge(&self, id: OutputEdgeId) -> &OutputEdge {
        &self.edges[id.0]
    }

    pub fn incoming(&self, id: OutputNodeId) -> &[OutputEdgeId] {
        &self.incoming[id.0]
    }

    pub fn outgoing(&self, id: OutputNodeId) -> &[OutputEdgeId] {
        &self.outgoing[id.0]
    }

    /// Adds a node with `g = g_bar = inf` and no parents.
    pub fn add_node(&mut self, y: Point2, h: f64) -> OutputNodeId {
        let id = OutputNodeId(self.nodes.len());
        self.nodes.push(OutputNode {
            id,
            y,
            g: f64::INFINITY,
            g_bar: f64::INFINITY,
            h,
            parent_output: None,
            parent_trajectory: None,
        });
        self.incoming.push(Vec::new());
        self.outgoing.push(Vec::new());
        self.index.insert(id, y);
        id
    }

    /// Adds the straight reference edge `tail -> head`.
    pub fn add_edge(&mut self, tail: OutputNodeId, head: OutputNodeId) -> Result<OutputEdgeId, GraphError> {
        for n in [tail, head] {
            if n.0 >= self.nodes.len() {
                return Err(GraphError::UnknownNode(n.0));
            }
        }
        if tail == head {
            return Err(GraphError::SelfLoop {
                tail: tail.0,
                head: head.0,
            });
        }
        let id = OutputEdgeId(self.edges.len());
        let reference = ReferencePath::segment(self.nodes[tail.0].y, self.nodes[head.0].y);
        self.edges.push(OutputEdge {
            id,
            tail,
            head,
            reference,
        });
        self.outgoing[tail.0].push(id);
        self.incoming[head.0].push(id);
        Ok(id)
    }

    /// Closest node by Euclidean distance; ties go to the smaller id.
    pub fn nearest(&self, y: Point2) -> Result<OutputNodeId, GraphError> {
        self.index.nearest(&self.nodes, y).ok_or(GraphError::Empty)
    }

    /// Nodes within `radius` of `y`, in ascending id order.
    pub fn within(&self, y: Point2, radius: f64) -> Vec<OutputNodeId> {
        self.index.within(&self.nodes, y, radius)
    }

    /// Near set for the current graph size.
    pub fn near(&self, y: Point2, gamma: f64, eta: f64) -> Vec<OutputNodeId> {
        self.within(y, near_radius(self.nodes.len(), gamma, eta))
    }

    /// Checks adjacency and index consistency. Intended for tests and debug
    /// builds.
    pub fn check_consistency(&self) -> Result<(), String> {
        if self.index.len() != self.nodes.len() {
            return Err(format!(
                "index holds {} entries for {} nodes",
                self.index.len(),
                self.nodes.len()
            ));
        }
        let mut inc = vec![Vec::new(); self.nodes.len()];
        let mut out = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            inc[e.head.0].push(e.id);
            out[e.tail.0].push(e.id);
            if e.reference.start() != self.nodes[e.tail.0].y || e.reference.end() != self.nodes[e.head.0].y {
                return Err(format!("edge {:?} reference does not match its endpoints", e.id));
            }
        }
        if inc != self.incoming || out != self.outgoing {
            return Err("adjacency lists disagree with edge endpoints".into());
        }
        Ok(())
    }
}
