//! Test fixtures: a state-independent propagator and a shortest-path oracle.
#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use clrrt_core::{
    Bounds, Control, Diverged, GoalRegion, OutputNodeId, Planner, Point2, Propagate, ReferencePath, Sample, State,
    Trajectory, TrajectoryGraph, Workspace,
};

/// Propagator whose result depends only on the reference endpoints: a
/// two-chord path bent sideways by a pseudo-random amount, ending at rest
/// exactly on the reference endpoint. Some edges fail outright, and edges
/// touching `penalized` bend by twice their length.
#[derive(Clone, Copy, Debug, Default)]
pub struct Detour {
    pub failure_rate: f64,
    pub penalized: Option<Point2>,
}

fn hash01(a: Point2, b: Point2) -> f64 {
    let s = (a.x1 * 12.9898 + a.x2 * 78.233 + b.x1 * 37.719 + b.x2 * 4.581).sin() * 43758.5453;
    s - s.floor()
}

impl Detour {
    /// `None` when the edge fails.
    pub fn bend(&self, a: Point2, b: Point2) -> Option<f64> {
        if self.penalized.is_some_and(|p| p == a || p == b) {
            return Some(2.0 * a.distance(b));
        }
        let h = hash01(a, b);
        if h < self.failure_rate {
            return None;
        }
        Some(h * 0.5 * a.distance(b))
    }

    pub fn path(&self, a: Point2, b: Point2) -> Option<[Point2; 3]> {
        let bend = self.bend(a, b)?;
        let d = b - a;
        let len = d.norm();
        let normal = Point2::new(-d.x2 / len, d.x1 / len);
        Some([a, (a + b) * 0.5 + normal * bend, b])
    }

    pub fn cost(&self, a: Point2, b: Point2) -> Option<f64> {
        let [p0, p1, p2] = self.path(a, b)?;
        Some(p0.distance(p1) + p1.distance(p2))
    }
}

impl Propagate for Detour {
    fn propagate(&self, x0: &State, reference: &ReferencePath) -> Result<Trajectory, Diverged> {
        let (a, b) = (reference.start(), reference.end());
        assert_eq!(x0.position(), a, "internal state must sit on the reference start");
        let [_, mid, end] = self.path(a, b).ok_or(Diverged { time_budget: 0.0 })?;
        let sample = |t: f64, state: State| Sample {
            t,
            state,
            control: Control::ZERO,
        };
        Ok(Trajectory::new(vec![
            sample(0.0, *x0),
            sample(1.0, State::new(mid.x1, mid.x2, 0.0, 0.0)),
            sample(2.0, State::new(end.x1, end.x2, 0.0, 0.0)),
        ]))
    }
}

pub fn open_workspace(side: f64, goal: Point2, radius: f64) -> Workspace {
    Workspace::new(
        Bounds::centered_square(side),
        Vec::new(),
        GoalRegion::new(goal, radius).unwrap(),
    )
    .unwrap()
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest paths from node 0 over a weighted multigraph.
pub fn dijkstra(n: usize, edges: &[(usize, usize, f64)]) -> Vec<f64> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v, w) in edges {
        adj[u].push((v, w));
    }
    let mut dist = vec![f64::INFINITY; n];
    let mut heap = BinaryHeap::new();
    dist[0] = 0.0;
    heap.push(Entry(0.0, 0));
    while let Some(Entry(d, u)) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, w) in &adj[u] {
            if d + w < dist[v] {
                dist[v] = d + w;
                heap.push(Entry(dist[v], v));
            }
        }
    }
    dist
}

/// Edges of the multigraph over output nodes induced by every evaluated
/// trajectory.
pub fn evaluated_edges(graph: &TrajectoryGraph) -> Vec<(usize, usize, f64)> {
    graph
        .nodes()
        .iter()
        .filter_map(|t| {
            let p = t.parent?;
            Some((graph.node(p).realizes.0, t.realizes.0, t.trajectory.cost()))
        })
        .collect()
}

/// Every output-graph edge priced directly by the detour model.
pub fn reference_edges<P>(planner: &Planner<P>, detour: &Detour) -> Vec<(usize, usize, f64)>
where
    P: Propagate,
{
    let ws = planner.workspace();
    planner
        .outputs()
        .edges()
        .iter()
        .filter_map(|e| {
            let (a, b) = (planner.outputs().node(e.tail).y, planner.outputs().node(e.head).y);
            let path = detour.path(a, b)?;
            let free = ws.segment_collision_free(path[0], path[1]) && ws.segment_collision_free(path[1], path[2]);
            free.then(|| (e.tail.0, e.head.0, detour.cost(a, b).unwrap()))
        })
        .collect()
}

pub fn g_values<P: Propagate>(planner: &Planner<P>) -> Vec<f64> {
    (0..planner.outputs().len())
        .map(|i| planner.outputs().node(OutputNodeId(i)).g)
        .collect()
}

/// Sorted-list model of the planner queue: entries ordered by key, then by
/// the time their key was last set.
#[derive(Debug, Default)]
pub struct ListQueue {
    entries: Vec<(clrrt_core::Key, u64, u32)>,
    clock: u64,
}

impl ListQueue {
    pub fn insert(&mut self, item: u32, key: clrrt_core::Key) {
        self.remove(item);
        self.clock += 1;
        let entry = (key, self.clock, item);
        let at = self.entries.partition_point(|e| (e.0, e.1) < (entry.0, entry.1));
        self.entries.insert(at, entry);
    }

    pub fn remove(&mut self, item: u32) -> Option<clrrt_core::Key> {
        let at = self.entries.iter().position(|e| e.2 == item)?;
        Some(self.entries.remove(at).0)
    }

    pub fn pop(&mut self) -> Option<(u32, clrrt_core::Key)> {
        (!self.entries.is_empty()).then(|| {
            let e = self.entries.remove(0);
            (e.2, e.0)
        })
    }

    pub fn contents(&self) -> Vec<(u32, clrrt_core::Key)> {
        self.entries.iter().map(|e| (e.2, e.0)).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }
}

/// Drives the real queue and the list model through `ops` random
/// operations, panicking on the first disagreement.
pub fn run_queue_model(seed: u64, ops: usize) {
    use clrrt_core::{Key, PriorityQueue};
    use rand::{Rng, SeedableRng};

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut real = PriorityQueue::new();
    let mut model = ListQueue::default();
    // Few distinct values so ties in both components are common.
    let component = |rng: &mut rand_chacha::ChaCha8Rng| match rng.gen_range(0..8) {
        0 => f64::INFINITY,
        k => f64::from(k) * 0.5,
    };
    for step in 0..ops {
        let item = rng.gen_range(0..64u32);
        match rng.gen_range(0..10) {
            0..=3 => {
                let key = Key::new(component(&mut rng), component(&mut rng));
                real.insert(item, key);
                model.insert(item, key);
            }
            4..=5 => {
                if real.contains(item) {
                    let key = Key::new(component(&mut rng), component(&mut rng));
                    real.update(item, key);
                    model.insert(item, key);
                }
            }
            6..=7 => assert_eq!(real.remove(item), model.remove(item), "remove at step {step}"),
            _ => assert_eq!(real.pop(), model.pop(), "pop at step {step}"),
        }
        assert_eq!(real.len(), model.len());
        assert_eq!(real.top_key(), model.contents().first().map_or(Key::INFINITE, |e| e.1));
        if step % 97 == 0 {
            assert_eq!(real.to_sorted_vec(), model.contents(), "order at step {step}");
        }
    }
    while let Some(e) = model.pop() {
        assert_eq!(real.pop(), Some(e));
    }
    assert!(real.is_empty());
}
