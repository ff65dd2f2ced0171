mod common;

use clrrt_core::{
    plan, Bounds, ClosedLoop, ControllerParams, ExtendOutcome, GoalRegion, Obstacle, OutputNodeId, Planner,
    PlannerParams, Point2, SimLimits, State, TrajectoryGraph, Workspace,
};
use common::{dijkstra, evaluated_edges, g_values, open_workspace, reference_edges, Detour};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn closed_loop() -> ClosedLoop {
    ClosedLoop::unicycle(ControllerParams::default(), SimLimits::default()).unwrap()
}

fn uninformed() -> PlannerParams {
    PlannerParams {
        use_heuristic: false,
        ..PlannerParams::default()
    }
}

#[test]
fn initialize_builds_single_root() {
    let ws = open_workspace(40.0, Point2::new(10.0, 10.0), 1.0);
    let p = Planner::new(
        State::new(0.0, 0.0, 0.0, 0.0),
        ws.clone(),
        PlannerParams::default(),
        closed_loop(),
    )
    .unwrap();
    assert_eq!((p.outputs().len(), p.trajectories().len()), (1, 1));
    assert_eq!((p.outputs().edge_count(), p.trajectories().edge_count()), (0, 0));
    assert!(p.queue().is_empty() && p.goal_queue().is_empty());
    assert!(p.outputs().node(p.root()).h > 0.0);
    let sol = p.construct_solution();
    assert!(sol.tree.is_empty() && sol.best.is_none());
    assert_eq!(p.trajectories().node(sol.root).trajectory.len(), 1);

    let inside = Planner::new(
        State::new(10.0, 10.5, 0.0, 0.0),
        ws,
        PlannerParams::default(),
        closed_loop(),
    )
    .unwrap();
    assert_eq!(inside.outputs().node(inside.root()).h, 0.0);
}

#[test]
fn start_in_collision_is_rejected() {
    let ws = Workspace::new(
        Bounds::centered_square(40.0),
        vec![Obstacle::circle(Point2::new(0.0, 0.0), 2.0).unwrap()],
        GoalRegion::new(Point2::new(10.0, 10.0), 1.0).unwrap(),
    )
    .unwrap();
    assert!(Planner::new(
        State::new(1.0, 0.0, 0.0, 0.0),
        ws,
        PlannerParams::default(),
        closed_loop()
    )
    .is_err());
}

#[test]
fn first_extension_in_open_workspace() {
    let ws = open_workspace(40.0, Point2::new(15.0, 15.0), 1.0);
    let mut p = Planner::new(
        State::new(0.0, 0.0, 0.0, 0.0),
        ws,
        PlannerParams::default(),
        closed_loop(),
    )
    .unwrap();
    let out = p.extend(Point2::new(0.0, 6.0)).unwrap();
    let ExtendOutcome::Added(v) = out else {
        panic!("expected a new node, got {out:?}")
    };
    assert_eq!(p.outputs().len(), 2);
    assert_eq!(p.outputs().incoming(v).len(), 1);
    assert_eq!(p.outputs().outgoing(v).len(), 1);
    assert_eq!(p.trajectories().len(), 2);
    let node = p.outputs().node(v);
    assert!(node.g.is_infinite() && node.g_bar.is_finite());
    assert_eq!(node.parent_output, Some(p.root()));
    assert!(p.queue().contains(v));
    p.check_invariants().unwrap();
}

#[test]
fn samples_beyond_eta_are_steered() {
    let ws = open_workspace(40.0, Point2::new(15.0, 15.0), 1.0);
    let mut p = Planner::new(
        State::new(0.0, 0.0, 0.0, 0.0),
        ws,
        PlannerParams::default(),
        closed_loop(),
    )
    .unwrap();
    let ExtendOutcome::Added(v) = p.extend(Point2::new(0.0, 19.0)).unwrap() else {
        panic!()
    };
    assert!((p.outputs().node(v).y.x2 - 8.0).abs() < 1e-12);
}

#[test]
fn blocked_extension_leaves_graph_unchanged() {
    let ws = Workspace::new(
        Bounds::centered_square(40.0),
        vec![Obstacle::rectangle(Point2::new(-5.0, 2.0), Point2::new(5.0, 3.0)).unwrap()],
        GoalRegion::new(Point2::new(15.0, 15.0), 1.0).unwrap(),
    )
    .unwrap();
    let mut p = Planner::new(
        State::new(0.0, 0.0, 0.0, 0.0),
        ws,
        PlannerParams::default(),
        closed_loop(),
    )
    .unwrap();
    assert_eq!(p.extend(Point2::new(0.0, 6.0)).unwrap(), ExtendOutcome::Blocked);
    assert_eq!(p.extend(Point2::new(0.0, 0.0)).unwrap(), ExtendOutcome::Duplicate);
    assert_eq!(
        (p.outputs().len(), p.outputs().edge_count(), p.trajectories().len()),
        (1, 0, 1)
    );
}

#[test]
fn goal_node_enters_goal_queue() {
    let ws = open_workspace(40.0, Point2::new(0.0, 6.0), 1.0);
    let mut p = Planner::new(
        State::new(0.0, 0.0, 0.0, 0.0),
        ws,
        PlannerParams::default(),
        closed_loop(),
    )
    .unwrap();
    let ExtendOutcome::Added(v) = p.extend(Point2::new(0.0, 6.0)).unwrap() else {
        panic!()
    };
    let g_bar = p.outputs().node(v).g_bar;
    assert_eq!(p.goal_queue().key_of(v).map(|k| (k.k1, k.k2)), Some((g_bar, 0.0)));
    assert_eq!(p.best_cost(), Some(g_bar));
    p.replan().unwrap();
    p.check_invariants().unwrap();
}

#[test]
fn replan_on_empty_queue_is_a_no_op() {
    let ws = open_workspace(40.0, Point2::new(10.0, 10.0), 1.0);
    let mut p = Planner::new(
        State::new(0.0, 0.0, 0.0, 0.0),
        ws,
        PlannerParams::default(),
        closed_loop(),
    )
    .unwrap();
    p.replan().unwrap();
    p.replan_exhaustive().unwrap();
    assert_eq!(p.stats().pops, 0);
    assert_eq!(p.trajectories().len(), 1);
}

#[test]
fn zero_iterations_give_empty_log() {
    let ws = open_workspace(40.0, Point2::new(10.0, 10.0), 1.0);
    let mut p = Planner::new(
        State::new(0.0, 0.0, 0.0, 0.0),
        ws,
        PlannerParams::default(),
        closed_loop(),
    )
    .unwrap();
    assert!(plan(&mut p, 0, 3).unwrap().is_empty());
    assert!(p.construct_solution().best.is_none());
}

// S, M and G lie on a straight line, but every trajectory touching M bends
// hard, so the geometrically longer route through L1 and L2 is cheaper.
#[test]
fn longer_route_with_cheaper_trajectories_wins() {
    let ws = open_workspace(60.0, Point2::new(0.0, 14.0), 0.5);
    let m = Point2::new(0.0, 7.0);
    let detour = Detour {
        penalized: Some(m),
        ..Detour::default()
    };
    let (s, _, l1, l2, r, g) = (
        Point2::new(0.0, 0.0),
        Point2::new(0.0, 7.0),
        Point2::new(-4.0, 4.0),
        Point2::new(-4.0, 10.0),
        Point2::new(5.0, 5.0),
        Point2::new(0.0, 14.0),
    );
    let mut p = Planner::new(State::new(s.x1, s.x2, 0.0, 0.0), ws, uninformed(), detour).unwrap();
    for y in [m, l1, l2, r, g] {
        assert!(matches!(p.extend(y).unwrap(), ExtendOutcome::Added(_)));
        p.replan().unwrap();
    }
    p.replan_exhaustive().unwrap();
    p.check_invariants().unwrap();

    let straight = detour.cost(s, m).unwrap() + detour.cost(m, g).unwrap();
    let sol = p.construct_solution();
    let best = sol.best.as_ref().unwrap();
    let via: Vec<Point2> = best
        .segments
        .iter()
        .map(|&t| p.outputs().node(p.trajectories().node(t).realizes).y)
        .collect();
    let oracle = dijkstra(p.outputs().len(), &evaluated_edges(p.trajectories()));
    assert!((best.cost - oracle[5]).abs() <= 1e-9);
    assert!(best.cost < straight);
    assert!(!via.contains(&m), "best route {via:?} should avoid the middle node");
    assert!(via.first() == Some(&s) && via.last() == Some(&g));
    let geometric: f64 = via.windows(2).map(|w| w[0].distance(w[1])).sum();
    assert!(geometric > s.distance(g));
    assert_eq!(sol.tree.len(), 5);
}

#[test]
fn drained_replan_matches_dijkstra_on_random_states() {
    let detour = Detour {
        failure_rate: 0.15,
        penalized: None,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let ws = open_workspace(50.0, Point2::new(20.0, 20.0), 2.0);
        let mut p = Planner::new(State::new(-20.0, -20.0, 0.0, 0.0), ws, uninformed(), detour).unwrap();
        let target = rng.gen_range(10..=100);
        while p.outputs().len() < target {
            let y = Point2::new(rng.gen_range(-25.0..25.0), rng.gen_range(-25.0..25.0));
            p.extend(y).unwrap();
            if rng.gen_bool(0.3) {
                p.replan().unwrap();
            }
        }
        p.replan_exhaustive().unwrap();
        p.check_invariants().unwrap();
        let g = g_values(&p);
        for oracle in [
            dijkstra(g.len(), &evaluated_edges(p.trajectories())),
            dijkstra(g.len(), &reference_edges(&p, &detour)),
        ] {
            for (i, (a, b)) in g.iter().zip(&oracle).enumerate() {
                assert!(a == b || (a - b).abs() <= 1e-9, "node {i}: planner {a}, oracle {b}");
            }
        }
    }
}

#[test]
fn solution_chain_cost_and_tree_bookkeeping() {
    let ws = Workspace::new(
        Bounds::centered_square(60.0),
        vec![Obstacle::rectangle(Point2::new(-8.0, -8.0), Point2::new(8.0, 8.0)).unwrap()],
        GoalRegion::new(Point2::new(20.0, 20.0), 2.0).unwrap(),
    )
    .unwrap();
    let mut p = Planner::new(
        State::new(-20.0, -20.0, 0.0, 0.0),
        ws,
        PlannerParams::default(),
        closed_loop(),
    )
    .unwrap();
    let log = plan(&mut p, 400, 5).unwrap();
    p.check_invariants().unwrap();
    assert!(log.windows(2).all(|w| match (w[0].best_cost, w[1].best_cost) {
        (Some(a), Some(b)) => b <= a,
        (Some(_), None) => false,
        _ => true,
    }));

    let sol = p.construct_solution();
    let finite = p
        .outputs()
        .nodes()
        .iter()
        .skip(1)
        .filter(|n| n.g_bar.is_finite())
        .count();
    assert_eq!(sol.tree.len(), finite);
    for e in &sol.tree {
        let parent = p.trajectories().node(e.from);
        assert_eq!(e.trajectory.first().state, *parent.terminal_state());
        assert!(clrrt_core::trajectory_collision_free(p.workspace(), &e.trajectory));
        let y = p.outputs().node(e.output_node).y;
        assert!(e.trajectory.last().state.position().distance(y) <= 0.5);
    }

    let in_tree: std::collections::HashSet<_> = sol.tree.iter().map(|e| e.to).collect();
    for e in &sol.support {
        assert!(!in_tree.contains(&e.to));
        assert_eq!(
            e.trajectory.first().state,
            *p.trajectories().node(e.from).terminal_state()
        );
    }
    let closed: std::collections::HashSet<_> = sol.tree.iter().chain(&sol.support).map(|e| e.to).collect();
    for e in sol.tree.iter().chain(&sol.support) {
        assert!(e.from == TrajectoryGraph::ROOT || closed.contains(&e.from));
    }

    let best = sol.best.expect("400 iterations reach the goal");
    assert_eq!(best.segments[0], TrajectoryGraph::ROOT);
    let sum: f64 = best
        .segments
        .iter()
        .map(|&t| p.trajectories().node(t).trajectory.cost())
        .sum();
    assert!((sum - best.cost).abs() <= 1e-9);
    assert!((best.trajectory.cost() - best.cost).abs() <= 1e-9);
    assert!(p.workspace().in_goal(p.outputs().node(best.goal).y));
    assert_eq!(best.trajectory.first().state, State::new(-20.0, -20.0, 0.0, 0.0));
    assert!(best.trajectory.samples().windows(2).all(|w| w[1].t > w[0].t));
}

#[test]
fn plan_is_deterministic() {
    let run = || {
        let ws = open_workspace(40.0, Point2::new(12.0, 12.0), 1.5);
        let mut p = Planner::new(
            State::new(-12.0, -12.0, 0.0, 0.0),
            ws,
            PlannerParams::default(),
            closed_loop(),
        )
        .unwrap();
        let log: Vec<_> = plan(&mut p, 150, 42)
            .unwrap()
            .into_iter()
            .map(|r| (r.best_cost, r.output_nodes, r.trajectory_nodes))
            .collect();
        let traj = p.construct_solution().best.map(|b| b.trajectory);
        (log, traj)
    };
    assert_eq!(run(), run());
}

#[test]
fn goal_node_improved_twice_keeps_one_entry() {
    let ws = open_workspace(40.0, Point2::new(0.0, 8.0), 3.0);
    let mut p = Planner::new(State::new(0.0, 0.0, 0.0, 0.0), ws, uninformed(), Detour::default()).unwrap();
    for y in [Point2::new(0.0, 8.0), Point2::new(2.0, 4.0), Point2::new(-2.0, 4.0)] {
        p.extend(y).unwrap();
        p.replan_exhaustive().unwrap();
    }
    let goal = OutputNodeId(1);
    assert_eq!(p.goal_queue().items().filter(|&v| v == goal).count(), 1);
    assert_eq!(p.goal_queue().key_of(goal).unwrap().k1, p.outputs().node(goal).g_bar);
}

mod properties {
    use super::*;
    use clrrt_core::{sample_free, Key};
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn replan_leaves_promising_nodes_stationary(seed in any::<u64>()) {
            let ws = Workspace::new(
                Bounds::centered_square(40.0),
                vec![Obstacle::circle(Point2::new(0.0, 0.0), 5.0).unwrap()],
                GoalRegion::new(Point2::new(14.0, 14.0), 2.0).unwrap(),
            )
            .unwrap();
            let mut p = Planner::new(State::new(-14.0, -14.0, 0.0, 0.0), ws, PlannerParams::default(), closed_loop()).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut best = f64::INFINITY;
            for _ in 0..80 {
                let y = sample_free(p.workspace(), &mut rng).unwrap();
                p.extend(y).unwrap();
                p.replan().unwrap();
                let top = p.goal_queue().top_key();
                for n in p.outputs().nodes() {
                    if Key::new(n.g_bar + n.h, n.g_bar) < top {
                        prop_assert_eq!(n.g, n.g_bar);
                    }
                }
                let now = p.best_cost().unwrap_or(f64::INFINITY);
                prop_assert!(now <= best);
                best = now;
            }
            p.check_invariants().unwrap();
        }
    }
}
