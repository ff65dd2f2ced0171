//! Graph snapshot as SVG: references in orange, trajectories in green, the
//! best path on top.

use std::fmt::Write;

use clrrt_core::{Obstacle, Planner, Point2, Propagate, Solution, Trajectory};

/// Keep every n-th sample of a trajectory polyline, plus its endpoints.
const DECIMATION: usize = 20;

fn pt(p: Point2) -> String {
    // SVG y grows downward
    format!("{:.2},{:.2}", p.x1, -p.x2)
}

fn polyline_points(traj: &Trajectory, step: usize) -> String {
    let s = traj.samples();
    let last = s.len() - 1;
    let mut out = String::new();
    for (i, sample) in s.iter().enumerate() {
        if i % step == 0 || i == last {
            if !out.is_empty() {
                out.push(' ');
            }
            out.push_str(&pt(sample.state.position()));
        }
    }
    out
}

pub fn render<P: Propagate>(planner: &Planner<P>, solution: &Solution) -> String {
    let ws = planner.workspace();
    let b = ws.bounds();
    let (w, h) = (b.width(), b.height());
    let stroke = w.max(h) / 800.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{:.3} {:.3} {w:.3} {h:.3}" width="800" height="{:.0}">"#,
        b.min.x1,
        -b.max.x2,
        800.0 * h / w
    );
    let _ = writeln!(
        s,
        r#"<rect x="{:.3}" y="{:.3}" width="{w:.3}" height="{h:.3}" fill="white" stroke="black" stroke-width="{:.3}"/>"#,
        b.min.x1,
        -b.max.x2,
        2.0 * stroke
    );

    s.push_str("<g id=\"obstacles\" fill=\"red\" fill-opacity=\"0.6\">\n");
    for o in ws.obstacles() {
        match o {
            Obstacle::Circle { center, radius } => {
                let _ = writeln!(
                    s,
                    r#"<circle cx="{:.3}" cy="{:.3}" r="{radius:.3}"/>"#,
                    center.x1, -center.x2
                );
            }
            Obstacle::Polygon { vertices } => {
                let pts: Vec<String> = vertices.iter().map(|&v| pt(v)).collect();
                let _ = writeln!(s, r#"<polygon points="{}"/>"#, pts.join(" "));
            }
        }
    }
    s.push_str("</g>\n");

    let _ = writeln!(
        s,
        r#"<g id="reference-graph" stroke="orange" stroke-width="{stroke:.3}">"#
    );
    let outputs = planner.outputs();
    for e in outputs.edges() {
        let (a, c) = (outputs.node(e.tail).y, outputs.node(e.head).y);
        let _ = writeln!(
            s,
            r#"<line class="reference" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}"/>"#,
            a.x1, -a.x2, c.x1, -c.x2
        );
    }
    s.push_str("</g>\n");

    let _ = writeln!(
        s,
        r#"<g id="trajectory-graph" stroke="green" fill="none" stroke-width="{stroke:.3}">"#
    );
    for e in planner.trajectories().edges() {
        let _ = writeln!(
            s,
            r#"<polyline class="trajectory" points="{}"/>"#,
            polyline_points(&e.trajectory, DECIMATION)
        );
    }
    s.push_str("</g>\n");

    if let Some(best) = &solution.best {
        let _ = writeln!(
            s,
            r#"<polyline id="best-path" stroke="gold" fill="none" stroke-width="{:.3}" points="{}"/>"#,
            4.0 * stroke,
            polyline_points(&best.trajectory, 1)
        );
    }

    let goal = ws.goal();
    let _ = writeln!(
        s,
        r#"<circle id="goal" cx="{:.3}" cy="{:.3}" r="{:.3}" fill="none" stroke="blue" stroke-width="{:.3}"/>"#,
        goal.center.x1,
        -goal.center.x2,
        goal.radius,
        2.0 * stroke
    );
    let start = outputs.node(planner.root()).y;
    let _ = writeln!(
        s,
        r#"<circle id="start" cx="{:.3}" cy="{:.3}" r="{:.3}" fill="blue"/>"#,
        start.x1,
        -start.x2,
        w / 100.0
    );
    s.push_str("</svg>\n");
    s
}
