//! Multi-seed runs of one scenario.

use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use crate::run::run_point_to_point;
use crate::scenario::Scenario;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub seed: u64,
    pub best_cost: Option<f64>,
    pub first_solution_iteration: Option<usize>,
    pub output_nodes: usize,
    pub trajectory_nodes: usize,
    pub wall_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchSummary {
    pub runs: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub min_cost: Option<f64>,
    pub median_cost: Option<f64>,
    pub max_cost: Option<f64>,
    pub mean_wall_ms: f64,
}

/// Median of a non-empty sample; the mean of the two middle values for even
/// sizes.
pub fn median(values: &[f64]) -> Option<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    match n {
        0 => None,
        _ if n % 2 == 1 => Some(v[n / 2]),
        _ => Some(0.5 * (v[n / 2 - 1] + v[n / 2])),
    }
}

pub fn summarize(rows: &[BenchRow]) -> BenchSummary {
    let costs: Vec<f64> = rows.iter().filter_map(|r| r.best_cost).collect();
    let runs = rows.len();
    BenchSummary {
        runs,
        successes: costs.len(),
        success_rate: if runs == 0 {
            0.0
        } else {
            costs.len() as f64 / runs as f64
        },
        min_cost: costs.iter().copied().reduce(f64::min),
        median_cost: median(&costs),
        max_cost: costs.iter().copied().reduce(f64::max),
        mean_wall_ms: if runs == 0 {
            0.0
        } else {
            rows.iter().map(|r| r.wall_ms).sum::<f64>() / runs as f64
        },
    }
}

/// Runs the scenario once per seed, one after another.
pub fn bench(scenario: &Scenario, seeds: &[u64]) -> Result<Vec<BenchRow>> {
    seeds
        .iter()
        .map(|&seed| {
            let s = Scenario {
                seed,
                ..scenario.clone()
            };
            let r = run_point_to_point(&s, false).with_context(|| format!("seed {seed}"))?;
            Ok(BenchRow {
                seed,
                best_cost: r.best_cost(),
                first_solution_iteration: r.first_solution_iteration(),
                output_nodes: r.counts.output_nodes,
                trajectory_nodes: r.counts.trajectory_nodes,
                wall_ms: r.wall_time.as_secs_f64() * 1e3,
            })
        })
        .collect()
}

pub fn write_bench_csv(path: &Path, rows: &[BenchRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().with_context(|| format!("writing {}", path.display()))
}

/// Parses seed lists such as `1-20` or `3,5,8-10`.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>, String> {
    let mut seeds = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let a: u64 = a.trim().parse().map_err(|e| format!("{part}: {e}"))?;
                let b: u64 = b.trim().parse().map_err(|e| format!("{part}: {e}"))?;
                if a > b {
                    return Err(format!("{part}: empty range"));
                }
                seeds.extend(a..=b);
            }
            None => seeds.push(part.parse().map_err(|e| format!("{part}: {e}"))?),
        }
    }
    if seeds.is_empty() {
        return Err("no seeds given".into());
    }
    Ok(seeds)
}
