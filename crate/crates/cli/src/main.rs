use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use clrrt_cli::{
    bench, emit_plan, emit_sequential, parse_seeds, run_point_to_point, run_sequential, summarize, OutputOptions,
    Scenario,
};

#[derive(Parser)]
#[command(
    name = "clrrt",
    version,
    about = "Closed-loop RRT# planning for a unicycle on a race track"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Bundled scenario name (track_pt1, track_pt2) or path to a TOML file.
    #[arg(long, default_value = "track_pt1")]
    scenario: String,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the iteration budget (per stage in sequential mode).
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Write graph.svg (default).
    #[arg(long, overrides_with = "no_svg")]
    svg: bool,
    #[arg(long, overrides_with = "svg")]
    no_svg: bool,
    /// Record wall-clock times in costs.csv and result.json.
    #[arg(long)]
    timing: bool,
}

impl Common {
    fn scenario(&self) -> Result<Scenario> {
        let mut s = Scenario::load(&self.scenario)?;
        if let Some(seed) = self.seed {
            s.seed = seed;
        }
        if let Some(n) = self.iters {
            s.iterations = n;
        }
        Ok(s)
    }

    fn options(&self) -> OutputOptions {
        OutputOptions {
            svg: !self.no_svg,
            timing: self.timing,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Plan from the start to the scenario goal.
    Plan(Common),
    /// Visit the scenario waypoints in order, one planning stage each.
    Sequential(Common),
    /// Run a scenario for several seeds and summarize final costs.
    Bench {
        #[arg(long, default_value = "track_pt1")]
        scenario: String,
        /// Seed list such as `1-20` or `1,4,9`.
        #[arg(long, default_value = "1-20", value_parser = parse_seed_list)]
        seeds: SeedList,
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Print a scenario as TOML.
    Show {
        #[arg(default_value = "track_pt1")]
        scenario: String,
    },
}

#[derive(Clone)]
struct SeedList(Vec<u64>);

fn parse_seed_list(text: &str) -> Result<SeedList, String> {
    parse_seeds(text).map(SeedList)
}

fn fmt_cost(c: Option<f64>) -> String {
    c.map_or_else(|| "none".into(), |c| format!("{c:.3}"))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Plan(args) => {
            let scenario = args.scenario()?;
            let opts = args.options();
            let result = run_point_to_point(&scenario, opts.svg)?;
            emit_plan(&args.out, &scenario, &result, opts)?;
            println!(
                "{} seed {}: best cost {} after {} iterations ({} reference nodes, {} trajectories)",
                scenario.name,
                scenario.seed,
                fmt_cost(result.best_cost()),
                scenario.iterations,
                result.counts.output_nodes,
                result.counts.trajectory_nodes
            );
            Ok(if result.best_cost().is_some() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        Command::Sequential(args) => {
            let scenario = args.scenario()?;
            anyhow::ensure!(
                !scenario.waypoints.is_empty(),
                "scenario {} has no waypoints",
                scenario.name
            );
            let opts = args.options();
            let result = run_sequential(&scenario, opts.svg)?;
            emit_sequential(&args.out, &scenario, &result, opts)?;
            for (k, stage) in result.stages.iter().enumerate() {
                println!("stage {}: best cost {}", k + 1, fmt_cost(stage.best_cost()));
            }
            match result.failed_stage {
                None => {
                    println!("total cost {}", fmt_cost(result.total_cost()));
                    Ok(ExitCode::SUCCESS)
                }
                Some(k) => {
                    eprintln!("stage {} found no solution; stopping", k + 1);
                    Ok(ExitCode::from(2))
                }
            }
        }
        Command::Bench {
            scenario,
            seeds,
            iters,
            out,
        } => {
            let mut s = Scenario::load(&scenario)?;
            if let Some(n) = iters {
                s.iterations = n;
            }
            let rows = bench(&s, &seeds.0)?;
            std::fs::create_dir_all(&out)?;
            clrrt_cli::bench::write_bench_csv(&out.join("bench.csv"), &rows)?;
            let sum = summarize(&rows);
            println!(
                "{} runs, success rate {:.2}, cost min {} / median {} / max {}, mean wall time {:.0} ms",
                sum.runs,
                sum.success_rate,
                fmt_cost(sum.min_cost),
                fmt_cost(sum.median_cost),
                fmt_cost(sum.max_cost),
                sum.mean_wall_ms
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Show { scenario } => {
            print!("{}", Scenario::load(&scenario)?.to_toml_string()?);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
