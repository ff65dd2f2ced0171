//! Scenario files, experiment drivers and output writers for the `clrrt`
//! command.

pub mod bench;
pub mod output;
pub mod run;
pub mod scenario;
pub mod svg;

pub use bench::{bench, parse_seeds, summarize, BenchRow, BenchSummary};
pub use output::{emit_plan, emit_sequential, OutputOptions};
pub use run::{run_point_to_point, run_sequential, run_stage, GraphCounts, PlanResult, SequentialResult};
pub use scenario::Scenario;
