//! Scenario files, the closed-loop simulator, trace auditing and the dual
//! update benchmark.

pub mod bench;
pub mod campaign;
pub mod run;
pub mod scenario;
pub mod svg;
pub mod trace;
pub mod verify;

pub use bench::{run_benchmark, write_bench_csv, BenchRecord};
pub use run::{run_simulation, RunMetrics, SimOutput, Termination};
pub use scenario::{load_scenario, parse_scenario, Scenario};
pub use trace::{Trace, TraceRow};
pub use verify::{verify_trace, VerifyReport, Violation};
