//! Simulation harness: scenario files, trace persistence, plots, and batch
//! reports.

pub mod plot;
pub mod scenario;
pub mod suite;
pub mod trace;

pub use plot::{emit_plot, render_svg};
pub use scenario::{load_scenario, ObstacleSpec, Params, RobotSpec, Scenario};
pub use suite::{run_suite, SuiteEntry, SuiteFailure, SuiteReport};
pub use trace::{timing_stats, Outcome, SimTrace, TimingStats, TraceRow};
