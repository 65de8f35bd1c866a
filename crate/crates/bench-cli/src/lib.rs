//! Experiment runner: generates confounded worlds, trains every method
//! over a (confounding level x seed) grid, aggregates coefficient MSEs
//! with across-seed standard errors, runs the theory-check suite and the
//! retail benchmark, and emits plot-ready CSV.

pub mod bench;
pub mod config;
pub mod methods;
pub mod outputs;
pub mod retail_bench;
pub mod theory_suite;

pub use bench::{run_benchmark, BenchReport, CellMetrics, CellOutcome, PredRow, ReportRow};
pub use config::{ExperimentConfig, Method, TrainOverrides};
pub use outputs::{emit_outputs, parse_results_csv, RESULTS_HEADER};
pub use retail_bench::{retail_overrides, retail_smoke_bench, synthetic_transactions, RetailBenchRow};
pub use theory_suite::run_theory_suite;
