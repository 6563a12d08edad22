//! Multi-seed surrogate comparison: config, runs, aggregation and plots.

pub mod aggregate;
pub mod config;
pub mod plot;
pub mod runner;

pub use aggregate::{aggregate, aggregate_and_plot, find_run_files, AggregateRow};
pub use config::ExperimentConfig;
pub use runner::{evaluate, random_policy_returns, run_experiment, run_single, thread_budget, EvalRow, ExperimentOutputs, RunRecord};
