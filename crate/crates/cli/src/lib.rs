//! Experiment runner: sweeps colluder-set sizes over selection methods and
//! strategies on generated or ingested graphs, and writes per-trial CSV rows
//! plus a per-cell summary.

pub mod config;
pub mod experiment;

pub use config::{
    from_table, parse_config, ConfigError, ExperimentConfig, GeneratorSpec, GraphSource, Metric, StrategyLabel, Sweep,
};
pub use experiment::{run_experiment, run_on_graph, Report, Row, RunError};
