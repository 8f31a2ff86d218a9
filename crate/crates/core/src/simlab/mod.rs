//! Fat-tree topologies, stochastic chain workloads and the event loop that
//! replays them against a solver.

mod catalog;
mod experiment;
mod topology;
mod workload;

pub use catalog::{chain_template, default_catalog};
pub use experiment::{
    run_experiment, summarize, summary_rows, write_records_csv, write_summary_csv, ChainRecord, ExperimentConfig,
    ExperimentMetrics, SolverKind, Summary, TopologySpec,
};
pub use topology::{generate_fat_tree, hosts, HostProfile};
pub use workload::{generate_workload, ChainArrival, Event, EventKind, Workload};
