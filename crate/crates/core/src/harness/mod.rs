//! Monte Carlo experiments, table reproduction and file output.

pub mod experiment;
pub mod figures;
pub mod output;
pub mod report;
pub mod tables;

pub use experiment::{
    data_block, db_grid, empirical_ccdf, run_config, run_experiment, run_sweep, run_trial, CcdfPoint, ConfigOutcome,
    ExperimentSpec,
};
pub use figures::{fig7_compare, k_curve, Fig7Point, KPoint};
pub use output::{emit, render, OutputFormat};
pub use report::ComplexityReport;
pub use tables::{reproduce_table, Table, TableId, TableRow};
