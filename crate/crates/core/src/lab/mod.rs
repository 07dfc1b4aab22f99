//! Experiment harness: function corpus, configuration, runners and reports.

pub mod config;
pub mod corpus;
pub mod experiments;
pub mod report;

pub use config::{Experiment, ExperimentConfig, OutputFormat};
pub use experiments::{
    run, run_bernstein_inequality, run_direct, run_inverse_consistency, run_lemma_suite, run_modulus,
    run_psi, run_scheme,
};
pub use report::{RateReport, ReportRow};
