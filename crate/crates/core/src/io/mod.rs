//! Scenario files, run reports and exported artifacts.

mod export;
mod report;
mod scenario;

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::dynamics::DynamicsError;

pub use export::{
    dot_for_signs, export_dot, read_summary, write_influence_csv, write_run,
    write_trajectory_csv, DOT_FILE, INFLUENCE_FILE, SUMMARY_FILE, TRAJECTORY_FILE,
};
pub use report::{
    analyze, Analysis, PropertyStatus, RunReport, CLOSED_FORM_RESIDUAL_TOL, CLOSED_FORM_TOL,
    EQUIVALENCE_TOL, LOCK_EXTRA_STEPS,
};
pub use scenario::{load_scenario, parse_scenario, save_scenario, Scenario, ScenarioFile};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error(transparent)]
    Validation(#[from] DynamicsError),
    #[error("{0}")]
    Invalid(String),
}

impl IoError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io { path: path.to_path_buf(), source }
    }
}

/// Analyses a scenario and writes its artifacts into `out_dir`. Files are
/// written for non-converged runs too; the report carries the flag.
pub fn run(scenario: &Scenario, out_dir: &Path) -> Result<RunReport, IoError> {
    let analysis = analyze(scenario)?;
    write_run(out_dir, &analysis.report, &analysis.outcome)?;
    Ok(analysis.report)
}
