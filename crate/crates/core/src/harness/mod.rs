//! Config-driven experiments: plan, per-seed streams, checkpoint profile,
//! ratios, summaries and persisted artefacts.

mod output;
mod run;
mod spec;

pub use output::{emit_results, rows_csv, EmittedFiles};
pub use run::{run_experiment, summarize, CheckpointSummary, ExperimentResult, Quartiles, ResultRow, Summary, Trend};
pub use spec::{ExperimentSpec, ModeChoice, Norming, PlanSource, PropertyB, Seeds, SCHEMA};

use crate::dynamics::DynamicsError;
use crate::regvar::RegVarError;
use crate::sequences::SequenceError;
use crate::trimming::TrimmingError;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error(transparent)]
    RegVar(#[from] RegVarError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Trimming(#[from] TrimmingError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl HarnessError {
    /// Process exit status: 3 for anything wrong with the input, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Io { .. } => 1,
            _ => 3,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.into(), source }
    }
}
