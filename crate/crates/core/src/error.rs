use std::path::PathBuf;

use thiserror::Error;

use crate::phaseless::BranchReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(
        "degenerate transmission system at order {order}: |det| = {det:.3e}, scale = {scale:.3e}"
    )]
    DegenerateTransmission { order: usize, det: f64, scale: f64 },

    #[error("series truncation failed: |a_{order}| = {tail:.3e} exceeds {tolerance:.1e} of the largest coefficient")]
    Truncation {
        order: usize,
        tail: f64,
        tolerance: f64,
    },

    #[error("linear solve failed: condition estimate {condition:.3e}")]
    SolveFailed { condition: f64 },

    #[error("eigensolver did not converge: {0}")]
    EigenFailed(String),

    #[error("empty tail band ({lo:.1e}, {hi:.1e}): no eigenvalues selected")]
    EmptyBand { lo: f64, hi: f64 },

    #[error(
        "inconsistent phaseless data at row {row}, pair ({j}, {l}): violation {violation:.3e}"
    )]
    InconsistentData {
        row: usize,
        j: usize,
        l: usize,
        violation: f64,
    },

    #[error("reciprocity alignment impossible: link graph has {} components", components.len())]
    AlignmentImpossible { components: Vec<Vec<usize>> },

    #[error("spectral disambiguation failed: direct branch {}, conjugate branch {}",
        if direct.accepted { "passed" } else { "failed" },
        if conjugate.accepted { "passed" } else { "failed" })]
    DisambiguationFailed {
        direct: Box<BranchReport>,
        conjugate: Box<BranchReport>,
    },

    #[error("config error: {}", .0.join("; "))]
    Config(Vec<String>),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
