//! Phaseless two-wave data and the constructive retrieval of the full
//! far-field kernel from it.
//!
//! The pipeline: cross terms from the moduli, per-row phases from cosine
//! relations, reciprocity alignment of the rows, and a spectral test that
//! removes the remaining global phase and conjugation.

mod align;
mod dataset;
mod disambiguate;
mod rows;

pub use align::{reciprocity_align, Alignment, AlignmentReport};
pub use dataset::{
    compare_datasets, dataset_difference, synth_dataset, ComparisonReport, DatasetMeta, PairScheme,
    PhaselessDataset,
};
pub use disambiguate::{
    fit_rotation, retrieve, spectral_disambiguation, Branch, BranchReport, RetrievalDiagnostics,
    RetrievedKernel, HALF_PLANE_TOLERANCE, TAIL_ACCEPT,
};
pub use rows::{
    cross_terms, cross_terms_with_tolerance, row_phase_retrieval, CrossTerms, RetrievedRow,
    DEFAULT_DATA_TOLERANCE, MIN_REFERENCE_SINE,
};

/// Moduli below this fraction of the largest are treated as exact zeros.
pub const ACTIVITY_FLOOR: f64 = 1e-10;
