//! Separability of bipartite Gaussian states from their covariance matrices.
//!
//! States are stored in the AB-block layout `(x_A, p_A, x_B, p_B)`. The
//! sufficient criteria work on the normalized matrix `M = (ħ/2)·Σ⁻¹`; the
//! PPT test is the matching necessary condition.

pub mod error;
pub mod geometry;
pub mod linalg;
pub mod par;
pub mod sample;
pub mod search;
pub mod separability;
pub mod state;
pub mod symplectic;

pub use error::{Error, Result};
pub use par::Execution;
pub use search::{
    assemble_certificate_from_region, region_scan, region_scan_with, search_epsilon, EpsilonSearch,
    EpsilonSearchConfig, EpsilonStrategy, FeasibilityRegion,
};
pub use separability::{
    criterion1, criterion2, criterion3, criterion4, criterion4_applicable, overall_verdict, ppt_test, run_all,
    CriterionId, SeparabilityCertificate, SeparabilityReport, Verdict,
};
pub use state::{CovarianceMatrix, GaussianState, NormalizedMatrix};
pub use symplectic::{BipartiteSplit, Subsystem, SymplecticForm};
