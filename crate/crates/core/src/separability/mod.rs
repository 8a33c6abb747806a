//! Separability decisions: the PPT necessary test, four sufficient criteria
//! and their certificates.
//!
//! Sufficient criteria answer `Separable` (with a certificate that is
//! re-validated before it is returned) or `Inconclusive`; only the PPT test
//! can answer `NotSeparable`.

mod certificate;
mod criteria;
mod normal_form;
mod ppt;
mod run;

use serde::{Deserialize, Serialize};

pub use certificate::{CertificateCheck, Provenance, SeparabilityCertificate};
pub use criteria::{augmented_blocks, criterion1, criterion2, criterion3, epsilon_len, scaled_objective, SPECTRAL_TOL};
pub use normal_form::{
    b_lower, b_upper, criterion4, criterion4_applicable, criterion4_with, lemma_ab, lemma_quadratic, LemmaQuadratic, NormalForm,
    PATTERN_TOL,
};
pub use ppt::{partial_transpose, partial_transpose_matrix, ppt_test};
pub use run::{analyze_batch, criterion4_searched, first_separable, overall_verdict, run_all, run_all_normalized, run_all_with, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Separable,
    NotSeparable,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CriterionId {
    Ppt,
    Criterion1,
    Criterion2,
    Criterion3,
    Criterion4,
}

impl CriterionId {
    pub fn name(self) -> &'static str {
        match self {
            CriterionId::Ppt => "ppt",
            CriterionId::Criterion1 => "criterion1",
            CriterionId::Criterion2 => "criterion2",
            CriterionId::Criterion3 => "criterion3",
            CriterionId::Criterion4 => "criterion4",
        }
    }
}

/// The quantity that decided (or blocked) a verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub description: String,
    pub value: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRecord {
    pub label: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparabilityReport {
    pub criterion: CriterionId,
    pub verdict: Verdict,
    pub certificate: Option<SeparabilityCertificate>,
    pub witness: Option<Witness>,
    pub spectra: Vec<SpectrumRecord>,
    pub notes: Vec<String>,
}

impl SeparabilityReport {
    pub(crate) fn new(criterion: CriterionId, verdict: Verdict) -> Self {
        Self { criterion, verdict, certificate: None, witness: None, spectra: Vec::new(), notes: Vec::new() }
    }

    pub fn spectrum(&self, label: &str) -> Option<&[f64]> {
        self.spectra.iter().find(|s| s.label == label).map(|s| s.values.as_slice())
    }

    pub fn is_separable(&self) -> bool {
        self.verdict == Verdict::Separable
    }
}
