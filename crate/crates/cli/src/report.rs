//! Serializable views of the library's results.

use gaussep::separability::{CertificateCheck, Provenance, SpectrumRecord, Witness};
use gaussep::state::QuantumCondition;
use gaussep::{CriterionId, NormalizedMatrix, SeparabilityCertificate, SeparabilityReport, Verdict};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::input::{LayoutName, LoadedInput, MatrixKind};

pub type Rows = Vec<Vec<f64>>;

pub fn rows(m: &DMatrix<f64>) -> Rows {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn vector(v: &DVector<f64>) -> Vec<f64> {
    v.iter().copied().collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitEcho {
    #[serde(rename = "n_A")]
    pub n_a: usize,
    #[serde(rename = "n_B")]
    pub n_b: usize,
    pub hbar: f64,
}

/// The input as understood: hash of the raw file plus the canonical
/// AB-block matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InputEcho {
    pub path: String,
    pub sha256: String,
    pub split: SplitEcho,
    pub matrix_kind: MatrixKind,
    pub layout_in: LayoutName,
    pub layout: LayoutName,
    pub matrix: Rows,
}

impl InputEcho {
    pub fn new(input: &LoadedInput) -> Self {
        Self {
            path: input.path.clone(),
            sha256: input.sha256.clone(),
            split: SplitEcho { n_a: input.split.n_a(), n_b: input.split.n_b(), hbar: input.split.hbar() },
            matrix_kind: input.kind,
            layout_in: input.layout,
            layout: LayoutName::AbBlock,
            matrix: rows(&input.matrix),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuantumConditionDoc {
    pub holds: bool,
    /// Why the input is not a state at all (e.g. `M` is indefinite).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symplectic_spectrum: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hermitian_min_eigenvalue: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hermitian_holds: Option<bool>,
}

impl QuantumConditionDoc {
    pub fn from_check(qc: &QuantumCondition) -> Self {
        Self {
            holds: qc.holds,
            reason: (!qc.holds).then(|| "a symplectic eigenvalue of M exceeds 1".to_string()),
            symplectic_spectrum: Some(qc.symplectic_spectrum.clone()),
            margin: Some(qc.margin),
            hermitian_min_eigenvalue: Some(qc.hermitian_min_eigenvalue),
            hermitian_holds: Some(qc.hermitian_holds),
        }
    }

    pub fn not_a_state(reason: String) -> Self {
        Self {
            holds: false,
            reason: Some(reason),
            symplectic_spectrum: None,
            margin: None,
            hermitian_min_eigenvalue: None,
            hermitian_holds: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckDoc {
    pub valid: bool,
    pub domination_min_eigenvalue: f64,
    pub marginal_a_min_eigenvalue: f64,
    pub marginal_b_min_eigenvalue: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub covariance_domination: Option<bool>,
}

impl From<&CertificateCheck> for CheckDoc {
    fn from(c: &CertificateCheck) -> Self {
        Self {
            valid: c.valid,
            domination_min_eigenvalue: c.domination_min_eigenvalue,
            marginal_a_min_eigenvalue: c.marginal_a_min_eigenvalue,
            marginal_b_min_eigenvalue: c.marginal_b_min_eigenvalue,
            covariance_domination: c.covariance_domination,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateDoc {
    pub provenance: Provenance,
    pub sigma_a: Rows,
    pub sigma_b: Rows,
    pub m_a: Rows,
    pub m_b: Rows,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub check: Option<CheckDoc>,
}

impl CertificateDoc {
    pub fn new(c: &SeparabilityCertificate, m: &NormalizedMatrix) -> Self {
        Self {
            provenance: c.provenance,
            sigma_a: rows(&c.sigma_a),
            sigma_b: rows(&c.sigma_b),
            m_a: rows(&c.m_a),
            m_b: rows(&c.m_b),
            epsilon: c.epsilon.clone(),
            a: c.ab_params.as_ref().map(|p| p.0.clone()),
            b: c.ab_params.as_ref().map(|p| p.1.clone()),
            check: c.validate(m).ok().as_ref().map(CheckDoc::from),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportDoc {
    pub criterion: CriterionId,
    pub verdict: Verdict,
    pub spectra: Vec<SpectrumRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateDoc>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

impl ReportDoc {
    pub fn new(r: &SeparabilityReport, m: &NormalizedMatrix) -> Self {
        Self {
            criterion: r.criterion,
            verdict: r.verdict,
            spectra: r.spectra.clone(),
            witness: r.witness.clone(),
            certificate: r.certificate.as_ref().map(|c| CertificateDoc::new(c, m)),
            notes: r.notes.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReducedPurities {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
}

fn fmt_list(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.12}")).collect();
    format!("[{}]", parts.join(", "))
}

/// One human-readable line per report.
pub fn summary_line(r: &ReportDoc) -> String {
    let mut line = format!("{:<11} {:?}", r.criterion.name(), r.verdict);
    for s in &r.spectra {
        line.push_str(&format!("  λ_{}={}", s.label, fmt_list(&s.values)));
    }
    if let Some(w) = &r.witness {
        line.push_str(&format!("  ({}: {:.12} vs {})", w.description, w.value, w.threshold));
    }
    if let Some(c) = &r.certificate {
        if let Some(e) = &c.epsilon {
            line.push_str(&format!("  ε={}", fmt_list(e)));
        }
        if let (Some(a), Some(b)) = (&c.a, &c.b) {
            line.push_str(&format!("  a={} b={}", fmt_list(a), fmt_list(b)));
        }
        if let Some(check) = &c.check {
            line.push_str(if check.valid { "  certificate valid" } else { "  certificate INVALID" });
        }
    }
    line
}

pub fn fmt_spectrum(v: &[f64]) -> String {
    fmt_list(v)
}
