use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::state::{uncertainty_matrix, NormalizedMatrix};
use crate::symplectic::{williamson_decompose, BipartiteSplit, Subsystem, SymplecticForm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Provenance {
    Criterion1,
    Criterion2,
    Criterion3,
    Criterion4,
    UserSupplied,
}

/// A pair of marginal covariance matrices `(Σ_A, Σ_B)` with `Σ ≥ Σ_A ⊕ Σ_B`,
/// stored together with their normalized forms `M_A = (ħ/2)Σ_A⁻¹`, `M_B`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparabilityCertificate {
    pub split: BipartiteSplit,
    pub sigma_a: DMatrix<f64>,
    pub sigma_b: DMatrix<f64>,
    pub m_a: DMatrix<f64>,
    pub m_b: DMatrix<f64>,
    pub provenance: Provenance,
    pub epsilon: Option<Vec<f64>>,
    pub ab_params: Option<(Vec<f64>, Vec<f64>)>,
}

/// Independent re-validation of a certificate against a state.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateCheck {
    /// Smallest eigenvalue of `Σ_A + (iħ/2)J_A`.
    pub marginal_a_min_eigenvalue: f64,
    pub marginal_b_min_eigenvalue: f64,
    pub marginal_a: bool,
    pub marginal_b: bool,
    /// Smallest eigenvalue of `M_A ⊕ M_B − M`.
    pub domination_min_eigenvalue: f64,
    pub domination: bool,
    /// `Σ − Σ_A ⊕ Σ_B ≥ 0`; only evaluated when `M` is positive definite.
    pub covariance_domination: Option<bool>,
    pub valid: bool,
}

fn check_block(split: &BipartiteSplit, sub: Subsystem, m: &DMatrix<f64>) -> Result<()> {
    let dim = split.dim_of(sub);
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: format!("{dim}x{dim}"),
            found: format!("{}x{}", m.nrows(), m.ncols()),
        });
    }
    linalg::check_symmetric(m, 1e-9)
}

impl SeparabilityCertificate {
    pub fn from_normalized_blocks(
        split: BipartiteSplit,
        m_a: DMatrix<f64>,
        m_b: DMatrix<f64>,
        provenance: Provenance,
    ) -> Result<Self> {
        check_block(&split, Subsystem::A, &m_a)?;
        check_block(&split, Subsystem::B, &m_b)?;
        let half = split.hbar() / 2.0;
        let (m_a, m_b) = (linalg::symmetrize(&m_a), linalg::symmetrize(&m_b));
        let sigma_a = linalg::inverse_spd(&m_a, "M_A")? * half;
        let sigma_b = linalg::inverse_spd(&m_b, "M_B")? * half;
        Ok(Self { split, sigma_a, sigma_b, m_a, m_b, provenance, epsilon: None, ab_params: None })
    }

    pub fn from_covariance_blocks(
        split: BipartiteSplit,
        sigma_a: DMatrix<f64>,
        sigma_b: DMatrix<f64>,
        provenance: Provenance,
    ) -> Result<Self> {
        check_block(&split, Subsystem::A, &sigma_a)?;
        check_block(&split, Subsystem::B, &sigma_b)?;
        let half = split.hbar() / 2.0;
        let (sigma_a, sigma_b) = (linalg::symmetrize(&sigma_a), linalg::symmetrize(&sigma_b));
        let m_a = linalg::inverse_spd(&sigma_a, "Σ_A")? * half;
        let m_b = linalg::inverse_spd(&sigma_b, "Σ_B")? * half;
        Ok(Self { split, sigma_a, sigma_b, m_a, m_b, provenance, epsilon: None, ab_params: None })
    }

    pub fn with_epsilon(mut self, epsilon: Vec<f64>) -> Self {
        self.epsilon = Some(epsilon);
        self
    }

    pub fn with_ab(mut self, a: Vec<f64>, b: Vec<f64>) -> Self {
        self.ab_params = Some((a, b));
        self
    }

    /// Re-checks the certificate from scratch against `m`, using only PSD
    /// tests (no symplectic spectra).
    pub fn validate(&self, m: &NormalizedMatrix) -> Result<CertificateCheck> {
        if m.split().n_a() != self.split.n_a() || m.split().n_b() != self.split.n_b() {
            return Err(Error::DimensionMismatch {
                expected: format!("split ({}, {})", self.split.n_a(), self.split.n_b()),
                found: format!("split ({}, {})", m.split().n_a(), m.split().n_b()),
            });
        }
        let hbar = self.split.hbar();
        let marginal = |sigma: &DMatrix<f64>, sub| {
            let h = uncertainty_matrix(sigma, &SymplecticForm::subsystem(&self.split, sub), hbar);
            let min = linalg::hermitian_min_eigenvalue(&h);
            (min, min >= linalg::psd_threshold(linalg::inf_norm_c(&h)))
        };
        let (ma_min, ma_ok) = marginal(&self.sigma_a, Subsystem::A);
        let (mb_min, mb_ok) = marginal(&self.sigma_b, Subsystem::B);

        let gap = linalg::direct_sum(&self.m_a, &self.m_b) - m.matrix();
        let dom_min = linalg::min_eigenvalue(&gap);
        let dom_ok = dom_min >= linalg::psd_threshold(linalg::inf_norm(&gap));

        let covariance_domination = if m.is_positive_definite() {
            let sigma = m.to_covariance()?;
            Some(linalg::is_psd(&(sigma.matrix() - linalg::direct_sum(&self.sigma_a, &self.sigma_b))))
        } else {
            None
        };
        let valid = ma_ok && mb_ok && dom_ok && covariance_domination.unwrap_or(true);
        Ok(CertificateCheck {
            marginal_a_min_eigenvalue: ma_min,
            marginal_b_min_eigenvalue: mb_min,
            marginal_a: ma_ok,
            marginal_b: mb_ok,
            domination_min_eigenvalue: dom_min,
            domination: dom_ok,
            covariance_domination,
            valid,
        })
    }

    /// Symplectic `S_A`, `S_B` whose blobs `S B(√ħ)` lie inside the
    /// certificate's marginal ellipsoids: with `M_A = Wᵀ D W` (Williamson),
    /// `S_A = W⁻¹` gives `(S_A S_Aᵀ)⁻¹ = WᵀW ≥ M_A`.
    pub fn blob_symplectics(&self) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let inv = |m: &DMatrix<f64>, sub| -> Result<DMatrix<f64>> {
            let w = williamson_decompose(m, &SymplecticForm::subsystem(&self.split, sub))?;
            w.s.try_inverse().ok_or_else(|| Error::NotPositiveDefinite { what: "Williamson factor".into() })
        };
        Ok((inv(&self.m_a, Subsystem::A)?, inv(&self.m_b, Subsystem::B)?))
    }
}
