use nalgebra::DMatrix;

use super::{CriterionId, SeparabilityReport, SpectrumRecord, Verdict, Witness};
use crate::error::{Error, Result};
use crate::state::{check_quantum_condition, CovarianceMatrix, QUANTUM_TOL};
use crate::symplectic::{symplectic_eigenvalues, BipartiteSplit, SymplecticForm};

/// `Ī m Ī`, where `Ī` flips the sign of every `p_B` coordinate.
pub fn partial_transpose_matrix(split: &BipartiteSplit, m: &DMatrix<f64>) -> DMatrix<f64> {
    let p_b_start = 2 * split.n_a() + split.n_b();
    let sign = |i: usize| if i >= p_b_start { -1.0 } else { 1.0 };
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| sign(i) * sign(j) * m[(i, j)])
}

pub fn partial_transpose(sigma: &CovarianceMatrix) -> CovarianceMatrix {
    CovarianceMatrix::new(*sigma.split(), partial_transpose_matrix(sigma.split(), sigma.matrix()))
        .expect("congruence by a signature matrix preserves validity")
}

/// Peres–Horodecki test: `NotSeparable` when the partially transposed
/// covariance violates the quantum condition, `Inconclusive` otherwise.
///
/// The witness is the smallest symplectic eigenvalue `ν̃` of `Σ̄`, which must
/// be at least `ħ/2` for a separable state.
pub fn ppt_test(sigma: &CovarianceMatrix) -> Result<SeparabilityReport> {
    let qc = check_quantum_condition(sigma)?;
    if !qc.holds {
        return Err(Error::InvalidState { max_eigenvalue: 1.0 - qc.margin });
    }
    let split = sigma.split();
    let j = SymplecticForm::ab_block(split);
    let m_bar = partial_transpose_matrix(split, sigma.to_normalized().matrix());
    let spectrum = symplectic_eigenvalues(&m_bar, &j)?;
    let max = spectrum[0];
    let half = split.hbar() / 2.0;
    let verdict = if max > 1.0 + QUANTUM_TOL { Verdict::NotSeparable } else { Verdict::Inconclusive };
    let mut report = SeparabilityReport::new(CriterionId::Ppt, verdict);
    report.witness = Some(Witness {
        description: "smallest symplectic eigenvalue of the partially transposed covariance".into(),
        value: half / max,
        threshold: half,
    });
    report.spectra.push(SpectrumRecord { label: "partial_transpose_M".into(), values: spectrum });
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;
    use crate::sample::two_mode_squeezed;

    fn split11() -> BipartiteSplit {
        BipartiteSplit::new(1, 1).unwrap()
    }

    #[test]
    fn involution_and_sign_pattern() {
        let split = split11();
        let m = DMatrix::from_fn(4, 4, |i, j| 1.0 + (i + j) as f64 + if i == j { 10.0 } else { 0.0 });
        let t = partial_transpose_matrix(&split, &m);
        assert_eq!(partial_transpose_matrix(&split, &t), m);
        // (x_A, p_B) and (p_A, p_B) couplings flip; (x_A, x_B) and (p_A, x_B) do not
        assert_eq!(t[(0, 3)], -m[(0, 3)]);
        assert_eq!(t[(1, 3)], -m[(1, 3)]);
        assert_eq!(t[(0, 2)], m[(0, 2)]);
        assert_eq!(t[(1, 2)], m[(1, 2)]);
        assert_eq!(t[(3, 3)], m[(3, 3)]);
    }

    #[test]
    fn momentum_symmetric_product_state_is_invariant() {
        let split = split11();
        let sa = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 1.0]);
        let sb = DMatrix::from_row_slice(2, 2, &[0.8, 0.0, 0.0, 0.9]);
        let cov = CovarianceMatrix::new(split, linalg::direct_sum(&sa, &sb)).unwrap();
        assert_eq!(partial_transpose(&cov), cov);
        assert_eq!(ppt_test(&cov).unwrap().verdict, Verdict::Inconclusive);
    }

    #[test]
    fn squeezed_state_violates_ppt() {
        let r = ppt_test(&two_mode_squeezed(1.0, 1.0).unwrap()).unwrap();
        assert_eq!(r.verdict, Verdict::NotSeparable);
        let w = r.witness.unwrap();
        assert!((w.value - 0.5 * (-2.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn invalid_state_is_an_error() {
        let cov = CovarianceMatrix::new(split11(), DMatrix::identity(4, 4) * 0.25).unwrap();
        assert!(matches!(ppt_test(&cov), Err(Error::InvalidState { .. })));
    }
}
