//! The three criteria that augment the diagonal blocks of `M` by a positive
//! matrix built from the coupling `M_AB` and test the symplectic spectra of
//! the results.

use nalgebra::{DMatrix, DVector};

use super::certificate::{Provenance, SeparabilityCertificate};
use super::{CriterionId, SeparabilityReport, SpectrumRecord, Verdict, Witness};
use crate::error::{Error, Result};
use crate::linalg;
use crate::state::NormalizedMatrix;
use crate::symplectic::{symplectic_eigenvalues, BipartiteSplit, Subsystem, Svd, SymplecticForm};

/// Absolute tolerance of the "symplectic eigenvalues ≤ 1" tests.
pub const SPECTRAL_TOL: f64 = 1e-10;

/// Number of singular values of `M_AB`, hence the length of `ε`.
pub fn epsilon_len(split: &BipartiteSplit) -> usize {
    2 * split.n_a().min(split.n_b())
}

/// `(M_AA + |M_AB^ε|, M_BB + |M_BA^{1/ε}|)` with, from the thin SVD
/// `M_AB = U diag(μ) Vᵀ`, `|M_AB^ε| = U diag(εμ) Uᵀ` and
/// `|M_BA^{1/ε}| = V diag(μ/ε) Vᵀ`.
pub fn augmented_blocks(m: &NormalizedMatrix, epsilon: &[f64]) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let r = epsilon_len(m.split());
    if epsilon.len() != r {
        return Err(Error::DimensionMismatch {
            expected: format!("epsilon of length {r}"),
            found: format!("length {}", epsilon.len()),
        });
    }
    if epsilon.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidEpsilon(epsilon.to_vec()));
    }
    let svd = Svd::new(&m.m_ab());
    let mu = &svd.singular_values;
    let scaled_a = DVector::from_iterator(r, mu.iter().zip(epsilon).map(|(m, e)| m * e));
    let scaled_b = DVector::from_iterator(r, mu.iter().zip(epsilon).map(|(m, e)| m / e));
    let abs_ab = &svd.u * DMatrix::from_diagonal(&scaled_a) * svd.u.transpose();
    let abs_ba = &svd.v * DMatrix::from_diagonal(&scaled_b) * svd.v.transpose();
    Ok((linalg::symmetrize(&(m.m_aa() + abs_ab)), linalg::symmetrize(&(m.m_bb() + abs_ba))))
}

fn spectra(split: &BipartiteSplit, a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<(Vec<f64>, Vec<f64>)> {
    Ok((
        symplectic_eigenvalues(a, &SymplecticForm::subsystem(split, Subsystem::A))?,
        symplectic_eigenvalues(b, &SymplecticForm::subsystem(split, Subsystem::B))?,
    ))
}

/// `max(λ_max(M̃_AA^ε), λ_max(M̃_BB^{1/ε}))`; the state is certified when this
/// is at most `1 + SPECTRAL_TOL`.
pub fn scaled_objective(m: &NormalizedMatrix, epsilon: &[f64]) -> Result<f64> {
    let (a, b) = augmented_blocks(m, epsilon)?;
    let (sa, sb) = spectra(m.split(), &a, &b)?;
    Ok(sa[0].max(sb[0]))
}

/// Builds the report for augmented blocks `(a, b)`: `Separable` iff both
/// spectra are at most one and the resulting certificate re-validates.
fn augmented_report(
    m: &NormalizedMatrix,
    id: CriterionId,
    provenance: Provenance,
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    epsilon: Option<Vec<f64>>,
) -> Result<SeparabilityReport> {
    let (sa, sb) = spectra(m.split(), &a, &b)?;
    let (max_a, max_b) = (sa[0], sb[0]);
    let mut report = SeparabilityReport::new(id, Verdict::Inconclusive);
    report.spectra.push(SpectrumRecord { label: "A".into(), values: sa });
    report.spectra.push(SpectrumRecord { label: "B".into(), values: sb });

    if max_a <= 1.0 + SPECTRAL_TOL && max_b <= 1.0 + SPECTRAL_TOL {
        let mut cert = SeparabilityCertificate::from_normalized_blocks(*m.split(), a, b, provenance)?;
        if let Some(eps) = epsilon {
            cert = cert.with_epsilon(eps);
        }
        let check = cert.validate(m)?;
        if check.valid {
            report.verdict = Verdict::Separable;
            report.certificate = Some(cert);
        } else {
            report.notes.push(format!("certificate failed re-validation: {check:?}"));
        }
    } else {
        let (side, value) = if max_a >= max_b { ("A", max_a) } else { ("B", max_b) };
        report.witness = Some(Witness {
            description: format!("largest symplectic eigenvalue of the augmented {side} block"),
            value,
            threshold: 1.0,
        });
    }
    Ok(report)
}

/// Augments both diagonal blocks by `‖M_AB‖_op · I`.
pub fn criterion1(m: &NormalizedMatrix) -> Result<SeparabilityReport> {
    let op = Svd::new(&m.m_ab()).op_norm();
    let split = m.split();
    let a = m.m_aa() + DMatrix::identity(split.dim_of(Subsystem::A), split.dim_of(Subsystem::A)) * op;
    let b = m.m_bb() + DMatrix::identity(split.dim_of(Subsystem::B), split.dim_of(Subsystem::B)) * op;
    augmented_report(m, CriterionId::Criterion1, Provenance::Criterion1, a, b, None)
}

/// Augments by the moduli `|M_AB| = (M_AB M_BA)^{1/2}` and `|M_BA|`.
///
/// This is the `ε = 1` case of [`criterion3`] and runs through the same code.
pub fn criterion2(m: &NormalizedMatrix) -> Result<SeparabilityReport> {
    let ones = vec![1.0; epsilon_len(m.split())];
    let (a, b) = augmented_blocks(m, &ones)?;
    augmented_report(m, CriterionId::Criterion2, Provenance::Criterion2, a, b, None)
}

/// Augments by the scaled moduli `|M_AB^ε|` and `|M_BA^{1/ε}|`.
pub fn criterion3(m: &NormalizedMatrix, epsilon: &[f64]) -> Result<SeparabilityReport> {
    let (a, b) = augmented_blocks(m, epsilon)?;
    augmented_report(m, CriterionId::Criterion3, Provenance::Criterion3, a, b, Some(epsilon.to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn nm(rows: &[f64]) -> NormalizedMatrix {
        NormalizedMatrix::new(BipartiteSplit::new(1, 1).unwrap(), DMatrix::from_row_slice(4, 4, rows)).unwrap()
    }

    #[rustfmt::skip]
    fn first_example() -> NormalizedMatrix {
        nm(&[
            1.0 / 2.0, 0.0, 2.0 / 3.0, 0.0,
            0.0, 1.0 / 2.0, 0.0, 1.0 / 4.0,
            2.0 / 3.0, 0.0, 1.0 / 3.0, 0.0,
            0.0, 1.0 / 4.0, 0.0, 1.0 / 4.0,
        ])
    }

    #[test]
    fn decoupled_valid_blocks_are_separable() {
        let m = nm(&[0.9, 0.1, 0.0, 0.0, 0.1, 0.8, 0.0, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0, 0.5]);
        for r in [criterion1(&m).unwrap(), criterion2(&m).unwrap()] {
            assert_eq!(r.verdict, Verdict::Separable);
            assert!(r.certificate.is_some());
        }
        let c1 = criterion1(&m).unwrap();
        let c2 = criterion2(&m).unwrap();
        assert_eq!(c1.spectra, c2.spectra);
    }

    #[test]
    fn first_example_spectra() {
        let m = first_example();
        let c1 = criterion1(&m).unwrap();
        assert_eq!(c1.verdict, Verdict::Inconclusive);
        assert!((c1.spectrum("A").unwrap()[0] - 7.0 / 6.0).abs() < 1e-12);
        assert!((c1.spectrum("B").unwrap()[0] - (11.0f64 / 12.0).sqrt()).abs() < 1e-12);
        assert!((c1.witness.unwrap().value - 7.0 / 6.0).abs() < 1e-12);
        let c2 = criterion2(&m).unwrap();
        assert_eq!(c2.verdict, Verdict::Separable);
        assert!((c2.spectrum("A").unwrap()[0] - (7.0f64 / 8.0).sqrt()).abs() < 1e-12);
        assert!((c2.spectrum("B").unwrap()[0] - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn unit_epsilon_reproduces_criterion2() {
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        for (na, nb) in [(1, 1), (1, 2), (2, 1), (2, 3)] {
            let split = BipartiteSplit::new(na, nb).unwrap();
            for _ in 0..10 {
                let m = NormalizedMatrix::new(split, sample::random_quantum_normalized(&mut rng, &split, 0.4, 0.1)).unwrap();
                let c2 = criterion2(&m).unwrap();
                let c3 = criterion3(&m, &vec![1.0; epsilon_len(&split)]).unwrap();
                assert_eq!(c2.verdict, c3.verdict);
                assert_eq!(c2.spectra, c3.spectra);
                assert_eq!(c2.witness, c3.witness);
            }
        }
    }

    #[test]
    fn modulus_of_coupling_squares_correctly() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let split = BipartiteSplit::new(1, 2).unwrap();
        let m = NormalizedMatrix::new(split, sample::random_quantum_normalized(&mut rng, &split, 0.4, 0.1)).unwrap();
        let (a, b) = augmented_blocks(&m, &[1.0, 1.0]).unwrap();
        let abs_ab = a - m.m_aa();
        let abs_ba = b - m.m_bb();
        assert!((&abs_ab * &abs_ab - m.m_ab() * m.m_ba()).amax() < 1e-12);
        assert!((&abs_ba * &abs_ba - m.m_ba() * m.m_ab()).amax() < 1e-12);
    }

    #[test]
    fn bad_epsilon_is_rejected() {
        let m = first_example();
        assert!(matches!(criterion3(&m, &[1.0, 0.0]), Err(Error::InvalidEpsilon(_))));
        assert!(matches!(criterion3(&m, &[1.0, f64::NAN]), Err(Error::InvalidEpsilon(_))));
        assert!(matches!(criterion3(&m, &[1.0]), Err(Error::DimensionMismatch { .. })));
    }
}
