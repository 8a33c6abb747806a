//! Gaussian states described by their covariance matrix `Σ` or, equivalently,
//! by the normalized matrix `M = (ħ/2) Σ⁻¹` of the covariance ellipsoid
//! `{z : Mz·z ≤ ħ}`.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, Complex64};
use crate::par::{self, Execution};
use crate::sample;
use crate::symplectic::{self, BipartiteSplit, Subsystem, SymplecticForm};

/// Tolerance of the "symplectic eigenvalues ≤ 1" test.
pub const QUANTUM_TOL: f64 = 1e-10;

/// Symmetry tolerance for matrices handed to the constructors.
const SYMMETRY_TOL: f64 = 1e-12;

fn check_dim(split: &BipartiteSplit, m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != split.dim() || m.ncols() != split.dim() {
        return Err(Error::DimensionMismatch {
            expected: format!("{0}x{0}", split.dim()),
            found: format!("{}x{}", m.nrows(), m.ncols()),
        });
    }
    Ok(())
}

/// Diagonal or off-diagonal block of a matrix in AB-block layout.
pub fn sub_block(split: &BipartiteSplit, m: &DMatrix<f64>, row: Subsystem, col: Subsystem) -> DMatrix<f64> {
    linalg::block(
        m,
        split.offset_of(row),
        split.offset_of(col),
        split.dim_of(row),
        split.dim_of(col),
    )
}

/// A symmetric positive-definite covariance matrix in AB-block layout.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    split: BipartiteSplit,
    sigma: DMatrix<f64>,
}

impl CovarianceMatrix {
    pub fn new(split: BipartiteSplit, sigma: DMatrix<f64>) -> Result<Self> {
        check_dim(&split, &sigma)?;
        linalg::check_symmetric(&sigma, SYMMETRY_TOL)?;
        let sigma = linalg::symmetrize(&sigma);
        linalg::require_positive_definite(&sigma, "covariance matrix")?;
        Ok(Self { split, sigma })
    }

    /// `Σ = (ħ/2) M⁻¹`; requires `M` positive definite.
    pub fn from_normalized(m: &NormalizedMatrix) -> Result<Self> {
        let sigma = linalg::inverse_spd(m.matrix(), "M")? * (m.split().hbar() / 2.0);
        Self::new(*m.split(), sigma)
    }

    pub fn split(&self) -> &BipartiteSplit {
        &self.split
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn block(&self, row: Subsystem, col: Subsystem) -> DMatrix<f64> {
        sub_block(&self.split, &self.sigma, row, col)
    }

    pub fn sigma_aa(&self) -> DMatrix<f64> {
        self.block(Subsystem::A, Subsystem::A)
    }

    pub fn sigma_ab(&self) -> DMatrix<f64> {
        self.block(Subsystem::A, Subsystem::B)
    }

    pub fn sigma_bb(&self) -> DMatrix<f64> {
        self.block(Subsystem::B, Subsystem::B)
    }

    pub fn to_normalized(&self) -> NormalizedMatrix {
        let m = linalg::inverse_spd(&self.sigma, "covariance matrix").expect("checked at construction")
            * (self.split.hbar() / 2.0);
        NormalizedMatrix { split: self.split, m, positive_definite: true }
    }

    /// The same matrix with a different value of ħ (entries unchanged).
    pub fn with_split(&self, split: BipartiteSplit) -> Result<Self> {
        Self::new(split, self.sigma.clone())
    }
}

/// The normalized matrix `M = (ħ/2)Σ⁻¹`, in AB-block layout.
///
/// The separability criteria are statements about the quadratic form `M`
/// and only need the diagonal blocks `M_AA`, `M_BB` to be positive definite;
/// whether `M` itself is positive definite (i.e. comes from a state) is
/// recorded separately.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedMatrix {
    split: BipartiteSplit,
    m: DMatrix<f64>,
    positive_definite: bool,
}

impl NormalizedMatrix {
    pub fn new(split: BipartiteSplit, m: DMatrix<f64>) -> Result<Self> {
        check_dim(&split, &m)?;
        linalg::check_symmetric(&m, SYMMETRY_TOL)?;
        let m = linalg::symmetrize(&m);
        linalg::require_positive_definite(&sub_block(&split, &m, Subsystem::A, Subsystem::A), "M_AA")?;
        linalg::require_positive_definite(&sub_block(&split, &m, Subsystem::B, Subsystem::B), "M_BB")?;
        let positive_definite = linalg::is_positive_definite(&m);
        Ok(Self { split, m, positive_definite })
    }

    pub fn split(&self) -> &BipartiteSplit {
        &self.split
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// Whether `M` is positive definite, i.e. describes an actual state.
    pub fn is_positive_definite(&self) -> bool {
        self.positive_definite
    }

    pub fn block(&self, row: Subsystem, col: Subsystem) -> DMatrix<f64> {
        sub_block(&self.split, &self.m, row, col)
    }

    pub fn m_aa(&self) -> DMatrix<f64> {
        self.block(Subsystem::A, Subsystem::A)
    }

    pub fn m_ab(&self) -> DMatrix<f64> {
        self.block(Subsystem::A, Subsystem::B)
    }

    pub fn m_ba(&self) -> DMatrix<f64> {
        self.block(Subsystem::B, Subsystem::A)
    }

    pub fn m_bb(&self) -> DMatrix<f64> {
        self.block(Subsystem::B, Subsystem::B)
    }

    pub fn to_covariance(&self) -> Result<CovarianceMatrix> {
        CovarianceMatrix::from_normalized(self)
    }

    /// Symplectic spectrum of `M` with respect to `J_AB`, descending.
    pub fn symplectic_spectrum(&self) -> Result<Vec<f64>> {
        symplectic::symplectic_eigenvalues(&self.m, &SymplecticForm::ab_block(&self.split))
    }
}

/// Outcome of the quantum-condition test.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumCondition {
    pub holds: bool,
    /// Symplectic spectrum of `M`, descending.
    pub symplectic_spectrum: Vec<f64>,
    /// `1 − max symplectic eigenvalue of M`.
    pub margin: f64,
    /// Smallest eigenvalue of the Hermitian matrix `Σ + (iħ/2) J_AB`.
    pub hermitian_min_eigenvalue: f64,
    /// Verdict of the Hermitian PSD test alone.
    pub hermitian_holds: bool,
}

/// `Σ + (iħ/2) J`.
pub fn uncertainty_matrix(sigma: &DMatrix<f64>, j: &SymplecticForm, hbar: f64) -> DMatrix<Complex64> {
    let mut h = linalg::to_complex(sigma);
    for (z, &jv) in h.iter_mut().zip(j.matrix().iter()) {
        z.im += 0.5 * hbar * jv;
    }
    h
}

/// The quantum condition `Σ + (iħ/2)J ≥ 0`, decided through the symplectic
/// spectrum of `M` and cross-checked with a Hermitian eigenvalue test.
pub fn check_quantum_condition(sigma: &CovarianceMatrix) -> Result<QuantumCondition> {
    let split = sigma.split();
    let j = SymplecticForm::ab_block(split);
    let m = sigma.to_normalized();
    let spectrum = symplectic::symplectic_eigenvalues(m.matrix(), &j)?;
    let max = spectrum.first().copied().unwrap_or(0.0);
    let h = uncertainty_matrix(sigma.matrix(), &j, split.hbar());
    let hmin = linalg::hermitian_min_eigenvalue(&h);
    Ok(QuantumCondition {
        holds: max <= 1.0 + QUANTUM_TOL,
        symplectic_spectrum: spectrum,
        margin: 1.0 - max,
        hermitian_min_eigenvalue: hmin,
        hermitian_holds: hmin >= linalg::psd_threshold(linalg::inf_norm_c(&h)),
    })
}

/// A Gaussian state: a covariance matrix satisfying the quantum condition
/// and a mean vector (carried along, never used by the separability logic).
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    covariance: CovarianceMatrix,
    mean: DVector<f64>,
}

impl GaussianState {
    pub fn new(covariance: CovarianceMatrix) -> Result<Self> {
        let dim = covariance.split().dim();
        Self::with_mean(covariance, DVector::zeros(dim))
    }

    pub fn with_mean(covariance: CovarianceMatrix, mean: DVector<f64>) -> Result<Self> {
        if mean.len() != covariance.split().dim() {
            return Err(Error::DimensionMismatch {
                expected: format!("mean of length {}", covariance.split().dim()),
                found: format!("length {}", mean.len()),
            });
        }
        let qc = check_quantum_condition(&covariance)?;
        if !qc.holds {
            return Err(Error::InvalidState { max_eigenvalue: 1.0 - qc.margin });
        }
        Ok(Self { covariance, mean })
    }

    pub fn covariance(&self) -> &CovarianceMatrix {
        &self.covariance
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn split(&self) -> &BipartiteSplit {
        self.covariance.split()
    }

    pub fn normalized(&self) -> NormalizedMatrix {
        self.covariance.to_normalized()
    }
}

/// Parameters `(X, Y)` of the pure Gaussian `exp(−(X + iY)x·x / 2ħ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureGaussianParams {
    x: DMatrix<f64>,
    y: DMatrix<f64>,
}

impl PureGaussianParams {
    pub fn new(x: DMatrix<f64>, y: DMatrix<f64>) -> Result<Self> {
        linalg::check_symmetric(&x, SYMMETRY_TOL)?;
        linalg::check_symmetric(&y, SYMMETRY_TOL)?;
        if x.shape() != y.shape() {
            return Err(Error::DimensionMismatch {
                expected: format!("{0}x{0}", x.nrows()),
                found: format!("{}x{}", y.nrows(), y.ncols()),
            });
        }
        linalg::require_positive_definite(&x, "X")?;
        Ok(Self { x: linalg::symmetrize(&x), y: linalg::symmetrize(&y) })
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DMatrix<f64> {
        &self.y
    }

    pub fn modes(&self) -> usize {
        self.x.nrows()
    }

    /// The symplectic `S` with `G = SᵀS`, global layout.
    pub fn symplectic(&self) -> DMatrix<f64> {
        sample::symplectic_from_xy(&self.x, &self.y).expect("X checked positive definite")
    }

    /// `G = [[X + Y X⁻¹ Y, Y X⁻¹], [X⁻¹ Y, X⁻¹]]`, global layout.
    pub fn gram(&self) -> DMatrix<f64> {
        let s = self.symplectic();
        linalg::symmetrize(&(s.transpose() * s))
    }
}

/// The pure state with Wigner ellipsoid `G = SᵀS`, i.e. `Σ = (ħ/2)G⁻¹`.
/// The `n = n_A + n_B` modes of `params` are ordered A first, then B.
pub fn from_pure_params(params: &PureGaussianParams, split: &BipartiteSplit) -> Result<GaussianState> {
    if params.modes() != split.modes() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} modes", split.modes()),
            found: format!("{} modes", params.modes()),
        });
    }
    let g = split.global_to_ab(&params.gram());
    let sigma = linalg::inverse_spd(&g, "G")? * (split.hbar() / 2.0);
    GaussianState::new(CovarianceMatrix::new(*split, linalg::symmetrize(&sigma))?)
}

/// `(ħ/2)^n (det Σ)^{-1/2}`, which equals `√det M`.
pub fn purity(state: &GaussianState) -> f64 {
    let split = state.split();
    let chol = linalg::require_positive_definite(state.covariance().matrix(), "covariance matrix")
        .expect("checked at construction");
    // log det Σ = 2 Σ log L_ii
    let log_det: f64 = chol.l_dirty().diagonal().iter().map(|x| 2.0 * x.ln()).sum();
    let n = split.modes() as f64;
    (n * (split.hbar() / 2.0).ln() - 0.5 * log_det).exp()
}

/// `|det Σ − (ħ/2)^{2n}| ≤ tol · (ħ/2)^{2n}`.
pub fn is_pure(state: &GaussianState, tol: f64) -> bool {
    let split = state.split();
    let reference = (split.hbar() / 2.0).powi(2 * split.modes() as i32);
    (state.covariance().matrix().determinant() - reference).abs() <= tol * reference
}

/// The marginal state of one subsystem.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedState {
    pub subsystem: Subsystem,
    pub hbar: f64,
    /// The diagonal block `Σ_AA` (or `Σ_BB`).
    pub sigma: DMatrix<f64>,
    /// The Schur complement `M/M_BB` (or `M/M_AA`).
    pub normalized: DMatrix<f64>,
    pub mean: DVector<f64>,
}

impl ReducedState {
    pub fn modes(&self) -> usize {
        self.sigma.nrows() / 2
    }

    pub fn symplectic_form(&self) -> SymplecticForm {
        SymplecticForm::standard(self.modes())
    }

    pub fn check_quantum_condition(&self) -> Result<QuantumCondition> {
        let j = self.symplectic_form();
        let spectrum = symplectic::symplectic_eigenvalues(&self.normalized, &j)?;
        let max = spectrum.first().copied().unwrap_or(0.0);
        let h = uncertainty_matrix(&self.sigma, &j, self.hbar);
        let hmin = linalg::hermitian_min_eigenvalue(&h);
        Ok(QuantumCondition {
            holds: max <= 1.0 + QUANTUM_TOL,
            symplectic_spectrum: spectrum,
            margin: 1.0 - max,
            hermitian_min_eigenvalue: hmin,
            hermitian_holds: hmin >= linalg::psd_threshold(linalg::inf_norm_c(&h)),
        })
    }

    /// `√det` of the Schur complement.
    pub fn purity(&self) -> f64 {
        self.normalized.determinant().max(0.0).sqrt()
    }
}

/// Schur complement of the block of `m` indexed by `eliminate`, keeping `keep`:
/// `M_kk − M_ke M_ee⁻¹ M_ek`.
pub fn schur_complement_indices(m: &DMatrix<f64>, keep: &[usize], eliminate: &[usize]) -> Result<DMatrix<f64>> {
    let pick = |rows: &[usize], cols: &[usize]| DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])]);
    let kk = pick(keep, keep);
    if eliminate.is_empty() {
        return Ok(kk);
    }
    let ee = pick(eliminate, eliminate);
    let condition = linalg::spd_condition(&ee);
    if !(condition <= 1e12) {
        return Err(Error::SingularBlock { condition });
    }
    let ke = pick(keep, eliminate);
    let chol = linalg::require_positive_definite(&ee, "eliminated block")?;
    let x = chol.solve(&ke.transpose());
    Ok(linalg::symmetrize(&(kk - ke * x)))
}

/// Reduced normalized matrix: `M/M_BB` when keeping A, `M/M_AA` when keeping B.
pub fn schur_of(split: &BipartiteSplit, m: &DMatrix<f64>, keep: Subsystem) -> Result<DMatrix<f64>> {
    let range = |s: Subsystem| (split.offset_of(s)..split.offset_of(s) + split.dim_of(s)).collect::<Vec<_>>();
    schur_complement_indices(m, &range(keep), &range(keep.other()))
}

pub fn reduce(state: &GaussianState, subsystem: Subsystem) -> Result<ReducedState> {
    let split = state.split();
    let sigma = state.covariance().block(subsystem, subsystem);
    let normalized = schur_of(split, state.normalized().matrix(), subsystem)?;
    let off = split.offset_of(subsystem);
    let mean = state.mean().rows(off, split.dim_of(subsystem)).into_owned();
    Ok(ReducedState { subsystem, hbar: split.hbar(), sigma, normalized, mean })
}

pub fn reduced_purity(state: &GaussianState, subsystem: Subsystem) -> Result<f64> {
    Ok(reduce(state, subsystem)?.purity())
}

/// Result of the finite-sample positivity check.
#[derive(Debug, Clone, PartialEq)]
pub struct KlmCheck {
    pub samples: usize,
    pub radius: f64,
    pub seed: u64,
    pub min_eigenvalue: f64,
    pub passed: bool,
}

/// Default sampling radius `3·√(ħ · max symplectic eigenvalue of M)`.
pub fn default_klm_radius(sigma: &CovarianceMatrix) -> Result<f64> {
    let spectrum = sigma.to_normalized().symplectic_spectrum()?;
    Ok(3.0 * (sigma.split().hbar() * spectrum[0]).sqrt())
}

pub const DEFAULT_KLM_SAMPLES: usize = 64;

/// Finite-sample test of the positivity conditions on the symplectic Fourier
/// transform of the Wigner function.
///
/// Draws `n` points uniformly from a ball and forms the Hermitian matrix
/// `Λ_jk = exp(−(iħ/2)σ(z_j, z_k)) · exp(−½ (JᵀΣJ)(z_j − z_k)·(z_j − z_k))`
/// with `σ(z, z') = Jz·z'`. A valid state gives `Λ ≥ 0` for every point set;
/// a negative eigenvalue below `−1e−8·n` is a witness of invalidity. Passing
/// is never a proof of validity.
pub fn klm_sample_check(
    sigma: &CovarianceMatrix,
    n: usize,
    radius: Option<f64>,
    seed: u64,
    exec: Execution,
) -> Result<KlmCheck> {
    if n == 0 {
        return Err(Error::InvalidSampleCount(n));
    }
    let radius = match radius {
        Some(r) => r,
        None => default_klm_radius(sigma)?,
    };
    let split = sigma.split();
    let hbar = split.hbar();
    let j = SymplecticForm::ab_block(split);
    let jm = j.matrix();
    let dual = jm.transpose() * sigma.matrix() * jm;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<DVector<f64>> = (0..n).map(|_| sample::uniform_in_ball(&mut rng, split.dim(), radius)).collect();

    let rows: Vec<Vec<Complex64>> = par::map_indexed(exec, n, |r| {
        (0..n)
            .map(|c| {
                let (zj, zk) = (&points[r], &points[c]);
                let symp = zk.dot(&(jm * zj));
                let dz = zj - zk;
                let amplitude = (-0.5 * dz.dot(&(&dual * &dz))).exp();
                Complex64::from_polar(amplitude, -0.5 * hbar * symp)
            })
            .collect()
    });
    let lambda = DMatrix::from_fn(n, n, |r, c| rows[r][c]);
    let min_eigenvalue = linalg::hermitian_min_eigenvalue(&lambda);
    Ok(KlmCheck { samples: n, radius, seed, min_eigenvalue, passed: min_eigenvalue >= -1e-8 * n as f64 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample;
    use rand::SeedableRng;

    fn split11() -> BipartiteSplit {
        BipartiteSplit::new(1, 1).unwrap()
    }

    fn diag(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(v))
    }

    fn state(sigma: DMatrix<f64>, split: BipartiteSplit) -> Result<GaussianState> {
        GaussianState::new(CovarianceMatrix::new(split, sigma)?)
    }

    #[test]
    fn minimum_uncertainty_state() {
        for hbar in [1.0, 2.0, 0.3] {
            let split = BipartiteSplit::with_hbar(1, 2, hbar).unwrap();
            let cov = CovarianceMatrix::new(split, DMatrix::identity(6, 6) * (hbar / 2.0)).unwrap();
            let qc = check_quantum_condition(&cov).unwrap();
            assert!(qc.holds && qc.hermitian_holds);
            assert!(qc.margin.abs() < 1e-12);
            assert!(qc.symplectic_spectrum.iter().all(|&l| (l - 1.0).abs() < 1e-12));
            let st = GaussianState::new(cov).unwrap();
            assert!((purity(&st) - 1.0).abs() < 1e-12);
            assert!(is_pure(&st, 1e-10));
        }
    }

    #[test]
    fn sub_heisenberg_state_is_rejected() {
        let split = BipartiteSplit::new(1, 1).unwrap();
        let cov = CovarianceMatrix::new(split, DMatrix::identity(4, 4) * 0.25).unwrap();
        let qc = check_quantum_condition(&cov).unwrap();
        assert!(!qc.holds && !qc.hermitian_holds);
        assert!((qc.symplectic_spectrum[0] - 2.0).abs() < 1e-12);
        assert!(matches!(GaussianState::new(cov), Err(Error::InvalidState { .. })));
    }

    #[test]
    fn thermal_state_purity() {
        let st = state(DMatrix::identity(4, 4), split11()).unwrap();
        assert!((purity(&st) - 0.25).abs() < 1e-14);
        assert!(!is_pure(&st, 1e-10));
        for sub in [Subsystem::A, Subsystem::B] {
            assert!((reduced_purity(&st, sub).unwrap() - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn purity_matches_sqrt_det_m() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let split = BipartiteSplit::with_hbar(2, 1, 0.7).unwrap();
        for _ in 0..50 {
            let st = sample::random_quantum_state(&mut rng, &split, 0.5);
            let det_m = st.normalized().matrix().determinant();
            assert!((purity(&st) - det_m.sqrt()).abs() < 1e-10);
        }
    }

    #[test]
    fn coherent_state_from_pure_params() {
        let p = PureGaussianParams::new(DMatrix::identity(2, 2), DMatrix::zeros(2, 2)).unwrap();
        assert_eq!(p.gram(), DMatrix::<f64>::identity(4, 4));
        let st = from_pure_params(&p, &split11()).unwrap();
        assert!((st.covariance().matrix() - DMatrix::<f64>::identity(4, 4) * 0.5).amax() < 1e-15);
    }

    #[test]
    fn squeezed_gram_matrix() {
        let p = PureGaussianParams::new(diag(&[2.0]), diag(&[0.0])).unwrap();
        assert!((p.gram() - diag(&[2.0, 0.5])).amax() < 1e-15);
    }

    #[test]
    fn random_pure_states_are_pure() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for (na, nb) in [(1, 1), (1, 2), (2, 2)] {
            let split = BipartiteSplit::with_hbar(na, nb, 1.3).unwrap();
            let j = SymplecticForm::standard(split.modes());
            for _ in 0..20 {
                let p = sample::random_pure_params(&mut rng, split.modes(), 0.6);
                assert!(symplectic::is_symplectic(&p.symplectic(), &j, 1e-9).unwrap());
                let st = from_pure_params(&p, &split).unwrap();
                assert!(is_pure(&st, 1e-8));
                assert!((purity(&st) - 1.0).abs() < 1e-9);
                let qc = check_quantum_condition(st.covariance()).unwrap();
                assert!(qc.margin.abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn pure_state_total_purity_from_reduced_block() {
        // Σ = (ħ/2)(SᵀS)⁻¹ is pure whatever the symplectic S.
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let split = BipartiteSplit::new(1, 1).unwrap();
        let jab = SymplecticForm::ab_block(&split);
        let s = sample::random_symplectic_in(&mut rng, &jab, 0.7);
        let sigma = linalg::inverse_spd(&(s.transpose() * &s), "G").unwrap() * 0.5;
        let st = state(linalg::symmetrize(&sigma), split).unwrap();
        assert!(is_pure(&st, 1e-8));
        // reduced states of a pure state are at most as pure
        for sub in [Subsystem::A, Subsystem::B] {
            assert!(reduced_purity(&st, sub).unwrap() <= purity(&st) + 1e-10);
        }
    }

    #[test]
    fn product_state_reduces_to_its_factors() {
        let sa = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 0.8]);
        let sb = DMatrix::from_row_slice(2, 2, &[0.6, 0.0, 0.0, 0.9]);
        let st = state(linalg::direct_sum(&sa, &sb), split11()).unwrap();
        let ra = reduce(&st, Subsystem::A).unwrap();
        assert_eq!(ra.sigma, sa);
        let expected = linalg::inverse_spd(&sa, "s").unwrap() * 0.5;
        assert!((ra.normalized - expected).amax() < 1e-14);
    }

    #[test]
    fn reduced_normalized_matrix_is_inverse_of_reduced_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for (na, nb) in [(1, 1), (2, 1), (1, 3), (2, 2)] {
            let split = BipartiteSplit::with_hbar(na, nb, 2.0).unwrap();
            for _ in 0..25 {
                let st = sample::random_quantum_state(&mut rng, &split, 0.5);
                for sub in [Subsystem::A, Subsystem::B] {
                    let r = reduce(&st, sub).unwrap();
                    let from_sigma = linalg::inverse_spd(&r.sigma, "s").unwrap() * (split.hbar() / 2.0);
                    let scale = linalg::inf_norm(&from_sigma);
                    assert!(linalg::inf_norm(&(from_sigma - &r.normalized)) <= 1e-10 * scale);
                    assert!(r.check_quantum_condition().unwrap().holds);
                }
            }
        }
    }

    #[test]
    fn schur_determinant_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let split = BipartiteSplit::new(2, 1).unwrap();
        for _ in 0..100 {
            let s = sample::random_spd(&mut rng, 6, 0.4);
            let schur = schur_of(&split, &s, Subsystem::A).unwrap();
            let det_bb = sub_block(&split, &s, Subsystem::B, Subsystem::B).determinant();
            let lhs = s.determinant();
            assert!((lhs - schur.determinant() * det_bb).abs() <= 1e-9 * lhs.abs());
        }
    }

    #[test]
    fn normalized_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let split = BipartiteSplit::with_hbar(1, 2, 0.5).unwrap();
        let st = sample::random_quantum_state(&mut rng, &split, 0.5);
        let m = st.normalized();
        let back = CovarianceMatrix::from_normalized(&m).unwrap().to_normalized();
        assert!(linalg::inf_norm(&(back.matrix() - m.matrix())) <= 1e-12 * linalg::inf_norm(m.matrix()));
    }

    #[test]
    fn normalized_matrix_requires_definite_diagonal_blocks_only() {
        // indefinite M with definite diagonal blocks is accepted as a quadratic form
        let m = DMatrix::from_row_slice(4, 4, &[
            0.5, 0.0, 2.0 / 3.0, 0.0,
            0.0, 0.5, 0.0, 0.25,
            2.0 / 3.0, 0.0, 1.0 / 3.0, 0.0,
            0.0, 0.25, 0.0, 0.25,
        ]);
        let nm = NormalizedMatrix::new(split11(), m).unwrap();
        assert!(!nm.is_positive_definite());
        assert!(nm.to_covariance().is_err());
        let bad = diag(&[1.0, -1.0, 1.0, 1.0]);
        assert!(matches!(NormalizedMatrix::new(split11(), bad), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn klm_single_point_always_passes() {
        let cov = CovarianceMatrix::new(split11(), DMatrix::identity(4, 4) * 0.25).unwrap();
        let r = klm_sample_check(&cov, 1, Some(3.0), 0, Execution::Sequential).unwrap();
        assert!(r.passed);
        assert!((r.min_eigenvalue - 1.0).abs() < 1e-15);
        assert!(matches!(
            klm_sample_check(&cov, 0, None, 0, Execution::Sequential),
            Err(Error::InvalidSampleCount(0))
        ));
    }

    #[test]
    fn klm_vacuum_passes() {
        let cov = CovarianceMatrix::new(split11(), DMatrix::identity(4, 4) * 0.5).unwrap();
        let r = klm_sample_check(&cov, 50, Some(3.0), 1, Execution::Sequential).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn klm_detects_sub_heisenberg_state() {
        let cov = CovarianceMatrix::new(split11(), DMatrix::identity(4, 4) * 0.25).unwrap();
        let failing: Vec<u64> = (0..20)
            .filter(|&seed| !klm_sample_check(&cov, 100, Some(3.0), seed, Execution::Sequential).unwrap().passed)
            .collect();
        assert!(!failing.is_empty());
    }

    #[test]
    fn klm_parallel_matches_sequential() {
        let cov = CovarianceMatrix::new(split11(), DMatrix::identity(4, 4) * 0.5).unwrap();
        let a = klm_sample_check(&cov, 40, None, 3, Execution::Sequential).unwrap();
        let b = klm_sample_check(&cov, 40, None, 3, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }
}
