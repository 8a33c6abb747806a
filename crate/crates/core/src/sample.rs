//! Random and canonical test objects: symplectic matrices, quantum-valid
//! and separable states, and the two-mode squeezed family.
//!
//! All generators take an explicit RNG so callers control reproducibility.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::error::Result;
use crate::linalg::{self, Complex64};
use crate::state::{CovarianceMatrix, GaussianState, PureGaussianParams};
use crate::symplectic::{BipartiteSplit, SymplecticForm};

fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Random symmetric matrix with standard-normal entries (scaled by `1/√2` off
/// the diagonal).
pub fn random_symmetric<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let g = gaussian_matrix(rng, n, n);
    (&g + g.transpose()) * 0.5
}

/// Random SPD matrix `exp(spread · G)` with `G` random symmetric, so the
/// condition number is about `exp(2·spread·√n)`.
pub fn random_spd<R: Rng + ?Sized>(rng: &mut R, n: usize, spread: f64) -> DMatrix<f64> {
    let g = random_symmetric(rng, n);
    linalg::sym_function(&g, |x| (spread * x).exp())
}

/// `S = [[X^{1/2}, 0], [X^{-1/2} Y, X^{-1/2}]]`, the symplectic matrix with
/// `SᵀS = [[X + Y X⁻¹ Y, Y X⁻¹], [X⁻¹ Y, X⁻¹]]`, in the global layout.
pub fn symplectic_from_xy(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = x.nrows();
    let xs = linalg::sqrt_spd(x, "X")?;
    let xis = linalg::inv_sqrt_spd(x, "X")?;
    let mut s = DMatrix::zeros(2 * n, 2 * n);
    s.view_mut((0, 0), (n, n)).copy_from(&xs);
    s.view_mut((n, 0), (n, n)).copy_from(&(&xis * y));
    s.view_mut((n, n), (n, n)).copy_from(&xis);
    Ok(s)
}

/// Random orthogonal symplectic matrix `[[Re U, −Im U], [Im U, Re U]]` from a
/// random unitary `U` (global layout).
pub fn random_orthosymplectic<R: Rng + ?Sized>(rng: &mut R, modes: usize) -> DMatrix<f64> {
    let z = DMatrix::from_fn(modes, modes, |_, _| {
        Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
    });
    let u = nalgebra::QR::new(z).q();
    let mut s = DMatrix::zeros(2 * modes, 2 * modes);
    for i in 0..modes {
        for j in 0..modes {
            let (re, im) = (u[(i, j)].re, u[(i, j)].im);
            s[(i, j)] = re;
            s[(i, modes + j)] = -im;
            s[(modes + i, j)] = im;
            s[(modes + i, modes + j)] = re;
        }
    }
    s
}

pub fn random_pure_params<R: Rng + ?Sized>(rng: &mut R, n: usize, spread: f64) -> PureGaussianParams {
    let x = random_spd(rng, n, spread);
    let y = random_symmetric(rng, n) * spread;
    PureGaussianParams::new(x, y).expect("random X is positive definite")
}

/// Random symplectic matrix for the standard form on `modes` modes:
/// a product of a random `(X, Y)` matrix and random orthosymplectic rotations.
pub fn random_symplectic<R: Rng + ?Sized>(rng: &mut R, modes: usize, spread: f64) -> DMatrix<f64> {
    let p = random_pure_params(rng, modes, spread);
    let s = symplectic_from_xy(p.x(), p.y()).expect("X is positive definite");
    random_orthosymplectic(rng, modes) * s * random_orthosymplectic(rng, modes)
}

/// Random symplectic matrix with respect to an arbitrary standard form
/// (for instance the AB-block form).
pub fn random_symplectic_in<R: Rng + ?Sized>(rng: &mut R, form: &SymplecticForm, spread: f64) -> DMatrix<f64> {
    let modes = form.modes();
    let s = random_symplectic(rng, modes, spread);
    let to_form: Vec<usize> = (0..modes)
        .map(|k| form.x_index(k))
        .chain((0..modes).map(|k| form.p_index(k)))
        .collect();
    let mut out = DMatrix::zeros(2 * modes, 2 * modes);
    for r in 0..2 * modes {
        for c in 0..2 * modes {
            out[(to_form[r], to_form[c])] = s[(r, c)];
        }
    }
    out
}

/// Random quantum-valid normalized matrix `M = Sᵀ diag(Λ,Λ) S` (AB-block
/// layout) with symplectic eigenvalues drawn from `[lambda_min, 1]`.
pub fn random_quantum_normalized<R: Rng + ?Sized>(
    rng: &mut R,
    split: &BipartiteSplit,
    spread: f64,
    lambda_min: f64,
) -> DMatrix<f64> {
    let form = SymplecticForm::ab_block(split);
    let s = random_symplectic_in(rng, &form, spread);
    let dist = Uniform::new_inclusive(lambda_min, 1.0).expect("valid range");
    let spectrum: Vec<f64> = (0..split.modes()).map(|_| dist.sample(rng)).collect();
    let d = form.williamson_diagonal(&spectrum);
    linalg::symmetrize(&(s.transpose() * d * s))
}

pub fn random_quantum_state<R: Rng + ?Sized>(rng: &mut R, split: &BipartiteSplit, spread: f64) -> GaussianState {
    let m = random_quantum_normalized(rng, split, spread, 0.2);
    let sigma = linalg::inverse_spd(&m, "M").expect("M is positive definite") * (split.hbar() / 2.0);
    let cov = CovarianceMatrix::new(*split, sigma).expect("valid covariance");
    GaussianState::new(cov).expect("quantum condition holds by construction")
}

/// Random separable state `Σ = Σ_A ⊕ Σ_B + PᵀP` with quantum-valid marginals.
pub fn random_separable_state<R: Rng + ?Sized>(
    rng: &mut R,
    split: &BipartiteSplit,
    spread: f64,
    noise: f64,
) -> GaussianState {
    let hbar = split.hbar();
    let mut marginal = |modes: usize| {
        let form = SymplecticForm::standard(modes);
        let s = random_symplectic_in(rng, &form, spread);
        let dist = Uniform::new_inclusive(0.3, 1.0).expect("valid range");
        let spectrum: Vec<f64> = (0..modes).map(|_| dist.sample(rng)).collect();
        let m = s.transpose() * form.williamson_diagonal(&spectrum) * s;
        linalg::inverse_spd(&m, "M").expect("positive definite") * (hbar / 2.0)
    };
    let sa = marginal(split.n_a());
    let sb = marginal(split.n_b());
    let p = gaussian_matrix(rng, split.dim(), split.dim()) * noise;
    let sigma = linalg::symmetrize(&(linalg::direct_sum(&sa, &sb) + p.transpose() * p));
    let cov = CovarianceMatrix::new(*split, sigma).expect("valid covariance");
    GaussianState::new(cov).expect("separable states are quantum-valid")
}

/// Two-mode squeezed covariance `(ħ/2)[[cosh 2r·I, sinh 2r·Z], [sinh 2r·Z, cosh 2r·I]]`
/// with `Z = diag(1, −1)`, in AB-block layout.
pub fn two_mode_squeezed(r: f64, hbar: f64) -> Result<CovarianceMatrix> {
    let split = BipartiteSplit::with_hbar(1, 1, hbar)?;
    let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    #[rustfmt::skip]
    let sigma = DMatrix::from_row_slice(4, 4, &[
        c, 0.0, s, 0.0,
        0.0, c, 0.0, -s,
        s, 0.0, c, 0.0,
        0.0, -s, 0.0, c,
    ]) * (hbar / 2.0);
    CovarianceMatrix::new(split, sigma)
}

/// Uniform sample from the Euclidean ball of the given radius.
pub fn uniform_in_ball<R: Rng + ?Sized>(rng: &mut R, dim: usize, radius: f64) -> DVector<f64> {
    loop {
        let g: DVector<f64> = DVector::from_fn(dim, |_, _| StandardNormal.sample(rng));
        let norm = g.norm();
        if norm > 0.0 {
            let u: f64 = rng.random();
            return g * (radius * u.powf(1.0 / dim as f64) / norm);
        }
    }
}
