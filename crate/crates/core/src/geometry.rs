//! Origin-centred ellipsoids `{z : Qz·z ≤ level}`: shadows (orthogonal
//! projections) via Schur complements, inclusion tests and quantum blobs.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;
use crate::state::{self, NormalizedMatrix};
use crate::symplectic::{self, BipartiteSplit, Subsystem, SymplecticForm};

#[derive(Debug, Clone, PartialEq)]
pub struct Ellipsoid {
    q: DMatrix<f64>,
    level: f64,
}

impl Ellipsoid {
    pub fn new(q: DMatrix<f64>, level: f64) -> Result<Self> {
        linalg::check_symmetric(&q, 1e-12)?;
        if !(level > 0.0 && level.is_finite()) {
            return Err(Error::InvalidConfig(format!("ellipsoid level must be positive, got {level}")));
        }
        let q = linalg::symmetrize(&q);
        linalg::require_positive_definite(&q, "ellipsoid form")?;
        Ok(Self { q, level })
    }

    /// The covariance ellipsoid `{Mz·z ≤ ħ}` of a state.
    pub fn covariance(m: &NormalizedMatrix) -> Result<Self> {
        Self::new(m.matrix().clone(), m.split().hbar())
    }

    /// The quantum blob `S B^{2m}(√ħ) = {(S Sᵀ)⁻¹ z·z ≤ ħ}`.
    pub fn blob(s: &DMatrix<f64>, hbar: f64) -> Result<Self> {
        let q = linalg::inverse_spd(&linalg::symmetrize(&(s * s.transpose())), "S Sᵀ")?;
        Self::new(q, hbar)
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    pub fn dim(&self) -> usize {
        self.q.nrows()
    }

    /// `Q / level`, the form of the same set at level 1.
    pub fn unit_form(&self) -> DMatrix<f64> {
        &self.q / self.level
    }

    /// `π^m/m! · level^m / √det Q` for dimension `2m` (general `d`: the unit
    /// ball volume times `level^{d/2}/√det Q`).
    pub fn volume(&self) -> f64 {
        let d = self.dim() as f64;
        let unit_ball = std::f64::consts::PI.powf(d / 2.0) / gamma_half_integer(d / 2.0 + 1.0);
        unit_ball * self.level.powf(d / 2.0) / self.q.determinant().sqrt()
    }

    pub fn contains_point(&self, z: &[f64]) -> bool {
        let v = nalgebra::DVector::from_column_slice(z);
        v.dot(&(&self.q * &v)) <= self.level * (1.0 + 1e-12)
    }
}

/// `Γ(x)` for `x` a positive integer or half-integer.
fn gamma_half_integer(x: f64) -> f64 {
    let mut acc = if (x - x.round()).abs() < 1e-12 { 1.0 } else { std::f64::consts::PI.sqrt() };
    let mut t = if (x - x.round()).abs() < 1e-12 { 1.0 } else { 0.5 };
    while t < x - 1e-12 {
        acc *= t;
        t += 1.0;
    }
    acc
}

/// `M/M_BB` (keep A) or `M/M_AA` (keep B).
pub fn schur_complement(m: &NormalizedMatrix, keep: Subsystem) -> Result<DMatrix<f64>> {
    state::schur_of(m.split(), m.matrix(), keep)
}

/// Shadow of the ellipsoid on the subsystem's coordinate space.
pub fn project_ellipsoid(omega: &Ellipsoid, split: &BipartiteSplit, onto: Subsystem) -> Result<Ellipsoid> {
    if omega.dim() != split.dim() {
        return Err(Error::DimensionMismatch {
            expected: format!("{0}x{0}", split.dim()),
            found: format!("{0}x{0}", omega.dim()),
        });
    }
    let q = state::schur_of(split, &omega.q, onto)?;
    Ellipsoid::new(q, omega.level)
}

/// Shadow on an arbitrary set of coordinates (in the given order): reorder,
/// then take the Schur complement eliminating every other coordinate.
pub fn project_onto_coordinates(omega: &Ellipsoid, coords: &[usize]) -> Result<Ellipsoid> {
    let dim = omega.dim();
    let mut seen = vec![false; dim];
    for &c in coords {
        if c >= dim || seen[c] {
            return Err(Error::InvalidConfig(format!("bad projection coordinate {c}")));
        }
        seen[c] = true;
    }
    let rest: Vec<usize> = (0..dim).filter(|&c| !seen[c]).collect();
    let q = state::schur_complement_indices(&omega.q, coords, &rest)?;
    Ellipsoid::new(q, omega.level)
}

/// Inclusion `inner ⊂ outer` for centred ellipsoids: `Q_out/l_out ≤ Q_in/l_in`.
pub fn ellipsoid_contains(outer: &Ellipsoid, inner: &Ellipsoid) -> Result<bool> {
    if outer.dim() != inner.dim() {
        return Err(Error::DimensionMismatch {
            expected: format!("{0}x{0}", outer.dim()),
            found: format!("{0}x{0}", inner.dim()),
        });
    }
    Ok(linalg::is_psd(&(inner.unit_form() - outer.unit_form())))
}

/// Whether the ellipsoid contains some quantum blob `S B(√ħ)`, i.e. whether
/// the symplectic eigenvalues of `(ħ/level) Q` are at most one.
pub fn contains_quantum_blob(omega: &Ellipsoid, j: &SymplecticForm, hbar: f64) -> Result<bool> {
    let q = &omega.q * (hbar / omega.level);
    let spectrum = symplectic::symplectic_eigenvalues(&q, j)?;
    Ok(spectrum[0] <= 1.0 + state::QUANTUM_TOL)
}

fn require_symplectic(s: &DMatrix<f64>, j: &SymplecticForm) -> Result<()> {
    let tol = 1e-10 * j.modes() as f64 * (1.0 + linalg::inf_norm(s).powi(2));
    if !symplectic::is_symplectic(s, j, tol)? {
        let residual = linalg::inf_norm(&(s * j.matrix() * s.transpose() - j.matrix()));
        return Err(Error::NotSymplectic { residual });
    }
    Ok(())
}

/// Checks `S_A B(√ħ) ⊂ Π_A Ω` and `S_B B(√ħ) ⊂ Π_B Ω`.
pub fn blob_projection_check(
    s_a: &DMatrix<f64>,
    s_b: &DMatrix<f64>,
    omega: &Ellipsoid,
    split: &BipartiteSplit,
) -> Result<bool> {
    let hbar = split.hbar();
    for (s, sub) in [(s_a, Subsystem::A), (s_b, Subsystem::B)] {
        require_symplectic(s, &SymplecticForm::subsystem(split, sub))?;
        let shadow = project_ellipsoid(omega, split, sub)?;
        if !ellipsoid_contains(&shadow, &Ellipsoid::blob(s, hbar)?)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Boundary of a planar ellipse, `points` vertices starting on the first
/// principal axis, counter-clockwise.
pub fn ellipse_polyline(e: &Ellipsoid, points: usize) -> Result<Vec<[f64; 2]>> {
    if e.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: "2x2".into(), found: format!("{0}x{0}", e.dim()) });
    }
    // z = level^{1/2} Q^{-1/2} (cos t, sin t)
    let root = linalg::inv_sqrt_spd(&e.q, "ellipse form")? * e.level.sqrt();
    Ok((0..points)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / points as f64;
            let (s, c) = t.sin_cos();
            [root[(0, 0)] * c + root[(0, 1)] * s, root[(1, 0)] * c + root[(1, 1)] * s]
        })
        .collect())
}
