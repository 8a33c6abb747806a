//! Symplectic structure on phase space: the standard forms `J`, symplectic
//! spectra, Williamson diagonalization and the SVD used by the criteria.
//!
//! Coordinates are indexed per mode. A [`SymplecticForm`] records, for each
//! mode `j`, the position of `x_j` and `p_j` in the coordinate vector, and
//! `J[x_j, p_j] = 1`, `J[p_j, x_j] = -1`. The global layout orders
//! coordinates as `(x_1..x_m, p_1..p_m)`; the AB-block layout orders them as
//! `(x_A, p_A, x_B, p_B)`, which is the internal convention of the crate.

use nalgebra::{DMatrix, SymmetricEigen, SVD};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Complex64};

/// Relative tolerance used to pair the eigenvalues `±iλ` of `JM`.
pub const PAIRING_TOL: f64 = 1e-8;

/// Relative symmetry tolerance accepted by the spectral routines.
const SYMMETRY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Subsystem {
    A,
    B,
}

impl Subsystem {
    pub fn other(self) -> Self {
        match self {
            Subsystem::A => Subsystem::B,
            Subsystem::B => Subsystem::A,
        }
    }
}

/// Splitting of `n = n_A + n_B` modes into two subsystems, together with
/// the value of ħ used throughout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BipartiteSplit {
    n_a: usize,
    n_b: usize,
    hbar: f64,
}

impl BipartiteSplit {
    /// A split with ħ = 1.
    pub fn new(n_a: usize, n_b: usize) -> Result<Self> {
        Self::with_hbar(n_a, n_b, 1.0)
    }

    pub fn with_hbar(n_a: usize, n_b: usize, hbar: f64) -> Result<Self> {
        if n_a == 0 || n_b == 0 {
            return Err(Error::InvalidSplit(format!(
                "both subsystems need at least one mode (n_A = {n_a}, n_B = {n_b})"
            )));
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidSplit(format!("hbar must be positive, got {hbar}")));
        }
        Ok(Self { n_a, n_b, hbar })
    }

    pub fn n_a(&self) -> usize {
        self.n_a
    }

    pub fn n_b(&self) -> usize {
        self.n_b
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// Total number of modes.
    pub fn modes(&self) -> usize {
        self.n_a + self.n_b
    }

    /// Phase-space dimension `2(n_A + n_B)`.
    pub fn dim(&self) -> usize {
        2 * self.modes()
    }

    pub fn modes_of(&self, sub: Subsystem) -> usize {
        match sub {
            Subsystem::A => self.n_a,
            Subsystem::B => self.n_b,
        }
    }

    pub fn dim_of(&self, sub: Subsystem) -> usize {
        2 * self.modes_of(sub)
    }

    /// First coordinate of the subsystem's block in AB-block ordering.
    pub fn offset_of(&self, sub: Subsystem) -> usize {
        match sub {
            Subsystem::A => 0,
            Subsystem::B => 2 * self.n_a,
        }
    }

    /// The same split with the roles of A and B exchanged.
    pub fn swapped(&self) -> Self {
        Self { n_a: self.n_b, n_b: self.n_a, hbar: self.hbar }
    }

    pub fn with_hbar_override(&self, hbar: f64) -> Result<Self> {
        Self::with_hbar(self.n_a, self.n_b, hbar)
    }

    /// `perm[i]` is the global-layout index of AB-block coordinate `i`.
    ///
    /// Global layout: `(x_A, x_B, p_A, p_B)`; AB-block: `(x_A, p_A, x_B, p_B)`.
    pub fn ab_from_global(&self) -> Vec<usize> {
        let (na, nb, n) = (self.n_a, self.n_b, self.modes());
        let mut perm = Vec::with_capacity(2 * n);
        perm.extend(0..na);
        perm.extend(n..n + na);
        perm.extend(na..na + nb);
        perm.extend(n + na..n + na + nb);
        perm
    }

    /// Reorders a matrix given in the global `(x, p)` layout into AB-block order.
    pub fn global_to_ab(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        linalg::permute_symmetric(m, &self.ab_from_global())
    }

    /// Inverse of [`Self::global_to_ab`].
    pub fn ab_to_global(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let perm = self.ab_from_global();
        let mut inv = vec![0; perm.len()];
        for (i, &g) in perm.iter().enumerate() {
            inv[g] = i;
        }
        linalg::permute_symmetric(m, &inv)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Layout {
    Global,
    AbBlock,
}

/// A standard symplectic form, constructed entrywise (never computed).
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm {
    matrix: DMatrix<f64>,
    x_index: Vec<usize>,
    p_index: Vec<usize>,
}

impl SymplecticForm {
    fn from_indices(dim: usize, x_index: Vec<usize>, p_index: Vec<usize>) -> Self {
        let mut matrix = DMatrix::zeros(dim, dim);
        for (&x, &p) in x_index.iter().zip(&p_index) {
            matrix[(x, p)] = 1.0;
            matrix[(p, x)] = -1.0;
        }
        Self { matrix, x_index, p_index }
    }

    /// `J = [[0, I_m], [-I_m, 0]]` on `R^{2m}`.
    pub fn standard(modes: usize) -> Self {
        Self::from_indices(2 * modes, (0..modes).collect(), (modes..2 * modes).collect())
    }

    /// `J_AB = J_A ⊕ J_B` in AB-block ordering.
    pub fn ab_block(split: &BipartiteSplit) -> Self {
        let (na, nb) = (split.n_a(), split.n_b());
        let mut x = Vec::with_capacity(na + nb);
        let mut p = Vec::with_capacity(na + nb);
        for j in 0..na {
            x.push(j);
            p.push(na + j);
        }
        for k in 0..nb {
            x.push(2 * na + k);
            p.push(2 * na + nb + k);
        }
        Self::from_indices(split.dim(), x, p)
    }

    /// The standard form `J_A` or `J_B` of one subsystem.
    pub fn subsystem(split: &BipartiteSplit, sub: Subsystem) -> Self {
        Self::standard(split.modes_of(sub))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn modes(&self) -> usize {
        self.x_index.len()
    }

    /// Coordinate index of `x_j`.
    pub fn x_index(&self, mode: usize) -> usize {
        self.x_index[mode]
    }

    /// Coordinate index of `p_j`.
    pub fn p_index(&self, mode: usize) -> usize {
        self.p_index[mode]
    }

    /// `diag(Λ, Λ)` laid out in this form's coordinates.
    pub fn williamson_diagonal(&self, spectrum: &[f64]) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.dim(), self.dim());
        for (j, &lam) in spectrum.iter().enumerate() {
            d[(self.x_index[j], self.x_index[j])] = lam;
            d[(self.p_index[j], self.p_index[j])] = lam;
        }
        d
    }

    fn check_dim(&self, m: &DMatrix<f64>) -> Result<()> {
        if m.nrows() != self.dim() || m.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: format!("{0}x{0}", self.dim()),
                found: format!("{}x{}", m.nrows(), m.ncols()),
            });
        }
        Ok(())
    }
}

pub fn build_symplectic_form(split: &BipartiteSplit, layout: Layout) -> SymplecticForm {
    match layout {
        Layout::Global => SymplecticForm::standard(split.modes()),
        Layout::AbBlock => SymplecticForm::ab_block(split),
    }
}

fn check_spd_input(m: &DMatrix<f64>, j: &SymplecticForm) -> Result<()> {
    j.check_dim(m)?;
    linalg::check_symmetric(m, SYMMETRY_TOL)?;
    linalg::require_positive_definite(m, "M")?;
    Ok(())
}

fn sort_descending(v: &mut [f64]) {
    // stable, so ties keep their index order
    v.sort_by(|a, b| b.total_cmp(a));
}

/// Symplectic eigenvalues of `M`, in descending order: the moduli of the
/// eigenvalues `±iλ_j` of `JM`, one per conjugate pair.
pub fn symplectic_eigenvalues(m: &DMatrix<f64>, j: &SymplecticForm) -> Result<Vec<f64>> {
    check_spd_input(m, j)?;
    let modes = j.modes();
    let jm = j.matrix() * linalg::symmetrize(m);
    let eigs: Vec<Complex64> = jm.complex_eigenvalues().iter().copied().collect();
    let scale = eigs.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);

    let mut upper = Vec::with_capacity(modes);
    let mut lower = Vec::with_capacity(modes);
    for z in &eigs {
        if z.re.abs() > PAIRING_TOL * scale {
            return Err(Error::PairingFailure(format!("eigenvalue {z} has a real part")));
        }
        if z.im > 0.0 {
            upper.push(*z);
        } else if z.im < 0.0 {
            lower.push(*z);
        } else {
            return Err(Error::PairingFailure(format!("eigenvalue {z} lies on the real axis")));
        }
    }
    if upper.len() != modes || lower.len() != modes {
        return Err(Error::PairingFailure(format!(
            "{} eigenvalues in the upper half plane and {} in the lower, expected {modes} each",
            upper.len(),
            lower.len()
        )));
    }
    upper.sort_by(|a, b| b.im.total_cmp(&a.im));
    lower.sort_by(|a, b| a.im.total_cmp(&b.im));
    let mut spectrum = Vec::with_capacity(modes);
    for (u, l) in upper.iter().zip(&lower) {
        if (u - l.conj()).norm() > PAIRING_TOL * scale {
            return Err(Error::PairingFailure(format!("{u} has no conjugate partner (closest {l})")));
        }
        spectrum.push(u.norm());
    }
    sort_descending(&mut spectrum);
    Ok(spectrum)
}

/// Symplectic spectrum computed from the Hermitian matrix `i M^{1/2} J M^{1/2}`
/// (its positive eigenvalues). Independent of [`symplectic_eigenvalues`].
pub fn symplectic_eigenvalues_hermitian(m: &DMatrix<f64>, j: &SymplecticForm) -> Result<Vec<f64>> {
    check_spd_input(m, j)?;
    let h = hermitian_generator(m, j)?;
    let mut ev = linalg::hermitian_eigenvalues(&h);
    ev.reverse();
    ev.truncate(j.modes());
    Ok(ev)
}

/// `i K` with `K = M^{1/2} J M^{1/2}` made exactly antisymmetric.
fn hermitian_generator(m: &DMatrix<f64>, j: &SymplecticForm) -> Result<DMatrix<Complex64>> {
    let root = linalg::sqrt_spd(m, "M")?;
    let k = &root * j.matrix() * &root;
    let k = (&k - k.transpose()) * 0.5;
    Ok(k.map(|x| Complex64::new(0.0, x)))
}

/// `M = Sᵀ D S` with `S` symplectic and `D = diag(Λ, Λ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WilliamsonDecomposition {
    pub s: DMatrix<f64>,
    /// Symplectic eigenvalues, descending; mode `j` of `D` carries entry `j`.
    pub spectrum: Vec<f64>,
    pub d: DMatrix<f64>,
}

impl WilliamsonDecomposition {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.s.transpose() * &self.d * &self.s
    }

    /// `‖S J Sᵀ − J‖_∞`.
    pub fn symplectic_residual(&self, j: &SymplecticForm) -> f64 {
        linalg::inf_norm(&(&self.s * j.matrix() * self.s.transpose() - j.matrix()))
    }

    /// `‖Sᵀ D S − M‖_∞ / ‖M‖_∞`.
    pub fn reconstruction_residual(&self, m: &DMatrix<f64>) -> f64 {
        linalg::inf_norm(&(self.reconstruct() - m)) / linalg::inf_norm(m).max(f64::MIN_POSITIVE)
    }
}

/// Williamson diagonalization through the real normal form of the
/// antisymmetric matrix `K = M^{1/2} J M^{1/2}`.
///
/// The positive eigenvectors `v = a + i b` of the Hermitian `iK` satisfy
/// `K a = λ b`, `K b = −λ a`; the vectors `√2 b`, `√2 a` form an orthonormal
/// basis `O` in which `Oᵀ K O = diag(Λ,Λ)·J`, and `S = D^{-1/2} Oᵀ M^{1/2}`.
/// Repeated eigenvalues need no special care: the Hermitian eigensolver
/// returns an orthonormal basis of each eigenspace.
pub fn williamson_decompose(m: &DMatrix<f64>, j: &SymplecticForm) -> Result<WilliamsonDecomposition> {
    check_spd_input(m, j)?;
    let m = linalg::symmetrize(m);
    let dim = j.dim();
    let modes = j.modes();
    let root = linalg::sqrt_spd(&m, "M")?;
    let k = &root * j.matrix() * &root;
    let k = (&k - k.transpose()) * 0.5;
    let h = k.map(|x| Complex64::new(0.0, x));
    let eig = SymmetricEigen::new(h);

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let positive = &order[..modes];

    let mut o = DMatrix::<f64>::zeros(dim, dim);
    let mut spectrum = Vec::with_capacity(modes);
    let sqrt2 = std::f64::consts::SQRT_2;
    for (mode, &idx) in positive.iter().enumerate() {
        let lam = eig.eigenvalues[idx];
        if lam <= 0.0 {
            return Err(Error::PairingFailure(format!("non-positive symplectic eigenvalue {lam}")));
        }
        let v = eig.eigenvectors.column(idx);
        for r in 0..dim {
            o[(r, j.x_index(mode))] = sqrt2 * v[r].im;
            o[(r, j.p_index(mode))] = sqrt2 * v[r].re;
        }
        spectrum.push(lam);
    }

    let d = j.williamson_diagonal(&spectrum);
    let d_inv_sqrt = d.map_diagonal(|x| 1.0 / x.sqrt());
    let s = DMatrix::from_diagonal(&d_inv_sqrt) * o.transpose() * root;
    Ok(WilliamsonDecomposition { s, spectrum, d })
}

/// `‖S J Sᵀ − J‖_∞ ≤ tol`.
pub fn is_symplectic(s: &DMatrix<f64>, j: &SymplecticForm, tol: f64) -> Result<bool> {
    j.check_dim(s)?;
    Ok(linalg::inf_norm(&(s * j.matrix() * s.transpose() - j.matrix())) <= tol)
}

/// Thin SVD `A = U diag(σ) Vᵀ` with `σ` descending.
#[derive(Debug, Clone, PartialEq)]
pub struct Svd {
    /// `p × r` with orthonormal columns.
    pub u: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    /// `q × r` with orthonormal columns.
    pub v: DMatrix<f64>,
}

impl Svd {
    pub fn new(a: &DMatrix<f64>) -> Self {
        let (p, q) = a.shape();
        let r = p.min(q);
        if r == 0 {
            return Self { u: DMatrix::zeros(p, 0), singular_values: Vec::new(), v: DMatrix::zeros(q, 0) };
        }
        let svd = SVD::new(a.clone(), true, true);
        let u = svd.u.expect("U requested");
        let v_t = svd.v_t.expect("V requested");
        let mut order: Vec<usize> = (0..r).collect();
        order.sort_by(|&x, &y| svd.singular_values[y].total_cmp(&svd.singular_values[x]));
        let singular_values = order.iter().map(|&i| svd.singular_values[i].max(0.0)).collect();
        let u = DMatrix::from_fn(p, r, |row, c| u[(row, order[c])]);
        let v = DMatrix::from_fn(q, r, |row, c| v_t[(order[c], row)]);
        Self { u, singular_values, v }
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        let s = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.singular_values));
        &self.u * s * self.v.transpose()
    }

    /// Largest singular value, i.e. the operator norm.
    pub fn op_norm(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }
}

/// Singular values of `A`, descending, `min(p, q)` of them.
pub fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    Svd::new(a).singular_values
}
