//! The fourth criterion: bring `M` to the form
//! `M_D = (S_A ⊕ S_B) M (S_A ⊕ S_B)ᵀ = [[diag(Λ_A,Λ_A), D], [Dᵀ, diag(Λ_B,Λ_B)]]`
//! with `D` coupling `x_Aj ↔ x_Bj` and `p_Aj ↔ p_Bj` only, then look for a
//! dominating `P_A ⊕ P_B = diag(a, 1/a) ⊕ diag(b, 1/b)`.

use nalgebra::DMatrix;

use super::certificate::{Provenance, SeparabilityCertificate};
use super::{CriterionId, SeparabilityReport, SpectrumRecord, Verdict, Witness};
use crate::error::{Error, Result};
use crate::linalg;
use crate::state::NormalizedMatrix;
use crate::symplectic::{williamson_decompose, BipartiteSplit, Subsystem, Svd, SymplecticForm};

/// Relative tolerance on the entries of `M_D` outside the normal-form pattern.
pub const PATTERN_TOL: f64 = 1e-8;

/// Relative slack on the parameter ranges `λ ≤ a ≤ 1/λ`.
const RANGE_SLACK: f64 = 1e-12;

/// `M` in the criterion-4 normal form, with the symplectic maps that got it there.
///
/// Mode `j < pairs()` of A is coupled to mode `j` of B; the remaining modes
/// of the larger subsystem are uncoupled.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalForm {
    pub split: BipartiteSplit,
    pub applicable: bool,
    /// Largest off-pattern entry of `M_D`, relative to `‖M_D‖_∞`.
    pub residual: f64,
    pub s_a: DMatrix<f64>,
    pub s_b: DMatrix<f64>,
    pub m_d: DMatrix<f64>,
    pub lambda_a: Vec<f64>,
    pub lambda_b: Vec<f64>,
    /// Position couplings `d_1, …` (one per pair).
    pub d_x: Vec<f64>,
    /// Momentum couplings `d_{n_A+1}, …` (one per pair).
    pub d_p: Vec<f64>,
}

/// The expected normal-form matrix for the given parameters.
fn pattern(split: &BipartiteSplit, la: &[f64], lb: &[f64], dx: &[f64], dp: &[f64]) -> DMatrix<f64> {
    let j = SymplecticForm::ab_block(split);
    let mut spectrum = la.to_vec();
    spectrum.extend_from_slice(lb);
    let mut e = j.williamson_diagonal(&spectrum);
    let na = split.n_a();
    for k in 0..dx.len() {
        let (xa, pa, xb, pb) = (j.x_index(k), j.p_index(k), j.x_index(na + k), j.p_index(na + k));
        e[(xa, xb)] = dx[k];
        e[(xb, xa)] = dx[k];
        e[(pa, pb)] = dp[k];
        e[(pb, pa)] = dp[k];
    }
    e
}

/// Rotation-only SVD of a 2×2 block: `C = R_Aᵀ diag(s1, s2) R_B` with
/// `R_A`, `R_B` rotations, `s1 ≥ |s2|`, `s1 ≥ 0`.
fn rotation_svd(c: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>, f64, f64) {
    let svd = Svd::new(c);
    let (mut u, mut v) = (svd.u.clone(), svd.v.clone());
    let (du, dv) = (u.determinant().signum(), v.determinant().signum());
    for r in 0..2 {
        u[(r, 1)] *= du;
        v[(r, 1)] *= dv;
    }
    (u.transpose(), v.transpose(), svd.singular_values[0], svd.singular_values[1] * du * dv)
}

/// Permutation of modes on a standard form: new mode `i` is old mode `perm[i]`.
fn mode_permutation(perm: &[usize]) -> DMatrix<f64> {
    let n = perm.len();
    let mut p = DMatrix::zeros(2 * n, 2 * n);
    for (i, &old) in perm.iter().enumerate() {
        p[(i, old)] = 1.0;
        p[(n + i, n + old)] = 1.0;
    }
    p
}

impl NormalForm {
    pub fn pairs(&self) -> usize {
        self.d_x.len()
    }

    /// Couplings in the `d_1, …, d_{2n_A}` numbering (zero for uncoupled A modes).
    pub fn d(&self) -> Vec<f64> {
        let na = self.split.n_a();
        let mut d = vec![0.0; 2 * na];
        for k in 0..self.pairs() {
            d[k] = self.d_x[k];
            d[na + k] = self.d_p[k];
        }
        d
    }

    pub fn m_d_normalized(&self) -> Result<NormalizedMatrix> {
        NormalizedMatrix::new(self.split, self.m_d.clone())
    }

    /// Reads an `M_D` that is already in normal form (`S_A = S_B = I`).
    /// Mode `j` of A is paired with mode `j` of B.
    pub fn from_normal_matrix(m_d: &NormalizedMatrix, tol: f64) -> NormalForm {
        let split = *m_d.split();
        let j = SymplecticForm::ab_block(&split);
        let m = m_d.matrix();
        let (na, nb) = (split.n_a(), split.n_b());
        let pairs = na.min(nb);
        let lam = |k: usize| 0.5 * (m[(j.x_index(k), j.x_index(k))] + m[(j.p_index(k), j.p_index(k))]);
        let lambda_a: Vec<f64> = (0..na).map(lam).collect();
        let lambda_b: Vec<f64> = (0..nb).map(|k| lam(na + k)).collect();
        let d_x: Vec<f64> = (0..pairs).map(|k| m[(j.x_index(k), j.x_index(na + k))]).collect();
        let d_p: Vec<f64> = (0..pairs).map(|k| m[(j.p_index(k), j.p_index(na + k))]).collect();
        Self::assemble(
            split,
            DMatrix::identity(2 * na, 2 * na),
            DMatrix::identity(2 * nb, 2 * nb),
            m.clone(),
            lambda_a,
            lambda_b,
            d_x,
            d_p,
            tol,
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        split: BipartiteSplit,
        s_a: DMatrix<f64>,
        s_b: DMatrix<f64>,
        m_d: DMatrix<f64>,
        lambda_a: Vec<f64>,
        lambda_b: Vec<f64>,
        d_x: Vec<f64>,
        d_p: Vec<f64>,
        tol: f64,
    ) -> Self {
        let expected = pattern(&split, &lambda_a, &lambda_b, &d_x, &d_p);
        let residual = linalg::max_abs(&(&m_d - expected)) / linalg::inf_norm(&m_d).max(f64::MIN_POSITIVE);
        Self { split, applicable: residual <= tol, residual, s_a, s_b, m_d, lambda_a, lambda_b, d_x, d_p }
    }

    pub fn a_range(&self, j: usize) -> (f64, f64) {
        (self.lambda_a[j], 1.0 / self.lambda_a[j])
    }

    pub fn b_range(&self, k: usize) -> (f64, f64) {
        (self.lambda_b[k], 1.0 / self.lambda_b[k])
    }

    /// `det Q_j(a, b) = (a − λ_A)(b − λ_B) − d_j²`.
    pub fn det_q(&self, j: usize, a: f64, b: f64) -> f64 {
        (a - self.lambda_a[j]) * (b - self.lambda_b[j]) - self.d_x[j] * self.d_x[j]
    }

    /// `det P_j(a, b) = (1/a − λ_A)(1/b − λ_B) − d_{n_A+j}²`.
    pub fn det_p(&self, j: usize, a: f64, b: f64) -> f64 {
        (1.0 / a - self.lambda_a[j]) * (1.0 / b - self.lambda_b[j]) - self.d_p[j] * self.d_p[j]
    }

    /// Tolerance for a 2×2 determinant, matching the shared PSD rule
    /// (`eigmin ≥ −1e−10 (1 + ‖·‖)` scaled by the other eigenvalue).
    fn det_tol(norm: f64) -> f64 {
        linalg::PSD_TOL * (1.0 + norm) * norm.max(1.0)
    }

    pub fn q_feasible(&self, j: usize, a: f64, b: f64) -> bool {
        let norm = ((a - self.lambda_a[j]).abs() + self.d_x[j].abs()).max((b - self.lambda_b[j]).abs() + self.d_x[j].abs());
        self.det_q(j, a, b) >= -Self::det_tol(norm)
    }

    pub fn p_feasible(&self, j: usize, a: f64, b: f64) -> bool {
        let norm = ((1.0 / a - self.lambda_a[j]).abs() + self.d_p[j].abs())
            .max((1.0 / b - self.lambda_b[j]).abs() + self.d_p[j].abs());
        self.det_p(j, a, b) >= -Self::det_tol(norm)
    }

    fn in_range(value: f64, (lo, hi): (f64, f64)) -> bool {
        value >= lo * (1.0 - RANGE_SLACK) && value <= hi * (1.0 + RANGE_SLACK)
    }

    pub fn a_in_range(&self, j: usize, a: f64) -> bool {
        Self::in_range(a, self.a_range(j))
    }

    pub fn b_in_range(&self, k: usize, b: f64) -> bool {
        Self::in_range(b, self.b_range(k))
    }

    /// Range and determinant conditions for pair `j` (0-based).
    pub fn point_feasible(&self, j: usize, a: f64, b: f64) -> bool {
        self.a_in_range(j, a) && self.b_in_range(j, b) && self.q_feasible(j, a, b) && self.p_feasible(j, a, b)
    }

    fn check_ranges(&self, a: &[f64], b: &[f64]) -> Result<()> {
        let (na, nb) = (self.split.n_a(), self.split.n_b());
        if a.len() != na || b.len() != nb {
            return Err(Error::DimensionMismatch {
                expected: format!("a of length {na}, b of length {nb}"),
                found: format!("lengths {} and {}", a.len(), b.len()),
            });
        }
        for (j, &v) in a.iter().enumerate() {
            if !self.a_in_range(j, v) {
                let (lower, upper) = self.a_range(j);
                return Err(Error::RangeViolation { param: "a", index: j + 1, value: v, lower, upper });
            }
        }
        for (k, &v) in b.iter().enumerate() {
            if !self.b_in_range(k, v) {
                let (lower, upper) = self.b_range(k);
                return Err(Error::RangeViolation { param: "b", index: k + 1, value: v, lower, upper });
            }
        }
        Ok(())
    }

    /// The certificate `M_A = S_A⁻¹ P_A S_A⁻ᵀ`, `M_B = S_B⁻¹ P_B S_B⁻ᵀ` for the
    /// original matrix, from `P_A = diag(a, 1/a)` and `P_B = diag(b, 1/b)`.
    pub fn certificate(&self, a: &[f64], b: &[f64]) -> Result<SeparabilityCertificate> {
        self.check_ranges(a, b)?;
        let diag = |v: &[f64]| {
            let n = v.len();
            DMatrix::from_fn(2 * n, 2 * n, |r, c| match (r == c, r < n) {
                (true, true) => v[r],
                (true, false) => 1.0 / v[r - n],
                _ => 0.0,
            })
        };
        let pull_back = |s: &DMatrix<f64>, p: DMatrix<f64>| -> Result<DMatrix<f64>> {
            let inv = s.clone().try_inverse().ok_or_else(|| Error::NotPositiveDefinite { what: "S".into() })?;
            Ok(linalg::symmetrize(&(&inv * p * inv.transpose())))
        };
        let m_a = pull_back(&self.s_a, diag(a))?;
        let m_b = pull_back(&self.s_b, diag(b))?;
        Ok(SeparabilityCertificate::from_normalized_blocks(self.split, m_a, m_b, Provenance::Criterion4)?
            .with_ab(a.to_vec(), b.to_vec()))
    }

    fn spectra_records(&self) -> Vec<SpectrumRecord> {
        vec![
            SpectrumRecord { label: "A".into(), values: self.lambda_a.clone() },
            SpectrumRecord { label: "B".into(), values: self.lambda_b.clone() },
        ]
    }
}

/// Williamson-diagonalizes `M_AA` and `M_BB`, then aligns modes and per-mode
/// rotations so that the coupling becomes two-diagonal if possible.
///
/// Williamson factors are unique only up to per-mode rotations, so each
/// A mode is matched greedily to the B mode it couples to most strongly and
/// the 2×2 coupling block of every pair is diagonalized by rotations. The
/// larger coupling of a pair is put on the positions. Degenerate spectra
/// needing a non-diagonal mixing of modes end up not applicable.
pub fn criterion4_applicable(m: &NormalizedMatrix, tol: f64) -> Result<NormalForm> {
    let split = *m.split();
    let (na, nb) = (split.n_a(), split.n_b());
    let pairs = na.min(nb);
    let wa = williamson_decompose(&m.m_aa(), &SymplecticForm::subsystem(&split, Subsystem::A))?;
    let wb = williamson_decompose(&m.m_bb(), &SymplecticForm::subsystem(&split, Subsystem::B))?;
    let inv_t = |s: &DMatrix<f64>| -> Result<DMatrix<f64>> {
        Ok(s.clone().try_inverse().ok_or_else(|| Error::NotPositiveDefinite { what: "Williamson factor".into() })?.transpose())
    };
    let (sa0, sb0) = (inv_t(&wa.s)?, inv_t(&wb.s)?);
    let c0 = &sa0 * m.m_ab() * sb0.transpose();

    let block = |c: &DMatrix<f64>, j: usize, k: usize| {
        DMatrix::from_row_slice(2, 2, &[c[(j, k)], c[(j, nb + k)], c[(na + j, k)], c[(na + j, nb + k)]])
    };
    let mut candidates: Vec<(f64, usize, usize)> =
        (0..na).flat_map(|j| (0..nb).map(move |k| (j, k))).map(|(j, k)| (block(&c0, j, k).norm(), j, k)).collect();
    candidates.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let (mut used_a, mut used_b) = (vec![false; na], vec![false; nb]);
    let mut matched = Vec::with_capacity(pairs);
    for &(_, j, k) in &candidates {
        if matched.len() == pairs {
            break;
        }
        if !used_a[j] && !used_b[k] {
            used_a[j] = true;
            used_b[k] = true;
            matched.push((j, k));
        }
    }
    matched.sort();
    let perm_a: Vec<usize> = matched.iter().map(|&(j, _)| j).chain((0..na).filter(|&j| !used_a[j])).collect();
    let perm_b: Vec<usize> = matched.iter().map(|&(_, k)| k).chain((0..nb).filter(|&k| !used_b[k])).collect();
    let (pa, pb) = (mode_permutation(&perm_a), mode_permutation(&perm_b));
    let c1 = &pa * c0 * pb.transpose();

    let mut ra = DMatrix::identity(2 * na, 2 * na);
    let mut rb = DMatrix::identity(2 * nb, 2 * nb);
    let (mut d_x, mut d_p) = (Vec::with_capacity(pairs), Vec::with_capacity(pairs));
    for i in 0..pairs {
        let (r_a, r_b, s1, s2) = rotation_svd(&block(&c1, i, i));
        for (r, idx_r) in [(0, i), (1, na + i)] {
            for (c, idx_c) in [(0, i), (1, na + i)] {
                ra[(idx_r, idx_c)] = r_a[(r, c)];
            }
        }
        for (r, idx_r) in [(0, i), (1, nb + i)] {
            for (c, idx_c) in [(0, i), (1, nb + i)] {
                rb[(idx_r, idx_c)] = r_b[(r, c)];
            }
        }
        d_x.push(s1);
        d_p.push(s2);
    }
    let s_a = ra * pa * sa0;
    let s_b = rb * pb * sb0;
    let s = linalg::direct_sum(&s_a, &s_b);
    let m_d = linalg::symmetrize(&(&s * m.matrix() * s.transpose()));
    let lambda_a = perm_a.iter().map(|&j| wa.spectrum[j]).collect();
    let lambda_b = perm_b.iter().map(|&k| wb.spectrum[k]).collect();
    Ok(NormalForm::assemble(split, s_a, s_b, m_d, lambda_a, lambda_b, d_x, d_p, tol))
}

/// Criterion 4 on a normal form, with the certificate pulled back to the
/// matrix `original` the normal form was computed from.
pub fn criterion4_with(
    nf: &NormalForm,
    original: &NormalizedMatrix,
    a: &[f64],
    b: &[f64],
) -> Result<SeparabilityReport> {
    if !nf.applicable {
        return Err(Error::NotApplicable { residual: nf.residual });
    }
    nf.check_ranges(a, b)?;
    let mut report = SeparabilityReport::new(CriterionId::Criterion4, Verdict::Inconclusive);
    report.spectra = nf.spectra_records();
    for j in 0..nf.pairs() {
        let (qa, pa) = (nf.q_feasible(j, a[j], b[j]), nf.p_feasible(j, a[j], b[j]));
        if !qa || !pa {
            let (name, value) =
                if !qa { ("det Q", nf.det_q(j, a[j], b[j])) } else { ("det P", nf.det_p(j, a[j], b[j])) };
            report.witness =
                Some(Witness { description: format!("{name}_{} is negative", j + 1), value, threshold: 0.0 });
            return Ok(report);
        }
    }
    let cert = nf.certificate(a, b)?;
    let check = cert.validate(original)?;
    if check.valid {
        report.verdict = Verdict::Separable;
        report.certificate = Some(cert);
    } else {
        report.notes.push(format!("certificate failed re-validation: {check:?}"));
    }
    Ok(report)
}

/// Criterion 4 on a matrix that is already in normal form.
pub fn criterion4(m_d: &NormalizedMatrix, a: &[f64], b: &[f64]) -> Result<SeparabilityReport> {
    let nf = NormalForm::from_normal_matrix(m_d, PATTERN_TOL);
    criterion4_with(&nf, m_d, a, b)
}

/// The one-pair reduction of criterion 4 to a quadratic inequality in `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaQuadratic {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub feasible: bool,
    pub a0: Option<f64>,
    /// A `b` completing `a0` to a feasible point.
    pub b0: Option<f64>,
    /// The admissible `b` interval at `a0`.
    pub b_interval: Option<(f64, f64)>,
}

/// Smallest `b` with `det Q ≥ 0` at this `a`: `λ_B + d²/(a − λ_A)`.
pub fn b_lower(lambda_a: f64, lambda_b: f64, d: f64, a: f64) -> f64 {
    if d == 0.0 {
        lambda_b
    } else if a > lambda_a {
        lambda_b + d * d / (a - lambda_a)
    } else {
        f64::INFINITY
    }
}

/// Largest `b` with `det P ≥ 0` at this `a`: `1/(λ_B + D²/(1/a − λ_A))`.
pub fn b_upper(lambda_a: f64, lambda_b: f64, dd: f64, a: f64) -> f64 {
    if dd == 0.0 {
        1.0 / lambda_b
    } else if 1.0 / a > lambda_a {
        1.0 / (lambda_b + dd * dd / (1.0 / a - lambda_a))
    } else {
        0.0
    }
}

/// Feasibility of one coupled pair.
///
/// With `u = a − λ_A`, `v = 1/a − λ_A`, the two determinant conditions admit
/// a common `b` iff `(λ_B u + d²)(λ_B v + D²) ≤ uv`; multiplying by `a` gives
/// `f(a) = αa² + βa + γ ≥ 0` with
/// `α = λ_Aλ_B² − λ_B D² − λ_A`,
/// `β = 1 + λ_A² − λ_B² + (λ_Aλ_B − d²)(D² − λ_Aλ_B)`,
/// `γ = λ_Aλ_B² − λ_B d² − λ_A`.
/// Feasibility is decided from the roots of `f` on `[λ_A, 1/λ_A]`; `a0` is
/// the midpoint of the widest feasible sub-interval.
pub fn lemma_quadratic(lambda_a: f64, lambda_b: f64, d: f64, dd: f64) -> Result<LemmaQuadratic> {
    for l in [lambda_a, lambda_b] {
        if !(l > 0.0 && l <= 1.0) {
            return Err(Error::InvalidLambda(l));
        }
    }
    let (la, lb) = (lambda_a, lambda_b);
    let (d2, dd2) = (d * d, dd * dd);
    let alpha = la * lb * lb - lb * dd2 - la;
    let beta = 1.0 + la * la - lb * lb + (la * lb - d2) * (dd2 - la * lb);
    let gamma = la * lb * lb - lb * d2 - la;
    let f = |a: f64| (alpha * a + beta) * a + gamma;
    let (lo, hi) = (la, 1.0 / la);
    let scale = alpha.abs() * hi * hi + beta.abs() * hi + gamma.abs();
    let ftol = 1e-13 * scale.max(1.0);

    let mut breaks = vec![lo];
    breaks.extend(quadratic_roots(alpha, beta, gamma).into_iter().filter(|&r| r > lo && r < hi));
    breaks.push(hi);
    breaks.sort_by(f64::total_cmp);

    let mut best: Option<(f64, f64)> = None;
    for w in breaks.windows(2) {
        let (x, y) = (w[0], w[1]);
        if y > x && f(0.5 * (x + y)) >= -ftol && best.is_none_or(|(bx, by)| y - x > by - bx) {
            best = Some((x, y));
        }
    }
    let a0 = match best {
        Some((x, y)) => Some(0.5 * (x + y)),
        None => breaks.iter().copied().find(|&p| f(p) >= -ftol),
    };

    let mut out = LemmaQuadratic { alpha, beta, gamma, feasible: false, a0: None, b0: None, b_interval: None };
    if let Some(a) = a0 {
        let blo = b_lower(la, lb, d, a).max(lb);
        let bhi = b_upper(la, lb, dd, a).min(1.0 / lb);
        if blo <= bhi * (1.0 + 1e-12) {
            out.feasible = true;
            out.a0 = Some(a);
            out.b0 = Some(if blo <= bhi { 0.5 * (blo + bhi) } else { blo });
            out.b_interval = Some((blo, bhi));
        }
    }
    Ok(out)
}

/// Real roots of `αx² + βx + γ`, computed stably.
fn quadratic_roots(alpha: f64, beta: f64, gamma: f64) -> Vec<f64> {
    let scale = alpha.abs().max(beta.abs()).max(gamma.abs());
    if scale == 0.0 {
        return Vec::new();
    }
    if alpha.abs() <= 1e-14 * scale {
        return if beta != 0.0 { vec![-gamma / beta] } else { Vec::new() };
    }
    let disc = beta * beta - 4.0 * alpha * gamma;
    if disc < 0.0 {
        return Vec::new();
    }
    let q = -0.5 * (beta + beta.signum() * disc.sqrt());
    if q == 0.0 {
        return vec![0.0];
    }
    vec![q / alpha, gamma / q]
}

/// Parameters `(a, b)` chosen pair by pair from [`lemma_quadratic`];
/// uncoupled modes get `a = λ_A`, `b = λ_B`. `Err` names the first pair
/// (1-based) without a feasible point.
pub fn lemma_ab(nf: &NormalForm) -> Result<std::result::Result<(Vec<f64>, Vec<f64>), usize>> {
    let mut a = nf.lambda_a.clone();
    let mut b = nf.lambda_b.clone();
    for j in 0..nf.pairs() {
        let lemma = lemma_quadratic(nf.lambda_a[j], nf.lambda_b[j], nf.d_x[j], nf.d_p[j])?;
        match (lemma.a0, lemma.b0) {
            (Some(a0), Some(b0)) if lemma.feasible && nf.point_feasible(j, a0, b0) => {
                a[j] = a0;
                b[j] = b0;
            }
            _ => return Ok(Err(j + 1)),
        }
    }
    Ok(Ok((a, b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn split11() -> BipartiteSplit {
        BipartiteSplit::new(1, 1).unwrap()
    }

    #[rustfmt::skip]
    fn third_example() -> NormalizedMatrix {
        NormalizedMatrix::new(split11(), DMatrix::from_row_slice(4, 4, &[
            1.0 / 2.0, 0.0, 2.0 / 3.0, 0.0,
            0.0, 1.0 / 2.0, 0.0, 1.0 / 4.0,
            2.0 / 3.0, 0.0, 17.0 / 18.0, 0.0,
            0.0, 1.0 / 4.0, 0.0, 3.0 / 16.0,
        ])).unwrap()
    }

    #[test]
    fn third_example_normal_form() {
        let nf = criterion4_applicable(&third_example(), PATTERN_TOL).unwrap();
        assert!(nf.applicable, "residual {}", nf.residual);
        let lb = (17.0f64 / 6.0).sqrt() / 4.0;
        let d = (2.0f64 / 51.0).powf(0.25);
        let dd = (17.0f64 / 54.0).powf(0.25) / 2.0;
        #[rustfmt::skip]
        let expected = DMatrix::from_row_slice(4, 4, &[
            0.5, 0.0, d, 0.0,
            0.0, 0.5, 0.0, dd,
            d, 0.0, lb, 0.0,
            0.0, dd, 0.0, lb,
        ]);
        assert!((&nf.m_d - expected).amax() < 1e-9, "{}", nf.m_d);
        let j = SymplecticForm::standard(1);
        assert!(crate::symplectic::is_symplectic(&nf.s_a, &j, 1e-10).unwrap());
        assert!(crate::symplectic::is_symplectic(&nf.s_b, &j, 1e-10).unwrap());
    }

    #[test]
    fn block_diagonal_matrix_is_applicable_with_zero_coupling() {
        let a = DMatrix::from_row_slice(2, 2, &[0.9, 0.2, 0.2, 0.7]);
        let b = DMatrix::from_row_slice(4, 4, &[
            0.8, 0.1, 0.0, 0.0, 0.1, 0.9, 0.0, 0.0, 0.0, 0.0, 0.6, 0.0, 0.0, 0.0, 0.0, 0.7,
        ]);
        let split = BipartiteSplit::new(1, 2).unwrap();
        let m = NormalizedMatrix::new(split, linalg::direct_sum(&a, &b)).unwrap();
        let nf = criterion4_applicable(&m, PATTERN_TOL).unwrap();
        assert!(nf.applicable);
        assert!(nf.d().iter().all(|x| x.abs() < 1e-12));
        let r = criterion4_with(&nf, &m, &nf.lambda_a.clone(), &nf.lambda_b.clone()).unwrap();
        assert_eq!(r.verdict, Verdict::Separable);
    }

    #[test]
    fn dense_random_coupling_is_not_applicable() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let split = BipartiteSplit::new(2, 2).unwrap();
        let m = NormalizedMatrix::new(split, sample::random_quantum_normalized(&mut rng, &split, 0.5, 0.2)).unwrap();
        let nf = criterion4_applicable(&m, PATTERN_TOL).unwrap();
        assert!(!nf.applicable);
        assert!(matches!(criterion4_with(&nf, &m, &[1.0, 1.0], &[1.0, 1.0]), Err(Error::NotApplicable { .. })));
    }

    #[test]
    fn single_pair_is_always_applicable() {
        // a 1+1 mode matrix can always be brought to normal form
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..50 {
            let m = NormalizedMatrix::new(split11(), sample::random_quantum_normalized(&mut rng, &split11(), 0.5, 0.2))
                .unwrap();
            let nf = criterion4_applicable(&m, PATTERN_TOL).unwrap();
            assert!(nf.applicable, "residual {}", nf.residual);
        }
    }

    #[test]
    fn normal_form_and_original_give_identical_verdicts() {
        let m = third_example();
        let nf = criterion4_applicable(&m, PATTERN_TOL).unwrap();
        let md = nf.m_d_normalized().unwrap();
        for (a, b) in [(1.0, 1.0), (1.2, 0.9), (0.7, 1.5), (1.6, 0.65), (1.9, 2.0)] {
            let direct = criterion4(&md, &[a], &[b]).unwrap();
            let pulled = criterion4_with(&nf, &m, &[a], &[b]).unwrap();
            assert_eq!(direct.verdict, pulled.verdict, "({a}, {b})");
            if let Some(cert) = pulled.certificate {
                assert!(cert.validate(&m).unwrap().valid);
            }
        }
    }

    #[test]
    fn out_of_range_parameters_are_errors() {
        let md = NormalForm::from_normal_matrix(&third_example(), PATTERN_TOL);
        assert!(!md.applicable);
        let nf = criterion4_applicable(&third_example(), PATTERN_TOL).unwrap();
        let m = third_example();
        assert!(matches!(
            criterion4_with(&nf, &m, &[0.4], &[1.0]),
            Err(Error::RangeViolation { param: "a", .. })
        ));
        assert!(matches!(
            criterion4_with(&nf, &m, &[1.0], &[3.0]),
            Err(Error::RangeViolation { param: "b", .. })
        ));
    }

    #[test]
    fn decoupled_lemma() {
        let l = lemma_quadratic(0.5, 0.7, 0.0, 0.0).unwrap();
        assert!(l.feasible);
        // f(λ_A) = 0 at the decoupled point
        let f = |a: f64| (l.alpha * a + l.beta) * a + l.gamma;
        assert!(f(0.5).abs() < 1e-14);
    }

    #[test]
    fn lemma_rejects_bad_lambda() {
        assert!(matches!(lemma_quadratic(0.0, 0.5, 0.1, 0.1), Err(Error::InvalidLambda(_))));
        assert!(matches!(lemma_quadratic(0.5, 1.5, 0.1, 0.1), Err(Error::InvalidLambda(_))));
    }

    #[test]
    fn lemma_matches_brute_force_scan() {
        // brute force: fine scan of a, check the b interval directly
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..300 {
            let la: f64 = rng.random_range(0.2..1.0);
            let lb: f64 = rng.random_range(0.2..1.0);
            let d: f64 = rng.random_range(0.0..0.6);
            let dd: f64 = rng.random_range(0.0..0.6);
            let lemma = lemma_quadratic(la, lb, d, dd).unwrap();
            let n = 4000;
            let brute = (0..=n).any(|i| {
                let a = la + (1.0 / la - la) * i as f64 / n as f64;
                b_lower(la, lb, d, a).max(lb) <= b_upper(la, lb, dd, a).min(1.0 / lb)
            });
            if brute {
                assert!(lemma.feasible, "{la} {lb} {d} {dd}");
            }
            if let (Some(a), Some(b)) = (lemma.a0, lemma.b0) {
                assert!((a - la) * (b - lb) - d * d >= -1e-10);
                assert!((1.0 / a - la) * (1.0 / b - lb) - dd * dd >= -1e-10);
            }
        }
    }
}
