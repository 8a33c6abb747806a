//! Searches for the free parameters of criteria 3 and 4: the scaling vector
//! `ε`, and the feasible `(a, b)` region of a coupled mode pair.
//!
//! A failed search never means entanglement; it only leaves the verdict
//! `Inconclusive`.

use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::separability::{
    b_lower, b_upper, criterion3, epsilon_len, scaled_objective, NormalForm, SeparabilityCertificate,
    SeparabilityReport, SPECTRAL_TOL,
};
use crate::state::NormalizedMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EpsilonStrategy {
    /// All entries equal, scanned over a log-spaced grid.
    UniformScalar,
    /// The scalar grid, then log-space golden-section sweeps per coordinate.
    CoordinateDescent,
    /// The scalar grid, then a Nelder–Mead simplex in log space.
    NelderMeadLike,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonSearchConfig {
    pub strategy: EpsilonStrategy,
    pub scalar_grid: usize,
    pub range: (f64, f64),
    /// Sweeps (coordinate descent) or iterations per dimension (simplex).
    pub max_iters: usize,
    /// Stop refining once an iteration improves the objective by less.
    pub objective_tol: f64,
    pub execution: Execution,
}

impl Default for EpsilonSearchConfig {
    fn default() -> Self {
        Self {
            strategy: EpsilonStrategy::CoordinateDescent,
            scalar_grid: 200,
            range: (1e-2, 1e2),
            max_iters: 50,
            objective_tol: 1e-12,
            execution: Execution::default(),
        }
    }
}

impl EpsilonSearchConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.range;
        if !(lo > 0.0 && lo < hi && hi.is_finite()) {
            return Err(Error::InvalidConfig(format!("epsilon range must satisfy 0 < min < max, got {lo}..{hi}")));
        }
        if self.scalar_grid < 2 {
            return Err(Error::InvalidConfig(format!("epsilon grid needs at least 2 points, got {}", self.scalar_grid)));
        }
        Ok(())
    }

    /// The scalar grid `ε_i`, log-spaced and inclusive of both ends.
    pub fn grid(&self) -> Vec<f64> {
        let (lo, hi) = (self.range.0.ln(), self.range.1.ln());
        let n = self.scalar_grid;
        (0..n)
            .map(|i| if i == 0 { self.range.0 } else if i + 1 == n { self.range.1 } else { (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp() })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonSearch {
    pub found: bool,
    /// The certifying `ε` when found, otherwise the best one visited.
    pub epsilon: Vec<f64>,
    pub objective: f64,
    pub report: SeparabilityReport,
    pub evaluations: usize,
}

struct Searcher<'a> {
    m: &'a NormalizedMatrix,
    lo: f64,
    hi: f64,
    evaluations: usize,
}

impl Searcher<'_> {
    fn eval_log(&mut self, x: &[f64]) -> Result<f64> {
        self.evaluations += 1;
        let eps: Vec<f64> = x.iter().map(|v| v.clamp(self.lo, self.hi).exp()).collect();
        scaled_objective(self.m, &eps)
    }

    /// Returns the certifying report when `x` certifies separability.
    fn certify(&self, x: &[f64], g: f64) -> Result<Option<SeparabilityReport>> {
        if g > 1.0 + SPECTRAL_TOL {
            return Ok(None);
        }
        let eps: Vec<f64> = x.iter().map(|v| v.clamp(self.lo, self.hi).exp()).collect();
        let report = criterion3(self.m, &eps)?;
        Ok(report.is_separable().then_some(report))
    }
}

/// Minimizes `g(ε) = max(λ_max(M̃_AA^ε), λ_max(M̃_BB^{1/ε}))` and returns the
/// first visited `ε` at which criterion 3 certifies separability.
///
/// The scalar grid is scanned in increasing order; refinement strategies
/// start from the best grid point. Deterministic for a fixed configuration.
pub fn search_epsilon(m: &NormalizedMatrix, config: &EpsilonSearchConfig) -> Result<EpsilonSearch> {
    config.validate()?;
    let r = epsilon_len(m.split());
    let grid = config.grid();
    let values: Vec<Result<f64>> = par::map_slice(config.execution, &grid, |&e| scaled_objective(m, &vec![e; r]));
    let values = values.into_iter().collect::<Result<Vec<f64>>>()?;
    let mut searcher = Searcher { m, lo: config.range.0.ln(), hi: config.range.1.ln(), evaluations: grid.len() };

    for (e, &g) in grid.iter().zip(&values) {
        let x = vec![e.ln(); r];
        if let Some(report) = searcher.certify(&x, g)? {
            return Ok(EpsilonSearch { found: true, epsilon: vec![*e; r], objective: g, report, evaluations: searcher.evaluations });
        }
    }
    let best = values.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i).unwrap_or(0);
    let mut x = vec![grid[best].ln(); r];
    let mut g = values[best];

    let outcome = match config.strategy {
        EpsilonStrategy::UniformScalar => None,
        EpsilonStrategy::CoordinateDescent => coordinate_descent(&mut searcher, config, &mut x, &mut g)?,
        EpsilonStrategy::NelderMeadLike => nelder_mead(&mut searcher, config, &mut x, &mut g)?,
    };
    match outcome {
        Some(report) => Ok(finish(true, &x, g, report, searcher.evaluations)),
        None => {
            let eps: Vec<f64> = x.iter().map(|v| v.exp()).collect();
            let report = criterion3(m, &eps)?;
            Ok(finish(report.is_separable(), &x, g, report, searcher.evaluations))
        }
    }
}

fn finish(found: bool, x: &[f64], g: f64, report: SeparabilityReport, evaluations: usize) -> EpsilonSearch {
    EpsilonSearch { found, epsilon: x.iter().map(|v| v.exp()).collect(), objective: g, report, evaluations }
}

/// Golden-section minimization of a unimodal-ish function on `[lo, hi]`.
fn golden_section(mut f: impl FnMut(f64) -> Result<f64>, lo: f64, hi: f64) -> Result<(f64, f64)> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while b - a > 1e-9 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc <= fd { (c, fc) } else { (d, fd) })
}

fn coordinate_descent(
    s: &mut Searcher,
    config: &EpsilonSearchConfig,
    x: &mut Vec<f64>,
    g: &mut f64,
) -> Result<Option<SeparabilityReport>> {
    for _ in 0..config.max_iters {
        let before = *g;
        for i in 0..x.len() {
            let (lo, hi) = (s.lo, s.hi);
            let mut trial = x.clone();
            let (t, gt) = golden_section(
                |t| {
                    trial[i] = t;
                    s.eval_log(&trial)
                },
                lo,
                hi,
            )?;
            if gt < *g {
                x[i] = t;
                *g = gt;
                if let Some(report) = s.certify(x, *g)? {
                    return Ok(Some(report));
                }
            }
        }
        if before - *g < config.objective_tol {
            break;
        }
    }
    Ok(None)
}

fn nelder_mead(
    s: &mut Searcher,
    config: &EpsilonSearchConfig,
    x: &mut Vec<f64>,
    g: &mut f64,
) -> Result<Option<SeparabilityReport>> {
    let n = x.len();
    let clamp = |v: Vec<f64>, lo: f64, hi: f64| v.into_iter().map(|t| t.clamp(lo, hi)).collect::<Vec<f64>>();
    let mut simplex: Vec<(Vec<f64>, f64)> = vec![(x.clone(), *g)];
    for i in 0..n {
        let mut p = x.clone();
        p[i] += if p[i] + 0.5 <= s.hi { 0.5 } else { -0.5 };
        let fp = s.eval_log(&p)?;
        simplex.push((p, fp));
    }
    for _ in 0..config.max_iters * n.max(1) * 4 {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[0].1 < *g {
            *x = simplex[0].0.clone();
            *g = simplex[0].1;
            if let Some(report) = s.certify(x, *g)? {
                return Ok(Some(report));
            }
        }
        if simplex[n].1 - simplex[0].1 < config.objective_tol {
            break;
        }
        let centroid: Vec<f64> =
            (0..n).map(|k| simplex[..n].iter().map(|p| p.0[k]).sum::<f64>() / n as f64).collect();
        let worst = simplex[n].0.clone();
        let (lo, hi) = (s.lo, s.hi);
        let along = |t: f64| -> Vec<f64> {
            clamp(centroid.iter().zip(&worst).map(|(c, w)| c + t * (w - c)).collect(), lo, hi)
        };
        let xr = along(-1.0);
        let fr = s.eval_log(&xr)?;
        if fr < simplex[0].1 {
            let xe = along(-2.0);
            let fe = s.eval_log(&xe)?;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let xc = along(0.5);
            let fc = s.eval_log(&xc)?;
            if fc < simplex[n].1 {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for p in simplex.iter_mut().skip(1) {
                    p.0 = best.iter().zip(&p.0).map(|(b, v)| b + 0.5 * (v - b)).collect();
                    p.1 = s.eval_log(&p.0)?;
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    if simplex[0].1 < *g {
        *x = simplex[0].0.clone();
        *g = simplex[0].1;
    }
    s.certify(x, *g)
}

/// Rasterized feasible set of `(a_j, b_j)` for one coupled pair.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityRegion {
    /// Pair index, 1-based.
    pub j_index: usize,
    pub lambda_a: f64,
    pub lambda_b: f64,
    pub d: f64,
    pub dd: f64,
    pub a_range: (f64, f64),
    pub b_range: (f64, f64),
    pub a_values: Vec<f64>,
    pub b_values: Vec<f64>,
    /// Row-major in `a`: cell `(i, k)` is `grid[i * b_values.len() + k]`.
    pub grid: Vec<bool>,
    /// Feasible `(a, b)` in grid order.
    pub points: Vec<(f64, f64)>,
}

/// One column of the analytic boundary: `det Q ≥ 0 ⟺ b ≥ b_lower`,
/// `det P ≥ 0 ⟺ b ≤ b_upper`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub a: f64,
    pub b_lower: f64,
    pub b_upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryCheck {
    /// Largest distance, in grid cells, between the raster's extent in a
    /// column and the analytic interval.
    pub max_cell_error: f64,
    pub columns_checked: usize,
    pub within_one_cell: bool,
}

fn inclusive_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect()
}

impl FeasibilityRegion {
    pub fn resolution(&self) -> (usize, usize) {
        (self.a_values.len(), self.b_values.len())
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn cell(&self, i: usize, k: usize) -> bool {
        self.grid[i * self.b_values.len() + k]
    }

    fn nearest(values: &[f64], v: f64) -> usize {
        let step = (values[values.len() - 1] - values[0]) / (values.len() - 1) as f64;
        (((v - values[0]) / step).round().max(0.0) as usize).min(values.len() - 1)
    }

    /// Whether the grid cell nearest to `(a, b)` is feasible.
    pub fn contains(&self, a: f64, b: f64) -> bool {
        let (a0, a1) = self.a_range;
        let (b0, b1) = self.b_range;
        if a < a0 || a > a1 || b < b0 || b > b1 {
            return false;
        }
        self.cell(Self::nearest(&self.a_values, a), Self::nearest(&self.b_values, b))
    }

    pub fn boundary_curves(&self) -> Vec<BoundaryPoint> {
        self.a_values
            .iter()
            .map(|&a| BoundaryPoint {
                a,
                b_lower: b_lower(self.lambda_a, self.lambda_b, self.d, a),
                b_upper: b_upper(self.lambda_a, self.lambda_b, self.dd, a),
            })
            .collect()
    }

    /// Compares, column by column, the raster's `b` extent with the analytic
    /// interval `[max(b_lower, λ_B), min(b_upper, 1/λ_B)]`.
    pub fn boundary_check(&self) -> BoundaryCheck {
        let rb = self.b_values.len();
        let cell = (self.b_range.1 - self.b_range.0) / (rb - 1) as f64;
        let mut worst = 0.0_f64;
        for (i, bp) in self.boundary_curves().iter().enumerate() {
            let lo = bp.b_lower.max(self.b_range.0);
            let hi = bp.b_upper.min(self.b_range.1);
            let feasible: Vec<f64> = (0..rb).filter(|&k| self.cell(i, k)).map(|k| self.b_values[k]).collect();
            let err = match (feasible.first(), feasible.last()) {
                (Some(&first), Some(&last)) if lo <= hi => ((first - lo).abs()).max((last - hi).abs()) / cell,
                (Some(_), Some(_)) => (lo - hi) / cell,
                _ if lo <= hi => (hi - lo) / cell,
                _ => 0.0,
            };
            worst = worst.max(err);
        }
        BoundaryCheck { max_cell_error: worst, columns_checked: self.a_values.len(), within_one_cell: worst <= 1.0 }
    }
}

/// Rasterizes `{(a, b) : det Q_j ≥ 0, det P_j ≥ 0}` over
/// `[λ_A, 1/λ_A] × [λ_B, 1/λ_B]` with inclusive, evenly spaced grids.
pub fn region_scan(nf: &NormalForm, j: usize, resolution: (usize, usize)) -> Result<FeasibilityRegion> {
    region_scan_with(nf, j, resolution, Execution::default())
}

pub fn region_scan_with(
    nf: &NormalForm,
    j: usize,
    resolution: (usize, usize),
    exec: Execution,
) -> Result<FeasibilityRegion> {
    if !nf.applicable {
        return Err(Error::NotApplicable { residual: nf.residual });
    }
    if j == 0 || j > nf.pairs() {
        return Err(Error::InvalidPair { pair: j, pairs: nf.pairs() });
    }
    let (ra, rb) = resolution;
    if ra < 2 || rb < 2 {
        return Err(Error::InvalidConfig(format!("grid resolution must be at least 2x2, got {ra}x{rb}")));
    }
    let p = j - 1;
    let (la, lb) = (nf.lambda_a[p], nf.lambda_b[p]);
    if la > 1.0 || lb > 1.0 {
        return Err(Error::InvalidLambda(la.max(lb)));
    }
    let a_range = nf.a_range(p);
    let b_range = nf.b_range(p);
    let a_values = inclusive_grid(a_range.0, a_range.1, ra);
    let b_values = inclusive_grid(b_range.0, b_range.1, rb);
    let grid: Vec<bool> = par::map_indexed(exec, ra * rb, |idx| {
        let (a, b) = (a_values[idx / rb], b_values[idx % rb]);
        nf.q_feasible(p, a, b) && nf.p_feasible(p, a, b)
    });
    let points = grid
        .iter()
        .enumerate()
        .filter(|(_, &f)| f)
        .map(|(idx, _)| (a_values[idx / rb], b_values[idx % rb]))
        .collect();
    Ok(FeasibilityRegion {
        j_index: j,
        lambda_a: la,
        lambda_b: lb,
        d: nf.d_x[p],
        dd: nf.d_p[p],
        a_range,
        b_range,
        a_values,
        b_values,
        grid,
        points,
    })
}

/// Certificate from one chosen `(a_j, b_j)` per pair; uncoupled A modes take
/// `a = λ_A`, uncoupled B modes take `b_fill` (default `λ_B`).
pub fn assemble_certificate_from_region(
    nf: &NormalForm,
    points: &[(f64, f64)],
    b_fill: Option<&[f64]>,
) -> Result<SeparabilityCertificate> {
    if !nf.applicable {
        return Err(Error::NotApplicable { residual: nf.residual });
    }
    let pairs = nf.pairs();
    if points.len() != pairs {
        return Err(Error::DimensionMismatch {
            expected: format!("{pairs} (a, b) points"),
            found: format!("{}", points.len()),
        });
    }
    let mut a = nf.lambda_a.clone();
    let mut b = nf.lambda_b.clone();
    for (j, &(aj, bj)) in points.iter().enumerate() {
        if !nf.point_feasible(j, aj, bj) {
            return Err(Error::InfeasiblePoint { pair: j + 1, a: aj, b: bj });
        }
        a[j] = aj;
        b[j] = bj;
    }
    if let Some(fill) = b_fill {
        let extra = b.len() - pairs;
        if fill.len() != extra {
            return Err(Error::DimensionMismatch {
                expected: format!("{extra} fill values"),
                found: format!("{}", fill.len()),
            });
        }
        b[pairs..].copy_from_slice(fill);
    }
    nf.certificate(&a, &b)
}
