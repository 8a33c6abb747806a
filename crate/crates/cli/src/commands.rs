use std::path::{Path, PathBuf};
use std::time::Instant;

use gaussep::geometry::{ellipse_polyline, ellipsoid_contains, project_onto_coordinates, Ellipsoid};
use gaussep::linalg;
use gaussep::search::{region_scan, search_epsilon, EpsilonSearchConfig, EpsilonStrategy};
use gaussep::separability::{
    criterion1, criterion2, criterion3, criterion4_applicable, criterion4_searched, criterion4_with, lemma_quadratic,
    overall_verdict, partial_transpose, ppt_test, NormalForm, PATTERN_TOL,
};
use gaussep::state::{check_quantum_condition, is_pure, purity, reduce, reduced_purity, GaussianState};
use gaussep::{
    CovarianceMatrix, CriterionId, Error as CoreError, NormalizedMatrix, SeparabilityReport, Subsystem,
    SymplecticForm, Verdict,
};
use nalgebra::DVector;
use serde::Serialize;

use crate::input::{self, LoadedInput, SCHEMA_VERSION};
use crate::report::{
    fmt_spectrum, rows, summary_line, vector, InputEcho, QuantumConditionDoc, ReducedPurities, ReportDoc, Rows,
};
use crate::{csv, exit, Cli, CliError, Command, Format, Strategy};

/// What to print and how to exit.
pub struct Output {
    pub text: String,
    pub code: u8,
}

const PURE_TOL: f64 = 1e-10;

pub fn run(cli: &Cli) -> Result<Output, CliError> {
    match &cli.command {
        Command::Check { input } => check(cli, input),
        Command::Analyze { input, criteria, epsilon, ab, strategy } => {
            analyze(cli, input, criteria, epsilon, ab, *strategy)
        }
        Command::Region { input, j, grid, out, boundary_out } => region(cli, input, *j, grid, out, boundary_out.as_deref()),
        Command::Project { input, plane, out, blob, points } => project(cli, input, plane, out, blob.as_deref(), *points),
        Command::Reduce { input, subsystem } => reduce_cmd(cli, input, subsystem),
        Command::Ppt { input } => ppt(cli, input),
    }
}

fn render<T: Serialize>(format: Format, doc: &T, summary: impl FnOnce() -> Vec<String>) -> Result<String, CliError> {
    Ok(match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(doc).map_err(|e| CliError::Io(e.to_string()))?;
            s.push('\n');
            s
        }
        Format::Summary => summary().into_iter().map(|l| l + "\n").collect(),
    })
}

fn millis(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// The state behind an input, or why there is none. Hard parse-level
/// problems propagate as errors.
enum StateStatus {
    Valid(CovarianceMatrix, QuantumConditionDoc),
    Invalid(QuantumConditionDoc),
}

impl StateStatus {
    fn of(input: &LoadedInput) -> Result<Self, CliError> {
        let cov = match input.covariance() {
            Ok(cov) => cov,
            Err(CliError::Core(e @ CoreError::NotPositiveDefinite { .. })) => {
                return Ok(StateStatus::Invalid(QuantumConditionDoc::not_a_state(e.to_string())));
            }
            Err(e) => return Err(e),
        };
        let qc = check_quantum_condition(&cov)?;
        let doc = QuantumConditionDoc::from_check(&qc);
        Ok(if qc.holds { StateStatus::Valid(cov, doc) } else { StateStatus::Invalid(doc) })
    }

    fn doc(&self) -> &QuantumConditionDoc {
        match self {
            StateStatus::Valid(_, d) | StateStatus::Invalid(d) => d,
        }
    }

    fn state(&self, input: &LoadedInput) -> Result<Option<GaussianState>, CliError> {
        match self {
            StateStatus::Valid(cov, _) => {
                let mean = input.mean.clone().unwrap_or_else(|| DVector::zeros(cov.split().dim()));
                Ok(Some(GaussianState::with_mean(cov.clone(), mean)?))
            }
            StateStatus::Invalid(_) => Ok(None),
        }
    }
}

fn qc_line(qc: &QuantumConditionDoc) -> String {
    match (&qc.reason, &qc.symplectic_spectrum) {
        (_, Some(s)) if qc.holds => format!("quantum condition: holds  symplectic spectrum of M {}", fmt_spectrum(s)),
        (Some(r), Some(s)) => format!("quantum condition: VIOLATED ({r})  symplectic spectrum of M {}", fmt_spectrum(s)),
        (Some(r), None) => format!("quantum condition: VIOLATED ({r})"),
        _ => format!("quantum condition: holds={}", qc.holds),
    }
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct CheckOutput {
    schema_version: &'static str,
    command: &'static str,
    input: InputEcho,
    quantum_condition: QuantumConditionDoc,
    #[serde(skip_serializing_if = "Option::is_none")]
    purity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pure: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reduced_purities: Option<ReducedPurities>,
    timing_ms: f64,
}

fn reduced_purities(state: &GaussianState) -> Result<ReducedPurities, CliError> {
    Ok(ReducedPurities { a: reduced_purity(state, Subsystem::A)?, b: reduced_purity(state, Subsystem::B)? })
}

fn check(cli: &Cli, path: &Path) -> Result<Output, CliError> {
    let input = input::load(path, cli.hbar)?;
    let t = Instant::now();
    let status = StateStatus::of(&input)?;
    let state = status.state(&input)?;
    let (purity_v, pure, reduced) = match &state {
        Some(s) => (Some(purity(s)), Some(is_pure(s, cli.tol.unwrap_or(PURE_TOL))), Some(reduced_purities(s)?)),
        None => (None, None, None),
    };
    let doc = CheckOutput {
        schema_version: SCHEMA_VERSION,
        command: "check",
        input: InputEcho::new(&input),
        quantum_condition: status.doc().clone(),
        purity: purity_v,
        pure,
        reduced_purities: reduced,
        timing_ms: millis(t),
    };
    let code = if state.is_some() { exit::OK } else { exit::INVALID_STATE };
    let text = render(cli.format, &doc, || {
        let mut lines = vec![format!("input {} (sha256 {})", doc.input.path, doc.input.sha256), qc_line(&doc.quantum_condition)];
        if let (Some(p), Some(pure), Some(r)) = (doc.purity, doc.pure, &doc.reduced_purities) {
            lines.push(format!("purity {p:.12} (pure: {pure}), reduced purities A {:.12}, B {:.12}", r.a, r.b));
        }
        lines
    })?;
    Ok(Output { text, code })
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct EpsilonSearchDoc {
    strategy: &'static str,
    found: bool,
    epsilon: Vec<f64>,
    objective: f64,
    evaluations: usize,
}

#[derive(Serialize)]
struct AnalyzeOutput {
    schema_version: &'static str,
    command: &'static str,
    input: InputEcho,
    quantum_condition: QuantumConditionDoc,
    #[serde(skip_serializing_if = "Option::is_none")]
    purity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reduced_purities: Option<ReducedPurities>,
    reports: Vec<ReportDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon_search: Option<EpsilonSearchDoc>,
    overall_verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    first_separable: Option<CriterionId>,
    timing_ms: f64,
}

fn parse_list(text: &str, what: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| input::parse_number(s).ok_or_else(|| CliError::usage(format!("{what}: cannot read {s:?} as a number"))))
        .collect()
}

fn parse_criteria(text: &str) -> Result<Vec<u8>, CliError> {
    if text.trim() == "all" {
        return Ok(vec![1, 2, 3, 4]);
    }
    let mut out = Vec::new();
    for tok in text.split(',') {
        match tok.trim() {
            t @ ("1" | "2" | "3" | "4") => out.push(t.as_bytes()[0] - b'0'),
            t => return Err(CliError::usage(format!("--criteria: unknown criterion {t:?} (use 1,2,3,4 or all)"))),
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// `a,b` for a single coupled pair (uncoupled modes keep `λ`), or every
/// `a_j` followed by every `b_k`.
fn parse_ab(nf: &NormalForm, text: &str) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let v = parse_list(text, "(a, b)")?;
    let (na, nb) = (nf.split.n_a(), nf.split.n_b());
    if v.len() == na + nb {
        return Ok((v[..na].to_vec(), v[na..].to_vec()));
    }
    if v.len() == 2 && nf.pairs() == 1 {
        let (mut a, mut b) = (nf.lambda_a.clone(), nf.lambda_b.clone());
        a[0] = v[0];
        b[0] = v[1];
        return Ok((a, b));
    }
    Err(CliError::usage(format!("(a, b): expected {} values (or 2 for a single coupled pair), got {}", na + nb, v.len())))
}

fn pattern_tol(cli: &Cli) -> f64 {
    cli.tol.unwrap_or(PATTERN_TOL)
}

fn applicable_form(cli: &Cli, m: &NormalizedMatrix) -> Result<NormalForm, CliError> {
    let nf = criterion4_applicable(m, pattern_tol(cli))?;
    if !nf.applicable {
        return Err(CliError::NotApplicable(format!(
            "M cannot be brought to the criterion-4 normal form (off-pattern residual {:e})",
            nf.residual
        )));
    }
    Ok(nf)
}

fn analyze(cli: &Cli, path: &Path, criteria: &str, epsilon: &str, ab: &str, strategy: Strategy) -> Result<Output, CliError> {
    let input = input::load(path, cli.hbar)?;
    let criteria = parse_criteria(criteria)?;
    let explicit_eps = match epsilon.trim() {
        "search" => None,
        e => Some(parse_list(e, "--epsilon")?),
    };
    let t = Instant::now();
    let m = input.normalized()?;
    let status = StateStatus::of(&input)?;
    let state = status.state(&input)?;

    let mut reports: Vec<SeparabilityReport> = Vec::new();
    let mut search_doc = None;
    let mut stop = false;
    if let StateStatus::Valid(cov, _) = &status {
        let r = ppt_test(cov)?;
        stop = r.verdict == Verdict::NotSeparable;
        reports.push(r);
    }
    for &c in &criteria {
        if stop {
            break;
        }
        let report = match c {
            1 => criterion1(&m)?,
            2 => criterion2(&m)?,
            3 => match &explicit_eps {
                Some(eps) => criterion3(&m, eps)?,
                None => {
                    let (name, strat) = match strategy {
                        Strategy::Uniform => ("uniform", EpsilonStrategy::UniformScalar),
                        Strategy::Coordinate => ("coordinate", EpsilonStrategy::CoordinateDescent),
                        Strategy::NelderMead => ("nelder-mead", EpsilonStrategy::NelderMeadLike),
                    };
                    let s = search_epsilon(&m, &EpsilonSearchConfig { strategy: strat, ..Default::default() })?;
                    search_doc = Some(EpsilonSearchDoc {
                        strategy: name,
                        found: s.found,
                        epsilon: s.epsilon.clone(),
                        objective: s.objective,
                        evaluations: s.evaluations,
                    });
                    s.report
                }
            },
            _ => match ab.trim() {
                "scan" => criterion4_searched(&m, pattern_tol(cli))?,
                text => {
                    let nf = applicable_form(cli, &m)?;
                    let (a, b) = parse_ab(&nf, text)?;
                    criterion4_with(&nf, &m, &a, &b)?
                }
            },
        };
        stop = report.is_separable();
        reports.push(report);
    }

    let overall = overall_verdict(&reports);
    let doc = AnalyzeOutput {
        schema_version: SCHEMA_VERSION,
        command: "analyze",
        input: InputEcho::new(&input),
        quantum_condition: status.doc().clone(),
        purity: state.as_ref().map(purity),
        reduced_purities: state.as_ref().map(reduced_purities).transpose()?,
        reports: reports.iter().map(|r| ReportDoc::new(r, &m)).collect(),
        epsilon_search: search_doc,
        overall_verdict: overall,
        first_separable: reports.iter().find(|r| r.is_separable()).map(|r| r.criterion),
        timing_ms: millis(t),
    };
    let code = match (&state, overall) {
        (None, _) => exit::INVALID_STATE,
        (_, Verdict::Separable) => exit::OK,
        (_, Verdict::NotSeparable) => exit::NOT_SEPARABLE,
        (_, Verdict::Inconclusive) => exit::INCONCLUSIVE,
    };
    let text = render(cli.format, &doc, || {
        let mut lines = vec![format!("input {} (sha256 {})", doc.input.path, doc.input.sha256), qc_line(&doc.quantum_condition)];
        if state.is_none() {
            lines.push("not a quantum state: criteria below are evaluated on the quadratic form only".into());
        }
        lines.extend(doc.reports.iter().map(summary_line));
        let by = doc.first_separable.map(|c| format!(" via {}", c.name())).unwrap_or_default();
        lines.push(format!("overall: {overall:?}{by}"));
        lines
    })?;
    Ok(Output { text, code })
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct LemmaDoc {
    alpha: f64,
    beta: f64,
    gamma: f64,
    feasible: bool,
    a0: Option<f64>,
    b0: Option<f64>,
}

#[derive(Serialize)]
struct BoundaryDoc {
    max_cell_error: f64,
    within_one_cell: bool,
}

#[derive(Serialize)]
struct Files {
    region: String,
    boundary: String,
}

#[derive(Serialize)]
struct RegionOutput {
    schema_version: &'static str,
    command: &'static str,
    input: InputEcho,
    j: usize,
    grid: [usize; 2],
    lambda_a: f64,
    lambda_b: f64,
    d: f64,
    dd: f64,
    a_range: (f64, f64),
    b_range: (f64, f64),
    feasible_cells: usize,
    boundary_check: BoundaryDoc,
    lemma: LemmaDoc,
    files: Files,
    timing_ms: f64,
}

fn parse_grid(text: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::usage(format!("--grid: expected RxC, e.g. 200x200, got {text:?}"));
    let (r, c) = text.split_once(['x', 'X']).ok_or_else(bad)?;
    Ok((r.trim().parse().map_err(|_| bad())?, c.trim().parse().map_err(|_| bad())?))
}

fn boundary_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "region".into());
    let ext = out.extension().map(|e| e.to_string_lossy().into_owned()).unwrap_or_else(|| "csv".into());
    out.with_file_name(format!("{stem}_boundary.{ext}"))
}

fn region(cli: &Cli, path: &Path, j: usize, grid: &str, out: &Path, boundary_out: Option<&Path>) -> Result<Output, CliError> {
    let input = input::load(path, cli.hbar)?;
    let resolution = parse_grid(grid)?;
    let t = Instant::now();
    let m = input.normalized()?;
    let nf = applicable_form(cli, &m)?;
    let region = region_scan(&nf, j, resolution)?;
    let boundary_file = boundary_out.map(Path::to_path_buf).unwrap_or_else(|| boundary_path(out));
    csv::write(out, &csv::region(&region))?;
    csv::write(&boundary_file, &csv::boundary(&region.boundary_curves()))?;
    let lemma = lemma_quadratic(region.lambda_a, region.lambda_b, region.d, region.dd)?;
    let bc = region.boundary_check();
    let doc = RegionOutput {
        schema_version: SCHEMA_VERSION,
        command: "region",
        input: InputEcho::new(&input),
        j,
        grid: [resolution.0, resolution.1],
        lambda_a: region.lambda_a,
        lambda_b: region.lambda_b,
        d: region.d,
        dd: region.dd,
        a_range: region.a_range,
        b_range: region.b_range,
        feasible_cells: region.points.len(),
        boundary_check: BoundaryDoc { max_cell_error: bc.max_cell_error, within_one_cell: bc.within_one_cell },
        lemma: LemmaDoc {
            alpha: lemma.alpha,
            beta: lemma.beta,
            gamma: lemma.gamma,
            feasible: lemma.feasible,
            a0: lemma.a0,
            b0: lemma.b0,
        },
        files: Files { region: out.display().to_string(), boundary: boundary_file.display().to_string() },
        timing_ms: millis(t),
    };
    let text = render(cli.format, &doc, || {
        vec![
            format!("pair {j}: λ_A={:.12} λ_B={:.12} d={:.12} D={:.12}", doc.lambda_a, doc.lambda_b, doc.d, doc.dd),
            format!("{} of {} cells feasible; boundary within {:.3} cells", doc.feasible_cells, resolution.0 * resolution.1, bc.max_cell_error),
            format!("lemma: feasible={} a0={:?} b0={:?}", lemma.feasible, lemma.a0, lemma.b0),
            format!("wrote {} and {}", doc.files.region, doc.files.boundary),
        ]
    })?;
    Ok(Output { text, code: exit::OK })
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct EllipseDoc {
    form: Rows,
    level: f64,
}

#[derive(Serialize)]
struct InnerDoc {
    form: Rows,
    level: f64,
    a: Vec<f64>,
    b: Vec<f64>,
    certificate_valid: bool,
    contained: bool,
}

#[derive(Serialize)]
struct ProjectOutput {
    schema_version: &'static str,
    command: &'static str,
    input: InputEcho,
    plane: Vec<String>,
    coordinates: [usize; 2],
    outer: EllipseDoc,
    #[serde(skip_serializing_if = "Option::is_none")]
    inner: Option<InnerDoc>,
    file: String,
    timing_ms: f64,
}

/// AB-block index of `x_A`, `p_B2`, …, or a raw index.
fn coordinate(split: &gaussep::BipartiteSplit, name: &str) -> Result<usize, CliError> {
    let bad = || CliError::usage(format!("bad plane: unknown coordinate {name:?} (use x_A, p_B, x_A2, … or an index)"));
    if let Ok(i) = name.parse::<usize>() {
        return if i < split.dim() { Ok(i) } else { Err(bad()) };
    }
    let (q, rest) = name.split_once('_').ok_or_else(bad)?;
    let mut chars = rest.chars();
    let sub = match chars.next() {
        Some('A') => Subsystem::A,
        Some('B') => Subsystem::B,
        _ => return Err(bad()),
    };
    let digits = chars.as_str();
    let mode: usize = if digits.is_empty() { 1 } else { digits.parse().map_err(|_| bad())? };
    if mode == 0 || mode > split.modes_of(sub) {
        return Err(bad());
    }
    let global_mode = if sub == Subsystem::A { mode - 1 } else { split.n_a() + mode - 1 };
    let j = SymplecticForm::ab_block(split);
    match q {
        "x" => Ok(j.x_index(global_mode)),
        "p" => Ok(j.p_index(global_mode)),
        _ => Err(bad()),
    }
}

fn parse_plane(split: &gaussep::BipartiteSplit, text: &str) -> Result<(Vec<String>, [usize; 2]), CliError> {
    let text = text.trim();
    if let Some(sub) = match text {
        "A" => Some(Subsystem::A),
        "B" => Some(Subsystem::B),
        _ => None,
    } {
        if split.modes_of(sub) != 1 {
            return Err(CliError::usage(format!("bad plane: subsystem {text} has more than one mode; name two coordinates")));
        }
        let s = if sub == Subsystem::A { "A" } else { "B" };
        let names = vec![format!("x_{s}"), format!("p_{s}")];
        return Ok(([coordinate(split, &names[0])?, coordinate(split, &names[1])?], names)).map(|(c, n)| (n, c));
    }
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(CliError::usage(format!("bad plane: expected two coordinates, got {text:?}")));
    }
    let coords = [coordinate(split, parts[0])?, coordinate(split, parts[1])?];
    if coords[0] == coords[1] {
        return Err(CliError::usage("bad plane: the two coordinates coincide"));
    }
    Ok((parts.iter().map(|s| s.to_string()).collect(), coords))
}

fn ellipse_doc(e: &Ellipsoid) -> EllipseDoc {
    EllipseDoc { form: rows(e.q()), level: e.level() }
}

fn project(cli: &Cli, path: &Path, plane: &str, out: &Path, blob: Option<&str>, points: usize) -> Result<Output, CliError> {
    let input = input::load(path, cli.hbar)?;
    let (names, coords) = parse_plane(&input.split, plane)?;
    if points < 3 {
        return Err(CliError::usage("--points must be at least 3"));
    }
    let t = Instant::now();
    let m = input.normalized()?;
    if !m.is_positive_definite() {
        return Err(CliError::InvalidState("M is not positive definite, so it has no covariance ellipsoid".into()));
    }
    let hbar = input.split.hbar();
    let omega = Ellipsoid::covariance(&m)?;
    let outer = project_onto_coordinates(&omega, &coords)?;
    let mut curves = vec![("outer", ellipse_polyline(&outer, points)?)];
    let inner = match blob {
        None => None,
        Some(text) => {
            let nf = applicable_form(cli, &m)?;
            let (a, b) = parse_ab(&nf, text)?;
            let cert = nf.certificate(&a, &b)?;
            let valid = cert.validate(&m)?.valid;
            let full = Ellipsoid::new(linalg::direct_sum(&cert.m_a, &cert.m_b), hbar)?;
            let shadow = project_onto_coordinates(&full, &coords)?;
            let contained = ellipsoid_contains(&outer, &shadow)?;
            curves.push(("inner", ellipse_polyline(&shadow, points)?));
            Some(InnerDoc { form: rows(shadow.q()), level: shadow.level(), a, b, certificate_valid: valid, contained })
        }
    };
    csv::write(out, &csv::polylines(&curves))?;
    let doc = ProjectOutput {
        schema_version: SCHEMA_VERSION,
        command: "project",
        input: InputEcho::new(&input),
        plane: names,
        coordinates: coords,
        outer: ellipse_doc(&outer),
        inner,
        file: out.display().to_string(),
        timing_ms: millis(t),
    };
    let text = render(cli.format, &doc, || {
        let mut lines = vec![format!("plane ({}, {}), outer form {:?} at level {}", doc.plane[0], doc.plane[1], doc.outer.form, doc.outer.level)];
        if let Some(i) = &doc.inner {
            lines.push(format!("inner form {:?}; certificate valid: {}; contained: {}", i.form, i.certificate_valid, i.contained));
        }
        lines.push(format!("wrote {}", doc.file));
        lines
    })?;
    Ok(Output { text, code: exit::OK })
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ReduceOutput {
    schema_version: &'static str,
    command: &'static str,
    input: InputEcho,
    subsystem: Subsystem,
    modes: usize,
    sigma: Rows,
    normalized: Rows,
    mean: Vec<f64>,
    purity: f64,
    quantum_condition: QuantumConditionDoc,
    timing_ms: f64,
}

fn reduce_cmd(cli: &Cli, path: &Path, subsystem: &str) -> Result<Output, CliError> {
    let input = input::load(path, cli.hbar)?;
    let sub = match subsystem.trim() {
        "A" | "a" => Subsystem::A,
        "B" | "b" => Subsystem::B,
        s => return Err(CliError::usage(format!("--subsystem: expected A or B, got {s:?}"))),
    };
    let t = Instant::now();
    let status = StateStatus::of(&input)?;
    let Some(state) = status.state(&input)? else {
        return Err(CliError::InvalidState(status.doc().reason.clone().unwrap_or_default()));
    };
    let reduced = reduce(&state, sub)?;
    let qc = reduced.check_quantum_condition()?;
    let doc = ReduceOutput {
        schema_version: SCHEMA_VERSION,
        command: "reduce",
        input: InputEcho::new(&input),
        subsystem: sub,
        modes: reduced.modes(),
        sigma: rows(&reduced.sigma),
        normalized: rows(&reduced.normalized),
        mean: vector(&reduced.mean),
        purity: reduced.purity(),
        quantum_condition: QuantumConditionDoc::from_check(&qc),
        timing_ms: millis(t),
    };
    let text = render(cli.format, &doc, || {
        vec![
            format!("subsystem {:?} ({} modes): Σ = {:?}", sub, doc.modes, doc.sigma),
            qc_line(&doc.quantum_condition),
            format!("purity {:.12}", doc.purity),
        ]
    })?;
    Ok(Output { text, code: exit::OK })
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct PptOutput {
    schema_version: &'static str,
    command: &'static str,
    input: InputEcho,
    report: ReportDoc,
    partial_transpose_sigma: Rows,
    timing_ms: f64,
}

fn ppt(cli: &Cli, path: &Path) -> Result<Output, CliError> {
    let input = input::load(path, cli.hbar)?;
    let t = Instant::now();
    let status = StateStatus::of(&input)?;
    let StateStatus::Valid(cov, _) = &status else {
        return Err(CliError::InvalidState(status.doc().reason.clone().unwrap_or_default()));
    };
    let report = ppt_test(cov)?;
    let doc = PptOutput {
        schema_version: SCHEMA_VERSION,
        command: "ppt",
        input: InputEcho::new(&input),
        report: ReportDoc::new(&report, &cov.to_normalized()),
        partial_transpose_sigma: rows(partial_transpose(cov).matrix()),
        timing_ms: millis(t),
    };
    let code = if report.verdict == Verdict::NotSeparable { exit::NOT_SEPARABLE } else { exit::INCONCLUSIVE };
    let text = render(cli.format, &doc, || vec![summary_line(&doc.report), format!("overall: {:?}", report.verdict)])?;
    Ok(Output { text, code })
}
