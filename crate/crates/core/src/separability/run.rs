use super::criteria::{criterion1, criterion2};
use super::normal_form::{criterion4_applicable, criterion4_with, lemma_ab, PATTERN_TOL};
use super::ppt::ppt_test;
use super::{CriterionId, SeparabilityReport, Verdict, Witness};
use crate::error::Result;
use crate::par::{self, Execution};
use crate::search::{search_epsilon, EpsilonSearchConfig};
use crate::state::{CovarianceMatrix, NormalizedMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub epsilon: EpsilonSearchConfig,
    pub pattern_tol: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { epsilon: EpsilonSearchConfig::default(), pattern_tol: PATTERN_TOL }
    }
}

/// PPT, then criteria 1 → 2 → 3 (searched ε) → 4 (searched `(a, b)`),
/// stopping at the first `Separable` or at a PPT violation.
pub fn run_all(sigma: &CovarianceMatrix) -> Result<Vec<SeparabilityReport>> {
    run_all_with(sigma, &RunConfig::default())
}

pub fn run_all_with(sigma: &CovarianceMatrix, config: &RunConfig) -> Result<Vec<SeparabilityReport>> {
    let ppt = ppt_test(sigma)?;
    let violated = ppt.verdict == Verdict::NotSeparable;
    let mut reports = vec![ppt];
    if !violated {
        reports.extend(run_all_normalized(&sigma.to_normalized(), config)?);
    }
    Ok(reports)
}

/// The sufficient criteria alone, in order, stopping at the first
/// `Separable`. Works on any quadratic form with definite diagonal blocks.
pub fn run_all_normalized(m: &NormalizedMatrix, config: &RunConfig) -> Result<Vec<SeparabilityReport>> {
    let mut reports = Vec::with_capacity(4);
    let steps: [&dyn Fn() -> Result<SeparabilityReport>; 4] = [
        &|| criterion1(m),
        &|| criterion2(m),
        &|| Ok(search_epsilon(m, &config.epsilon)?.report),
        &|| criterion4_searched(m, config.pattern_tol),
    ];
    for step in steps {
        let report = step()?;
        let done = report.is_separable();
        reports.push(report);
        if done {
            break;
        }
    }
    Ok(reports)
}

/// Criterion 4 with `(a, b)` chosen by the lemma; `Inconclusive` when the normal
/// form does not apply or no parameters exist.
pub fn criterion4_searched(m: &NormalizedMatrix, tol: f64) -> Result<SeparabilityReport> {
    let nf = criterion4_applicable(m, tol)?;
    let inconclusive = |description: String, value: f64, threshold: f64, note: &str| {
        let mut r = SeparabilityReport::new(CriterionId::Criterion4, Verdict::Inconclusive);
        r.witness = Some(Witness { description, value, threshold });
        r.notes.push(note.into());
        r
    };
    if !nf.applicable {
        return Ok(inconclusive(
            "off-pattern residual of the normal form".into(),
            nf.residual,
            tol,
            "not applicable: M cannot be brought to the two-diagonal coupling form",
        ));
    }
    let worst = nf.lambda_a.iter().chain(&nf.lambda_b).copied().fold(0.0, f64::max);
    if worst > 1.0 {
        return Ok(inconclusive(
            "largest symplectic eigenvalue of M_AA, M_BB".into(),
            worst,
            1.0,
            "parameter ranges are empty",
        ));
    }
    match lemma_ab(&nf)? {
        Ok((a, b)) => criterion4_with(&nf, m, &a, &b),
        Err(pair) => Ok(inconclusive(
            format!("pair {pair} has no feasible (a, b)"),
            pair as f64,
            0.0,
            "no parameters satisfy the determinant conditions",
        )),
    }
}

/// `Separable` if any sufficient criterion fired, `NotSeparable` if the PPT
/// test did, `Inconclusive` otherwise.
pub fn overall_verdict(reports: &[SeparabilityReport]) -> Verdict {
    if reports.iter().any(|r| r.verdict == Verdict::Separable) {
        Verdict::Separable
    } else if reports.iter().any(|r| r.verdict == Verdict::NotSeparable) {
        Verdict::NotSeparable
    } else {
        Verdict::Inconclusive
    }
}

pub fn first_separable(reports: &[SeparabilityReport]) -> Option<CriterionId> {
    reports.iter().find(|r| r.is_separable()).map(|r| r.criterion)
}

/// [`run_all_with`] over many states; results are in input order whatever
/// the execution mode.
pub fn analyze_batch(
    states: &[CovarianceMatrix],
    config: &RunConfig,
    exec: Execution,
) -> Vec<Result<Vec<SeparabilityReport>>> {
    let mut inner = config.clone();
    inner.epsilon.execution = Execution::Sequential;
    par::map_slice(exec, states, |s| run_all_with(s, &inner))
}
