//! The JSON input document.
//!
//! ```json
//! {
//!   "schema_version": "1",
//!   "split": { "n_A": 1, "n_B": 1, "hbar": 1.0 },
//!   "matrix_kind": "M",
//!   "layout": "ab_block",
//!   "matrix": [["1/2", 0, "2/3", 0], …],
//!   "mean": [0, 0, 0, 0]
//! }
//! ```
//!
//! Entries are JSON numbers or strings holding a decimal or a fraction
//! `p/q`. `matrix` is either a list of rows or one flat row-major list.

use std::path::Path;

use gaussep::{BipartiteSplit, CovarianceMatrix, NormalizedMatrix};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const SCHEMA_VERSION: &str = "1";
/// Largest tolerated `|m_ij − m_ji|`, relative to `max(1, max|m_ij|)`.
pub const SYMMETRY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MatrixKind {
    #[serde(rename = "sigma")]
    Sigma,
    M,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayoutName {
    #[default]
    AbBlock,
    Global,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SplitDoc {
    #[serde(rename = "n_A")]
    n_a: usize,
    #[serde(rename = "n_B")]
    n_b: usize,
    hbar: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Entry {
    Number(f64),
    Text(String),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum MatrixDoc {
    Rows(Vec<Vec<Entry>>),
    Flat(Vec<Entry>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InputDocument {
    schema_version: String,
    split: SplitDoc,
    matrix_kind: MatrixKind,
    #[serde(default)]
    layout: LayoutName,
    matrix: MatrixDoc,
    mean: Option<Vec<Entry>>,
}

/// A parsed input, already in AB-block layout.
#[derive(Debug, Clone)]
pub struct LoadedInput {
    pub path: String,
    pub sha256: String,
    pub split: BipartiteSplit,
    pub kind: MatrixKind,
    pub layout: LayoutName,
    pub matrix: DMatrix<f64>,
    pub mean: Option<DVector<f64>>,
}

/// A decimal or a fraction `p/q`.
pub fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim();
    let value = match s.split_once('/') {
        Some((p, q)) => {
            let (p, q) = (p.trim().parse::<f64>().ok()?, q.trim().parse::<f64>().ok()?);
            if q == 0.0 {
                return None;
            }
            p / q
        }
        None => s.parse::<f64>().ok()?,
    };
    value.is_finite().then_some(value)
}

fn parse_entry(e: &Entry, field: &str) -> Result<f64, CliError> {
    match e {
        Entry::Number(x) if x.is_finite() => Ok(*x),
        Entry::Number(x) => Err(CliError::parse(format!("{field}: value {x} is not finite"))),
        Entry::Text(s) => parse_number(s)
            .ok_or_else(|| CliError::parse(format!("{field}: cannot read {s:?} as a finite number or fraction p/q"))),
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn load(path: &Path, hbar_override: Option<f64>) -> Result<LoadedInput, CliError> {
    let raw = std::fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let text = std::str::from_utf8(&raw).map_err(|e| CliError::parse(format!("input is not UTF-8: {e}")))?;
    let mut loaded = parse(text)?;
    loaded.path = path.display().to_string();
    loaded.sha256 = hex(&Sha256::digest(&raw));
    if let Some(h) = hbar_override {
        loaded.split = loaded.split.with_hbar_override(h).map_err(|e| CliError::parse(format!("--hbar: {e}")))?;
    }
    Ok(loaded)
}

pub fn parse(text: &str) -> Result<LoadedInput, CliError> {
    let doc: InputDocument = serde_json::from_str(text)
        .map_err(|e| CliError::parse(format!("line {}, column {}: {e}", e.line(), e.column())))?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(CliError::parse(format!(
            "schema_version: unsupported version {:?} (expected {SCHEMA_VERSION:?})",
            doc.schema_version
        )));
    }
    let hbar = doc.split.hbar.unwrap_or(1.0);
    let split = BipartiteSplit::with_hbar(doc.split.n_a, doc.split.n_b, hbar)
        .map_err(|e| CliError::parse(format!("split: {e}")))?;
    let dim = split.dim();

    let entries: Vec<f64> = match &doc.matrix {
        MatrixDoc::Rows(rows) => {
            if rows.len() != dim {
                return Err(CliError::parse(format!("matrix: {} rows, expected {dim}", rows.len())));
            }
            let mut out = Vec::with_capacity(dim * dim);
            for (i, row) in rows.iter().enumerate() {
                if row.len() != dim {
                    return Err(CliError::parse(format!("matrix row {i}: {} entries, expected {dim}", row.len())));
                }
                for (j, e) in row.iter().enumerate() {
                    out.push(parse_entry(e, &format!("matrix[{i}][{j}]"))?);
                }
            }
            out
        }
        MatrixDoc::Flat(flat) => {
            if flat.len() != dim * dim {
                return Err(CliError::parse(format!("matrix: {} entries, expected {}", flat.len(), dim * dim)));
            }
            flat.iter().enumerate().map(|(k, e)| parse_entry(e, &format!("matrix[{k}]"))).collect::<Result<_, _>>()?
        }
    };
    let m = DMatrix::from_row_slice(dim, dim, &entries);
    let scale = m.amax().max(1.0);
    for i in 0..dim {
        for j in i + 1..dim {
            let gap = (m[(i, j)] - m[(j, i)]).abs();
            if gap > SYMMETRY_TOL * scale {
                return Err(CliError::parse(format!(
                    "matrix: not symmetric, entries [{i}][{j}] = {} and [{j}][{i}] = {} differ by {gap:e}",
                    m[(i, j)],
                    m[(j, i)]
                )));
            }
        }
    }
    let m = (&m + m.transpose()) * 0.5;

    let mean = match &doc.mean {
        None => None,
        Some(v) => {
            if v.len() != dim {
                return Err(CliError::parse(format!("mean: {} entries, expected {dim}", v.len())));
            }
            let vals = v.iter().enumerate().map(|(k, e)| parse_entry(e, &format!("mean[{k}]"))).collect::<Result<Vec<_>, _>>()?;
            Some(DVector::from_vec(vals))
        }
    };

    let (matrix, mean) = match doc.layout {
        LayoutName::AbBlock => (m, mean),
        LayoutName::Global => {
            let perm = split.ab_from_global();
            (split.global_to_ab(&m), mean.map(|v| DVector::from_fn(dim, |i, _| v[perm[i]])))
        }
    };
    Ok(LoadedInput {
        path: String::new(),
        sha256: hex(&Sha256::digest(text.as_bytes())),
        split,
        kind: doc.matrix_kind,
        layout: doc.layout,
        matrix,
        mean,
    })
}

impl LoadedInput {
    /// `M = (ħ/2)Σ⁻¹`, or the input itself for `matrix_kind = "M"`.
    ///
    /// Only the diagonal blocks need to be definite; an indefinite `M` is a
    /// quadratic form the sufficient criteria can still be evaluated on.
    pub fn normalized(&self) -> Result<NormalizedMatrix, CliError> {
        match self.kind {
            MatrixKind::M => Ok(NormalizedMatrix::new(self.split, self.matrix.clone())?),
            MatrixKind::Sigma => Ok(CovarianceMatrix::new(self.split, self.matrix.clone())?.to_normalized()),
        }
    }

    /// The covariance matrix, if the input describes one (positive definite).
    pub fn covariance(&self) -> Result<CovarianceMatrix, CliError> {
        match self.kind {
            MatrixKind::Sigma => Ok(CovarianceMatrix::new(self.split, self.matrix.clone())?),
            MatrixKind::M => {
                let m = NormalizedMatrix::new(self.split, self.matrix.clone())?;
                Ok(CovarianceMatrix::from_normalized(&m)?)
            }
        }
    }
}
