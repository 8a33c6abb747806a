//! Deterministic CSV writers. Floats use 17 significant digits.

use std::fmt::Write as _;
use std::path::Path;

use gaussep::search::{BoundaryPoint, FeasibilityRegion};

use crate::CliError;

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn region(region: &FeasibilityRegion) -> String {
    let mut out = String::from("a,b,feasible\n");
    let rb = region.b_values.len();
    for (i, &a) in region.a_values.iter().enumerate() {
        for (k, &b) in region.b_values.iter().enumerate() {
            let f = region.grid[i * rb + k] as u8;
            let _ = writeln!(out, "{},{},{f}", num(a), num(b));
        }
    }
    out
}

pub fn boundary(points: &[BoundaryPoint]) -> String {
    let mut out = String::from("a,b_lower,b_upper\n");
    for p in points {
        let _ = writeln!(out, "{},{},{}", num(p.a), num(p.b_lower), num(p.b_upper));
    }
    out
}

/// `curve,x,y` rows for each named polyline.
pub fn polylines(curves: &[(&str, Vec<[f64; 2]>)]) -> String {
    let mut out = String::from("curve,x,y\n");
    for (name, pts) in curves {
        for p in pts {
            let _ = writeln!(out, "{name},{},{}", num(p[0]), num(p[1]));
        }
    }
    out
}

pub fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
