//! File formats: kernel-model and operator JSON, campaign report emission,
//! and the shell CSV export.
//!
//! Complex numbers travel as `[re, im]` pairs, matrices row-major. The
//! kernel spec file is `{"kind": "szego"|"bergman"|"fock"|"gram", "points":
//! [[re,im],...], "gram": [[[re,im],...],...]}`; the point families read
//! `points`, the raw-Gram family reads `gram`. Operator files are
//! `{"dim": n, "entries": [[[re,im],...],...]}`.

use crate::berezin::ShellPoint;
use crate::harness::SuiteReport;
use crate::operator::{Operator, OperatorError};
use crate::rkhs::{self, KernelSpace, PointLabel, SpaceError};
use ndarray::Array2;
use num_complex::Complex;
use serde::Deserialize;
use std::fs;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error("kernel spec: {0}")]
    BadKernelSpec(String),
    #[error("operator file: {0}")]
    BadOperatorFile(String),
}

pub type Result<T> = std::result::Result<T, IoError>;

#[derive(Deserialize)]
struct KernelSpecFile {
    kind: String,
    #[serde(default)]
    points: Vec<[f64; 2]>,
    #[serde(default)]
    gram: Vec<Vec<[f64; 2]>>,
}

#[derive(Deserialize)]
struct OperatorFile {
    dim: usize,
    entries: Vec<Vec<[f64; 2]>>,
}

/// Parses a kernel spec document into a model.
pub fn parse_space(text: &str) -> Result<KernelSpace<f64>> {
    let spec: KernelSpecFile = serde_json::from_str(text)?;
    match spec.kind.as_str() {
        "szego" | "bergman" | "fock" => {
            if spec.points.is_empty() {
                return Err(IoError::BadKernelSpec(format!(
                    "kind \"{}\" needs a nonempty \"points\" list",
                    spec.kind
                )));
            }
            let pts: Vec<Complex<f64>> = spec
                .points
                .iter()
                .map(|&[re, im]| Complex::new(re, im))
                .collect();
            let space = match spec.kind.as_str() {
                "szego" => rkhs::build_szego(&pts)?,
                "bergman" => rkhs::build_bergman(&pts)?,
                _ => rkhs::build_fock(&pts)?,
            };
            Ok(space)
        }
        "gram" => {
            let m = spec.gram.len();
            if m == 0 {
                return Err(IoError::BadKernelSpec(
                    "kind \"gram\" needs a nonempty square \"gram\" table".to_string(),
                ));
            }
            if spec.gram.iter().any(|row| row.len() != m) {
                return Err(IoError::BadKernelSpec(format!(
                    "gram table must be square, got {m} rows of unequal length"
                )));
            }
            let gram = Array2::from_shape_fn((m, m), |(i, j)| {
                Complex::new(spec.gram[i][j][0], spec.gram[i][j][1])
            });
            Ok(rkhs::build_from_gram(&gram, PointLabel::indices(m))?)
        }
        other => Err(IoError::BadKernelSpec(format!("unknown kind \"{other}\""))),
    }
}

pub fn load_space(path: &Path) -> Result<KernelSpace<f64>> {
    parse_space(&fs::read_to_string(path)?)
}

/// Parses an operator document.
pub fn parse_operator(text: &str) -> Result<Operator<f64>> {
    let file: OperatorFile = serde_json::from_str(text)?;
    let n = file.dim;
    if n == 0 {
        return Err(IoError::BadOperatorFile(
            "dim must be at least 1".to_string(),
        ));
    }
    if file.entries.len() != n || file.entries.iter().any(|row| row.len() != n) {
        return Err(IoError::BadOperatorFile(format!(
            "entries must form a {n} x {n} table"
        )));
    }
    let entries = Array2::from_shape_fn((n, n), |(i, j)| {
        Complex::new(file.entries[i][j][0], file.entries[i][j][1])
    });
    Ok(Operator::new(entries)?)
}

pub fn load_operator(path: &Path) -> Result<Operator<f64>> {
    parse_operator(&fs::read_to_string(path)?)
}

/// Renders shell points as CSV with columns
/// `label_re,label_im,symbol_re,symbol_im,image_norm_sq`.
pub fn shell_csv(points: &[ShellPoint<f64>]) -> String {
    let mut out = String::from("label_re,label_im,symbol_re,symbol_im,image_norm_sq\n");
    for p in points {
        let (re, im) = p.label.coordinates();
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            re, im, p.symbol.re, p.symbol.im, p.image_norm_sq
        ));
    }
    out
}

pub fn write_shell_csv(path: &Path, points: &[ShellPoint<f64>]) -> Result<()> {
    fs::write(path, shell_csv(points))?;
    Ok(())
}

/// Serializes a campaign report: pretty JSON, UTF-8, stable key order, with
/// a trailing newline.
pub fn report_to_json(report: &SuiteReport) -> Result<String> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    Ok(text)
}

pub fn write_report(path: &Path, report: &SuiteReport) -> Result<()> {
    fs::write(path, report_to_json(report)?)?;
    Ok(())
}
