//! Empirical-versus-predicted verdicts.

use serde::Serialize;

use crate::error::{PactError, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Tolerance {
    /// Pass when the error is within `relative |predicted|` or `z`
    /// standard errors, whichever is larger.
    Statistical { relative: f64, z: f64 },
    Relative { relative: f64 },
    ZScore { z: f64 },
    Absolute { absolute: f64 },
    /// Relative for non-zero predictions, absolute at zero.
    Analytic { relative: f64 },
    /// One-sided: the empirical value must be at least the prediction.
    AtLeast,
}

impl Tolerance {
    pub const DEFAULT: Tolerance = Tolerance::Statistical { relative: 0.15, z: 4.0 };
    pub const ANALYTIC: Tolerance = Tolerance::Analytic { relative: 1e-9 };

    fn allowance(&self, predicted: f64, se: Option<f64>) -> Option<f64> {
        let se = se.filter(|s| s.is_finite());
        match *self {
            Tolerance::Statistical { relative, z } => Some((relative * predicted.abs()).max(z * se.unwrap_or(0.0))),
            Tolerance::Relative { relative } => Some(relative * predicted.abs()),
            Tolerance::ZScore { z } => se.map(|s| z * s),
            Tolerance::Absolute { absolute } => Some(absolute),
            Tolerance::Analytic { relative } => Some(if predicted == 0.0 { relative } else { relative * predicted.abs() }),
            Tolerance::AtLeast => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub name: String,
    pub empirical: f64,
    pub predicted: f64,
    pub se: Option<f64>,
    pub rel_err: f64,
    pub tolerance: Tolerance,
    pub verdict: Verdict,
}

fn relative_error(empirical: f64, predicted: f64) -> f64 {
    if empirical == predicted {
        0.0
    } else {
        (empirical - predicted).abs() / predicted.abs()
    }
}

pub fn compare_value(name: impl Into<String>, empirical: f64, predicted: f64, se: Option<f64>, tolerance: Tolerance) -> Comparison {
    let verdict = if !empirical.is_finite() || !predicted.is_finite() {
        Verdict::Inconclusive
    } else if tolerance == Tolerance::AtLeast {
        if empirical >= predicted {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    } else {
        match tolerance.allowance(predicted, se) {
            None => Verdict::Inconclusive,
            Some(a) if (empirical - predicted).abs() <= a => Verdict::Pass,
            Some(_) => Verdict::Fail,
        }
    };
    Comparison { name: name.into(), empirical, predicted, se, rel_err: relative_error(empirical, predicted), tolerance, verdict }
}

/// Entrywise comparison of two vectors.
pub fn compare(names: &[String], empirical: &[f64], predicted: &[f64], se: &[f64], tolerance: Tolerance) -> Result<Vec<Comparison>> {
    if empirical.len() != predicted.len() || se.len() != empirical.len() || names.len() != empirical.len() {
        return Err(PactError::InvalidArgument(format!(
            "shape mismatch: {} empirical, {} predicted",
            empirical.len(),
            predicted.len()
        )));
    }
    Ok((0..empirical.len()).map(|i| compare_value(names[i].clone(), empirical[i], predicted[i], Some(se[i]), tolerance)).collect())
}

/// Upper triangle of two symmetric matrices, entries named `prefix(a,b)`.
pub fn compare_matrix(prefix: &str, entries: &[String], empirical: &Matrix, predicted: &Matrix, se: &Matrix, tolerance: Tolerance) -> Result<Vec<Comparison>> {
    let d = entries.len();
    if [empirical.rows(), empirical.cols(), predicted.rows(), predicted.cols(), se.rows()].iter().any(|&x| x != d) {
        return Err(PactError::InvalidArgument(format!(
            "shape mismatch: {}x{} empirical, {}x{} predicted",
            empirical.rows(),
            empirical.cols(),
            predicted.rows(),
            predicted.cols()
        )));
    }
    let mut out = Vec::new();
    for i in 0..d {
        for j in i..d {
            let name = format!("{prefix}({},{})", entries[i], entries[j]);
            out.push(compare_value(name, empirical[(i, j)], predicted[(i, j)], Some(se[(i, j)]), tolerance));
        }
    }
    Ok(out)
}

/// `Fail` if any check fails, `Pass` if all pass, else `Inconclusive`.
pub fn overall(checks: &[Comparison]) -> Verdict {
    if checks.iter().any(|c| c.verdict == Verdict::Fail) {
        Verdict::Fail
    } else if !checks.is_empty() && checks.iter().all(|c| c.verdict == Verdict::Pass) {
        Verdict::Pass
    } else {
        Verdict::Inconclusive
    }
}
