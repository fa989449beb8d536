use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use super::compare::{overall, Comparison, Verdict};
use crate::error::{PactError, Result};
use crate::linalg::Matrix;
use crate::tree::{AlphaSpec, Model};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = PactError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            _ => Err(PactError::InvalidArgument(format!("unknown format {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelMeta {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dary: Option<u32>,
    pub p: f64,
}

impl From<&Model> for ModelMeta {
    fn from(m: &Model) -> Self {
        match m.alpha_spec() {
            AlphaSpec::NonNegative(a) => Self { alpha: Some(a), dary: None, p: m.p() },
            AlphaSpec::DAry(d) => Self { alpha: None, dary: Some(d), p: m.p() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Meta {
    pub seed: u64,
    pub model: ModelMeta,
    pub n: usize,
    pub reps: usize,
    pub version: String,
}

/// Moments of the normalised deviations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaledSummary {
    /// `sqrt`, `sqrt_log`, `power`, `log_power` or `none`.
    pub scaling: String,
    pub exponent: Option<f64>,
    pub mean: Vec<f64>,
    pub cov: Matrix,
    pub m3: Vec<f64>,
    pub m4: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatisticResult {
    pub statistic: String,
    pub entries: Vec<String>,
    pub mean: Vec<f64>,
    pub cov: Matrix,
    pub scaled: ScaledSummary,
    pub prediction: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pmf: Option<Vec<f64>>,
    pub comparisons: Vec<Comparison>,
    pub verdict: Verdict,
}

impl StatisticResult {
    pub(crate) fn finish(mut self) -> Self {
        self.verdict = overall(&self.comparisons);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub meta: Meta,
    pub results: Vec<StatisticResult>,
}

impl Report {
    pub fn verdict(&self) -> Verdict {
        if self.results.iter().any(|r| r.verdict == Verdict::Fail) {
            Verdict::Fail
        } else if self.results.iter().all(|r| r.verdict == Verdict::Pass) {
            Verdict::Pass
        } else {
            Verdict::Inconclusive
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| PactError::Io(e.to_string()))
    }

    /// One row per comparison: `name, empirical, predicted, rel_err, verdict`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| PactError::Io(e.to_string());
        w.write_record(["name", "empirical", "predicted", "rel_err", "verdict"]).map_err(io)?;
        for r in &self.results {
            for c in &r.comparisons {
                let verdict = serde_json::to_value(c.verdict).map_err(|e| PactError::Io(e.to_string()))?;
                w.write_record([
                    format!("{}/{}", r.statistic, c.name),
                    c.empirical.to_string(),
                    c.predicted.to_string(),
                    c.rel_err.to_string(),
                    verdict.as_str().unwrap_or_default().to_string(),
                ])
                .map_err(io)?;
            }
        }
        let bytes = w.into_inner().map_err(|e| PactError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| PactError::Io(e.to_string()))
    }

    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Json => self.to_json(),
            OutputFormat::Csv => self.to_csv(),
        }
    }

    pub fn write(&self, path: &Path, format: OutputFormat) -> Result<()> {
        std::fs::write(path, self.render(format)?).map_err(|e| PactError::Io(format!("{}: {e}", path.display())))
    }
}
