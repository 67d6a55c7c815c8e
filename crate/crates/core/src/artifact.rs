//! JSON model artifact.
//!
//! Keys are emitted in sorted order and floats in shortest round-trip form, so
//! the same fit always produces the same bytes and `read -> write` is
//! byte-stable.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::cv::{FittedModel, LinearModel};
use crate::error::{Error, Result};
use crate::ingest::{ColumnLayout, IngestOutcome};
use crate::solver::{Penalty, ResolvedGrid};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltySummary {
    pub family: Penalty,
    pub mix: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedCoefficient {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvCurves {
    pub mean_mse: Vec<Option<f64>>,
    pub fold_mse: Vec<Vec<Option<f64>>>,
    pub fold_sizes: Vec<u64>,
    pub scored_folds: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationSummary {
    pub means: Vec<f64>,
    pub norms: Vec<f64>,
    pub y_mean: f64,
    pub dropped: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub n: u64,
    pub total_records: u64,
    pub rejected_records: u64,
    pub seed: u64,
    pub k: usize,
    pub layout: ColumnLayout,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub format_version: u32,
    pub penalty: PenaltySummary,
    pub grid: ResolvedGrid,
    pub lambda_opt: f64,
    pub fit_intercept: bool,
    pub intercept: f64,
    pub coefficients: Vec<NamedCoefficient>,
    pub cv: CvCurves,
    pub standardization: StandardizationSummary,
    pub ingest: IngestSummary,
    pub converged: bool,
    pub kkt_residual: f64,
    pub in_sample_mse: f64,
}

impl ModelArtifact {
    pub fn new(fit: &FittedModel, data: &IngestOutcome) -> Self {
        let names = &data.layout.feature_names;
        Self {
            format_version: FORMAT_VERSION,
            penalty: PenaltySummary {
                family: fit.penalty.penalty,
                mix: fit.penalty.mix,
            },
            grid: fit.cv.grid.clone(),
            lambda_opt: fit.lambda_opt,
            fit_intercept: fit.fit_intercept,
            intercept: fit.model.intercept,
            coefficients: names
                .iter()
                .zip(&fit.model.coefficients)
                .map(|(name, &value)| NamedCoefficient {
                    name: name.clone(),
                    value,
                })
                .collect(),
            cv: CvCurves {
                mean_mse: fit.cv.mean_mse.clone(),
                fold_mse: fit.cv.fold_mse.clone(),
                fold_sizes: fit.cv.fold_sizes.clone(),
                scored_folds: fit.cv.scored_folds.clone(),
            },
            standardization: StandardizationSummary {
                means: fit.standardization.means.clone(),
                norms: fit.standardization.norms.clone(),
                y_mean: fit.standardization.y_mean,
                dropped: fit
                    .standardization
                    .dropped
                    .iter()
                    .map(|d| names[d.column].clone())
                    .collect(),
            },
            ingest: IngestSummary {
                n: fit.n,
                total_records: data.folds.total_records,
                rejected_records: data.folds.rejected_records,
                seed: data.seed,
                k: data.folds.k(),
                layout: data.layout.clone(),
            },
            converged: fit.converged,
            kkt_residual: fit.kkt_residual,
            in_sample_mse: fit.in_sample_mse,
        }
    }

    pub fn model(&self) -> LinearModel {
        LinearModel {
            intercept: self.intercept,
            coefficients: self.coefficients.iter().map(|c| c.value).collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let value = sort_keys(serde_json::to_value(self)?);
        let mut out = serde_json::to_string_pretty(&value)?;
        out.push('\n');
        Ok(out)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let artifact: Self = serde_json::from_str(text)?;
        if artifact.format_version != FORMAT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported model format version {}",
                artifact.format_version
            )));
        }
        Ok(artifact)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }
}

fn sort_keys(value: Value) -> Value {
    match value {
        Value::Object(map) => {
            let mut entries: Vec<(String, Value)> = map.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            let mut sorted = Map::new();
            for (k, v) in entries {
                sorted.insert(k, sort_keys(v));
            }
            Value::Object(sorted)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(sort_keys).collect()),
        other => other,
    }
}
