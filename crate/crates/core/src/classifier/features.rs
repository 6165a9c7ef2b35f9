use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ClassifierError;

/// Sensor features in vector order.
pub const FEATURE_NAMES: [&str; 6] = ["weight", "metal_response", "moisture", "opacity", "rigidity", "volume"];

pub type RawRecord = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
}

/// Per-feature mean and standard deviation of a training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl NormStats {
    pub fn new(mean: Vec<f64>, std: Vec<f64>) -> Result<Self, ClassifierError> {
        if mean.len() != FEATURE_NAMES.len() || std.len() != FEATURE_NAMES.len() {
            return Err(ClassifierError::DimensionMismatch {
                expected: FEATURE_NAMES.len(),
                got: mean.len().min(std.len()),
            });
        }
        if let Some(k) = std.iter().position(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(ClassifierError::ZeroVariance(FEATURE_NAMES[k].to_string()));
        }
        Ok(Self { mean, std })
    }

    /// Population mean and standard deviation over `records`.
    pub fn fit<'a>(records: impl IntoIterator<Item = &'a RawRecord>) -> Result<Self, ClassifierError> {
        let rows: Vec<Vec<f64>> = records.into_iter().map(raw_values).collect::<Result<_, _>>()?;
        if rows.is_empty() {
            return Err(ClassifierError::EmptyDataset);
        }
        let n = rows.len() as f64;
        let d = FEATURE_NAMES.len();
        let mut mean = vec![0.0; d];
        for r in &rows {
            for k in 0..d {
                mean[k] += r[k];
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for r in &rows {
            for k in 0..d {
                var[k] += (r[k] - mean[k]).powi(2);
            }
        }
        Self::new(mean, var.into_iter().map(|v| (v / n).sqrt()).collect())
    }
}

fn raw_values(raw: &RawRecord) -> Result<Vec<f64>, ClassifierError> {
    FEATURE_NAMES
        .iter()
        .map(|name| {
            raw.get(*name)
                .copied()
                .ok_or_else(|| ClassifierError::MissingFeature(name.to_string()))
        })
        .collect()
}

/// `(value − mean) / std` per feature, in [`FEATURE_NAMES`] order.
pub fn featurize(raw: &RawRecord, stats: &NormStats) -> Result<FeatureVector, ClassifierError> {
    let values = raw_values(raw)?
        .into_iter()
        .enumerate()
        .map(|(k, v)| (v - stats.mean[k]) / stats.std[k])
        .collect();
    Ok(FeatureVector { values })
}

/// Inverse of [`featurize`].
pub fn unnormalize(x: &FeatureVector, stats: &NormStats) -> RawRecord {
    FEATURE_NAMES
        .iter()
        .zip(&x.values)
        .enumerate()
        .map(|(k, (name, z))| (name.to_string(), z * stats.std[k] + stats.mean[k]))
        .collect()
}
