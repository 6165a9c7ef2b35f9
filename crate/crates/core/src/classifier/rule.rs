use serde::{Deserialize, Serialize};

use super::features::RawRecord;
use super::ClassifierError;
use crate::twin::SensorConfig;

/// Single-feature threshold classifier, the manual-sorting baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleClassifier {
    pub feature: String,
    /// Ascending cut points; `labels.len() == thresholds.len() + 1`.
    pub thresholds: Vec<f64>,
    pub labels: Vec<String>,
}

impl RuleClassifier {
    /// Orders classes by their mean of `feature` and cuts halfway between
    /// neighbouring means.
    pub fn from_sensor_config(cfg: &SensorConfig, feature: &str) -> Result<Self, ClassifierError> {
        let mut classes: Vec<(f64, &str)> = cfg
            .classes
            .iter()
            .map(|c| {
                c.means
                    .get(feature)
                    .map(|&m| (m, c.label.as_str()))
                    .ok_or_else(|| ClassifierError::MissingFeature(feature.to_string()))
            })
            .collect::<Result<_, _>>()?;
        if classes.len() < 2 {
            return Err(ClassifierError::SingleClassData);
        }
        classes.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(b.1)));
        Ok(Self {
            feature: feature.to_string(),
            thresholds: classes.windows(2).map(|w| 0.5 * (w[0].0 + w[1].0)).collect(),
            labels: classes.iter().map(|c| c.1.to_string()).collect(),
        })
    }

    pub fn classify(&self, raw: &RawRecord) -> Result<&str, ClassifierError> {
        let v = *raw
            .get(&self.feature)
            .ok_or_else(|| ClassifierError::MissingFeature(self.feature.clone()))?;
        let k = self.thresholds.iter().take_while(|&&t| v >= t).count();
        Ok(&self.labels[k])
    }

    pub fn accuracy<'a>(
        &self,
        data: impl IntoIterator<Item = (&'a RawRecord, &'a str)>,
    ) -> Result<f64, ClassifierError> {
        let (mut correct, mut total) = (0usize, 0usize);
        for (raw, label) in data {
            total += 1;
            if self.classify(raw)? == label {
                correct += 1;
            }
        }
        if total == 0 {
            return Err(ClassifierError::EmptyDataset);
        }
        Ok(correct as f64 / total as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::FEATURE_NAMES;
    use crate::twin::ClassProfile;

    #[test]
    fn midpoint_thresholds() {
        let profile = |label: &str, w: f64| ClassProfile {
            label: label.into(),
            share: 1.0 / 3.0,
            means: FEATURE_NAMES.iter().map(|f| (f.to_string(), if *f == "weight" { w } else { 0.0 })).collect(),
        };
        let cfg = SensorConfig {
            classes: vec![profile("metal", 3.0), profile("plastic", 0.0), profile("glass", 2.0)],
            feature_std: FEATURE_NAMES.iter().map(|f| (f.to_string(), 1.0)).collect(),
            deposit_probability: 1.0,
            fill_increment_min: 0.0,
            fill_increment_max: 0.0,
            horizon: 1,
            train_fraction: 0.5,
        };
        let rule = RuleClassifier::from_sensor_config(&cfg, "weight").unwrap();
        assert_eq!(rule.thresholds, vec![1.0, 2.5]);
        assert_eq!(rule.labels, vec!["plastic", "glass", "metal"]);
        let rec = |w: f64| RawRecord::from([("weight".to_string(), w)]);
        assert_eq!(rule.classify(&rec(0.99)).unwrap(), "plastic");
        assert_eq!(rule.classify(&rec(1.0)).unwrap(), "glass");
        assert_eq!(rule.classify(&rec(9.0)).unwrap(), "metal");
        let a = rec(0.0);
        let b = rec(2.6);
        assert_eq!(rule.accuracy([(&a, "plastic"), (&b, "glass")]).unwrap(), 0.5);
    }
}
