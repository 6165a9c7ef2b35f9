use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::features::{FeatureVector, NormStats};
use super::ClassifierError;
use crate::diagnostics::Diagnostic;
use crate::rng;

/// Half-width of the uniform weight initialization.
const INIT_SCALE: f64 = 0.01;
/// Slack allowed before an epoch-loss increase is reported.
const LOSS_INCREASE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2_penalty: f64,
    pub rng_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            epochs: 500,
            l2_penalty: 1e-4,
            rng_seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            out.push(Diagnostic::new("classifier.learning_rate", "must be > 0"));
        }
        if self.epochs == 0 {
            out.push(Diagnostic::new("classifier.epochs", "must be >= 1"));
        }
        if !(self.l2_penalty.is_finite() && self.l2_penalty >= 0.0) {
            out.push(Diagnostic::new("classifier.l2_penalty", "must be >= 0"));
        }
        out
    }
}

/// Multinomial logistic regression over normalized features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftmaxModel {
    /// `weights[k]` holds the coefficients of class `k`.
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
    pub class_labels: Vec<String>,
    pub norm_stats: NormStats,
    /// Artifact version; feedback rounds bump it.
    pub version: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub index: usize,
    pub label: String,
    pub probabilities: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub model: SoftmaxModel,
    /// Objective before each update, one entry per epoch.
    pub losses: Vec<f64>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Numerically stable softmax (max-subtracted).
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = logits.iter().map(|z| (z - m).exp()).collect();
    let total: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / total).collect()
}

fn logits(weights: &[Vec<f64>], biases: &[f64], x: &[f64]) -> Vec<f64> {
    weights
        .iter()
        .zip(biases)
        .map(|(w, b)| w.iter().zip(x).map(|(wi, xi)| wi * xi).sum::<f64>() + b)
        .collect()
}

/// Highest probability; ties go to the lowest class index.
fn argmax(p: &[f64]) -> usize {
    let mut best = 0;
    for k in 1..p.len() {
        if p[k] > p[best] {
            best = k;
        }
    }
    best
}

/// Mean cross-entropy plus `l2 · ‖W‖²` and its gradient `(∂W, ∂b)`.
pub fn loss_and_gradient(
    weights: &[Vec<f64>],
    biases: &[f64],
    xs: &[Vec<f64>],
    ys: &[usize],
    l2: f64,
) -> (f64, Vec<Vec<f64>>, Vec<f64>) {
    let classes = weights.len();
    let d = weights.first().map_or(0, Vec::len);
    let n = xs.len() as f64;
    let mut g_w = vec![vec![0.0; d]; classes];
    let mut g_b = vec![0.0; classes];
    let mut loss = 0.0;
    for (x, &y) in xs.iter().zip(ys) {
        let z = logits(weights, biases, x);
        let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let log_total = z.iter().map(|zk| (zk - m).exp()).sum::<f64>().ln() + m;
        loss += log_total - z[y];
        for k in 0..classes {
            let residual = (z[k] - log_total).exp() - if k == y { 1.0 } else { 0.0 };
            g_b[k] += residual;
            for (g, xi) in g_w[k].iter_mut().zip(x) {
                *g += residual * xi;
            }
        }
    }
    loss /= n;
    g_b.iter_mut().for_each(|g| *g /= n);
    let mut penalty = 0.0;
    for (gw, w) in g_w.iter_mut().zip(weights) {
        for (g, wi) in gw.iter_mut().zip(w) {
            *g = *g / n + 2.0 * l2 * wi;
            penalty += wi * wi;
        }
    }
    (loss + l2 * penalty, g_w, g_b)
}

/// Seeded weights in ±0.01 and zero biases.
pub fn initial_parameters(classes: usize, dim: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rng = rng::stream(seed, "softmax-init", 0);
    let w = (0..classes)
        .map(|_| (0..dim).map(|_| INIT_SCALE * (2.0 * rng.random::<f64>() - 1.0)).collect())
        .collect();
    (w, vec![0.0; classes])
}

/// Full-batch gradient descent from explicit starting parameters.
/// `ys[i]` indexes `labels`.
pub fn fit(
    xs: &[Vec<f64>],
    ys: &[usize],
    labels: Vec<String>,
    norm_stats: NormStats,
    init: (Vec<Vec<f64>>, Vec<f64>),
    cfg: &TrainConfig,
) -> Result<TrainReport, ClassifierError> {
    let diags = cfg.validate();
    if !diags.is_empty() {
        return Err(ClassifierError::InvalidConfig(crate::diagnostics::join(&diags)));
    }
    if xs.is_empty() {
        return Err(ClassifierError::EmptyDataset);
    }
    if ys.iter().collect::<BTreeSet<_>>().len() < 2 {
        return Err(ClassifierError::SingleClassData);
    }
    let (mut w, mut b) = init;
    let dim = w.first().map_or(0, Vec::len);
    if let Some(x) = xs.iter().find(|x| x.len() != dim) {
        return Err(ClassifierError::DimensionMismatch { expected: dim, got: x.len() });
    }
    let mut losses: Vec<f64> = Vec::with_capacity(cfg.epochs);
    let mut diagnostics = Vec::new();
    for epoch in 0..cfg.epochs {
        let (loss, g_w, g_b) = loss_and_gradient(&w, &b, xs, ys, cfg.l2_penalty);
        if !loss.is_finite() {
            return Err(ClassifierError::NonFiniteLoss { epoch });
        }
        if let Some(&prev) = losses.last() {
            if loss > prev + LOSS_INCREASE_TOL * prev.abs().max(1.0) && diagnostics.is_empty() {
                diagnostics.push(Diagnostic::new(
                    format!("classifier.epoch[{epoch}]"),
                    format!("loss increased from {prev} to {loss}; learning rate may be too large"),
                ));
            }
        }
        losses.push(loss);
        for (wk, gk) in w.iter_mut().zip(&g_w) {
            for (wi, gi) in wk.iter_mut().zip(gk) {
                *wi -= cfg.learning_rate * gi;
            }
        }
        for (bk, gk) in b.iter_mut().zip(&g_b) {
            *bk -= cfg.learning_rate * gk;
        }
    }
    if w.iter().flatten().chain(&b).any(|v| !v.is_finite()) {
        return Err(ClassifierError::NonFiniteLoss { epoch: cfg.epochs });
    }
    Ok(TrainReport {
        model: SoftmaxModel {
            weights: w,
            biases: b,
            class_labels: labels,
            norm_stats,
            version: 1,
        },
        losses,
        diagnostics,
    })
}

/// Trains on labeled vectors; classes are the distinct labels in sorted order.
pub fn train_classifier(
    data: &[(FeatureVector, String)],
    norm_stats: NormStats,
    cfg: &TrainConfig,
) -> Result<TrainReport, ClassifierError> {
    let labels: Vec<String> = data
        .iter()
        .map(|(_, l)| l.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if data.is_empty() {
        return Err(ClassifierError::EmptyDataset);
    }
    if labels.len() < 2 {
        return Err(ClassifierError::SingleClassData);
    }
    let xs: Vec<Vec<f64>> = data.iter().map(|(x, _)| x.values.clone()).collect();
    let ys: Vec<usize> = data
        .iter()
        .map(|(_, l)| labels.binary_search(l).expect("label collected above"))
        .collect();
    let init = initial_parameters(labels.len(), xs[0].len(), cfg.rng_seed);
    fit(&xs, &ys, labels, norm_stats, init, cfg)
}

pub fn predict(m: &SoftmaxModel, x: &FeatureVector) -> Result<Prediction, ClassifierError> {
    let dim = m.weights.first().map_or(0, Vec::len);
    if x.values.len() != dim {
        return Err(ClassifierError::DimensionMismatch { expected: dim, got: x.values.len() });
    }
    let probabilities = softmax(&logits(&m.weights, &m.biases, &x.values));
    let index = argmax(&probabilities);
    Ok(Prediction {
        index,
        label: m.class_labels[index].clone(),
        probabilities,
    })
}

pub fn evaluate_accuracy(m: &SoftmaxModel, data: &[(FeatureVector, String)]) -> Result<f64, ClassifierError> {
    if data.is_empty() {
        return Err(ClassifierError::EmptyDataset);
    }
    let mut correct = 0usize;
    for (x, label) in data {
        if predict(m, x)?.label == *label {
            correct += 1;
        }
    }
    Ok(correct as f64 / data.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_stats(d: usize) -> NormStats {
        NormStats { mean: vec![0.0; d], std: vec![1.0; d] }
    }

    fn model(weights: Vec<Vec<f64>>, biases: Vec<f64>) -> SoftmaxModel {
        let d = weights[0].len();
        SoftmaxModel {
            class_labels: (0..weights.len()).map(|k| format!("c{k}")).collect(),
            weights,
            biases,
            norm_stats: unit_stats(d),
            version: 1,
        }
    }

    fn fv(v: &[f64]) -> FeatureVector {
        FeatureVector { values: v.to_vec() }
    }

    #[test]
    fn zero_model_is_uniform() {
        let m = model(vec![vec![0.0; 3]; 4], vec![0.0; 4]);
        let p = predict(&m, &fv(&[1.0, -2.0, 3.0])).unwrap();
        assert_eq!(p.probabilities, vec![0.25; 4]);
        assert_eq!(p.index, 0);
    }

    #[test]
    fn closed_form_two_class() {
        let p = softmax(&[3f64.ln(), 0.0]);
        assert!((p[0] - 0.75).abs() < 1e-15 && (p[1] - 0.25).abs() < 1e-15);
        let shifted = softmax(&[3f64.ln() + 700.0, 700.0]);
        assert!((shifted[0] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch() {
        let m = model(vec![vec![0.0; 3]; 2], vec![0.0; 2]);
        assert_eq!(
            predict(&m, &fv(&[1.0])),
            Err(ClassifierError::DimensionMismatch { expected: 3, got: 1 })
        );
    }

    fn separable() -> Vec<(FeatureVector, String)> {
        (0..40)
            .map(|i| {
                let t = i as f64 / 39.0;
                let side = if i % 2 == 0 { 1.0 } else { -1.0 };
                let label = if side > 0.0 { "metal" } else { "glass" };
                (fv(&[side * (0.2 + t), (t * 7.0).sin()]), label.to_string())
            })
            .collect()
    }

    #[test]
    fn separable_data_reaches_full_accuracy() {
        let data = separable();
        let r = train_classifier(&data, unit_stats(2), &TrainConfig::default()).unwrap();
        assert_eq!(evaluate_accuracy(&r.model, &data).unwrap(), 1.0);
        assert!(r.diagnostics.is_empty());
        assert!(r.losses.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn duplicated_samples_give_identical_model() {
        let data = separable();
        let doubled: Vec<_> = data.iter().flat_map(|s| [s.clone(), s.clone()]).collect();
        let a = train_classifier(&data, unit_stats(2), &TrainConfig::default()).unwrap();
        let b = train_classifier(&doubled, unit_stats(2), &TrainConfig::default()).unwrap();
        // Same objective; only summation order differs.
        let params = |m: &SoftmaxModel| m.weights.concat().into_iter().chain(m.biases.clone()).collect::<Vec<_>>();
        for (p, q) in params(&a.model).iter().zip(params(&b.model)) {
            assert!((p - q).abs() <= 1e-12 * p.abs().max(1.0), "{p} vs {q}");
        }
        assert_eq!(a.model.class_labels, b.model.class_labels);
    }

    #[test]
    fn deterministic_and_error_cases() {
        let data = separable();
        let cfg = TrainConfig { rng_seed: 4, ..TrainConfig::default() };
        let a = train_classifier(&data, unit_stats(2), &cfg).unwrap();
        let b = train_classifier(&data, unit_stats(2), &cfg).unwrap();
        assert_eq!(a.model, b.model);

        let one: Vec<_> = data.iter().filter(|(_, l)| l == "metal").cloned().collect();
        assert_eq!(
            train_classifier(&one, unit_stats(2), &cfg).unwrap_err(),
            ClassifierError::SingleClassData
        );
        let huge = TrainConfig { learning_rate: 1e300, ..cfg };
        let wild: Vec<_> = data.iter().map(|(x, l)| (fv(&[x.values[0] * 1e10, 1.0]), l.clone())).collect();
        assert!(matches!(
            train_classifier(&wild, unit_stats(2), &huge),
            Err(ClassifierError::NonFiniteLoss { .. })
        ));
    }

    #[test]
    fn accuracy_arithmetic() {
        let m = model(vec![vec![1.0], vec![-1.0]], vec![0.0, 0.0]);
        let data = vec![
            (fv(&[1.0]), "c0".to_string()),
            (fv(&[2.0]), "c0".to_string()),
            (fv(&[-1.0]), "c1".to_string()),
            (fv(&[-1.0]), "c0".to_string()),
        ];
        assert_eq!(evaluate_accuracy(&m, &data).unwrap(), 0.75);
        assert_eq!(evaluate_accuracy(&m, &[]), Err(ClassifierError::EmptyDataset));
        let only = vec![(fv(&[3.0]), "c0".to_string())];
        assert_eq!(evaluate_accuracy(&m, &only).unwrap(), 1.0);
    }
}
