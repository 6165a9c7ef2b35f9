//! Waste classification: feature normalization, softmax regression and the
//! single-feature rule used by baseline runs.

mod features;
mod rule;
mod softmax;

use thiserror::Error;

pub use features::{featurize, unnormalize, FeatureVector, NormStats, RawRecord, FEATURE_NAMES};
pub use rule::RuleClassifier;
pub use softmax::{
    evaluate_accuracy, fit, initial_parameters, loss_and_gradient, predict, softmax, train_classifier, Prediction,
    SoftmaxModel, TrainConfig, TrainReport,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifierError {
    #[error("sensor record lacks feature `{0}`")]
    MissingFeature(String),
    #[error("feature `{0}` has zero variance")]
    ZeroVariance(String),
    #[error("training data holds fewer than two classes")]
    SingleClassData,
    #[error("loss diverged at epoch {epoch}; lower the learning rate")]
    NonFiniteLoss { epoch: usize },
    #[error("expected {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
}
