use serde::{Deserialize, Serialize};

use super::districts::partition_districts;
use super::run::{district_seed, model_accuracy, split_events, train_on, ModelArtifacts};
use super::PipelineError;
use crate::diagnostics::Diagnostic;
use crate::rng;
use crate::routing::{continue_training, RLConfig};
use crate::scenario::ScenarioSpec;
use crate::twin::{simulate_bins, simulate_bins_seeded};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackOutcome {
    pub artifacts: ModelArtifacts,
    pub new_events: usize,
    /// Held-out accuracy of the prior classifier and of the one kept.
    pub accuracy_before: Option<f64>,
    pub accuracy_after: Option<f64>,
    /// Held-out accuracy of the retrained candidate, adopted or not.
    pub candidate_accuracy: Option<f64>,
    pub classifier_adopted: bool,
    pub diagnostics: Vec<Diagnostic>,
}

/// One feedback round: retrain the classifier from scratch on the original
/// training split plus freshly simulated events, and continue Q-learning on
/// every district table for `settings.feedback.extra_episodes` greedy-leaning
/// episodes (ε fixed at `epsilon_end`). The held-out split never changes.
///
/// A retrained classifier that scores below the prior one on the held-out
/// split is reported and discarded; the prior model is kept under the new
/// version number.
pub fn feedback_update(
    s: &ScenarioSpec,
    seed_override: Option<u64>,
    prior: &ModelArtifacts,
) -> Result<FeedbackOutcome, PipelineError> {
    let seed = seed_override.unwrap_or(s.rng_seed);
    let mut spec = s.clone();
    spec.rng_seed = seed;
    let s = &spec;
    let version = prior.version + 1;
    let mut artifacts = prior.clone();
    artifacts.version = version;
    let mut diagnostics = Vec::new();
    let (mut before, mut after, mut candidate, mut new_events) = (None, None, None, 0);
    let mut adopted = false;

    if let Some(cfg) = &s.sensors {
        let old = prior
            .classifier
            .as_ref()
            .ok_or_else(|| PipelineError::MissingArtifacts("classifier model".into()))?;
        let stream = simulate_bins(s, cfg.horizon).map_err(|e| PipelineError::stage("preprocess", e))?;
        let splits = split_events(s, &stream);
        let fresh = simulate_bins_seeded(
            s,
            s.settings.feedback.new_event_horizon,
            rng::derive_seed(seed, "feedback", u64::from(prior.version)),
        )
        .map_err(|e| PipelineError::stage("preprocess", e))?;
        new_events = fresh.events.len();
        let mut train = splits.train.clone();
        train.extend(fresh.events.iter());

        let (mut model, train_diags) = train_on(s, seed, &train)?;
        diagnostics.extend(train_diags);
        model.version = version;
        let acc_before = model_accuracy(old, &splits.test)?;
        let acc_new = model_accuracy(&model, &splits.test)?;
        before = Some(acc_before);
        candidate = Some(acc_new);
        if acc_new < acc_before {
            diagnostics.push(Diagnostic::new(
                "feedback.classification_accuracy",
                format!("retrained accuracy {acc_new} is below {acc_before}; keeping the prior classifier"),
            ));
            let mut kept = old.clone();
            kept.version = version;
            artifacts.classifier = Some(kept);
            after = Some(acc_before);
        } else {
            artifacts.classifier = Some(model);
            after = Some(acc_new);
            adopted = true;
        }
    }

    if let Some(g) = &s.collection_graph {
        let districts = partition_districts(g, s.settings.district_max_bins);
        if prior.qtables.len() != districts.len() {
            return Err(PipelineError::MissingArtifacts(format!(
                "expected {} route tables, found {}",
                districts.len(),
                prior.qtables.len()
            )));
        }
        let extra = s.settings.feedback.extra_episodes;
        if extra > 0 {
            for (k, (d, q)) in districts.iter().zip(artifacts.qtables.iter_mut()).enumerate() {
                let cfg = RLConfig {
                    episodes: extra,
                    epsilon_start: s.settings.rl.epsilon_end,
                    rng_seed: rng::derive_seed(district_seed(seed, k), "feedback", u64::from(prior.version)),
                    ..s.settings.rl
                };
                continue_training(q, d, &cfg).map_err(|e| PipelineError::stage("route", e))?;
            }
        }
    }

    Ok(FeedbackOutcome {
        artifacts,
        new_events,
        accuracy_before: before,
        accuracy_after: after,
        candidate_accuracy: candidate,
        classifier_adopted: adopted,
        diagnostics,
    })
}
