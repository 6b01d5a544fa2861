//! Streaming use: append points, watch for drift, retrain when allowed.

use std::sync::Arc;

use chrono::{NaiveDateTime, TimeDelta};
use log::{info, warn};
use serde::{Deserialize, Serialize};

use super::combine::CombinedForecast;
use super::model::EnsembleModel;
use crate::data::{StandardizationParams, TimeSeries};
use crate::drift::{DetectorConfig, Detector, DriftEvent, RetrainGuard};
use crate::error::{EnsembleError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OnlineConfig {
    pub detector: DetectorConfig,
    pub min_interval: TimeDelta,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RetrainOutcome {
    Succeeded { rule_count: usize, pool: Vec<String>, discarded: Vec<String> },
    /// The old model stays in service.
    Failed { reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RetrainEvent {
    #[serde(with = "crate::data::timestamp_serde")]
    pub timestamp: NaiveDateTime,
    pub statistic: f64,
    pub history_points: usize,
    #[serde(flatten)]
    pub outcome: RetrainOutcome,
}

impl RetrainEvent {
    pub fn succeeded(&self) -> bool {
        matches!(self.outcome, RetrainOutcome::Succeeded { .. })
    }
}

#[derive(Clone, Debug)]
pub struct StepResult {
    pub drift_events: Vec<DriftEvent>,
    pub retrain: Option<RetrainEvent>,
    pub forecast: CombinedForecast,
}

/// Serving state. The model is an `Arc` snapshot that is swapped whole at
/// retrain, so clones handed out earlier never see a half-built model.
#[derive(Clone, Debug)]
pub struct OnlineEnsemble {
    model: Arc<EnsembleModel>,
    history: TimeSeries,
    detector: Detector,
    detector_name: &'static str,
    guard: RetrainGuard,
    /// Scale used for detector input; fixed at construction so readings stay
    /// comparable across retrains.
    scale: StandardizationParams,
    drift_log: Vec<DriftEvent>,
    retrains: Vec<RetrainEvent>,
}

impl OnlineEnsemble {
    pub fn new(model: EnsembleModel, history: TimeSeries, cfg: &OnlineConfig) -> Result<Self> {
        let detector = cfg.detector.build(cfg.seed)?;
        Ok(OnlineEnsemble {
            scale: model.standardization,
            model: Arc::new(model),
            history,
            detector_name: detector.name(),
            detector,
            guard: RetrainGuard::new(cfg.min_interval)?,
            drift_log: Vec::new(),
            retrains: Vec::new(),
        })
    }

    pub fn model(&self) -> Arc<EnsembleModel> {
        Arc::clone(&self.model)
    }

    pub fn history(&self) -> &TimeSeries {
        &self.history
    }

    pub fn drift_log(&self) -> &[DriftEvent] {
        &self.drift_log
    }

    pub fn retrains(&self) -> &[RetrainEvent] {
        &self.retrains
    }

    pub fn forecast(&self, horizon: usize) -> Result<CombinedForecast> {
        self.model.predict_next(&self.history, horizon)
    }

    /// Appends `points`, feeds each target value to the detector, retrains at
    /// most once if a drift fires while the guard allows it, then forecasts
    /// `horizon` steps past the new end of history.
    pub fn step(&mut self, points: &TimeSeries, horizon: usize) -> Result<StepResult> {
        let start = self.history.len();
        if let Some(expected) = self.history.timestamp_after(1) {
            if points.first_timestamp() != expected {
                return Err(EnsembleError::NonContiguous {
                    expected: crate::data::fmt_timestamp(&expected),
                    got: crate::data::fmt_timestamp(&points.first_timestamp()),
                }
                .into());
            }
        }
        self.history.extend(points)?;

        let mut fired = Vec::new();
        let mut trigger: Option<(NaiveDateTime, f64)> = None;
        for i in start..self.history.len() {
            let z = self.scale.apply(self.history.target()[i]);
            if let Some(signal) = self.detector.update(z) {
                let ts = self.history.timestamps()[i];
                let allowed = trigger.is_none() && self.guard.allows(ts)?;
                if allowed {
                    trigger = Some((ts, signal.statistic));
                }
                fired.push(DriftEvent {
                    timestamp: ts,
                    detector: self.detector_name.to_string(),
                    statistic: signal.statistic,
                    threshold: signal.threshold,
                    retrain_allowed: allowed,
                });
            }
        }
        self.drift_log.extend(fired.iter().cloned());

        let retrain = match trigger {
            Some((ts, statistic)) => {
                self.guard.record(ts);
                Some(self.retrain(ts, statistic))
            }
            None => None,
        };
        let forecast = self.forecast(horizon)?;
        Ok(StepResult {
            drift_events: fired,
            retrain,
            forecast,
        })
    }

    fn retrain(&mut self, timestamp: NaiveDateTime, statistic: f64) -> RetrainEvent {
        let cfg = &self.model.config;
        let window = match cfg.history_cap() {
            Some(cap) => self.history.tail(cap),
            None => self.history.clone(),
        };
        let outcome = match EnsembleModel::train(&window, cfg) {
            Ok(out) => {
                let m = out.model;
                info!(
                    "retrained at {} on {} points: {} rules, pool {:?}",
                    crate::data::fmt_timestamp(&timestamp),
                    window.len(),
                    m.rules.rules.len(),
                    m.pool_ids()
                );
                let outcome = RetrainOutcome::Succeeded {
                    rule_count: m.rules.rules.len(),
                    pool: m.pool_ids(),
                    discarded: m.discarded.clone(),
                };
                self.model = Arc::new(m);
                outcome
            }
            Err(e) => {
                warn!("retrain at {} failed, keeping the previous model: {e}", crate::data::fmt_timestamp(&timestamp));
                RetrainOutcome::Failed { reason: e.to_string() }
            }
        };
        let event = RetrainEvent {
            timestamp,
            statistic,
            history_points: window.len(),
            outcome,
        };
        self.retrains.push(event.clone());
        event
    }
}
