//! MAPE scoring and blocked (chronological) backtesting of the ensemble
//! against single predictors.

use std::io::Write;
use std::ops::Range;

use chrono::NaiveDateTime;
use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{fmt_timestamp, TimeSeries};
use crate::drift::DriftEvent;
use crate::ensemble::{EnsembleConfig, EnsembleModel, OnlineConfig, OnlineEnsemble, RetrainEvent};
use crate::error::{EvalError, Result};
use crate::predictors::PredictorSpec;
use crate::rulefit::ProbabilityVector;

/// Actual values at or below this magnitude make MAPE undefined.
pub const MAPE_EPSILON: f64 = 1e-8;

/// Mean absolute percentage error, in percent.
pub fn mape(actual: &[f64], predicted: &[f64]) -> Result<f64, EvalError> {
    if actual.len() != predicted.len() {
        return Err(EvalError::LengthMismatch {
            actual: actual.len(),
            predicted: predicted.len(),
        });
    }
    if actual.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut total = 0.0;
    for (index, (a, p)) in actual.iter().zip(predicted).enumerate() {
        if a.abs() <= MAPE_EPSILON {
            return Err(EvalError::NearZeroActual { index, value: *a });
        }
        total += ((a - p) / a).abs();
    }
    Ok(total / actual.len() as f64 * 100.0)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub index: usize,
    /// Training data is `0..forecast.start`.
    pub forecast: Range<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BacktestPlan {
    pub train_fraction: f64,
    pub step: usize,
    pub initial_train: usize,
    pub folds: Vec<Fold>,
}

impl BacktestPlan {
    /// The first `floor(train_fraction·len)` points train the first fold;
    /// forecast ranges of `step` points then tile the rest. A trailing
    /// remainder shorter than `step` is not scored.
    pub fn new(len: usize, train_fraction: f64, step: usize) -> Result<Self, EvalError> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(EvalError::Plan(format!("train_fraction must be in (0,1), got {train_fraction}")));
        }
        if step == 0 {
            return Err(EvalError::Plan("step must be >= 1".into()));
        }
        let initial_train = (train_fraction * len as f64).floor() as usize;
        let folds: Vec<Fold> = (0..)
            .map(|k| initial_train + k * step)
            .take_while(|start| start + step <= len)
            .enumerate()
            .map(|(index, start)| Fold {
                index,
                forecast: start..start + step,
            })
            .collect();
        if folds.len() < 2 || initial_train == 0 {
            return Err(EvalError::Plan(format!(
                "{len} points with train_fraction {train_fraction} and step {step} give {} folds; need at least 2",
                folds.len()
            )));
        }
        Ok(BacktestPlan {
            train_fraction,
            step,
            initial_train,
            folds,
        })
    }
}

/// What to compare.
#[derive(Clone, Debug)]
pub struct Contenders {
    pub ensemble: Option<(EnsembleConfig, OnlineConfig)>,
    pub singles: Vec<PredictorSpec>,
}

pub const ENSEMBLE_NAME: &str = "ensemble";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelScore {
    pub model: String,
    /// Mean over valid folds; `None` when no fold was valid.
    pub mean_mape: Option<f64>,
    /// One entry per fold; `None` marks an invalid fold.
    pub fold_mapes: Vec<Option<f64>>,
    pub invalid_folds: Vec<InvalidFold>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvalidFold {
    pub fold: usize,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldWeights {
    pub fold: usize,
    #[serde(with = "crate::data::timestamp_serde")]
    pub forecast_start: NaiveDateTime,
    pub weights: ProbabilityVector,
    pub forecast: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub points: usize,
    pub train_fraction: f64,
    pub step: usize,
    pub initial_train: usize,
    pub folds: Vec<Fold>,
    pub models: Vec<ModelScore>,
    pub ensemble_weights: Vec<FoldWeights>,
    pub retrains: Vec<RetrainEvent>,
    pub drift_events: Vec<DriftEvent>,
}

impl ScoreReport {
    pub fn model(&self, name: &str) -> Option<&ModelScore> {
        self.models.iter().find(|m| m.model == name)
    }

    /// `model,fold,forecast_start,mape` rows; invalid folds have an empty score.
    pub fn write_csv<W: Write>(&self, series: &TimeSeries, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["model", "fold", "forecast_start", "mape"])?;
        for m in &self.models {
            for (fold, score) in self.folds.iter().zip(&m.fold_mapes) {
                w.write_record([
                    m.model.clone(),
                    fold.index.to_string(),
                    fmt_timestamp(&series.timestamps()[fold.forecast.start]),
                    score.map(|s| s.to_string()).unwrap_or_default(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn summarize(model: String, outcomes: Vec<Result<f64, String>>) -> ModelScore {
    let mut fold_mapes = Vec::with_capacity(outcomes.len());
    let mut invalid_folds = Vec::new();
    for (fold, o) in outcomes.into_iter().enumerate() {
        match o {
            Ok(v) => fold_mapes.push(Some(v)),
            Err(reason) => {
                warn!("{model}: fold {fold} excluded: {reason}");
                invalid_folds.push(InvalidFold { fold, reason });
                fold_mapes.push(None);
            }
        }
    }
    let valid: Vec<f64> = fold_mapes.iter().flatten().copied().collect();
    let mean_mape = (!valid.is_empty()).then(|| valid.iter().sum::<f64>() / valid.len() as f64);
    ModelScore {
        model,
        mean_mape,
        fold_mapes,
        invalid_folds,
    }
}

/// Runs every contender over the plan's folds. Each fold trains only on
/// points before its forecast range. Singles are independent per fold; the
/// ensemble is trained once on the initial region and then stepped forward
/// fold by fold, retraining on drift.
pub fn run_backtest(series: &TimeSeries, plan: &BacktestPlan, contenders: &Contenders) -> Result<ScoreReport> {
    let target = series.target();
    if plan.folds.last().is_some_and(|f| f.forecast.end > series.len()) {
        return Err(EvalError::Plan("plan does not fit the series".into()).into());
    }
    let mut models: Vec<ModelScore> = contenders
        .singles
        .par_iter()
        .map(|spec| {
            let outcomes = plan
                .folds
                .iter()
                .map(|fold| {
                    let actual = &target[fold.forecast.clone()];
                    spec.fit_predict(&target[..fold.forecast.start], actual.len())
                        .map_err(|e| e.to_string())
                        .and_then(|f| mape(actual, &f.values).map_err(|e| e.to_string()))
                })
                .collect();
            summarize(spec.id.clone(), outcomes)
        })
        .collect();

    let mut ensemble_weights = Vec::new();
    let mut retrains = Vec::new();
    let mut drift_events = Vec::new();
    if let Some((cfg, online_cfg)) = &contenders.ensemble {
        let initial = series.slice(0..plan.initial_train)?;
        let model = EnsembleModel::train(&initial, cfg)?.model;
        let mut online = OnlineEnsemble::new(model, initial, online_cfg)?;
        let mut outcomes = Vec::with_capacity(plan.folds.len());
        for (k, fold) in plan.folds.iter().enumerate() {
            let forecast = if k == 0 {
                online.forecast(plan.step)?
            } else {
                let prev = &plan.folds[k - 1].forecast;
                online.step(&series.slice(prev.clone())?, plan.step)?.forecast
            };
            debug_assert_eq!(online.history().len(), fold.forecast.start);
            let actual = &target[fold.forecast.clone()];
            outcomes.push(mape(actual, &forecast.values).map_err(|e| e.to_string()));
            ensemble_weights.push(FoldWeights {
                fold: fold.index,
                forecast_start: series.timestamps()[fold.forecast.start],
                weights: forecast.probabilities.clone(),
                forecast: forecast.values.clone(),
            });
        }
        retrains = online.retrains().to_vec();
        drift_events = online.drift_log().to_vec();
        models.insert(0, summarize(ENSEMBLE_NAME.to_string(), outcomes));
    }

    Ok(ScoreReport {
        points: series.len(),
        train_fraction: plan.train_fraction,
        step: plan.step,
        initial_train: plan.initial_train,
        folds: plan.folds.clone(),
        models,
        ensemble_weights,
        retrains,
        drift_events,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predictors::PredictorKind;
    use chrono::NaiveDate;
    use proptest::prelude::*;

    #[test]
    fn mape_examples() {
        assert_eq!(mape(&[3.0, 4.0], &[3.0, 4.0]).unwrap(), 0.0);
        assert_eq!(mape(&[100.0, 100.0], &[90.0, 110.0]).unwrap(), 10.0);
        assert!(matches!(
            mape(&[0.0, 1.0], &[1.0, 1.0]),
            Err(EvalError::NearZeroActual { index: 0, .. })
        ));
        assert!(matches!(mape(&[1.0], &[]), Err(EvalError::LengthMismatch { .. })));
    }

    proptest! {
        #[test]
        fn mape_is_scale_invariant(
            pairs in prop::collection::vec((1.0f64..100.0, -100.0f64..100.0), 1..20),
            k in prop_oneof![-50.0f64..-0.1, 0.1f64..50.0],
        ) {
            let a: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let p: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            let ka: Vec<f64> = a.iter().map(|v| v * k).collect();
            let kp: Vec<f64> = p.iter().map(|v| v * k).collect();
            let base = mape(&a, &p).unwrap();
            prop_assert!((mape(&ka, &kp).unwrap() - base).abs() <= 1e-9 * base.max(1.0));
        }

        #[test]
        fn folds_never_leak(len in 20usize..400, frac in 0.1f64..0.9, step in 1usize..10) {
            if let Ok(plan) = BacktestPlan::new(len, frac, step) {
                prop_assert_eq!(plan.initial_train, (frac * len as f64).floor() as usize);
                prop_assert_eq!(plan.folds[0].forecast.start, plan.initial_train);
                for w in plan.folds.windows(2) {
                    prop_assert_eq!(w[0].forecast.end, w[1].forecast.start);
                }
                prop_assert!(plan.folds.last().unwrap().forecast.end <= len);
            }
        }
    }

    #[test]
    fn periodic_series_scores_zero_for_seasonal_naive() {
        let pattern = [10.0, 12.0, 15.0, 11.0, 9.0, 13.0, 14.0];
        let values: Vec<f64> = (0..140).map(|t| pattern[t % 7]).collect();
        let series = TimeSeries::daily(NaiveDate::from_ymd_opt(2024, 1, 1).unwrap(), values).unwrap();
        let plan = BacktestPlan::new(series.len(), 0.4, 7).unwrap();
        let singles = vec![
            PredictorSpec::new("seasonal_naive", PredictorKind::SeasonalNaive { season: 7 }),
            PredictorSpec::new("drift", PredictorKind::Drift),
        ];
        let report = run_backtest(&series, &plan, &Contenders { ensemble: None, singles }).unwrap();
        assert_eq!(report.models.len(), 2);
        assert_eq!(report.model("seasonal_naive").unwrap().mean_mape, Some(0.0));
        for m in &report.models {
            assert_eq!(m.fold_mapes.len(), plan.folds.len());
        }
    }

    #[test]
    fn plan_rejects_tiny_series() {
        assert!(BacktestPlan::new(10, 0.4, 7).is_err());
        assert!(BacktestPlan::new(100, 1.0, 7).is_err());
        assert_eq!(BacktestPlan::new(100, 0.4, 7).unwrap().initial_train, 40);
    }
}
