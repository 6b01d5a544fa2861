//! Interpretable ensemble forecasting.
//!
//! Each historical window is labeled with the base predictor that forecast
//! it best. A rule-based classifier learns to map window statistics and
//! aggregated covariates to per-predictor weights, and new forecasts are the
//! weighted sum of the pool's forecasts. A KS-window drift detector triggers
//! retraining, throttled by a minimum interval.

pub mod data;
pub mod drift;
pub mod ensemble;
pub mod error;
pub mod evaluation;
pub mod featurizer;
pub mod optim;
pub mod predictors;
pub mod rulefit;
pub mod synthetic;

pub use data::{
    ingest_csv, plan_splits, standardize, Aggregation, Covariate, CovariateValues, CsvSchema,
    DatePart, SplitPlan, StandardizationParams, TimeSeries, WindowSplit,
};
pub use drift::{ks_statistic, DetectorConfig, DriftEvent, Kswin, RetrainGuard};
pub use ensemble::{
    combine, CombinedForecast, EnsembleConfig, EnsembleModel, Metric, OnlineConfig,
    OnlineEnsemble, RetrainEvent, TrainingTable,
};
pub use error::{Error, Result};
pub use evaluation::{mape, run_backtest, BacktestPlan, Contenders, ScoreReport};
pub use featurizer::{default_catalog, FeatureMatrix, ReductionConfig, ReductionReport};
pub use predictors::{default_models_db, Forecast, PredictorKind, PredictorSpec};
pub use rulefit::{ProbabilityVector, RuleFitConfig, RuleModel};
