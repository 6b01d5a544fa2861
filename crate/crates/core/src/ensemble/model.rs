//! The trained ensemble: reduction choices, rule model and surviving pool.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::combine::{combine, CombinedForecast};
use super::table::{apply_discard_rule, build_training_table, CovariateEncoder, Metric, TableOptions, TrainingTable};
use crate::data::{SplitPlan, StandardizationParams, TimeSeries};
use crate::error::{EnsembleError, Error, Result};
use crate::featurizer::{default_catalog, extract_features, FeatureCatalog, ReductionConfig, ReductionReport};
use crate::predictors::{validate_pool, PredictorSpec};
use crate::rulefit::{fit_rule_model, FeatureRow, LabeledRows, ProbabilityVector, RuleFitConfig, RuleModel};

/// Everything needed to (re)build an ensemble from a series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    /// Points per training window.
    pub n: usize,
    /// Points per labeled horizon.
    pub m: usize,
    pub stride: usize,
    /// Most recent splits to use; all that fit when absent.
    pub requested_splits: Option<usize>,
    pub pool: Vec<PredictorSpec>,
    pub metric: Metric,
    pub top_k: Option<usize>,
    /// Keep at most this many of the most recent training rows.
    pub table_cap: Option<usize>,
    pub reduction: ReductionConfig,
    pub rulefit: RuleFitConfig,
}

impl EnsembleConfig {
    pub fn new(n: usize, m: usize, pool: Vec<PredictorSpec>) -> Self {
        EnsembleConfig {
            n,
            m,
            stride: 1,
            requested_splits: None,
            pool,
            metric: Metric::default(),
            top_k: None,
            table_cap: None,
            reduction: ReductionConfig::default(),
            rulefit: RuleFitConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        validate_pool(&self.pool)?;
        self.rulefit.validate()?;
        self.reduction.validate()?;
        if self.pool.is_empty() {
            return Err(EnsembleError::EmptyPool.into());
        }
        if let Some(spec) = self.pool.iter().find(|p| p.min_history() > self.n) {
            return Err(EnsembleError::Incompatible(format!(
                "predictor {} needs {} points but windows have n = {}",
                spec.id,
                spec.min_history(),
                self.n
            ))
            .into());
        }
        if self.top_k == Some(0) {
            return Err(EnsembleError::Incompatible("top_k must be >= 1".into()).into());
        }
        if self.table_cap.is_some_and(|c| c < crate::rulefit::MIN_TRAINING_ROWS) {
            return Err(EnsembleError::Incompatible(format!(
                "table_cap must be >= {}",
                crate::rulefit::MIN_TRAINING_ROWS
            ))
            .into());
        }
        // Surface bad split parameters before any data is read.
        SplitPlan::new(self.n + self.m, self.n, self.m, self.stride, None)?;
        Ok(())
    }

    /// Points needed so that `table_cap` rows can still be built; `None`
    /// without a cap.
    pub fn history_cap(&self) -> Option<usize> {
        self.table_cap.map(|c| (c - 1) * self.stride + self.n + self.m)
    }
}

pub const MODEL_FORMAT: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelCount {
    pub predictor: String,
    pub count: usize,
}

/// A trained ensemble, immutable once built.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleModel {
    pub format_version: u32,
    pub catalog_version: String,
    pub config: EnsembleConfig,
    /// Predictors that survived the discard rule, in pool order.
    pub pool: Vec<PredictorSpec>,
    pub discarded: Vec<String>,
    pub encoder: CovariateEncoder,
    /// Label counts after the discard rule.
    pub label_histogram: Vec<LabelCount>,
    pub training_rows: usize,
    #[serde(skip)]
    pub rules: RuleModel,
    #[serde(skip)]
    pub reduction: ReductionReport,
    #[serde(skip)]
    pub standardization: StandardizationParams,
}

/// A fitted model together with the table it was trained on.
#[derive(Clone, Debug)]
pub struct TrainOutput {
    pub model: EnsembleModel,
    pub table: TrainingTable,
}

impl EnsembleModel {
    /// Builds the training table over `series`, applies the discard rule and
    /// fits the rule model. The full configured pool is always a candidate.
    pub fn train(series: &TimeSeries, cfg: &EnsembleConfig) -> Result<TrainOutput> {
        Self::train_with_catalog(series, cfg, &default_catalog())
    }

    pub fn train_with_catalog(series: &TimeSeries, cfg: &EnsembleConfig, catalog: &FeatureCatalog) -> Result<TrainOutput> {
        cfg.validate()?;
        let plan = SplitPlan::new(series.len(), cfg.n, cfg.m, cfg.stride, cfg.requested_splits)?;
        let (mut table, reduction, encoder) = build_training_table(
            series,
            &plan,
            &cfg.pool,
            &TableOptions {
                catalog,
                metric: cfg.metric,
                reduction: &cfg.reduction,
                cap: cfg.table_cap,
            },
        )?;
        let outcome = apply_discard_rule(&mut table)?;
        let pool: Vec<PredictorSpec> = cfg
            .pool
            .iter()
            .filter(|p| outcome.surviving.contains(&p.id))
            .cloned()
            .collect();
        let hist: Vec<LabelCount> = table
            .label_histogram()
            .into_iter()
            .filter(|(id, _)| outcome.surviving.contains(id))
            .map(|(predictor, count)| LabelCount { predictor, count })
            .collect();
        if hist.iter().filter(|h| h.count > 0).count() < 2 {
            let text = hist.iter().map(|h| format!("{}={}", h.predictor, h.count)).collect::<Vec<_>>().join(", ");
            return Err(EnsembleError::SingleLabel(text).into());
        }

        let class_ids: Vec<String> = pool.iter().map(|p| p.id.clone()).collect();
        let labels: Vec<usize> = table
            .rows
            .iter()
            .map(|r| class_ids.iter().position(|c| *c == r.best_model).expect("label survives discard"))
            .collect();
        let rows: Vec<Vec<Option<f64>>> = table.rows.iter().map(|r| r.values.clone()).collect();
        let rules = fit_rule_model(
            LabeledRows {
                catalog_version: &catalog.version,
                feature_names: &table.columns,
                rows: &rows,
                labels: &labels,
                class_ids: &class_ids,
            },
            &cfg.rulefit,
        )?;
        let standardization = StandardizationParams::fit(series.target())?;
        let model = EnsembleModel {
            format_version: MODEL_FORMAT,
            catalog_version: catalog.version.clone(),
            config: cfg.clone(),
            pool,
            discarded: outcome.discarded,
            encoder,
            label_histogram: hist,
            training_rows: table.len(),
            rules,
            reduction,
            standardization,
        };
        Ok(TrainOutput { model, table })
    }

    pub fn pool_ids(&self) -> Vec<String> {
        self.pool.iter().map(|p| p.id.clone()).collect()
    }

    /// Feature row for the last `n` points of `history`.
    pub fn feature_row(&self, history: &TimeSeries, catalog: &FeatureCatalog) -> Result<FeatureRow> {
        let n = self.config.n;
        if history.len() < n {
            return Err(EnsembleError::ShortHistory { needed: n, got: history.len() }.into());
        }
        if catalog.version != self.catalog_version {
            return Err(EnsembleError::Incompatible(format!(
                "model was trained with feature catalog {:?} but this build provides {:?}; retrain the model",
                self.catalog_version, catalog.version
            ))
            .into());
        }
        let range = history.len() - n..history.len();
        let window = &history.target()[range.clone()];
        let all = extract_features(window, catalog)?;
        let mut values = Vec::with_capacity(self.rules.feature_names.len());
        for name in &self.reduction.final_columns {
            let idx = catalog
                .entries
                .iter()
                .position(|e| e.name == name)
                .ok_or_else(|| EnsembleError::Incompatible(format!("statistic {name:?} is not in the catalog")))?;
            values.push(all[idx]);
        }
        values.extend(self.encoder.encode(history, range)?);
        Ok(FeatureRow {
            catalog_version: catalog.version.clone(),
            names: self.rules.feature_names.clone(),
            values,
        })
    }

    pub fn probabilities(&self, history: &TimeSeries) -> Result<ProbabilityVector> {
        let row = self.feature_row(history, &default_catalog())?;
        Ok(self.rules.predict_proba(&row)?)
    }

    /// Weights the surviving pool by the rule model and combines their
    /// `horizon`-step forecasts, each fitted on the last `n` points.
    pub fn predict_next(&self, history: &TimeSeries, horizon: usize) -> Result<CombinedForecast> {
        let y = self.probabilities(history)?;
        let window = &history.target()[history.len() - self.config.n..];
        let forecasts = self
            .pool
            .iter()
            .map(|p| p.fit_predict(window, horizon))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(combine(&y, forecasts, self.config.top_k)?)
    }

    /// Writes model.json, rules.json, reduction_report.json and
    /// standardization.json into `dir`, creating it if needed.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let write = |name: &str, json: String| fs::write(dir.join(name), json + "\n");
        write("model.json", serde_json::to_string_pretty(self)?)?;
        write("rules.json", serde_json::to_string_pretty(&self.rules)?)?;
        write("reduction_report.json", serde_json::to_string_pretty(&self.reduction)?)?;
        write("standardization.json", serde_json::to_string_pretty(&self.standardization)?)?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let read = |name: &str| -> Result<String> {
            fs::read_to_string(dir.join(name)).map_err(|e| {
                Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", dir.join(name).display())))
            })
        };
        let mut model: EnsembleModel = serde_json::from_str(&read("model.json")?)?;
        if model.format_version != MODEL_FORMAT {
            return Err(EnsembleError::Incompatible(format!(
                "model format {} is not supported (expected {MODEL_FORMAT})",
                model.format_version
            ))
            .into());
        }
        model.rules = serde_json::from_str(&read("rules.json")?)?;
        model.reduction = serde_json::from_str(&read("reduction_report.json")?)?;
        model.standardization = serde_json::from_str(&read("standardization.json")?)?;
        let ids = model.pool_ids();
        if model.rules.class_ids != ids {
            return Err(EnsembleError::Incompatible("rules.json classes differ from the model pool".into()).into());
        }
        Ok(model)
    }
}
