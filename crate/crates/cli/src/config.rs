//! Run configuration: one JSON file, validated as a whole before any work.

use std::path::{Path, PathBuf};

use chrono::TimeDelta;
use serde::{Deserialize, Serialize};

use rulecast_core::data::{CsvSchema, DatePart};
use rulecast_core::drift::DetectorConfig;
use rulecast_core::ensemble::{EnsembleConfig, Metric, OnlineConfig};
use rulecast_core::predictors::{default_models_db, PredictorSpec};
use rulecast_core::{ReductionConfig, RuleFitConfig};

use crate::error::CliError;

/// Keys and defaults, shown by `--help`.
pub const CONFIG_HELP: &str = "\
CONFIG FILE (JSON; unknown keys are rejected, every key except data.path is optional)
  data.path              CSV file, relative to the config file            (required)
  data.date_column       date/timestamp column                             \"date\"
  data.target_column     target column                                     \"value\"
  data.numeric           numeric covariate columns                         []
  data.categorical       categorical covariate columns                     []
  data.step              expected interval, e.g. \"1d\", \"6h\"               inferred
  data.date_parts        calendar covariates: day|month|year|weekday       []
  n                      points per training window                        28
  m                      points per labeled horizon                        7
  stride                 offset between consecutive windows                1
  requested_splits       use only the most recent k windows                all
  season_length          seasonal period of the default pool               7
  pool                   predictor specs [{id, kind, ...}]                 six defaults
  metric                 MSE | MAE | MAPE                                  MSE
  top_k                  keep only the k largest weights                   all
  table_cap              keep only the most recent rows                    none
  reduction.{null_frac, similarity, similarity_variance_tol,
    similarity_min_r, corr, alpha, l1_ratio, selection_eps}                0.5, 0.95, 0.05, 0.999, 0.95, 0.9, 0.7, 1e-8
  rulefit.{n_trees, max_depth, learning_rate, subsample,
    min_samples_leaf, c, include_linear_terms, max_iters, tol}             100, 3, 0.1, 0.75, 10, 30, false, 100, 1e-6
  drift.detector         kswin | adwin                                     kswin
  drift.window_size      KSWIN window W                                    100
  drift.sample_size      KSWIN sample r                                    30
  drift.alpha            KSWIN significance                                0.005
  drift.delta            ADWIN confidence                                  0.002
  drift.min_interval_steps  retrain guard, in sampling intervals           14
  backtest.train_fraction   share of points before the first fold          0.4
  backtest.step          points per fold                                   7
  seed                   seeds boosting and detector sampling              42
  workers                parallel workers                                  logical cores
  output_dir             where every output file is written                \"rulecast-out\"
";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub path: PathBuf,
    #[serde(default = "default_date_column")]
    pub date_column: String,
    #[serde(default = "default_target_column")]
    pub target_column: String,
    #[serde(default)]
    pub numeric: Vec<String>,
    #[serde(default)]
    pub categorical: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<String>,
    #[serde(default)]
    pub date_parts: Vec<DatePart>,
}

fn default_date_column() -> String {
    "date".into()
}

fn default_target_column() -> String {
    "value".into()
}

impl DataConfig {
    pub fn schema(&self) -> CsvSchema {
        CsvSchema {
            date_column: self.date_column.clone(),
            target_column: self.target_column.clone(),
            numeric: self.numeric.clone(),
            categorical: self.categorical.clone(),
            step: self.step.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorKind {
    Kswin,
    Adwin,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DriftSettings {
    pub detector: DetectorKind,
    pub window_size: usize,
    pub sample_size: usize,
    pub alpha: f64,
    pub delta: f64,
    pub min_interval_steps: u32,
}

impl Default for DriftSettings {
    fn default() -> Self {
        DriftSettings {
            detector: DetectorKind::Kswin,
            window_size: 100,
            sample_size: 30,
            alpha: 0.005,
            delta: 0.002,
            min_interval_steps: 14,
        }
    }
}

impl DriftSettings {
    pub fn detector_config(&self) -> DetectorConfig {
        match self.detector {
            DetectorKind::Kswin => DetectorConfig::Kswin {
                window_size: self.window_size,
                sample_size: self.sample_size,
                alpha: self.alpha,
            },
            DetectorKind::Adwin => DetectorConfig::Adwin { delta: self.delta },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BacktestSettings {
    pub train_fraction: f64,
    pub step: usize,
}

impl Default for BacktestSettings {
    fn default() -> Self {
        BacktestSettings {
            train_fraction: 0.4,
            step: 7,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataConfig,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default = "default_stride")]
    pub stride: usize,
    #[serde(default)]
    pub requested_splits: Option<usize>,
    #[serde(default = "default_season")]
    pub season_length: usize,
    /// Falls back to the six reference predictors at `season_length`.
    #[serde(default)]
    pub pool: Option<Vec<PredictorSpec>>,
    #[serde(default)]
    pub metric: Metric,
    #[serde(default)]
    pub top_k: Option<usize>,
    #[serde(default)]
    pub table_cap: Option<usize>,
    #[serde(default)]
    pub reduction: ReductionConfig,
    #[serde(default)]
    pub rulefit: RuleFitConfig,
    #[serde(default)]
    pub drift: DriftSettings,
    #[serde(default)]
    pub backtest: BacktestSettings,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_n() -> usize {
    28
}
fn default_m() -> usize {
    7
}
fn default_stride() -> usize {
    1
}
fn default_season() -> usize {
    7
}
fn default_seed() -> u64 {
    42
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("rulecast-out")
}

/// Command-line values that replace config entries.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub data: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
}

impl RunConfig {
    /// Parses the file and resolves a relative `data.path` against the
    /// config file's directory. Does not validate.
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if cfg.data.path.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.data.path = dir.join(&cfg.data.path);
            }
        }
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(p) = &o.data {
            self.data.path = p.clone();
        }
        if let Some(d) = &o.output_dir {
            self.output_dir = d.clone();
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(w) = o.workers {
            self.workers = Some(w);
        }
    }

    pub fn pool(&self) -> Vec<PredictorSpec> {
        self.pool.clone().unwrap_or_else(|| default_models_db(self.season_length))
    }

    /// The top-level seed replaces `rulefit.seed`.
    pub fn ensemble_config(&self) -> EnsembleConfig {
        EnsembleConfig {
            n: self.n,
            m: self.m,
            stride: self.stride,
            requested_splits: self.requested_splits,
            pool: self.pool(),
            metric: self.metric,
            top_k: self.top_k,
            table_cap: self.table_cap,
            reduction: self.reduction.clone(),
            rulefit: RuleFitConfig {
                seed: self.seed,
                ..self.rulefit.clone()
            },
        }
    }

    /// `interval` is the series' sampling step.
    pub fn online_config(&self, interval: TimeDelta) -> OnlineConfig {
        OnlineConfig {
            detector: self.drift.detector_config(),
            min_interval: interval * self.drift.min_interval_steps as i32,
            seed: self.seed,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.data.path.as_os_str().is_empty() {
            return bad("data.path is empty".into());
        }
        if self.season_length < 1 {
            return bad("season_length must be >= 1".into());
        }
        self.ensemble_config()
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        self.drift
            .detector_config()
            .validate()
            .map_err(|e| CliError::Config(format!("drift: {e}")))?;
        let f = self.backtest.train_fraction;
        if !(f > 0.0 && f < 1.0) {
            return bad(format!("backtest.train_fraction = {f}; must be in (0, 1)"));
        }
        if self.backtest.step < 1 {
            return bad("backtest.step must be >= 1".into());
        }
        if self.workers == Some(0) {
            return bad("workers must be >= 1".into());
        }
        if self.output_dir.as_os_str().is_empty() {
            return bad("output_dir is empty".into());
        }
        Ok(())
    }
}
