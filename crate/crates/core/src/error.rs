use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("row {row}: cannot parse date {value:?}")]
    BadDate { row: usize, value: String },
    #[error("row {row}, column {column:?}: cannot parse number {value:?}")]
    BadNumber {
        row: usize,
        column: String,
        value: String,
    },
    #[error("row {row}: missing target value")]
    MissingTarget { row: usize },
    #[error("duplicate timestamp {0}")]
    DuplicateTimestamp(String),
    #[error("non-constant step: expected {expected}s between {from} and {to}, found {found}s")]
    IrregularStep {
        from: String,
        to: String,
        expected: i64,
        found: i64,
    },
    #[error("invalid series: {0}")]
    Invalid(String),
    #[error("constant target: standard deviation is zero")]
    ConstantTarget,
    #[error("covariate {0:?} already exists")]
    NameCollision(String),
    #[error("invalid split plan: {0}")]
    SplitPlan(String),
}

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("window has {0} points; at least 2 are required")]
    WindowTooShort(usize),
    #[error("window contains a non-finite value at index {0}")]
    NonFinite(usize),
    #[error("feature matrix needs at least 2 rows, got {0}")]
    TooFewRows(usize),
    #[error("feature matrix is not rectangular or labels do not match rows")]
    Shape,
    #[error(
        "all columns eliminated (input {input}, after null filter {after_null}, after similarity/variance {after_similarity}, after correlation {after_correlation}, after elasticnet 0); a lower reduction.alpha keeps more columns"
    )]
    AllEliminated {
        input: usize,
        after_null: usize,
        after_similarity: usize,
        after_correlation: usize,
    },
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("design matrix has no columns")]
    NoFeatures,
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("dimension mismatch: X has {rows} rows, y has {len}")]
    Dimension { rows: usize, len: usize },
    #[error("non-finite input")]
    NonFinite,
    #[error("labels contain a single class")]
    SingleClass,
    #[error("invalid solver parameter: {0}")]
    Parameter(String),
}

#[derive(Debug, Error)]
pub enum PredictorError {
    #[error("{id}: needs at least {needed} training points, got {got}")]
    InsufficientHistory { id: String, needed: usize, got: usize },
    #[error("{id}: invalid hyperparameter: {reason}")]
    Hyperparameter { id: String, reason: String },
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("{id}: non-finite forecast")]
    NonFinite { id: String },
    #[error("duplicate predictor id {0:?}")]
    DuplicateId(String),
}

#[derive(Debug, Error)]
pub enum RuleFitError {
    #[error("training table has a single class")]
    SingleClass,
    #[error("training table needs at least {needed} rows, got {got}")]
    TooFewRows { needed: usize, got: usize },
    #[error("catalog version mismatch: model uses {model:?}, row uses {row:?}; retrain the model to upgrade it")]
    CatalogMismatch { model: String, row: String },
    #[error("feature columns do not match the model's columns")]
    ColumnMismatch,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Error)]
pub enum DriftError {
    #[error("empty sample")]
    EmptySample,
    #[error("time {now} is earlier than the last retrain at {last}")]
    TimeWentBackwards { now: String, last: String },
    #[error("invalid detector parameter: {0}")]
    Parameter(String),
}

#[derive(Debug, Error)]
pub enum EnsembleError {
    #[error("predictor pool is empty")]
    EmptyPool,
    #[error("discarding would empty the predictor pool (win counts: {0})")]
    PoolExhausted(String),
    #[error("fewer than 2 distinct best-model labels (histogram: {0})")]
    SingleLabel(String),
    #[error("every predictor failed on every window")]
    NoRows,
    #[error("probability ids {probabilities:?} do not match forecast ids {forecasts:?}")]
    IdMismatch {
        probabilities: Vec<String>,
        forecasts: Vec<String>,
    },
    #[error("forecasts have inconsistent lengths")]
    RaggedForecasts,
    #[error("history has {got} points; at least {needed} are required")]
    ShortHistory { needed: usize, got: usize },
    #[error("model incompatible with input: {0}")]
    Incompatible(String),
    #[error("non-contiguous timestamps: expected {expected}, got {got}")]
    NonContiguous { expected: String, got: String },
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("length mismatch: {actual} actual vs {predicted} predicted values")]
    LengthMismatch { actual: usize, predicted: usize },
    #[error("empty input")]
    Empty,
    #[error("actual value at index {index} is too close to zero ({value})")]
    NearZeroActual { index: usize, value: f64 },
    #[error("invalid backtest plan: {0}")]
    Plan(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("data: {0}")]
    Data(#[from] DataError),
    #[error("featurizer: {0}")]
    Feature(#[from] FeatureError),
    #[error("optim: {0}")]
    Solver(#[from] SolverError),
    #[error("predictors: {0}")]
    Predictor(#[from] PredictorError),
    #[error("rulefit: {0}")]
    RuleFit(#[from] RuleFitError),
    #[error("drift: {0}")]
    Drift(#[from] DriftError),
    #[error("ensemble: {0}")]
    Ensemble(#[from] EnsembleError),
    #[error("evaluation: {0}")]
    Eval(#[from] EvalError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures that mean the data cannot support a classifier
    /// (as opposed to bad input or IO).
    pub fn is_training_infeasible(&self) -> bool {
        matches!(
            self,
            Error::Ensemble(
                EnsembleError::SingleLabel(_)
                    | EnsembleError::PoolExhausted(_)
                    | EnsembleError::NoRows
            ) | Error::RuleFit(RuleFitError::SingleClass | RuleFitError::TooFewRows { .. })
                | Error::Feature(FeatureError::AllEliminated { .. })
        )
    }
}
