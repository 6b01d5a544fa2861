//! The models database: a uniform predictor contract and native reference
//! predictors with deliberately different inductive biases.

use std::collections::HashSet;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::PredictorError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PredictorKind {
    /// Repeats the last observed season.
    SeasonalNaive { season: usize },
    /// Extends the line through the first and last training points.
    Drift,
    /// Simple exponential smoothing; flat forecast at the final level.
    Ses { alpha: f64 },
    /// Additive trend and additive seasonality.
    HoltWinters {
        season: usize,
        alpha: f64,
        beta: f64,
        gamma: f64,
    },
    /// AR(p) with intercept, fitted by least squares.
    ArOls { order: usize },
    /// AR on lags 1..=p plus the seasonal lag.
    SeasonalAr { order: usize, season: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictorSpec {
    pub id: String,
    #[serde(flatten)]
    pub kind: PredictorKind,
}

/// A predictor's m-step forecast. `fallback` records a substitution such as an
/// AR model falling back to drift on a singular system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Forecast {
    pub predictor_id: String,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fallback: Option<String>,
}

impl PredictorSpec {
    pub fn new(id: impl Into<String>, kind: PredictorKind) -> Self {
        PredictorSpec {
            id: id.into(),
            kind,
        }
    }

    pub fn validate(&self) -> Result<(), PredictorError> {
        let bad = |reason: &str| {
            Err(PredictorError::Hyperparameter {
                id: self.id.clone(),
                reason: reason.to_string(),
            })
        };
        let smoothing_ok = |v: f64| v > 0.0 && v <= 1.0;
        match self.kind {
            PredictorKind::SeasonalNaive { season } if season < 1 => bad("season must be >= 1"),
            PredictorKind::Ses { alpha } if !smoothing_ok(alpha) => bad("alpha must be in (0, 1]"),
            PredictorKind::HoltWinters { season, alpha, beta, gamma } => {
                if season < 1 {
                    bad("season must be >= 1")
                } else if ![alpha, beta, gamma].into_iter().all(smoothing_ok) {
                    bad("smoothing parameters must be in (0, 1]")
                } else {
                    Ok(())
                }
            }
            PredictorKind::ArOls { order } if order < 1 => bad("order must be >= 1"),
            PredictorKind::SeasonalAr { order, season } if order < 1 || season < 1 => {
                bad("order and season must be >= 1")
            }
            _ => Ok(()),
        }
    }

    /// Fewest training points the kind accepts.
    pub fn min_history(&self) -> usize {
        match self.kind {
            PredictorKind::SeasonalNaive { season } => season + 1,
            PredictorKind::Drift => 2,
            PredictorKind::Ses { .. } => 1,
            PredictorKind::HoltWinters { season, .. } => 2 * season,
            PredictorKind::ArOls { order } => order + 1,
            PredictorKind::SeasonalAr { order, season } => order.max(season) + 1,
        }
    }

    /// Fits on `train` and forecasts `horizon` steps. Pure and deterministic.
    pub fn fit_predict(&self, train: &[f64], horizon: usize) -> Result<Forecast, PredictorError> {
        self.validate()?;
        if horizon == 0 {
            return Err(PredictorError::ZeroHorizon);
        }
        let needed = self.min_history();
        if train.len() < needed {
            return Err(PredictorError::InsufficientHistory {
                id: self.id.clone(),
                needed,
                got: train.len(),
            });
        }
        if train.iter().any(|v| !v.is_finite()) {
            return Err(PredictorError::NonFinite { id: self.id.clone() });
        }
        let mut fallback = None;
        let values = match self.kind {
            PredictorKind::SeasonalNaive { season } => seasonal_naive(train, season, horizon),
            PredictorKind::Drift => drift(train, horizon),
            PredictorKind::Ses { alpha } => vec![ses_level(train, alpha); horizon],
            PredictorKind::HoltWinters { season, alpha, beta, gamma } => {
                holt_winters(train, season, alpha, beta, gamma, horizon)
            }
            PredictorKind::ArOls { order } => {
                let lags: Vec<usize> = (1..=order).collect();
                autoregressive(train, &lags, horizon).unwrap_or_else(|| {
                    fallback = Some("drift".to_string());
                    drift(train, horizon)
                })
            }
            PredictorKind::SeasonalAr { order, season } => {
                let mut lags: Vec<usize> = (1..=order).collect();
                if !lags.contains(&season) {
                    lags.push(season);
                }
                autoregressive(train, &lags, horizon).unwrap_or_else(|| {
                    fallback = Some("drift".to_string());
                    drift(train, horizon)
                })
            }
        };
        if values.iter().any(|v| !v.is_finite()) {
            return Err(PredictorError::NonFinite { id: self.id.clone() });
        }
        Ok(Forecast {
            predictor_id: self.id.clone(),
            values,
            fallback,
        })
    }
}

/// Default smoothing for Holt-Winters (level, trend, season).
pub const HOLT_WINTERS_DEFAULTS: (f64, f64, f64) = (0.2, 0.1, 0.1);

/// Six reference predictors; `season` is the seasonal period in steps.
pub fn default_models_db(season: usize) -> Vec<PredictorSpec> {
    let (alpha, beta, gamma) = HOLT_WINTERS_DEFAULTS;
    vec![
        PredictorSpec::new("seasonal_naive", PredictorKind::SeasonalNaive { season }),
        PredictorSpec::new("drift", PredictorKind::Drift),
        PredictorSpec::new("ses", PredictorKind::Ses { alpha: 0.3 }),
        PredictorSpec::new(
            "holt_winters",
            PredictorKind::HoltWinters { season, alpha, beta, gamma },
        ),
        PredictorSpec::new("ar_ols", PredictorKind::ArOls { order: 7 }),
        PredictorSpec::new("seasonal_ar", PredictorKind::SeasonalAr { order: 2, season }),
    ]
}

/// Checks every spec and that ids are unique.
pub fn validate_pool(pool: &[PredictorSpec]) -> Result<(), PredictorError> {
    let mut seen = HashSet::new();
    for spec in pool {
        spec.validate()?;
        if !seen.insert(spec.id.as_str()) {
            return Err(PredictorError::DuplicateId(spec.id.clone()));
        }
    }
    Ok(())
}

fn seasonal_naive(train: &[f64], s: usize, horizon: usize) -> Vec<f64> {
    let n = train.len();
    (1..=horizon).map(|h| train[n - s + (h - 1) % s]).collect()
}

fn drift(train: &[f64], horizon: usize) -> Vec<f64> {
    let n = train.len();
    let last = train[n - 1];
    let slope = (last - train[0]) / (n - 1) as f64;
    (1..=horizon).map(|h| last + h as f64 * slope).collect()
}

fn ses_level(train: &[f64], alpha: f64) -> f64 {
    train[1..]
        .iter()
        .fold(train[0], |level, x| alpha * x + (1.0 - alpha) * level)
}

/// Level starts at the first season's mean, trend at the mean seasonal
/// difference across the first two seasons divided by the period, and
/// seasonal indices at the first season's deviations from its mean.
/// Initial state as of the end of the first season: the first-season mean is
/// the level at its midpoint, so it is moved forward by the trend, and the
/// seasonal offsets are measured against the de-trended line.
fn holt_winters_init(train: &[f64], s: usize) -> (f64, f64, Vec<f64>) {
    let sf = s as f64;
    let mean = train[..s].iter().sum::<f64>() / sf;
    let trend = (0..s).map(|i| train[s + i] - train[i]).sum::<f64>() / (sf * sf);
    let mid = (sf - 1.0) / 2.0;
    let seasonal = train[..s]
        .iter()
        .enumerate()
        .map(|(i, x)| x - (mean + trend * (i as f64 - mid)))
        .collect();
    (mean + trend * mid, trend, seasonal)
}

fn holt_winters(
    train: &[f64],
    s: usize,
    alpha: f64,
    beta: f64,
    gamma: f64,
    horizon: usize,
) -> Vec<f64> {
    let n = train.len();
    let (mut level, mut trend, mut seasonal) = holt_winters_init(train, s);
    for (t, x) in train.iter().enumerate().skip(s) {
        let idx = t % s;
        let prev_level = level;
        level = alpha * (x - seasonal[idx]) + (1.0 - alpha) * (level + trend);
        trend = beta * (level - prev_level) + (1.0 - beta) * trend;
        seasonal[idx] = gamma * (x - level) + (1.0 - gamma) * seasonal[idx];
    }
    (1..=horizon)
        .map(|h| level + h as f64 * trend + seasonal[(n + h - 1) % s])
        .collect()
}

/// In-sample one-step squared error of Holt-Winters, for tuning.
fn holt_winters_sse(train: &[f64], s: usize, alpha: f64, beta: f64, gamma: f64) -> f64 {
    let (mut level, mut trend, mut seasonal) = holt_winters_init(train, s);
    let mut sse = 0.0;
    for (t, x) in train.iter().enumerate().skip(s) {
        let idx = t % s;
        sse += (x - (level + trend + seasonal[idx])).powi(2);
        let prev_level = level;
        level = alpha * (x - seasonal[idx]) + (1.0 - alpha) * (level + trend);
        trend = beta * (level - prev_level) + (1.0 - beta) * trend;
        seasonal[idx] = gamma * (x - level) + (1.0 - gamma) * seasonal[idx];
    }
    sse
}

/// Picks the (alpha, beta, gamma) from `grid` with the lowest in-sample
/// one-step squared error; ties keep the earliest combination.
pub fn tune_holt_winters(train: &[f64], season: usize, grid: &[f64]) -> Option<(f64, f64, f64)> {
    if season == 0 || train.len() < 2 * season {
        return None;
    }
    let mut best: Option<((f64, f64, f64), f64)> = None;
    for &a in grid {
        for &b in grid {
            for &g in grid {
                let sse = holt_winters_sse(train, season, a, b, g);
                if best.is_none_or(|(_, e)| sse < e) {
                    best = Some(((a, b, g), sse));
                }
            }
        }
    }
    best.map(|(p, _)| p)
}

/// Least-squares AR on the given lags with an intercept, iterated forward.
/// `None` when the system is underdetermined or numerically singular.
fn autoregressive(train: &[f64], lags: &[usize], horizon: usize) -> Option<Vec<f64>> {
    let max_lag = *lags.iter().max()?;
    let n = train.len();
    let rows = n.checked_sub(max_lag)?;
    let cols = lags.len() + 1;
    if rows < cols {
        return None;
    }
    let design = DMatrix::from_fn(rows, cols, |r, c| {
        let t = r + max_lag;
        if c == 0 {
            1.0
        } else {
            train[t - lags[c - 1]]
        }
    });
    let target = DVector::from_fn(rows, |r, _| train[r + max_lag]);
    let svd = design.svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.max();
    if !(smax > 0.0) || sv.min() <= smax * 1e-10 {
        return None;
    }
    let coef = svd.solve(&target, 0.0).ok()?;
    let mut hist = train.to_vec();
    for _ in 0..horizon {
        let t = hist.len();
        let next = coef[0]
            + lags
                .iter()
                .enumerate()
                .map(|(k, lag)| coef[k + 1] * hist[t - lag])
                .sum::<f64>();
        hist.push(next);
    }
    let out = hist.split_off(n);
    out.iter().all(|v| v.is_finite()).then_some(out)
}

/// AR coefficients (intercept first) for inspection and tests.
pub fn ar_coefficients(train: &[f64], order: usize) -> Option<Vec<f64>> {
    let lags: Vec<usize> = (1..=order).collect();
    let n = train.len();
    let rows = n.checked_sub(order)?;
    if rows < order + 1 {
        return None;
    }
    let design = DMatrix::from_fn(rows, order + 1, |r, c| {
        if c == 0 {
            1.0
        } else {
            train[r + order - lags[c - 1]]
        }
    });
    let target = DVector::from_fn(rows, |r, _| train[r + order]);
    let svd = design.svd(true, true);
    let coef = svd.solve(&target, 0.0).ok()?;
    Some(coef.iter().copied().collect())
}
