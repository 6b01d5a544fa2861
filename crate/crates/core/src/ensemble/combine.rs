//! Weighted combination of per-predictor forecasts.

use serde::{Deserialize, Serialize};

use crate::error::EnsembleError;
use crate::predictors::Forecast;
use crate::rulefit::ProbabilityVector;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CombinedForecast {
    pub values: Vec<f64>,
    /// Weights actually applied, after any top-k restriction.
    pub probabilities: ProbabilityVector,
    pub forecasts: Vec<Forecast>,
}

/// Keeps the `k` largest weights (earlier entries win ties), zeroes the rest
/// and renormalizes.
pub fn restrict_top_k(y: &ProbabilityVector, k: usize) -> ProbabilityVector {
    if k == 0 || k >= y.values.len() {
        return y.clone();
    }
    let mut order: Vec<usize> = (0..y.values.len()).collect();
    order.sort_by(|&a, &b| y.values[b].total_cmp(&y.values[a]).then(a.cmp(&b)));
    let mut values = vec![0.0; y.values.len()];
    for &i in &order[..k] {
        values[i] = y.values[i];
    }
    let total: f64 = values.iter().sum();
    if total > 0.0 {
        for v in &mut values {
            *v /= total;
        }
    } else {
        // every kept weight was zero; spread evenly over the kept entries
        for &i in &order[..k] {
            values[i] = 1.0 / k as f64;
        }
    }
    ProbabilityVector::new(y.ids.clone(), values)
}

/// `value[h] = Σ_i Y_i · P_i[h]`.
pub fn combine(
    y: &ProbabilityVector,
    forecasts: Vec<Forecast>,
    top_k: Option<usize>,
) -> Result<CombinedForecast, EnsembleError> {
    let ids: Vec<String> = forecasts.iter().map(|f| f.predictor_id.clone()).collect();
    if ids != y.ids {
        return Err(EnsembleError::IdMismatch {
            probabilities: y.ids.clone(),
            forecasts: ids,
        });
    }
    let m = forecasts.first().map_or(0, |f| f.values.len());
    if forecasts.iter().any(|f| f.values.len() != m) {
        return Err(EnsembleError::RaggedForecasts);
    }
    let weights = match top_k {
        Some(k) => restrict_top_k(y, k),
        None => y.clone(),
    };
    let values = (0..m)
        .map(|h| {
            weights
                .values
                .iter()
                .zip(&forecasts)
                .map(|(w, f)| w * f.values[h])
                .sum()
        })
        .collect();
    Ok(CombinedForecast {
        values,
        probabilities: weights,
        forecasts,
    })
}
