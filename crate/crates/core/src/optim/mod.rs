//! Sparse-regularized linear solvers shared by feature selection and the rule
//! classifier. Both use cyclic coordinate descent in a fixed coordinate order.

mod elastic_net;
mod logistic;

pub use elastic_net::{
    elastic_net_objective, elastic_net_smooth_gradient, fit_elastic_net, kkt_residual,
    ElasticNetSpec,
};
pub use logistic::{fit_l1_logistic, logistic_objective, sigmoid, LogisticSpec};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::SolverError;

/// Result of a penalized linear fit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub iterations_used: usize,
    pub final_objective: f64,
    /// Objective after each full coordinate cycle (outer iteration for the
    /// logistic solver).
    #[serde(default, skip_serializing)]
    pub objective_trace: Vec<f64>,
    pub converged: bool,
}

impl LinearFit {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.intercept + row.iter().zip(&self.weights).map(|(x, w)| x * w).sum::<f64>()
    }
}

/// `sign(z) · max(|z| − γ, 0)`.
pub fn soft_threshold(z: f64, gamma: f64) -> f64 {
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

fn check_inputs(x: &DMatrix<f64>, len: usize) -> Result<(), SolverError> {
    if x.ncols() == 0 {
        return Err(SolverError::NoFeatures);
    }
    if x.nrows() != len {
        return Err(SolverError::Dimension {
            rows: x.nrows(),
            len,
        });
    }
    if x.nrows() < 2 {
        return Err(SolverError::TooFewSamples(x.nrows()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::NonFinite);
    }
    Ok(())
}

/// Column `j` of a column-major matrix as a contiguous slice.
fn column(x: &DMatrix<f64>, j: usize) -> &[f64] {
    let n = x.nrows();
    &x.as_slice()[j * n..(j + 1) * n]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn soft_threshold_cases() {
        assert_eq!(soft_threshold(3.0, 1.0), 2.0);
        assert_eq!(soft_threshold(-3.0, 1.0), -2.0);
        assert_eq!(soft_threshold(0.5, 1.0), 0.0);
        assert_eq!(soft_threshold(-1.0, 1.0), 0.0);
    }
}
