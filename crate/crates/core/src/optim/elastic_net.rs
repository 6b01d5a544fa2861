use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{check_inputs, column, soft_threshold, LinearFit};
use crate::error::SolverError;

/// Parameters of
///
/// ```text
/// L(w) = 1/(2n) ‖y − b − Xw‖² + α·ρ·‖w‖₁ + α(1−ρ)/2 · ‖w‖²
/// ```
///
/// The intercept `b` is unpenalized and handled by centering.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElasticNetSpec {
    pub alpha: f64,
    pub l1_ratio: f64,
    pub max_iters: usize,
    pub tol: f64,
    /// Scale columns to unit variance before solving and map the weights back.
    /// Leave off when the caller already standardized X.
    #[serde(default)]
    pub standardize: bool,
}

impl Default for ElasticNetSpec {
    fn default() -> Self {
        ElasticNetSpec {
            alpha: 0.9,
            l1_ratio: 0.7,
            max_iters: 10_000,
            tol: 1e-6,
            standardize: false,
        }
    }
}

impl ElasticNetSpec {
    pub fn new(alpha: f64, l1_ratio: f64) -> Self {
        ElasticNetSpec {
            alpha,
            l1_ratio,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(SolverError::Parameter(format!("alpha = {}", self.alpha)));
        }
        if !(0.0..=1.0).contains(&self.l1_ratio) {
            return Err(SolverError::Parameter(format!("l1_ratio = {}", self.l1_ratio)));
        }
        if !(self.tol > 0.0) {
            return Err(SolverError::Parameter(format!("tol = {}", self.tol)));
        }
        if self.max_iters == 0 {
            return Err(SolverError::Parameter("max_iters = 0".into()));
        }
        Ok(())
    }

    fn l1(&self) -> f64 {
        self.alpha * self.l1_ratio
    }

    fn l2(&self) -> f64 {
        self.alpha * (1.0 - self.l1_ratio)
    }
}

pub fn elastic_net_objective(
    x: &DMatrix<f64>,
    y: &[f64],
    weights: &[f64],
    intercept: f64,
    spec: &ElasticNetSpec,
) -> f64 {
    let n = y.len() as f64;
    let rss: f64 = residuals(x, y, weights, intercept).iter().map(|r| r * r).sum();
    let l1: f64 = weights.iter().map(|w| w.abs()).sum();
    let l2: f64 = weights.iter().map(|w| w * w).sum();
    rss / (2.0 * n) + spec.l1() * l1 + spec.l2() / 2.0 * l2
}

/// Gradient of the differentiable part (data term plus ridge term) with
/// respect to the weights, at a fixed intercept.
pub fn elastic_net_smooth_gradient(
    x: &DMatrix<f64>,
    y: &[f64],
    weights: &[f64],
    intercept: f64,
    spec: &ElasticNetSpec,
) -> Vec<f64> {
    let n = y.len() as f64;
    let r = residuals(x, y, weights, intercept);
    (0..x.ncols())
        .map(|j| {
            let dot: f64 = column(x, j).iter().zip(&r).map(|(a, b)| a * b).sum();
            -dot / n + spec.l2() * weights[j]
        })
        .collect()
}

/// Largest violation of the optimality conditions:
/// `|g_j| − αρ` (positive part) for zero weights and `|g_j + αρ·sign(w_j)|`
/// otherwise, where `g` is the smooth gradient.
pub fn kkt_residual(
    x: &DMatrix<f64>,
    y: &[f64],
    weights: &[f64],
    intercept: f64,
    spec: &ElasticNetSpec,
) -> f64 {
    let g = elastic_net_smooth_gradient(x, y, weights, intercept, spec);
    g.iter()
        .zip(weights)
        .map(|(g, w)| {
            if *w == 0.0 {
                (g.abs() - spec.l1()).max(0.0)
            } else {
                (g + spec.l1() * w.signum()).abs()
            }
        })
        .fold(0.0, f64::max)
}

fn residuals(x: &DMatrix<f64>, y: &[f64], weights: &[f64], intercept: f64) -> Vec<f64> {
    let mut r: Vec<f64> = y.iter().map(|v| v - intercept).collect();
    for (j, w) in weights.iter().enumerate() {
        if *w != 0.0 {
            for (ri, xi) in r.iter_mut().zip(column(x, j)) {
                *ri -= w * xi;
            }
        }
    }
    r
}

/// Cyclic coordinate descent. Stops once a full cycle moves no coordinate by
/// `tol` or more and the KKT residual is within `tol`, or after `max_iters`
/// cycles.
pub fn fit_elastic_net(
    x: &DMatrix<f64>,
    y: &[f64],
    spec: &ElasticNetSpec,
) -> Result<LinearFit, SolverError> {
    spec.validate()?;
    check_inputs(x, y.len())?;
    if y.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::NonFinite);
    }
    let n = x.nrows();
    let p = x.ncols();
    let nf = n as f64;

    let y_mean = y.iter().sum::<f64>() / nf;
    let yc: Vec<f64> = y.iter().map(|v| v - y_mean).collect();
    let mut means = vec![0.0; p];
    let mut scales = vec![1.0; p];
    let mut xc = x.clone();
    for j in 0..p {
        let col = &mut xc.as_mut_slice()[j * n..(j + 1) * n];
        let m = col.iter().sum::<f64>() / nf;
        col.iter_mut().for_each(|v| *v -= m);
        means[j] = m;
        if spec.standardize {
            let s = (col.iter().map(|v| v * v).sum::<f64>() / nf).sqrt();
            if s > 0.0 {
                col.iter_mut().for_each(|v| *v /= s);
                scales[j] = s;
            }
        }
    }
    let col_sq: Vec<f64> = (0..p)
        .map(|j| column(&xc, j).iter().map(|v| v * v).sum::<f64>() / nf)
        .collect();

    let l1 = spec.l1();
    let l2 = spec.l2();
    let mut w = vec![0.0; p];
    let mut r = yc.clone();
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iters = 0;
    while iters < spec.max_iters {
        iters += 1;
        let mut max_delta: f64 = 0.0;
        for j in 0..p {
            let denom = col_sq[j] + l2;
            if col_sq[j] == 0.0 || denom == 0.0 {
                continue;
            }
            let xj = column(&xc, j);
            let dot: f64 = xj.iter().zip(&r).map(|(a, b)| a * b).sum();
            let rho = dot / nf + col_sq[j] * w[j];
            let updated = soft_threshold(rho, l1) / denom;
            let delta = updated - w[j];
            if delta != 0.0 {
                for (ri, xi) in r.iter_mut().zip(xj) {
                    *ri -= delta * xi;
                }
                w[j] = updated;
                max_delta = max_delta.max(delta.abs());
            }
        }
        trace.push(objective_from_residual(&r, &w, l1, l2));
        if max_delta < spec.tol && kkt_residual(&xc, &yc, &w, 0.0, spec) <= spec.tol {
            converged = true;
            break;
        }
    }

    let final_objective = *trace.last().expect("at least one cycle");
    let weights: Vec<f64> = w.iter().zip(&scales).map(|(w, s)| w / s).collect();
    let intercept = y_mean - weights.iter().zip(&means).map(|(w, m)| w * m).sum::<f64>();
    Ok(LinearFit {
        weights,
        intercept,
        iterations_used: iters,
        final_objective,
        objective_trace: trace,
        converged,
    })
}

fn objective_from_residual(r: &[f64], w: &[f64], l1: f64, l2: f64) -> f64 {
    let n = r.len() as f64;
    r.iter().map(|v| v * v).sum::<f64>() / (2.0 * n)
        + l1 * w.iter().map(|v| v.abs()).sum::<f64>()
        + l2 / 2.0 * w.iter().map(|v| v * v).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn standardized_column(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        let mut v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let m = v.iter().sum::<f64>() / n as f64;
        v.iter_mut().for_each(|x| *x -= m);
        let s = (v.iter().map(|x| x * x).sum::<f64>() / n as f64).sqrt();
        v.iter_mut().for_each(|x| *x /= s);
        v
    }

    #[test]
    fn ols_through_two_points() {
        let x = DMatrix::from_column_slice(2, 1, &[1.0, 2.0]);
        let fit = fit_elastic_net(&x, &[2.0, 4.0], &ElasticNetSpec::new(0.0, 0.5)).unwrap();
        assert!((fit.weights[0] - 2.0).abs() < 1e-12);
        assert!(fit.intercept.abs() < 1e-12);
    }

    #[test]
    fn weak_feature_is_thresholded_to_zero() {
        // <x, y>/n = 0.05 < αρ = 0.63
        let x = DMatrix::from_column_slice(4, 1, &[1.0, -1.0, 1.0, -1.0]);
        let y = [0.2, 0.0, 0.0, 0.0];
        let fit = fit_elastic_net(&x, &y, &ElasticNetSpec::default()).unwrap();
        assert_eq!(fit.weights, vec![0.0]);
    }

    #[test]
    fn univariate_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let n = rng.random_range(5..40);
            let xs = standardized_column(&mut rng, n);
            let beta: f64 = rng.random_range(-3.0..3.0);
            let y: Vec<f64> = xs.iter().map(|x| beta * x + rng.sample::<f64, _>(StandardNormal)).collect();
            let spec = ElasticNetSpec::new(rng.random_range(0.0..2.0), rng.random_range(0.0..1.0));
            let fit = fit_elastic_net(&DMatrix::from_column_slice(n, 1, &xs), &y, &spec).unwrap();
            let ym = y.iter().sum::<f64>() / n as f64;
            let xy = xs.iter().zip(&y).map(|(a, b)| a * (b - ym)).sum::<f64>() / n as f64;
            let expected = soft_threshold(xy, spec.alpha * spec.l1_ratio) / (1.0 + spec.alpha * (1.0 - spec.l1_ratio));
            assert!((fit.weights[0] - expected).abs() < 1e-8);
        }
    }

    #[test]
    fn objective_never_increases() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let (n, p) = (30, 6);
            let data: Vec<f64> = (0..n * p).map(|_| rng.sample(StandardNormal)).collect();
            let mut x = DMatrix::from_column_slice(n, p, &data);
            // make two columns strongly correlated so descent takes many cycles
            for i in 0..n {
                x[(i, 1)] = x[(i, 0)] + 0.01 * x[(i, 1)];
            }
            let y: Vec<f64> = (0..n).map(|i| x[(i, 0)] * 2.0 - x[(i, 3)] + rng.sample::<f64, _>(StandardNormal)).collect();
            let fit = fit_elastic_net(&x, &y, &ElasticNetSpec::new(0.05, 0.5)).unwrap();
            assert!(fit.converged);
            for pair in fit.objective_trace.windows(2) {
                assert!(pair[1] <= pair[0] + 1e-12);
            }
        }
    }

    #[test]
    fn internal_standardization_maps_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 50;
        let raw: Vec<f64> = (0..n).map(|_| 10.0 + 4.0 * rng.sample::<f64, _>(StandardNormal)).collect();
        let y: Vec<f64> = raw.iter().map(|v| 3.0 * v + 1.0).collect();
        let spec = ElasticNetSpec { standardize: true, ..ElasticNetSpec::new(0.0, 0.5) };
        let fit = fit_elastic_net(&DMatrix::from_column_slice(n, 1, &raw), &y, &spec).unwrap();
        assert!((fit.weights[0] - 3.0).abs() < 1e-8);
        assert!((fit.intercept - 1.0).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_input() {
        let x = DMatrix::from_column_slice(2, 1, &[1.0, f64::NAN]);
        assert!(matches!(fit_elastic_net(&x, &[1.0, 2.0], &ElasticNetSpec::default()), Err(SolverError::NonFinite)));
        let empty = DMatrix::<f64>::zeros(3, 0);
        assert!(matches!(fit_elastic_net(&empty, &[1.0; 3], &ElasticNetSpec::default()), Err(SolverError::NoFeatures)));
        let spec = ElasticNetSpec::new(1.0, 1.5);
        assert!(spec.validate().is_err());
    }

    #[test]
    fn scaling_y_scales_ols_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (n, p) = (12, 3);
        let data: Vec<f64> = (0..n * p).map(|_| rng.sample(StandardNormal)).collect();
        let x = DMatrix::from_column_slice(n, p, &data);
        let y: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let spec = ElasticNetSpec { tol: 1e-12, max_iters: 100_000, ..ElasticNetSpec::new(0.0, 0.5) };
        let a = fit_elastic_net(&x, &y, &spec).unwrap();
        let b = fit_elastic_net(&x, &y.iter().map(|v| v * 4.0).collect::<Vec<_>>(), &spec).unwrap();
        for (wa, wb) in a.weights.iter().zip(&b.weights) {
            assert!((wb - 4.0 * wa).abs() < 1e-8 * wa.abs().max(1.0));
        }
    }
}
