//! Fixed catalog of window statistics.
//!
//! Every statistic is total over finite windows of length >= 2: where a value
//! is undefined (zero variance, too few points, mean near zero) it returns
//! `None`, which downstream code treats as missing.

use crate::error::FeatureError;

pub const CATALOG_VERSION: &str = "window-stats-v1";

pub type StatFn = fn(&[f64]) -> Option<f64>;

#[derive(Clone, Copy)]
pub struct FeatureDef {
    pub name: &'static str,
    pub func: StatFn,
}

impl std::fmt::Debug for FeatureDef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name)
    }
}

#[derive(Clone, Debug)]
pub struct FeatureCatalog {
    pub version: String,
    pub entries: Vec<FeatureDef>,
}

impl FeatureCatalog {
    pub fn names(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.name.to_string()).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&FeatureDef> {
        self.entries.iter().find(|e| e.name == name)
    }
}

pub fn default_catalog() -> FeatureCatalog {
    macro_rules! catalog {
        ($($name:literal => $f:expr),* $(,)?) => {
            vec![$(FeatureDef { name: $name, func: $f }),*]
        };
    }
    let entries = catalog![
        "mean" => |x| Some(mean(x)),
        "median" => |x| quantile(x, 0.5),
        "std_dev" => |x| Some(variance(x).sqrt()),
        "variance" => |x| Some(variance(x)),
        "min" => |x| x.iter().copied().reduce(f64::min),
        "max" => |x| x.iter().copied().reduce(f64::max),
        "range" => |x| Some(max(x) - min(x)),
        "sum" => |x| Some(x.iter().sum()),
        "abs_energy" => |x| Some(x.iter().map(|v| v * v).sum()),
        "mean_abs_change" => |x| Some(diffs(x).map(f64::abs).sum::<f64>() / (x.len() - 1) as f64),
        "mean_change" => |x| Some((x[x.len() - 1] - x[0]) / (x.len() - 1) as f64),
        "skewness" => skewness,
        "kurtosis" => kurtosis,
        "quantile_0.1" => |x| quantile(x, 0.1),
        "quantile_0.25" => |x| quantile(x, 0.25),
        "quantile_0.75" => |x| quantile(x, 0.75),
        "quantile_0.9" => |x| quantile(x, 0.9),
        "iqr" => |x| Some(quantile(x, 0.75)? - quantile(x, 0.25)?),
        "count_above_mean" => |x| { let m = mean(x); Some(x.iter().filter(|v| **v > m).count() as f64) },
        "count_below_mean" => |x| { let m = mean(x); Some(x.iter().filter(|v| **v < m).count() as f64) },
        "longest_strike_above_mean" => |x| { let m = mean(x); Some(longest_run(x, |v| v > m)) },
        "longest_strike_below_mean" => |x| { let m = mean(x); Some(longest_run(x, |v| v < m)) },
        "number_of_peaks" => |x| Some(number_of_peaks(x)),
        "number_of_zero_crossings" => |x| Some(zero_crossings_about_mean(x)),
        "first_value" => |x| Some(x[0]),
        "last_value" => |x| Some(x[x.len() - 1]),
        "linear_trend_slope" => |x| linear_trend(x).map(|t| t.0),
        "linear_trend_intercept" => |x| linear_trend(x).map(|t| t.1),
        "linear_trend_r2" => |x| linear_trend(x).and_then(|t| t.2),
        "autocorrelation_lag1" => |x| autocorrelation(x, 1),
        "autocorrelation_lag2" => |x| autocorrelation(x, 2),
        "autocorrelation_lag3" => |x| autocorrelation(x, 3),
        "autocorrelation_lag7" => |x| autocorrelation(x, 7),
        "partial_sum_ratio" => partial_sum_ratio,
        "binned_entropy" => |x| Some(binned_entropy(x, 10)),
        "mean_second_derivative_central" => mean_second_derivative_central,
        "ratio_beyond_1_sigma" => |x| Some(ratio_beyond_sigma(x, 1.0)),
        "ratio_beyond_2_sigma" => |x| Some(ratio_beyond_sigma(x, 2.0)),
        "coefficient_of_variation" => |x| {
            let m = mean(x);
            (m.abs() > 1e-12).then(|| variance(x).sqrt() / m)
        },
        "mean_abs_deviation" => |x| { let m = mean(x); Some(x.iter().map(|v| (v - m).abs()).sum::<f64>() / x.len() as f64) },
    ];
    FeatureCatalog {
        version: CATALOG_VERSION.to_string(),
        entries,
    }
}

/// One value per catalog entry, in catalog order. Non-finite results are
/// reported as missing.
pub fn extract_features(
    window: &[f64],
    catalog: &FeatureCatalog,
) -> Result<Vec<Option<f64>>, FeatureError> {
    if window.len() < 2 {
        return Err(FeatureError::WindowTooShort(window.len()));
    }
    if let Some(i) = window.iter().position(|v| !v.is_finite()) {
        return Err(FeatureError::NonFinite(i));
    }
    Ok(catalog
        .entries
        .iter()
        .map(|e| (e.func)(window).filter(|v| v.is_finite()))
        .collect())
}

pub(crate) fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Population variance.
pub(crate) fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / x.len() as f64
}

fn min(x: &[f64]) -> f64 {
    x.iter().copied().fold(f64::INFINITY, f64::min)
}

fn max(x: &[f64]) -> f64 {
    x.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn diffs(x: &[f64]) -> impl Iterator<Item = f64> + '_ {
    x.windows(2).map(|w| w[1] - w[0])
}

fn central_moment(x: &[f64], k: i32) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m).powi(k)).sum::<f64>() / x.len() as f64
}

fn skewness(x: &[f64]) -> Option<f64> {
    let m2 = central_moment(x, 2);
    (m2 > 0.0).then(|| central_moment(x, 3) / m2.powf(1.5))
}

/// Excess kurtosis.
fn kurtosis(x: &[f64]) -> Option<f64> {
    let m2 = central_moment(x, 2);
    (m2 > 0.0).then(|| central_moment(x, 4) / (m2 * m2) - 3.0)
}

/// Linear interpolation between order statistics (the "type 7" rule).
pub(crate) fn quantile(x: &[f64], q: f64) -> Option<f64> {
    if x.is_empty() {
        return None;
    }
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    Some(quantile_sorted(&sorted, q))
}

pub(crate) fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn longest_run(x: &[f64], pred: impl Fn(f64) -> bool) -> f64 {
    let mut best = 0usize;
    let mut cur = 0usize;
    for v in x {
        if pred(*v) {
            cur += 1;
            best = best.max(cur);
        } else {
            cur = 0;
        }
    }
    best as f64
}

/// Points strictly greater than both neighbours.
fn number_of_peaks(x: &[f64]) -> f64 {
    x.windows(3).filter(|w| w[1] > w[0] && w[1] > w[2]).count() as f64
}

fn zero_crossings_about_mean(x: &[f64]) -> f64 {
    let m = mean(x);
    let signs: Vec<f64> = x
        .iter()
        .map(|v| v - m)
        .filter(|d| *d != 0.0)
        .map(f64::signum)
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count() as f64
}

/// Least-squares line over indices 0..n: (slope, intercept, r²).
/// r² is undefined for a constant window.
fn linear_trend(x: &[f64]) -> Option<(f64, f64, Option<f64>)> {
    let n = x.len() as f64;
    let tm = (n - 1.0) / 2.0;
    let ym = mean(x);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (i, y) in x.iter().enumerate() {
        let dt = i as f64 - tm;
        sxy += dt * (y - ym);
        sxx += dt * dt;
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * tm;
    let syy: f64 = x.iter().map(|y| (y - ym).powi(2)).sum();
    let r2 = (syy > 0.0).then(|| (sxy * sxy / (sxx * syy)).min(1.0));
    Some((slope, intercept, r2))
}

/// `1/((n-k)·σ²) · Σ (x_t - μ)(x_{t+k} - μ)` with population variance.
pub(crate) fn autocorrelation(x: &[f64], lag: usize) -> Option<f64> {
    if lag >= x.len() {
        return None;
    }
    let m = mean(x);
    let var = variance(x);
    if var <= 0.0 {
        return None;
    }
    let s: f64 = x
        .iter()
        .zip(&x[lag..])
        .map(|(a, b)| (a - m) * (b - m))
        .sum();
    Some(s / ((x.len() - lag) as f64 * var))
}

/// Sum of the last quarter of the window over the total sum.
fn partial_sum_ratio(x: &[f64]) -> Option<f64> {
    let total: f64 = x.iter().sum();
    if total.abs() < 1e-12 {
        return None;
    }
    let q = (x.len() / 4).max(1);
    Some(x[x.len() - q..].iter().sum::<f64>() / total)
}

fn binned_entropy(x: &[f64], bins: usize) -> f64 {
    let lo = min(x);
    let hi = max(x);
    if hi <= lo {
        return 0.0;
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for v in x {
        let b = (((v - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let n = x.len() as f64;
    -counts
        .iter()
        .filter(|c| **c > 0)
        .map(|c| {
            let p = *c as f64 / n;
            p * p.ln()
        })
        .sum::<f64>()
}

fn mean_second_derivative_central(x: &[f64]) -> Option<f64> {
    if x.len() < 3 {
        return None;
    }
    let s: f64 = x.windows(3).map(|w| (w[2] - 2.0 * w[1] + w[0]) / 2.0).sum();
    Some(s / (x.len() - 2) as f64)
}

fn ratio_beyond_sigma(x: &[f64], r: f64) -> f64 {
    let m = mean(x);
    let sd = variance(x).sqrt();
    x.iter().filter(|v| (*v - m).abs() > r * sd).count() as f64 / x.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn stat(name: &str, x: &[f64]) -> Option<f64> {
        let cat = default_catalog();
        (cat.get(name).unwrap().func)(x)
    }

    #[test]
    fn catalog_has_forty_unique_entries() {
        let cat = default_catalog();
        assert_eq!(cat.len(), 40);
        let names: HashSet<_> = cat.entries.iter().map(|e| e.name).collect();
        assert_eq!(names.len(), 40);
        assert!(names.contains("mean") && names.contains("number_of_peaks"));
        assert_eq!(default_catalog().names(), cat.names());
    }

    #[test]
    fn spot_values() {
        assert_eq!(stat("variance", &[1.0; 4]), Some(0.0));
        assert_eq!(stat("linear_trend_slope", &[1.0, 2.0, 3.0, 4.0]), Some(1.0));
        assert_eq!(stat("linear_trend_intercept", &[1.0, 2.0, 3.0, 4.0]), Some(1.0));
        // mean 1, variance 1, lag-1 products all -1: -3 / (3 * 1)
        assert_eq!(stat("autocorrelation_lag1", &[0.0, 2.0, 0.0, 2.0]), Some(-1.0));
        assert_eq!(stat("number_of_peaks", &[0.0, 1.0, 0.0, 2.0, 1.0]), Some(2.0));
        assert_eq!(stat("number_of_zero_crossings", &[0.0, 2.0, 0.0, 2.0]), Some(3.0));
        assert_eq!(stat("median", &[3.0, 1.0, 2.0, 10.0]), Some(2.5));
        assert_eq!(stat("quantile_0.25", &[1.0, 2.0, 3.0, 4.0, 5.0]), Some(2.0));
        assert_eq!(stat("longest_strike_above_mean", &[0.0, 5.0, 5.0, 5.0, 0.0, 5.0]), Some(3.0));
        assert_eq!(stat("partial_sum_ratio", &[1.0, 1.0, 1.0, 1.0]), Some(0.25));
        assert_eq!(stat("binned_entropy", &[1.0; 5]), Some(0.0));
        assert_eq!(stat("mean_second_derivative_central", &[0.0, 1.0, 4.0, 9.0]), Some(1.0));
        assert_eq!(stat("mean_change", &[1.0, 5.0, 3.0]), Some(1.0));
        assert_eq!(stat("mean_abs_change", &[1.0, 5.0, 3.0]), Some(3.0));
    }

    #[test]
    fn undefined_values_are_missing_not_zero() {
        let constant = [4.0; 6];
        let row = extract_features(&constant, &default_catalog()).unwrap();
        let cat = default_catalog();
        let missing: Vec<_> = cat
            .entries
            .iter()
            .zip(&row)
            .filter(|(_, v)| v.is_none())
            .map(|(e, _)| e.name)
            .collect();
        for name in ["skewness", "kurtosis", "autocorrelation_lag1", "linear_trend_r2"] {
            assert!(missing.contains(&name), "{name} should be missing");
        }
        assert_eq!(stat("coefficient_of_variation", &[-1.0, 1.0]), None);
        assert_eq!(stat("autocorrelation_lag7", &[1.0, 2.0, 3.0]), None);
    }

    #[test]
    fn extract_rejects_short_or_non_finite() {
        let cat = default_catalog();
        assert!(matches!(extract_features(&[1.0], &cat), Err(FeatureError::WindowTooShort(1))));
        assert!(matches!(extract_features(&[1.0, f64::NAN], &cat), Err(FeatureError::NonFinite(1))));
    }

    #[test]
    fn extraction_is_deterministic() {
        let x: Vec<f64> = (0..30).map(|i| (i as f64 * 0.7).sin() * 3.0 + i as f64).collect();
        let cat = default_catalog();
        let a = extract_features(&x, &cat).unwrap();
        let b = extract_features(&x, &cat).unwrap();
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }

    #[test]
    fn permutation_covariance_per_entry() {
        let x: Vec<f64> = vec![3.0, -1.0, 4.0, 1.5, 5.0, -9.0, 2.0, 6.5, 5.0, 3.5];
        let mut rev = x.clone();
        rev.reverse();
        let mut shuffled = x.clone();
        shuffled.rotate_left(3);
        let invariant = [
            "mean", "median", "std_dev", "variance", "min", "max", "range", "sum",
            "abs_energy", "skewness", "kurtosis", "quantile_0.1", "quantile_0.25",
            "quantile_0.75", "quantile_0.9", "iqr", "count_above_mean", "count_below_mean",
            "binned_entropy", "ratio_beyond_1_sigma", "ratio_beyond_2_sigma",
            "coefficient_of_variation", "mean_abs_deviation",
        ];
        let order_dependent = [
            "linear_trend_slope", "first_value", "last_value", "autocorrelation_lag1",
            "mean_change", "partial_sum_ratio",
        ];
        for name in invariant {
            let a = stat(name, &x).unwrap();
            let b = stat(name, &shuffled).unwrap();
            assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "{name}: {a} vs {b}");
        }
        for name in order_dependent {
            assert_ne!(stat(name, &x), stat(name, &shuffled), "{name}");
        }
    }
}
