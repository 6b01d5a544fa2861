//! Four-stage column reduction: null filter, similarity and variance filter,
//! correlation filter, ElasticNet selection.
//!
//! The ElasticNet stage regresses the numeric class index of the best-model
//! label on the standardized survivors. The class index has no metric meaning,
//! so this is a ranking heuristic for relevance, not a model of the label.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::FeatureMatrix;
use crate::error::FeatureError;
use crate::optim::{fit_elastic_net, ElasticNetSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReductionConfig {
    /// Columns with a missing fraction above this are dropped.
    pub null_frac: f64,
    /// Fraction of rows that must agree for two columns to count as duplicates.
    pub similarity: f64,
    /// Relative tolerance on variances for the variance/correlation reading of
    /// similarity.
    pub similarity_variance_tol: f64,
    /// Minimum Pearson r for the variance/correlation reading of similarity.
    pub similarity_min_r: f64,
    /// Later column of any pair with |r| at or above this is dropped.
    pub corr: f64,
    pub alpha: f64,
    pub l1_ratio: f64,
    /// Coefficients at or below this magnitude count as unselected.
    pub selection_eps: f64,
}

impl Default for ReductionConfig {
    fn default() -> Self {
        ReductionConfig {
            null_frac: 0.5,
            similarity: 0.95,
            similarity_variance_tol: 5e-2,
            similarity_min_r: 0.999,
            corr: 0.95,
            alpha: 0.9,
            l1_ratio: 0.7,
            selection_eps: 1e-8,
        }
    }
}

impl ReductionConfig {
    pub fn validate(&self) -> Result<(), FeatureError> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(FeatureError::Solver(crate::error::SolverError::Parameter(format!(
                    "reduction.{name} = {v}; must be in [0, 1]"
                ))))
            }
        };
        unit("null_frac", self.null_frac)?;
        unit("similarity", self.similarity)?;
        unit("similarity_min_r", self.similarity_min_r)?;
        unit("corr", self.corr)?;
        unit("l1_ratio", self.l1_ratio)?;
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(FeatureError::Solver(crate::error::SolverError::Parameter(format!(
                "reduction.alpha = {}; must be finite and >= 0",
                self.alpha
            ))));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NullDrop {
    pub name: String,
    pub null_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SimilarityReason {
    /// Enough rows agree to within relative 1e-9.
    Values { agreement: f64 },
    /// Variances within tolerance and near-perfect positive correlation.
    VarianceAndCorrelation { variance_ratio: f64, r: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimilarityDrop {
    pub name: String,
    pub duplicate_of: String,
    pub reasons: Vec<SimilarityReason>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelatedDrop {
    pub name: String,
    pub partner: String,
    pub abs_r: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectedFeature {
    pub name: String,
    pub coefficient: f64,
}

/// Where every input column ended up.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub input_columns: Vec<String>,
    pub dropped_null: Vec<NullDrop>,
    pub dropped_similarity: Vec<SimilarityDrop>,
    pub dropped_low_variance: Vec<String>,
    pub dropped_correlated: Vec<CorrelatedDrop>,
    pub dropped_elasticnet: Vec<String>,
    pub elasticnet_selected: Vec<SelectedFeature>,
    pub final_columns: Vec<String>,
}

impl ReductionReport {
    /// Names from every bucket, final columns included.
    pub fn accounted_columns(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        out.extend(self.dropped_null.iter().map(|d| d.name.as_str()));
        out.extend(self.dropped_similarity.iter().map(|d| d.name.as_str()));
        out.extend(self.dropped_low_variance.iter().map(String::as_str));
        out.extend(self.dropped_correlated.iter().map(|d| d.name.as_str()));
        out.extend(self.dropped_elasticnet.iter().map(String::as_str));
        out.extend(self.final_columns.iter().map(String::as_str));
        out
    }
}

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
}

fn present(col: &[Option<f64>]) -> Vec<f64> {
    col.iter().flatten().copied().collect()
}

fn variance_of(values: &[f64]) -> Option<f64> {
    (values.len() >= 2).then(|| super::variance(values))
}

/// Pearson r over rows where both columns are present.
fn pearson(a: &[Option<f64>], b: &[Option<f64>]) -> Option<f64> {
    let pairs: Vec<(f64, f64)> = a
        .iter()
        .zip(b)
        .filter_map(|(x, y)| Some(((*x)?, (*y)?)))
        .collect();
    if pairs.len() < 2 {
        return None;
    }
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in &pairs {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx).powi(2);
        syy += (y - my).powi(2);
    }
    (sxx > 0.0 && syy > 0.0).then(|| (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

fn similarity_reasons(
    a: &[Option<f64>],
    b: &[Option<f64>],
    cfg: &ReductionConfig,
) -> Vec<SimilarityReason> {
    let mut reasons = Vec::new();
    let agree = a
        .iter()
        .zip(b)
        .filter(|(x, y)| match (x, y) {
            (None, None) => true,
            (Some(x), Some(y)) => close(*x, *y),
            _ => false,
        })
        .count();
    let agreement = agree as f64 / a.len() as f64;
    if agreement >= cfg.similarity {
        reasons.push(SimilarityReason::Values { agreement });
    }
    if let (Some(va), Some(vb)) = (variance_of(&present(a)), variance_of(&present(b))) {
        let hi = va.max(vb);
        if hi > 0.0 && (va - vb).abs() <= cfg.similarity_variance_tol * hi {
            if let Some(r) = pearson(a, b).filter(|r| *r >= cfg.similarity_min_r) {
                reasons.push(SimilarityReason::VarianceAndCorrelation {
                    variance_ratio: va.min(vb) / hi,
                    r,
                });
            }
        }
    }
    reasons
}

fn is_constant(col: &[Option<f64>]) -> bool {
    let vals = present(col);
    match vals.first() {
        None => true,
        Some(first) => vals
            .iter()
            .all(|v| *v == *first || (v - first).abs() <= 1e-12 * v.abs().max(first.abs())),
    }
}

/// Runs the cascade in fixed order and returns the reduced matrix together
/// with a report that places every input column in exactly one bucket.
pub fn reduce_features(
    matrix: &FeatureMatrix,
    labels: &[f64],
    cfg: &ReductionConfig,
) -> Result<(FeatureMatrix, ReductionReport), FeatureError> {
    let n = matrix.n_rows();
    if n < 2 {
        return Err(FeatureError::TooFewRows(n));
    }
    if labels.len() != n || labels.iter().any(|v| !v.is_finite()) {
        return Err(FeatureError::Shape);
    }
    let mut report = ReductionReport {
        input_columns: matrix.columns.clone(),
        ..Default::default()
    };
    let cols: Vec<Vec<Option<f64>>> = (0..matrix.n_cols()).map(|j| matrix.column(j)).collect();
    let name = |j: usize| matrix.columns[j].clone();

    // 1. null filter
    let mut alive: Vec<usize> = Vec::new();
    for (j, col) in cols.iter().enumerate() {
        let frac = col.iter().filter(|v| v.is_none()).count() as f64 / n as f64;
        if frac > cfg.null_frac {
            report.dropped_null.push(NullDrop {
                name: name(j),
                null_fraction: frac,
            });
        } else {
            alive.push(j);
        }
    }
    let after_null = alive.len();

    // 2. near-duplicates, then zero variance
    let mut dropped = vec![false; cols.len()];
    for (ai, &i) in alive.iter().enumerate() {
        if dropped[i] {
            continue;
        }
        for &j in &alive[ai + 1..] {
            if dropped[j] {
                continue;
            }
            let reasons = similarity_reasons(&cols[i], &cols[j], cfg);
            if !reasons.is_empty() {
                dropped[j] = true;
                report.dropped_similarity.push(SimilarityDrop {
                    name: name(j),
                    duplicate_of: name(i),
                    reasons,
                });
            }
        }
    }
    alive.retain(|j| !dropped[*j]);
    alive.retain(|&j| {
        let constant = is_constant(&cols[j]);
        if constant {
            report.dropped_low_variance.push(name(j));
        }
        !constant
    });
    let after_similarity = alive.len();

    // 3. correlation
    for (ai, &i) in alive.iter().enumerate() {
        if dropped[i] {
            continue;
        }
        for &j in &alive[ai + 1..] {
            if dropped[j] {
                continue;
            }
            if let Some(r) = pearson(&cols[i], &cols[j]) {
                if r.abs() >= cfg.corr {
                    dropped[j] = true;
                    report.dropped_correlated.push(CorrelatedDrop {
                        name: name(j),
                        partner: name(i),
                        abs_r: r.abs(),
                    });
                }
            }
        }
    }
    alive.retain(|j| !dropped[*j]);
    let after_correlation = alive.len();
    if alive.is_empty() {
        return Err(FeatureError::AllEliminated {
            input: matrix.n_cols(),
            after_null,
            after_similarity,
            after_correlation,
        });
    }

    // 4. ElasticNet on standardized, mean-imputed survivors
    let mut design = DMatrix::<f64>::zeros(n, alive.len());
    for (k, &j) in alive.iter().enumerate() {
        let vals = present(&cols[j]);
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let filled: Vec<f64> = cols[j].iter().map(|v| v.unwrap_or(mean)).collect();
        let sd = super::variance(&filled).sqrt();
        for (i, v) in filled.iter().enumerate() {
            design[(i, k)] = if sd > 0.0 { (v - mean) / sd } else { 0.0 };
        }
    }
    let spec = ElasticNetSpec::new(cfg.alpha, cfg.l1_ratio);
    let fit = fit_elastic_net(&design, labels, &spec)?;
    for (k, &j) in alive.iter().enumerate() {
        let w = fit.weights[k];
        if w.abs() > cfg.selection_eps {
            report.elasticnet_selected.push(SelectedFeature {
                name: name(j),
                coefficient: w.abs(),
            });
            report.final_columns.push(name(j));
        } else {
            report.dropped_elasticnet.push(name(j));
        }
    }
    if report.final_columns.is_empty() {
        return Err(FeatureError::AllEliminated {
            input: matrix.n_cols(),
            after_null,
            after_similarity,
            after_correlation,
        });
    }
    let reduced = matrix.select(&report.final_columns)?;
    Ok((reduced, report))
}
