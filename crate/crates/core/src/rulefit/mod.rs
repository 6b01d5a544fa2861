//! Interpretable classifier from feature rows to per-predictor probabilities.
//!
//! Shallow boosted trees (one ensemble per class, fitted on one-vs-rest
//! indicators) supply candidate rules: every root-to-node path becomes a
//! conjunction of threshold conditions. An L1-penalized logistic model per
//! class then weights the rule activations, and the per-class scores
//! `σ(z_k)` are normalized to sum to one.
//!
//! A missing feature value never satisfies a conjunct.

mod tree;

use std::collections::HashSet;
use std::fmt;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::RuleFitError;
use crate::featurizer::quantile_sorted;
use crate::optim::{fit_l1_logistic, LogisticSpec};
use tree::{boost, BoostParams, Node, TreeParams};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RuleFitConfig {
    /// Boosted trees per class.
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub subsample: f64,
    pub min_samples_leaf: usize,
    /// Inverse L1 strength of the per-class logistic layer.
    pub c: f64,
    pub include_linear_terms: bool,
    pub seed: u64,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for RuleFitConfig {
    fn default() -> Self {
        RuleFitConfig {
            n_trees: 100,
            max_depth: 3,
            learning_rate: 0.1,
            subsample: 0.75,
            min_samples_leaf: 10,
            c: 30.0,
            include_linear_terms: false,
            seed: 42,
            max_iters: 100,
            tol: 1e-6,
        }
    }
}

impl RuleFitConfig {
    pub fn validate(&self) -> Result<(), RuleFitError> {
        let fail = |m: &str| Err(RuleFitError::Config(m.to_string()));
        if self.n_trees == 0 {
            return fail("n_trees must be >= 1");
        }
        if self.max_depth == 0 {
            return fail("max_depth must be >= 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return fail("learning_rate must be in (0, 1]");
        }
        if !(self.subsample > 0.0 && self.subsample <= 1.0) {
            return fail("subsample must be in (0, 1]");
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return fail("c must be positive");
        }
        if self.min_samples_leaf == 0 {
            return fail("min_samples_leaf must be >= 1");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Op {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Op::Le => "<=",
            Op::Gt => ">",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Conjunct {
    pub feature: String,
    pub feature_index: usize,
    pub op: Op,
    pub threshold: f64,
}

impl Conjunct {
    pub fn holds(&self, value: Option<f64>) -> bool {
        match value {
            None => false,
            Some(v) => match self.op {
                Op::Le => v <= self.threshold,
                Op::Gt => v > self.threshold,
            },
        }
    }
}

/// At most four decimals, trailing zeros dropped. rules.json keeps the exact value.
fn short_number(x: f64) -> String {
    let s = format!("{x:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".to_string() } else { s.to_string() }
}

impl fmt::Display for Conjunct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.feature, self.op, short_number(self.threshold))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub conjuncts: Vec<Conjunct>,
    /// Fraction of training rows satisfying every conjunct.
    pub support: f64,
    pub support_count: usize,
    /// One coefficient per class, aligned with `RuleModel::class_ids`.
    pub coefficients: Vec<f64>,
}

impl Rule {
    pub fn holds(&self, row: &[Option<f64>]) -> bool {
        self.conjuncts.iter().all(|c| c.holds(row[c.feature_index]))
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.conjuncts.iter().enumerate() {
            if i > 0 {
                f.write_str(" AND ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// A raw feature clipped to its training 2.5%/97.5% quantiles and
/// standardized. Missing values are replaced by the training median.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearTerm {
    pub feature: String,
    pub feature_index: usize,
    pub median: f64,
    pub lower: f64,
    pub upper: f64,
    pub mean: f64,
    pub std_dev: f64,
    pub coefficients: Vec<f64>,
}

impl LinearTerm {
    fn transform(&self, value: Option<f64>) -> f64 {
        let v = value.unwrap_or(self.median).clamp(self.lower, self.upper);
        if self.std_dev > 0.0 {
            (v - self.mean) / self.std_dev
        } else {
            0.0
        }
    }
}

pub const RULE_MODEL_FORMAT: u32 = 1;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RuleModel {
    pub format_version: u32,
    pub catalog_version: String,
    pub feature_names: Vec<String>,
    pub class_ids: Vec<String>,
    pub intercepts: Vec<f64>,
    pub rules: Vec<Rule>,
    pub linear_terms: Vec<LinearTerm>,
    /// Set when no rule or linear term survived and only intercepts remain.
    pub intercept_only: bool,
    pub n_training_rows: usize,
}

/// Per-predictor weights; entries are in `[0, 1]` and sum to one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityVector {
    pub ids: Vec<String>,
    pub values: Vec<f64>,
}

impl ProbabilityVector {
    pub fn new(ids: Vec<String>, values: Vec<f64>) -> Self {
        ProbabilityVector { ids, values }
    }

    pub fn get(&self, id: &str) -> Option<f64> {
        self.ids.iter().position(|i| i == id).map(|k| self.values[k])
    }

    /// Index of the largest entry; the first one wins ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (k, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = k;
            }
        }
        best
    }

    pub fn argmax_id(&self) -> &str {
        &self.ids[self.argmax()]
    }
}

/// A feature row tagged with the catalog and column layout that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureRow {
    pub catalog_version: String,
    pub names: Vec<String>,
    pub values: Vec<Option<f64>>,
}

/// Labeled training rows for [`fit_rule_model`].
#[derive(Clone, Copy, Debug)]
pub struct LabeledRows<'a> {
    pub catalog_version: &'a str,
    pub feature_names: &'a [String],
    pub rows: &'a [Vec<Option<f64>>],
    /// Class index per row, into `class_ids`.
    pub labels: &'a [usize],
    pub class_ids: &'a [String],
}

pub const MIN_TRAINING_ROWS: usize = 10;

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// `log σ(z)` computed stably.
fn log_sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        -(-z).exp().ln_1p()
    } else {
        z - z.exp().ln_1p()
    }
}

pub fn fit_rule_model(data: LabeledRows<'_>, cfg: &RuleFitConfig) -> Result<RuleModel, RuleFitError> {
    cfg.validate()?;
    let n = data.rows.len();
    let k = data.class_ids.len();
    let p = data.feature_names.len();
    if data.labels.len() != n
        || data.rows.iter().any(|r| r.len() != p)
        || data.labels.iter().any(|l| *l >= k)
    {
        return Err(RuleFitError::ColumnMismatch);
    }
    if n < MIN_TRAINING_ROWS {
        return Err(RuleFitError::TooFewRows {
            needed: MIN_TRAINING_ROWS,
            got: n,
        });
    }
    let distinct: HashSet<_> = data.labels.iter().collect();
    if distinct.len() < 2 {
        return Err(RuleFitError::SingleClass);
    }

    // Trees need dense input; missing values take the column median.
    let medians: Vec<f64> = (0..p)
        .map(|j| {
            let mut v: Vec<f64> = data.rows.iter().filter_map(|r| r[j]).collect();
            if v.is_empty() {
                return 0.0;
            }
            v.sort_by(f64::total_cmp);
            quantile_sorted(&v, 0.5)
        })
        .collect();
    let dense: Vec<Vec<f64>> = data
        .rows
        .iter()
        .map(|r| r.iter().zip(&medians).map(|(v, m)| v.unwrap_or(*m)).collect())
        .collect();

    let forests: Vec<Vec<Node>> = (0..k)
        .into_par_iter()
        .map(|class| {
            let target: Vec<f64> = data
                .labels
                .iter()
                .map(|l| if *l == class { 1.0 } else { 0.0 })
                .collect();
            boost(
                &dense,
                &target,
                &BoostParams {
                    n_trees: cfg.n_trees,
                    learning_rate: cfg.learning_rate,
                    subsample: cfg.subsample,
                    tree: TreeParams {
                        max_depth: cfg.max_depth,
                        min_samples_leaf: cfg.min_samples_leaf,
                    },
                    seed: cfg.seed.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(class as u64 + 1)),
                },
            )
        })
        .collect();

    let mut candidates: Vec<Vec<Conjunct>> = Vec::new();
    let mut seen = HashSet::new();
    for forest in &forests {
        for tree in forest {
            collect_rules(tree, &mut Vec::new(), data.feature_names, &mut |conjuncts| {
                let mut key: Vec<(usize, Op, u64)> = conjuncts
                    .iter()
                    .map(|c| (c.feature_index, c.op, c.threshold.to_bits()))
                    .collect();
                key.sort_unstable();
                if seen.insert(key) {
                    candidates.push(conjuncts);
                }
            });
        }
    }

    let mut rules: Vec<Rule> = Vec::new();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for conjuncts in candidates {
        let mut rule = Rule {
            conjuncts,
            support: 0.0,
            support_count: 0,
            coefficients: vec![0.0; k],
        };
        let col: Vec<f64> = data
            .rows
            .iter()
            .map(|r| if rule.holds(r) { 1.0 } else { 0.0 })
            .collect();
        let count = col.iter().filter(|v| **v > 0.0).count();
        if count == 0 || count == n {
            continue;
        }
        rule.support_count = count;
        rule.support = count as f64 / n as f64;
        rules.push(rule);
        columns.push(col);
    }

    let mut linear_terms = Vec::new();
    if cfg.include_linear_terms {
        for (j, name) in data.feature_names.iter().enumerate() {
            let mut sorted: Vec<f64> = dense.iter().map(|r| r[j]).collect();
            sorted.sort_by(f64::total_cmp);
            let lower = quantile_sorted(&sorted, 0.025);
            let upper = quantile_sorted(&sorted, 0.975);
            let clipped: Vec<f64> = dense.iter().map(|r| r[j].clamp(lower, upper)).collect();
            let mean = clipped.iter().sum::<f64>() / n as f64;
            let std_dev = (clipped.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
            if std_dev == 0.0 {
                continue;
            }
            let term = LinearTerm {
                feature: name.clone(),
                feature_index: j,
                median: medians[j],
                lower,
                upper,
                mean,
                std_dev,
                coefficients: vec![0.0; k],
            };
            columns.push(data.rows.iter().map(|r| term.transform(r[j])).collect());
            linear_terms.push(term);
        }
    }

    let class_rate = |class: usize| {
        let count = data.labels.iter().filter(|l| **l == class).count();
        // smoothed so absent classes keep a finite intercept
        (count as f64 + 0.5) / (n as f64 + 1.0)
    };
    let mut intercepts: Vec<f64> = (0..k).map(|c| logit(class_rate(c))).collect();

    if !columns.is_empty() {
        let design = DMatrix::from_fn(n, columns.len(), |i, j| columns[j][i]);
        let spec = LogisticSpec {
            c: cfg.c,
            max_iters: cfg.max_iters,
            tol: cfg.tol,
        };
        let fits: Vec<Option<crate::optim::LinearFit>> = (0..k)
            .into_par_iter()
            .map(|class| {
                let y: Vec<bool> = data.labels.iter().map(|l| *l == class).collect();
                if y.iter().all(|v| !*v) {
                    return Ok(None);
                }
                fit_l1_logistic(&design, &y, &spec).map(Some)
            })
            .collect::<Result<_, _>>()?;
        for (class, fit) in fits.into_iter().enumerate() {
            let Some(fit) = fit else { continue };
            intercepts[class] = fit.intercept;
            for (j, w) in fit.weights.iter().enumerate() {
                if j < rules.len() {
                    rules[j].coefficients[class] = *w;
                } else {
                    linear_terms[j - rules.len()].coefficients[class] = *w;
                }
            }
        }
    }
    rules.retain(|r| r.coefficients.iter().any(|c| *c != 0.0));
    linear_terms.retain(|t| t.coefficients.iter().any(|c| *c != 0.0));
    let intercept_only = rules.is_empty() && linear_terms.is_empty();
    if intercept_only {
        // With nothing else in the model the intercepts are the base rates.
        intercepts = (0..k).map(|c| logit(class_rate(c))).collect();
        let exact: Vec<f64> = (0..k)
            .map(|c| data.labels.iter().filter(|l| **l == c).count() as f64 / n as f64)
            .collect();
        for (c, rate) in exact.iter().enumerate() {
            if *rate > 0.0 && *rate < 1.0 {
                intercepts[c] = logit(*rate);
            }
        }
    }

    Ok(RuleModel {
        format_version: RULE_MODEL_FORMAT,
        catalog_version: data.catalog_version.to_string(),
        feature_names: data.feature_names.to_vec(),
        class_ids: data.class_ids.to_vec(),
        intercepts,
        rules,
        linear_terms,
        intercept_only,
        n_training_rows: n,
    })
}

/// Emits the simplified conjunct list for every non-root node.
fn collect_rules(
    node: &Node,
    path: &mut Vec<(usize, Op, f64)>,
    names: &[String],
    emit: &mut impl FnMut(Vec<Conjunct>),
) {
    if let Node::Split {
        feature,
        threshold,
        left,
        right,
    } = node
    {
        for (op, child) in [(Op::Le, left), (Op::Gt, right)] {
            path.push((*feature, op, *threshold));
            emit(simplify(path, names));
            collect_rules(child, path, names, emit);
            path.pop();
        }
    }
}

/// Keeps only the tightest bound per (feature, direction), in first-seen order.
fn simplify(path: &[(usize, Op, f64)], names: &[String]) -> Vec<Conjunct> {
    let mut out: Vec<Conjunct> = Vec::new();
    for &(feature, op, threshold) in path {
        if let Some(existing) = out
            .iter_mut()
            .find(|c| c.feature_index == feature && c.op == op)
        {
            existing.threshold = match op {
                Op::Le => existing.threshold.min(threshold),
                Op::Gt => existing.threshold.max(threshold),
            };
        } else {
            out.push(Conjunct {
                feature: names[feature].clone(),
                feature_index: feature,
                op,
                threshold,
            });
        }
    }
    out
}

impl RuleModel {
    pub fn check_row(&self, row: &FeatureRow) -> Result<(), RuleFitError> {
        if row.catalog_version != self.catalog_version {
            return Err(RuleFitError::CatalogMismatch {
                model: self.catalog_version.clone(),
                row: row.catalog_version.clone(),
            });
        }
        if row.names != self.feature_names || row.values.len() != self.feature_names.len() {
            return Err(RuleFitError::ColumnMismatch);
        }
        Ok(())
    }

    /// Per-class linear scores `z_k`.
    pub fn scores(&self, values: &[Option<f64>]) -> Vec<f64> {
        let mut z = self.intercepts.clone();
        for rule in &self.rules {
            if rule.holds(values) {
                for (zk, c) in z.iter_mut().zip(&rule.coefficients) {
                    *zk += c;
                }
            }
        }
        for term in &self.linear_terms {
            let v = term.transform(values[term.feature_index]);
            for (zk, c) in z.iter_mut().zip(&term.coefficients) {
                *zk += c * v;
            }
        }
        z
    }

    /// `p_k = σ(z_k) / Σ_j σ(z_j)`.
    pub fn predict_proba(&self, row: &FeatureRow) -> Result<ProbabilityVector, RuleFitError> {
        self.check_row(row)?;
        Ok(self.predict_values(&row.values))
    }

    /// Like [`predict_proba`](Self::predict_proba) for a row already known to
    /// match the model's columns.
    pub fn predict_values(&self, values: &[Option<f64>]) -> ProbabilityVector {
        let logs: Vec<f64> = self.scores(values).into_iter().map(log_sigmoid).collect();
        let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
        let total: f64 = weights.iter().sum();
        ProbabilityVector::new(
            self.class_ids.clone(),
            weights.iter().map(|w| w / total).collect(),
        )
    }

    /// Rule activations for one row (one entry per rule).
    pub fn activations(&self, values: &[Option<f64>]) -> Vec<bool> {
        self.rules.iter().map(|r| r.holds(values)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExplainOrder {
    Support,
    Coefficient,
}

impl std::str::FromStr for ExplainOrder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "support" => Ok(ExplainOrder::Support),
            "coefficient" | "coefficient-magnitude" => Ok(ExplainOrder::Coefficient),
            other => Err(format!("unknown order {other:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassCoefficient {
    pub class: String,
    pub coefficient: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuleSummary {
    pub rule: String,
    pub support: f64,
    pub coefficients: Vec<ClassCoefficient>,
}

/// The `top_k` rules by support or by largest absolute coefficient; ties are
/// broken by the rendered rule string.
pub fn explain(model: &RuleModel, top_k: usize, order: ExplainOrder) -> Vec<RuleSummary> {
    let key = |r: &Rule| match order {
        ExplainOrder::Support => r.support,
        ExplainOrder::Coefficient => r.coefficients.iter().fold(0.0f64, |m, c| m.max(c.abs())),
    };
    let mut ranked: Vec<(f64, String, &Rule)> =
        model.rules.iter().map(|r| (key(r), r.to_string(), r)).collect();
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
    ranked
        .into_iter()
        .take(top_k)
        .map(|(_, text, r)| RuleSummary {
            rule: text,
            support: r.support,
            coefficients: model
                .class_ids
                .iter()
                .zip(&r.coefficients)
                .map(|(c, w)| ClassCoefficient {
                    class: c.clone(),
                    coefficient: *w,
                })
                .collect(),
        })
        .collect()
}

pub fn render_explanation(summaries: &[RuleSummary]) -> String {
    let mut out = String::new();
    for (i, s) in summaries.iter().enumerate() {
        out.push_str(&format!("{:>3}. {}  (support {:.3})\n", i + 1, s.rule, s.support));
        for c in s.coefficients.iter().filter(|c| c.coefficient != 0.0) {
            out.push_str(&format!("       {:<20} {:+.4}\n", c.class, c.coefficient));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn conj(feature: &str, idx: usize, op: Op, threshold: f64) -> Conjunct {
        Conjunct { feature: feature.into(), feature_index: idx, op, threshold }
    }

    fn bare_model(rules: Vec<Rule>, intercepts: Vec<f64>, classes: &[&str]) -> RuleModel {
        RuleModel {
            format_version: RULE_MODEL_FORMAT,
            catalog_version: "v".into(),
            feature_names: ids(&["x", "y"]),
            class_ids: ids(classes),
            intercepts,
            intercept_only: rules.is_empty(),
            rules,
            linear_terms: vec![],
            n_training_rows: 10,
        }
    }

    #[test]
    fn renders_rules() {
        let rule = Rule {
            conjuncts: vec![conj("variance", 0, Op::Le, 7.2), conj("mean", 1, Op::Gt, 40.0)],
            support: 0.5,
            support_count: 5,
            coefficients: vec![1.0],
        };
        assert_eq!(rule.to_string(), "variance <= 7.2 AND mean > 40");
    }

    #[test]
    fn missing_never_satisfies() {
        assert!(!conj("x", 0, Op::Le, 1.0).holds(None));
        assert!(!conj("x", 0, Op::Gt, 1.0).holds(None));
        assert!(conj("x", 0, Op::Le, 1.0).holds(Some(1.0)));
    }

    #[test]
    fn symmetric_intercepts_are_uniform() {
        let m = bare_model(vec![], vec![0.3, 0.3], &["a", "b"]);
        assert_eq!(m.predict_values(&[Some(1.0), Some(2.0)]).values, vec![0.5, 0.5]);
        let m3 = bare_model(vec![], vec![-2.0; 3], &["a", "b", "c"]);
        for v in m3.predict_values(&[None, None]).values {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn single_rule_scoring() {
        let rule = Rule {
            conjuncts: vec![conj("x", 0, Op::Gt, 0.0)],
            support: 0.5,
            support_count: 5,
            coefficients: vec![8.0, -8.0],
        };
        let m = bare_model(vec![rule], vec![0.0, 0.0], &["a", "b"]);
        // x = 1: σ(8)/(σ(8)+σ(-8)) = σ(8)
        let p = m.predict_values(&[Some(1.0), None]);
        assert!(p.values[0] > 0.9);
        assert!((p.values[0] - crate::optim::sigmoid(8.0)).abs() < 1e-12);
        let q = m.predict_values(&[Some(-1.0), None]);
        assert_eq!(q.values, vec![0.5, 0.5]);
    }

    #[test]
    fn rejects_catalog_mismatch() {
        let m = bare_model(vec![], vec![0.0, 0.0], &["a", "b"]);
        let row = FeatureRow { catalog_version: "other".into(), names: ids(&["x", "y"]), values: vec![None, None] };
        assert!(matches!(m.predict_proba(&row), Err(RuleFitError::CatalogMismatch { .. })));
        let row = FeatureRow { catalog_version: "v".into(), names: ids(&["y", "x"]), values: vec![None, None] };
        assert!(matches!(m.predict_proba(&row), Err(RuleFitError::ColumnMismatch)));
    }

    #[test]
    fn explain_orders_and_breaks_ties() {
        let mk = |name: &str, support: f64, coef: f64| Rule {
            conjuncts: vec![conj(name, 0, Op::Le, 1.0)],
            support,
            support_count: (support * 10.0) as usize,
            coefficients: vec![coef, 0.0],
        };
        let m = bare_model(
            vec![mk("zeta", 0.4, 0.1), mk("alpha", 0.4, -3.0), mk("mid", 0.2, 1.0)],
            vec![0.0, 0.0],
            &["a", "b"],
        );
        let top = explain(&m, 1, ExplainOrder::Support);
        assert_eq!(top[0].rule, "alpha <= 1");
        let all = explain(&m, 3, ExplainOrder::Support);
        let names: Vec<_> = all.iter().map(|s| s.rule.as_str()).collect();
        assert_eq!(names, vec!["alpha <= 1", "zeta <= 1", "mid <= 1"]);
        let by_coef = explain(&m, 2, ExplainOrder::Coefficient);
        assert_eq!(by_coef[0].rule, "alpha <= 1");
        assert_eq!(by_coef[1].rule, "mid <= 1");
        assert!(render_explanation(&all).contains("alpha <= 1"));
    }

    #[test]
    fn simplify_keeps_tightest_bounds() {
        let names = ids(&["x", "y"]);
        let path = vec![(0, Op::Le, 5.0), (1, Op::Gt, 2.0), (0, Op::Le, 3.0)];
        let s = simplify(&path, &names);
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].threshold, 3.0);
    }
}
