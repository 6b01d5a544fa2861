//! Training-table construction: per-split statistics, aggregated covariates
//! and the best-model label, plus the discard rule over stored scores.

use std::collections::{BTreeMap, BTreeSet};

use log::{debug, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Aggregation, CovariateValues, SplitPlan, TimeSeries, MISSING_CATEGORY};
use crate::error::{EnsembleError, Result};
use crate::evaluation::mape;
use crate::featurizer::{extract_features, reduce_features, FeatureCatalog, FeatureMatrix, ReductionConfig, ReductionReport};
use crate::predictors::PredictorSpec;

/// Error measure used to pick each window's best predictor.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Metric {
    #[default]
    #[serde(alias = "mse")]
    Mse,
    #[serde(alias = "mae")]
    Mae,
    #[serde(alias = "mape")]
    Mape,
}

impl Metric {
    /// Lower is better. MAPE on a near-zero actual scores as infinite.
    pub fn score(self, actual: &[f64], predicted: &[f64]) -> f64 {
        let n = actual.len() as f64;
        let diffs = actual.iter().zip(predicted).map(|(a, p)| a - p);
        let s = match self {
            Metric::Mse => diffs.map(|d| d * d).sum::<f64>() / n,
            Metric::Mae => diffs.map(f64::abs).sum::<f64>() / n,
            Metric::Mape => mape(actual, predicted).unwrap_or(f64::INFINITY),
        };
        if s.is_nan() {
            f64::INFINITY
        } else {
            s
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "mse" => Ok(Metric::Mse),
            "mae" => Ok(Metric::Mae),
            "mape" => Ok(Metric::Mape),
            other => Err(format!("unknown metric {other:?} (expected MSE, MAE or MAPE)")),
        }
    }
}

/// Scores every pool member on one window. Failed predictors score `inf`.
pub fn score_pool(train: &[f64], actual: &[f64], pool: &[PredictorSpec], metric: Metric) -> Vec<f64> {
    pool.iter()
        .map(|spec| match spec.fit_predict(train, actual.len()) {
            Ok(f) => metric.score(actual, &f.values),
            Err(e) => {
                debug!("{} skipped on window: {e}", spec.id);
                f64::INFINITY
            }
        })
        .collect()
}

/// Index of the smallest finite score; earliest wins ties.
fn argmin(scores: &[f64], allowed: impl Fn(usize) -> bool) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, s) in scores.iter().enumerate() {
        if !allowed(i) || !s.is_finite() {
            continue;
        }
        if best.is_none_or(|b| *s < scores[b]) {
            best = Some(i);
        }
    }
    best
}

/// Fits every predictor on `train`, scores its forecast against `actual`,
/// and returns the id of the best one (pool order breaks ties). `None` when
/// every predictor fails.
pub fn label_best_model(train: &[f64], actual: &[f64], pool: &[PredictorSpec], metric: Metric) -> Option<String> {
    argmin(&score_pool(train, actual, pool, metric), |_| true).map(|i| pool[i].id.clone())
}

/// How one covariate becomes table columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CovariateColumn {
    Sum { name: String },
    Last { name: String },
    /// One indicator per category seen during training.
    ModeOneHot { name: String, categories: Vec<String> },
    LastOneHot { name: String, categories: Vec<String> },
}

impl CovariateColumn {
    fn source(&self) -> &str {
        match self {
            CovariateColumn::Sum { name }
            | CovariateColumn::Last { name }
            | CovariateColumn::ModeOneHot { name, .. }
            | CovariateColumn::LastOneHot { name, .. } => name,
        }
    }

    fn column_names(&self) -> Vec<String> {
        match self {
            CovariateColumn::Sum { name } | CovariateColumn::Last { name } => vec![name.clone()],
            CovariateColumn::ModeOneHot { name, categories } | CovariateColumn::LastOneHot { name, categories } => {
                categories.iter().map(|c| format!("{name}={c}")).collect()
            }
        }
    }
}

/// Remembers each covariate's aggregation and the training category sets.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CovariateEncoder {
    pub columns: Vec<CovariateColumn>,
}

/// Most frequent category; the lexicographically smaller one wins ties.
pub fn modal_category(values: &[String]) -> Option<&str> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for v in values {
        *counts.entry(v.as_str()).or_default() += 1;
    }
    let mut best: Option<(&str, usize)> = None;
    for (cat, count) in counts {
        if best.is_none_or(|(_, c)| count > c) {
            best = Some((cat, count));
        }
    }
    best.map(|(c, _)| c)
}

impl CovariateEncoder {
    /// Learns category sets from the whole training series.
    pub fn fit(series: &TimeSeries) -> Self {
        let columns = series
            .covariates()
            .iter()
            .map(|cov| match (&cov.values, cov.aggregation) {
                (CovariateValues::Numeric(_), Aggregation::LastValue) => CovariateColumn::Last { name: cov.name.clone() },
                (CovariateValues::Numeric(_), _) => CovariateColumn::Sum { name: cov.name.clone() },
                (CovariateValues::Categorical(v), agg) => {
                    let categories: Vec<String> =
                        v.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
                    if agg == Aggregation::LastValue {
                        CovariateColumn::LastOneHot { name: cov.name.clone(), categories }
                    } else {
                        CovariateColumn::ModeOneHot { name: cov.name.clone(), categories }
                    }
                }
            })
            .collect();
        CovariateEncoder { columns }
    }

    pub fn column_names(&self) -> Vec<String> {
        self.columns.iter().flat_map(|c| c.column_names()).collect()
    }

    /// Aggregates rows `range` of `series` into one encoded row.
    pub fn encode(&self, series: &TimeSeries, range: std::ops::Range<usize>) -> Result<Vec<Option<f64>>> {
        let mut out = Vec::new();
        for col in &self.columns {
            let cov = series.covariate(col.source()).ok_or_else(|| {
                EnsembleError::Incompatible(format!("covariate {:?} is missing from the input", col.source()))
            })?;
            match (col, &cov.values) {
                (CovariateColumn::Sum { .. }, CovariateValues::Numeric(v)) => {
                    let finite: Vec<f64> = v[range.clone()].iter().copied().filter(|x| x.is_finite()).collect();
                    out.push((!finite.is_empty()).then(|| finite.iter().sum()));
                }
                (CovariateColumn::Last { .. }, CovariateValues::Numeric(v)) => {
                    out.push(Some(v[range.end - 1]).filter(|x| x.is_finite()));
                }
                (CovariateColumn::ModeOneHot { name, categories }, CovariateValues::Categorical(v)) => {
                    let mode = modal_category(&v[range.clone()]).unwrap_or(MISSING_CATEGORY);
                    push_one_hot(&mut out, name, categories, mode);
                }
                (CovariateColumn::LastOneHot { name, categories }, CovariateValues::Categorical(v)) => {
                    push_one_hot(&mut out, name, categories, &v[range.end - 1]);
                }
                _ => {
                    return Err(EnsembleError::Incompatible(format!(
                        "covariate {:?} changed type since training",
                        col.source()
                    ))
                    .into())
                }
            }
        }
        Ok(out)
    }
}

fn push_one_hot(out: &mut Vec<Option<f64>>, name: &str, categories: &[String], value: &str) {
    if !categories.iter().any(|c| c == value) {
        warn!("covariate {name}: category {value:?} was not seen in training; encoding as all zeros");
    }
    out.extend(categories.iter().map(|c| Some(if c == value { 1.0 } else { 0.0 })));
}

/// One row per labeled split.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingRow {
    /// Index into the split plan.
    pub split: usize,
    pub values: Vec<Option<f64>>,
    pub best_model: String,
    /// Per-predictor error on this window, aligned with `TrainingTable::pool_ids`.
    pub scores: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingTable {
    /// Reduced statistic columns followed by encoded covariate columns.
    pub columns: Vec<String>,
    pub n_statistics: usize,
    pub pool_ids: Vec<String>,
    pub metric: Metric,
    pub rows: Vec<TrainingRow>,
    /// Splits where every predictor failed.
    pub skipped_splits: Vec<usize>,
}

impl TrainingTable {
    /// Label counts in pool order, zero counts included.
    pub fn label_histogram(&self) -> Vec<(String, usize)> {
        self.pool_ids
            .iter()
            .map(|id| (id.clone(), self.rows.iter().filter(|r| &r.best_model == id).count()))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> std::result::Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["split".to_string()];
        header.extend(self.columns.iter().cloned());
        header.push("best_model".into());
        w.write_record(&header)?;
        for row in &self.rows {
            let mut rec = vec![row.split.to_string()];
            rec.extend(row.values.iter().map(|v| v.map(|x| x.to_string()).unwrap_or_default()));
            rec.push(row.best_model.clone());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn histogram_text(hist: &[(String, usize)]) -> String {
    hist.iter().map(|(id, c)| format!("{id}={c}")).collect::<Vec<_>>().join(", ")
}

/// Options for [`build_training_table`].
#[derive(Clone, Debug)]
pub struct TableOptions<'a> {
    pub catalog: &'a FeatureCatalog,
    pub metric: Metric,
    pub reduction: &'a ReductionConfig,
    /// Keep only this many of the most recent rows.
    pub cap: Option<usize>,
}

/// Featurizes and labels every split, reduces the statistic columns and
/// appends aggregated covariates. Rows come out in split order regardless
/// of how the per-split work is scheduled.
pub fn build_training_table(
    series: &TimeSeries,
    plan: &SplitPlan,
    pool: &[PredictorSpec],
    opts: &TableOptions<'_>,
) -> Result<(TrainingTable, ReductionReport, CovariateEncoder)> {
    if pool.is_empty() {
        return Err(EnsembleError::EmptyPool.into());
    }
    let target = series.target();
    if plan.splits.last().is_some_and(|s| s.predict_end > target.len()) {
        return Err(EnsembleError::ShortHistory {
            needed: plan.splits.last().map_or(0, |s| s.predict_end),
            got: target.len(),
        }
        .into());
    }
    let encoder = CovariateEncoder::fit(series);

    type Labeled = Option<(Vec<Option<f64>>, Vec<f64>, usize)>;
    let per_split: Vec<Labeled> = plan
        .splits
        .par_iter()
        .map(|split| -> Result<Labeled> {
            let train = &target[split.train()];
            let scores = score_pool(train, &target[split.predict()], pool, opts.metric);
            let Some(best) = argmin(&scores, |_| true) else {
                return Ok(None);
            };
            let stats = extract_features(train, opts.catalog)?;
            Ok(Some((stats, scores, best)))
        })
        .collect::<Result<_>>()?;

    let mut stats_rows = Vec::new();
    let mut labeled = Vec::new();
    let mut skipped = Vec::new();
    for (i, item) in per_split.into_iter().enumerate() {
        match item {
            Some((stats, scores, best)) => {
                stats_rows.push(stats);
                labeled.push((i, scores, best));
            }
            None => {
                warn!("split {i}: every predictor failed; row skipped");
                skipped.push(i);
            }
        }
    }
    if labeled.is_empty() {
        return Err(EnsembleError::NoRows.into());
    }

    let pool_ids: Vec<String> = pool.iter().map(|p| p.id.clone()).collect();
    let hist: Vec<(String, usize)> = pool_ids
        .iter()
        .enumerate()
        .map(|(k, id)| (id.clone(), labeled.iter().filter(|(_, _, b)| *b == k).count()))
        .collect();
    if hist.iter().filter(|(_, c)| *c > 0).count() < 2 {
        return Err(EnsembleError::SingleLabel(histogram_text(&hist)).into());
    }

    let matrix = FeatureMatrix::new(opts.catalog.names(), stats_rows)?;
    let class_index: Vec<f64> = labeled.iter().map(|(_, _, b)| *b as f64).collect();
    let (reduced, report) = reduce_features(&matrix, &class_index, opts.reduction)?;

    let mut columns = reduced.columns.clone();
    let cov_names = encoder.column_names();
    if let Some(dup) = cov_names.iter().find(|c| columns.contains(c)) {
        return Err(EnsembleError::Incompatible(format!("covariate column {dup:?} collides with a statistic")).into());
    }
    columns.extend(cov_names);

    let mut rows = Vec::with_capacity(labeled.len());
    for ((split_idx, scores, best), stats) in labeled.into_iter().zip(reduced.rows) {
        let split = &plan.splits[split_idx];
        let mut values = stats;
        values.extend(encoder.encode(series, split.train())?);
        rows.push(TrainingRow {
            split: split_idx,
            values,
            best_model: pool_ids[best].clone(),
            scores,
        });
    }
    if let Some(cap) = opts.cap {
        if rows.len() > cap {
            rows.drain(..rows.len() - cap);
        }
    }
    let table = TrainingTable {
        columns,
        n_statistics: reduced.columns.len(),
        pool_ids,
        metric: opts.metric,
        rows,
        skipped_splits: skipped,
    };
    if table.label_histogram().iter().filter(|(_, c)| *c > 0).count() < 2 {
        return Err(EnsembleError::SingleLabel(histogram_text(&table.label_histogram())).into());
    }
    Ok((table, report, encoder))
}

/// Outcome of [`apply_discard_rule`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscardOutcome {
    pub surviving: Vec<String>,
    /// Discarded ids in the order they were removed.
    pub discarded: Vec<String>,
    pub passes: usize,
}

/// Predictors that are best on at most one row leave the pool and their
/// rows move to the best surviving predictor by stored score. Repeats
/// until no further predictor drops out.
pub fn apply_discard_rule(table: &mut TrainingTable) -> Result<DiscardOutcome> {
    let k = table.pool_ids.len();
    let mut alive = vec![true; k];
    let mut discarded = Vec::new();
    let mut passes = 0;
    loop {
        let mut wins = vec![0usize; k];
        for row in &table.rows {
            let idx = table.pool_ids.iter().position(|id| *id == row.best_model).expect("label from pool");
            wins[idx] += 1;
        }
        let losers: Vec<usize> = (0..k).filter(|&i| alive[i] && wins[i] <= 1).collect();
        if losers.is_empty() {
            break;
        }
        passes += 1;
        if losers.len() == alive.iter().filter(|a| **a).count() {
            let hist: Vec<(String, usize)> = (0..k)
                .filter(|&i| alive[i])
                .map(|i| (table.pool_ids[i].clone(), wins[i]))
                .collect();
            return Err(EnsembleError::PoolExhausted(histogram_text(&hist)).into());
        }
        for &i in &losers {
            alive[i] = false;
            discarded.push(table.pool_ids[i].clone());
        }
        for row in &mut table.rows {
            let current = table.pool_ids.iter().position(|id| *id == row.best_model).expect("label from pool");
            if !alive[current] {
                let next = argmin(&row.scores, |i| alive[i]).ok_or_else(|| {
                    EnsembleError::PoolExhausted(format!("split {} has no finite score among survivors", row.split))
                })?;
                row.best_model = table.pool_ids[next].clone();
            }
        }
    }
    Ok(DiscardOutcome {
        surviving: (0..k).filter(|&i| alive[i]).map(|i| table.pool_ids[i].clone()).collect(),
        discarded,
        passes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Covariate;
    use crate::error::Error;
    use crate::predictors::PredictorKind;
    use chrono::NaiveDate;

    fn specs() -> Vec<PredictorSpec> {
        vec![
            PredictorSpec::new("a", PredictorKind::Drift),
            PredictorSpec::new("b", PredictorKind::Drift),
        ]
    }

    #[test]
    fn metric_scores() {
        assert_eq!(Metric::Mae.score(&[5.0, 5.0], &[5.0, 5.0]), 0.0);
        assert_eq!(Metric::Mae.score(&[5.0, 5.0], &[4.0, 6.0]), 1.0);
        assert_eq!(Metric::Mse.score(&[1.0, 1.0], &[3.0, 1.0]), 2.0);
        assert_eq!(Metric::Mape.score(&[0.0], &[1.0]), f64::INFINITY);
        assert_eq!("mae".parse::<Metric>().unwrap(), Metric::Mae);
    }

    #[test]
    fn identical_predictors_tie_to_first() {
        let train = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(label_best_model(&train, &[5.0, 6.0], &specs(), Metric::Mse).as_deref(), Some("a"));
    }

    #[test]
    fn exact_seasonal_match_wins() {
        let pool = vec![
            PredictorSpec::new("drift", PredictorKind::Drift),
            PredictorSpec::new("seasonal_naive", PredictorKind::SeasonalNaive { season: 3 }),
        ];
        let train = [1.0, 5.0, 2.0, 1.0, 5.0, 2.0];
        let scores = score_pool(&train, &[1.0, 5.0, 2.0], &pool, Metric::Mae);
        assert_eq!(scores[1], 0.0);
        assert_eq!(label_best_model(&train, &[1.0, 5.0, 2.0], &pool, Metric::Mae).as_deref(), Some("seasonal_naive"));
    }

    #[test]
    fn covariate_aggregation() {
        let start = NaiveDate::from_ymd_opt(2024, 1, 1).unwrap();
        let series = TimeSeries::daily(start, vec![1.0; 3])
            .unwrap();
        let series = TimeSeries::new(
            series.timestamps().to_vec(),
            vec![1.0; 3],
            vec![
                Covariate::numeric("load", vec![1.0, 2.0, 3.0]),
                Covariate::categorical("tag", vec!["A".into(), "A".into(), "B".into()]),
            ],
        )
        .unwrap();
        let enc = CovariateEncoder::fit(&series);
        assert_eq!(enc.column_names(), vec!["load", "tag=A", "tag=B"]);
        assert_eq!(enc.encode(&series, 0..3).unwrap(), vec![Some(6.0), Some(1.0), Some(0.0)]);
        // tie between A and B goes to A
        assert_eq!(enc.encode(&series, 1..3).unwrap()[1..], [Some(1.0), Some(0.0)]);
        assert_eq!(modal_category(&["B".to_string(), "A".to_string()]), Some("A"));
    }

    fn crafted(labels: &[&str], scores: &[[f64; 3]]) -> TrainingTable {
        TrainingTable {
            columns: vec![],
            n_statistics: 0,
            pool_ids: vec!["p".into(), "q".into(), "r".into()],
            metric: Metric::Mae,
            rows: labels
                .iter()
                .zip(scores)
                .enumerate()
                .map(|(i, (l, s))| TrainingRow { split: i, values: vec![], best_model: l.to_string(), scores: s.to_vec() })
                .collect(),
            skipped_splits: vec![],
        }
    }

    #[test]
    fn single_win_is_discarded_two_is_kept() {
        let mut t = crafted(
            &["p", "p", "q", "q", "r"],
            &[[0.0, 1.0, 2.0], [0.0, 1.0, 2.0], [1.0, 0.0, 2.0], [1.0, 0.0, 2.0], [2.0, 1.0, 0.0]],
        );
        let out = apply_discard_rule(&mut t).unwrap();
        assert_eq!(out.discarded, vec!["r"]);
        assert_eq!(out.surviving, vec!["p", "q"]);
        assert_eq!(t.rows[4].best_model, "q");
    }

    #[test]
    fn simultaneous_losers_leave_together() {
        let mut t = crafted(
            &["p", "p", "p", "q", "r"],
            &[[0.0, 1.0, 2.0], [0.0, 1.0, 2.0], [0.0, 1.0, 2.0], [1.0, 0.0, 2.0], [2.0, 1.0, 0.0]],
        );
        let out = apply_discard_rule(&mut t).unwrap();
        assert_eq!(out.surviving, vec!["p"]);
        assert_eq!(out.discarded, vec!["q", "r"]);
        assert!(t.rows.iter().all(|r| r.best_model == "p"));
    }

    #[test]
    fn all_losers_is_an_error() {
        let mut t = crafted(&["p", "q", "r"], &[[0.0, 1.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 0.0]]);
        assert!(matches!(
            apply_discard_rule(&mut t),
            Err(Error::Ensemble(EnsembleError::PoolExhausted(_)))
        ));
    }

    /// Recomputes every label from scratch on each pass.
    fn brute_force(scores: &[Vec<f64>], k: usize) -> Option<(Vec<usize>, Vec<usize>)> {
        let mut alive = vec![true; k];
        for _ in 0..=k {
            let labels: Vec<usize> = scores.iter().map(|s| argmin(s, |i| alive[i]).unwrap()).collect();
            let losers: Vec<usize> = (0..k)
                .filter(|&i| alive[i] && labels.iter().filter(|l| **l == i).count() <= 1)
                .collect();
            if losers.is_empty() {
                return Some(((0..k).filter(|&i| alive[i]).collect(), labels));
            }
            if losers.len() == alive.iter().filter(|a| **a).count() {
                return None;
            }
            for i in losers {
                alive[i] = false;
            }
        }
        unreachable!("fixed point within k passes")
    }

    proptest::proptest! {
        #[test]
        fn discard_matches_brute_force(
            raw in proptest::collection::vec(proptest::collection::vec(0u8..6, 4), 1..25)
        ) {
            let scores: Vec<Vec<f64>> = raw.iter().map(|r| r.iter().map(|v| f64::from(*v)).collect()).collect();
            let ids: Vec<String> = (0..4).map(|i| format!("m{i}")).collect();
            let mut table = TrainingTable {
                columns: vec![],
                n_statistics: 0,
                pool_ids: ids.clone(),
                metric: Metric::Mae,
                rows: scores
                    .iter()
                    .enumerate()
                    .map(|(i, s)| TrainingRow {
                        split: i,
                        values: vec![],
                        best_model: ids[argmin(s, |_| true).unwrap()].clone(),
                        scores: s.clone(),
                    })
                    .collect(),
                skipped_splits: vec![],
            };
            match (apply_discard_rule(&mut table), brute_force(&scores, 4)) {
                (Ok(out), Some((alive, labels))) => {
                    let expect: Vec<String> = alive.iter().map(|i| ids[*i].clone()).collect();
                    proptest::prop_assert_eq!(out.surviving, expect);
                    proptest::prop_assert!(out.passes <= 4);
                    for (row, l) in table.rows.iter().zip(labels) {
                        proptest::prop_assert_eq!(&row.best_model, &ids[l]);
                    }
                }
                (Err(_), None) => {}
                (a, b) => proptest::prop_assert!(false, "disagreement: {:?} vs {:?}", a.map(|o| o.surviving), b),
            }
        }
    }
}
