use chrono::{NaiveDate, TimeDelta};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rulecast_core::drift::DetectorConfig;
use rulecast_core::ensemble::{
    build_training_table, combine, EnsembleConfig, EnsembleModel, Metric, OnlineConfig, OnlineEnsemble, TableOptions,
};
use rulecast_core::featurizer::default_catalog;
use rulecast_core::predictors::{default_models_db, Forecast, PredictorKind, PredictorSpec};
use rulecast_core::rulefit::ProbabilityVector;
use rulecast_core::synthetic::{generate, BenchmarkSpec, Regime};
use rulecast_core::{ReductionConfig, SplitPlan, TimeSeries};

fn start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2021, 3, 1).unwrap()
}

/// Alternating 100-point blocks: exact period-7 sinusoid, then a straight line.
fn sine_and_line(blocks: usize) -> TimeSeries {
    let mut values = Vec::new();
    for b in 0..blocks {
        for t in 0..100 {
            let v = if b % 2 == 0 {
                50.0 + 8.0 * (std::f64::consts::TAU * t as f64 / 7.0).sin()
            } else {
                50.0 + 0.5 * t as f64
            };
            values.push(v);
        }
    }
    TimeSeries::daily(start(), values).unwrap()
}

fn sine_and_line_pool() -> Vec<PredictorSpec> {
    vec![
        PredictorSpec::new("seasonal_naive", PredictorKind::SeasonalNaive { season: 7 }),
        PredictorSpec::new("drift", PredictorKind::Drift),
    ]
}

fn loose_reduction() -> ReductionConfig {
    ReductionConfig {
        alpha: 0.05,
        ..ReductionConfig::default()
    }
}

#[test]
fn regime_labels_cover_both_families() {
    let series = sine_and_line(4);
    let plan = SplitPlan::new(series.len(), 30, 5, 1, None).unwrap();
    let (table, _, _) = build_training_table(
        &series,
        &plan,
        &sine_and_line_pool(),
        &TableOptions {
            catalog: &default_catalog(),
            metric: Metric::Mse,
            reduction: &loose_reduction(),
            cap: None,
        },
    )
    .unwrap();
    let hist = table.label_histogram();
    assert!(hist.iter().all(|(_, c)| *c > 0), "{hist:?}");
    assert_eq!(table.len() + table.skipped_splits.len(), plan.len());
}

#[test]
fn cap_keeps_most_recent_rows() {
    let series = sine_and_line(1).with_target({
        // a sine with a kink so both predictors win somewhere
        let mut v: Vec<f64> = (0..100).map(|t| 50.0 + 8.0 * (std::f64::consts::TAU * t as f64 / 7.0).sin()).collect();
        for (t, x) in v.iter_mut().enumerate().skip(60) {
            *x = 50.0 + 0.7 * t as f64;
        }
        v
    })
    .unwrap();
    let plan = SplitPlan::new(100, 30, 5, 1, None).unwrap();
    assert_eq!(plan.len(), 66);
    let opts = |cap| TableOptions {
        catalog: Box::leak(Box::new(default_catalog())),
        metric: Metric::Mse,
        reduction: Box::leak(Box::new(loose_reduction())),
        cap,
    };
    let (full, _, _) = build_training_table(&series, &plan, &sine_and_line_pool(), &opts(None)).unwrap();
    let (capped, _, _) = build_training_table(&series, &plan, &sine_and_line_pool(), &opts(Some(50))).unwrap();
    assert_eq!(full.len(), 66);
    assert_eq!(capped.len(), 50);
    let splits: Vec<usize> = capped.rows.iter().map(|r| r.split).collect();
    assert_eq!(splits, (16..66).collect::<Vec<_>>());
    assert_eq!(capped.rows[..], full.rows[16..]);
}

#[test]
fn combine_worked_examples() {
    let fc = |id: &str, v: Vec<f64>| Forecast {
        predictor_id: id.into(),
        values: v,
        fallback: None,
    };
    let ids = |k: usize| (0..k).map(|i| format!("p{i}")).collect::<Vec<_>>();

    let y = ProbabilityVector::new(ids(2), vec![0.5, 0.5]);
    let out = combine(&y, vec![fc("p0", vec![10.0, 10.0]), fc("p1", vec![20.0, 30.0])], None).unwrap();
    assert_eq!(out.values, vec![15.0, 20.0]);

    let y = ProbabilityVector::new(ids(3), vec![0.5, 0.3, 0.2]);
    let p = vec![fc("p0", vec![1.0]), fc("p1", vec![2.0]), fc("p2", vec![100.0])];
    let out = combine(&y, p, Some(2)).unwrap();
    let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12);
    assert!(close(&out.probabilities.values, &[0.625, 0.375, 0.0]), "{:?}", out.probabilities.values);
    assert!(close(&out.values, &[0.625 + 0.375 * 2.0]));

    let y = ProbabilityVector::new(ids(3), vec![1.0, 0.0, 0.0]);
    let p = vec![fc("p0", vec![0.1, 0.7]), fc("p1", vec![3.0, 4.0]), fc("p2", vec![5.0, 6.0])];
    assert_eq!(combine(&y, p, None).unwrap().values, vec![0.1, 0.7]);
}

fn benchmark_config() -> EnsembleConfig {
    let mut cfg = EnsembleConfig::new(28, 7, default_models_db(7));
    cfg.reduction = loose_reduction();
    cfg
}

#[test]
fn seasonal_windows_weight_seasonal_naive() {
    let bench = generate(&BenchmarkSpec::default()).unwrap();
    let cfg = benchmark_config();
    let model = EnsembleModel::train(&bench.series, &cfg).unwrap().model;
    let ends: Vec<usize> = bench
        .segments
        .iter()
        .filter(|s| s.regime == Regime::Seasonal)
        .flat_map(|s| s.start + cfg.n..=s.end)
        .collect();
    let windows: Vec<usize> = (0..50).map(|k| ends[k * ends.len() / 50]).collect();
    let hits = windows
        .iter()
        .filter(|&&end| {
            let history = bench.series.slice(0..end).unwrap();
            model.probabilities(&history).unwrap().argmax_id() == "seasonal_naive"
        })
        .count();
    assert!(hits as f64 >= 0.8 * windows.len() as f64, "{hits}/{}", windows.len());
}

#[test]
fn predict_next_is_deterministic_and_checks_length() {
    let bench = generate(&BenchmarkSpec {
        cycles: 1,
        ..BenchmarkSpec::default()
    })
    .unwrap();
    let model = EnsembleModel::train(&bench.series, &benchmark_config()).unwrap().model;
    let a = model.predict_next(&bench.series, 7).unwrap();
    let b = model.predict_next(&bench.series, 7).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.values.len(), 7);
    assert!((a.probabilities.values.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
    let short = bench.series.slice(0..27).unwrap();
    assert!(model.predict_next(&short, 7).is_err());

    let dir = tempfile::tempdir().unwrap();
    model.save(dir.path()).unwrap();
    let loaded = EnsembleModel::load(dir.path()).unwrap();
    assert_eq!(loaded.predict_next(&bench.series, 7).unwrap(), a);
}

/// Noisy sinusoid of `len` points with `shift` added from index `at` on.
fn stream_series(seed: u64, len: usize, at: usize, shift: f64) -> TimeSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 2.0).unwrap();
    let values = (0..len)
        .map(|t| {
            let base = 50.0 + 3.0 * (std::f64::consts::TAU * t as f64 / 7.0).sin() + noise.sample(&mut rng);
            if t >= at {
                base + shift
            } else {
                base
            }
        })
        .collect();
    TimeSeries::daily(start(), values).unwrap()
}

fn small_config() -> EnsembleConfig {
    let mut cfg = EnsembleConfig::new(
        21,
        7,
        vec![
            PredictorSpec::new("seasonal_naive", PredictorKind::SeasonalNaive { season: 7 }),
            PredictorSpec::new("drift", PredictorKind::Drift),
            PredictorSpec::new("ses", PredictorKind::Ses { alpha: 0.3 }),
        ],
    );
    cfg.reduction = loose_reduction();
    cfg.rulefit.n_trees = 20;
    cfg.table_cap = Some(150);
    cfg
}

fn online_config(seed: u64, days: i64) -> OnlineConfig {
    OnlineConfig {
        detector: DetectorConfig::default(),
        min_interval: TimeDelta::days(days),
        seed,
    }
}

/// Streams points `from..` of `series` one at a time; returns retrain indices.
fn replay(online: &mut OnlineEnsemble, series: &TimeSeries, from: usize) -> Vec<usize> {
    let mut at = Vec::new();
    for i in from..series.len() {
        let step = online.step(&series.slice(i..i + 1).unwrap(), 1).unwrap();
        assert_eq!(step.forecast.values.len(), 1);
        if step.retrain.is_some() {
            at.push(i);
        }
    }
    at
}

#[test]
fn injected_shift_triggers_a_retrain() {
    let (train_len, shift_at, len) = (200, 350, 450);
    let mut hits = 0;
    for seed in 0..50 {
        let series = stream_series(seed, len, shift_at, 3.0 * 2.9);
        let history = series.slice(0..train_len).unwrap();
        let model = EnsembleModel::train(&history, &small_config()).unwrap().model;
        let sd = model.standardization.std_dev;
        assert!((2.4..3.4).contains(&sd), "{sd}");
        let mut online = OnlineEnsemble::new(model, history, &online_config(seed, 14)).unwrap();
        let retrains = replay(&mut online, &series, train_len);
        if retrains.iter().any(|&i| (shift_at..shift_at + 60).contains(&i)) {
            hits += 1;
        }
        // every retrain the guard let through is at least 14 days after the previous one
        assert!(retrains.windows(2).all(|w| w[1] - w[0] >= 14));
        assert_eq!(online.retrains().len(), retrains.len());
        let allowed = online.drift_log().iter().filter(|e| e.retrain_allowed).count();
        assert_eq!(allowed, retrains.len());
    }
    assert!(hits >= 40, "{hits}/50 runs retrained within 2r of the shift");
}

#[test]
fn long_guard_allows_at_most_one_retrain() {
    let series = stream_series(5, 450, 350, 9.0);
    let history = series.slice(0..200).unwrap();
    let model = EnsembleModel::train(&history, &small_config()).unwrap().model;
    let mut online = OnlineEnsemble::new(model, history, &online_config(5, 1000)).unwrap();
    assert!(replay(&mut online, &series, 200).len() <= 1);
}

#[test]
fn quiet_stream_never_retrains() {
    let noisy = stream_series(9, 200, usize::MAX, 0.0);
    let model = EnsembleModel::train(&noisy, &small_config()).unwrap().model;
    // an exactly periodic continuation has a stable value distribution
    let values: Vec<f64> = (0..400)
        .map(|t| if t < 200 { noisy.target()[t] } else { 50.0 + 3.0 * (std::f64::consts::TAU * t as f64 / 7.0).sin() })
        .collect();
    let series = TimeSeries::daily(start(), values).unwrap();
    let mut online = OnlineEnsemble::new(model, noisy, &online_config(9, 14)).unwrap();
    assert!(replay(&mut online, &series, 200).is_empty());
    assert!(online.drift_log().is_empty());
    assert_eq!(online.history().len(), 400);
}
