use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rulecast_core::rulefit::{fit_rule_model, FeatureRow, LabeledRows, Op, RuleFitConfig, RuleModel};

fn names(k: usize) -> Vec<String> {
    (0..k).map(|j| format!("f{j}")).collect()
}

fn ids(k: usize) -> Vec<String> {
    (0..k).map(|j| format!("c{j}")).collect()
}

fn fit(rows: &[Vec<Option<f64>>], labels: &[usize], classes: usize, cfg: &RuleFitConfig) -> RuleModel {
    let feature_names = names(rows[0].len());
    let class_ids = ids(classes);
    fit_rule_model(
        LabeledRows {
            catalog_version: "test",
            feature_names: &feature_names,
            rows,
            labels,
            class_ids: &class_ids,
        },
        cfg,
    )
    .unwrap()
}

#[test]
fn clean_threshold_is_recovered() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let xs: Vec<f64> = (0..200).map(|_| rng.random_range(-1.0..1.0)).collect();
    let rows: Vec<Vec<Option<f64>>> = xs.iter().map(|&x| vec![Some(x), Some(rng.random_range(0.0..1.0))]).collect();
    let labels: Vec<usize> = xs.iter().map(|&x| usize::from(x <= 0.0)).collect();
    let model = fit(&rows, &labels, 2, &RuleFitConfig::default());

    let max_neg = xs.iter().copied().filter(|x| *x <= 0.0).fold(f64::NEG_INFINITY, f64::max);
    let min_pos = xs.iter().copied().filter(|x| *x > 0.0).fold(f64::INFINITY, f64::min);
    let single = model.rules.iter().any(|r| {
        r.conjuncts.len() == 1
            && r.conjuncts[0].feature == "f0"
            && r.conjuncts[0].threshold >= max_neg
            && r.conjuncts[0].threshold <= min_pos
    });
    assert!(single, "no single-conjunct split on f0 between {max_neg} and {min_pos}");

    let correct = rows
        .iter()
        .zip(&labels)
        .filter(|(row, &label)| model.predict_values(row).argmax() == label)
        .count();
    assert_eq!(correct, rows.len());
}

#[test]
fn no_signal_falls_back_to_base_rates() {
    let rows = vec![vec![Some(1.0), Some(2.0)]; 100];
    let labels: Vec<usize> = (0..100).map(|i| usize::from(i >= 60)).collect();
    let model = fit(&rows, &labels, 2, &RuleFitConfig::default());
    assert!(model.intercept_only);
    assert!(model.rules.is_empty());
    let p = model.predict_values(&rows[0]);
    assert!((p.values[0] - 0.6).abs() <= 0.05, "{:?}", p.values);
    assert!((p.values[1] - 0.4).abs() <= 0.05, "{:?}", p.values);
}

#[test]
fn support_counts_satisfied_rows() {
    let rows: Vec<Vec<Option<f64>>> = (0..10).map(|i| vec![Some(i as f64)]).collect();
    let labels: Vec<usize> = (0..10).map(|i| usize::from(i >= 6)).collect();
    let cfg = RuleFitConfig {
        min_samples_leaf: 1,
        ..RuleFitConfig::default()
    };
    let model = fit(&rows, &labels, 2, &cfg);
    assert!(!model.rules.is_empty());
    for rule in &model.rules {
        let count = rows.iter().filter(|r| rule.holds(r)).count();
        assert_eq!(rule.support_count, count, "{rule}");
        assert_eq!(rule.support, count as f64 / 10.0, "{rule}");
    }
    // the separating split keeps rows 6..9 on its upper side
    let upper = model
        .rules
        .iter()
        .find(|r| r.conjuncts.len() == 1 && r.conjuncts[0].op == Op::Gt && (5.0..6.0).contains(&r.conjuncts[0].threshold))
        .expect("split between 5 and 6");
    assert_eq!(upper.support, 0.4);
}

#[test]
fn equal_scores_give_uniform_weights() {
    for classes in 2..6 {
        let rows = vec![vec![Some(0.0)]; 10 * classes];
        let labels: Vec<usize> = (0..10 * classes).map(|i| i % classes).collect();
        let model = fit(&rows, &labels, classes, &RuleFitConfig::default());
        let p = model.predict_values(&rows[0]);
        for v in &p.values {
            assert!((v - 1.0 / classes as f64).abs() < 1e-9, "{:?}", p.values);
        }
    }
}

#[test]
fn catalog_version_is_checked() {
    let rows: Vec<Vec<Option<f64>>> = (0..20).map(|i| vec![Some(i as f64)]).collect();
    let labels: Vec<usize> = (0..20).map(|i| usize::from(i >= 10)).collect();
    let model = fit(&rows, &labels, 2, &RuleFitConfig::default());
    let row = FeatureRow {
        catalog_version: "other".into(),
        names: names(1),
        values: vec![Some(3.0)],
    };
    assert!(model.predict_proba(&row).is_err());
    let row = FeatureRow {
        catalog_version: "test".into(),
        ..row
    };
    assert!(model.predict_proba(&row).is_ok());
}

fn random_table(seed: u64) -> (Vec<Vec<Option<f64>>>, Vec<usize>, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(12..60);
    let k = rng.random_range(1..5);
    let classes = rng.random_range(2..5);
    let rows = (0..n)
        .map(|_| {
            (0..k)
                .map(|_| (rng.random::<f64>() > 0.05).then(|| rng.random_range(-5.0..5.0)))
                .collect()
        })
        .collect();
    let mut labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..classes)).collect();
    labels[0] = 0;
    labels[1] = 1;
    (rows, labels, classes)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn probabilities_are_a_distribution(seed in any::<u64>(), probes in prop::collection::vec(prop::option::weighted(0.9, -10.0f64..10.0), 4)) {
        let (rows, labels, classes) = random_table(seed);
        let cfg = RuleFitConfig { n_trees: 10, min_samples_leaf: 2, seed, ..RuleFitConfig::default() };
        let model = fit(&rows, &labels, classes, &cfg);
        let width = rows[0].len();
        for row in rows.iter().chain(std::iter::once(&probes[..width].to_vec())) {
            let p = model.predict_values(row);
            let total: f64 = p.values.iter().sum();
            prop_assert!((total - 1.0).abs() <= 1e-9);
            prop_assert!(p.values.iter().all(|v| (0.0..=1.0).contains(v)));
        }
        for rule in &model.rules {
            let count = rows.iter().filter(|r| rule.holds(r)).count();
            prop_assert_eq!(rule.support_count, count);
        }
    }
}
