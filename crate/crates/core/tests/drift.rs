use chrono::{NaiveDate, NaiveDateTime, TimeDelta};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rulecast_core::drift::{ks_statistic, Adwin, Kswin, RetrainGuard};

fn gaussian(rng: &mut ChaCha8Rng, mean: f64, sd: f64, n: usize) -> Vec<f64> {
    let d = Normal::new(mean, sd).unwrap();
    (0..n).map(|_| d.sample(rng)).collect()
}

fn day(d: i64) -> NaiveDateTime {
    NaiveDate::from_ymd_opt(2024, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap() + TimeDelta::days(d)
}

#[test]
fn ks_worked_examples() {
    assert_eq!(ks_statistic(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
    assert_eq!(ks_statistic(&[0.0, 0.0, 0.0], &[1.0, 1.0, 1.0]).unwrap(), 1.0);
    assert_eq!(ks_statistic(&[1.0, 2.0], &[2.0, 3.0]).unwrap(), 0.5);
}

/// First firing at or after `switch`, as an offset from it.
fn first_fire_after(values: &[f64], switch: usize, mut update: impl FnMut(f64) -> bool) -> Option<usize> {
    let mut first = None;
    for (i, v) in values.iter().enumerate() {
        if update(*v) && i >= switch && first.is_none() {
            first = Some(i - switch);
        }
    }
    first
}

#[test]
fn kswin_detects_a_mean_switch() {
    let hits = (0..100u64)
        .filter(|&seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut stream = gaussian(&mut rng, 0.0, 1.0, 300);
            stream.extend(gaussian(&mut rng, 5.0, 1.0, 200));
            let mut det = Kswin::new(100, 30, 0.005, seed).unwrap();
            first_fire_after(&stream, 300, |v| det.update(v).is_some()).is_some_and(|d| d < 60)
        })
        .count();
    assert!(hits >= 90, "{hits}/100 runs fired within 2r");
}

#[test]
fn kswin_null_false_alarm_rate() {
    let (mut fires, mut tests) = (0usize, 0usize);
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let mut det = Kswin::new(100, 30, 0.005, seed).unwrap();
        for v in gaussian(&mut rng, 0.0, 1.0, 10_000) {
            let full = det.buffered() >= 99;
            let fired = det.update(v).is_some();
            tests += usize::from(full);
            fires += usize::from(fired);
        }
    }
    let rate = fires as f64 / tests as f64;
    assert!(rate <= 5.0 * 0.005, "false alarm rate {rate}");
}

#[test]
fn kswin_constant_stream_never_fires() {
    let mut det = Kswin::new(100, 30, 0.005, 0).unwrap();
    assert!((0..1000).all(|_| det.update(2.5).is_none()));
}

fn adwin_delay(delta: f64, seed: u64) -> Option<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stream = gaussian(&mut rng, 0.0, 0.3, 500);
    stream.extend(gaussian(&mut rng, 1.0, 0.3, 300));
    let mut det = Adwin::new(delta).unwrap();
    first_fire_after(&stream, 500, |v| det.update(v).is_some())
}

#[test]
fn adwin_detects_level_switch() {
    for seed in 0..50 {
        let delay = adwin_delay(0.002, seed);
        assert!(delay.is_some_and(|d| d < 200), "seed {seed}: {delay:?}");
    }
    let mut det = Adwin::new(0.002).unwrap();
    assert!((0..2000).all(|_| det.update(1.0).is_none()));
}

#[test]
fn adwin_delay_is_monotone_in_delta() {
    let median = |delta: f64| {
        let mut d: Vec<usize> = (0..50).map(|s| adwin_delay(delta, s).unwrap_or(usize::MAX)).collect();
        d.sort_unstable();
        d[25]
    };
    let deltas = [1e-6, 1e-4, 0.002, 0.05, 0.3];
    let medians: Vec<usize> = deltas.iter().map(|&d| median(d)).collect();
    assert!(medians.windows(2).all(|w| w[1] <= w[0]), "{medians:?}");
}

#[test]
fn guard_retrains_on_days_one_and_twenty() {
    let mut guard = RetrainGuard::new(TimeDelta::days(14)).unwrap();
    let retrained: Vec<i64> = [1, 7, 20].into_iter().filter(|&d| guard.try_claim(day(d)).unwrap()).collect();
    assert_eq!(retrained, vec![1, 20]);

    let mut open = RetrainGuard::new(TimeDelta::zero()).unwrap();
    assert!((0..5).all(|d| open.try_claim(day(d)).unwrap()));

    let mut edge = RetrainGuard::new(TimeDelta::days(14)).unwrap();
    edge.record(day(10));
    assert!(edge.allows(day(24)).unwrap());
    assert!(!edge.allows(day(23)).unwrap());
    assert!(edge.allows(day(9)).is_err());
}
