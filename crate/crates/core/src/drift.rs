//! Drift detection over the standardized target stream and the
//! minimum-interval retrain guard.

use std::collections::VecDeque;
use std::io::Write;

use chrono::{NaiveDateTime, TimeDelta};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::fmt_timestamp;
use crate::error::DriftError;

/// Two-sample Kolmogorov-Smirnov statistic `sup_u |F_a(u) - F_b(u)|`,
/// computed exactly by a merge scan over the sorted samples.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> Result<f64, DriftError> {
    if a.is_empty() || b.is_empty() {
        return Err(DriftError::EmptySample);
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        // advance past every copy of the smaller value in both samples
        let u = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < a.len() && a[i] <= u {
            i += 1;
        }
        while j < b.len() && b[j] <= u {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftSignal {
    pub statistic: f64,
    pub threshold: f64,
}

/// Sliding-window KS detector.
#[derive(Clone, Debug)]
pub struct Kswin {
    window_size: usize,
    sample_size: usize,
    alpha: f64,
    threshold: f64,
    buffer: VecDeque<f64>,
    rng: ChaCha8Rng,
}

impl Kswin {
    pub fn new(window_size: usize, sample_size: usize, alpha: f64, seed: u64) -> Result<Self, DriftError> {
        if sample_size < 2 || 2 * sample_size > window_size {
            return Err(DriftError::Parameter(format!(
                "need 2 <= r <= W/2, got W={window_size}, r={sample_size}"
            )));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(DriftError::Parameter(format!("alpha must be in (0,1), got {alpha}")));
        }
        Ok(Kswin {
            window_size,
            sample_size,
            alpha,
            threshold: kswin_threshold(alpha, sample_size),
            buffer: VecDeque::with_capacity(window_size),
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn buffered(&self) -> usize {
        self.buffer.len()
    }

    pub fn update(&mut self, value: f64) -> Option<DriftSignal> {
        if self.buffer.len() == self.window_size {
            self.buffer.pop_front();
        }
        self.buffer.push_back(value);
        if self.buffer.len() < self.window_size {
            return None;
        }
        let r = self.sample_size;
        let older = self.window_size - r;
        let recent: Vec<f64> = self.buffer.range(older..).copied().collect();
        let reference: Vec<f64> = sample(&mut self.rng, older, r)
            .into_iter()
            .map(|i| self.buffer[i])
            .collect();
        let statistic = ks_statistic(&recent, &reference).expect("both samples have r >= 2 values");
        if statistic > self.threshold {
            self.buffer.drain(..older);
            Some(DriftSignal {
                statistic,
                threshold: self.threshold,
            })
        } else {
            None
        }
    }
}

/// `sqrt(-ln(alpha) / r) * sqrt(2)`, the equal-size two-sample bound.
pub fn kswin_threshold(alpha: f64, r: usize) -> f64 {
    (-alpha.ln() / r as f64).sqrt() * std::f64::consts::SQRT_2
}

/// Adaptive windowing: keeps a window and drops its older part whenever
/// some split point shows sub-window means further apart than a
/// Hoeffding/Bernstein-style bound allows.
#[derive(Clone, Debug)]
pub struct Adwin {
    delta: f64,
    max_window: usize,
    min_sub_window: usize,
    window: VecDeque<f64>,
}

impl Adwin {
    pub const DEFAULT_MAX_WINDOW: usize = 1000;

    pub fn new(delta: f64) -> Result<Self, DriftError> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(DriftError::Parameter(format!("delta must be in (0,1), got {delta}")));
        }
        Ok(Adwin {
            delta,
            max_window: Self::DEFAULT_MAX_WINDOW,
            min_sub_window: 5,
            window: VecDeque::new(),
        })
    }

    pub fn with_max_window(mut self, max_window: usize) -> Self {
        self.max_window = max_window.max(2 * self.min_sub_window);
        self
    }

    pub fn width(&self) -> usize {
        self.window.len()
    }

    pub fn update(&mut self, value: f64) -> Option<DriftSignal> {
        if self.window.len() == self.max_window {
            self.window.pop_front();
        }
        self.window.push_back(value);
        let n = self.window.len();
        if n < 2 * self.min_sub_window {
            return None;
        }
        let total: f64 = self.window.iter().sum();
        let mean = total / n as f64;
        let var = self.window.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        let d = (2.0 * (n as f64).ln() / self.delta).ln();
        let mut head = 0.0;
        let mut best: Option<(usize, DriftSignal)> = None;
        for (k, v) in self.window.iter().enumerate().take(n - self.min_sub_window) {
            head += v;
            let n0 = k + 1;
            if n0 < self.min_sub_window {
                continue;
            }
            let n1 = n - n0;
            let gap = (head / n0 as f64 - (total - head) / n1 as f64).abs();
            let m = 1.0 / n0 as f64 + 1.0 / n1 as f64;
            let eps = (2.0 * m * var * d).sqrt() + 2.0 / 3.0 * d * m;
            if gap > eps {
                best = Some((
                    n0,
                    DriftSignal {
                        statistic: gap,
                        threshold: eps,
                    },
                ));
            }
        }
        // drop everything before the latest significant cut
        let (cut, signal) = best?;
        self.window.drain(..cut);
        Some(signal)
    }
}

/// Detector choice for the online ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "detector", rename_all = "snake_case", deny_unknown_fields)]
pub enum DetectorConfig {
    Kswin {
        #[serde(default = "default_window")]
        window_size: usize,
        #[serde(default = "default_sample")]
        sample_size: usize,
        #[serde(default = "default_alpha")]
        alpha: f64,
    },
    Adwin {
        #[serde(default = "default_delta")]
        delta: f64,
    },
}

fn default_window() -> usize {
    100
}
fn default_sample() -> usize {
    30
}
fn default_alpha() -> f64 {
    0.005
}
fn default_delta() -> f64 {
    0.002
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig::Kswin {
            window_size: default_window(),
            sample_size: default_sample(),
            alpha: default_alpha(),
        }
    }
}

impl DetectorConfig {
    pub fn build(&self, seed: u64) -> Result<Detector, DriftError> {
        Ok(match *self {
            DetectorConfig::Kswin {
                window_size,
                sample_size,
                alpha,
            } => Detector::Kswin(Kswin::new(window_size, sample_size, alpha, seed)?),
            DetectorConfig::Adwin { delta } => Detector::Adwin(Adwin::new(delta)?),
        })
    }

    pub fn validate(&self) -> Result<(), DriftError> {
        self.build(0).map(|_| ())
    }
}

#[derive(Clone, Debug)]
pub enum Detector {
    Kswin(Kswin),
    Adwin(Adwin),
}

impl Detector {
    pub fn name(&self) -> &'static str {
        match self {
            Detector::Kswin(_) => "kswin",
            Detector::Adwin(_) => "adwin",
        }
    }

    pub fn update(&mut self, value: f64) -> Option<DriftSignal> {
        match self {
            Detector::Kswin(d) => d.update(value),
            Detector::Adwin(d) => d.update(value),
        }
    }
}

/// Blocks retrains that come sooner than `min_interval` after the last one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetrainGuard {
    pub min_interval: TimeDelta,
    pub last_retrain: Option<NaiveDateTime>,
}

impl RetrainGuard {
    pub fn new(min_interval: TimeDelta) -> Result<Self, DriftError> {
        if min_interval < TimeDelta::zero() {
            return Err(DriftError::Parameter("min_interval must be >= 0".into()));
        }
        Ok(RetrainGuard {
            min_interval,
            last_retrain: None,
        })
    }

    pub fn allows(&self, now: NaiveDateTime) -> Result<bool, DriftError> {
        match self.last_retrain {
            None => Ok(true),
            Some(last) if now < last => Err(DriftError::TimeWentBackwards {
                now: fmt_timestamp(&now),
                last: fmt_timestamp(&last),
            }),
            Some(last) => Ok(now - last >= self.min_interval),
        }
    }

    pub fn record(&mut self, now: NaiveDateTime) {
        self.last_retrain = Some(now);
    }

    /// Checks the guard and, if it allows, records `now` as the last retrain.
    pub fn try_claim(&mut self, now: NaiveDateTime) -> Result<bool, DriftError> {
        let ok = self.allows(now)?;
        if ok {
            self.record(now);
        }
        Ok(ok)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftEvent {
    #[serde(with = "crate::data::timestamp_serde")]
    pub timestamp: NaiveDateTime,
    pub detector: String,
    pub statistic: f64,
    pub threshold: f64,
    pub retrain_allowed: bool,
}

/// Appends one JSON object per line.
pub fn write_events_jsonl<W: Write>(events: &[DriftEvent], mut w: W) -> std::io::Result<()> {
    for e in events {
        serde_json::to_writer(&mut w, e)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}
