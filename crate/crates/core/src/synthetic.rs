//! Seeded regime-switching benchmark: segments cycle through a sinusoid, a
//! linear trend and a noise burst, each continuing from the previous level.
//!
//! Each regime is driven by the process its matching predictor forecasts
//! optimally. Sinusoidal segments are a seasonal random walk
//! (`x_t = x_{t-s} + e_t`, started from a sine profile), trend segments are a
//! random walk with drift, and bursts are white noise around the level.

use chrono::NaiveDate;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::data::{Covariate, TimeSeries};
use crate::error::DataError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Seasonal,
    Trend,
    Noise,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Seasonal => "seasonal",
            Regime::Trend => "trend",
            Regime::Noise => "noise",
        }
    }

    const CYCLE: [Regime; 3] = [Regime::Seasonal, Regime::Trend, Regime::Noise];
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenchmarkSpec {
    pub segment_len: usize,
    /// Passes through the three regimes.
    pub cycles: usize,
    pub period: usize,
    pub level: f64,
    pub amplitude: f64,
    /// Per-step slope magnitude; the sign alternates between trend segments.
    pub slope: f64,
    /// Innovation scale of the seasonal and trend random walks.
    pub noise_sd: f64,
    /// Noise inside burst segments.
    pub burst_sd: f64,
    pub seed: u64,
}

impl Default for BenchmarkSpec {
    fn default() -> Self {
        BenchmarkSpec {
            segment_len: 100,
            cycles: 3,
            period: 7,
            level: 100.0,
            amplitude: 10.0,
            slope: 0.4,
            noise_sd: 0.5,
            burst_sd: 6.0,
            seed: 7,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub regime: Regime,
    pub start: usize,
    pub end: usize,
}

#[derive(Clone, Debug)]
pub struct Benchmark {
    pub series: TimeSeries,
    pub segments: Vec<Segment>,
}

impl Benchmark {
    /// Regime of the segment containing every index in `range`, if one does.
    pub fn regime_of(&self, range: std::ops::Range<usize>) -> Option<Regime> {
        self.segments
            .iter()
            .find(|s| s.start <= range.start && range.end <= s.end)
            .map(|s| s.regime)
    }
}

pub const HINT_COLUMN: &str = "regime_hint";

pub fn generate(spec: &BenchmarkSpec) -> Result<Benchmark, DataError> {
    if spec.segment_len < 2 || spec.cycles == 0 || spec.period < 2 {
        return Err(DataError::Invalid("benchmark needs segment_len >= 2, cycles >= 1, period >= 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let background = Normal::new(0.0, spec.noise_sd).map_err(|e| DataError::Invalid(e.to_string()))?;
    let burst = Normal::new(0.0, spec.burst_sd).map_err(|e| DataError::Invalid(e.to_string()))?;
    let mut values = Vec::new();
    let mut hints = Vec::new();
    let mut segments = Vec::new();
    let mut level = spec.level;
    let mut direction = 1.0;
    for s in 0..spec.cycles * 3 {
        let regime = Regime::CYCLE[s % 3];
        let start = values.len();
        match regime {
            Regime::Seasonal => {
                // each phase of the sinusoid wanders independently
                let mut profile: Vec<f64> = (0..spec.period)
                    .map(|k| level + spec.amplitude * (std::f64::consts::TAU * k as f64 / spec.period as f64).sin())
                    .collect();
                for t in 0..spec.segment_len {
                    let k = t % spec.period;
                    profile[k] += background.sample(&mut rng);
                    values.push(profile[k]);
                }
                level = profile.iter().sum::<f64>() / spec.period as f64;
            }
            Regime::Trend => {
                for _ in 0..spec.segment_len {
                    level += direction * spec.slope + background.sample(&mut rng);
                    values.push(level);
                }
                direction = -direction;
            }
            Regime::Noise => {
                for _ in 0..spec.segment_len {
                    values.push(level + burst.sample(&mut rng));
                }
            }
        }
        hints.extend(std::iter::repeat_n(regime.as_str().to_string(), spec.segment_len));
        segments.push(Segment {
            regime,
            start,
            end: values.len(),
        });
    }
    let start = NaiveDate::from_ymd_opt(2020, 1, 1).expect("valid date");
    let daily = TimeSeries::daily(start, values)?;
    let series = TimeSeries::new(
        daily.timestamps().to_vec(),
        daily.target().to_vec(),
        vec![Covariate::categorical(HINT_COLUMN, hints)],
    )?;
    Ok(Benchmark { series, segments })
}
