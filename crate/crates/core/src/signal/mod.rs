//! Inertial time-series containers and the preprocessing chain:
//! gap interpolation, Butterworth low-pass filtering and sliding windows.

mod butterworth;
mod interpolate;
mod segment;
pub mod wisdm;

pub use butterworth::{butterworth_lowpass, Biquad, ButterworthLowpass, FilterSpec};
pub use interpolate::{interpolate_gaps, DEFAULT_MAX_GAP_MS};
pub use segment::{hop_len, segment, window_count, DEFAULT_OVERLAP, DEFAULT_WINDOW_LEN};

use serde::{Deserialize, Serialize};

/// Default sample period of the phone accelerometer (20 Hz).
pub const DEFAULT_PERIOD_MS: i64 = 50;

/// One accelerometer reading (m/s²) with optional gyroscope (rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriaxialSample {
    pub ts: i64,
    pub acc: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gyro: Option<[f64; 3]>,
}

impl TriaxialSample {
    pub fn new(ts: i64, ax: f64, ay: f64, az: f64) -> Self {
        TriaxialSample {
            ts,
            acc: [ax, ay, az],
            gyro: None,
        }
    }

    pub fn with_gyro(mut self, gx: f64, gy: f64, gz: f64) -> Self {
        self.gyro = Some([gx, gy, gz]);
        self
    }

    pub fn is_finite(&self) -> bool {
        self.acc.iter().all(|v| v.is_finite())
            && self
                .gyro
                .map_or(true, |g| g.iter().all(|v| v.is_finite()))
    }

    /// Euclidean norm of the acceleration vector.
    pub fn resultant(&self) -> f64 {
        let [x, y, z] = self.acc;
        (x * x + y * y + z * z).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSeries {
    pub subject_id: String,
    pub nominal_period_ms: i64,
    pub samples: Vec<TriaxialSample>,
}

impl SampleSeries {
    pub fn new(subject_id: impl Into<String>, samples: Vec<TriaxialSample>) -> Self {
        SampleSeries {
            subject_id: subject_id.into(),
            nominal_period_ms: DEFAULT_PERIOD_MS,
            samples,
        }
    }

    pub fn with_period(mut self, period_ms: i64) -> Self {
        self.nominal_period_ms = period_ms;
        self
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn is_ordered(&self) -> bool {
        self.samples.windows(2).all(|w| w[0].ts < w[1].ts)
    }

    /// True when every consecutive pair is exactly one nominal period apart.
    pub fn is_gapless(&self) -> bool {
        self.samples
            .windows(2)
            .all(|w| w[1].ts - w[0].ts == self.nominal_period_ms)
    }

    /// Joins segments back into one series (segments must already be ordered).
    pub fn concat(segments: &[SampleSeries]) -> Option<SampleSeries> {
        let first = segments.first()?;
        let samples = segments
            .iter()
            .flat_map(|s| s.samples.iter().copied())
            .collect();
        Some(SampleSeries {
            subject_id: first.subject_id.clone(),
            nominal_period_ms: first.nominal_period_ms,
            samples,
        })
    }

    /// Values of one accelerometer axis (0 = x, 1 = y, 2 = z).
    pub fn axis(&self, axis: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s.acc[axis]).collect()
    }
}

/// A fixed-length run of samples cut from a gapless series.
///
/// `end_ts` is exclusive: last sample ts plus one period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleWindow {
    pub start_ts: i64,
    pub end_ts: i64,
    pub samples: Vec<TriaxialSample>,
}

impl SampleWindow {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn axis(&self, axis: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s.acc[axis]).collect()
    }

    pub fn gyro_axis(&self, axis: usize) -> Option<Vec<f64>> {
        self.samples
            .iter()
            .map(|s| s.gyro.map(|g| g[axis]))
            .collect()
    }

    /// Midpoint of the window's time span.
    pub fn center_ts(&self) -> i64 {
        self.start_ts + (self.end_ts - self.start_ts) / 2
    }

    /// Approximate sample period inferred from the span.
    pub fn period_ms(&self) -> i64 {
        if self.samples.is_empty() {
            return DEFAULT_PERIOD_MS;
        }
        ((self.end_ts - self.start_ts) / self.samples.len() as i64).max(1)
    }
}
