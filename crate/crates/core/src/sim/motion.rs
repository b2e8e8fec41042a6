use std::f64::consts::TAU;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::BasicActivity;
use crate::signal::{SampleSeries, TriaxialSample};

pub const GRAVITY: f64 = 9.81;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Per-axis standard deviation of additive Gaussian noise, m/s².
    pub gaussian_sigma: [f64; 3],
    /// Probability that a sample is dropped.
    pub dropout_prob: f64,
    pub seed: u64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec::new(0.0, 0.0, 0)
    }
}

impl NoiseSpec {
    pub fn new(sigma: f64, dropout_prob: f64, seed: u64) -> Self {
        NoiseSpec {
            gaussian_sigma: [sigma; 3],
            dropout_prob,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.gaussian_sigma.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(Error::InvalidParameter("noise sigma must be finite and ≥ 0".into()));
        }
        if !(0.0..1.0).contains(&self.dropout_prob) {
            return Err(Error::InvalidParameter("dropout probability must be in [0, 1)".into()));
        }
        Ok(())
    }

    pub fn is_silent(&self) -> bool {
        self.gaussian_sigma.iter().all(|&s| s == 0.0) && self.dropout_prob == 0.0
    }
}

/// Noise-free acceleration of an activity `t` seconds into it.
pub fn gravity_profile(basic: BasicActivity, t: f64) -> [f64; 3] {
    let sit_tilt = 70f64.to_radians();
    let walk = 3.0 * (TAU * 2.0 * t).sin();
    // Slow 10 s sawtooth in [0, 0.5) for the stair climbs.
    let ramp = 0.5 * (t / 10.0).fract();
    match basic {
        BasicActivity::Stand => [0.0, GRAVITY, 0.0],
        BasicActivity::Sit => [0.0, GRAVITY * sit_tilt.cos(), GRAVITY * sit_tilt.sin()],
        BasicActivity::Lie | BasicActivity::Sleep => [GRAVITY, 0.0, 0.0],
        BasicActivity::Walk => [0.0, GRAVITY + walk, 0.0],
        BasicActivity::Jog => [0.0, GRAVITY + 6.0 * (TAU * 3.0 * t).sin(), 0.0],
        BasicActivity::StairUp => [0.0, GRAVITY + walk, 3.0 + ramp],
        BasicActivity::StairDown => [0.0, GRAVITY + walk, -3.0 - ramp],
    }
}

/// Samples on the grid `start + k·period` below `end`, with the profile
/// clock starting at `start`.
pub(crate) fn append_motion(
    out: &mut Vec<TriaxialSample>,
    basic: BasicActivity,
    start: i64,
    end: i64,
    period_ms: i64,
    noise: &NoiseSpec,
    rng: &mut ChaCha8Rng,
) {
    let normals: Vec<Option<Normal<f64>>> = noise
        .gaussian_sigma
        .iter()
        .map(|&s| (s > 0.0).then(|| Normal::new(0.0, s).expect("validated sigma")))
        .collect();
    for ts in (start..end).step_by(period_ms as usize) {
        let mut acc = gravity_profile(basic, (ts - start) as f64 / 1000.0);
        for (v, n) in acc.iter_mut().zip(&normals) {
            if let Some(n) = n {
                *v += n.sample(rng);
            }
        }
        if noise.dropout_prob > 0.0 && rng.random::<f64>() < noise.dropout_prob {
            continue;
        }
        out.push(TriaxialSample {
            ts,
            acc,
            gyro: None,
        });
    }
}

/// Standalone motion clip starting at `start_ts`, seeded from `noise.seed`.
pub fn synth_motion(
    basic: BasicActivity,
    start_ts: i64,
    duration_ms: i64,
    period_ms: i64,
    noise: &NoiseSpec,
) -> Result<SampleSeries> {
    noise.validate()?;
    if period_ms <= 0 || duration_ms <= 0 {
        return Err(Error::InvalidParameter("duration and period must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let mut samples = Vec::with_capacity((duration_ms / period_ms) as usize + 1);
    append_motion(&mut samples, basic, start_ts, start_ts + duration_ms, period_ms, noise, &mut rng);
    Ok(SampleSeries::new("sim", samples).with_period(period_ms))
}
