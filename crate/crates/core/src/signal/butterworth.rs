use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::SampleSeries;
use crate::error::{Error, Result};

/// Digital low-pass design parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub order: usize,
    pub cutoff_hz: f64,
    pub sample_rate_hz: f64,
}

impl Default for FilterSpec {
    fn default() -> Self {
        FilterSpec {
            order: 3,
            cutoff_hz: 3.0,
            sample_rate_hz: 20.0,
        }
    }
}

impl FilterSpec {
    pub fn validate(&self) -> Result<()> {
        if self.order == 0 {
            return Err(Error::InvalidFilter("order must be positive".into()));
        }
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return Err(Error::InvalidFilter(format!(
                "sample rate {} Hz must be positive",
                self.sample_rate_hz
            )));
        }
        let nyquist_hz = self.sample_rate_hz / 2.0;
        if !(self.cutoff_hz.is_finite() && self.cutoff_hz > 0.0 && self.cutoff_hz < nyquist_hz) {
            return Err(Error::InvalidCutoff {
                cutoff_hz: self.cutoff_hz,
                nyquist_hz,
            });
        }
        Ok(())
    }
}

/// One second-order section, `a[0]` normalised to 1. First-order sections
/// carry zeros in the last tap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl Biquad {
    fn dc_gain(&self) -> f64 {
        self.b.iter().sum::<f64>() / self.a.iter().sum::<f64>()
    }

    /// Transposed direct-form II state for a constant input held forever.
    fn steady_state(&self, x: f64) -> [f64; 2] {
        let y = self.dc_gain() * x;
        let z2 = self.b[2] * x - self.a[2] * y;
        let z1 = self.b[1] * x - self.a[1] * y + z2;
        [z1, z2]
    }

    #[inline]
    fn step(&self, x: f64, z: &mut [f64; 2]) -> f64 {
        let y = self.b[0] * x + z[0];
        z[0] = self.b[1] * x - self.a[1] * y + z[1];
        z[1] = self.b[2] * x - self.a[2] * y;
        y
    }

    fn response(&self, omega: f64) -> (f64, f64) {
        // H(e^{jw}) = B(e^{-jw}) / A(e^{-jw})
        let eval = |c: &[f64; 3]| {
            let re = c[0] + c[1] * omega.cos() + c[2] * (2.0 * omega).cos();
            let im = -c[1] * omega.sin() - c[2] * (2.0 * omega).sin();
            (re, im)
        };
        let (br, bi) = eval(&self.b);
        let (ar, ai) = eval(&self.a);
        let den = ar * ar + ai * ai;
        ((br * ar + bi * ai) / den, (bi * ar - br * ai) / den)
    }
}

/// Butterworth low-pass realised as a cascade of second-order sections,
/// designed from the analog prototype via the bilinear transform with
/// cutoff prewarping.
#[derive(Debug, Clone, PartialEq)]
pub struct ButterworthLowpass {
    spec: FilterSpec,
    sections: Vec<Biquad>,
}

impl ButterworthLowpass {
    pub fn design(spec: FilterSpec) -> Result<Self> {
        spec.validate()?;
        let fs = spec.sample_rate_hz;
        let k = 2.0 * fs;
        let wc = k * (PI * spec.cutoff_hz / fs).tan();
        let wc2 = wc * wc;
        let n = spec.order;

        let mut sections = Vec::with_capacity(n.div_ceil(2));
        for i in 0..n / 2 {
            // conjugate pole pair p = wc * exp(j*theta), theta in (pi/2, pi)
            let theta = PI * (2 * i + n + 1) as f64 / (2 * n) as f64;
            let a1 = -2.0 * wc * theta.cos();
            let d0 = k * k + a1 * k + wc2;
            let d1 = 2.0 * (wc2 - k * k);
            let d2 = k * k - a1 * k + wc2;
            sections.push(Biquad {
                b: [wc2 / d0, 2.0 * wc2 / d0, wc2 / d0],
                a: [1.0, d1 / d0, d2 / d0],
            });
        }
        if n % 2 == 1 {
            let d0 = k + wc;
            sections.push(Biquad {
                b: [wc / d0, wc / d0, 0.0],
                a: [1.0, (wc - k) / d0, 0.0],
            });
        }
        Ok(ButterworthLowpass { spec, sections })
    }

    pub fn spec(&self) -> FilterSpec {
        self.spec
    }

    pub fn sections(&self) -> &[Biquad] {
        &self.sections
    }

    /// Causal filtering. The section states start at the steady state of
    /// the first input value, so a constant signal passes through unchanged.
    pub fn apply(&self, input: &[f64]) -> Vec<f64> {
        let Some(&first) = input.first() else {
            return Vec::new();
        };
        let mut states: Vec<[f64; 2]> = Vec::with_capacity(self.sections.len());
        let mut level = first;
        for s in &self.sections {
            states.push(s.steady_state(level));
            level *= s.dc_gain();
        }
        input
            .iter()
            .map(|&x| {
                self.sections
                    .iter()
                    .zip(states.iter_mut())
                    .fold(x, |v, (s, z)| s.step(v, z))
            })
            .collect()
    }

    /// |H| at `freq_hz`, evaluated from the designed coefficients.
    pub fn magnitude_at(&self, freq_hz: f64) -> f64 {
        let omega = 2.0 * PI * freq_hz / self.spec.sample_rate_hz;
        let (mut re, mut im) = (1.0, 0.0);
        for s in &self.sections {
            let (sr, si) = s.response(omega);
            (re, im) = (re * sr - im * si, re * si + im * sr);
        }
        (re * re + im * im).sqrt()
    }
}

/// Filters every accelerometer (and gyroscope, when present) axis of a
/// gapless, grid-aligned series.
pub fn butterworth_lowpass(series: &SampleSeries, spec: FilterSpec) -> Result<SampleSeries> {
    let filter = ButterworthLowpass::design(spec)?;
    if !series.is_gapless() {
        return Err(Error::InvalidParameter(
            "series must be gapless and grid-aligned before filtering".into(),
        ));
    }
    let mut out = series.clone();
    for axis in 0..3 {
        let filtered = filter.apply(&series.axis(axis));
        for (s, v) in out.samples.iter_mut().zip(filtered) {
            s.acc[axis] = v;
        }
    }
    if series.samples.iter().all(|s| s.gyro.is_some()) && !series.is_empty() {
        for axis in 0..3 {
            let values: Vec<f64> = series
                .samples
                .iter()
                .map(|s| s.gyro.map_or(0.0, |g| g[axis]))
                .collect();
            for (s, v) in out.samples.iter_mut().zip(filter.apply(&values)) {
                if let Some(g) = s.gyro.as_mut() {
                    g[axis] = v;
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::TriaxialSample;

    fn series_from(values: &[f64]) -> SampleSeries {
        SampleSeries::new(
            "t",
            values
                .iter()
                .enumerate()
                .map(|(i, &v)| TriaxialSample::new(i as i64 * 50, v, 0.0, 0.0))
                .collect(),
        )
    }

    #[test]
    fn cutoff_at_or_above_nyquist_is_rejected() {
        let spec = FilterSpec {
            cutoff_hz: 10.0,
            ..FilterSpec::default()
        };
        assert!(matches!(
            ButterworthLowpass::design(spec),
            Err(Error::InvalidCutoff { .. })
        ));
        assert!(ButterworthLowpass::design(FilterSpec {
            cutoff_hz: 12.0,
            ..FilterSpec::default()
        })
        .is_err());
    }

    #[test]
    fn constant_signal_passes_unchanged() {
        let out = butterworth_lowpass(&series_from(&[5.0; 200]), FilterSpec::default()).unwrap();
        for s in &out.samples[30..] {
            assert!((s.acc[0] - 5.0).abs() < 1e-6);
        }
    }

    #[test]
    fn zero_in_zero_out() {
        let out = butterworth_lowpass(&series_from(&[0.0; 64]), FilterSpec::default()).unwrap();
        assert!(out.samples.iter().all(|s| s.acc == [0.0; 3]));
    }

    #[test]
    fn gapped_series_is_rejected() {
        let mut s = series_from(&[1.0; 10]);
        s.samples.remove(4);
        assert!(butterworth_lowpass(&s, FilterSpec::default()).is_err());
    }

    #[test]
    fn even_orders_design_cleanly() {
        for order in 1..=8 {
            let f = ButterworthLowpass::design(FilterSpec {
                order,
                ..FilterSpec::default()
            })
            .unwrap();
            assert_eq!(f.sections().len(), order.div_ceil(2));
            assert!((f.magnitude_at(0.0) - 1.0).abs() < 1e-12);
            // -3 dB at the cutoff for every order
            assert!((f.magnitude_at(3.0) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
        }
    }
}
