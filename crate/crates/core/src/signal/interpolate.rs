use super::{SampleSeries, TriaxialSample};
use crate::error::{Error, Result};

/// Gaps longer than this split the series instead of being filled.
pub const DEFAULT_MAX_GAP_MS: i64 = 1000;

fn lerp(a: f64, b: f64, frac: f64) -> f64 {
    a + (b - a) * frac
}

fn lerp_sample(a: &TriaxialSample, b: &TriaxialSample, ts: i64) -> TriaxialSample {
    if ts == a.ts {
        return TriaxialSample { ts, ..*a };
    }
    if ts == b.ts {
        return TriaxialSample { ts, ..*b };
    }
    let frac = (ts - a.ts) as f64 / (b.ts - a.ts) as f64;
    let acc = std::array::from_fn(|i| lerp(a.acc[i], b.acc[i], frac));
    let gyro = match (a.gyro, b.gyro) {
        (Some(ga), Some(gb)) => Some(std::array::from_fn(|i| lerp(ga[i], gb[i], frac))),
        _ => None,
    };
    TriaxialSample { ts, acc, gyro }
}

/// Resamples onto the grid `first_ts + k * nominal_period_ms`.
///
/// Grid points between two samples at most `max_gap_ms` apart are filled by
/// per-axis linear interpolation. A larger gap closes the current segment;
/// each returned series is gapless.
pub fn interpolate_gaps(series: &SampleSeries, max_gap_ms: i64) -> Result<Vec<SampleSeries>> {
    let period = series.nominal_period_ms;
    if period <= 0 {
        return Err(Error::InvalidParameter(format!(
            "nominal period must be positive, got {period}"
        )));
    }
    if max_gap_ms <= 0 {
        return Err(Error::InvalidParameter(format!(
            "max gap must be positive, got {max_gap_ms}"
        )));
    }
    let samples = &series.samples;
    let Some(first) = samples.first() else {
        return Err(Error::EmptyInput);
    };
    if let Some(i) = samples.windows(2).position(|w| w[1].ts <= w[0].ts) {
        return Err(Error::InvalidParameter(format!(
            "timestamps not strictly increasing at index {}",
            i + 1
        )));
    }

    let origin = first.ts;
    // smallest grid point >= ts
    let grid_ceil = |ts: i64| origin + (ts - origin + period - 1).div_euclid(period) * period;

    let make_segment = |samples: Vec<TriaxialSample>| SampleSeries {
        subject_id: series.subject_id.clone(),
        nominal_period_ms: period,
        samples,
    };

    // Pushes `at` when it sits on the grid; returns the next grid point to fill.
    let open_segment = |at: &TriaxialSample, current: &mut Vec<TriaxialSample>| {
        let g = grid_ceil(at.ts);
        if g == at.ts {
            current.push(*at);
            g + period
        } else {
            g
        }
    };

    let mut segments = Vec::new();
    let mut current: Vec<TriaxialSample> = Vec::new();
    let mut next_grid = open_segment(first, &mut current);

    for pair in samples.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if b.ts - a.ts > max_gap_ms {
            if !current.is_empty() {
                segments.push(make_segment(std::mem::take(&mut current)));
            }
            next_grid = open_segment(b, &mut current);
            continue;
        }
        while next_grid <= b.ts {
            current.push(lerp_sample(a, b, next_grid));
            next_grid += period;
        }
    }
    if !current.is_empty() {
        segments.push(make_segment(current));
    }
    Ok(segments)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(points: &[(i64, f64)]) -> SampleSeries {
        SampleSeries::new(
            "s",
            points
                .iter()
                .map(|&(ts, v)| TriaxialSample::new(ts, v, -v, 2.0 * v))
                .collect(),
        )
    }

    #[test]
    fn fills_a_missing_grid_point() {
        let out = interpolate_gaps(&series(&[(0, 0.0), (50, 1.0), (150, 3.0)]), 1000).unwrap();
        assert_eq!(out.len(), 1);
        let ts: Vec<i64> = out[0].samples.iter().map(|s| s.ts).collect();
        assert_eq!(ts, vec![0, 50, 100, 150]);
        assert_eq!(out[0].axis(0), vec![0.0, 1.0, 2.0, 3.0]);
        assert_eq!(out[0].axis(1), vec![0.0, -1.0, -2.0, -3.0]);
    }

    #[test]
    fn complete_series_is_unchanged() {
        let s = series(&[(0, 0.5), (50, 1.5), (100, -2.0)]);
        let out = interpolate_gaps(&s, 1000).unwrap();
        assert_eq!(out, vec![s]);
    }

    #[test]
    fn long_gap_splits_without_synthetic_points() {
        let s = series(&[(0, 1.0), (50, 1.0), (5050, 2.0), (5100, 2.0)]);
        let out = interpolate_gaps(&s, 1000).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].samples.last().unwrap().ts, 50);
        assert_eq!(out[1].samples.first().unwrap().ts, 5050);
        assert_eq!(out[0].len() + out[1].len(), 4);
    }

    #[test]
    fn off_grid_samples_are_resampled() {
        let s = series(&[(0, 0.0), (70, 7.0), (130, 13.0)]);
        let out = interpolate_gaps(&s, 1000).unwrap();
        let ts: Vec<i64> = out[0].samples.iter().map(|s| s.ts).collect();
        assert_eq!(ts, vec![0, 50, 100]);
        assert!((out[0].samples[1].acc[0] - 5.0).abs() < 1e-12);
        assert!((out[0].samples[2].acc[0] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert_eq!(
            interpolate_gaps(&SampleSeries::new("e", vec![]), 1000),
            Err(Error::EmptyInput)
        );
    }

    #[test]
    fn gyro_dropped_when_one_side_lacks_it() {
        let a = TriaxialSample::new(0, 0.0, 0.0, 0.0).with_gyro(1.0, 1.0, 1.0);
        let b = TriaxialSample::new(100, 0.0, 0.0, 0.0);
        let out = interpolate_gaps(&SampleSeries::new("g", vec![a, b]), 1000).unwrap();
        assert_eq!(out[0].samples[1].gyro, None);
        assert_eq!(out[0].samples[0].gyro, Some([1.0; 3]));
    }
}
