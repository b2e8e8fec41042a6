use super::{SampleSeries, SampleWindow};
use crate::error::{Error, Result};

pub const DEFAULT_WINDOW_LEN: usize = 128;
pub const DEFAULT_OVERLAP: f64 = 0.5;

/// Step between window starts: `round(window_len * (1 - overlap))`, at least 1.
pub fn hop_len(window_len: usize, overlap_frac: f64) -> usize {
    ((window_len as f64 * (1.0 - overlap_frac)).round() as usize).max(1)
}

/// Number of full windows that fit in `n` samples.
pub fn window_count(n: usize, window_len: usize, overlap_frac: f64) -> usize {
    if window_len == 0 || window_len > n {
        return 0;
    }
    (n - window_len) / hop_len(window_len, overlap_frac) + 1
}

/// Cuts a gapless series into fixed-length overlapping windows. The trailing
/// remainder shorter than `window_len` is dropped.
pub fn segment(
    series: &SampleSeries,
    window_len: usize,
    overlap_frac: f64,
) -> Result<Vec<SampleWindow>> {
    if window_len == 0 {
        return Err(Error::InvalidParameter("window length must be positive".into()));
    }
    if !(0.0..1.0).contains(&overlap_frac) {
        return Err(Error::InvalidParameter(format!(
            "overlap must lie in [0, 1), got {overlap_frac}"
        )));
    }
    let hop = hop_len(window_len, overlap_frac);
    let n = series.len();
    let count = window_count(n, window_len, overlap_frac);
    let period = series.nominal_period_ms;
    Ok((0..count)
        .map(|w| {
            let chunk = &series.samples[w * hop..w * hop + window_len];
            SampleWindow {
                start_ts: chunk[0].ts,
                end_ts: chunk[window_len - 1].ts + period,
                samples: chunk.to_vec(),
            }
        })
        .collect())
}
