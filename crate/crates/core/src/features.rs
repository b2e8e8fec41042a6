//! Statistical features of one inertial window.
//!
//! Default layout (accelerometer only, 43 values):
//! mean×3, std×3, avg_abs_diff×3, avg_resultant, time_between_peaks×3,
//! then a 10-bin histogram per axis over [-20, 20] m/s².

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::SampleWindow;

pub const HISTOGRAM_BINS: usize = 10;
pub const HISTOGRAM_MIN: f64 = -20.0;
pub const HISTOGRAM_MAX: f64 = 20.0;
/// Values per sensor group.
pub const GROUP_LEN: usize = 3 + 3 + 3 + 1 + 3 + 3 * HISTOGRAM_BINS;
/// Bumped whenever the value ordering changes.
pub const LAYOUT_VERSION: u32 = 1;

const AXES: [&str; 3] = ["x", "y", "z"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureLayout {
    Accelerometer,
    AccelerometerGyroscope,
}

impl FeatureLayout {
    pub fn len(self) -> usize {
        match self {
            FeatureLayout::Accelerometer => GROUP_LEN,
            FeatureLayout::AccelerometerGyroscope => 2 * GROUP_LEN,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            FeatureLayout::Accelerometer => "acc",
            FeatureLayout::AccelerometerGyroscope => "acc+gyro",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "acc" => Some(FeatureLayout::Accelerometer),
            "acc+gyro" => Some(FeatureLayout::AccelerometerGyroscope),
            _ => None,
        }
    }

    pub fn names(self) -> Vec<String> {
        let mut names = group_names("");
        if self == FeatureLayout::AccelerometerGyroscope {
            names.extend(group_names("gyro_"));
        }
        names
    }
}

fn group_names(prefix: &str) -> Vec<String> {
    let mut names = Vec::with_capacity(GROUP_LEN);
    for stat in ["mean", "std", "avg_abs_diff"] {
        names.extend(AXES.iter().map(|a| format!("{prefix}{stat}_{a}")));
    }
    names.push(format!("{prefix}avg_resultant"));
    names.extend(AXES.iter().map(|a| format!("{prefix}time_between_peaks_ms_{a}")));
    for a in AXES {
        names.extend((0..HISTOGRAM_BINS).map(|b| format!("{prefix}bin_{a}_{b}")));
    }
    names
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub layout: FeatureLayout,
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn feature_names(&self) -> Vec<String> {
        self.layout.names()
    }

    pub fn mean(&self) -> &[f64] {
        &self.values[0..3]
    }

    pub fn std(&self) -> &[f64] {
        &self.values[3..6]
    }

    pub fn avg_abs_diff(&self) -> &[f64] {
        &self.values[6..9]
    }

    pub fn avg_resultant(&self) -> f64 {
        self.values[9]
    }

    pub fn time_between_peaks_ms(&self) -> &[f64] {
        &self.values[10..13]
    }

    /// Histogram fractions of accelerometer axis `axis`.
    pub fn bin_fractions(&self, axis: usize) -> &[f64] {
        let start = 13 + axis * HISTOGRAM_BINS;
        &self.values[start..start + HISTOGRAM_BINS]
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn population_std(values: &[f64], mean: f64) -> f64 {
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64).sqrt()
}

fn histogram(values: &[f64]) -> [f64; HISTOGRAM_BINS] {
    let width = (HISTOGRAM_MAX - HISTOGRAM_MIN) / HISTOGRAM_BINS as f64;
    let mut counts = [0usize; HISTOGRAM_BINS];
    for v in values {
        let idx = ((v - HISTOGRAM_MIN) / width).floor();
        let idx = idx.clamp(0.0, (HISTOGRAM_BINS - 1) as f64) as usize;
        counts[idx] += 1;
    }
    counts.map(|c| c as f64 / values.len() as f64)
}

/// Mean spacing (ms) between successive peaks, where a peak is a strict
/// local maximum above `mean + 0.5 * std`. Zero when fewer than two peaks.
pub fn time_between_peaks(values: &[f64], period_ms: i64) -> f64 {
    if values.len() < 3 {
        return 0.0;
    }
    let m = mean(values);
    let threshold = m + 0.5 * population_std(values, m);
    let peaks: Vec<usize> = (1..values.len() - 1)
        .filter(|&i| values[i] > values[i - 1] && values[i] > values[i + 1] && values[i] > threshold)
        .collect();
    match (peaks.first(), peaks.last()) {
        (Some(&first), Some(&last)) if peaks.len() >= 2 => {
            (last - first) as f64 * period_ms as f64 / (peaks.len() - 1) as f64
        }
        _ => 0.0,
    }
}

fn push_group(out: &mut Vec<f64>, axes: [Vec<f64>; 3], period_ms: i64) {
    let means = axes.each_ref().map(|a| mean(a));
    out.extend(means);
    out.extend((0..3).map(|i| population_std(&axes[i], means[i])));
    out.extend((0..3).map(|i| mean(&axes[i].iter().map(|v| (v - means[i]).abs()).collect::<Vec<_>>())));
    let n = axes[0].len();
    let resultant = (0..n)
        .map(|k| (axes[0][k].powi(2) + axes[1][k].powi(2) + axes[2][k].powi(2)).sqrt())
        .sum::<f64>()
        / n as f64;
    out.push(resultant);
    out.extend(axes.iter().map(|a| time_between_peaks(a, period_ms)));
    for a in &axes {
        out.extend(histogram(a));
    }
}

/// Accelerometer-only features.
pub fn extract_features(window: &SampleWindow) -> Result<FeatureVector> {
    extract_features_with(window, false)
}

/// With `include_gyro`, gyroscope axes get the same statistics appended;
/// every sample must then carry gyroscope values.
pub fn extract_features_with(window: &SampleWindow, include_gyro: bool) -> Result<FeatureVector> {
    if window.len() < 2 {
        return Err(Error::DegenerateWindow { len: window.len() });
    }
    let period = window.period_ms();
    let mut values = Vec::with_capacity(2 * GROUP_LEN);
    push_group(&mut values, [0, 1, 2].map(|a| window.axis(a)), period);
    let layout = if include_gyro {
        let gyro = [0, 1, 2].map(|a| window.gyro_axis(a));
        let [Some(gx), Some(gy), Some(gz)] = gyro else {
            return Err(Error::InvalidParameter(
                "gyroscope features requested but samples lack gyroscope values".into(),
            ));
        };
        push_group(&mut values, [gx, gy, gz], period);
        FeatureLayout::AccelerometerGyroscope
    } else {
        FeatureLayout::Accelerometer
    };
    Ok(FeatureVector { layout, values })
}

/// Features of one window together with its time span.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub start_ts: i64,
    pub end_ts: i64,
    pub features: FeatureVector,
}

/// `# feature-layout <version> <tag>`, the column header, then one row per window.
pub fn write_feature_table(layout: FeatureLayout, rows: &[FeatureRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# feature-layout {LAYOUT_VERSION} {}", layout.tag());
    out.push_str("start_ts,end_ts");
    for name in layout.names() {
        out.push(',');
        out.push_str(&name);
    }
    out.push('\n');
    for row in rows {
        let _ = write!(out, "{},{}", row.start_ts, row.end_ts);
        for v in &row.features.values {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

pub fn read_feature_table(text: &str) -> Result<(FeatureLayout, Vec<FeatureRow>)> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, marker) = lines.next().ok_or(Error::EmptyInput)?;
    let mut parts = marker.split_whitespace();
    let layout = match (parts.next(), parts.next(), parts.next(), parts.next()) {
        (Some("#"), Some("feature-layout"), Some(v), Some(tag)) => {
            if v != LAYOUT_VERSION.to_string() {
                return Err(Error::parse(1, format!("unsupported feature layout version {v}")));
            }
            FeatureLayout::from_tag(tag)
                .ok_or_else(|| Error::parse(1, format!("unknown feature layout {tag:?}")))?
        }
        _ => return Err(Error::parse(1, "missing feature-layout header")),
    };
    let (hline, header) = lines.next().ok_or_else(|| Error::parse(2, "missing column header"))?;
    let expected: Vec<String> = ["start_ts".to_string(), "end_ts".to_string()]
        .into_iter()
        .chain(layout.names())
        .collect();
    if header.split(',').map(str::trim).ne(expected.iter().map(String::as_str)) {
        return Err(Error::parse(hline + 1, "column header does not match the layout"));
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != expected.len() {
            return Err(Error::parse(
                i + 1,
                format!("expected {} columns, got {}", expected.len(), fields.len()),
            ));
        }
        let ts = |f: &str| {
            f.trim()
                .parse::<i64>()
                .map_err(|_| Error::parse(i + 1, format!("bad timestamp {f:?}")))
        };
        let values = fields[2..]
            .iter()
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::parse(i + 1, format!("bad value {f:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(FeatureRow {
            start_ts: ts(fields[0])?,
            end_ts: ts(fields[1])?,
            features: FeatureVector { layout, values },
        });
    }
    Ok((layout, rows))
}
