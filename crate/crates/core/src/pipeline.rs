//! Stage composition: raw inertial days and an ambient log in, window
//! labels and profiles out. The CLI subcommands call the same functions, so
//! chaining them by hand gives the same bytes as a full run.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::ambient::{merge_streams, AmbientEvent};
use crate::error::{Error, Result};
use crate::features::{extract_features_with, FeatureRow};
use crate::fusion::{
    assign_ticks, covered_ticks, derive_timeline, BasicActivity, DerivedTick, FusionRuleTable, ScoredWindow,
    DEFAULT_MIN_SLEEP_MS, DEFAULT_TICK_MS,
};
use crate::labelling::{windowize_from, PriorityTable, WindowLabel, SUPPORTED_SPANS_MIN};
use crate::nn::{centroid_classify, fit_centroids, CentroidModel, Layer, WeightsBundle};
use crate::occupancy::{DetectorConfig, OccupancyTimeline};
use crate::patterns::{local_date, local_midnight, timezone, ProfileReport};
use crate::signal::{
    butterworth_lowpass, interpolate_gaps, segment, FilterSpec, SampleSeries, SampleWindow, DEFAULT_MAX_GAP_MS,
    DEFAULT_OVERLAP, DEFAULT_WINDOW_LEN,
};
use crate::sim::{synth_motion, NoiseSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub max_gap_ms: i64,
    pub filter: FilterSpec,
    pub window_len: usize,
    pub overlap: f64,
    pub include_gyro: bool,
    pub tick_ms: i64,
    pub min_sleep_ms: i64,
    pub span_minutes: u32,
    pub tz_offset_min: i32,
    pub detector: DetectorConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            max_gap_ms: DEFAULT_MAX_GAP_MS,
            filter: FilterSpec::default(),
            window_len: DEFAULT_WINDOW_LEN,
            overlap: DEFAULT_OVERLAP,
            include_gyro: false,
            tick_ms: DEFAULT_TICK_MS,
            min_sleep_ms: DEFAULT_MIN_SLEEP_MS,
            span_minutes: 2,
            tz_offset_min: 0,
            detector: DetectorConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.filter.validate()?;
        if !SUPPORTED_SPANS_MIN.contains(&self.span_minutes) {
            return Err(Error::InvalidParameter(format!(
                "span must be one of {SUPPORTED_SPANS_MIN:?} minutes, got {}",
                self.span_minutes
            )));
        }
        if self.tick_ms <= 0 || self.min_sleep_ms < 0 || self.max_gap_ms <= 0 || self.window_len == 0 {
            return Err(Error::InvalidParameter("tick, gap and window length must be positive".into()));
        }
        timezone(self.tz_offset_min)?;
        Ok(())
    }

    pub fn span_ms(&self) -> i64 {
        i64::from(self.span_minutes) * 60_000
    }
}

/// Gap interpolation followed by low-pass filtering of each gapless segment.
pub fn preprocess(series: &SampleSeries, config: &PipelineConfig) -> Result<Vec<SampleSeries>> {
    interpolate_gaps(series, config.max_gap_ms)?
        .iter()
        .map(|s| butterworth_lowpass(s, config.filter))
        .collect()
}

/// Splits a series wherever consecutive samples are not one period apart.
pub fn split_gapless(series: &SampleSeries) -> Vec<SampleSeries> {
    let mut out: Vec<SampleSeries> = Vec::new();
    let period = series.nominal_period_ms;
    for s in &series.samples {
        match out.last_mut() {
            Some(seg) if seg.samples.last().is_some_and(|p| s.ts - p.ts == period) => seg.samples.push(*s),
            _ => out.push(SampleSeries::new(series.subject_id.clone(), vec![*s]).with_period(period)),
        }
    }
    out
}

/// Sliding windows over every segment, in order.
pub fn windows(segments: &[SampleSeries], config: &PipelineConfig) -> Result<Vec<SampleWindow>> {
    let mut out = Vec::new();
    for s in segments {
        out.extend(segment(s, config.window_len, config.overlap)?);
    }
    Ok(out)
}

pub fn feature_rows(windows: &[SampleWindow], include_gyro: bool) -> Result<Vec<FeatureRow>> {
    windows
        .iter()
        .map(|w| {
            Ok(FeatureRow {
                start_ts: w.start_ts,
                end_ts: w.end_ts,
                features: extract_features_with(w, include_gyro)?,
            })
        })
        .collect()
}

/// A window's predicted class. `score` is in (0, 1]: the top probability for
/// neural bundles, `1 / (1 + distance)` for centroid models.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifiedWindow {
    pub start_ts: i64,
    pub end_ts: i64,
    pub label: String,
    pub score: f64,
    /// Per-class probabilities (neural bundles only).
    pub probs: Vec<f64>,
}

pub enum Classifier {
    Centroid(CentroidModel),
    Neural { bundle: WeightsBundle, layers: Vec<Layer> },
}

impl Classifier {
    pub fn neural(bundle: WeightsBundle) -> Result<Self> {
        let layers = bundle.compile()?;
        Ok(Classifier::Neural { bundle, layers })
    }

    pub fn class_names(&self) -> &[String] {
        match self {
            Classifier::Centroid(m) => &m.class_names,
            Classifier::Neural { bundle, .. } => &bundle.class_names,
        }
    }

    pub fn has_probabilities(&self) -> bool {
        matches!(self, Classifier::Neural { .. })
    }

    pub fn classify(&self, window: &SampleWindow) -> Result<ClassifiedWindow> {
        match self {
            Classifier::Centroid(model) => {
                let fv = extract_features_with(window, model.layout.len() > crate::features::GROUP_LEN)?;
                classify_features(&FeatureRow {
                    start_ts: window.start_ts,
                    end_ts: window.end_ts,
                    features: fv,
                }, model)
            }
            Classifier::Neural { bundle, layers } => {
                let p = crate::nn::classify_compiled(window, bundle, layers)?;
                let best = p.argmax();
                Ok(ClassifiedWindow {
                    start_ts: window.start_ts,
                    end_ts: window.end_ts,
                    label: bundle.class_names[best].clone(),
                    score: p.probs[best],
                    probs: p.probs,
                })
            }
        }
    }

    pub fn classify_all(&self, windows: &[SampleWindow]) -> Result<Vec<ClassifiedWindow>> {
        windows.iter().map(|w| self.classify(w)).collect()
    }
}

pub fn classify_features(row: &FeatureRow, model: &CentroidModel) -> Result<ClassifiedWindow> {
    let d2 = model.distances(&row.features)?;
    let label = centroid_classify(&row.features, model)?;
    let nearest = d2.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(ClassifiedWindow {
        start_ts: row.start_ts,
        end_ts: row.end_ts,
        label,
        score: 1.0 / (1.0 + nearest.sqrt()),
        probs: Vec::new(),
    })
}

/// CSV `start_ts,end_ts,label,score[,p_<class>…]`.
pub fn write_classified(class_names: &[String], with_probs: bool, rows: &[ClassifiedWindow]) -> String {
    let mut out = String::from("start_ts,end_ts,label,score");
    if with_probs {
        for c in class_names {
            let _ = write!(out, ",p_{c}");
        }
    }
    out.push('\n');
    for r in rows {
        let _ = write!(out, "{},{},{},{}", r.start_ts, r.end_ts, r.label, r.score);
        for p in &r.probs {
            let _ = write!(out, ",{p}");
        }
        out.push('\n');
    }
    out
}

pub fn read_classified(text: &str) -> Result<Vec<ClassifiedWindow>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("start_ts,") {
            continue;
        }
        let err = |m: String| Error::parse(i + 1, m);
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() < 4 {
            return Err(err(format!("expected at least 4 columns, got {}", f.len())));
        }
        let int = |s: &str| s.parse::<i64>().map_err(|e| err(format!("bad timestamp {s:?}: {e}")));
        let num = |s: &str| s.parse::<f64>().map_err(|e| err(format!("bad number {s:?}: {e}")));
        out.push(ClassifiedWindow {
            start_ts: int(f[0])?,
            end_ts: int(f[1])?,
            label: f[2].to_string(),
            score: num(f[3])?,
            probs: f[4..].iter().map(|s| num(s)).collect::<Result<_>>()?,
        });
    }
    Ok(out)
}

/// Local midnight of the day containing `ts`.
pub fn day_origin(ts: i64, tz_offset_min: i32) -> Result<i64> {
    let tz = timezone(tz_offset_min)?;
    Ok(local_midnight(local_date(ts, tz)?, tz))
}

/// Classified windows → basic activity per tick (ticks aligned to local
/// midnight of the first window's day).
pub fn basic_ticks(classified: &[ClassifiedWindow], config: &PipelineConfig) -> Result<Vec<(i64, Option<BasicActivity>)>> {
    let mut scored = classified
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let label = c
                .label
                .parse()
                .map_err(|e: String| Error::InvalidParameter(format!("window {}: {e}", i + 1)))?;
            Ok(ScoredWindow {
                start_ts: c.start_ts,
                end_ts: c.end_ts,
                label,
                score: c.score,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    scored.sort_by_key(|w| w.start_ts);
    let Some(first) = scored.first() else {
        return Ok(Vec::new());
    };
    let origin = day_origin(first.start_ts, config.tz_offset_min)?;
    let ticks = covered_ticks(&scored, origin, config.tick_ms);
    Ok(assign_ticks(&scored, &ticks, config.tick_ms))
}

pub fn occupancy(events: &[AmbientEvent], config: &PipelineConfig) -> Result<OccupancyTimeline> {
    let ordered = merge_streams(&[events.to_vec()])?;
    Ok(OccupancyTimeline::from_events(&ordered, config.detector))
}

pub fn fuse_stage(
    classified: &[ClassifiedWindow],
    occupancy: &OccupancyTimeline,
    rules: &FusionRuleTable,
    config: &PipelineConfig,
) -> Result<Vec<DerivedTick>> {
    let basic = basic_ticks(classified, config)?;
    Ok(derive_timeline(&basic, occupancy, rules, config.min_sleep_ms, config.tick_ms))
}

/// Window labels aligned to local midnight of the first tick's day.
pub fn label_stage(derived: &[DerivedTick], priorities: &PriorityTable, config: &PipelineConfig) -> Result<Vec<WindowLabel>> {
    let Some(first) = derived.first() else {
        return Ok(Vec::new());
    };
    let origin = day_origin(first.ts, config.tz_offset_min)?;
    let timeline: Vec<(i64, &str)> = derived.iter().map(|t| (t.ts, t.derived.name.as_str())).collect();
    windowize_from(&timeline, origin, config.span_ms(), priorities)
}

pub fn profile_stage(labels: &[WindowLabel], config: &PipelineConfig) -> Result<ProfileReport> {
    ProfileReport::build(labels, config.tz_offset_min)
}

/// Centroids fitted on simulated clips of every recognisable activity.
/// Each clip uses its own seed derived from `noise.seed`.
pub fn calibrate_centroids(noise: &NoiseSpec, clip_ms: i64, period_ms: i64, config: &PipelineConfig) -> Result<CentroidModel> {
    let mut examples = Vec::new();
    for (i, b) in BasicActivity::RECOGNISED.into_iter().enumerate() {
        let clip_noise = NoiseSpec {
            seed: noise.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i as u64 + 1),
            ..noise.clone()
        };
        let series = synth_motion(b, 0, clip_ms, period_ms, &clip_noise)?;
        let segments = preprocess(&series, config)?;
        for row in feature_rows(&windows(&segments, config)?, config.include_gyro)? {
            examples.push((b.name().to_string(), row.features));
        }
    }
    fit_centroids(&examples, true)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub classified: Vec<ClassifiedWindow>,
    pub occupancy: OccupancyTimeline,
    pub derived: Vec<DerivedTick>,
    pub labels: Vec<WindowLabel>,
    pub report: ProfileReport,
}

/// Full run over consecutive days of inertial data (one series per day, in
/// time order) and the ambient log covering them.
pub fn run<I>(
    days: I,
    events: &[AmbientEvent],
    classifier: &Classifier,
    rules: &FusionRuleTable,
    priorities: &PriorityTable,
    config: &PipelineConfig,
) -> Result<PipelineOutput>
where
    I: IntoIterator<Item = SampleSeries>,
{
    config.validate()?;
    let mut classified = Vec::new();
    for series in days {
        if series.is_empty() {
            continue;
        }
        let segments = preprocess(&series, config)?;
        classified.extend(classifier.classify_all(&windows(&segments, config)?)?);
    }
    let occupancy = occupancy(events, config)?;
    let derived = fuse_stage(&classified, &occupancy, rules, config)?;
    let labels = label_stage(&derived, priorities, config)?;
    let report = profile_stage(&labels, config)?;
    Ok(PipelineOutput {
        classified,
        occupancy,
        derived,
        labels,
        report,
    })
}
