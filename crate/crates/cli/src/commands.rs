use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use adlsense_core::ambient::{merge_streams, read_event_log, write_event_log, AmbientEvent};
use adlsense_core::features::{write_feature_table, FeatureLayout};
use adlsense_core::fusion::{flag_stream, write_derived_csv, write_flag_report, DerivedTick};
use adlsense_core::labelling::{read_label_timeline, read_window_labels, windowize_from, write_window_labels, WindowLabel};
use adlsense_core::occupancy::OccupancyTimeline;
use adlsense_core::patterns::{format_clock, interval_query, timezone, ClockRange, ProfileReport};
use adlsense_core::pipeline::{
    self, calibrate_centroids, day_origin, read_classified, write_classified, Classifier,
    PipelineConfig,
};
use adlsense_core::signal::wisdm::{read_series, read_windows, write_series, write_windows};
use adlsense_core::signal::SampleSeries;
use adlsense_core::sim::{generate_household, read_script, Household, NoiseSpec, ScheduleEntry};
use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::json;

use crate::config::Settings;
use crate::io::{emit, load};
use crate::{Command, ReportFormat};

pub fn run(command: Command, s: &Settings) -> Result<()> {
    match command {
        Command::Simulate { scripts, out } => simulate(s, &scripts, &out),
        Command::Filter { input, output } => filter(s, &input, output.as_deref()),
        Command::Segment { input, output } => segment(s, &input, output.as_deref()),
        Command::Features { input, output } => features(s, &input, output.as_deref()),
        Command::Classify { inputs, output } => classify(s, &inputs, output.as_deref()),
        Command::Occupancy { events, output } => occupancy(s, &events, output.as_deref()),
        Command::Fuse {
            classified,
            occupancy,
            events,
            output,
            flags,
        } => fuse(s, &classified, occupancy.as_deref(), &events, output.as_deref(), flags.as_deref()),
        Command::Label { input, output } => label(s, &input, output.as_deref()),
        Command::Profile { input, output } => profile(s, &input, output.as_deref()),
        Command::Report {
            input,
            output,
            format,
            query,
            label,
        } => report(s, &input, output.as_deref(), format, query.zip(label)),
        Command::Pipeline {
            scripts,
            inertial,
            events,
            out,
        } => run_pipeline(s, &scripts, &inertial, &events, &out),
    }
}

fn day_scripts(s: &Settings, paths: &[PathBuf]) -> Result<Vec<Vec<ScheduleEntry>>> {
    let scripts = paths.iter().map(|p| load(p, read_script)).collect::<Result<Vec<_>>>()?;
    let days = s.days.unwrap_or(scripts.len());
    if days == 0 {
        bail!("--days must be at least 1");
    }
    Ok((0..days).map(|d| scripts[d % scripts.len()].clone()).collect())
}

fn simulate_household(s: &Settings, scripts: &[PathBuf]) -> Result<Household> {
    let days = day_scripts(s, scripts)?;
    let tz = timezone(s.tz_offset_min.expect("resolved"))?;
    let midnight = adlsense_core::patterns::local_midnight(s.start_date.expect("resolved"), tz);
    Ok(generate_household(&days, midnight, &s.sim()?, &s.rules()?)?)
}

/// Centroids fitted on simulated clips; the seed is offset from the run's
/// so calibration never sees the evaluated noise.
fn calibrated(s: &Settings, config: &PipelineConfig) -> Result<adlsense_core::nn::CentroidModel> {
    let noise = NoiseSpec {
        seed: s.seed.expect("resolved").wrapping_add(1),
        ..s.noise()
    };
    let clip_ms = i64::from(s.calibration_s.expect("resolved")) * 1000;
    Ok(calibrate_centroids(&noise, clip_ms, s.period_ms.expect("resolved"), config)?)
}

fn day_file(d: usize) -> String {
    format!("inertial-{:02}.txt", d + 1)
}

fn write_truth(s: &Settings, h: &Household, out: &Path) -> Result<()> {
    let config = s.pipeline()?;
    let labels = pipeline::label_stage(&h.truth.derived, &s.priority_table()?, &config)?;
    emit(Some(&out.join("truth.csv")), &write_derived_csv(&h.truth.derived))?;
    emit(Some(&out.join("truth-labels.csv")), &write_window_labels(&labels))?;
    emit(
        Some(&out.join("truth-profile.json")),
        &pipeline::profile_stage(&labels, &config)?.to_json()?,
    )?;
    emit(Some(&out.join("events.jsonl")), &write_event_log(&h.events))
}

fn simulate(s: &Settings, scripts: &[PathBuf], out: &Path) -> Result<()> {
    let h = simulate_household(s, scripts)?;
    for d in 0..h.day_count() {
        emit(Some(&out.join(day_file(d))), &write_series(&[h.day_series(d)]))?;
    }
    write_truth(s, &h, out)?;
    emit(Some(&out.join("centroids.json")), &calibrated(s, &s.pipeline()?)?.to_json())?;
    println!("simulated {} day(s) into {}", h.day_count(), out.display());
    Ok(())
}

fn read_inertial(s: &Settings, path: &Path) -> Result<Vec<SampleSeries>> {
    let period = s.period_ms.expect("resolved");
    load(path, |t| read_series(t, period))
}

fn filter(s: &Settings, input: &Path, output: Option<&Path>) -> Result<()> {
    let config = s.pipeline()?;
    let mut out = Vec::new();
    for series in read_inertial(s, input)? {
        out.extend(pipeline::preprocess(&series, &config).with_context(|| format!("{}", input.display()))?);
    }
    emit(output, &write_series(&out))
}

fn segment(s: &Settings, input: &Path, output: Option<&Path>) -> Result<()> {
    let config = s.pipeline()?;
    let mut text = String::new();
    for series in read_inertial(s, input)? {
        let windows = pipeline::windows(&pipeline::split_gapless(&series), &config)?;
        text.push_str(&write_windows(&series.subject_id, &windows));
    }
    emit(output, &text)
}

fn features(s: &Settings, input: &Path, output: Option<&Path>) -> Result<()> {
    let config = s.pipeline()?;
    let windows = load(input, read_windows)?;
    let rows = pipeline::feature_rows(&windows, config.include_gyro)?;
    let layout = if config.include_gyro {
        FeatureLayout::AccelerometerGyroscope
    } else {
        FeatureLayout::Accelerometer
    };
    emit(output, &write_feature_table(layout, &rows))
}

fn require_classifier(s: &Settings) -> Result<Classifier> {
    s.classifier()?
        .context("no model: pass --centroids or --weights (or set one in the config file)")
}

fn classify(s: &Settings, inputs: &[PathBuf], output: Option<&Path>) -> Result<()> {
    let classifier = require_classifier(s)?;
    let mut rows = Vec::new();
    for p in inputs {
        let windows = load(p, read_windows)?;
        rows.extend(classifier.classify_all(&windows).with_context(|| format!("{}", p.display()))?);
    }
    emit(
        output,
        &write_classified(classifier.class_names(), classifier.has_probabilities(), &rows),
    )
}

fn read_events(paths: &[PathBuf]) -> Result<Vec<AmbientEvent>> {
    let streams = paths.iter().map(|p| load(p, read_event_log)).collect::<Result<Vec<_>>>()?;
    merge_streams(&streams).context("merging event logs")
}

fn occupancy(s: &Settings, events: &[PathBuf], output: Option<&Path>) -> Result<()> {
    let config = s.pipeline()?;
    let timeline = pipeline::occupancy(&read_events(events)?, &config)?;
    emit(output, &timeline.to_csv())
}

fn fuse(
    s: &Settings,
    classified: &Path,
    occupancy: Option<&Path>,
    events: &[PathBuf],
    output: Option<&Path>,
    flags: Option<&Path>,
) -> Result<()> {
    let config = s.pipeline()?;
    let windows = load(classified, read_classified)?;
    let timeline = match occupancy {
        Some(p) => load(p, OccupancyTimeline::from_csv)?,
        None => pipeline::occupancy(&read_events(events)?, &config)?,
    };
    let derived = pipeline::fuse_stage(&windows, &timeline, &s.rules()?, &config)?;
    if let Some(p) = flags {
        emit(Some(p), &write_flag_report(&flag_stream(&derived, config.tick_ms)))?;
    }
    emit(output, &write_derived_csv(&derived))
}

fn label(s: &Settings, input: &Path, output: Option<&Path>) -> Result<()> {
    let config = s.pipeline()?;
    let timeline = load(input, read_label_timeline)?;
    let labels = match timeline.first() {
        None => Vec::new(),
        Some(&(t0, _)) => {
            let origin = day_origin(t0, config.tz_offset_min)?;
            windowize_from(&timeline, origin, config.span_ms(), &s.priority_table()?)?
        }
    };
    emit(output, &write_window_labels(&labels))
}

fn profile(s: &Settings, input: &Path, output: Option<&Path>) -> Result<()> {
    let config = s.pipeline()?;
    let labels = load(input, read_window_labels)?;
    emit(output, &pipeline::profile_stage(&labels, &config)?.to_json()?)
}

fn hours(ms: i64) -> String {
    let minutes = ms / 60_000;
    format!("{}h {:02}m", minutes / 60, minutes % 60)
}

#[derive(Serialize)]
struct ActivityLine {
    label: String,
    duration: String,
    minutes: f64,
    share_pct: f64,
    bouts: usize,
}

#[derive(Serialize)]
struct DayLine {
    date: String,
    covered: String,
    activities: Vec<ActivityLine>,
}

#[derive(Serialize)]
struct WeekLine {
    from: String,
    to: String,
    /// One character per day: `x` occurred, `.` did not.
    occurrence: BTreeMap<String, String>,
}

fn readable(r: &ProfileReport) -> serde_json::Value {
    let days: Vec<DayLine> = r
        .days
        .iter()
        .map(|d| DayLine {
            date: d.date.to_string(),
            covered: hours(d.coverage_ms),
            activities: d
                .shares()
                .into_iter()
                .map(|(label, share)| {
                    let ms = d.duration_ms.get(&label).copied().unwrap_or(d.no_data_ms);
                    ActivityLine {
                        duration: hours(ms),
                        minutes: ms as f64 / 60_000.0,
                        share_pct: (share * 10_000.0).round() / 100.0,
                        bouts: d.bout_count.get(&label).copied().unwrap_or(0),
                        label,
                    }
                })
                .collect(),
        })
        .collect();
    let weeks: Vec<WeekLine> = r
        .weeks
        .iter()
        .map(|w| WeekLine {
            from: w.days[0].date.to_string(),
            to: w.days[6].date.to_string(),
            occurrence: w
                .occurrence
                .iter()
                .map(|(k, v)| (k.clone(), v.iter().map(|&b| if b { 'x' } else { '.' }).collect()))
                .collect(),
        })
        .collect();
    json!({ "tz_offset_min": r.tz_offset_min, "days": days, "weeks": weeks })
}

fn report(
    s: &Settings,
    input: &Path,
    output: Option<&Path>,
    format: ReportFormat,
    query: Option<(String, String)>,
) -> Result<()> {
    let config = s.pipeline()?;
    let labels: Vec<WindowLabel> = load(input, read_window_labels)?;
    if let Some((range, label)) = query {
        let range: ClockRange = range.parse()?;
        let tz = timezone(config.tz_offset_min)?;
        let (bouts, ms) = interval_query(&labels, range, &label, tz)?;
        let span = format!("{}-{}", format_clock(range.start_ms), format_clock(range.end_ms));
        let text = match format {
            ReportFormat::Json => {
                let v = json!({ "label": label, "range": span, "bouts": bouts, "duration_ms": ms, "duration": hours(ms) });
                format!("{}\n", serde_json::to_string_pretty(&v)?)
            }
            ReportFormat::Csv => format!("label,range,bouts,duration_ms\n{label},{span},{bouts},{ms}\n"),
        };
        return emit(output, &text);
    }
    let r = pipeline::profile_stage(&labels, &config)?;
    let text = match format {
        ReportFormat::Json => format!("{}\n", serde_json::to_string_pretty(&readable(&r))?),
        ReportFormat::Csv => r.to_csv(),
    };
    emit(output, &text)
}

fn agreement(got: &[WindowLabel], want: &[WindowLabel]) -> (usize, usize) {
    let same = got.iter().zip(want).filter(|(a, b)| a.start_ts == b.start_ts && a.label == b.label).count();
    (same, want.len().max(got.len()))
}

fn write_outputs(out: &Path, classifier: &Classifier, result: &pipeline::PipelineOutput, tick_ms: i64) -> Result<()> {
    let file = |name: &str| out.join(name);
    emit(
        Some(&file("classified.csv")),
        &write_classified(classifier.class_names(), classifier.has_probabilities(), &result.classified),
    )?;
    emit(Some(&file("occupancy.csv")), &result.occupancy.to_csv())?;
    emit(Some(&file("derived.csv")), &write_derived_csv(&result.derived))?;
    emit(Some(&file("flags.csv")), &write_flag_report(&flag_stream(&result.derived, tick_ms)))?;
    emit(Some(&file("labels.csv")), &write_window_labels(&result.labels))?;
    emit(Some(&file("profile.json")), &result.report.to_json()?)?;
    emit(Some(&file("report.csv")), &result.report.to_csv())
}

fn run_pipeline(s: &Settings, scripts: &[PathBuf], inertial: &[PathBuf], events: &[PathBuf], out: &Path) -> Result<()> {
    let config = s.pipeline()?;
    let rules = s.rules()?;
    let priorities = s.priority_table()?;
    let classifier = match s.classifier()? {
        Some(c) => c,
        None => {
            let model = calibrated(s, &config)?;
            emit(Some(&out.join("centroids.json")), &model.to_json())?;
            Classifier::Centroid(model)
        }
    };
    let (result, truth): (pipeline::PipelineOutput, Option<Vec<DerivedTick>>) = if !scripts.is_empty() {
        let h = simulate_household(s, scripts)?;
        write_truth(s, &h, out)?;
        let days = (0..h.day_count()).map(|d| h.day_series(d));
        let r = pipeline::run(days, &h.events, &classifier, &rules, &priorities, &config)?;
        (r, Some(h.truth.derived))
    } else if !inertial.is_empty() {
        let mut days = Vec::new();
        for p in inertial {
            days.extend(read_inertial(s, p)?);
        }
        let r = pipeline::run(days, &read_events(events)?, &classifier, &rules, &priorities, &config)?;
        (r, None)
    } else {
        bail!("pipeline needs --script or --inertial with --events");
    };
    write_outputs(out, &classifier, &result, config.tick_ms)?;

    let mut summary = String::new();
    let _ = writeln!(summary, "days: {}", result.report.days.len());
    let _ = writeln!(summary, "windows: {}", result.labels.len());
    let _ = writeln!(summary, "flagged runs: {}", flag_stream(&result.derived, config.tick_ms).len());
    if let Some(truth) = truth {
        let want = pipeline::label_stage(&truth, &priorities, &config)?;
        let (same, total) = agreement(&result.labels, &want);
        let _ = writeln!(summary, "agreement with script: {same}/{total}");
    }
    emit(None, &summary)
}
