//! Line-oriented inertial text format:
//! `subject_id,activity_hint,timestamp_ms,ax,ay,az[,gx,gy,gz];`
//!
//! The trailing semicolon is optional and the activity hint may be empty.

use std::fmt::Write as _;

use super::{SampleSeries, SampleWindow, TriaxialSample};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct InertialRecord {
    pub subject_id: String,
    pub activity_hint: String,
    pub sample: TriaxialSample,
}

fn parse_f64(field: &str, name: &str, line: usize) -> Result<f64> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| Error::parse(line, format!("{name}: not a number: {field:?}")))?;
    if !v.is_finite() {
        return Err(Error::parse(line, format!("{name}: non-finite value")));
    }
    Ok(v)
}

/// Parses one record. `line` is the 1-based line number used in errors.
pub fn parse_line(text: &str, line: usize) -> Result<InertialRecord> {
    let body = text.trim();
    let body = body.strip_suffix(';').unwrap_or(body);
    let fields: Vec<&str> = body.split(',').collect();
    if fields.len() != 6 && fields.len() != 9 {
        return Err(Error::parse(
            line,
            format!("expected 6 or 9 fields, got {}", fields.len()),
        ));
    }
    let subject_id = fields[0].trim();
    if subject_id.is_empty() {
        return Err(Error::parse(line, "empty subject id"));
    }
    let ts: i64 = fields[2]
        .trim()
        .parse()
        .map_err(|_| Error::parse(line, format!("timestamp: not an integer: {:?}", fields[2])))?;
    let mut sample = TriaxialSample::new(
        ts,
        parse_f64(fields[3], "ax", line)?,
        parse_f64(fields[4], "ay", line)?,
        parse_f64(fields[5], "az", line)?,
    );
    if fields.len() == 9 {
        sample = sample.with_gyro(
            parse_f64(fields[6], "gx", line)?,
            parse_f64(fields[7], "gy", line)?,
            parse_f64(fields[8], "gz", line)?,
        );
    }
    Ok(InertialRecord {
        subject_id: subject_id.to_string(),
        activity_hint: fields[1].trim().to_string(),
        sample,
    })
}

pub fn format_line(out: &mut String, subject_id: &str, hint: &str, s: &TriaxialSample) {
    let [ax, ay, az] = s.acc;
    let _ = write!(out, "{subject_id},{hint},{},{ax},{ay},{az}", s.ts);
    if let Some([gx, gy, gz]) = s.gyro {
        let _ = write!(out, ",{gx},{gy},{gz}");
    }
    out.push_str(";\n");
}

/// Reads a whole document; blank lines and `#` comments are skipped.
/// Records are grouped by subject in order of first appearance.
pub fn read_series(text: &str, period_ms: i64) -> Result<Vec<SampleSeries>> {
    let mut out: Vec<SampleSeries> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let rec = parse_line(trimmed, i + 1)?;
        match out.iter_mut().find(|s| s.subject_id == rec.subject_id) {
            Some(series) => {
                if series.samples.last().is_some_and(|p| p.ts >= rec.sample.ts) {
                    return Err(Error::parse(i + 1, "timestamps must be strictly increasing"));
                }
                series.samples.push(rec.sample);
            }
            None => out.push(
                SampleSeries::new(rec.subject_id, vec![rec.sample]).with_period(period_ms),
            ),
        }
    }
    Ok(out)
}

pub fn write_series(series: &[SampleSeries]) -> String {
    let mut out = String::new();
    for s in series {
        for sample in &s.samples {
            format_line(&mut out, &s.subject_id, "", sample);
        }
    }
    out
}

/// Window files: a `# window <start_ts> <end_ts>` marker followed by the
/// window's samples in the inertial line format.
pub fn write_windows(subject_id: &str, windows: &[SampleWindow]) -> String {
    let mut out = String::new();
    for w in windows {
        let _ = writeln!(out, "# window {} {}", w.start_ts, w.end_ts);
        for s in &w.samples {
            format_line(&mut out, subject_id, "", s);
        }
    }
    out
}

pub fn read_windows(text: &str) -> Result<Vec<SampleWindow>> {
    let mut out: Vec<SampleWindow> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("# window") {
            let mut parts = rest.split_whitespace().map(str::parse::<i64>);
            match (parts.next(), parts.next(), parts.next()) {
                (Some(Ok(start_ts)), Some(Ok(end_ts)), None) => out.push(SampleWindow {
                    start_ts,
                    end_ts,
                    samples: Vec::new(),
                }),
                _ => return Err(Error::parse(i + 1, "malformed window marker")),
            }
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let rec = parse_line(line, i + 1)?;
        match out.last_mut() {
            Some(w) => w.samples.push(rec.sample),
            None => return Err(Error::parse(i + 1, "sample before any window marker")),
        }
    }
    Ok(out)
}
