use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::ambient::{Appliance, RoomId};
use crate::error::{Error, Result};
use crate::fusion::BasicActivity;
use crate::patterns::{format_clock, parse_clock, DAY_MS};

/// One scripted activity within a day.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleEntry {
    /// Offset from local midnight.
    pub start_ms: i64,
    pub duration_ms: i64,
    pub room: RoomId,
    pub basic: BasicActivity,
    pub appliances: BTreeSet<Appliance>,
}

impl ScheduleEntry {
    pub fn end_ms(&self) -> i64 {
        self.start_ms + self.duration_ms
    }
}

pub(crate) fn validate(script: &[ScheduleEntry]) -> Result<()> {
    for e in script {
        if e.duration_ms <= 0 {
            return Err(Error::InvalidParameter(format!("entry at {} has no duration", format_clock(e.start_ms))));
        }
        if e.start_ms < 0 || e.end_ms() > DAY_MS {
            return Err(Error::InvalidParameter(format!("entry at {} leaves the day", format_clock(e.start_ms))));
        }
        if e.basic == BasicActivity::Sleep {
            return Err(Error::InvalidParameter("scripts use lie; sleep is derived".into()));
        }
    }
    if let Some(w) = script.windows(2).find(|w| w[1].start_ms < w[0].end_ms()) {
        return Err(Error::OverlappingSchedule(format_clock(w[1].start_ms)));
    }
    Ok(())
}

/// CSV `clock_start,duration_s,room,basic,appliances`, appliances separated
/// by `|` (empty or `-` for none).
pub fn read_script(text: &str) -> Result<Vec<ScheduleEntry>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("clock_start,") {
            continue;
        }
        let err = |m: String| Error::parse(i + 1, m);
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 5 && f.len() != 4 {
            return Err(err(format!("expected 5 columns, got {}", f.len())));
        }
        let start_ms = parse_clock(f[0]).map_err(|e| err(e.to_string()))?;
        let secs: f64 = f[1].parse().map_err(|_| err(format!("bad duration {:?}", f[1])))?;
        if !secs.is_finite() || secs <= 0.0 {
            return Err(err("duration must be positive".into()));
        }
        let appliances = match f.get(4).copied().unwrap_or("") {
            "" | "-" => BTreeSet::new(),
            list => list.split('|').map(|a| a.parse().map_err(&err)).collect::<Result<_>>()?,
        };
        out.push(ScheduleEntry {
            start_ms,
            duration_ms: (secs * 1000.0).round() as i64,
            room: f[2].parse().map_err(&err)?,
            basic: f[3].parse().map_err(&err)?,
            appliances,
        });
    }
    validate(&out)?;
    Ok(out)
}

pub fn write_script(script: &[ScheduleEntry]) -> String {
    let mut out = String::from("clock_start,duration_s,room,basic,appliances\n");
    for e in script {
        let apps: Vec<&str> = e.appliances.iter().map(|a| a.name()).collect();
        let secs = e.duration_ms as f64 / 1000.0;
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            format_clock(e.start_ms),
            secs,
            e.room.name(),
            e.basic,
            if apps.is_empty() { "-".to_string() } else { apps.join("|") }
        );
    }
    out
}
