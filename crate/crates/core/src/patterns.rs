//! Day and week profiles over window labels: durations, bout counts,
//! occurrence, and time-of-day queries.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use chrono::{DateTime, Duration, FixedOffset, NaiveDate, NaiveTime, Timelike};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labelling::{WindowLabel, NO_DATA};

pub const DAY_MS: i64 = 86_400_000;

/// Maximal run of one label over contiguous windows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bout {
    pub label: String,
    pub start_ts: i64,
    pub end_ts: i64,
}

impl Bout {
    pub fn duration_ms(&self) -> i64 {
        self.end_ts - self.start_ts
    }
}

/// Coalesces consecutive equal labels. `NoData` windows and gaps between
/// windows end a run; `NoData` never forms a bout.
pub fn bouts(windows: &[WindowLabel]) -> Vec<Bout> {
    let mut out: Vec<Bout> = Vec::new();
    let mut open = false;
    for w in windows {
        if w.is_no_data() {
            open = false;
            continue;
        }
        match out.last_mut() {
            Some(b) if open && b.label == w.label && b.end_ts == w.start_ts => b.end_ts = w.end_ts,
            _ => out.push(Bout {
                label: w.label.clone(),
                start_ts: w.start_ts,
                end_ts: w.end_ts,
            }),
        }
        open = true;
    }
    out
}

/// Offset east of UTC, in minutes.
pub fn timezone(offset_minutes: i32) -> Result<FixedOffset> {
    FixedOffset::east_opt(offset_minutes * 60)
        .ok_or_else(|| Error::InvalidParameter(format!("timezone offset {offset_minutes} min out of range")))
}

fn local(ts: i64, tz: FixedOffset) -> Result<DateTime<FixedOffset>> {
    DateTime::from_timestamp_millis(ts)
        .map(|d| d.with_timezone(&tz))
        .ok_or_else(|| Error::InvalidParameter(format!("timestamp {ts} out of range")))
}

/// Local calendar date of `ts`.
pub fn local_date(ts: i64, tz: FixedOffset) -> Result<NaiveDate> {
    Ok(local(ts, tz)?.date_naive())
}

/// Epoch ms of local midnight starting `date`.
pub fn local_midnight(date: NaiveDate, tz: FixedOffset) -> i64 {
    date.and_time(NaiveTime::MIN).and_utc().timestamp_millis() - i64::from(tz.local_minus_utc()) * 1000
}

/// Milliseconds since local midnight.
pub fn ms_of_day(ts: i64, tz: FixedOffset) -> Result<i64> {
    let d = local(ts, tz)?;
    Ok(i64::from(d.num_seconds_from_midnight()) * 1000 + i64::from(d.timestamp_subsec_millis()))
}

fn day_of_window(w: &WindowLabel, tz: FixedOffset) -> Result<NaiveDate> {
    let day = local_date(w.start_ts, tz)?;
    if local_date(w.end_ts - 1, tz)? != day {
        return Err(Error::CrossesDayBoundary {
            start_ts: w.start_ts,
            end_ts: w.end_ts,
        });
    }
    Ok(day)
}

/// Groups windows by local calendar day, in order.
pub fn split_days(windows: &[WindowLabel], tz: FixedOffset) -> Result<Vec<(NaiveDate, Vec<WindowLabel>)>> {
    let mut out: Vec<(NaiveDate, Vec<WindowLabel>)> = Vec::new();
    for w in windows {
        let day = day_of_window(w, tz)?;
        match out.last_mut() {
            Some((d, ws)) if *d == day => ws.push(w.clone()),
            _ => out.push((day, vec![w.clone()])),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayProfile {
    pub date: NaiveDate,
    /// Total span of the windows, `NoData` included.
    pub coverage_ms: i64,
    pub no_data_ms: i64,
    pub duration_ms: BTreeMap<String, i64>,
    pub bout_count: BTreeMap<String, usize>,
}

impl DayProfile {
    /// Fraction of coverage per label; `NoData` is listed when present, so
    /// the values sum to one.
    pub fn shares(&self) -> BTreeMap<String, f64> {
        let mut out = BTreeMap::new();
        if self.coverage_ms == 0 {
            return out;
        }
        let total = self.coverage_ms as f64;
        for (label, &d) in &self.duration_ms {
            out.insert(label.clone(), d as f64 / total);
        }
        if self.no_data_ms > 0 {
            out.insert(NO_DATA.to_string(), self.no_data_ms as f64 / total);
        }
        out
    }

    pub fn occurred(&self, label: &str) -> bool {
        self.duration_ms.get(label).is_some_and(|&d| d > 0)
    }
}

/// Profile of windows that all fall on one local calendar day.
pub fn day_profile(windows: &[WindowLabel], tz: FixedOffset) -> Result<DayProfile> {
    let first = windows.first().ok_or(Error::EmptyInput)?;
    let date = day_of_window(first, tz)?;
    let mut p = DayProfile {
        date,
        coverage_ms: 0,
        no_data_ms: 0,
        duration_ms: BTreeMap::new(),
        bout_count: BTreeMap::new(),
    };
    for w in windows {
        let day = day_of_window(w, tz)?;
        if day != date {
            return Err(Error::InvalidParameter(format!("windows span {date} and {day}; split days first")));
        }
        p.coverage_ms += w.span_ms();
        if w.is_no_data() {
            p.no_data_ms += w.span_ms();
        } else {
            *p.duration_ms.entry(w.label.clone()).or_default() += w.span_ms();
        }
    }
    for b in bouts(windows) {
        *p.bout_count.entry(b.label).or_default() += 1;
    }
    Ok(p)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeekProfile {
    pub days: Vec<DayProfile>,
    /// Label → whether it occurred on each of the 7 days.
    pub occurrence: BTreeMap<String, Vec<bool>>,
}

pub fn week_profile(days: &[DayProfile]) -> Result<WeekProfile> {
    if days.len() != 7 {
        return Err(Error::WrongDayCount(days.len()));
    }
    for pair in days.windows(2) {
        if pair[1].date != pair[0].date + Duration::days(1) {
            return Err(Error::NonConsecutiveDays(format!("{} then {}", pair[0].date, pair[1].date)));
        }
    }
    let mut occurrence: BTreeMap<String, Vec<bool>> = BTreeMap::new();
    for d in days {
        for label in d.duration_ms.keys() {
            occurrence.entry(label.clone()).or_insert_with(|| vec![false; 7]);
        }
    }
    for (label, row) in &mut occurrence {
        for (slot, d) in row.iter_mut().zip(days) {
            *slot = d.occurred(label);
        }
    }
    Ok(WeekProfile {
        days: days.to_vec(),
        occurrence,
    })
}

/// Half-open local time-of-day range; `24:00` is allowed as an end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClockRange {
    pub start_ms: i64,
    pub end_ms: i64,
}

impl ClockRange {
    pub const FULL_DAY: ClockRange = ClockRange {
        start_ms: 0,
        end_ms: DAY_MS,
    };

    pub fn new(start_ms: i64, end_ms: i64) -> Result<Self> {
        if !(0..=DAY_MS).contains(&start_ms) || !(0..=DAY_MS).contains(&end_ms) {
            return Err(Error::InvalidParameter("clock range outside 00:00–24:00".into()));
        }
        if start_ms > end_ms {
            return Err(Error::InvertedRange {
                start: format_clock(start_ms),
                end: format_clock(end_ms),
            });
        }
        Ok(ClockRange { start_ms, end_ms })
    }

    pub fn contains(&self, ms_of_day: i64) -> bool {
        self.start_ms <= ms_of_day && ms_of_day < self.end_ms
    }
}

impl FromStr for ClockRange {
    type Err = Error;

    /// `HH:MM-HH:MM`.
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once('-')
            .ok_or_else(|| Error::InvalidParameter(format!("expected HH:MM-HH:MM, got {s:?}")))?;
        ClockRange::new(parse_clock(a)?, parse_clock(b)?)
    }
}

/// `HH:MM` or `HH:MM:SS` → ms since midnight; `24:00` maps to a full day.
pub fn parse_clock(s: &str) -> Result<i64> {
    let s = s.trim();
    if s == "24:00" || s == "24:00:00" {
        return Ok(DAY_MS);
    }
    let t = NaiveTime::parse_from_str(s, "%H:%M:%S")
        .or_else(|_| NaiveTime::parse_from_str(s, "%H:%M"))
        .map_err(|e| Error::InvalidParameter(format!("bad clock time {s:?}: {e}")))?;
    Ok(i64::from(t.num_seconds_from_midnight()) * 1000)
}

pub fn format_clock(ms: i64) -> String {
    let secs = ms / 1000;
    let (h, m, s) = (secs / 3600, secs / 60 % 60, secs % 60);
    if s == 0 {
        format!("{h:02}:{m:02}")
    } else {
        format!("{h:02}:{m:02}:{s:02}")
    }
}

/// Bout count and total duration of `label` over windows starting inside
/// `range` (local time).
pub fn interval_query(windows: &[WindowLabel], range: ClockRange, label: &str, tz: FixedOffset) -> Result<(usize, i64)> {
    let mut kept = Vec::new();
    for w in windows {
        if range.contains(ms_of_day(w.start_ts, tz)?) {
            kept.push(w.clone());
        }
    }
    let hits: Vec<Bout> = bouts(&kept).into_iter().filter(|b| b.label == label).collect();
    Ok((hits.len(), hits.iter().map(Bout::duration_ms).sum()))
}

/// Per-day and per-week aggregates for a whole labelled run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileReport {
    pub tz_offset_min: i32,
    pub days: Vec<DayProfile>,
    /// Consecutive 7-day blocks; a trailing partial week is left out.
    pub weeks: Vec<WeekProfile>,
}

impl ProfileReport {
    pub fn build(windows: &[WindowLabel], tz_offset_min: i32) -> Result<Self> {
        let tz = timezone(tz_offset_min)?;
        let days = split_days(windows, tz)?
            .iter()
            .map(|(_, ws)| day_profile(ws, tz))
            .collect::<Result<Vec<_>>>()?;
        let mut weeks = Vec::new();
        let mut i = 0;
        while i + 7 <= days.len() {
            match week_profile(&days[i..i + 7]) {
                Ok(w) => {
                    weeks.push(w);
                    i += 7;
                }
                Err(Error::NonConsecutiveDays(_)) => i += 1,
                Err(e) => return Err(e),
            }
        }
        Ok(ProfileReport {
            tz_offset_min,
            days,
            weeks,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// CSV `date,label,duration_ms,share,bouts`, one row per label per day.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("date,label,duration_ms,share,bouts\n");
        for d in &self.days {
            for (label, share) in d.shares() {
                let duration = if label == NO_DATA {
                    d.no_data_ms
                } else {
                    d.duration_ms[&label]
                };
                let n = d.bout_count.get(&label).copied().unwrap_or(0);
                let _ = writeln!(out, "{},{},{},{:.6},{}", d.date, label, duration, share, n);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labelling::LabelMethod;

    const MIN2: i64 = 120_000;

    fn windows(labels: &[&str], origin: i64) -> Vec<WindowLabel> {
        labels
            .iter()
            .enumerate()
            .map(|(i, l)| WindowLabel {
                start_ts: origin + i as i64 * MIN2,
                end_ts: origin + (i as i64 + 1) * MIN2,
                label: l.to_string(),
                method: LabelMethod::Frequency,
            })
            .collect()
    }

    fn utc() -> FixedOffset {
        timezone(0).unwrap()
    }

    #[test]
    fn bout_runs() {
        let b = bouts(&windows(&["W", "W", "S", "W"], 0));
        assert_eq!(b.len(), 3);
        assert_eq!((b[0].label.as_str(), b[0].duration_ms()), ("W", 2 * MIN2));
        assert_eq!(bouts(&windows(&["W"], 0)).len(), 1);
        assert!(bouts(&[]).is_empty());
        assert_eq!(bouts(&windows(&["W", NO_DATA, "W"], 0)).len(), 2);
    }

    #[test]
    fn gaps_between_windows_split_bouts() {
        let mut w = windows(&["W", "W"], 0);
        w[1].start_ts += MIN2;
        w[1].end_ts += MIN2;
        assert_eq!(bouts(&w).len(), 2);
    }

    #[test]
    fn one_activity_day() {
        let w = windows(&vec!["Sleep"; 720], 0);
        let p = day_profile(&w, utc()).unwrap();
        assert_eq!(p.coverage_ms, DAY_MS);
        assert_eq!(p.duration_ms["Sleep"], DAY_MS);
        assert_eq!(p.shares()["Sleep"], 1.0);
        assert_eq!(p.bout_count["Sleep"], 1);
    }

    #[test]
    fn quarter_day_share() {
        let mut labels = vec!["Sleep"; 180];
        labels.extend(vec!["Sitting in Hall"; 540]);
        let p = day_profile(&windows(&labels, 0), utc()).unwrap();
        assert_eq!(p.shares()["Sleep"], 0.25);
        let total: f64 = p.shares().values().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn conservation_with_no_data() {
        let p = day_profile(&windows(&["a", NO_DATA, "b", NO_DATA], 0), utc()).unwrap();
        assert_eq!(p.duration_ms.values().sum::<i64>() + p.no_data_ms, p.coverage_ms);
        assert!(!p.duration_ms.contains_key(NO_DATA));
    }

    #[test]
    fn midnight_crossing_is_rejected() {
        let w = windows(&["a"], DAY_MS - 60_000);
        assert!(matches!(day_profile(&w, utc()), Err(Error::CrossesDayBoundary { .. })));
        let w = windows(&["a", "b"], DAY_MS - MIN2);
        assert!(day_profile(&w, utc()).is_err());
        assert_eq!(split_days(&w, utc()).unwrap().len(), 2);
    }

    #[test]
    fn timezone_moves_midnight() {
        let tz = timezone(330).unwrap();
        let date = NaiveDate::from_ymd_opt(2024, 3, 1).unwrap();
        let m = local_midnight(date, tz);
        assert_eq!(local_date(m, tz).unwrap(), date);
        assert_eq!(local_date(m - 1, tz).unwrap(), date.pred_opt().unwrap());
        assert_eq!(ms_of_day(m + 3_600_000, tz).unwrap(), 3_600_000);
    }

    fn day(date: NaiveDate, labels: &[&str]) -> DayProfile {
        day_profile(&windows(labels, local_midnight(date, utc())), utc()).unwrap()
    }

    #[test]
    fn weekly_occurrence() {
        let d0 = NaiveDate::from_ymd_opt(2024, 1, 1).unwrap();
        let days: Vec<DayProfile> = (0..7)
            .map(|i| {
                let d = d0 + Duration::days(i);
                if i == 0 {
                    day(d, &["walk", "sit"])
                } else {
                    day(d, &["sit"])
                }
            })
            .collect();
        let w = week_profile(&days).unwrap();
        assert_eq!(w.occurrence["sit"], vec![true; 7]);
        assert_eq!(w.occurrence["walk"], [true, false, false, false, false, false, false]);
        assert!(!w.occurrence.contains_key("jog"));
        assert!(matches!(week_profile(&days[..6]), Err(Error::WrongDayCount(6))));
        let mut gap = days.clone();
        gap[3] = day(d0 + Duration::days(10), &["sit"]);
        assert!(matches!(week_profile(&gap), Err(Error::NonConsecutiveDays(_))));
    }

    #[test]
    fn clock_ranges() {
        let r: ClockRange = "06:00-11:00".parse().unwrap();
        assert_eq!((r.start_ms, r.end_ms), (6 * 3_600_000, 11 * 3_600_000));
        assert_eq!("00:00-24:00".parse::<ClockRange>().unwrap(), ClockRange::FULL_DAY);
        assert!(matches!("11:00-06:00".parse::<ClockRange>(), Err(Error::InvertedRange { .. })));
        assert!("25:00-26:00".parse::<ClockRange>().is_err());
        assert_eq!(format_clock(r.end_ms), "11:00");
    }

    #[test]
    fn morning_drinking_query() {
        let mut labels = vec!["Sitting in Hall"; 720];
        for slot in [190, 220, 260, 300, 400] {
            labels[slot] = "Drinking Activity";
        }
        let w = windows(&labels, 0);
        let morning: ClockRange = "06:00-11:00".parse().unwrap();
        let (n, d) = interval_query(&w, morning, "Drinking Activity", utc()).unwrap();
        assert_eq!((n, d), (4, 4 * MIN2));
        assert_eq!(interval_query(&w, morning, "Jogging", utc()).unwrap(), (0, 0));
        let p = day_profile(&w, utc()).unwrap();
        let (n, d) = interval_query(&w, ClockRange::FULL_DAY, "Sitting in Hall", utc()).unwrap();
        assert_eq!((n, d), (p.bout_count["Sitting in Hall"], p.duration_ms["Sitting in Hall"]));
    }

    #[test]
    fn report_round_trip() {
        let d0 = local_midnight(NaiveDate::from_ymd_opt(2024, 1, 1).unwrap(), utc());
        let w: Vec<WindowLabel> = (0..8).flat_map(|d| windows(&["a", "b"], d0 + d * DAY_MS)).collect();
        let r = ProfileReport::build(&w, 0).unwrap();
        assert_eq!((r.days.len(), r.weeks.len()), (8, 1));
        assert_eq!(ProfileReport::from_json(&r.to_json().unwrap()).unwrap(), r);
        let csv = r.to_csv();
        assert!(csv.starts_with("date,label,duration_ms,share,bouts\n2024-01-01,a,120000,0.500000,1\n"));
    }
}
