//! One label per profiling window from the 5-second derived stream: ranked
//! activities first, then the most frequent, then the latest-appearing of
//! the tied.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_PRIORITIES_CSV: &str = include_str!("../data/priorities.csv");
/// Label of a window that received no entries.
pub const NO_DATA: &str = "NoData";
pub const SUPPORTED_SPANS_MIN: [u32; 3] = [2, 5, 10];

/// Activity name → rank, 1 being the most important. Matching is
/// case-insensitive; the table's spelling is what gets reported.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PriorityTable {
    ranks: BTreeMap<String, (String, u32)>,
}

impl PriorityTable {
    pub fn new<I, S>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, u32)>,
        S: Into<String>,
    {
        let mut t = PriorityTable::default();
        for (name, rank) in entries {
            let name = name.into();
            if rank == 0 {
                return Err(Error::InvalidParameter(format!("rank of {name:?} must be ≥ 1")));
            }
            if t.ranks.insert(name.to_lowercase(), (name.clone(), rank)).is_some() {
                return Err(Error::InvalidParameter(format!("duplicate activity {name:?}")));
            }
        }
        Ok(t)
    }

    /// The bundled table.
    pub fn standard() -> Self {
        PriorityTable::from_csv(DEFAULT_PRIORITIES_CSV).expect("bundled priority file is valid")
    }

    pub fn rank(&self, activity: &str) -> Option<u32> {
        self.ranks.get(&activity.to_lowercase()).map(|e| e.1)
    }

    /// Spelling used by the table, if the activity is ranked.
    pub fn canonical(&self, activity: &str) -> Option<&str> {
        self.ranks.get(&activity.to_lowercase()).map(|e| e.0.as_str())
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("activity,") {
                continue;
            }
            let (name, rank) = line
                .rsplit_once(',')
                .ok_or_else(|| Error::parse(i + 1, "expected activity,priority"))?;
            let rank: u32 = rank
                .trim()
                .parse()
                .map_err(|e| Error::parse(i + 1, format!("bad priority: {e}")))?;
            if rank == 0 {
                return Err(Error::parse(i + 1, "priority must be ≥ 1"));
            }
            entries.push((name.trim().to_string(), rank));
        }
        PriorityTable::new(entries).map_err(|e| match e {
            Error::InvalidParameter(m) => Error::parse(0, m),
            e => e,
        })
    }

    /// Entries ordered by rank, then name.
    pub fn to_csv(&self) -> String {
        let mut rows: Vec<_> = self.ranks.values().collect();
        rows.sort_by(|a, b| (a.1, &a.0).cmp(&(b.1, &b.0)));
        let mut out = String::from("activity,priority\n");
        for (name, rank) in rows {
            let _ = writeln!(out, "{name},{rank}");
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelMethod {
    Priority,
    Frequency,
    Tie,
    /// The window held no entries.
    None,
}

impl LabelMethod {
    pub fn name(self) -> &'static str {
        match self {
            LabelMethod::Priority => "priority",
            LabelMethod::Frequency => "frequency",
            LabelMethod::Tie => "tie",
            LabelMethod::None => "none",
        }
    }
}

impl fmt::Display for LabelMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LabelMethod {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "priority" => Ok(LabelMethod::Priority),
            "frequency" => Ok(LabelMethod::Frequency),
            "tie" => Ok(LabelMethod::Tie),
            "none" => Ok(LabelMethod::None),
            other => Err(format!("unknown method {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowLabel {
    pub start_ts: i64,
    pub end_ts: i64,
    pub label: String,
    pub method: LabelMethod,
}

impl WindowLabel {
    pub fn span_ms(&self) -> i64 {
        self.end_ts - self.start_ts
    }

    pub fn is_no_data(&self) -> bool {
        self.label == NO_DATA
    }
}

struct Tally {
    spelling: String,
    count: usize,
    first: usize,
}

/// Label for one window of entries.
pub fn label_window<S: AsRef<str>>(labels: &[S], priorities: &PriorityTable) -> Result<(String, LabelMethod)> {
    if labels.is_empty() {
        return Err(Error::NoLabels);
    }
    // Keyed case-insensitively, remembering first spelling and position.
    let mut tallies: BTreeMap<String, Tally> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        let l = l.as_ref();
        tallies
            .entry(l.to_lowercase())
            .and_modify(|t| t.count += 1)
            .or_insert(Tally {
                spelling: l.to_string(),
                count: 1,
                first: i,
            });
    }
    let report = |t: &Tally| priorities.canonical(&t.spelling).unwrap_or(&t.spelling).to_string();

    if tallies.len() == 1 {
        let t = tallies.values().next().expect("one entry");
        return Ok((report(t), LabelMethod::Frequency));
    }

    let best_rank = tallies.values().filter_map(|t| priorities.rank(&t.spelling)).min();
    let pool: Vec<&Tally> = match best_rank {
        Some(r) => tallies
            .values()
            .filter(|t| priorities.rank(&t.spelling) == Some(r))
            .collect(),
        None => tallies.values().collect(),
    };
    if best_rank.is_some() && pool.len() == 1 {
        return Ok((report(pool[0]), LabelMethod::Priority));
    }
    let top = pool.iter().map(|t| t.count).max().expect("non-empty pool");
    let leaders: Vec<&&Tally> = pool.iter().filter(|t| t.count == top).collect();
    if leaders.len() == 1 {
        return Ok((report(leaders[0]), LabelMethod::Frequency));
    }
    let last = leaders.iter().max_by_key(|t| t.first).expect("non-empty");
    Ok((report(last), LabelMethod::Tie))
}

/// Tumbling windows of `span_ms` starting at the first entry's timestamp.
pub fn windowize<S: AsRef<str>>(timeline: &[(i64, S)], span_ms: i64, priorities: &PriorityTable) -> Result<Vec<WindowLabel>> {
    match timeline.first() {
        None => Ok(Vec::new()),
        Some(&(t0, _)) => windowize_from(timeline, t0, span_ms, priorities),
    }
}

/// Tumbling windows of `span_ms` aligned to `origin`, covering every entry
/// at or after it; windows without entries are labelled [`NO_DATA`].
pub fn windowize_from<S: AsRef<str>>(
    timeline: &[(i64, S)],
    origin: i64,
    span_ms: i64,
    priorities: &PriorityTable,
) -> Result<Vec<WindowLabel>> {
    if span_ms <= 0 {
        return Err(Error::InvalidParameter(format!("window span must be positive, got {span_ms}")));
    }
    if let Some(i) = timeline.windows(2).position(|w| w[1].0 < w[0].0) {
        return Err(Error::InvalidParameter(format!("timeline out of order at entry {}", i + 1)));
    }
    let entries: Vec<&(i64, S)> = timeline.iter().filter(|e| e.0 >= origin).collect();
    let Some(last) = entries.last() else {
        return Ok(Vec::new());
    };
    let count = (last.0 - origin) / span_ms + 1;
    let mut out = Vec::with_capacity(count as usize);
    let mut cursor = 0;
    for k in 0..count {
        let start_ts = origin + k * span_ms;
        let end_ts = start_ts + span_ms;
        let begin = cursor;
        while cursor < entries.len() && entries[cursor].0 < end_ts {
            cursor += 1;
        }
        let labels: Vec<&str> = entries[begin..cursor].iter().map(|e| e.1.as_ref()).collect();
        let (label, method) = if labels.is_empty() {
            (NO_DATA.to_string(), LabelMethod::None)
        } else {
            label_window(&labels, priorities)?
        };
        out.push(WindowLabel {
            start_ts,
            end_ts,
            label,
            method,
        });
    }
    Ok(out)
}

/// CSV `window_start,window_end,label,method`.
pub fn write_window_labels(windows: &[WindowLabel]) -> String {
    let mut out = String::from("window_start,window_end,label,method\n");
    for w in windows {
        let _ = writeln!(out, "{},{},{},{}", w.start_ts, w.end_ts, w.label, w.method);
    }
    out
}

pub fn read_window_labels(text: &str) -> Result<Vec<WindowLabel>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("window_start,") {
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 4 {
            return Err(Error::parse(i + 1, format!("expected 4 columns, got {}", f.len())));
        }
        let num = |s: &str| s.parse::<i64>().map_err(|e| Error::parse(i + 1, format!("bad timestamp: {e}")));
        let (start_ts, end_ts) = (num(f[0])?, num(f[1])?);
        if end_ts <= start_ts {
            return Err(Error::parse(i + 1, "window end must follow its start"));
        }
        out.push(WindowLabel {
            start_ts,
            end_ts,
            label: f[2].to_string(),
            method: f[3].parse().map_err(|e: String| Error::parse(i + 1, e))?,
        });
    }
    Ok(out)
}

/// Reads `ts,label[,…]` rows (extra columns such as a flag are ignored), so
/// both derived timelines and plain label streams are accepted.
pub fn read_label_timeline(text: &str) -> Result<Vec<(i64, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("ts,") {
            continue;
        }
        let mut f = line.split(',').map(str::trim);
        let (Some(ts), Some(label)) = (f.next(), f.next()) else {
            return Err(Error::parse(i + 1, "expected ts,label"));
        };
        let ts = ts.parse().map_err(|e| Error::parse(i + 1, format!("bad timestamp {ts:?}: {e}")))?;
        if label.is_empty() {
            return Err(Error::parse(i + 1, "empty label"));
        }
        out.push((ts, label.to_string()));
    }
    Ok(out)
}
