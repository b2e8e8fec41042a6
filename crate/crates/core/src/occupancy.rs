//! Single-person occupancy from PIR events, plus appliance ON intervals.
//!
//! All intervals are half-open `[start_ts, end_ts)`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::ambient::{split_by_source, AmbientEvent, Appliance, Location, RoomId};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OccupancyInterval {
    pub room: RoomId,
    pub start_ts: i64,
    pub end_ts: i64,
    /// Still open at the end of the stream and closed at the last event.
    pub truncated: bool,
}

impl OccupancyInterval {
    pub fn contains(&self, ts: i64) -> bool {
        self.start_ts <= ts && ts < self.end_ts
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApplianceInterval {
    pub appliance: Appliance,
    pub start_ts: i64,
    pub end_ts: i64,
    pub truncated: bool,
}

impl ApplianceInterval {
    pub fn contains(&self, ts: i64) -> bool {
        self.start_ts <= ts && ts < self.end_ts
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectorConfig {
    /// Close an occupied interval this long after the last `1` reading when
    /// no further reading arrives. Off by default.
    pub inactivity_timeout_ms: Option<i64>,
}

/// The 1-opens / 0-closes state machine. Redundant readings are no-ops.
fn on_off_intervals(events: &[(i64, bool)], config: DetectorConfig) -> Vec<(i64, i64, bool)> {
    let mut out = Vec::new();
    let mut open: Option<i64> = None;
    let mut last_on = i64::MIN;
    for &(ts, on) in events {
        if let (Some(start), Some(timeout)) = (open, config.inactivity_timeout_ms) {
            if ts - last_on > timeout {
                out.push((start, last_on + timeout, false));
                open = None;
            }
        }
        match (on, open) {
            (true, None) => {
                open = Some(ts);
                last_on = ts;
            }
            (true, Some(_)) => last_on = ts,
            (false, Some(start)) => {
                out.push((start, ts, false));
                open = None;
            }
            (false, None) => {}
        }
    }
    if let (Some(start), Some(&(last_ts, _))) = (open, events.last()) {
        out.push((start, last_ts, true));
    }
    out.retain(|(s, e, _)| s < e);
    out
}

/// Occupancy intervals of the room whose PIR produced `events`. Events from
/// any other source are ignored.
pub fn detect_room_intervals(events: &[AmbientEvent]) -> Vec<OccupancyInterval> {
    detect_room_intervals_with(events, DetectorConfig::default())
}

pub fn detect_room_intervals_with(events: &[AmbientEvent], config: DetectorConfig) -> Vec<OccupancyInterval> {
    let Some(first) = events.first() else {
        return Vec::new();
    };
    let Location::Room(room) = first.source.location else {
        return Vec::new();
    };
    let readings: Vec<(i64, bool)> = events
        .iter()
        .filter(|e| e.source == first.source)
        .map(|e| (e.ts, e.on))
        .collect();
    on_off_intervals(&readings, config)
        .into_iter()
        .map(|(start_ts, end_ts, truncated)| OccupancyInterval {
            room,
            start_ts,
            end_ts,
            truncated,
        })
        .collect()
}

/// ON intervals of one relay or force sensor.
pub fn appliance_intervals(events: &[AmbientEvent]) -> Vec<ApplianceInterval> {
    let Some(first) = events.first() else {
        return Vec::new();
    };
    let Location::Appliance(appliance) = first.source.location else {
        return Vec::new();
    };
    let readings: Vec<(i64, bool)> = events
        .iter()
        .filter(|e| e.source == first.source)
        .map(|e| (e.ts, e.on))
        .collect();
    on_off_intervals(&readings, DetectorConfig::default())
        .into_iter()
        .map(|(start_ts, end_ts, truncated)| ApplianceInterval {
            appliance,
            start_ts,
            end_ts,
            truncated,
        })
        .collect()
}

/// Merges per-room intervals into one disjoint timeline. When a room's
/// interval opens while another is still open, the earlier one is cut at
/// the new start (latest motion wins). Simultaneous openings are processed
/// in room-name order, so the lexicographically later room wins.
pub fn resolve_single_person(per_room: &BTreeMap<RoomId, Vec<OccupancyInterval>>) -> Vec<OccupancyInterval> {
    let mut all: Vec<OccupancyInterval> = per_room.values().flatten().copied().collect();
    all.sort_by(|a, b| {
        (a.start_ts, a.room.name(), a.end_ts).cmp(&(b.start_ts, b.room.name(), b.end_ts))
    });
    let mut out: Vec<OccupancyInterval> = Vec::with_capacity(all.len());
    for iv in all {
        while let Some(last) = out.last_mut() {
            if last.end_ts <= iv.start_ts {
                break;
            }
            last.end_ts = iv.start_ts;
            last.truncated = false;
            if last.start_ts >= last.end_ts {
                out.pop();
            } else {
                break;
            }
        }
        out.push(iv);
    }
    out
}

/// Room containing `ts`, or `Outside` when no interval does.
pub fn locate(ts: i64, resolved: &[OccupancyInterval]) -> RoomId {
    let idx = resolved.partition_point(|iv| iv.start_ts <= ts);
    match idx.checked_sub(1).map(|i| &resolved[i]) {
        Some(iv) if iv.contains(ts) => iv.room,
        _ => RoomId::Outside,
    }
}

/// Everything reconstructed from an ambient event log.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OccupancyTimeline {
    pub rooms: Vec<OccupancyInterval>,
    pub appliances: Vec<ApplianceInterval>,
}

impl OccupancyTimeline {
    pub fn from_events(events: &[AmbientEvent], config: DetectorConfig) -> Self {
        let mut per_room: BTreeMap<RoomId, Vec<OccupancyInterval>> = BTreeMap::new();
        let mut appliances = Vec::new();
        for (source, stream) in split_by_source(events) {
            match source.location {
                Location::Room(room) => {
                    per_room
                        .entry(room)
                        .or_default()
                        .extend(detect_room_intervals_with(&stream, config));
                }
                Location::Appliance(_) => appliances.extend(appliance_intervals(&stream)),
            }
        }
        appliances.sort_by_key(|a| (a.start_ts, a.appliance, a.end_ts));
        OccupancyTimeline {
            rooms: resolve_single_person(&per_room),
            appliances,
        }
    }

    pub fn locate(&self, ts: i64) -> RoomId {
        locate(ts, &self.rooms)
    }

    pub fn active_appliances(&self, ts: i64) -> BTreeSet<Appliance> {
        self.appliances
            .iter()
            .take_while(|a| a.start_ts <= ts)
            .filter(|a| a.contains(ts))
            .map(|a| a.appliance)
            .collect()
    }

    /// CSV `kind,location,start_ts,end_ts,truncated`: rooms first, then appliances.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("kind,location,start_ts,end_ts,truncated\n");
        for iv in &self.rooms {
            let _ = writeln!(out, "pir,{},{},{},{}", iv.room.slug(), iv.start_ts, iv.end_ts, iv.truncated);
        }
        for iv in &self.appliances {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                iv.appliance.sensor_kind().name(),
                iv.appliance.name(),
                iv.start_ts,
                iv.end_ts,
                iv.truncated
            );
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut timeline = OccupancyTimeline::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (i == 0 && line.starts_with("kind,")) {
                continue;
            }
            let err = |reason: String| Error::parse(i + 1, reason);
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 5 {
                return Err(err(format!("expected 5 columns, got {}", f.len())));
            }
            let ts = |s: &str| s.parse::<i64>().map_err(|_| err(format!("bad timestamp {s:?}")));
            let (start_ts, end_ts) = (ts(f[2])?, ts(f[3])?);
            if start_ts >= end_ts {
                return Err(err("interval must have start < end".into()));
            }
            let truncated = f[4].parse::<bool>().map_err(|_| err(format!("bad flag {:?}", f[4])))?;
            match f[0] {
                "pir" => timeline.rooms.push(OccupancyInterval {
                    room: f[1].parse().map_err(err)?,
                    start_ts,
                    end_ts,
                    truncated,
                }),
                "relay" | "force" => timeline.appliances.push(ApplianceInterval {
                    appliance: f[1].parse().map_err(err)?,
                    start_ts,
                    end_ts,
                    truncated,
                }),
                other => return Err(err(format!("unknown kind {other:?}"))),
            }
        }
        if timeline.rooms.windows(2).any(|w| w[1].start_ts < w[0].end_ts) {
            return Err(Error::parse(0, "room intervals must be ordered and disjoint"));
        }
        timeline.appliances.sort_by_key(|a| (a.start_ts, a.appliance, a.end_ts));
        Ok(timeline)
    }
}
