//! Ambient binary-sensor events carried as MQTT-style topic/payload pairs.
//!
//! Wire format, one JSON object per line:
//! `{"ts":1000,"topic":"home/pir/bedroom","payload":"1"}`

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RoomId {
    Bedroom,
    Kitchen,
    Hall,
    Worship,
    Stairs,
    Bathroom,
    Outside,
}

impl RoomId {
    pub const ALL: [RoomId; 7] = [
        RoomId::Bedroom,
        RoomId::Kitchen,
        RoomId::Hall,
        RoomId::Worship,
        RoomId::Stairs,
        RoomId::Bathroom,
        RoomId::Outside,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RoomId::Bedroom => "Bedroom",
            RoomId::Kitchen => "Kitchen",
            RoomId::Hall => "Hall",
            RoomId::Worship => "Worship",
            RoomId::Stairs => "Stairs",
            RoomId::Bathroom => "Bathroom",
            RoomId::Outside => "Outside",
        }
    }

    /// Lower-case form used in topics.
    pub fn slug(self) -> String {
        self.name().to_ascii_lowercase()
    }
}

impl fmt::Display for RoomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RoomId {
    type Err = String;

    /// Case-insensitive; also accepts "bed room" / "bed_room".
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let key: String = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '_')
            .collect::<String>()
            .to_ascii_lowercase();
        RoomId::ALL
            .into_iter()
            .find(|r| r.slug() == key)
            .ok_or_else(|| format!("unknown location {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Appliance {
    Tv,
    MirrorBulb,
    BathroomSwitch,
    WaterBottle,
}

impl Appliance {
    pub const ALL: [Appliance; 4] = [
        Appliance::Tv,
        Appliance::MirrorBulb,
        Appliance::BathroomSwitch,
        Appliance::WaterBottle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Appliance::Tv => "tv",
            Appliance::MirrorBulb => "mirror_bulb",
            Appliance::BathroomSwitch => "bathroom_switch",
            Appliance::WaterBottle => "water_bottle",
        }
    }

    /// Sensor kind that reports this appliance.
    pub fn sensor_kind(self) -> SensorKind {
        match self {
            Appliance::WaterBottle => SensorKind::Force,
            _ => SensorKind::Relay,
        }
    }
}

impl fmt::Display for Appliance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Appliance {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let key = s.trim().to_ascii_lowercase();
        Appliance::ALL
            .into_iter()
            .find(|a| a.name() == key)
            .ok_or_else(|| format!("unknown appliance {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SensorKind {
    Force,
    Pir,
    Relay,
}

impl SensorKind {
    pub fn name(self) -> &'static str {
        match self {
            SensorKind::Force => "force",
            SensorKind::Pir => "pir",
            SensorKind::Relay => "relay",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Location {
    Room(RoomId),
    Appliance(Appliance),
}

impl Location {
    pub fn slug(self) -> String {
        match self {
            Location::Room(r) => r.slug(),
            Location::Appliance(a) => a.name().to_string(),
        }
    }
}

/// Which physical sensor produced an event. PIR sensors are addressed by
/// room, relays and force sensors by appliance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SensorAddress {
    pub kind: SensorKind,
    pub location: Location,
}

impl SensorAddress {
    pub fn pir(room: RoomId) -> Self {
        SensorAddress {
            kind: SensorKind::Pir,
            location: Location::Room(room),
        }
    }

    pub fn appliance(appliance: Appliance) -> Self {
        SensorAddress {
            kind: appliance.sensor_kind(),
            location: Location::Appliance(appliance),
        }
    }

    pub fn topic(&self) -> String {
        format!("home/{}/{}", self.kind.name(), self.location.slug())
    }

    /// Lexicographic `(kind, location)` key used to order simultaneous events.
    pub fn sort_key(&self) -> (&'static str, String) {
        (self.kind.name(), self.location.slug())
    }

    pub fn parse_topic(topic: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = topic.split('/').collect();
        let [root, kind, location] = parts.as_slice() else {
            return Err(format!("malformed topic {topic:?}"));
        };
        if *root != "home" {
            return Err(format!("malformed topic {topic:?}"));
        }
        match *kind {
            "pir" => Ok(SensorAddress::pir(location.parse()?)),
            "relay" | "force" => {
                let appliance: Appliance = location.parse()?;
                let kind = if *kind == "relay" {
                    SensorKind::Relay
                } else {
                    SensorKind::Force
                };
                Ok(SensorAddress {
                    kind,
                    location: Location::Appliance(appliance),
                })
            }
            other => Err(format!("unknown sensor kind {other:?}")),
        }
    }
}

impl Ord for SensorAddress {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl PartialOrd for SensorAddress {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AmbientEvent {
    pub ts: i64,
    pub source: SensorAddress,
    pub on: bool,
}

impl AmbientEvent {
    pub fn new(ts: i64, source: SensorAddress, on: bool) -> Self {
        AmbientEvent { ts, source, on }
    }

    pub fn state(&self) -> u8 {
        self.on as u8
    }

    pub fn to_line(&self) -> String {
        format!(
            r#"{{"ts":{},"topic":"{}","payload":"{}"}}"#,
            self.ts,
            self.source.topic(),
            self.state()
        )
    }

    fn order_key(&self) -> (i64, &'static str, String) {
        let (kind, loc) = self.source.sort_key();
        (self.ts, kind, loc)
    }
}

#[derive(Deserialize)]
struct WireEvent {
    ts: i64,
    topic: String,
    payload: String,
}

/// Parses one log line; `line` is the 1-based line number used in errors.
pub fn parse_event_line(text: &str, line: usize) -> Result<AmbientEvent> {
    let wire: WireEvent =
        serde_json::from_str(text.trim()).map_err(|e| Error::parse(line, format!("malformed event: {e}")))?;
    let source = SensorAddress::parse_topic(&wire.topic).map_err(|e| Error::parse(line, e))?;
    let on = match wire.payload.as_str() {
        "0" => false,
        "1" => true,
        other => return Err(Error::parse(line, format!("invalid payload {other:?}"))),
    };
    Ok(AmbientEvent::new(wire.ts, source, on))
}

pub fn read_event_log(text: &str) -> Result<Vec<AmbientEvent>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| parse_event_line(l, i + 1))
        .collect()
}

pub fn write_event_log(events: &[AmbientEvent]) -> String {
    let mut out = String::new();
    for e in events {
        out.push_str(&e.to_line());
        out.push('\n');
    }
    out
}

/// Shifts every event by a constant clock offset (per-source skew correction).
pub fn shift_stream(events: &[AmbientEvent], offset_ms: i64) -> Vec<AmbientEvent> {
    events
        .iter()
        .map(|e| AmbientEvent {
            ts: e.ts + offset_ms,
            ..*e
        })
        .collect()
}

/// Groups events by source, preserving order.
pub fn split_by_source(events: &[AmbientEvent]) -> BTreeMap<SensorAddress, Vec<AmbientEvent>> {
    let mut out: BTreeMap<SensorAddress, Vec<AmbientEvent>> = BTreeMap::new();
    for e in events {
        out.entry(e.source).or_default().push(*e);
    }
    out
}

/// k-way merge of individually ordered streams into one sequence ordered by
/// `(ts, kind, location)`; fully identical keys keep stream order.
/// Streams only need to be ordered by `ts`; simultaneous events inside one
/// stream are put in key order first.
pub fn merge_streams(streams: &[Vec<AmbientEvent>]) -> Result<Vec<AmbientEvent>> {
    for (s, stream) in streams.iter().enumerate() {
        if let Some(i) = stream.windows(2).position(|w| w[1].ts < w[0].ts) {
            return Err(Error::UnorderedStream {
                stream: s,
                index: i + 1,
            });
        }
    }
    let streams: Vec<Vec<AmbientEvent>> = streams
        .iter()
        .map(|s| {
            let mut s = s.clone();
            s.sort_by_cached_key(AmbientEvent::order_key);
            s
        })
        .collect();
    let total = streams.iter().map(Vec::len).sum();
    let mut heap = BinaryHeap::with_capacity(streams.len());
    for (s, stream) in streams.iter().enumerate() {
        if let Some(e) = stream.first() {
            heap.push(Reverse((e.order_key(), s, 0usize)));
        }
    }
    let mut out = Vec::with_capacity(total);
    while let Some(Reverse((_, s, i))) = heap.pop() {
        out.push(streams[s][i]);
        if let Some(next) = streams[s].get(i + 1) {
            heap.push(Reverse((next.order_key(), s, i + 1)));
        }
    }
    Ok(out)
}
