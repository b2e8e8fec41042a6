//! Scripted synthetic household: inertial streams, ambient event logs and
//! ground-truth labels from a daily schedule.

mod motion;
mod script;

pub use motion::{gravity_profile, synth_motion, NoiseSpec, GRAVITY};
pub use script::{read_script, write_script, ScheduleEntry};

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::ambient::{merge_streams, AmbientEvent, Appliance, RoomId, SensorAddress};
use crate::error::{Error, Result};
use crate::fusion::{derive_sleep, BasicActivity, DerivedTick, FusionRuleTable, DEFAULT_MIN_SLEEP_MS, DEFAULT_TICK_MS};
use crate::patterns::DAY_MS;
use crate::signal::{SampleSeries, DEFAULT_PERIOD_MS};

/// Simulation settings shared by every day of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub subject_id: String,
    pub period_ms: i64,
    pub tick_ms: i64,
    pub min_sleep_ms: i64,
    pub noise: NoiseSpec,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            subject_id: "sim".into(),
            period_ms: DEFAULT_PERIOD_MS,
            tick_ms: DEFAULT_TICK_MS,
            min_sleep_ms: DEFAULT_MIN_SLEEP_MS,
            noise: NoiseSpec::default(),
        }
    }
}

/// Scripted truth at tick resolution.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GroundTruth {
    /// Scripted basic activity per tick (before sleep derivation).
    pub basic: Vec<(i64, BasicActivity)>,
    pub room: Vec<(i64, RoomId)>,
    pub derived: Vec<DerivedTick>,
}

/// Output of a simulated run. Inertial data is generated per day on demand
/// to keep memory flat over long runs.
#[derive(Debug, Clone, PartialEq)]
pub struct Household {
    pub day_starts: Vec<i64>,
    pub events: Vec<AmbientEvent>,
    pub truth: GroundTruth,
    /// `(start, end, basic)` of every entry on the absolute time line.
    segments: Vec<(i64, i64, BasicActivity)>,
    config: SimConfig,
}

impl Household {
    pub fn day_count(&self) -> usize {
        self.day_starts.len()
    }

    /// Inertial series of day `d`; identical on every call.
    pub fn day_series(&self, d: usize) -> SampleSeries {
        let midnight = self.day_starts[d];
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.noise.seed);
        rng.set_stream(d as u64);
        let mut samples = Vec::new();
        for &(start, end, basic) in self.segments.iter().filter(|s| s.0 >= midnight && s.0 < midnight + DAY_MS) {
            motion::append_motion(&mut samples, basic, start, end, self.config.period_ms, &self.config.noise, &mut rng);
        }
        SampleSeries::new(self.config.subject_id.clone(), samples).with_period(self.config.period_ms)
    }
}

/// An entry placed on the absolute time line.
struct Placed<'a> {
    start: i64,
    end: i64,
    entry: &'a ScheduleEntry,
}

fn place<'a>(days: &'a [Vec<ScheduleEntry>], first_midnight: i64) -> Result<Vec<Placed<'a>>> {
    let mut out = Vec::new();
    for (d, script) in days.iter().enumerate() {
        script::validate(script)?;
        let midnight = first_midnight + d as i64 * DAY_MS;
        out.extend(script.iter().map(|e| Placed {
            start: midnight + e.start_ms,
            end: midnight + e.start_ms + e.duration_ms,
            entry: e,
        }));
    }
    Ok(out)
}

/// Ambient log for placed entries. Adjacent entries in the same room (or
/// with the same appliance) share one on/off pair; Outside has no sensor.
fn ambient_log(placed: &[Placed]) -> Result<Vec<AmbientEvent>> {
    let mut events = Vec::new();
    let mut room: Option<(RoomId, i64)> = None;
    let mut active: BTreeSet<Appliance> = BTreeSet::new();
    let mut last_end: Option<i64> = None;
    for p in placed {
        let contiguous = last_end == Some(p.start);
        let (e_room, apps) = (p.entry.room, &p.entry.appliances);
        if let Some((r, _)) = room {
            if !contiguous || r != e_room {
                events.push(AmbientEvent::new(last_end.expect("open room"), SensorAddress::pir(r), false));
                room = None;
            }
        }
        for a in active.clone() {
            if !contiguous || !apps.contains(&a) {
                events.push(AmbientEvent::new(last_end.expect("open appliance"), SensorAddress::appliance(a), false));
                active.remove(&a);
            }
        }
        if room.is_none() && e_room != RoomId::Outside {
            events.push(AmbientEvent::new(p.start, SensorAddress::pir(e_room), true));
            room = Some((e_room, p.start));
        }
        for &a in apps {
            if active.insert(a) {
                events.push(AmbientEvent::new(p.start, SensorAddress::appliance(a), true));
            }
        }
        last_end = Some(p.end);
    }
    if let Some(end) = last_end {
        if let Some((r, _)) = room {
            events.push(AmbientEvent::new(end, SensorAddress::pir(r), false));
        }
        for a in active {
            events.push(AmbientEvent::new(end, SensorAddress::appliance(a), false));
        }
    }
    merge_streams(&[events])
}

/// Simulates consecutive days, day `d` following `days[d]` and starting at
/// `first_midnight + d` days. Event timing depends only on the scripts; the
/// noise seed only changes inertial samples.
pub fn generate_household(
    days: &[Vec<ScheduleEntry>],
    first_midnight: i64,
    config: &SimConfig,
    rules: &FusionRuleTable,
) -> Result<Household> {
    if config.tick_ms <= 0 || config.period_ms <= 0 {
        return Err(Error::InvalidParameter("period and tick must be positive".into()));
    }
    let placed = place(days, first_midnight)?;
    let events = ambient_log(&placed)?;

    config.noise.validate()?;
    let day_starts = (0..days.len()).map(|d| first_midnight + d as i64 * DAY_MS).collect();

    let mut truth = GroundTruth::default();
    for p in &placed {
        let first = p.start + (config.tick_ms - (p.start - first_midnight).rem_euclid(config.tick_ms)) % config.tick_ms;
        for ts in (first..p.end).step_by(config.tick_ms as usize) {
            truth.basic.push((ts, p.entry.basic));
            truth.room.push((ts, p.entry.room));
        }
    }
    let basic: Vec<_> = truth.basic.iter().map(|&(t, b)| (t, Some(b))).collect();
    let slept = derive_sleep(&basic, config.min_sleep_ms, config.tick_ms);
    let mut entry = placed.iter().peekable();
    for ((ts, b), &(_, room)) in slept.into_iter().zip(&truth.room) {
        while entry.peek().is_some_and(|p| p.end <= ts) {
            entry.next();
        }
        let apps = &entry.peek().expect("tick inside an entry").entry.appliances;
        truth.derived.push(DerivedTick {
            ts,
            derived: rules.fuse(b, room, apps),
        });
    }
    let segments = placed.iter().map(|p| (p.start, p.end, p.entry.basic)).collect();
    Ok(Household {
        day_starts,
        events,
        truth,
        segments,
        config: config.clone(),
    })
}

/// Single-day form of [`generate_household`].
pub fn generate_day(
    script: &[ScheduleEntry],
    midnight: i64,
    config: &SimConfig,
    rules: &FusionRuleTable,
) -> Result<(SampleSeries, Vec<AmbientEvent>, Vec<DerivedTick>)> {
    let h = generate_household(&[script.to_vec()], midnight, config, rules)?;
    Ok((h.day_series(0), h.events, h.truth.derived))
}
