use std::collections::BTreeMap;

use adlsense_core::ambient::{
    merge_streams, read_event_log, split_by_source, write_event_log, AmbientEvent, Appliance, RoomId, SensorAddress,
};
use adlsense_core::occupancy::{resolve_single_person, DetectorConfig, OccupancyInterval, OccupancyTimeline};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use oracles::{random_stays, stay_events as events_for, INDOOR};

mod oracles;

#[test]
fn scripted_walks_are_reconstructed_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..2_000 {
        let stays = random_stays(&mut rng);
        let events = events_for(&stays, &mut rng);
        let timeline = OccupancyTimeline::from_events(&events, DetectorConfig::default());
        let want: Vec<OccupancyInterval> = stays
            .iter()
            .filter(|s| s.0 != RoomId::Outside)
            .map(|&(room, start_ts, end_ts)| OccupancyInterval {
                room,
                start_ts,
                end_ts,
                truncated: false,
            })
            .collect();
        assert_eq!(timeline.rooms, want, "case {case}");
        for &(room, start, end) in &stays {
            assert_eq!(timeline.locate(start), room, "case {case}");
            assert_eq!(timeline.locate(end - 1), room, "case {case}");
        }
    }
}

fn random_intervals(rng: &mut ChaCha8Rng) -> BTreeMap<RoomId, Vec<OccupancyInterval>> {
    let mut per_room: BTreeMap<RoomId, Vec<OccupancyInterval>> = BTreeMap::new();
    for _ in 0..rng.random_range(0..30) {
        let room = INDOOR[rng.random_range(0..6)];
        let start_ts = rng.random_range(0..10_000);
        let end_ts = start_ts + rng.random_range(1..3_000);
        per_room.entry(room).or_default().push(OccupancyInterval {
            room,
            start_ts,
            end_ts,
            truncated: rng.random_bool(0.1),
        });
    }
    per_room
}

#[test]
fn resolution_is_disjoint_on_fuzzed_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for case in 0..10_000 {
        let per_room = random_intervals(&mut rng);
        let out = resolve_single_person(&per_room);
        for pair in out.windows(2) {
            assert!(pair[0].end_ts <= pair[1].start_ts, "case {case}: {pair:?}");
        }
        for iv in &out {
            assert!(iv.start_ts < iv.end_ts, "case {case}: {iv:?}");
            let inside = per_room[&iv.room]
                .iter()
                .any(|src| src.start_ts == iv.start_ts && iv.end_ts <= src.end_ts);
            assert!(inside, "case {case}: {iv:?} has no source interval");
        }
    }
}

fn arbitrary_event() -> impl Strategy<Value = AmbientEvent> {
    let source = prop_oneof![
        (0..6usize).prop_map(|i| SensorAddress::pir(INDOOR[i])),
        (0..4usize).prop_map(|i| SensorAddress::appliance(Appliance::ALL[i])),
    ];
    (0..1_000i64, source, any::<bool>()).prop_map(|(ts, source, on)| AmbientEvent::new(ts, source, on))
}

proptest! {
    #[test]
    fn merging_ignores_stream_order(events in prop::collection::vec(arbitrary_event(), 0..80), seed in any::<u64>()) {
        let mut streams: Vec<Vec<AmbientEvent>> = split_by_source(&events)
            .into_values()
            .map(|mut s| {
                s.sort_by_key(|e| e.ts);
                s
            })
            .collect();
        let merged = merge_streams(&streams).unwrap();
        prop_assert_eq!(merged.len(), events.len());
        prop_assert!(merged.windows(2).all(|w| w[0].ts <= w[1].ts));
        streams.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(merge_streams(&streams).unwrap(), merged);
    }

    #[test]
    fn event_logs_round_trip(events in prop::collection::vec(arbitrary_event(), 0..50)) {
        prop_assert_eq!(read_event_log(&write_event_log(&events)).unwrap(), events);
    }

    #[test]
    fn occupancy_csv_round_trips(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let stays = random_stays(&mut rng);
        let timeline = OccupancyTimeline::from_events(&events_for(&stays, &mut rng), DetectorConfig::default());
        prop_assert_eq!(OccupancyTimeline::from_csv(&timeline.to_csv()).unwrap(), timeline);
    }
}

#[test]
fn unordered_stream_is_named() {
    let pir = SensorAddress::pir(RoomId::Hall);
    let ok = vec![AmbientEvent::new(0, pir, true)];
    let bad = vec![AmbientEvent::new(5, pir, true), AmbientEvent::new(3, pir, false)];
    let err = merge_streams(&[ok, bad]).unwrap_err().to_string();
    assert!(err.contains("stream 1") && err.contains("index 1"), "{err}");
}

#[test]
fn malformed_lines_report_their_line() {
    let log = "{\"ts\":1,\"topic\":\"home/pir/hall\",\"payload\":\"1\"}\n{\"ts\":2,\"topic\":\"home/pir/hall\",\"payload\":\"2\"}\n";
    let err = read_event_log(log).unwrap_err().to_string();
    assert!(err.contains("line 2") && err.contains("invalid payload"), "{err}");
}
