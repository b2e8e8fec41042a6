//! Simulated days through the whole chain.

use std::path::PathBuf;

use adlsense_core::fusion::{BasicActivity, FusionRuleTable};
use adlsense_core::labelling::PriorityTable;
use adlsense_core::pipeline::{self, calibrate_centroids, Classifier, PipelineConfig};
use adlsense_core::sim::{generate_household, read_script, write_script, Household, NoiseSpec, ScheduleEntry, SimConfig};

const MIDNIGHT: i64 = 1_704_067_200_000;

fn script(name: &str) -> Vec<ScheduleEntry> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/scripts").join(name);
    read_script(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn household(days: &[&str], noise: NoiseSpec) -> Household {
    let days: Vec<_> = days.iter().map(|d| script(d)).collect();
    let cfg = SimConfig {
        noise,
        ..SimConfig::default()
    };
    generate_household(&days, MIDNIGHT, &cfg, &FusionRuleTable::standard()).unwrap()
}

#[test]
fn bundled_scripts_cover_whole_days() {
    for name in ["weekday.csv", "weekday_late.csv", "weekend.csv"] {
        let s = script(name);
        assert_eq!(s[0].start_ms, 0, "{name}");
        assert!(s.windows(2).all(|w| w[0].end_ms() == w[1].start_ms), "{name}");
        assert_eq!(s.last().unwrap().end_ms(), 86_400_000, "{name}");
        assert_eq!(read_script(&write_script(&s)).unwrap(), s, "{name}");
    }
}

#[test]
fn ground_truth_has_a_tick_every_five_seconds() {
    let h = household(&["weekday.csv", "weekend.csv"], NoiseSpec::default());
    assert_eq!(h.truth.derived.len(), 2 * 86_400 / 5);
    assert!(h.truth.derived.iter().enumerate().all(|(i, t)| t.ts == MIDNIGHT + i as i64 * 5_000));
    assert_eq!(h.day_starts, vec![MIDNIGHT, MIDNIGHT + 86_400_000]);
}

#[test]
fn seed_changes_only_the_inertial_noise() {
    let a = household(&["weekend.csv"], NoiseSpec::new(0.5, 0.02, 1));
    let b = household(&["weekend.csv"], NoiseSpec::new(0.5, 0.02, 1));
    let c = household(&["weekend.csv"], NoiseSpec::new(0.5, 0.02, 2));
    assert_eq!(a.day_series(0), b.day_series(0));
    assert_ne!(a.day_series(0), c.day_series(0));
    assert_eq!(a.events, c.events);
    assert_eq!(a.truth, c.truth);
}

fn window_accuracy(h: &Household, classified: &[pipeline::ClassifiedWindow]) -> f64 {
    let truth = &h.truth.basic;
    let hits = classified
        .iter()
        .filter(|w| {
            let center = (w.start_ts + w.end_ts) / 2;
            let i = truth.partition_point(|t| t.0 <= center) - 1;
            truth[i].1.name() == w.label
        })
        .count();
    hits as f64 / classified.len() as f64
}

#[test]
fn noisy_day_is_labelled_like_its_script() {
    let h = household(&["weekend.csv"], NoiseSpec::new(0.5, 0.02, 41));
    let cfg = PipelineConfig::default();
    let model = calibrate_centroids(&NoiseSpec::new(0.5, 0.02, 42), 600_000, 50, &cfg).unwrap();
    let classifier = Classifier::Centroid(model);
    let priorities = PriorityTable::standard();
    let rules = FusionRuleTable::standard();
    let run = || {
        pipeline::run([h.day_series(0)], &h.events, &classifier, &rules, &priorities, &cfg).unwrap()
    };
    let out = run();
    assert!(window_accuracy(&h, &out.classified) >= 0.9);
    let truth = pipeline::label_stage(&h.truth.derived, &priorities, &cfg).unwrap();
    let same = out.labels.iter().zip(&truth).filter(|(a, b)| a == b).count();
    assert!(same as f64 >= 0.99 * truth.len() as f64, "{same}/{}", truth.len());
    assert_eq!(run(), out);
}

#[test]
fn sleeping_ticks_come_from_lying() {
    let h = household(&["weekday.csv"], NoiseSpec::default());
    let basic = &h.truth.basic;
    let mut sleeping = 0;
    for (i, t) in h.truth.derived.iter().enumerate() {
        if t.derived.name.starts_with("Sleeping") {
            assert_eq!(basic[i].1, BasicActivity::Lie);
            sleeping += 1;
        }
    }
    assert!(sleeping > 0);
}
