//! Weights bundles end to end: a frozen numpy forward pass and the
//! zero-weight reference architecture.

use adlsense_core::nn::{classify_window, table2_bundle, WeightsBundle};
use adlsense_core::signal::{SampleWindow, TriaxialSample};
use serde::Deserialize;

#[derive(Deserialize)]
struct Case {
    acc: Vec<[f64; 3]>,
    probs: Vec<f64>,
}

fn window(acc: &[[f64; 3]]) -> SampleWindow {
    let samples: Vec<TriaxialSample> = acc
        .iter()
        .enumerate()
        .map(|(i, a)| TriaxialSample::new(i as i64 * 50, a[0], a[1], a[2]))
        .collect();
    SampleWindow {
        start_ts: 0,
        end_ts: samples.len() as i64 * 50,
        samples,
    }
}

#[test]
fn golden_bundle_matches_numpy() {
    let bundle = WeightsBundle::from_json(include_str!("fixtures/golden_bundle.json")).unwrap();
    let case: Case = serde_json::from_str(include_str!("fixtures/golden_case.json")).unwrap();
    let got = classify_window(&window(&case.acc), &bundle).unwrap();
    assert_eq!(got.probs.len(), case.probs.len());
    for (g, w) in got.probs.iter().zip(&case.probs) {
        assert!((g - w).abs() < 1e-9, "{:?} vs {:?}", got.probs, case.probs);
    }
    assert_eq!(got.argmax(), 3);
}

#[test]
fn golden_bundle_round_trips() {
    let bundle = WeightsBundle::from_json(include_str!("fixtures/golden_bundle.json")).unwrap();
    assert_eq!(WeightsBundle::from_json(&bundle.to_json()).unwrap(), bundle);
}

#[test]
fn zero_weight_reference_architecture_is_uniform() {
    let names: Vec<String> = ["walk", "jog", "sit", "stand", "lie", "stairUp"].map(String::from).into();
    let bundle = table2_bundle(names, 3, 200).unwrap();
    let acc: Vec<[f64; 3]> = (0..200).map(|i| [i as f64 * 0.1, 9.81, -(i as f64)]).collect();
    let p = classify_window(&window(&acc), &bundle).unwrap();
    assert!(p.probs.iter().all(|v| (v - 1.0 / 6.0).abs() < 1e-12), "{:?}", p.probs);
}

#[test]
fn malformed_bundles_are_rejected() {
    let good = include_str!("fixtures/golden_bundle.json");
    // truncated weights
    let mut v: serde_json::Value = serde_json::from_str(good).unwrap();
    v["layers"][0]["weights"].as_array_mut().unwrap().pop();
    assert!(WeightsBundle::from_json(&v.to_string()).is_err());
    // shapes that do not compose
    let mut v: serde_json::Value = serde_json::from_str(good).unwrap();
    v["layers"][6]["params"]["in_features"] = 3.into();
    assert!(WeightsBundle::from_json(&v.to_string()).is_err());
    // missing softmax
    let mut v: serde_json::Value = serde_json::from_str(good).unwrap();
    v["layers"].as_array_mut().unwrap().pop();
    assert!(WeightsBundle::from_json(&v.to_string()).is_err());
    // wrong window length
    let bundle = WeightsBundle::from_json(good).unwrap();
    assert!(classify_window(&window(&[[0.0; 3]; 15]), &bundle).is_err());
}
