//! Slow, obvious reference implementations shared by the integration tests
//! and the acceptance run. Nothing here calls into the crate's numerics.
#![allow(dead_code)]

use std::f64::consts::PI;

use adlsense_core::ambient::{AmbientEvent, RoomId, SensorAddress};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn uniform(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-scale..scale)).collect()
}

pub fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

/// `b[gate][j] + Σ U[gate][j][k]·x[k] + Σ W[gate][j][k]·h[k]` with the flat
/// layout used by bundles: per gate, U rows then W rows.
fn gate_input(w: &[f64], b: &[f64], units: usize, dim: usize, gate: usize, j: usize, x: &[f64], h: &[f64]) -> f64 {
    let base = gate * (units * dim + units * units);
    let mut acc = b[gate * units + j];
    for k in 0..dim {
        acc += w[base + j * dim + k] * x[k];
    }
    for k in 0..units {
        acc += w[base + units * dim + j * units + k] * h[k];
    }
    acc
}

/// Hidden state after every step, gates ordered output, input, forget,
/// candidate. `tanh_cell` picks tanh over the logistic for the candidate and
/// the cell squashing.
pub fn lstm_trace(xs: &[Vec<f64>], units: usize, dim: usize, w: &[f64], b: &[f64], tanh_cell: bool) -> Vec<Vec<f64>> {
    let g = |v: f64| if tanh_cell { v.tanh() } else { logistic(v) };
    let mut h = vec![0.0; units];
    let mut s = vec![0.0; units];
    let mut trace = Vec::new();
    for x in xs {
        let mut h_next = vec![0.0; units];
        for j in 0..units {
            let o = logistic(gate_input(w, b, units, dim, 0, j, x, &h));
            let i = logistic(gate_input(w, b, units, dim, 1, j, x, &h));
            let f = logistic(gate_input(w, b, units, dim, 2, j, x, &h));
            let c = g(gate_input(w, b, units, dim, 3, j, x, &h));
            s[j] = f * s[j] + i * c;
            h_next[j] = o * g(s[j]);
        }
        h = h_next;
        trace.push(h.clone());
    }
    trace
}

/// GRU with gates update, reset, candidate; reset applied to h before W.
pub fn gru_trace(xs: &[Vec<f64>], units: usize, dim: usize, w: &[f64], b: &[f64]) -> Vec<Vec<f64>> {
    let mut h = vec![0.0; units];
    let mut trace = Vec::new();
    for x in xs {
        let z: Vec<f64> = (0..units).map(|j| logistic(gate_input(w, b, units, dim, 0, j, x, &h))).collect();
        let r: Vec<f64> = (0..units).map(|j| logistic(gate_input(w, b, units, dim, 1, j, x, &h))).collect();
        let rh: Vec<f64> = (0..units).map(|j| r[j] * h[j]).collect();
        h = (0..units)
            .map(|j| (1.0 - z[j]) * h[j] + z[j] * gate_input(w, b, units, dim, 2, j, x, &rh).tanh())
            .collect();
        trace.push(h.clone());
    }
    trace
}

/// Valid cross-correlation, `x` as `[cin][len]`, weights `[filters][cin][k]`.
pub fn conv_naive(x: &[f64], cin: usize, len: usize, w: &[f64], b: &[f64], k: usize, stride: usize) -> Vec<f64> {
    let filters = b.len();
    let out_len = (len - k) / stride + 1;
    let mut out = vec![0.0; filters * out_len];
    for f in 0..filters {
        for o in 0..out_len {
            let mut acc = b[f];
            for c in 0..cin {
                for j in 0..k {
                    acc += w[(f * cin + c) * k + j] * x[c * len + o * stride + j];
                }
            }
            out[f * out_len + o] = acc;
        }
    }
    out
}

pub fn maxpool_naive(x: &[f64], channels: usize, len: usize, pool: usize, stride: usize) -> Vec<f64> {
    let out_len = (len - pool) / stride + 1;
    let mut out = vec![0.0; channels * out_len];
    for c in 0..channels {
        for o in 0..out_len {
            let mut m = f64::NEG_INFINITY;
            for j in 0..pool {
                m = m.max(x[c * len + o * stride + j]);
            }
            out[c * out_len + o] = m;
        }
    }
    out
}

pub fn dense_naive(x: &[f64], w: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = b.to_vec();
    for u in 0..b.len() {
        for i in 0..x.len() {
            out[u] += w[u * x.len() + i] * x[i];
        }
    }
    out
}

/// Direct exponentials, fine for the small logits used here.
pub fn softmax_naive(logits: &[f64]) -> Vec<f64> {
    let total: f64 = logits.iter().map(|v| v.exp()).sum();
    logits.iter().map(|v| v.exp() / total).collect()
}

/// Magnitude of a bilinear-transformed Butterworth low-pass, from the
/// prewarped analogue prototype rather than from filter coefficients.
pub fn butterworth_magnitude(order: usize, cutoff_hz: f64, fs_hz: f64, f: f64) -> f64 {
    let warp = |hz: f64| (PI * hz / fs_hz).tan();
    let ratio = warp(f) / warp(cutoff_hz);
    1.0 / (1.0 + ratio.powi(2 * order as i32)).sqrt()
}

pub const INDOOR: [RoomId; 6] = [
    RoomId::Bedroom,
    RoomId::Kitchen,
    RoomId::Hall,
    RoomId::Worship,
    RoomId::Stairs,
    RoomId::Bathroom,
];

/// A walk through the house of at most 50 transitions: consecutive stays
/// are in different places, `Outside` stays leave no events.
pub fn random_stays(rng: &mut ChaCha8Rng) -> Vec<(RoomId, i64, i64)> {
    let transitions = rng.random_range(0..=50);
    let mut t = rng.random_range(0..100_000);
    let mut stays = Vec::new();
    let mut prev = None;
    for _ in 0..=transitions {
        let room = loop {
            let r = if rng.random_bool(0.15) { RoomId::Outside } else { INDOOR[rng.random_range(0..6)] };
            if Some(r) != prev {
                break r;
            }
        };
        let d = rng.random_range(1..600_000);
        stays.push((room, t, t + d));
        prev = Some(room);
        t += d;
    }
    stays
}

/// PIR 1 on entry and 0 on exit, plus redundant readings that must not
/// change the result.
pub fn stay_events(stays: &[(RoomId, i64, i64)], rng: &mut ChaCha8Rng) -> Vec<AmbientEvent> {
    let mut events = Vec::new();
    for &(room, start, end) in stays.iter().filter(|s| s.0 != RoomId::Outside) {
        let pir = SensorAddress::pir(room);
        events.push(AmbientEvent::new(start, pir, true));
        for _ in 0..rng.random_range(0..3) {
            events.push(AmbientEvent::new(rng.random_range(start..end), pir, true));
        }
        events.push(AmbientEvent::new(end, pir, false));
        if rng.random_bool(0.3) {
            events.push(AmbientEvent::new(end + 1, pir, false));
        }
    }
    events.sort_by_key(|e| e.ts);
    events
}
