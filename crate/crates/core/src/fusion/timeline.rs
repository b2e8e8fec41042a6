use std::fmt::Write as _;

use super::{BasicActivity, DerivedActivity, Flag, FusionRuleTable};
use crate::error::{Error, Result};
use crate::occupancy::OccupancyTimeline;

/// Label cadence of the fused stream.
pub const DEFAULT_TICK_MS: i64 = 5_000;
/// A run of lying at least this long is read as sleep.
pub const DEFAULT_MIN_SLEEP_MS: i64 = 300_000;

/// A classified inertial window. `score` is the classifier's confidence;
/// only its order matters.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredWindow {
    pub start_ts: i64,
    pub end_ts: i64,
    pub label: BasicActivity,
    pub score: f64,
}

impl ScoredWindow {
    fn center2(&self) -> i64 {
        self.start_ts + self.end_ts
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivedTick {
    pub ts: i64,
    pub derived: DerivedActivity,
}

/// A maximal run of non-Normal ticks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlagRun {
    pub start_ts: i64,
    pub end_ts: i64,
    pub flag: Flag,
    /// Distinct derived names inside the run, in order of appearance.
    pub names: Vec<String>,
}

/// `start, start + tick, …` strictly below `end`.
pub fn tick_times(start_ts: i64, end_ts: i64, tick_ms: i64) -> Vec<i64> {
    if tick_ms <= 0 || end_ts <= start_ts {
        return Vec::new();
    }
    (start_ts..end_ts).step_by(tick_ms as usize).collect()
}

/// Ticks on the grid `origin + k·tick` whose interval overlaps at least one
/// window. `windows` must be sorted by start.
pub fn covered_ticks(windows: &[ScoredWindow], origin: i64, tick_ms: i64) -> Vec<i64> {
    let mut out: Vec<i64> = Vec::new();
    for w in windows {
        let first = origin + (w.start_ts - origin).div_euclid(tick_ms) * tick_ms;
        let mut t = match out.last() {
            Some(&last) if last >= first => last + tick_ms,
            _ => first,
        };
        while t < w.end_ts {
            out.push(t);
            t += tick_ms;
        }
    }
    out
}

/// Labels each tick `[t, t + tick)` from the highest-scoring window that
/// overlaps it; score ties go to the window centered nearest the tick, then
/// the earlier one. Ticks with no overlapping window get `None`. `windows`
/// must be sorted by start.
pub fn assign_ticks(windows: &[ScoredWindow], ticks: &[i64], tick_ms: i64) -> Vec<(i64, Option<BasicActivity>)> {
    let max_len = windows.iter().map(|w| w.end_ts - w.start_ts).max().unwrap_or(0);
    ticks
        .iter()
        .map(|&t| {
            let mid2 = 2 * t + tick_ms;
            let hi = windows.partition_point(|w| w.start_ts < t + tick_ms);
            let mut best: Option<&ScoredWindow> = None;
            for w in windows[..hi].iter().rev().take_while(|w| w.start_ts + max_len > t) {
                if w.end_ts <= t {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some(b) => {
                        w.score > b.score
                            || (w.score == b.score && (w.center2() - mid2).abs() <= (b.center2() - mid2).abs())
                    }
                };
                if better {
                    best = Some(w);
                }
            }
            (t, best.map(|w| w.label))
        })
        .collect()
}

/// Rewrites every unbroken run of `Lie` lasting at least `min_still_ms` to
/// `Sleep`. A run breaks on any other label or on a gap wider than `tick_ms`;
/// each entry covers `tick_ms`.
pub fn derive_sleep(
    timeline: &[(i64, Option<BasicActivity>)],
    min_still_ms: i64,
    tick_ms: i64,
) -> Vec<(i64, Option<BasicActivity>)> {
    let mut out = timeline.to_vec();
    let mut i = 0;
    while i < out.len() {
        if out[i].1 != Some(BasicActivity::Lie) {
            i += 1;
            continue;
        }
        let mut j = i + 1;
        while j < out.len() && out[j].1 == Some(BasicActivity::Lie) && out[j].0 - out[j - 1].0 <= tick_ms {
            j += 1;
        }
        if out[j - 1].0 + tick_ms - out[i].0 >= min_still_ms {
            for e in &mut out[i..j] {
                e.1 = Some(BasicActivity::Sleep);
            }
        }
        i = j;
    }
    out
}

/// Sleep derivation followed by context fusion at each tick's midpoint.
pub fn derive_timeline(
    basic: &[(i64, Option<BasicActivity>)],
    occupancy: &OccupancyTimeline,
    rules: &FusionRuleTable,
    min_sleep_ms: i64,
    tick_ms: i64,
) -> Vec<DerivedTick> {
    derive_sleep(basic, min_sleep_ms, tick_ms)
        .into_iter()
        .map(|(ts, b)| {
            let mid = ts + tick_ms / 2;
            let derived = rules.fuse(b, occupancy.locate(mid), &occupancy.active_appliances(mid));
            DerivedTick { ts, derived }
        })
        .collect()
}

/// Maximal runs of equal non-Normal flags. Adjacent ticks (no wider than
/// `tick_ms` apart) coalesce even when their derived names differ.
pub fn flag_stream(ticks: &[DerivedTick], tick_ms: i64) -> Vec<FlagRun> {
    let mut out: Vec<FlagRun> = Vec::new();
    let mut prev_ts = None;
    for t in ticks {
        let flag = t.derived.flag;
        let adjacent = prev_ts.is_some_and(|p| t.ts - p <= tick_ms);
        prev_ts = Some(t.ts);
        if flag == Flag::Normal {
            continue;
        }
        match out.last_mut() {
            Some(run) if adjacent && run.flag == flag && run.end_ts >= t.ts => {
                run.end_ts = t.ts + tick_ms;
                if !run.names.contains(&t.derived.name) {
                    run.names.push(t.derived.name.clone());
                }
            }
            _ => out.push(FlagRun {
                start_ts: t.ts,
                end_ts: t.ts + tick_ms,
                flag,
                names: vec![t.derived.name.clone()],
            }),
        }
    }
    out
}

/// CSV `start_ts,end_ts,flag,names` with names joined by `|`.
pub fn write_flag_report(runs: &[FlagRun]) -> String {
    let mut out = String::from("start_ts,end_ts,flag,names\n");
    for r in runs {
        let _ = writeln!(out, "{},{},{},{}", r.start_ts, r.end_ts, r.flag, r.names.join("|"));
    }
    out
}

/// CSV `ts,derived_name,flag`.
pub fn write_derived_csv(ticks: &[DerivedTick]) -> String {
    let mut out = String::from("ts,derived_name,flag\n");
    for t in ticks {
        let _ = writeln!(out, "{},{},{}", t.ts, t.derived.name, t.derived.flag);
    }
    out
}

pub fn read_derived_csv(text: &str) -> Result<Vec<DerivedTick>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("ts,") {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 3 {
            return Err(Error::parse(i + 1, format!("expected 3 columns, got {}", f.len())));
        }
        let ts = f[0].trim().parse().map_err(|e| Error::parse(i + 1, format!("bad ts: {e}")))?;
        let flag = f[2].parse().map_err(|e: String| Error::parse(i + 1, e))?;
        out.push(DerivedTick {
            ts,
            derived: DerivedActivity::new(f[1].trim(), flag),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use BasicActivity::*;

    fn run(parts: &[(BasicActivity, i64)]) -> Vec<(i64, Option<BasicActivity>)> {
        let mut ts = 0;
        let mut out = Vec::new();
        for &(b, minutes) in parts {
            for _ in 0..minutes * 12 {
                out.push((ts, Some(b)));
                ts += DEFAULT_TICK_MS;
            }
        }
        out
    }

    fn count(tl: &[(i64, Option<BasicActivity>)], b: BasicActivity) -> usize {
        tl.iter().filter(|e| e.1 == Some(b)).count()
    }

    #[test]
    fn six_minutes_of_lying_is_sleep() {
        let out = derive_sleep(&run(&[(Lie, 6)]), DEFAULT_MIN_SLEEP_MS, DEFAULT_TICK_MS);
        assert_eq!(count(&out, Sleep), 72);
    }

    #[test]
    fn three_minutes_stays_lie() {
        let tl = run(&[(Lie, 3)]);
        assert_eq!(derive_sleep(&tl, DEFAULT_MIN_SLEEP_MS, DEFAULT_TICK_MS), tl);
    }

    #[test]
    fn interrupted_lying_stays_lie() {
        let tl = run(&[(Lie, 4), (Walk, 1), (Lie, 4)]);
        assert_eq!(derive_sleep(&tl, DEFAULT_MIN_SLEEP_MS, DEFAULT_TICK_MS), tl);
    }

    #[test]
    fn exactly_five_minutes_qualifies() {
        let out = derive_sleep(&run(&[(Sit, 1), (Lie, 5), (Stand, 1)]), DEFAULT_MIN_SLEEP_MS, DEFAULT_TICK_MS);
        assert_eq!(count(&out, Sleep), 60);
        assert_eq!(count(&out, Sit), 12);
        assert_eq!(count(&out, Stand), 12);
    }

    #[test]
    fn gap_breaks_a_lie_run() {
        let mut tl = run(&[(Lie, 4)]);
        let later: Vec<_> = run(&[(Lie, 4)]).into_iter().map(|(t, b)| (t + 600_000, b)).collect();
        tl.extend(later);
        assert_eq!(derive_sleep(&tl, DEFAULT_MIN_SLEEP_MS, DEFAULT_TICK_MS), tl);
    }

    fn tick(ts: i64, name: &str, flag: Flag) -> DerivedTick {
        DerivedTick {
            ts,
            derived: DerivedActivity::new(name, flag),
        }
    }

    #[test]
    fn flag_runs() {
        let normal: Vec<_> = (0..10).map(|i| tick(i * 5000, "Sitting in Hall", Flag::Normal)).collect();
        assert!(flag_stream(&normal, 5000).is_empty());

        let mut one = normal.clone();
        one[4] = tick(20_000, "Anomaly", Flag::Anomaly);
        let r = flag_stream(&one, 5000);
        assert_eq!(r.len(), 1);
        assert_eq!((r[0].start_ts, r[0].end_ts, r[0].flag), (20_000, 25_000, Flag::Anomaly));

        let mut adj = normal;
        adj[2] = tick(10_000, "Unnatural", Flag::Unnatural);
        adj[3] = tick(15_000, "Unknown", Flag::Unnatural);
        adj[4] = tick(20_000, "Anomaly", Flag::Anomaly);
        let r = flag_stream(&adj, 5000);
        assert_eq!(r.len(), 2);
        assert_eq!((r[0].start_ts, r[0].end_ts), (10_000, 20_000));
        assert_eq!(r[0].names, vec!["Unnatural", "Unknown"]);
    }

    fn scored(start_ts: i64, label: BasicActivity, score: f64) -> ScoredWindow {
        ScoredWindow {
            start_ts,
            end_ts: start_ts + 6400,
            label,
            score,
        }
    }

    #[test]
    fn ticks_take_the_most_confident_window() {
        let windows = vec![scored(0, Sit, 0.9), scored(3200, Stand, 0.2), scored(6400, Walk, 0.9), scored(9600, Walk, 0.8)];
        let ticks = covered_ticks(&windows, 0, 5000);
        assert_eq!(ticks, vec![0, 5000, 10_000, 15_000]);
        let got = assign_ticks(&windows, &ticks, 5000);
        assert_eq!(got, vec![(0, Some(Sit)), (5000, Some(Walk)), (10_000, Some(Walk)), (15_000, Some(Walk))]);
    }

    #[test]
    fn score_ties_go_to_the_nearest_center() {
        let windows = vec![scored(0, Sit, 0.5), scored(3200, Stand, 0.5), scored(6400, Walk, 0.5)];
        // tick [5000, 10000) midpoint 7500: centers 3200, 6400, 9600
        let got = assign_ticks(&windows, &[5000], 5000);
        assert_eq!(got, vec![(5000, Some(Stand))]);
    }

    #[test]
    fn uncovered_ticks_are_none() {
        let windows = vec![scored(0, Sit, 1.0)];
        assert_eq!(assign_ticks(&windows, &[20_000], 5000), vec![(20_000, None)]);
        assert_eq!(covered_ticks(&[scored(7000, Sit, 1.0)], 0, 5000), vec![5000, 10_000]);
    }

    #[test]
    fn derived_csv_round_trip() {
        let ticks = vec![tick(0, "Lying in Bedroom", Flag::Normal), tick(5000, "Anomaly", Flag::Anomaly)];
        assert_eq!(read_derived_csv(&write_derived_csv(&ticks)).unwrap(), ticks);
        assert!(read_derived_csv("x,y").is_err());
    }
}
