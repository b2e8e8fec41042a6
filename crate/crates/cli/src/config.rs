//! Run settings: command-line flags override the TOML file, which overrides
//! built-in defaults.

use std::path::{Path, PathBuf};

use adlsense_core::fusion::FusionRuleTable;
use adlsense_core::labelling::PriorityTable;
use adlsense_core::nn::{CentroidModel, WeightsBundle};
use adlsense_core::occupancy::DetectorConfig;
use adlsense_core::pipeline::{Classifier, PipelineConfig};
use adlsense_core::signal::FilterSpec;
use adlsense_core::sim::{NoiseSpec, SimConfig};
use anyhow::{bail, Result};
use chrono::NaiveDate;
use clap::Args;
use serde::{Deserialize, Serialize};

use crate::io::{line_of, load, read_text, InputError};

/// Every setting is optional here; `None` falls through to the next layer.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// Seed for simulated noise.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Profiling window span in minutes (2, 5 or 10).
    #[arg(long, global = true)]
    pub span: Option<u32>,
    /// Local timezone as minutes east of UTC.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub tz_offset_min: Option<i32>,
    /// Local date of the first simulated day (YYYY-MM-DD).
    #[arg(long, global = true)]
    pub start_date: Option<NaiveDate>,
    /// Number of simulated days; scripts are cycled.
    #[arg(long, global = true)]
    pub days: Option<usize>,
    #[arg(long, global = true)]
    pub period_ms: Option<i64>,
    #[arg(long, global = true)]
    pub max_gap_ms: Option<i64>,
    #[arg(long, global = true)]
    pub filter_order: Option<usize>,
    #[arg(long, global = true)]
    pub cutoff_hz: Option<f64>,
    #[arg(long, global = true)]
    pub window_len: Option<usize>,
    #[arg(long, global = true)]
    pub overlap: Option<f64>,
    /// Append gyroscope features (needs gyroscope columns).
    #[arg(long, global = true)]
    pub include_gyro: Option<bool>,
    #[arg(long, global = true)]
    pub tick_ms: Option<i64>,
    #[arg(long, global = true)]
    pub min_sleep_ms: Option<i64>,
    /// Close a room after this long without a new PIR reading.
    #[arg(long, global = true)]
    pub inactivity_timeout_ms: Option<i64>,
    /// Gaussian noise sigma for simulation, m/s².
    #[arg(long, global = true)]
    pub sigma: Option<f64>,
    /// Per-sample dropout probability for simulation.
    #[arg(long, global = true)]
    pub dropout: Option<f64>,
    /// Length of each calibration clip in seconds.
    #[arg(long, global = true)]
    pub calibration_s: Option<u32>,
    /// Fusion rule file (CSV).
    #[arg(long, global = true)]
    pub rules: Option<PathBuf>,
    /// Priority table (CSV).
    #[arg(long, global = true)]
    pub priorities: Option<PathBuf>,
    /// Nearest-centroid model (JSON).
    #[arg(long, global = true)]
    pub centroids: Option<PathBuf>,
    /// Neural weights bundle (JSON).
    #[arg(long, global = true)]
    pub weights: Option<PathBuf>,
}

macro_rules! layer {
    ($hi:expr, $lo:expr; $($field:ident),*) => {
        Settings { $($field: $hi.$field.clone().or_else(|| $lo.$field.clone()),)* }
    };
}

impl Settings {
    pub fn defaults() -> Self {
        let p = PipelineConfig::default();
        Settings {
            seed: Some(0),
            span: Some(p.span_minutes),
            tz_offset_min: Some(p.tz_offset_min),
            start_date: NaiveDate::from_ymd_opt(2024, 1, 1),
            days: None,
            period_ms: Some(SimConfig::default().period_ms),
            max_gap_ms: Some(p.max_gap_ms),
            filter_order: Some(p.filter.order),
            cutoff_hz: Some(p.filter.cutoff_hz),
            window_len: Some(p.window_len),
            overlap: Some(p.overlap),
            include_gyro: Some(p.include_gyro),
            tick_ms: Some(p.tick_ms),
            min_sleep_ms: Some(p.min_sleep_ms),
            inactivity_timeout_ms: None,
            sigma: Some(0.0),
            dropout: Some(0.0),
            calibration_s: Some(600),
            rules: None,
            priorities: None,
            centroids: None,
            weights: None,
        }
    }

    /// `self` wins over `lower` field by field.
    pub fn over(&self, lower: &Settings) -> Settings {
        layer!(self, lower; seed, span, tz_offset_min, start_date, days, period_ms, max_gap_ms,
            filter_order, cutoff_hz, window_len, overlap, include_gyro, tick_ms, min_sleep_ms,
            inactivity_timeout_ms, sigma, dropout, calibration_s, rules, priorities, centroids, weights)
    }

    pub fn from_file(path: &Path) -> Result<Settings> {
        let text = read_text(path)?;
        toml::from_str(&text).map_err(|e: toml::de::Error| {
            let line = e.span().map(|r| line_of(&text, r.start));
            InputError::new("config", path, line, e.message()).into()
        })
    }

    /// flags > file > defaults.
    pub fn resolve(flags: &Settings, file: Option<&Path>) -> Result<Settings> {
        let from_file = match file {
            Some(p) => Settings::from_file(p)?,
            None => Settings::default(),
        };
        Ok(flags.over(&from_file).over(&Settings::defaults()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("settings serialise")
    }

    pub fn pipeline(&self) -> Result<PipelineConfig> {
        let period = self.period_ms.expect("resolved");
        if period <= 0 {
            bail!("period_ms must be positive");
        }
        let config = PipelineConfig {
            max_gap_ms: self.max_gap_ms.expect("resolved"),
            filter: FilterSpec {
                order: self.filter_order.expect("resolved"),
                cutoff_hz: self.cutoff_hz.expect("resolved"),
                sample_rate_hz: 1000.0 / period as f64,
            },
            window_len: self.window_len.expect("resolved"),
            overlap: self.overlap.expect("resolved"),
            include_gyro: self.include_gyro.expect("resolved"),
            tick_ms: self.tick_ms.expect("resolved"),
            min_sleep_ms: self.min_sleep_ms.expect("resolved"),
            span_minutes: self.span.expect("resolved"),
            tz_offset_min: self.tz_offset_min.expect("resolved"),
            detector: DetectorConfig {
                inactivity_timeout_ms: self.inactivity_timeout_ms,
            },
        };
        config.validate()?;
        Ok(config)
    }

    pub fn noise(&self) -> NoiseSpec {
        NoiseSpec::new(
            self.sigma.expect("resolved"),
            self.dropout.expect("resolved"),
            self.seed.expect("resolved"),
        )
    }

    pub fn sim(&self) -> Result<SimConfig> {
        let p = self.pipeline()?;
        let noise = self.noise();
        noise.validate()?;
        Ok(SimConfig {
            subject_id: "sim".into(),
            period_ms: self.period_ms.expect("resolved"),
            tick_ms: p.tick_ms,
            min_sleep_ms: p.min_sleep_ms,
            noise,
        })
    }

    pub fn rules(&self) -> Result<FusionRuleTable> {
        match &self.rules {
            Some(p) => load(p, FusionRuleTable::from_csv),
            None => Ok(FusionRuleTable::default()),
        }
    }

    pub fn priority_table(&self) -> Result<PriorityTable> {
        match &self.priorities {
            Some(p) => load(p, PriorityTable::from_csv),
            None => Ok(PriorityTable::standard()),
        }
    }

    /// The configured model, if any.
    pub fn classifier(&self) -> Result<Option<Classifier>> {
        match (&self.centroids, &self.weights) {
            (Some(_), Some(_)) => bail!("give either --centroids or --weights, not both"),
            (Some(p), None) => Ok(Some(Classifier::Centroid(load(p, CentroidModel::from_json)?))),
            (None, Some(p)) => Ok(Some(Classifier::neural(load(p, WeightsBundle::from_json)?)?)),
            (None, None) => Ok(None),
        }
    }
}
