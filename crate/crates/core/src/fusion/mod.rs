//! Contextual activity fusion: basic activity + room + active appliances
//! → derived activity with a Normal / Unnatural / Anomaly flag.

mod rules;
mod timeline;

pub use rules::{FusionRule, FusionRuleTable, APPLIANCE_PRECEDENCE, DEFAULT_RULES_CSV};
pub use timeline::{
    assign_ticks, covered_ticks, derive_sleep, derive_timeline, flag_stream, read_derived_csv, tick_times,
    write_derived_csv, write_flag_report, DerivedTick, FlagRun, ScoredWindow, DEFAULT_MIN_SLEEP_MS, DEFAULT_TICK_MS,
};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BasicActivity {
    Walk,
    Jog,
    Sit,
    Stand,
    Lie,
    Sleep,
    StairUp,
    StairDown,
}

impl BasicActivity {
    pub const ALL: [BasicActivity; 8] = [
        BasicActivity::Walk,
        BasicActivity::Jog,
        BasicActivity::Sit,
        BasicActivity::Stand,
        BasicActivity::Lie,
        BasicActivity::Sleep,
        BasicActivity::StairUp,
        BasicActivity::StairDown,
    ];

    /// Activities a classifier may emit (everything except `Sleep`).
    pub const RECOGNISED: [BasicActivity; 7] = [
        BasicActivity::Walk,
        BasicActivity::Jog,
        BasicActivity::Sit,
        BasicActivity::Stand,
        BasicActivity::Lie,
        BasicActivity::StairUp,
        BasicActivity::StairDown,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BasicActivity::Walk => "walk",
            BasicActivity::Jog => "jog",
            BasicActivity::Sit => "sit",
            BasicActivity::Stand => "stand",
            BasicActivity::Lie => "lie",
            BasicActivity::Sleep => "sleep",
            BasicActivity::StairUp => "stairUp",
            BasicActivity::StairDown => "stairDown",
        }
    }
}

impl fmt::Display for BasicActivity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BasicActivity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let key = s.trim().to_ascii_lowercase();
        // Class names of the public inertial dataset are accepted as well.
        let alias = match key.as_str() {
            "walking" => Some(BasicActivity::Walk),
            "jogging" => Some(BasicActivity::Jog),
            "sitting" => Some(BasicActivity::Sit),
            "standing" => Some(BasicActivity::Stand),
            "lying" => Some(BasicActivity::Lie),
            "sleeping" => Some(BasicActivity::Sleep),
            "upstairs" | "stairup" => Some(BasicActivity::StairUp),
            "downstairs" | "stairdown" => Some(BasicActivity::StairDown),
            _ => None,
        };
        alias
            .or_else(|| BasicActivity::ALL.into_iter().find(|b| b.name() == key))
            .ok_or_else(|| format!("unknown basic activity {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Flag {
    Normal,
    Unnatural,
    Anomaly,
}

impl Flag {
    pub fn name(self) -> &'static str {
        match self {
            Flag::Normal => "Normal",
            Flag::Unnatural => "Unnatural",
            Flag::Anomaly => "Anomaly",
        }
    }
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Flag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "normal" => Ok(Flag::Normal),
            "unnatural" => Ok(Flag::Unnatural),
            "anomaly" => Ok(Flag::Anomaly),
            _ => Err(format!("unknown flag {s:?}")),
        }
    }
}

/// The labelled activity for a context.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DerivedActivity {
    pub name: String,
    pub flag: Flag,
}

impl DerivedActivity {
    pub fn new(name: impl Into<String>, flag: Flag) -> Self {
        DerivedActivity {
            name: name.into(),
            flag,
        }
    }
}
