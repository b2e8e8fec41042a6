use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::{BasicActivity, DerivedActivity, Flag};
use crate::ambient::{Appliance, RoomId};
use crate::error::{Error, Result};

/// Rule file shipped with the crate.
pub const DEFAULT_RULES_CSV: &str = include_str!("../../data/fusion_rules.csv");

/// Order in which simultaneously active appliances are consulted.
pub const APPLIANCE_PRECEDENCE: [Appliance; 4] = [
    Appliance::WaterBottle,
    Appliance::BathroomSwitch,
    Appliance::MirrorBulb,
    Appliance::Tv,
];

/// One row of the rule file. `None` in `basic` / `room` is a wildcard;
/// `None` in `appliance` means the rule needs no appliance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FusionRule {
    pub basic: Option<BasicActivity>,
    pub room: Option<RoomId>,
    pub appliance: Option<Appliance>,
    pub derived: DerivedActivity,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FusionRuleTable {
    rules: Vec<FusionRule>,
    fallback: DerivedActivity,
}

impl Default for FusionRuleTable {
    fn default() -> Self {
        FusionRuleTable::standard()
    }
}

impl FusionRuleTable {
    pub fn new(rules: Vec<FusionRule>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for (i, r) in rules.iter().enumerate() {
            if !seen.insert((r.basic, r.room, r.appliance)) {
                return Err(Error::InvalidParameter(format!("duplicate fusion rule #{}", i + 1)));
            }
        }
        Ok(FusionRuleTable {
            rules,
            fallback: DerivedActivity::new("Unknown", Flag::Unnatural),
        })
    }

    pub fn with_fallback(mut self, fallback: DerivedActivity) -> Self {
        self.fallback = fallback;
        self
    }

    pub fn rules(&self) -> &[FusionRule] {
        &self.rules
    }

    pub fn fallback(&self) -> &DerivedActivity {
        &self.fallback
    }

    /// Parses `basic,room,appliance,derived_name,flag`. `-` marks "no basic
    /// activity" / "no appliance", `*` any room. `#` lines are comments.
    /// The bundled table.
    pub fn standard() -> Self {
        FusionRuleTable::from_csv(DEFAULT_RULES_CSV).expect("bundled rule file is valid")
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rules = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("basic,") {
                continue;
            }
            let err = |reason: String| Error::parse(i + 1, reason);
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 5 {
                return Err(err(format!("expected 5 columns, got {}", f.len())));
            }
            let basic = match f[0] {
                "-" | "" => None,
                b => Some(b.parse().map_err(err)?),
            };
            let room = match f[1] {
                "*" => None,
                r => Some(r.parse().map_err(err)?),
            };
            let appliance = match f[2] {
                "-" | "" => None,
                a => Some(a.parse().map_err(err)?),
            };
            if f[3].is_empty() {
                return Err(err("empty derived name".into()));
            }
            rules.push(FusionRule {
                basic,
                room,
                appliance,
                derived: DerivedActivity::new(f[3], f[4].parse().map_err(err)?),
            });
        }
        FusionRuleTable::new(rules).map_err(|e| match e {
            Error::InvalidParameter(m) => Error::parse(0, m),
            e => e,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("basic,room,appliance,derived_name,flag\n");
        for r in &self.rules {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.basic.map_or("-", BasicActivity::name),
                r.room.map_or("*", RoomId::name),
                r.appliance.map_or("-", Appliance::name),
                r.derived.name,
                r.derived.flag
            );
        }
        out
    }

    fn find(&self, basic: Option<BasicActivity>, room: Option<RoomId>, appliance: Option<Appliance>) -> Option<&DerivedActivity> {
        self.rules
            .iter()
            .find(|r| r.basic == basic && r.room == room && r.appliance == appliance)
            .map(|r| &r.derived)
    }

    /// Most specific rule for the context. Appliance rules (in
    /// [`APPLIANCE_PRECEDENCE`] order) win over room rules; within a tier the
    /// order is exact basic + room, basic + any room, any basic + room,
    /// then any basic + any room. Falls back to the default rule.
    pub fn fuse(&self, basic: Option<BasicActivity>, room: RoomId, appliances: &BTreeSet<Appliance>) -> DerivedActivity {
        let candidates = |app: Option<Appliance>| {
            let mut keys = Vec::with_capacity(4);
            if basic.is_some() {
                keys.push((basic, Some(room)));
                keys.push((basic, None));
            }
            keys.push((None, Some(room)));
            keys.push((None, None));
            keys.into_iter().find_map(|(b, r)| self.find(b, r, app))
        };
        APPLIANCE_PRECEDENCE
            .iter()
            .filter(|a| appliances.contains(a))
            .find_map(|&a| candidates(Some(a)))
            .or_else(|| candidates(None))
            .unwrap_or(&self.fallback)
            .clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn none() -> BTreeSet<Appliance> {
        BTreeSet::new()
    }

    #[test]
    fn lookups() {
        let t = FusionRuleTable::default();
        assert_eq!(
            t.fuse(Some(BasicActivity::Lie), RoomId::Bedroom, &none()),
            DerivedActivity::new("Lying in Bedroom", Flag::Normal)
        );
        assert_eq!(t.fuse(Some(BasicActivity::Jog), RoomId::Kitchen, &none()).flag, Flag::Unnatural);
        assert_eq!(t.fuse(Some(BasicActivity::Sleep), RoomId::Kitchen, &none()).flag, Flag::Anomaly);
        let tv = BTreeSet::from([Appliance::Tv]);
        assert_eq!(
            t.fuse(Some(BasicActivity::Sit), RoomId::Hall, &tv),
            DerivedActivity::new("Watching TV Sitting", Flag::Normal)
        );
        assert_eq!(t.fuse(None, RoomId::Outside, &none()).name, "Outside Activity");
    }

    #[test]
    fn tv_outside_the_hall_does_not_apply() {
        let t = FusionRuleTable::default();
        let tv = BTreeSet::from([Appliance::Tv]);
        assert_eq!(t.fuse(Some(BasicActivity::Sit), RoomId::Kitchen, &tv).name, "Sitting in Kitchen");
    }

    #[test]
    fn appliance_precedence() {
        let t = FusionRuleTable::default();
        let both = BTreeSet::from([Appliance::Tv, Appliance::WaterBottle]);
        assert_eq!(t.fuse(Some(BasicActivity::Sit), RoomId::Hall, &both).name, "Drinking Activity");
        let bath = BTreeSet::from([Appliance::BathroomSwitch, Appliance::MirrorBulb]);
        assert_eq!(t.fuse(Some(BasicActivity::Stand), RoomId::Bathroom, &bath).name, "BathroomActivity");
    }

    #[test]
    fn unknown_context_uses_fallback() {
        let t = FusionRuleTable::default();
        let d = t.fuse(Some(BasicActivity::Jog), RoomId::Stairs, &none());
        assert_eq!(d, DerivedActivity::new("Unknown", Flag::Unnatural));
        assert_eq!(t.fuse(None, RoomId::Kitchen, &none()).name, "Unknown");
    }

    #[test]
    fn csv_round_trip() {
        let t = FusionRuleTable::default();
        let back = FusionRuleTable::from_csv(&t.to_csv()).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.to_csv(), t.to_csv());
    }

    #[test]
    fn malformed_rule_files() {
        assert!(FusionRuleTable::from_csv("lie,Garage,-,x,Normal").is_err());
        assert!(FusionRuleTable::from_csv("lie,Hall,-,x,Weird").is_err());
        assert!(FusionRuleTable::from_csv("lie,Hall,-,x").is_err());
        assert!(FusionRuleTable::from_csv("lie,Hall,-,x,Normal\nlie,Hall,-,y,Normal").is_err());
    }
}
