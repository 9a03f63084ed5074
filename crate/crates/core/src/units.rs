//! Conversions between datasheet units and SI.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown unit {0:?}")]
pub struct UnknownUnit(pub String);

/// Units accepted in sensor-error specifications.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Unit {
    Rad,
    Deg,
    RadPerSec,
    DegPerSec,
    DegPerHour,
    /// Angle random walk.
    DegPerRootHour,
    /// Rate random walk, °/hr/√hr.
    DegPerHourPerRootHour,
    RadPerRootSec,
    RadPerSecPerRootSec,
    MetersPerSec2,
    MilliG,
    /// Velocity random walk as a noise density, m/s²/√Hz.
    MetersPerSec2PerRootHz,
    /// Velocity random walk, m/s/√hr.
    MetersPerSecPerRootHour,
    /// Acceleration random walk, m/s²/√s.
    MetersPerSec2PerRootSec,
}

/// Standard gravity used to convert milli-g.
pub const STANDARD_GRAVITY: f64 = 9.80665;

const DEG: f64 = PI / 180.0;

/// Every unit with its canonical spelling and its factor to SI.
pub const UNIT_TABLE: [(Unit, &str, f64); 14] = [
    (Unit::Rad, "rad", 1.0),
    (Unit::Deg, "deg", DEG),
    (Unit::RadPerSec, "rad/s", 1.0),
    (Unit::DegPerSec, "deg/s", DEG),
    (Unit::DegPerHour, "deg/hr", DEG / 3600.0),
    (Unit::DegPerRootHour, "deg/rt-hr", DEG / 60.0),
    (Unit::DegPerHourPerRootHour, "deg/hr/rt-hr", DEG / 216_000.0),
    (Unit::RadPerRootSec, "rad/rt-s", 1.0),
    (Unit::RadPerSecPerRootSec, "rad/s/rt-s", 1.0),
    (Unit::MetersPerSec2, "m/s^2", 1.0),
    (Unit::MilliG, "mg", STANDARD_GRAVITY * 1e-3),
    (Unit::MetersPerSec2PerRootHz, "m/s^2/rt-Hz", 1.0),
    (Unit::MetersPerSecPerRootHour, "m/s/rt-hr", 1.0 / 60.0),
    (Unit::MetersPerSec2PerRootSec, "m/s^2/rt-s", 1.0),
];

impl Unit {
    fn entry(self) -> &'static (Unit, &'static str, f64) {
        UNIT_TABLE.iter().find(|e| e.0 == self).expect("every unit is tabulated")
    }

    pub fn factor(self) -> f64 {
        self.entry().2
    }

    pub fn name(self) -> &'static str {
        self.entry().1
    }

    pub fn to_si(self, value: f64) -> f64 {
        value * self.factor()
    }

    pub fn from_si(self, value: f64) -> f64 {
        value / self.factor()
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Unit {
    type Err = UnknownUnit;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        UNIT_TABLE
            .iter()
            .find(|e| e.1 == s)
            .map(|e| e.0)
            .ok_or_else(|| UnknownUnit(s.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn round_trips() {
        for (u, name, _) in UNIT_TABLE {
            for v in [0.0, 1.0, -3.5, 1e-7, 12345.678] {
                assert_relative_eq!(u.from_si(u.to_si(v)), v, max_relative = 1e-15);
            }
            assert_eq!(name.parse::<Unit>().unwrap(), u);
        }
    }

    #[test]
    fn known_values() {
        assert_relative_eq!(Unit::DegPerSec.to_si(180.0), PI);
        assert_relative_eq!(Unit::DegPerHour.to_si(3600.0), DEG);
        // 1 °/√hr accumulates 1° after an hour: σ·√3600 s
        assert_relative_eq!(Unit::DegPerRootHour.to_si(1.0) * 3600f64.sqrt(), DEG);
        // 1 °/hr/√hr gives a rate of 1 °/hr after an hour
        assert_relative_eq!(Unit::DegPerHourPerRootHour.to_si(1.0) * 3600f64.sqrt(), Unit::DegPerHour.to_si(1.0));
        assert_relative_eq!(Unit::MilliG.to_si(1000.0), STANDARD_GRAVITY);
    }

    #[test]
    fn unknown_name() {
        assert!("furlong".parse::<Unit>().is_err());
    }
}
