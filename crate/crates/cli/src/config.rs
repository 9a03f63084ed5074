//! Flat `key = value` files. Values are SI unless a unit from the unit table
//! trails the numbers, e.g. `gyro_bias = 0.1, 0, 0 deg/s`.

use std::collections::BTreeMap;
use std::path::Path;

use strapnav::units::Unit;
use strapnav::Vec3;

use crate::error::{input, CliError, Result};

#[derive(Clone, Debug, Default)]
pub struct KeyValues {
    origin: String,
    entries: BTreeMap<String, String>,
}

impl KeyValues {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| input(format!("{origin}:{}: expected key = value", n + 1)))?;
            let k = k.trim().to_string();
            if entries.insert(k.clone(), v.trim().to_string()).is_some() {
                return Err(input(format!("{origin}:{}: duplicate key {k:?}", n + 1)));
            }
        }
        Ok(Self { origin: origin.to_string(), entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Applies a `key=value` override, replacing any value from the file.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment.split_once('=').ok_or_else(|| input(format!("override {assignment:?} is not key=value")))?;
        self.entries.insert(k.trim().to_string(), v.trim().to_string());
        Ok(())
    }

    pub fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key)
    }

    fn bad(&self, key: &str, v: &str, why: impl std::fmt::Display) -> CliError {
        input(format!("{}: {key} = {v:?}: {why}", self.origin))
    }

    pub fn required_str(&mut self, key: &str) -> Result<String> {
        self.take(key).ok_or_else(|| input(format!("{}: missing key {key}", self.origin)))
    }

    pub fn f64_or(&mut self, key: &str, default: f64) -> Result<f64> {
        match self.take(key) {
            None => Ok(default),
            Some(v) => match numbers(&v).map_err(|e| self.bad(key, &v, e))?.as_slice() {
                [x] => Ok(*x),
                _ => Err(self.bad(key, &v, "expected one number")),
            },
        }
    }

    pub fn required_f64(&mut self, key: &str) -> Result<f64> {
        if !self.has(key) {
            return Err(input(format!("{}: missing key {key}", self.origin)));
        }
        self.f64_or(key, 0.0)
    }

    /// One number applies to all three axes.
    pub fn vec3_or(&mut self, key: &str, default: Vec3) -> Result<Vec3> {
        match self.take(key) {
            None => Ok(default),
            Some(v) => match numbers(&v).map_err(|e| self.bad(key, &v, e))?.as_slice() {
                [x] => Ok(Vec3::repeat(*x)),
                [x, y, z] => Ok(Vec3::new(*x, *y, *z)),
                _ => Err(self.bad(key, &v, "expected one or three numbers")),
            },
        }
    }

    pub fn bool_or(&mut self, key: &str, default: bool) -> Result<bool> {
        match self.take(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| self.bad(key, &v, "expected true or false")),
        }
    }

    pub fn usize_or(&mut self, key: &str, default: usize) -> Result<usize> {
        match self.take(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| self.bad(key, &v, "expected a non-negative integer")),
        }
    }

    pub fn u64_or(&mut self, key: &str, default: u64) -> Result<u64> {
        match self.take(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| self.bad(key, &v, "expected a non-negative integer")),
        }
    }

    /// Fails if any key was never consumed.
    pub fn finish(self, context: &str) -> Result<()> {
        if self.entries.is_empty() {
            return Ok(());
        }
        let keys: Vec<&str> = self.entries.keys().map(String::as_str).collect();
        Err(input(format!("{}: key(s) not used {context}: {}", self.origin, keys.join(", "))))
    }
}

/// Parses `a[, b, c] [unit]` into SI numbers.
fn numbers(v: &str) -> std::result::Result<Vec<f64>, String> {
    let (body, unit) = match v.rsplit_once(char::is_whitespace) {
        Some((head, tail)) => match tail.parse::<Unit>() {
            Ok(u) => (head, Some(u)),
            Err(_) => (v, None),
        },
        None => (v, None),
    };
    body.split(',')
        .map(|s| {
            let x: f64 = s.trim().parse().map_err(|_| format!("{:?} is not a number", s.trim()))?;
            if !x.is_finite() {
                return Err("values must be finite".to_string());
            }
            Ok(unit.map_or(x, |u| u.to_si(x)))
        })
        .collect()
}
