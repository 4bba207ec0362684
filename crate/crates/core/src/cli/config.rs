//! Flat `key = value` run configuration.
//!
//! One entry per line, `#` starts a comment, keys are dotted
//! (`open.gamma = 0.002`). Commands read keys through typed accessors that
//! record what was consumed; [`RunConfig::finish`] then rejects every key
//! the command did not ask for.

use std::sync::Mutex;
use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quantum::{BlochState, OpenSystemParams};

#[derive(Debug, Default)]
pub struct RunConfig {
    entries: BTreeMap<String, (usize, String)>,
    used: Mutex<BTreeSet<String>>,
}

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(cfg_err(format!("line {}: expected `key = value`", i + 1)));
            };
            let key = k.trim();
            let valid = !key.is_empty()
                && key.split('.').all(|part| !part.is_empty() && part.chars().all(|c| c.is_ascii_alphanumeric() || c == '_'));
            if !valid {
                return Err(cfg_err(format!("line {}: malformed key `{key}`", i + 1)));
            }
            if let Some((first, _)) = entries.insert(key.to_string(), (i + 1, v.trim().to_string())) {
                return Err(cfg_err(format!("line {}: duplicate key `{key}` (first on line {first})", i + 1)));
            }
        }
        Ok(RunConfig { entries, used: Mutex::new(BTreeSet::new()) })
    }

    /// Command-line overrides replace or add entries.
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), (0, value.into()));
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.used.lock().expect("config lock").insert(key.to_string());
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    fn parsed<T>(&self, key: &str, parse: impl Fn(&str) -> Option<T>, what: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => parse(v).map(Some).ok_or_else(|| cfg_err(format!("`{key}`: expected {what}, got `{v}`"))),
        }
    }

    pub fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn real_opt(&self, key: &str) -> Result<Option<f64>> {
        self.parsed(key, parse_real, "a real number")
    }

    pub fn real(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.real_opt(key)?.unwrap_or(default))
    }

    pub fn count(&self, key: &str, default: usize) -> Result<usize> {
        Ok(self.parsed(key, |v| v.parse().ok(), "a nonnegative integer")?.unwrap_or(default))
    }

    pub fn flag(&self, key: &str, default: bool) -> Result<bool> {
        let p = |v: &str| match v {
            "true" | "yes" | "1" => Some(true),
            "false" | "no" | "0" => Some(false),
            _ => None,
        };
        Ok(self.parsed(key, p, "true or false")?.unwrap_or(default))
    }

    pub fn word(&self, key: &str, default: &str) -> Result<String> {
        Ok(self.raw(key).unwrap_or(default).to_string())
    }

    /// One of `choices`.
    pub fn choice(&self, key: &str, default: &str, choices: &[&str]) -> Result<String> {
        let v = self.word(key, default)?;
        if choices.contains(&v.as_str()) {
            Ok(v)
        } else {
            Err(cfg_err(format!("`{key}`: expected one of {}, got `{v}`", choices.join(", "))))
        }
    }

    /// Comma-separated reals; an empty value is an empty list.
    pub fn reals(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        let p = |v: &str| -> Option<Vec<f64>> {
            if v.is_empty() {
                return Some(vec![]);
            }
            v.split(',').map(|s| parse_real(s.trim())).collect()
        };
        Ok(self.parsed(key, p, "comma-separated reals")?.unwrap_or_else(|| default.to_vec()))
    }

    /// Comma-separated integers and inclusive ranges `a..b`.
    pub fn indices(&self, key: &str, default: &[usize]) -> Result<Vec<usize>> {
        let p = |v: &str| -> Option<Vec<usize>> {
            let mut out = Vec::new();
            if v.is_empty() {
                return Some(out);
            }
            for part in v.split(',').map(str::trim) {
                match part.split_once("..") {
                    Some((a, b)) => {
                        let (a, b): (usize, usize) = (a.trim().parse().ok()?, b.trim().parse().ok()?);
                        out.extend(a..=b);
                    }
                    None => out.push(part.parse().ok()?),
                }
            }
            Some(out)
        };
        Ok(self.parsed(key, p, "indices like `1..9` or `1,3,5`")?.unwrap_or_else(|| default.to_vec()))
    }

    /// Comma-separated words; an empty value is an empty list.
    pub fn words(&self, key: &str, default: &[&str]) -> Result<Vec<String>> {
        Ok(match self.raw(key) {
            None => default.iter().map(|s| s.to_string()).collect(),
            Some("") => vec![],
            Some(v) => v.split(',').map(|s| s.trim().to_string()).collect(),
        })
    }

    /// `x1, x2, x3` inside the closed unit ball.
    pub fn bloch(&self, key: &str, default: Option<BlochState>) -> Result<BlochState> {
        match self.parsed(key, |v| v.split(',').map(|s| parse_real(s.trim())).collect::<Option<Vec<f64>>>(), "three reals")? {
            None => default.ok_or_else(|| cfg_err(format!("missing required key `{key}`"))),
            Some(v) if v.len() == 3 => BlochState::new(v[0], v[1], v[2]).map_err(|e| cfg_err(format!("`{key}`: {e}"))),
            Some(_) => Err(cfg_err(format!("`{key}`: expected three components"))),
        }
    }

    /// `open.*` physical constants.
    pub fn open_params(&self) -> Result<OpenSystemParams> {
        let d = OpenSystemParams::default();
        let p = OpenSystemParams {
            omega: self.real("open.omega", d.omega)?,
            gamma: self.real("open.gamma", d.gamma)?,
            mu: self.real("open.mu", d.mu)?,
            n_max: self.real("open.n_max", d.n_max)?,
        };
        p.validate().map_err(|e| cfg_err(e.to_string()))?;
        Ok(p)
    }

    /// Fails on the first key that no accessor consumed.
    pub fn finish(&self) -> Result<()> {
        let used = self.used.lock().expect("config lock");
        match self.entries.iter().find(|(k, _)| !used.contains(*k)) {
            Some((k, (line, _))) if *line > 0 => Err(cfg_err(format!("line {line}: unknown key `{k}`"))),
            Some((k, _)) => Err(cfg_err(format!("unknown key `{k}`"))),
            None => Ok(()),
        }
    }
}

/// A real literal, optionally written as a multiple of π: `0.25`, `pi`,
/// `3pi/20`, `3*pi/20`, `-pi/4`.
pub fn parse_real(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Ok(v) = s.parse::<f64>() {
        return v.is_finite().then_some(v);
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim().parse::<f64>().ok()?),
        None => (s, 1.0),
    };
    let coeff = num.strip_suffix("pi")?.trim().trim_end_matches('*').trim();
    let c = match coeff {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().ok()?,
    };
    let v = c * PI / den;
    v.is_finite().then_some(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_namespaces() {
        let c = RunConfig::parse("# header\nopen.gamma = 0.004  # faster decay\n\ngrid.phi_indices = 1..3, 7\n").unwrap();
        assert_eq!(c.real("open.gamma", 0.0).unwrap(), 0.004);
        assert_eq!(c.indices("grid.phi_indices", &[]).unwrap(), vec![1, 2, 3, 7]);
        c.finish().unwrap();
    }

    #[test]
    fn rejects_unknown_duplicate_and_malformed() {
        let c = RunConfig::parse("open.gamma = 1\nopen.gama = 2\n").unwrap();
        c.real("open.gamma", 0.0).unwrap();
        assert!(matches!(c.finish(), Err(Error::Config(m)) if m.contains("open.gama")));
        assert!(RunConfig::parse("a = 1\na = 2").is_err());
        assert!(RunConfig::parse("just words").is_err());
        assert!(RunConfig::parse("bad key = 1").is_err());
    }

    #[test]
    fn real_literals() {
        assert_eq!(parse_real("pi"), Some(PI));
        assert_eq!(parse_real("3pi/20"), Some(3.0 * PI / 20.0));
        assert_eq!(parse_real("3*pi/20"), Some(3.0 * PI / 20.0));
        assert_eq!(parse_real("-pi/4"), Some(-PI / 4.0));
        assert_eq!(parse_real("1e-3"), Some(1e-3));
        assert_eq!(parse_real("nan"), None);
        assert_eq!(parse_real("pie"), None);
    }

    #[test]
    fn bloch_vectors() {
        let c = RunConfig::parse("x = 1, 0, 0\ny = 1, 1, 0\nz = 1, 0").unwrap();
        assert_eq!(c.bloch("x", None).unwrap(), BlochState::raw(1.0, 0.0, 0.0));
        assert!(c.bloch("y", None).is_err());
        assert!(c.bloch("z", None).is_err());
        assert!(c.bloch("missing", None).is_err());
    }

    #[test]
    fn empty_lists() {
        let c = RunConfig::parse("a =\nb =").unwrap();
        assert!(c.indices("a", &[1]).unwrap().is_empty());
        assert!(c.words("b", &["x"]).unwrap().is_empty());
    }
}
