//! Flat `key = value` run configuration with `--set` overrides.
//!
//! ```text
//! # reference market
//! a = 0.5
//! nu = 0.33333333333333333
//! gamma = 1
//! theta1 = 3
//! theta2 = 2
//! L1 = 3
//! L2 = 2
//! sweep.gamma = 0.5:1.5:11
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Unknown or repeated
//! keys are errors. Overrides replace file values.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use duopoly_core::equilibria::DEFAULT_DEGENERACY_TOLERANCE;
use duopoly_core::integrator::{DEFAULT_DT, DEFAULT_TOLERANCE};
use duopoly_core::model::PARAM_NAMES;
use duopoly_core::{Method, ModelParams, State};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const DEFAULT_SWEEP_CAP: u64 = 1_000_000;

/// Where a value came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Override,
    Flag,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(n) => write!(f, "line {n}"),
            Origin::Override => f.write_str("--set"),
            Origin::Flag => f.write_str("command line"),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("cannot read config `{path}`: {message}")]
    Read { path: String, message: String },
    #[error("{origin}: expected `key = value`, found `{text}`")]
    Syntax { origin: Origin, text: String },
    #[error("{origin}: unknown key `{key}`")]
    UnknownKey { origin: Origin, key: String },
    #[error("{origin}: key `{key}` already set on line {first}")]
    Duplicate { origin: Origin, key: String, first: usize },
    #[error("{origin}: invalid value `{value}` for `{key}`: {reason}")]
    Invalid { origin: Origin, key: String, value: String, reason: String },
    #[error("missing required key `{key}`")]
    Missing { key: String },
    #[error("sweep grid has {size} points, above the cap of {cap} (set `sweep.cap` to raise it)")]
    GridTooLarge { size: u128, cap: u64 },
    #[error("invalid parameters: {0}")]
    Params(String),
}

const SCALAR_KEYS: &[&str] = &[
    "seed",
    "tolerance",
    "u0",
    "v0",
    "t_end",
    "dt",
    "method",
    "rtol",
    "atol",
    "eta",
    "steps",
    "sweep.cap",
    "sweep.parallel",
    "verify.suites",
    "verify.samples",
    "verify.pairs",
    "verify.perturbations",
    "verify.algebra_samples",
    "verify.t_end",
    "verify.gap_t_end",
    "verify.decay_t_end",
    "verify.kappa",
];

fn is_known(key: &str) -> bool {
    if PARAM_NAMES.contains(&key) || SCALAR_KEYS.contains(&key) {
        return true;
    }
    key.strip_prefix("sweep.").is_some_and(|p| PARAM_NAMES.contains(&p))
}

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    value: String,
    origin: Origin,
}

/// Validated key/value table before interpretation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, Entry>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut raw = RawConfig::default();
        for (idx, line) in text.lines().enumerate() {
            let origin = Origin::Line(idx + 1);
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, value) = split_pair(trimmed).ok_or_else(|| ConfigError::Syntax {
                origin: origin.clone(),
                text: trimmed.to_string(),
            })?;
            if let Some(prev) = raw.entries.get(key) {
                let first = match prev.origin {
                    Origin::Line(n) => n,
                    _ => 0,
                };
                return Err(ConfigError::Duplicate { origin, key: key.to_string(), first });
            }
            raw.insert(key, value, origin)?;
        }
        Ok(raw)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }

    /// Applies one `key=value` override.
    pub fn apply_override(&mut self, pair: &str) -> Result<(), ConfigError> {
        let (key, value) = split_pair(pair.trim()).ok_or_else(|| ConfigError::Syntax {
            origin: Origin::Override,
            text: pair.to_string(),
        })?;
        self.insert(key, value, Origin::Override)
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.entries.insert("seed".into(), Entry { value: seed.to_string(), origin: Origin::Flag });
    }

    fn insert(&mut self, key: &str, value: &str, origin: Origin) -> Result<(), ConfigError> {
        if !is_known(key) {
            return Err(ConfigError::UnknownKey { origin, key: key.to_string() });
        }
        self.entries.insert(key.to_string(), Entry { value: value.to_string(), origin });
        Ok(())
    }

    /// SHA-256 over the resolved `key=value` lines in key order, seed excluded.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, e) in self.entries.iter().filter(|(k, _)| k.as_str() != "seed") {
            h.update(k.as_bytes());
            h.update(b"=");
            h.update(e.value.as_bytes());
            h.update(b"\n");
        }
        hex::encode(h.finalize())
    }

    fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.get(key)
    }

    fn invalid(&self, key: &str, reason: impl Into<String>) -> ConfigError {
        let e = &self.entries[key];
        ConfigError::Invalid { origin: e.origin.clone(), key: key.into(), value: e.value.clone(), reason: reason.into() }
    }

    fn f64_opt(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        let Some(e) = self.get(key) else { return Ok(None) };
        let x: f64 = e.value.parse().map_err(|_| self.invalid(key, "not a decimal number"))?;
        if !x.is_finite() {
            return Err(self.invalid(key, "must be finite"));
        }
        Ok(Some(x))
    }

    fn positive(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.f64_opt(key)? {
            None => Ok(default),
            Some(x) if x > 0.0 => Ok(x),
            Some(_) => Err(self.invalid(key, "must be positive")),
        }
    }

    fn u64_opt(&self, key: &str) -> Result<Option<u64>, ConfigError> {
        let Some(e) = self.get(key) else { return Ok(None) };
        e.value.parse().map(Some).map_err(|_| self.invalid(key, "not a non-negative integer"))
    }

    fn count(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        Ok(self.u64_opt(key)?.map_or(default, |n| n as usize))
    }

    fn bool_opt(&self, key: &str) -> Result<Option<bool>, ConfigError> {
        let Some(e) = self.get(key) else { return Ok(None) };
        match e.value.as_str() {
            "true" => Ok(Some(true)),
            "false" => Ok(Some(false)),
            _ => Err(self.invalid(key, "expected `true` or `false`")),
        }
    }
}

fn split_pair(s: &str) -> Option<(&str, &str)> {
    let (k, v) = s.split_once('=')?;
    let (k, v) = (k.trim(), v.trim());
    if k.is_empty() || v.is_empty() || k.contains(char::is_whitespace) {
        return None;
    }
    Some((k, v))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateConfig {
    pub s0: State,
    pub t_end: f64,
    pub dt: f64,
    pub method: Method,
    /// User-supplied η; output built on it is marked uncertified.
    pub eta_override: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Range {
    pub fn value(&self, i: usize) -> f64 {
        if self.count == 1 {
            self.start
        } else if i + 1 == self.count {
            self.stop
        } else {
            self.start + (self.stop - self.start) * i as f64 / (self.count - 1) as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    /// One entry per parameter in canonical order; `None` keeps the base value.
    pub ranges: [Option<Range>; 7],
    pub cap: u64,
    pub parallel: bool,
}

impl SweepConfig {
    pub fn size(&self) -> u128 {
        self.ranges.iter().flatten().map(|r| r.count as u128).product()
    }
}

pub const SUITES: [&str; 11] = [
    "classification",
    "closed_form_traces",
    "fd_jacobian",
    "rk4_order",
    "envelopes",
    "positive_invariance",
    "liapunov_algebra",
    "vdot_consistency",
    "liapunov_decay",
    "uniqueness",
    "discrete_fixed_points",
];

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub suites: Vec<&'static str>,
    pub samples: usize,
    pub pairs: usize,
    pub perturbations: usize,
    pub algebra_samples: usize,
    pub t_end: f64,
    pub gap_t_end: f64,
    pub decay_t_end: f64,
    pub kappa: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Parameter values as given; sweeps may leave swept ones unset.
    pub base: [Option<f64>; 7],
    pub seed: u64,
    pub hash: String,
    pub tolerance: f64,
    pub simulate: SimulateConfig,
    pub steps: usize,
    pub sweep: SweepConfig,
    pub verify: VerifyConfig,
}

impl RunConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<Self, ConfigError> {
        let mut base = [None; 7];
        for (slot, name) in base.iter_mut().zip(PARAM_NAMES) {
            *slot = raw.f64_opt(name)?;
        }
        let method = match raw.get("method").map(|e| e.value.as_str()) {
            None | Some("rk4") => Method::Rk4,
            Some("rk45") => Method::Rk45 {
                rtol: raw.positive("rtol", DEFAULT_TOLERANCE)?,
                atol: raw.positive("atol", DEFAULT_TOLERANCE)?,
            },
            Some(_) => return Err(raw.invalid("method", "expected `rk4` or `rk45`")),
        };
        let s0 = State::new(raw.f64_opt("u0")?.unwrap_or(1.0), raw.f64_opt("v0")?.unwrap_or(1.0));
        for key in ["u0", "v0"] {
            if raw.f64_opt(key)?.is_some_and(|x| x < 0.0) {
                return Err(raw.invalid(key, "must be non-negative"));
            }
        }
        let eta_override = raw.f64_opt("eta")?;
        if eta_override.is_some_and(|e| e < 0.0) {
            return Err(raw.invalid("eta", "must be non-negative"));
        }
        let simulate = SimulateConfig {
            s0,
            t_end: raw.positive("t_end", 50.0)?,
            dt: raw.positive("dt", DEFAULT_DT)?,
            method,
            eta_override,
        };

        let mut ranges = [None; 7];
        for (slot, name) in ranges.iter_mut().zip(PARAM_NAMES) {
            let key = format!("sweep.{name}");
            if raw.get(&key).is_some() {
                *slot = Some(parse_range(raw, &key)?);
            }
        }
        let sweep = SweepConfig {
            ranges,
            cap: raw.u64_opt("sweep.cap")?.unwrap_or(DEFAULT_SWEEP_CAP),
            parallel: raw.bool_opt("sweep.parallel")?.unwrap_or(true),
        };

        let suites = match raw.get("verify.suites") {
            None => SUITES.to_vec(),
            Some(e) => {
                let mut out = Vec::new();
                for name in e.value.split(',').map(str::trim) {
                    match SUITES.iter().find(|s| **s == name) {
                        Some(s) => out.push(*s),
                        None => return Err(raw.invalid("verify.suites", format!("unknown suite `{name}`"))),
                    }
                }
                out
            }
        };
        let verify = VerifyConfig {
            suites,
            samples: raw.count("verify.samples", 200)?,
            pairs: raw.count("verify.pairs", 200)?,
            perturbations: raw.count("verify.perturbations", 50)?,
            algebra_samples: raw.count("verify.algebra_samples", 10_000)?,
            t_end: raw.positive("verify.t_end", 50.0)?,
            gap_t_end: raw.positive("verify.gap_t_end", 1.0)?,
            decay_t_end: raw.positive("verify.decay_t_end", 20.0)?,
            kappa: match raw.f64_opt("verify.kappa")? {
                Some(k) if k <= 0.0 => return Err(raw.invalid("verify.kappa", "must be positive")),
                k => k,
            },
        };

        let tolerance = match raw.f64_opt("tolerance")? {
            None => DEFAULT_DEGENERACY_TOLERANCE,
            Some(t) if t >= 0.0 => t,
            Some(_) => return Err(raw.invalid("tolerance", "must be non-negative")),
        };

        Ok(RunConfig {
            base,
            seed: raw.u64_opt("seed")?.unwrap_or(0),
            hash: raw.hash(),
            tolerance,
            simulate,
            steps: raw.count("steps", 100)?,
            sweep,
            verify,
        })
    }

    /// The full parameter set; every key must be present.
    pub fn params(&self) -> Result<ModelParams, ConfigError> {
        let mut values = [0.0; 7];
        for ((v, b), name) in values.iter_mut().zip(self.base).zip(PARAM_NAMES) {
            *v = b.ok_or_else(|| ConfigError::Missing { key: name.to_string() })?;
        }
        ModelParams::from_array(values).map_err(|e| ConfigError::Params(e.to_string()))
    }
}

fn parse_range(raw: &RawConfig, key: &str) -> Result<Range, ConfigError> {
    let text = &raw.get(key).expect("present").value;
    let parts: Vec<&str> = text.split(':').map(str::trim).collect();
    let [start, stop, count] = parts[..] else {
        return Err(raw.invalid(key, "expected `start:stop:count`"));
    };
    let number = |s: &str| -> Result<f64, ConfigError> {
        match s.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => Err(raw.invalid(key, format!("`{s}` is not a finite decimal number"))),
        }
    };
    let (start, stop) = (number(start)?, number(stop)?);
    let count: usize = count.parse().map_err(|_| raw.invalid(key, "count is not a non-negative integer"))?;
    if count == 0 {
        return Err(raw.invalid(key, "empty range"));
    }
    if count == 1 && start != stop {
        return Err(raw.invalid(key, "a single-point range needs start == stop"));
    }
    Ok(Range { start, stop, count })
}

#[cfg(test)]
mod tests {
    use super::*;

    const REFERENCE: &str = "a = 0.5\nnu = 0.33333333333333333\ngamma = 1\ntheta1 = 3\ntheta2 = 2\nL1 = 3\nL2 = 2\n";

    #[test]
    fn parses_reference() {
        let raw = RawConfig::parse(REFERENCE).unwrap();
        let cfg = RunConfig::from_raw(&raw).unwrap();
        let p = cfg.params().unwrap();
        assert_eq!(p.nu, 1.0 / 3.0);
        assert_eq!(cfg.simulate.method, Method::Rk4);
        assert_eq!(cfg.sweep.cap, DEFAULT_SWEEP_CAP);
    }

    #[test]
    fn unknown_key_names_line() {
        let err = RawConfig::parse("a = 1\n\nbeta = 2\n").unwrap_err();
        assert_eq!(err, ConfigError::UnknownKey { origin: Origin::Line(3), key: "beta".into() });
        assert_eq!(err.to_string(), "line 3: unknown key `beta`");
    }

    #[test]
    fn duplicate_and_syntax_errors() {
        assert!(matches!(RawConfig::parse("a=1\na=2"), Err(ConfigError::Duplicate { first: 1, .. })));
        assert!(matches!(RawConfig::parse("a 1"), Err(ConfigError::Syntax { .. })));
        assert!(matches!(RawConfig::parse("a ="), Err(ConfigError::Syntax { .. })));
    }

    #[test]
    fn missing_parameter_is_named() {
        let raw = RawConfig::parse(&REFERENCE.replace("gamma = 1\n", "")).unwrap();
        let err = RunConfig::from_raw(&raw).unwrap().params().unwrap_err();
        assert_eq!(err.to_string(), "missing required key `gamma`");
    }

    #[test]
    fn overrides_win_and_change_hash() {
        let mut raw = RawConfig::parse(REFERENCE).unwrap();
        let before = raw.hash();
        raw.apply_override("gamma=0.5").unwrap();
        assert_ne!(before, raw.hash());
        assert_eq!(RunConfig::from_raw(&raw).unwrap().params().unwrap().gamma, 0.5);
        assert!(matches!(raw.apply_override("zeta=1"), Err(ConfigError::UnknownKey { origin: Origin::Override, .. })));
    }

    #[test]
    fn seed_does_not_change_hash() {
        let mut raw = RawConfig::parse(REFERENCE).unwrap();
        let h = raw.hash();
        raw.set_seed(9);
        assert_eq!(h, raw.hash());
    }

    #[test]
    fn rejects_bad_numbers() {
        for text in ["dt = -0.1", "dt = nan", "t_end = inf", "method = euler", "u0 = -1"] {
            let raw = RawConfig::parse(text).unwrap();
            assert!(matches!(RunConfig::from_raw(&raw), Err(ConfigError::Invalid { .. })), "{text}");
        }
    }

    #[test]
    fn ranges() {
        let raw = RawConfig::parse("sweep.gamma = 0.5:1.5:3\nsweep.a = 1:1:1").unwrap();
        let cfg = RunConfig::from_raw(&raw).unwrap();
        let g = cfg.sweep.ranges[2].unwrap();
        assert_eq!((g.value(0), g.value(1), g.value(2)), (0.5, 1.0, 1.5));
        assert_eq!(cfg.sweep.size(), 3);
        for bad in ["sweep.gamma = 1:2:0", "sweep.gamma = 1:2", "sweep.gamma = 1:2:1", "sweep.gamma = a:2:3"] {
            let raw = RawConfig::parse(bad).unwrap();
            assert!(RunConfig::from_raw(&raw).is_err(), "{bad}");
        }
    }
}
