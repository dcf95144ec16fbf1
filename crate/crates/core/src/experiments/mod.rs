//! Named experiments with versioned presets and machine-readable reports.
//!
//! Every experiment takes its parameters from a preset JSON file (shipped in
//! `presets/`), optionally overlaid by user JSON, and returns a [`Report`]
//! plus CSV series. Reports carry no wall-clock data, so they are
//! reproducible byte for byte for a fixed config, seed and thread count.

mod data;
mod free;
mod invariance;
mod orbital;
mod partial;
mod repulsive;
mod schema;
mod tau_asymptotics;
mod tensorization;

use std::fmt;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::canonical_hash;
use crate::error::{Error, Result};

pub use data::mixture_1d;
pub use schema::{report_schema_validate, validate_report_file, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentName {
    FreeUniversality,
    OrbitalStability,
    PartialConfinement,
    RepulsiveRate,
    RepulsiveNonuniversality,
    Tensorization,
    InvarianceSuite,
    TauAsymptotics,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 8] = [
        ExperimentName::FreeUniversality,
        ExperimentName::OrbitalStability,
        ExperimentName::PartialConfinement,
        ExperimentName::RepulsiveRate,
        ExperimentName::RepulsiveNonuniversality,
        ExperimentName::Tensorization,
        ExperimentName::InvarianceSuite,
        ExperimentName::TauAsymptotics,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentName::FreeUniversality => "free-universality",
            ExperimentName::OrbitalStability => "orbital-stability",
            ExperimentName::PartialConfinement => "partial-confinement",
            ExperimentName::RepulsiveRate => "repulsive-rate",
            ExperimentName::RepulsiveNonuniversality => "repulsive-nonuniversality",
            ExperimentName::Tensorization => "tensorization",
            ExperimentName::InvarianceSuite => "invariance-suite",
            ExperimentName::TauAsymptotics => "tau-asymptotics",
        }
    }

    /// The shipped preset.
    pub fn preset(self) -> &'static str {
        match self {
            ExperimentName::FreeUniversality => include_str!("../../presets/free-universality.json"),
            ExperimentName::OrbitalStability => include_str!("../../presets/orbital-stability.json"),
            ExperimentName::PartialConfinement => include_str!("../../presets/partial-confinement.json"),
            ExperimentName::RepulsiveRate => include_str!("../../presets/repulsive-rate.json"),
            ExperimentName::RepulsiveNonuniversality => {
                include_str!("../../presets/repulsive-nonuniversality.json")
            }
            ExperimentName::Tensorization => include_str!("../../presets/tensorization.json"),
            ExperimentName::InvarianceSuite => include_str!("../../presets/invariance-suite.json"),
            ExperimentName::TauAsymptotics => include_str!("../../presets/tau-asymptotics.json"),
        }
    }
}

impl fmt::Display for ExperimentName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = ExperimentName::ALL.iter().map(|n| n.as_str()).collect();
                Error::invalid(format!("unknown experiment `{s}`; expected one of {}", names.join(", ")))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparison {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
}

/// One acceptance check with the threshold it was judged against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// `None` when the computed value is not finite.
    pub value: Option<f64>,
    pub threshold: f64,
    pub comparison: Comparison,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, comparison: Comparison, threshold: f64) -> Self {
        let pass = value.is_finite()
            && match comparison {
                Comparison::Le => value <= threshold,
                Comparison::Ge => value >= threshold,
            };
        Check {
            name: name.into(),
            value: value.is_finite().then_some(value),
            threshold,
            comparison,
            pass,
        }
    }

    pub fn le(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self::new(name, value, Comparison::Le, threshold)
    }

    pub fn ge(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self::new(name, value, Comparison::Ge, threshold)
    }
}

/// A CSV time series produced by an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub csv: String,
}

impl Series {
    pub fn from_rows(name: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<Self> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.write_record(r.iter().map(|v| v.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
        Ok(Series {
            name: name.to_string(),
            csv: String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))?,
        })
    }
}

/// What an experiment body returns.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub results: Value,
    pub series: Vec<Series>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub experiment: ExperimentName,
    /// sha256 of the canonical `{experiment, config, seed}` JSON.
    pub hash: String,
    pub seed: u64,
    pub threads: usize,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub meta: Meta,
    pub config: Value,
    pub checks: Vec<Check>,
    pub results: Value,
    pub pass: bool,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).unwrap_or_default();
        s.push('\n');
        s
    }

    pub fn failed(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub report: Report,
    pub series: Vec<Series>,
}

/// Recursively overlay `top` onto `base`; objects merge, everything else
/// is replaced.
pub fn merge_json(base: &mut Value, top: &Value) {
    match (base, top) {
        (Value::Object(b), Value::Object(t)) => {
            for (k, v) in t {
                match b.get_mut(k) {
                    Some(slot) => merge_json(slot, v),
                    None => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (slot, v) => *slot = v.clone(),
    }
}

/// The preset for `name` with `overrides` merged in.
pub fn effective_config(name: ExperimentName, overrides: Option<&Value>) -> Result<Value> {
    let mut cfg: Value = serde_json::from_str(name.preset())?;
    if let Some(o) = overrides {
        if !o.is_object() {
            return Err(Error::Config(vec!["experiment overrides must be a JSON object".into()]));
        }
        merge_json(&mut cfg, o);
    }
    Ok(cfg)
}

fn params<P: DeserializeOwned>(cfg: &Value) -> Result<P> {
    serde_json::from_value(cfg.clone()).map_err(|e| Error::Config(vec![e.to_string()]))
}

/// Run experiment `name` with its preset overlaid by `overrides`.
pub fn run_experiment(name: ExperimentName, overrides: Option<&Value>, seed: u64) -> Result<ExperimentOutput> {
    let cfg = effective_config(name, overrides)?;
    let outcome = match name {
        ExperimentName::FreeUniversality => free::run(&params(&cfg)?, seed)?,
        ExperimentName::OrbitalStability => orbital::run(&params(&cfg)?, seed)?,
        ExperimentName::PartialConfinement => partial::run(&params(&cfg)?, seed)?,
        ExperimentName::RepulsiveRate => repulsive::run_rate(&params(&cfg)?)?,
        ExperimentName::RepulsiveNonuniversality => repulsive::run_nonuniversality(&params(&cfg)?)?,
        ExperimentName::Tensorization => tensorization::run(&params(&cfg)?, seed)?,
        ExperimentName::InvarianceSuite => invariance::run(&params(&cfg)?, seed)?,
        ExperimentName::TauAsymptotics => tau_asymptotics::run(&params(&cfg)?)?,
    };
    let hash = canonical_hash(&serde_json::json!({
        "experiment": name.as_str(),
        "config": cfg,
        "seed": seed,
    }));
    let pass = !outcome.checks.is_empty() && outcome.checks.iter().all(|c| c.pass);
    let report = Report {
        meta: Meta {
            experiment: name,
            hash,
            seed,
            threads: rayon::current_num_threads(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
        config: cfg,
        checks: outcome.checks,
        results: outcome.results,
        pass,
    };
    Ok(ExperimentOutput {
        report,
        series: outcome.series,
    })
}

/// Least-squares slope of `y` against `x`.
pub(crate) fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    if x.len() < 2 {
        return 0.0;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for n in ExperimentName::ALL {
            assert_eq!(n.as_str().parse::<ExperimentName>().unwrap(), n);
            assert_eq!(serde_json::to_value(n).unwrap(), Value::String(n.as_str().into()));
            let preset: Value = serde_json::from_str(n.preset()).unwrap();
            assert!(preset.is_object(), "{n}");
        }
        assert!("nope".parse::<ExperimentName>().is_err());
    }

    #[test]
    fn checks_judge_and_hide_nan() {
        assert!(Check::le("a", 1.0, 1.0).pass);
        assert!(!Check::le("a", 1.1, 1.0).pass);
        assert!(Check::ge("a", 1.0, 0.5).pass);
        let c = Check::le("a", f64::NAN, 1.0);
        assert!(!c.pass && c.value.is_none());
    }

    #[test]
    fn merge_overlays_nested_keys() {
        let mut a = serde_json::json!({"x": 1, "y": {"p": 1, "q": 2}});
        merge_json(&mut a, &serde_json::json!({"y": {"q": 3}, "z": [1]}));
        assert_eq!(a, serde_json::json!({"x": 1, "y": {"p": 1, "q": 3}, "z": [1]}));
    }

    #[test]
    fn unknown_parameter_is_a_config_error() {
        let o = serde_json::json!({"no_such_key": 1});
        assert!(matches!(
            run_experiment(ExperimentName::TauAsymptotics, Some(&o), 0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn slope_of_line() {
        assert!((slope(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]) - 2.0).abs() < 1e-15);
    }
}
