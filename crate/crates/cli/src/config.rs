use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::collections::BTreeMap;
use std::path::PathBuf;
use sticky_lab::catalog::{by_name, make_family, FamilySpec};
use sticky_lab::funcspace::{ResolutionSchedule, SequenceFamily};

pub const COMMANDS: [&str; 11] = [
    "analyze",
    "catalog",
    "lemma",
    "banach-steinhaus",
    "poisson",
    "dirichlet",
    "functional",
    "cluster",
    "compactness",
    "ls-norm",
    "suite",
];

/// One experiment: what the command-line flags build, and what `--config` files hold.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: String,
    /// Built-in family name, or a path to a `{"kind", "params"}` JSON file.
    pub family: Option<String>,
    pub input: Option<PathBuf>,
    /// Command-specific scalar and list parameters.
    pub params: BTreeMap<String, Value>,
    /// `"default"` or `"coarse"`.
    pub schedule: Option<String>,
    /// Field overrides applied on top of `schedule`.
    pub schedule_overrides: Map<String, Value>,
    pub out: Option<PathBuf>,
    pub csv_dir: Option<PathBuf>,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn new(command: &str) -> Self {
        ExperimentConfig {
            command: command.into(),
            ..Default::default()
        }
    }

    pub fn param(mut self, key: &str, v: impl Into<Value>) -> Self {
        self.params.insert(key.into(), v.into());
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !COMMANDS.contains(&self.command.as_str()) {
            bail!(
                "unknown command {:?}; valid commands: {}",
                self.command,
                COMMANDS.join(", ")
            );
        }
        self.resolution()?;
        Ok(())
    }

    pub fn resolution(&self) -> Result<ResolutionSchedule> {
        let base = match self.schedule.as_deref() {
            None | Some("default") => ResolutionSchedule::default(),
            Some("coarse") => ResolutionSchedule::coarse(),
            Some(s) => bail!("unknown schedule {s:?}; valid: default, coarse"),
        };
        let mut v = serde_json::to_value(&base)?;
        let obj = v.as_object_mut().expect("schedule is an object");
        for (k, x) in &self.schedule_overrides {
            if !obj.contains_key(k) {
                bail!(
                    "unknown schedule field {k:?}; valid: {}",
                    obj.keys().cloned().collect::<Vec<_>>().join(", ")
                );
            }
            obj.insert(k.clone(), x.clone());
        }
        let s: ResolutionSchedule = serde_json::from_value(v).context("schedule overrides")?;
        s.validate()?;
        Ok(s)
    }

    pub fn family(&self) -> Result<SequenceFamily> {
        let name = self
            .family
            .as_deref()
            .ok_or_else(|| anyhow!("{} needs --family", self.command))?;
        if name.ends_with(".json") {
            let text = std::fs::read_to_string(name).with_context(|| format!("reading {name}"))?;
            let spec: FamilySpec =
                serde_json::from_str(&text).with_context(|| format!("parsing {name}"))?;
            return Ok(make_family(&spec)?);
        }
        by_name(name).map_err(|e| {
            let names: Vec<String> = sticky_lab::catalog::catalog_list()
                .into_iter()
                .map(|c| c.0)
                .collect();
            anyhow!("{e}; valid families: {}", names.join(", "))
        })
    }

    fn raw(&self, key: &str) -> Option<&Value> {
        self.params.get(key).filter(|v| !v.is_null())
    }

    pub fn f64_or(&self, key: &str, d: f64) -> Result<f64> {
        match self.raw(key) {
            None => Ok(d),
            Some(v) => v
                .as_f64()
                .ok_or_else(|| anyhow!("parameter {key} must be a number, got {v}")),
        }
    }

    pub fn usize_or(&self, key: &str, d: usize) -> Result<usize> {
        match self.raw(key) {
            None => Ok(d),
            Some(v) => v
                .as_u64()
                .map(|x| x as usize)
                .ok_or_else(|| anyhow!("parameter {key} must be a natural number, got {v}")),
        }
    }

    pub fn str_or<'a>(&'a self, key: &str, d: &'a str) -> Result<&'a str> {
        match self.raw(key) {
            None => Ok(d),
            Some(v) => v
                .as_str()
                .ok_or_else(|| anyhow!("parameter {key} must be a string, got {v}")),
        }
    }

    pub fn f64_list_or(&self, key: &str, d: &[f64]) -> Result<Vec<f64>> {
        match self.raw(key) {
            None => Ok(d.to_vec()),
            Some(Value::Array(a)) => a
                .iter()
                .map(|x| {
                    x.as_f64()
                        .ok_or_else(|| anyhow!("{key} entries must be numbers"))
                })
                .collect(),
            Some(v) => bail!("parameter {key} must be a list of numbers, got {v}"),
        }
    }

    pub fn usize_list_or(&self, key: &str, d: &[usize]) -> Result<Vec<usize>> {
        match self.raw(key) {
            None => Ok(d.to_vec()),
            Some(Value::Array(a)) => a
                .iter()
                .map(|x| {
                    x.as_u64()
                        .map(|u| u as usize)
                        .ok_or_else(|| anyhow!("{key} entries must be naturals"))
                })
                .collect(),
            Some(v) => bail!("parameter {key} must be a list of naturals, got {v}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_apply_and_validate() {
        let mut c = ExperimentConfig::new("analyze");
        c.schedule = Some("coarse".into());
        c.schedule_overrides.insert("n_max".into(), 2048.into());
        assert_eq!(c.resolution().unwrap().n_max, 2048);
        c.schedule_overrides.insert("n_max".into(), 1.into());
        assert!(c.resolution().is_err());
        c.schedule_overrides.clear();
        c.schedule_overrides.insert("nmax".into(), 4.into());
        assert!(c
            .resolution()
            .unwrap_err()
            .to_string()
            .contains("unknown schedule field"));
    }

    #[test]
    fn config_round_trips_and_rejects_unknown_keys() {
        let c = ExperimentConfig::new("lemma").param("k", 4).param("n", 8);
        let back: ExperimentConfig =
            serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
        assert!(
            serde_json::from_str::<ExperimentConfig>(r#"{"command": "lemma", "kk": 1}"#).is_err()
        );
        assert!(ExperimentConfig::new("plot").validate().is_err());
    }
}
