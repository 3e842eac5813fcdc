use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::experiment::{ExperimentPlan, RunSettings, Scenario};
use crate::learner::LearnerConfig;
use crate::planning::{ActionSet, Solver, DEFAULT_NODE_CAP};
use crate::rules::GroundedAction;

/// Values swept by `experiment`; a missing list falls back to the single
/// top-level value.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    #[serde(rename = "T")]
    pub t: Option<Vec<f64>>,
    pub penalty: Option<Vec<f64>>,
    pub m: Option<Vec<f64>>,
}

/// Contents of a run configuration file. Relative paths are resolved
/// against the directory holding the file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub rules: PathBuf,
    pub environments: Vec<PathBuf>,
    #[serde(rename = "T")]
    pub t: f64,
    pub penalty: f64,
    pub success_reward: f64,
    pub m: f64,
    pub epsilon: f64,
    pub delta_threshold: f64,
    #[serde(rename = "delta_S")]
    pub delta_s: usize,
    pub total_budget: f64,
    pub solver: Solver,
    pub seed: u64,
    pub horizon: usize,
    pub discount: f64,
    pub max_steps: usize,
    pub node_cap: usize,
    /// Grounded actions such as `"pry(p1)"`; all groundings when absent.
    pub actions: Option<Vec<String>>,
    pub output_dir: PathBuf,
    pub sweep: Sweep,
    pub replications: usize,
    /// Defaults to `seed`.
    pub seed_base: Option<u64>,
    pub grid_points: usize,
    pub divergence_repeats: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let l = LearnerConfig::default();
        RunConfig {
            rules: PathBuf::new(),
            environments: Vec::new(),
            t: l.t_test,
            penalty: 0.0,
            success_reward: 1.0,
            m: l.m,
            epsilon: l.epsilon,
            delta_threshold: l.delta_threshold,
            delta_s: l.delta_s,
            total_budget: l.total_budget,
            solver: l.solver,
            seed: l.seed,
            horizon: l.horizon,
            discount: l.discount,
            max_steps: l.max_steps,
            node_cap: DEFAULT_NODE_CAP,
            actions: None,
            output_dir: PathBuf::from("out"),
            sweep: Sweep::default(),
            replications: 1,
            seed_base: None,
            grid_points: 60,
            divergence_repeats: 100,
        }
    }
}

/// Apply `key=value` overrides to a JSON object. Dotted keys address nested
/// objects (`sweep.T=[0,20]`); values are parsed as JSON and fall back to a
/// plain string.
pub fn apply_overrides(doc: &mut Value, overrides: &[String]) -> Result<()> {
    for o in overrides {
        let (key, raw) = o
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override {o:?} is not key=value")))?;
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        let parts: Vec<&str> = key.split('.').collect();
        if parts.iter().any(|p| p.is_empty()) {
            return Err(Error::Config(format!("bad override key {key:?}")));
        }
        let mut node = &mut *doc;
        for p in &parts[..parts.len() - 1] {
            let obj = node
                .as_object_mut()
                .ok_or_else(|| Error::Config(format!("override {key:?}: {p} is not an object")))?;
            node = obj
                .entry(p.to_string())
                .or_insert_with(|| Value::Object(Map::new()));
        }
        node.as_object_mut()
            .ok_or_else(|| Error::Config(format!("override {key:?} does not address an object")))?
            .insert(parts[parts.len() - 1].to_string(), value);
    }
    Ok(())
}

impl RunConfig {
    /// Read `path`, apply `overrides`, and resolve relative paths.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut doc: Value = serde_json::from_str(&text).map_err(|e| Error::Json {
            path: path.to_path_buf(),
            source: e,
        })?;
        if !doc.is_object() {
            return Err(Error::Config(format!("{}: expected a JSON object", path.display())));
        }
        apply_overrides(&mut doc, overrides)?;
        let mut cfg: RunConfig = serde_json::from_value(doc).map_err(|e| Error::Json {
            path: path.to_path_buf(),
            source: e,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.rules = base.join(&cfg.rules);
        for e in &mut cfg.environments {
            *e = base.join(&*e);
        }
        cfg.output_dir = base.join(&cfg.output_dir);
        Ok(cfg)
    }

    pub fn learner(&self) -> LearnerConfig {
        LearnerConfig {
            t_test: self.t,
            delta_threshold: self.delta_threshold,
            epsilon: self.epsilon,
            m: self.m,
            total_budget: self.total_budget,
            delta_s: self.delta_s,
            solver: self.solver,
            seed: self.seed,
            horizon: self.horizon,
            discount: self.discount,
            max_steps: self.max_steps,
            node_cap: self.node_cap,
        }
    }

    pub fn settings(&self) -> RunSettings {
        RunSettings {
            t_test: self.t,
            penalty: self.penalty,
            m: self.m,
        }
    }

    pub fn plan(&self) -> ExperimentPlan {
        ExperimentPlan {
            base: self.learner(),
            success_reward: self.success_reward,
            t_values: self.sweep.t.clone().unwrap_or_else(|| vec![self.t]),
            penalties: self.sweep.penalty.clone().unwrap_or_else(|| vec![self.penalty]),
            m_values: self.sweep.m.clone().unwrap_or_else(|| vec![self.m]),
            replications: self.replications,
            seed_base: self.seed_base.unwrap_or(self.seed),
            grid_points: self.grid_points,
        }
    }

    pub fn action_set(&self) -> Result<ActionSet> {
        match &self.actions {
            None => Ok(ActionSet::Enumerate),
            Some(list) => Ok(ActionSet::Fixed(
                list.iter()
                    .map(|a| a.parse::<GroundedAction>())
                    .collect::<Result<Vec<_>>>()?,
            )),
        }
    }

    pub fn scenario(&self) -> Result<Scenario> {
        if self.rules.as_os_str().is_empty() || self.rules.is_dir() {
            return Err(Error::Config("no rule file given (key \"rules\")".into()));
        }
        if self.environments.len() != 2 {
            return Err(Error::Config(format!(
                "expected exactly two environment files (one target, one test), got {}",
                self.environments.len()
            )));
        }
        Scenario::load(&self.rules, &self.environments, self.action_set()?)
    }
}
