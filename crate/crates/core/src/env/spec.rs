use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::EnvKind;
use crate::error::{Error, Result};
use crate::estimation::ProbVector;
use crate::rules::{RuleSet, State};

/// What the noise outcome does to the state.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseEffect {
    #[default]
    Unchanged,
    /// Delete one uniformly chosen atom.
    Scramble,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Perturbation {
    pub magnitude: f64,
    pub seed: u64,
}

/// Contents of an environment file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentSpec {
    pub env_id: String,
    pub kind: EnvKind,
    pub initial_state: State,
    /// Seconds per execution, by action name.
    pub latency: BTreeMap<String, f64>,
    /// True outcome distribution per rule id, noise first.
    pub ground_truth: BTreeMap<String, ProbVector>,
    #[serde(default)]
    pub perturbation: Option<Perturbation>,
    #[serde(default)]
    pub goal: State,
    #[serde(default)]
    pub noise: NoiseEffect,
}

impl EnvironmentSpec {
    pub fn validate(&self, rules: &RuleSet) -> Result<()> {
        let bad = |m: String| Error::InvalidEnvironment(format!("{}: {m}", self.env_id));
        for r in rules.rules() {
            let p = self
                .ground_truth
                .get(&r.id)
                .ok_or_else(|| bad(format!("no ground truth for rule {}", r.id)))?;
            if p.len() != r.n_outcomes() {
                return Err(bad(format!(
                    "ground truth of rule {} has {} entries, the rule has {} outcomes (noise first)",
                    r.id,
                    p.len(),
                    r.n_outcomes()
                )));
            }
        }
        if let Some(id) = self.ground_truth.keys().find(|id| rules.get(id).is_none()) {
            return Err(bad(format!("ground truth for unknown rule {id}")));
        }
        for a in rules.action_names() {
            match self.latency.get(a) {
                Some(&l) if l > 0.0 && l.is_finite() => {}
                Some(&l) => return Err(bad(format!("latency of {a} must be positive, got {l}"))),
                None => return Err(bad(format!("no latency for action {a}"))),
            }
        }
        if let Some(p) = &self.perturbation {
            if !(0.0..=1.0).contains(&p.magnitude) {
                return Err(bad(format!(
                    "perturbation magnitude {} outside [0, 1]",
                    p.magnitude
                )));
            }
        }
        rules.check_state_arity(self.initial_state.iter(), &self.env_id)?;
        rules.check_state_arity(self.goal.iter(), &self.env_id)?;
        Ok(())
    }
}

pub fn parse_env(json: &str) -> Result<EnvironmentSpec> {
    serde_json::from_str(json).map_err(|e| Error::Json {
        path: "<environment>".into(),
        source: e,
    })
}

pub fn load_env(path: impl AsRef<Path>) -> Result<EnvironmentSpec> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        source: e,
    })
}
