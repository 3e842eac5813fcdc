use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rules::{MenidRule, State};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutcomeClass {
    Success,
    Failure,
    Neutral,
}

impl OutcomeClass {
    /// Classify an outcome label: `success...` / `succ...`, `fail...`, else neutral.
    pub fn from_label(label: &str) -> Self {
        let l = label.to_ascii_lowercase();
        if l.starts_with("succ") {
            OutcomeClass::Success
        } else if l.starts_with("fail") {
            OutcomeClass::Failure
        } else {
            OutcomeClass::Neutral
        }
    }
}

/// Per-execution reward: `+success_reward` for success outcomes,
/// `-failure_penalty` for failures (including noise), 0 for neutral ones.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardSpec {
    pub success_reward: f64,
    pub failure_penalty: f64,
    /// Class of every outcome of every rule, noise at index 0.
    classes: BTreeMap<String, Vec<OutcomeClass>>,
    pub goal: State,
}

impl RewardSpec {
    /// Label outcomes from their rule-file labels; noise counts as failure.
    pub fn from_rules(
        rules: &[MenidRule],
        success_reward: f64,
        failure_penalty: f64,
        goal: State,
    ) -> Result<Self> {
        if !success_reward.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "success reward must be finite, got {success_reward}"
            )));
        }
        if !(failure_penalty >= 0.0) || !failure_penalty.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "failure penalty must be a non-negative number, got {failure_penalty}"
            )));
        }
        let classes = rules
            .iter()
            .map(|r| {
                let c = r
                    .outcomes
                    .iter()
                    .map(|o| {
                        if o.is_noise {
                            OutcomeClass::Failure
                        } else {
                            OutcomeClass::from_label(&o.label)
                        }
                    })
                    .collect();
                (r.id.clone(), c)
            })
            .collect();
        Ok(RewardSpec {
            success_reward,
            failure_penalty,
            classes,
            goal,
        })
    }

    /// Override the class of one outcome.
    pub fn set_class(&mut self, rule_id: &str, outcome: usize, class: OutcomeClass) -> Result<()> {
        let slot = self
            .classes
            .get_mut(rule_id)
            .and_then(|c| c.get_mut(outcome))
            .ok_or_else(|| {
                Error::InvalidParameter(format!("no outcome {outcome} in rule {rule_id}"))
            })?;
        *slot = class;
        Ok(())
    }

    pub fn class(&self, rule_id: &str, outcome: usize) -> OutcomeClass {
        self.classes
            .get(rule_id)
            .and_then(|c| c.get(outcome).copied())
            .unwrap_or(if outcome == 0 {
                OutcomeClass::Failure
            } else {
                OutcomeClass::Neutral
            })
    }

    pub fn reward(&self, rule_id: &str, outcome: usize) -> f64 {
        match self.class(rule_id, outcome) {
            OutcomeClass::Success => self.success_reward,
            OutcomeClass::Failure => -self.failure_penalty,
            OutcomeClass::Neutral => 0.0,
        }
    }

    /// The same spec with both magnitudes multiplied by `k > 0`.
    pub fn scaled(&self, k: f64) -> Self {
        RewardSpec {
            success_reward: self.success_reward * k,
            failure_penalty: self.failure_penalty * k,
            ..self.clone()
        }
    }

    pub fn is_goal(&self, s: &State) -> bool {
        !self.goal.is_empty() && s.is_superset(&self.goal)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::parse_rules;

    #[test]
    fn rewards_follow_labels() {
        let rs = parse_rules(
            r#"[{"rule_id": "r", "action": "a", "outcomes": [
                {"label": "success"}, {"label": "fail", "add": ["broken"]}, {"label": "slip", "add": ["x"]}]}]"#,
        )
        .unwrap();
        let spec = RewardSpec::from_rules(rs.rules(), 1.0, 5.0, State::new()).unwrap();
        assert_eq!(spec.reward("r", 0), -5.0);
        assert_eq!(spec.reward("r", 1), 1.0);
        assert_eq!(spec.reward("r", 2), -5.0);
        assert_eq!(spec.reward("r", 3), 0.0);
        let mut spec = spec;
        spec.set_class("r", 3, OutcomeClass::Success).unwrap();
        assert_eq!(spec.reward("r", 3), 1.0);
        assert!(spec.set_class("r", 9, OutcomeClass::Success).is_err());
    }

    #[test]
    fn negative_penalty_rejected() {
        assert!(RewardSpec::from_rules(&[], 1.0, -1.0, State::new()).is_err());
        assert!(RewardSpec::from_rules(&[], 1.0, f64::NAN, State::new()).is_err());
    }
}
