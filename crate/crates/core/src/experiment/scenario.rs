use std::path::Path;

use crate::env::{load_env, EnvKind, EnvironmentSpec, SimEnvironment};
use crate::error::{Error, Result};
use crate::planning::{ActionSet, RewardSpec};
use crate::rng;
use crate::rules::{load_rules, RuleSet};

/// A rule set with one target and one test environment over it.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub rules: RuleSet,
    pub target: EnvironmentSpec,
    pub test: EnvironmentSpec,
    pub actions: ActionSet,
}

impl Scenario {
    /// Validates both environments against the rules. `envs` must hold
    /// exactly one environment of each kind, in any order.
    pub fn new(rules: RuleSet, envs: Vec<EnvironmentSpec>, actions: ActionSet) -> Result<Self> {
        let mut target = None;
        let mut test = None;
        for e in envs {
            e.validate(&rules)?;
            let slot = match e.kind {
                EnvKind::Target => &mut target,
                EnvKind::Test => &mut test,
            };
            if slot.is_some() {
                return Err(Error::Config(format!("more than one {} environment", e.kind)));
            }
            *slot = Some(e);
        }
        let (Some(target), Some(test)) = (target, test) else {
            return Err(Error::Config(
                "exactly one target and one test environment are required".into(),
            ));
        };
        if target.initial_state != test.initial_state {
            log::warn!(
                "target and test environments start in different states ({} vs {})",
                target.env_id,
                test.env_id
            );
        }
        Ok(Scenario {
            rules,
            target,
            test,
            actions,
        })
    }

    pub fn load<P: AsRef<Path>, Q: AsRef<Path>>(rules: P, envs: &[Q], actions: ActionSet) -> Result<Self> {
        let rules = load_rules(rules)?;
        let envs = envs.iter().map(load_env).collect::<Result<Vec<_>>>()?;
        Scenario::new(rules, envs, actions)
    }

    /// Fresh target and test environments whose outcome draws come from the
    /// `env-target` and `env-test` streams of `seed`.
    pub fn environments(&self, seed: u64) -> Result<(SimEnvironment, SimEnvironment)> {
        Ok((
            SimEnvironment::new(self.target.clone(), &self.rules, rng::stream(seed, rng::ENV_TARGET))?,
            SimEnvironment::new(self.test.clone(), &self.rules, rng::stream(seed, rng::ENV_TEST))?,
        ))
    }

    /// Reward spec from the rule labels, with the target environment's goal.
    pub fn reward(&self, success_reward: f64, failure_penalty: f64) -> Result<RewardSpec> {
        RewardSpec::from_rules(
            self.rules.rules(),
            success_reward,
            failure_penalty,
            self.target.goal.clone(),
        )
    }
}
