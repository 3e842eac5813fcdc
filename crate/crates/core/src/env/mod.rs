//! Environments the learner acts in.
//!
//! [`Environment`] is the contract the learning loop needs: read the state,
//! execute a grounded action, reset. [`SimEnvironment`] implements it with a
//! hidden ground-truth outcome distribution per rule, a per-action latency
//! charged to a simulated clock, and an optional one-time perturbation of the
//! distributions (used to derive an imprecise test environment from a target).

mod spec;

pub use spec::{load_env, parse_env, EnvironmentSpec, NoiseEffect, Perturbation};

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{Dirichlet, ProbVector};
use crate::rng::Stream;
use crate::rules::{apply_outcome, triggering_rule, GroundedAction, MenidRule, RuleSet, State};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnvKind {
    Target,
    Test,
}

impl EnvKind {
    pub fn index(self) -> usize {
        match self {
            EnvKind::Target => 0,
            EnvKind::Test => 1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            EnvKind::Target => "target",
            EnvKind::Test => "test",
        }
    }
}

impl fmt::Display for EnvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Simulated seconds. Only moves forward.
#[derive(Debug, Clone, Copy, Default, PartialEq, PartialOrd)]
pub struct SimClock {
    now: f64,
}

impl SimClock {
    pub fn new() -> Self {
        SimClock::default()
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn advance(&mut self, dt: f64) {
        debug_assert!(dt >= 0.0, "clock cannot move backwards by {dt}");
        self.now += dt.max(0.0);
    }
}

/// One transition observed in an environment.
#[derive(Debug, Clone, PartialEq)]
pub struct Experience {
    pub env_label: EnvKind,
    pub s: State,
    pub action: GroundedAction,
    pub s_next: State,
    /// Seconds charged for the execution.
    pub elapsed: f64,
}

pub trait Environment {
    fn kind(&self) -> EnvKind;

    fn current_state(&self) -> &State;

    /// Execute `action` from the current state.
    fn exec_action(&mut self, action: &GroundedAction) -> Result<Experience>;

    /// Back to the initial state. Time keeps running.
    fn reset(&mut self);

    /// Overwrite the current state, e.g. to mirror another environment.
    fn set_state(&mut self, state: State);

    fn now(&self) -> f64;

    /// Whether the current state satisfies the environment's goal.
    fn is_goal(&self) -> bool;

    /// Seconds one execution of `action_name` takes.
    fn latency(&self, action_name: &str) -> Option<f64>;
}

/// `normalize((1 - magnitude) p + magnitude u)` with `u ~ Dir(1, ..., 1)`.
pub fn perturb_distribution<R: Rng + ?Sized>(
    p: &ProbVector,
    magnitude: f64,
    rng: &mut R,
) -> Result<ProbVector> {
    if !(0.0..=1.0).contains(&magnitude) {
        return Err(Error::InvalidParameter(format!(
            "perturbation magnitude must lie in [0, 1], got {magnitude}"
        )));
    }
    let u = Dirichlet::new(&vec![1.0; p.len()])?.sample(rng);
    if magnitude == 0.0 {
        return Ok(p.clone());
    }
    let mixed: Vec<f64> = p
        .as_slice()
        .iter()
        .zip(u.as_slice())
        .map(|(a, b)| (1.0 - magnitude) * a + magnitude * b)
        .collect();
    ProbVector::from_weights(&mixed)
}

/// Index drawn from a categorical distribution.
pub fn sample_index<R: Rng + ?Sized>(p: &ProbVector, rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let probs = p.as_slice();
    for (i, &pi) in probs.iter().enumerate() {
        acc += pi;
        if u < acc {
            return i;
        }
    }
    // Rounding left u above the cumulative sum: take the last non-zero entry.
    probs.iter().rposition(|&x| x > 0.0).unwrap_or(0)
}

/// A stochastic environment driven by per-rule ground-truth distributions.
#[derive(Debug, Clone)]
pub struct SimEnvironment {
    spec: EnvironmentSpec,
    rules: Vec<MenidRule>,
    distributions: BTreeMap<String, ProbVector>,
    state: State,
    clock: SimClock,
    rng: Stream,
}

impl SimEnvironment {
    /// Validate `spec` against `rules` and build the environment. The
    /// perturbation, if any, is applied here once, from its own seed; `rng`
    /// drives outcome sampling.
    pub fn new(spec: EnvironmentSpec, rules: &RuleSet, rng: Stream) -> Result<Self> {
        spec.validate(rules)?;
        let mut distributions = spec.ground_truth.clone();
        if let Some(p) = &spec.perturbation {
            let mut prng = crate::rng::stream(p.seed, "perturbation");
            for dist in distributions.values_mut() {
                *dist = perturb_distribution(dist, p.magnitude, &mut prng)?;
            }
        }
        Ok(SimEnvironment {
            state: spec.initial_state.clone(),
            spec,
            rules: rules.rules().to_vec(),
            distributions,
            clock: SimClock::new(),
            rng,
        })
    }

    pub fn spec(&self) -> &EnvironmentSpec {
        &self.spec
    }

    /// The outcome distribution actually sampled for `rule_id` (after any
    /// perturbation).
    pub fn distribution(&self, rule_id: &str) -> Option<&ProbVector> {
        self.distributions.get(rule_id)
    }

    pub fn initial_state(&self) -> &State {
        &self.spec.initial_state
    }

    fn noise_successor(&mut self, s: &State) -> State {
        match self.spec.noise {
            NoiseEffect::Unchanged => s.clone(),
            NoiseEffect::Scramble => {
                let mut next = s.clone();
                if !s.is_empty() {
                    let k = self.rng.random_range(0..s.len());
                    let victim = s.iter().nth(k).cloned().expect("index in range");
                    next.remove(&victim);
                }
                next
            }
        }
    }
}

impl Environment for SimEnvironment {
    fn kind(&self) -> EnvKind {
        self.spec.kind
    }

    fn current_state(&self) -> &State {
        &self.state
    }

    fn exec_action(&mut self, action: &GroundedAction) -> Result<Experience> {
        let s = self.state.clone();
        let trigger = triggering_rule(&s, &self.rules, action)?.ok_or_else(|| {
            Error::NoRuleTriggers {
                action: action.to_string(),
            }
        })?;
        let latency = self
            .latency(&action.name)
            .ok_or_else(|| Error::InvalidEnvironment(format!("no latency for {}", action.name)))?;
        let dist = &self.distributions[&trigger.rule.id];
        let outcome = sample_index(dist, &mut self.rng);
        let s_next = if outcome == 0 {
            self.noise_successor(&s)
        } else {
            apply_outcome(&s, trigger.rule, &trigger.binding, outcome)?
        };
        self.clock.advance(latency);
        self.state = s_next.clone();
        Ok(Experience {
            env_label: self.spec.kind,
            s,
            action: action.clone(),
            s_next,
            elapsed: latency,
        })
    }

    fn reset(&mut self) {
        self.state = self.spec.initial_state.clone();
    }

    fn set_state(&mut self, state: State) {
        self.state = state;
    }

    fn now(&self) -> f64 {
        self.clock.now()
    }

    fn is_goal(&self) -> bool {
        !self.spec.goal.is_empty() && self.state.is_superset(&self.spec.goal)
    }

    fn latency(&self, action_name: &str) -> Option<f64> {
        self.spec.latency.get(action_name).copied()
    }
}

#[cfg(test)]
mod tests;
