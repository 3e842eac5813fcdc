//! The interleaved learning-execution loop.
//!
//! Each iteration reads the target state, picks an action from the fused
//! model, and either tests it in the test environment for `T` simulated
//! seconds (when its test-environment estimate is still too uncertain and it
//! was not just tested) or executes it once in the target environment.
//! Every new experience updates the rule counts.

mod history;

pub use history::{ExperienceLog, LogEntry, TracePoint};

use std::collections::{BTreeSet, HashMap};

use crate::env::{EnvKind, Environment, Experience, SimClock};
use crate::error::{Error, Result};
use crate::estimation::{
    delta_bound, empirical_estimate, prior_delta_bound, DeltaBoundParams, MIN_SAMPLE_SIZE,
};
use crate::planning::{
    expand_model, fused_estimate, select_action_thompson, value_iteration, ActionSet, RewardSpec,
    Solver,
};
use crate::rng::{self, Stream};
use crate::rules::{classify_outcome, triggering_rule, GroundedAction, MenidRule, RuleSet};

#[derive(Debug, Clone, PartialEq)]
pub struct LearnerConfig {
    /// Simulated seconds spent testing an action; 0 disables testing.
    pub t_test: f64,
    pub delta_threshold: f64,
    pub epsilon: f64,
    pub m: f64,
    /// Simulated seconds, test and target time combined.
    pub total_budget: f64,
    /// Dirichlet draws per error bound.
    pub delta_s: usize,
    pub solver: Solver,
    pub seed: u64,
    /// Value-iteration lookahead.
    pub horizon: usize,
    pub discount: f64,
    /// Target executions per episode before a forced reset.
    pub max_steps: usize,
    pub node_cap: usize,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            t_test: 20.0,
            delta_threshold: 0.01,
            epsilon: 0.1,
            m: 10.0,
            total_budget: 3600.0,
            delta_s: 10_000,
            solver: Solver::Thompson,
            seed: 0,
            horizon: 5,
            discount: 1.0,
            max_steps: 20,
            node_cap: crate::planning::DEFAULT_NODE_CAP,
        }
    }
}

impl LearnerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.t_test >= 0.0 && self.t_test.is_finite()) {
            return bad(format!("T must be a non-negative number, got {}", self.t_test));
        }
        if !(self.delta_threshold > 0.0 && self.delta_threshold < 1.0) {
            return bad(format!(
                "delta_threshold must lie in (0, 1), got {}",
                self.delta_threshold
            ));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad(format!("epsilon must lie in (0, 1), got {}", self.epsilon));
        }
        if !(self.m > 0.0 && self.m.is_finite()) {
            return bad(format!("m must be positive, got {}", self.m));
        }
        if !(self.total_budget > 0.0 && self.total_budget.is_finite()) {
            return bad(format!("total_budget must be positive, got {}", self.total_budget));
        }
        if self.delta_s < MIN_SAMPLE_SIZE {
            return bad(format!(
                "delta_S must be at least {MIN_SAMPLE_SIZE}, got {}",
                self.delta_s
            ));
        }
        if self.horizon == 0 {
            return bad("horizon must be at least 1".into());
        }
        if !(self.discount > 0.0 && self.discount <= 1.0) {
            return bad(format!("discount must lie in (0, 1], got {}", self.discount));
        }
        if self.max_steps == 0 {
            return bad("max_steps must be at least 1".into());
        }
        Ok(())
    }
}

/// Actions tested in the current or previous iteration and not executed
/// since.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MarkSet {
    marked: BTreeSet<GroundedAction>,
}

impl MarkSet {
    pub fn new() -> Self {
        MarkSet::default()
    }

    pub fn mark(&mut self, a: &GroundedAction) {
        self.marked.insert(a.clone());
    }

    pub fn unmark(&mut self, a: &GroundedAction) {
        self.marked.remove(a);
    }

    pub fn is_marked(&self, a: &GroundedAction) -> bool {
        self.marked.contains(a)
    }

    pub fn len(&self) -> usize {
        self.marked.len()
    }

    pub fn is_empty(&self) -> bool {
        self.marked.is_empty()
    }
}

/// Test-environment error bound of `rule`: `delta_bound` over its test counts,
/// or the all-ones prior bound when it has none.
pub fn test_delta(rule: &MenidRule, cfg: &LearnerConfig, seed: u64) -> Result<f64> {
    let params = DeltaBoundParams::new(cfg.epsilon, cfg.delta_s, seed)?;
    let counts = rule.counts(EnvKind::Test);
    if counts.total() == 0 {
        prior_delta_bound(rule.n_outcomes(), &params)
    } else {
        delta_bound(counts, &params)
    }
}

/// Whether `action` (resolved to `rule` in the current state) should be
/// tested: it is unmarked, testing is enabled and the rule's test-environment
/// error bound exceeds the threshold.
pub fn should_test(
    rule: &MenidRule,
    action: &GroundedAction,
    marks: &MarkSet,
    cfg: &LearnerConfig,
    seed: u64,
) -> Result<bool> {
    if cfg.t_test <= 0.0 || marks.is_marked(action) {
        return Ok(false);
    }
    Ok(test_delta(rule, cfg, seed)? > cfg.delta_threshold)
}

/// Execute `action` in the test environment from `state` until at least `t`
/// seconds have been charged, re-placing the environment in `state` before
/// every execution. Marks the action unless `t` is 0.
pub fn test_phase(
    env_test: &mut dyn Environment,
    state: &crate::rules::State,
    action: &GroundedAction,
    t: f64,
    marks: &mut MarkSet,
) -> Result<Vec<Experience>> {
    let mut out = Vec::new();
    if t <= 0.0 {
        return Ok(out);
    }
    marks.mark(action);
    let mut left = t;
    while left > 0.0 {
        env_test.set_state(state.clone());
        let e = env_test.exec_action(action)?;
        left -= e.elapsed;
        out.push(e);
    }
    Ok(out)
}

/// Unmark `action` and execute it once in the target environment.
pub fn execute_phase(
    env_target: &mut dyn Environment,
    action: &GroundedAction,
    marks: &mut MarkSet,
) -> Result<Experience> {
    marks.unmark(action);
    env_target.exec_action(action)
}

/// Rule index and outcome index an experience was filed under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classified {
    pub rule: usize,
    pub outcome: usize,
}

/// Count every experience against the rule that triggers for it and refresh
/// the probability estimates of the touched rules: the fused m-estimate for
/// the target environment, the plain frequency estimate for the test one.
pub fn update_rules(
    rules: &mut [MenidRule],
    experiences: &[Experience],
    m: f64,
) -> Result<Vec<Classified>> {
    let mut out = Vec::with_capacity(experiences.len());
    for e in experiences {
        let trigger = triggering_rule(&e.s, rules, &e.action)?.ok_or_else(|| {
            Error::NoRuleTriggers {
                action: e.action.to_string(),
            }
        })?;
        let outcome = classify_outcome(trigger.rule, &trigger.binding, &e.s, &e.s_next);
        out.push(Classified {
            rule: trigger.index,
            outcome,
        });
    }
    let mut touched = BTreeSet::new();
    for (c, e) in out.iter().zip(experiences) {
        rules[c.rule].record(e.env_label, c.outcome);
        touched.insert(c.rule);
    }
    for i in touched {
        let fused = fused_estimate(&rules[i], m)?;
        rules[i].set_probs(EnvKind::Target, Some(fused))?;
        let test = match empirical_estimate(rules[i].counts(EnvKind::Test)) {
            Ok(p) => Some(p),
            Err(Error::EmptySample) => None,
            Err(e) => return Err(e),
        };
        rules[i].set_probs(EnvKind::Test, test)?;
    }
    Ok(out)
}

/// State of one learning run.
pub struct Learner {
    cfg: LearnerConfig,
    rules: Vec<MenidRule>,
    reward: RewardSpec,
    actions: ActionSet,
    marks: MarkSet,
    log: ExperienceLog,
    clock: SimClock,
    solver_rng: Stream,
    delta_cache: HashMap<(usize, Vec<u64>), f64>,
    episode_steps: usize,
}

impl Learner {
    pub fn new(cfg: LearnerConfig, rules: &RuleSet, reward: RewardSpec, actions: ActionSet) -> Result<Self> {
        cfg.validate()?;
        Ok(Learner {
            solver_rng: rng::stream(cfg.seed, rng::SOLVER),
            cfg,
            rules: rules.rules().to_vec(),
            reward,
            actions,
            marks: MarkSet::new(),
            log: ExperienceLog::new(),
            clock: SimClock::new(),
            delta_cache: HashMap::new(),
            episode_steps: 0,
        })
    }

    pub fn rules(&self) -> &[MenidRule] {
        &self.rules
    }

    pub fn marks(&self) -> &MarkSet {
        &self.marks
    }

    pub fn log(&self) -> &ExperienceLog {
        &self.log
    }

    pub fn into_log(self) -> ExperienceLog {
        self.log
    }

    pub fn now(&self) -> f64 {
        self.clock.now()
    }

    fn select(&mut self, state: &crate::rules::State, cands: &[GroundedAction]) -> Result<GroundedAction> {
        match self.cfg.solver {
            Solver::Thompson => select_action_thompson(
                &self.rules,
                state,
                cands,
                &self.reward,
                self.cfg.m,
                &mut self.solver_rng,
            ),
            Solver::ValueIteration => {
                let m = self.cfg.m;
                let model = expand_model(
                    &self.rules,
                    state,
                    &self.actions,
                    &self.reward,
                    |r| fused_estimate(r, m),
                    self.cfg.horizon,
                    self.cfg.node_cap,
                )?;
                let values = value_iteration(&model, self.cfg.horizon, self.cfg.discount)?;
                values
                    .get(state)
                    .and_then(|v| v.action.clone())
                    .ok_or(Error::NoApplicableAction)
            }
        }
    }

    fn delta_for(&mut self, rule: usize) -> Result<f64> {
        let key = (rule, self.rules[rule].counts(EnvKind::Test).as_slice().to_vec());
        if let Some(&d) = self.delta_cache.get(&key) {
            return Ok(d);
        }
        let seed = rng::derive_seed(self.cfg.seed, rng::DELTA, rule as u64);
        let d = test_delta(&self.rules[rule], &self.cfg, seed)?;
        self.delta_cache.insert(key, d);
        Ok(d)
    }

    fn record(&mut self, experiences: Vec<Experience>) -> Result<()> {
        let classified = update_rules(&mut self.rules, &experiences, self.cfg.m)?;
        for (e, c) in experiences.into_iter().zip(classified) {
            self.clock.advance(e.elapsed);
            let rule_id = self.rules[c.rule].id.clone();
            let reward = match e.env_label {
                EnvKind::Target => self.reward.reward(&rule_id, c.outcome),
                EnvKind::Test => 0.0,
            };
            self.log.push(self.clock.now(), e, rule_id, c.outcome, reward);
        }
        Ok(())
    }

    /// One iteration of the loop. Returns `false` once the budget is spent.
    pub fn step(&mut self, target: &mut dyn Environment, test: &mut dyn Environment) -> Result<bool> {
        if self.clock.now() >= self.cfg.total_budget {
            return Ok(false);
        }
        let state = target.current_state().clone();
        let cands = self.actions.candidates(&self.rules, &state)?;
        if cands.is_empty() {
            log::debug!("no applicable action in {state} at t={}; episode failed", self.clock.now());
            self.log.penalize(self.clock.now(), -self.reward.failure_penalty);
            target.reset();
            self.episode_steps = 0;
            return Ok(true);
        }
        let action = self.select(&state, &cands)?;
        let rule = triggering_rule(&state, &self.rules, &action)?
            .ok_or_else(|| Error::NoRuleTriggers {
                action: action.to_string(),
            })?
            .index;
        let test_now = self.cfg.t_test > 0.0
            && !self.marks.is_marked(&action)
            && self.delta_for(rule)? > self.cfg.delta_threshold;
        if test_now {
            let es = test_phase(test, &state, &action, self.cfg.t_test, &mut self.marks)?;
            self.record(es)?;
            return Ok(true);
        }
        let latency = target.latency(&action.name).ok_or_else(|| {
            Error::InvalidEnvironment(format!("no latency for action {}", action.name))
        })?;
        if self.clock.now() + latency > self.cfg.total_budget {
            return Ok(false);
        }
        let e = execute_phase(target, &action, &mut self.marks)?;
        self.record(vec![e])?;
        self.episode_steps += 1;
        if target.is_goal() || self.episode_steps >= self.cfg.max_steps {
            target.reset();
            self.episode_steps = 0;
        }
        Ok(true)
    }

    /// Iterate until the budget is spent.
    pub fn run(&mut self, target: &mut dyn Environment, test: &mut dyn Environment) -> Result<()> {
        let initial = target.current_state().clone();
        if self.actions.candidates(&self.rules, &initial)?.is_empty() {
            return Err(Error::Config(format!(
                "no action applies in the initial target state {initial}"
            )));
        }
        while self.step(target, test)? {}
        Ok(())
    }
}

/// Run the loop from a fresh rule set and return the experience log.
pub fn run(
    cfg: &LearnerConfig,
    env_target: &mut dyn Environment,
    env_test: &mut dyn Environment,
    rules: &RuleSet,
    reward: &RewardSpec,
    actions: &ActionSet,
) -> Result<ExperienceLog> {
    if env_target.kind() != EnvKind::Target || env_test.kind() != EnvKind::Test {
        return Err(Error::Config(
            "run needs one target and one test environment, in that order".into(),
        ));
    }
    let mut learner = Learner::new(cfg.clone(), rules, reward.clone(), actions.clone())?;
    learner.run(env_target, env_test)?;
    Ok(learner.into_log())
}
