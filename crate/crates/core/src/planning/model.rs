use std::collections::{BTreeMap, VecDeque};

use super::RewardSpec;
use crate::env::EnvKind;
use crate::error::{Error, Result};
use crate::estimation::{m_estimate, ProbVector};
use crate::rules::{apply_outcome, enumerate_actions, triggering_rule, GroundedAction, MenidRule, State};

pub const DEFAULT_NODE_CAP: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub next: State,
    pub prob: f64,
    pub reward: f64,
    /// Outcome index of the rule that produced this transition.
    pub outcome: usize,
}

/// `P(s, a, s')` as explicit successor lists. Pairs absent from the model
/// have probability 0 for every successor.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TransitionModel {
    entries: BTreeMap<State, BTreeMap<GroundedAction, Vec<Transition>>>,
}

impl TransitionModel {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add the successor list of `(state, action)`; probabilities must sum to 1.
    pub fn insert(
        &mut self,
        state: State,
        action: GroundedAction,
        transitions: Vec<Transition>,
    ) -> Result<()> {
        let sum: f64 = transitions.iter().map(|t| t.prob).sum();
        if (sum - 1.0).abs() > 1e-9 || transitions.iter().any(|t| t.prob < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "transitions of {action} sum to {sum}"
            )));
        }
        self.entries.entry(state).or_default().insert(action, transitions);
        Ok(())
    }

    /// Register a state with no actions (terminal or unexpanded).
    pub fn add_state(&mut self, state: State) {
        self.entries.entry(state).or_default();
    }

    pub fn actions(&self, state: &State) -> impl Iterator<Item = (&GroundedAction, &[Transition])> {
        self.entries
            .get(state)
            .into_iter()
            .flat_map(|m| m.iter().map(|(a, t)| (a, t.as_slice())))
    }

    pub fn transitions(&self, state: &State, action: &GroundedAction) -> Option<&[Transition]> {
        self.entries.get(state)?.get(action).map(Vec::as_slice)
    }

    /// Total probability of reaching `next`.
    pub fn probability(&self, state: &State, action: &GroundedAction, next: &State) -> f64 {
        self.transitions(state, action)
            .map(|ts| ts.iter().filter(|t| &t.next == next).map(|t| t.prob).sum())
            .unwrap_or(0.0)
    }

    pub fn states(&self) -> impl Iterator<Item = &State> {
        self.entries.keys()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Multiply every transition reward by `k`.
    pub fn scale_rewards(&mut self, k: f64) {
        for t in self.entries.values_mut().flat_map(|m| m.values_mut()).flatten() {
            t.reward *= k;
        }
    }
}

/// Which grounded actions are candidates in a state.
#[derive(Debug, Clone, PartialEq)]
pub enum ActionSet {
    /// A fixed list; only those with a triggering rule apply.
    Fixed(Vec<GroundedAction>),
    /// Every grounding over the state's constants.
    Enumerate,
}

impl ActionSet {
    pub fn candidates(&self, rules: &[MenidRule], state: &State) -> Result<Vec<GroundedAction>> {
        match self {
            ActionSet::Enumerate => enumerate_actions(rules, state),
            ActionSet::Fixed(list) => {
                let mut out = Vec::new();
                for a in list {
                    if triggering_rule(state, rules, a)?.is_some() {
                        out.push(a.clone());
                    }
                }
                out.sort();
                out.dedup();
                Ok(out)
            }
        }
    }
}

/// The fused target estimate used for planning: the decreasing-m-estimate of
/// the rule's target and test counts, or uniform when neither has data.
pub fn fused_estimate(rule: &MenidRule, m: f64) -> Result<ProbVector> {
    match m_estimate(rule.counts(EnvKind::Target), rule.counts(EnvKind::Test), m) {
        Err(Error::EmptySample) => Ok(ProbVector::uniform(rule.n_outcomes())),
        other => other,
    }
}

/// One-step model from `state`: for each action whose rule triggers, one
/// transition per explicit outcome plus the noise outcome (which leaves the
/// state unchanged), weighted by `estimator(rule)`.
pub fn build_transition_model<F>(
    rules: &[MenidRule],
    state: &State,
    actions: &[GroundedAction],
    reward: &RewardSpec,
    estimator: F,
) -> Result<TransitionModel>
where
    F: Fn(&MenidRule) -> Result<ProbVector>,
{
    let mut model = TransitionModel::new();
    model.add_state(state.clone());
    expand_state(&mut model, rules, state, actions, reward, &estimator)?;
    Ok(model)
}

fn expand_state<F>(
    model: &mut TransitionModel,
    rules: &[MenidRule],
    state: &State,
    actions: &[GroundedAction],
    reward: &RewardSpec,
    estimator: &F,
) -> Result<()>
where
    F: Fn(&MenidRule) -> Result<ProbVector>,
{
    for a in actions {
        let Some(trigger) = triggering_rule(state, rules, a)? else {
            continue;
        };
        let q = estimator(trigger.rule)?;
        if q.len() != trigger.rule.n_outcomes() {
            return Err(Error::LengthMismatch(q.len(), trigger.rule.n_outcomes()));
        }
        let mut ts = Vec::with_capacity(q.len());
        ts.push(Transition {
            next: state.clone(),
            prob: q[0],
            reward: reward.reward(&trigger.rule.id, 0),
            outcome: 0,
        });
        for i in 1..q.len() {
            ts.push(Transition {
                next: apply_outcome(state, trigger.rule, &trigger.binding, i)?,
                prob: q[i],
                reward: reward.reward(&trigger.rule.id, i),
                outcome: i,
            });
        }
        model.insert(state.clone(), a.clone(), ts)?;
    }
    Ok(())
}

/// Breadth-first model over every state reachable from `root` within
/// `horizon` steps. States at depth `horizon` and goal states are left
/// without actions.
pub fn expand_model<F>(
    rules: &[MenidRule],
    root: &State,
    actions: &ActionSet,
    reward: &RewardSpec,
    estimator: F,
    horizon: usize,
    node_cap: usize,
) -> Result<TransitionModel>
where
    F: Fn(&MenidRule) -> Result<ProbVector>,
{
    let mut model = TransitionModel::new();
    let mut queue = VecDeque::from([(root.clone(), 0usize)]);
    model.add_state(root.clone());
    while let Some((s, depth)) = queue.pop_front() {
        if depth >= horizon || reward.is_goal(&s) {
            continue;
        }
        let cands = actions.candidates(rules, &s)?;
        expand_state(&mut model, rules, &s, &cands, reward, &estimator)?;
        let succ: Vec<State> = model
            .actions(&s)
            .flat_map(|(_, ts)| ts.iter().map(|t| t.next.clone()))
            .collect();
        for n in succ {
            if model.entries.contains_key(&n) {
                continue;
            }
            model.add_state(n.clone());
            if model.len() > node_cap {
                return Err(Error::StateSpaceExplosion { cap: node_cap });
            }
            queue.push_back((n, depth + 1));
        }
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::CountVector;
    use crate::rules::parse_rules;

    fn rules() -> Vec<MenidRule> {
        parse_rules(
            r#"[{"rule_id": "r", "action": "pick", "params": ["?x"], "pre": ["on(?x)"],
                 "outcomes": [{"label": "success", "add": ["held(?x)"], "del": ["on(?x)"]}]},
                {"rule_id": "g", "action": "grab", "params": ["?x"], "pre": ["on(?x)"],
                 "outcomes": [{"label": "success", "add": ["held(?x)"], "del": ["on(?x)"]},
                              {"label": "fail"}]}]"#,
        )
        .unwrap()
        .into_rules()
    }

    fn spec(rules: &[MenidRule]) -> RewardSpec {
        RewardSpec::from_rules(rules, 1.0, 0.0, State::new()).unwrap()
    }

    #[test]
    fn one_step_model_is_stochastic() {
        let rs = rules();
        let s: State = "on(a)".parse().unwrap();
        let acts = vec!["pick(a)".parse().unwrap(), "grab(a)".parse().unwrap()];
        let model = build_transition_model(&rs, &s, &acts, &spec(&rs), |r| {
            if r.id == "r" {
                ProbVector::new(vec![0.1, 0.9])
            } else {
                ProbVector::new(vec![0.2, 0.5, 0.3])
            }
        })
        .unwrap();
        for (_, ts) in model.actions(&s) {
            let sum: f64 = ts.iter().map(|t| t.prob).sum();
            assert!((sum - 1.0).abs() < 1e-9);
        }
        let pick: GroundedAction = "pick(a)".parse().unwrap();
        assert_eq!(model.transitions(&s, &pick).unwrap().len(), 2);
        let held: State = "held(a)".parse().unwrap();
        assert!((model.probability(&s, &pick, &held) - 0.9).abs() < 1e-12);
        // grab: noise and the empty-effect failure both lead back to s.
        let grab: GroundedAction = "grab(a)".parse().unwrap();
        assert!((model.probability(&s, &grab, &s) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn inapplicable_action_has_no_entry() {
        let rs = rules();
        let s: State = "elsewhere(a)".parse().unwrap();
        let pick: GroundedAction = "pick(a)".parse().unwrap();
        let model =
            build_transition_model(&rs, &s, std::slice::from_ref(&pick), &spec(&rs), |r| fused_estimate(r, 10.0))
                .unwrap();
        assert!(model.transitions(&s, &pick).is_none());
        assert_eq!(model.probability(&s, &pick, &s), 0.0);
    }

    #[test]
    fn fused_estimate_reduces_to_test_counts() {
        let mut rs = rules();
        rs[0]
            .set_counts(EnvKind::Test, CountVector::new(vec![7, 3]).unwrap())
            .unwrap();
        let q = fused_estimate(&rs[0], 10.0).unwrap();
        assert!((q[0] - 0.7).abs() < 1e-12 && (q[1] - 0.3).abs() < 1e-12);
        assert_eq!(fused_estimate(&rs[1], 10.0).unwrap(), ProbVector::uniform(3));
    }

    #[test]
    fn expansion_respects_horizon_and_cap() {
        let rs = rules();
        let root: State = "on(a) on(b) on(c)".parse().unwrap();
        let sp = spec(&rs);
        let m = expand_model(&rs, &root, &ActionSet::Enumerate, &sp, |r| fused_estimate(r, 1.0), 3, 1000)
            .unwrap();
        // Subsets of {a, b, c} held after <= 3 picks: 8 states.
        assert_eq!(m.len(), 8);
        let e = expand_model(&rs, &root, &ActionSet::Enumerate, &sp, |r| fused_estimate(r, 1.0), 3, 4);
        assert!(matches!(e, Err(Error::StateSpaceExplosion { cap: 4 })));
    }
}
