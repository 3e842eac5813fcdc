//! Multi-environment noisy indeterministic deictic rules: an action schema
//! with a positive precondition, a list of explicit outcomes plus a catch-all
//! noise outcome, and one outcome count vector per environment.

mod file;
mod syntax;

pub use file::{load_rules, parse_rules, RuleSet};
pub use syntax::{parse_predicates, Atom, Binding, Predicate, State, Term};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::env::EnvKind;
use crate::error::{Error, Result};
use crate::estimation::{CountVector, ProbVector};

/// One possible effect of a rule. Index 0 of every rule is the noise outcome,
/// which has no add/delete lists and stands for "anything unexplained".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub label: String,
    pub add: Vec<Predicate>,
    pub del: Vec<Predicate>,
    pub is_noise: bool,
}

impl Outcome {
    pub fn noise() -> Self {
        Outcome {
            label: "noise".to_string(),
            add: Vec::new(),
            del: Vec::new(),
            is_noise: true,
        }
    }

    pub fn new(label: impl Into<String>, add: Vec<Predicate>, del: Vec<Predicate>) -> Self {
        Outcome {
            label: label.into(),
            add,
            del,
            is_noise: false,
        }
    }

    fn effect_key(&self) -> (BTreeSet<&Predicate>, BTreeSet<&Predicate>) {
        (self.add.iter().collect(), self.del.iter().collect())
    }
}

/// A concrete, executable action instance such as `lever(p1)`.
///
/// Ordering is by name, then by arguments; planners use it to break ties.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroundedAction {
    pub name: String,
    pub args: Vec<String>,
}

impl GroundedAction {
    pub fn new<S: Into<String>>(name: &str, args: impl IntoIterator<Item = S>) -> Self {
        GroundedAction {
            name: name.to_string(),
            args: args.into_iter().map(Into::into).collect(),
        }
    }
}

impl fmt::Display for GroundedAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.name, self.args.join(","))
    }
}

impl FromStr for GroundedAction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let a: Atom = s.parse()?;
        Ok(GroundedAction {
            name: a.name,
            args: a.args,
        })
    }
}

#[derive(Debug, Clone)]
pub struct MenidRule {
    pub id: String,
    pub action: String,
    /// Action parameters, without the `?` prefix.
    pub params: Vec<String>,
    /// Deictic references, bound by matching the precondition.
    pub deictic: Vec<String>,
    pub pre: Vec<Predicate>,
    /// `outcomes[0]` is the noise outcome.
    pub outcomes: Vec<Outcome>,
    /// Derived-predicate declarations; carried along but not evaluated.
    pub derived: Vec<String>,
    counts: [CountVector; 2],
    probs: [Option<ProbVector>; 2],
}

impl MenidRule {
    /// Build and validate a rule. `explicit` holds outcomes `1..=n`; the noise
    /// outcome is prepended.
    pub fn new(
        id: impl Into<String>,
        action: impl Into<String>,
        params: Vec<String>,
        deictic: Vec<String>,
        pre: Vec<Predicate>,
        explicit: Vec<Outcome>,
    ) -> Result<Self> {
        let id = id.into();
        let action = action.into();
        let bad = |msg: String| Error::InvalidRules(format!("rule {id}: {msg}"));

        if id.is_empty() {
            return Err(Error::InvalidRules("empty rule id".into()));
        }
        if action.is_empty() {
            return Err(bad("empty action name".into()));
        }
        if explicit.is_empty() {
            return Err(bad("at least one explicit outcome is required".into()));
        }
        if explicit.iter().any(|o| o.is_noise) {
            return Err(bad("the noise outcome is implicit and must not be listed".into()));
        }

        let mut vars = BTreeSet::new();
        for v in params.iter().chain(&deictic) {
            if !vars.insert(v.as_str()) {
                return Err(bad(format!(
                    "variable ?{v} is declared twice (parameters and deictic references must be disjoint)"
                )));
            }
        }
        for p in &pre {
            if let Some(v) = p.vars().find(|v| !vars.contains(v)) {
                return Err(bad(format!("precondition {p} uses undeclared ?{v}")));
            }
        }
        let pre_vars: BTreeSet<&str> = pre.iter().flat_map(Predicate::vars).collect();
        if let Some(v) = deictic.iter().find(|v| !pre_vars.contains(v.as_str())) {
            return Err(bad(format!("deictic ?{v} does not occur in the precondition")));
        }
        for o in &explicit {
            for p in o.add.iter().chain(&o.del) {
                if let Some(v) = p.vars().find(|v| !vars.contains(v)) {
                    return Err(bad(format!("outcome {:?} uses undeclared ?{v}", o.label)));
                }
            }
            if let Some(p) = o.add.iter().find(|p| o.del.contains(p)) {
                return Err(bad(format!("outcome {:?} both adds and deletes {p}", o.label)));
            }
        }
        for (i, a) in explicit.iter().enumerate() {
            for (j, b) in explicit.iter().enumerate().skip(i + 1) {
                if a.effect_key() == b.effect_key() {
                    log::warn!(
                        "rule {id}: outcomes {} and {} have identical effects; observations classify as {}",
                        i + 1,
                        j + 1,
                        i + 1
                    );
                }
            }
        }

        let mut outcomes = Vec::with_capacity(explicit.len() + 1);
        outcomes.push(Outcome::noise());
        outcomes.extend(explicit);
        let len = outcomes.len();
        Ok(MenidRule {
            id,
            action,
            params,
            deictic,
            pre,
            outcomes,
            derived: Vec::new(),
            counts: [CountVector::zeros(len), CountVector::zeros(len)],
            probs: [None, None],
        })
    }

    /// Number of explicit outcomes (excluding noise).
    pub fn n_explicit(&self) -> usize {
        self.outcomes.len() - 1
    }

    pub fn n_outcomes(&self) -> usize {
        self.outcomes.len()
    }

    pub fn counts(&self, env: EnvKind) -> &CountVector {
        &self.counts[env.index()]
    }

    pub fn probs(&self, env: EnvKind) -> Option<&ProbVector> {
        self.probs[env.index()].as_ref()
    }

    pub fn record(&mut self, env: EnvKind, outcome: usize) {
        self.counts[env.index()].increment(outcome);
    }

    pub fn set_counts(&mut self, env: EnvKind, counts: CountVector) -> Result<()> {
        if counts.len() != self.n_outcomes() {
            return Err(Error::LengthMismatch(counts.len(), self.n_outcomes()));
        }
        self.counts[env.index()] = counts;
        Ok(())
    }

    pub fn set_probs(&mut self, env: EnvKind, probs: Option<ProbVector>) -> Result<()> {
        if let Some(p) = &probs {
            if p.len() != self.n_outcomes() {
                return Err(Error::LengthMismatch(p.len(), self.n_outcomes()));
            }
        }
        self.probs[env.index()] = probs;
        Ok(())
    }

    /// Forget all counts and estimates.
    pub fn clear_statistics(&mut self) {
        let n = self.n_outcomes();
        self.counts = [CountVector::zeros(n), CountVector::zeros(n)];
        self.probs = [None, None];
    }
}

/// Bind the rule's variables for `action` in `state`.
///
/// Action parameters come from the action's arguments; deictic references are
/// found by matching the precondition against the state. Returns `Ok(None)` if
/// no deictic assignment satisfies the precondition.
pub fn ground_rule(
    rule: &MenidRule,
    state: &State,
    action: &GroundedAction,
) -> Result<Option<Binding>> {
    if action.name != rule.action {
        return Err(Error::InvalidParameter(format!(
            "action {} does not belong to rule {}",
            action, rule.id
        )));
    }
    if action.args.len() != rule.params.len() {
        return Err(Error::ArityMismatch {
            rule: rule.id.clone(),
            action: action.to_string(),
            expected: rule.params.len(),
            got: action.args.len(),
        });
    }
    let mut binding: Binding = rule
        .params
        .iter()
        .cloned()
        .zip(action.args.iter().cloned())
        .collect();
    // Two params bound to different constants but sharing a name cannot happen:
    // params are validated distinct.
    let mut found = Vec::new();
    match_all(&rule.pre, state, &mut binding, &mut found, 2);
    match found.len() {
        0 => Ok(None),
        1 => Ok(found.pop()),
        _ => Err(Error::AmbiguousDeictic {
            rule: rule.id.clone(),
        }),
    }
}

fn match_all(
    pre: &[Predicate],
    state: &State,
    binding: &mut Binding,
    found: &mut Vec<Binding>,
    limit: usize,
) {
    let Some((first, rest)) = pre.split_first() else {
        found.push(binding.clone());
        return;
    };
    let start = Atom {
        name: first.name.clone(),
        args: Vec::new(),
    };
    for atom in state
        .atoms()
        .range(start..)
        .take_while(|a| a.name == first.name)
    {
        if atom.args.len() != first.args.len() {
            continue;
        }
        let mut fresh: Vec<&str> = Vec::new();
        let mut ok = true;
        for (term, value) in first.args.iter().zip(&atom.args) {
            match term {
                Term::Const(c) => ok = c == value,
                Term::Var(v) => match binding.get(v) {
                    Some(bound) => ok = bound == value,
                    None => {
                        binding.insert(v.clone(), value.clone());
                        fresh.push(v);
                    }
                },
            }
            if !ok {
                break;
            }
        }
        if ok {
            match_all(rest, state, binding, found, limit);
        }
        for v in fresh {
            binding.remove(v);
        }
        if found.len() >= limit {
            return;
        }
    }
}

/// A rule that triggers for an action in a state, with its binding.
#[derive(Debug, Clone)]
pub struct Trigger<'a> {
    pub index: usize,
    pub rule: &'a MenidRule,
    pub binding: Binding,
}

/// Rules of `action` whose preconditions hold in `state`. At most one rule
/// per action may trigger; a second one is reported as
/// [`Error::OverlappingRules`].
pub fn applicable_rules<'a>(
    state: &State,
    rules: &'a [MenidRule],
    action: &GroundedAction,
) -> Result<Vec<Trigger<'a>>> {
    let mut out: Vec<Trigger<'a>> = Vec::new();
    for (index, rule) in rules.iter().enumerate() {
        if rule.action != action.name {
            continue;
        }
        if let Some(binding) = ground_rule(rule, state, action)? {
            if let Some(prev) = out.first() {
                return Err(Error::OverlappingRules {
                    action: action.to_string(),
                    first: prev.rule.id.clone(),
                    second: rule.id.clone(),
                });
            }
            out.push(Trigger {
                index,
                rule,
                binding,
            });
        }
    }
    Ok(out)
}

/// The single rule of `action` that triggers in `state`, if any.
pub fn triggering_rule<'a>(
    state: &State,
    rules: &'a [MenidRule],
    action: &GroundedAction,
) -> Result<Option<Trigger<'a>>> {
    Ok(applicable_rules(state, rules, action)?.pop())
}

/// `(state \ del) ∪ add` for explicit outcome `index` under `binding`.
pub fn apply_outcome(
    state: &State,
    rule: &MenidRule,
    binding: &Binding,
    index: usize,
) -> Result<State> {
    if index == 0 {
        return Err(Error::NoiseNotApplicable {
            rule: rule.id.clone(),
        });
    }
    let outcome = rule.outcomes.get(index).ok_or_else(|| Error::IndexOutOfRange {
        rule: rule.id.clone(),
        index,
        n: rule.n_explicit(),
    })?;
    let ground = |p: &Predicate| {
        p.ground(binding).ok_or_else(|| {
            Error::InvalidParameter(format!("binding leaves {p} of rule {} unbound", rule.id))
        })
    };
    let mut next = state.clone();
    for p in &outcome.del {
        next.remove(&ground(p)?);
    }
    for p in &outcome.add {
        next.insert(ground(p)?);
    }
    Ok(next)
}

/// Smallest explicit outcome index that maps `s` to `s_next`, or 0 (noise).
pub fn classify_outcome(rule: &MenidRule, binding: &Binding, s: &State, s_next: &State) -> usize {
    (1..rule.n_outcomes())
        .find(|&i| apply_outcome(s, rule, binding, i).is_ok_and(|r| &r == s_next))
        .unwrap_or(0)
}

/// Every grounding of every action name in `rules` over the constants of
/// `state` that has a triggering rule, sorted.
pub fn enumerate_actions(rules: &[MenidRule], state: &State) -> Result<Vec<GroundedAction>> {
    let constants: Vec<&str> = state.constants().into_iter().collect();
    let mut arities: BTreeMap<&str, usize> = BTreeMap::new();
    for r in rules {
        arities.insert(&r.action, r.params.len());
    }
    let mut out = Vec::new();
    for (name, arity) in arities {
        let n = constants.len();
        // 0^0 == 1: a nullary action has exactly one grounding.
        for code in 0..n.pow(arity as u32) {
            let mut rest = code;
            let args = (0..arity).map(|_| {
                let c = constants[rest % n];
                rest /= n;
                c
            });
            let action = GroundedAction::new(name, args);
            if triggering_rule(state, rules, &action)?.is_some() {
                out.push(action);
            }
        }
    }
    out.sort();
    Ok(out)
}
