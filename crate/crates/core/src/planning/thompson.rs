use rand::Rng;

use super::RewardSpec;
use crate::env::EnvKind;
use crate::error::{Error, Result};
use crate::estimation::{weighted_pseudo_counts, Dirichlet};
use crate::rules::{triggering_rule, GroundedAction, MenidRule, State};

/// Thompson sampling over one step.
///
/// For every candidate action that has a triggering rule, draw outcome
/// probabilities from `Dir(1 + x1_i + w x2_i)`, where `x1`/`x2` are the rule's
/// target/test counts and `w = m / sqrt(1 + N1)`, and score the action by its
/// expected one-step reward under the draw. Returns the best action; ties go
/// to the smallest action.
pub fn select_action_thompson<R: Rng + ?Sized>(
    rules: &[MenidRule],
    state: &State,
    actions: &[GroundedAction],
    reward: &RewardSpec,
    m: f64,
    rng: &mut R,
) -> Result<GroundedAction> {
    let mut sorted: Vec<&GroundedAction> = actions.iter().collect();
    sorted.sort();
    sorted.dedup();
    let mut best: Option<(f64, &GroundedAction)> = None;
    let mut draw = Vec::new();
    for a in sorted {
        let Some(trigger) = triggering_rule(state, rules, a)? else {
            continue;
        };
        let rule = trigger.rule;
        let pseudo = weighted_pseudo_counts(rule.counts(EnvKind::Target), rule.counts(EnvKind::Test), m)?;
        let alpha: Vec<f64> = pseudo.iter().map(|x| 1.0 + x).collect();
        Dirichlet::new(&alpha)?.sample_into(rng, &mut draw);
        let value: f64 = draw
            .iter()
            .enumerate()
            .map(|(i, p)| p * reward.reward(&rule.id, i))
            .sum();
        if best.is_none_or(|(v, _)| value > v) {
            best = Some((value, a));
        }
    }
    best.map(|(_, a)| a.clone()).ok_or(Error::NoApplicableAction)
}
