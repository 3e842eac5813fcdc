use std::collections::BTreeMap;

use super::TransitionModel;
use crate::error::{Error, Result};
use crate::rules::{GroundedAction, State};

#[derive(Debug, Clone, PartialEq)]
pub struct StateValue {
    pub value: f64,
    /// Maximizing action; `None` for states without actions.
    pub action: Option<GroundedAction>,
}

/// Finite-horizon value iteration:
/// `V_{k+1}(s) = max_a sum_{s'} P(s,a,s') [R(s,a,s') + discount V_k(s')]`,
/// starting from `V_0 = 0`. Returns `V_horizon` and its maximizing action per
/// state. Ties go to the smallest action (name, then arguments).
pub fn value_iteration(
    model: &TransitionModel,
    horizon: usize,
    discount: f64,
) -> Result<BTreeMap<State, StateValue>> {
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be at least 1".into()));
    }
    if !(discount > 0.0 && discount <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "discount must lie in (0, 1], got {discount}"
        )));
    }
    let mut values: BTreeMap<&State, f64> = model.states().map(|s| (s, 0.0)).collect();
    let mut policy: BTreeMap<&State, Option<&GroundedAction>> = BTreeMap::new();
    for _ in 0..horizon {
        let mut next = BTreeMap::new();
        policy.clear();
        for s in model.states() {
            let mut best: Option<(f64, &GroundedAction)> = None;
            // Actions iterate in sorted order; a later action must be strictly
            // better to win.
            for (a, ts) in model.actions(s) {
                let q: f64 = ts
                    .iter()
                    .map(|t| t.prob * (t.reward + discount * values.get(&t.next).copied().unwrap_or(0.0)))
                    .sum();
                if best.is_none_or(|(v, _)| q > v) {
                    best = Some((q, a));
                }
            }
            next.insert(s, best.map_or(0.0, |(v, _)| v));
            policy.insert(s, best.map(|(_, a)| a));
        }
        values = next;
    }
    Ok(model
        .states()
        .map(|s| {
            (
                s.clone(),
                StateValue {
                    value: values[s],
                    action: policy.get(s).copied().flatten().cloned(),
                },
            )
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planning::Transition;

    fn st(s: &str) -> State {
        s.parse().unwrap()
    }

    fn act(s: &str) -> GroundedAction {
        s.parse().unwrap()
    }

    fn coin(p_success: f64, penalty: f64) -> Vec<Transition> {
        vec![
            Transition { next: st("done"), prob: p_success, reward: 1.0, outcome: 1 },
            Transition { next: st("start"), prob: 1.0 - p_success, reward: -penalty, outcome: 2 },
        ]
    }

    #[test]
    fn certain_success() {
        let mut m = TransitionModel::new();
        m.insert(st("start"), act("go()"), coin(1.0, 0.0)).unwrap();
        let v = value_iteration(&m, 1, 1.0).unwrap();
        assert_eq!(v[&st("start")].value, 1.0);
        assert_eq!(v[&st("start")].action, Some(act("go()")));
    }

    #[test]
    fn picks_higher_success_probability() {
        let mut m = TransitionModel::new();
        m.insert(st("start"), act("a()"), coin(0.9, 0.0)).unwrap();
        m.insert(st("start"), act("b()"), coin(0.6, 0.0)).unwrap();
        let v = value_iteration(&m, 1, 1.0).unwrap();
        assert!((v[&st("start")].value - 0.9).abs() < 1e-12);
        assert_eq!(v[&st("start")].action, Some(act("a()")));
    }

    #[test]
    fn expected_penalty() {
        let mut m = TransitionModel::new();
        m.insert(st("start"), act("a()"), coin(0.5, 5.0)).unwrap();
        let v = value_iteration(&m, 1, 1.0).unwrap();
        assert!((v[&st("start")].value + 2.0).abs() < 1e-12);
    }

    #[test]
    fn ties_break_lexicographically() {
        let mut m = TransitionModel::new();
        m.insert(st("start"), act("b(x)"), coin(0.5, 0.0)).unwrap();
        m.insert(st("start"), act("a(z)"), coin(0.5, 0.0)).unwrap();
        m.insert(st("start"), act("a(y)"), coin(0.5, 0.0)).unwrap();
        let v = value_iteration(&m, 2, 1.0).unwrap();
        assert_eq!(v[&st("start")].action, Some(act("a(y)")));
    }

    #[test]
    fn retrying_accumulates_over_horizon() {
        // Two tries: 0.5 + 0.5 * 0.5 with a terminal "done" state.
        let mut m = TransitionModel::new();
        m.insert(st("start"), act("a()"), coin(0.5, 0.0)).unwrap();
        m.add_state(st("done"));
        let v = value_iteration(&m, 2, 1.0).unwrap();
        assert!((v[&st("start")].value - 0.75).abs() < 1e-12);
        assert_eq!(v[&st("done")].action, None);
    }

    #[test]
    fn parameter_checks() {
        let m = TransitionModel::new();
        assert!(value_iteration(&m, 0, 1.0).is_err());
        assert!(value_iteration(&m, 1, 0.0).is_err());
        assert!(value_iteration(&m, 1, 1.5).is_err());
    }
}
