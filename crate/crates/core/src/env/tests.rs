use super::*;
use crate::estimation::Dirichlet;
use crate::rng;
use crate::rules::{ground_rule, parse_rules};

const RULES: &str = r#"[
  {"rule_id": "lever_ok", "action": "lever", "params": ["?x"], "deictic": ["?b"],
   "pre": ["pcb(?x)", "in(?x,?b)"],
   "outcomes": [
     {"label": "success", "add": ["removed(?x)"], "del": ["in(?x,?b)"]},
     {"label": "fail"}
   ]}
]"#;

fn spec(truth: [f64; 3]) -> EnvironmentSpec {
    parse_env(&format!(
        r#"{{"env_id": "t", "kind": "target",
            "initial_state": ["pcb(p1)", "in(p1,b1)"],
            "latency": {{"lever": 2.5}},
            "ground_truth": {{"lever_ok": [{}, {}, {}]}},
            "goal": ["removed(p1)"]}}"#,
        truth[0], truth[1], truth[2]
    ))
    .unwrap()
}

fn env(truth: [f64; 3], seed: u64) -> SimEnvironment {
    SimEnvironment::new(spec(truth), &parse_rules(RULES).unwrap(), rng::stream(seed, rng::ENV_TARGET))
        .unwrap()
}

fn lever() -> GroundedAction {
    "lever(p1)".parse().unwrap()
}

#[test]
fn fresh_state_is_initial() {
    let e = env([0.0, 1.0, 0.0], 0);
    assert_eq!(e.current_state(), &"pcb(p1) in(p1,b1)".parse::<State>().unwrap());
    assert_eq!(e.now(), 0.0);
}

#[test]
fn degenerate_distribution_always_applies_outcome() {
    let rules = parse_rules(RULES).unwrap();
    let mut e = env([0.0, 1.0, 0.0], 1);
    let s = e.current_state().clone();
    let x = e.exec_action(&lever()).unwrap();
    let b = ground_rule(&rules.rules()[0], &s, &lever()).unwrap().unwrap();
    assert_eq!(x.s_next, apply_outcome(&s, &rules.rules()[0], &b, 1).unwrap());
    assert!(e.current_state().contains(&"removed(p1)".parse().unwrap()));
    assert!(e.is_goal());
    assert_eq!(x.env_label, EnvKind::Target);
    assert_eq!(x.elapsed, 2.5);
}

#[test]
fn inapplicable_action_errors() {
    let mut e = env([0.0, 1.0, 0.0], 2);
    e.exec_action(&lever()).unwrap();
    assert!(matches!(e.exec_action(&lever()), Err(Error::NoRuleTriggers { .. })));
}

#[test]
fn outcome_frequencies_follow_ground_truth() {
    let k = 10_000;
    let mut e = env([0.0, 0.7, 0.3], 3);
    let mut succ = 0;
    for _ in 0..k {
        let x = e.exec_action(&lever()).unwrap();
        if x.s_next.contains(&"removed(p1)".parse().unwrap()) {
            succ += 1;
        }
        e.reset();
    }
    let f = succ as f64 / k as f64;
    let tol = 3.0 * (0.7f64 * 0.3 / k as f64).sqrt();
    assert!((f - 0.7).abs() < tol.min(0.02), "{f}");
}

#[test]
fn clock_advances_by_latency_and_survives_reset() {
    let mut e = env([0.0, 0.0, 1.0], 4);
    for i in 1..=5 {
        e.exec_action(&lever()).unwrap();
        assert_eq!(e.now(), 2.5 * i as f64);
    }
    e.reset();
    e.reset();
    assert_eq!(e.current_state(), e.initial_state());
    assert_eq!(e.now(), 12.5);
}

#[test]
fn identical_seeds_give_identical_streams() {
    let run = |seed| {
        let mut e = env([0.1, 0.5, 0.4], seed);
        (0..200)
            .map(|_| {
                let x = e.exec_action(&lever()).unwrap();
                e.reset();
                x
            })
            .collect::<Vec<_>>()
    };
    assert_eq!(run(9), run(9));
    assert_ne!(run(9), run(10));
}

#[test]
fn scramble_noise_removes_one_atom() {
    let mut sp = spec([1.0, 0.0, 0.0]);
    sp.noise = NoiseEffect::Scramble;
    let mut e =
        SimEnvironment::new(sp, &parse_rules(RULES).unwrap(), rng::stream(0, rng::ENV_TEST)).unwrap();
    let x = e.exec_action(&lever()).unwrap();
    assert_eq!(x.s_next.len(), 1);
    assert!(x.s.is_superset(&x.s_next));
}

#[test]
fn perturbation_identity_and_replacement() {
    let p = ProbVector::new(vec![0.8, 0.2]).unwrap();
    let mut r = rng::indexed(0, 0);
    assert_eq!(perturb_distribution(&p, 0.0, &mut r).unwrap(), p);

    let r = rng::indexed(1, 0);
    let u = Dirichlet::new(&[1.0, 1.0]).unwrap().sample(&mut r.clone());
    let q = perturb_distribution(&p, 1.0, &mut r.clone()).unwrap();
    assert!(q.max_abs_diff(&u) < 1e-12);
    assert!(perturb_distribution(&p, 1.5, &mut r.clone()).is_err());
}

#[test]
fn perturbation_drift_is_bounded() {
    // |result - p| <= magnitude * max|u - p| for the u the perturbation drew.
    let p = ProbVector::new(vec![0.8, 0.2]).unwrap();
    let d = Dirichlet::new(&[1.0, 1.0]).unwrap();
    for i in 0..2_000 {
        let r = rng::indexed(77, i);
        let u = d.sample(&mut r.clone());
        let q = perturb_distribution(&p, 0.2, &mut r.clone()).unwrap();
        let bound = 0.2 * u.max_abs_diff(&p);
        assert!(q.max_abs_diff(&p) <= bound + 1e-12);
        assert!(q.max_abs_diff(&p) <= 0.2);
    }
}

#[test]
fn perturbed_environment_uses_perturbed_distribution() {
    let mut sp = spec([0.0, 0.9, 0.1]);
    sp.perturbation = Some(Perturbation { magnitude: 0.15, seed: 3 });
    let e = SimEnvironment::new(sp, &parse_rules(RULES).unwrap(), rng::stream(0, rng::ENV_TEST)).unwrap();
    let d = e.distribution("lever_ok").unwrap();
    let truth = ProbVector::new(vec![0.0, 0.9, 0.1]).unwrap();
    assert!(d.max_abs_diff(&truth) > 0.0);
    assert!(d.max_abs_diff(&truth) <= 0.15);
}

#[test]
fn spec_validation() {
    let rules = parse_rules(RULES).unwrap();
    let mut sp = spec([0.0, 1.0, 0.0]);
    sp.latency.clear();
    assert!(sp.validate(&rules).is_err());
    let mut sp = spec([0.0, 1.0, 0.0]);
    sp.ground_truth.insert("ghost".into(), ProbVector::new(vec![0.5, 0.5]).unwrap());
    assert!(sp.validate(&rules).is_err());
    let mut sp = spec([0.0, 1.0, 0.0]);
    sp.ground_truth
        .insert("lever_ok".into(), ProbVector::new(vec![0.5, 0.5]).unwrap());
    assert!(sp.validate(&rules).is_err());
    assert!(parse_env(r#"{"env_id": "x", "kind": "target", "initial_state": [], "latency": {},
        "ground_truth": {"r": [0.7, 0.7]}}"#)
        .is_err());
}
