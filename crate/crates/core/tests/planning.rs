use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use menid::env::EnvKind;
use menid::estimation::{sample_dirichlet, CountVector};
use menid::planning::{select_action_thompson, value_iteration, RewardSpec, Transition, TransitionModel};
use menid::rng;
use menid::rules::{parse_rules, GroundedAction, State};

fn random_model(rng: &mut ChaCha8Rng) -> TransitionModel {
    let n = rng.random_range(1..=12);
    let states: Vec<State> = (0..n).map(|i| format!("s{i}").parse().unwrap()).collect();
    let mut model = TransitionModel::new();
    for s in &states {
        model.add_state(s.clone());
        for a in 0..rng.random_range(0..=3) {
            let p = sample_dirichlet(&[1.0, 1.0, 1.0], rng).unwrap();
            let ts = p
                .as_slice()
                .iter()
                .enumerate()
                .map(|(i, &prob)| Transition {
                    next: states[rng.random_range(0..n)].clone(),
                    prob,
                    reward: rng.random_range(-5.0..5.0),
                    outcome: i,
                })
                .collect();
            let action: GroundedAction = format!("a{a}()").parse().unwrap();
            model.insert(s.clone(), action, ts).unwrap();
        }
    }
    model
}

#[test]
fn positive_reward_scaling_keeps_the_policy() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let model = random_model(&mut rng);
        let k = rng.random_range(0.1..20.0);
        let mut scaled = model.clone();
        scaled.scale_rewards(k);
        let horizon = rng.random_range(1..=4);
        let v = value_iteration(&model, horizon, 0.95).unwrap();
        let w = value_iteration(&scaled, horizon, 0.95).unwrap();
        for (s, sv) in &v {
            assert_eq!(sv.action, w[s].action);
            assert!((sv.value * k - w[s].value).abs() < 1e-9 * (1.0 + w[s].value.abs()));
        }
    }
}

#[test]
fn thompson_settles_on_the_better_action_with_many_samples() {
    let mut rules = parse_rules(
        r#"[{"rule_id": "ra", "action": "a", "pre": ["ready"],
             "outcomes": [{"label": "success", "add": ["done"]}, {"label": "fail"}]},
            {"rule_id": "rb", "action": "b", "pre": ["ready"],
             "outcomes": [{"label": "success", "add": ["done"]}, {"label": "fail"}]}]"#,
    )
    .unwrap()
    .into_rules();
    rules[0].set_counts(EnvKind::Target, CountVector::new(vec![0, 7000, 3000]).unwrap()).unwrap();
    rules[1].set_counts(EnvKind::Target, CountVector::new(vec![0, 5000, 5000]).unwrap()).unwrap();
    let spec = RewardSpec::from_rules(&rules, 1.0, 1.0, State::new()).unwrap();
    let actions: Vec<GroundedAction> = vec!["a()".parse().unwrap(), "b()".parse().unwrap()];
    let state: State = "ready".parse().unwrap();
    let n = 2000;
    let hits = (0..n)
        .filter(|&seed| {
            select_action_thompson(&rules, &state, &actions, &spec, 10.0, &mut rng::indexed(seed, 0)).unwrap()
                == actions[0]
        })
        .count();
    assert!(hits as f64 / n as f64 >= 0.99, "{hits}/{n}");
}
