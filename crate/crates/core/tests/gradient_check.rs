//! Analytic likelihood gradients against central finite differences.

use lightcast_core::forecast::sample_paths;
use lightcast_core::grid::{features, FeatureField, GridMap};
use lightcast_core::irl::{irl_gradient, log_likelihood, value_iteration, RewardModel};
use lightcast_core::mdp::{GoalSpec, Mdp, StateId};
use lightcast_core::rng::SeededRng;
use lightcast_core::traj::Trajectory;

const FD_STEP: f64 = 1e-5;

fn finite_difference_grad(
    model: &RewardModel,
    demo: &Trajectory,
    mdp: &Mdp,
    field: &FeatureField,
    horizon: usize,
) -> Vec<f64> {
    let base = model.params();
    let mut grad = Vec::with_capacity(base.len());
    for j in 0..base.len() {
        let mut plus = model.clone();
        let mut params = base.clone();
        params[j] += FD_STEP;
        plus.set_params(&params);
        let mut minus = model.clone();
        params[j] = base[j] - FD_STEP;
        minus.set_params(&params);
        let up = log_likelihood(&plus, demo, mdp, field, horizon).unwrap();
        let down = log_likelihood(&minus, demo, mdp, field, horizon).unwrap();
        grad.push((up - down) / (2.0 * FD_STEP));
    }
    grad
}

fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    let norm: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    diff / norm.max(1e-12)
}

/// Random (5x5 open map, linear params, sampled demo) triples.
#[test]
fn analytic_gradient_matches_central_differences() {
    let map = GridMap::parse(
        "#######\n#AAAAA#\n#AAAAA#\n#AAAAA#\n#AAAAA#\n#AAAAA#\n#######\n\nA=room,1,1\n",
    )
    .unwrap();
    let mdp = Mdp::build(&map);
    let field = features(&map);
    let horizon = 10;
    let mut rng = SeededRng::new(31);

    let mut checked = 0;
    while checked < 100 {
        let weights: Vec<f64> = (0..field.dim()).map(|_| 6.0 * (rng.uniform() - 0.5)).collect();
        let model = RewardModel::linear(weights);
        let rewards = model.reward_field(&field, &mdp).unwrap();
        let start = StateId(rng.index(mdp.n_states()) as u32);
        let goal = StateId(rng.index(mdp.n_states()) as u32);
        if start == goal {
            continue;
        }
        let policy = value_iteration(&rewards, GoalSpec { state: goal }, horizon, &mdp).unwrap();
        if !policy.is_reachable(1, start) {
            continue;
        }
        let demo = sample_paths(&policy, &mdp, start, 1, rng.next_u64())
            .pop()
            .unwrap();
        if demo.end() != goal {
            continue; // not absorbed; cannot condition on it
        }

        let analytic = irl_gradient(&model, &demo, &mdp, &field, horizon).unwrap();
        let numeric = finite_difference_grad(&model, &demo, &mdp, &field, horizon);
        let err = relative_error(&analytic, &numeric);
        assert!(
            err <= 1e-4,
            "triple {checked}: relative error {err}\nanalytic {analytic:?}\nnumeric {numeric:?}"
        );
        checked += 1;
    }
}

/// An MLP reward chains the same visitation gap through backprop.
#[test]
fn mlp_gradient_matches_central_differences() {
    let map = GridMap::parse("#####\n#AAA#\n#AAA#\n#####\n\nA=room,1,1\n").unwrap();
    let mdp = Mdp::build(&map);
    let field = features(&map);
    let horizon = 6;
    let mut rng = SeededRng::new(8);

    for case in 0..10 {
        let model = RewardModel::mlp_seeded(field.dim(), 4, rng.next_u64());
        let rewards = model.reward_field(&field, &mdp).unwrap();
        let start = StateId(rng.index(mdp.n_states()) as u32);
        let goal = StateId((start.index() + 1 + rng.index(mdp.n_states() - 1)) as u32 % mdp.n_states() as u32);
        let policy = value_iteration(&rewards, GoalSpec { state: goal }, horizon, &mdp).unwrap();
        if !policy.is_reachable(1, start) {
            continue;
        }
        let demo = sample_paths(&policy, &mdp, start, 1, rng.next_u64())
            .pop()
            .unwrap();
        if demo.end() != goal {
            continue;
        }
        let analytic = irl_gradient(&model, &demo, &mdp, &field, horizon).unwrap();
        let numeric = finite_difference_grad(&model, &demo, &mdp, &field, horizon);
        let err = relative_error(&analytic, &numeric);
        assert!(err <= 1e-4, "case {case}: relative error {err}");
    }
}
