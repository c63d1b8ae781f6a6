//! Built-in correctness checks runnable from the CLI: enumeration
//! equivalence, gradient agreement with finite differences, structural
//! invariants, and protocol bijectivity. The gradient routine is
//! injectable so the harness itself can be validated against a
//! deliberately broken gradient.

use lightcast_core::forecast::sample_paths;
use lightcast_core::grid::{features, FeatureField, GridMap};
use lightcast_core::irl::{
    enumerate_paths, irl_gradient, log_likelihood, path_state_prob, policy_propagation,
    value_iteration, RewardModel,
};
use lightcast_core::mdp::{GoalSpec, Mdp, StateId};
use lightcast_core::protocol::{decode, LightingCommand};
use lightcast_core::rng::SeededRng;
use lightcast_core::traj::Trajectory;

/// Computes one demo's parameter gradient; the production routine by
/// default, a mutated one under test.
pub type GradientFn =
    dyn Fn(&RewardModel, &Trajectory, &Mdp, &FeatureField, usize) -> Vec<f64>;

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct CheckReport {
    pub checks: Vec<CheckResult>,
}

impl CheckReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let mark = if c.pass { "PASS" } else { "FAIL" };
            out.push_str(&format!("{mark} {} ({})\n", c.name, c.detail));
        }
        out
    }
}

const TINY_MAPS: &[&str] = &[
    "####\n#AA#\n####\n\nA=room,1,1\n",
    "#####\n#AAA#\n#####\n\nA=room,1,1\n",
    "#####\n#AAA#\n#AAA#\n#####\n\nA=room,1,1\n",
    "#####\n#AAA#\n#A#A#\n#AAA#\n#####\n\nA=room,1,1\n",
];

struct Tiny {
    mdp: Mdp,
    rewards: Vec<f64>,
    start: StateId,
    goal: GoalSpec,
    horizon: usize,
}

fn random_tiny(rng: &mut SeededRng) -> Tiny {
    let map = GridMap::parse(TINY_MAPS[rng.index(TINY_MAPS.len())]).unwrap();
    let mdp = Mdp::build(&map);
    let rewards: Vec<f64> = (0..mdp.n_states()).map(|_| -3.0 * rng.uniform()).collect();
    let start = StateId(rng.index(mdp.n_states()) as u32);
    let goal = GoalSpec {
        state: StateId(rng.index(mdp.n_states()) as u32),
    };
    let horizon = 1 + rng.index(6);
    Tiny {
        mdp,
        rewards,
        start,
        goal,
        horizon,
    }
}

pub fn enumeration_check(instances: usize) -> CheckResult {
    let mut rng = SeededRng::new(11);
    let mut checked = 0usize;
    let mut worst = 0.0f64;
    while checked < instances {
        let t = random_tiny(&mut rng);
        let dist = match enumerate_paths(&t.rewards, t.start, t.goal, t.horizon, &t.mdp) {
            Ok(d) => d,
            Err(_) => continue,
        };
        if dist.partition == 0.0 {
            continue;
        }
        let policy = value_iteration(&t.rewards, t.goal, t.horizon, &t.mdp).unwrap();
        for (states, prob) in &dist.paths {
            let gap = (path_state_prob(&policy, states, &t.mdp) - prob).abs();
            worst = worst.max(gap);
        }
        checked += 1;
    }
    CheckResult {
        name: "enumeration-equivalence".into(),
        pass: worst <= 1e-9,
        detail: format!("{checked} instances, max |policy - oracle| = {worst:.3e}"),
    }
}

pub fn gradient_check(triples: usize, gradient: &GradientFn) -> CheckResult {
    let map = GridMap::parse(
        "#######\n#AAAAA#\n#AAAAA#\n#AAAAA#\n#AAAAA#\n#AAAAA#\n#######\n\nA=room,1,1\n",
    )
    .unwrap();
    let mdp = Mdp::build(&map);
    let field = features(&map);
    let horizon = 10;
    let step = 1e-5;
    let mut rng = SeededRng::new(13);
    let mut checked = 0usize;
    let mut worst = 0.0f64;
    while checked < triples {
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
        let demo = sample_paths(&policy, &mdp, start, 1, rng.next_u64()).pop().unwrap();
        if demo.end() != goal {
            continue;
        }

        let analytic = gradient(&model, &demo, &mdp, &field, horizon);
        let base = model.params();
        let mut numeric = Vec::with_capacity(base.len());
        for j in 0..base.len() {
            let mut up = model.clone();
            let mut params = base.clone();
            params[j] += step;
            up.set_params(&params);
            let mut down = model.clone();
            params[j] = base[j] - step;
            down.set_params(&params);
            let hi = log_likelihood(&up, &demo, &mdp, &field, horizon).unwrap();
            let lo = log_likelihood(&down, &demo, &mdp, &field, horizon).unwrap();
            numeric.push((hi - lo) / (2.0 * step));
        }
        let diff: f64 = analytic
            .iter()
            .zip(&numeric)
            .map(|(a, n)| (a - n) * (a - n))
            .sum::<f64>()
            .sqrt();
        let norm: f64 = numeric.iter().map(|n| n * n).sum::<f64>().sqrt();
        worst = worst.max(diff / norm.max(1e-12));
        checked += 1;
    }
    CheckResult {
        name: "gradient-finite-difference".into(),
        pass: worst <= 1e-4,
        detail: format!("{checked} triples, max relative error = {worst:.3e}"),
    }
}

pub fn invariants_check(instances: usize) -> CheckResult {
    let mut rng = SeededRng::new(17);
    let mut worst_row = 0.0f64;
    let mut pinned_ok = true;
    let mut monotone_ok = true;
    for _ in 0..instances {
        let t = random_tiny(&mut rng);
        let policy = value_iteration(&t.rewards, t.goal, t.horizon, &t.mdp).unwrap();
        for n in 1..=t.horizon {
            pinned_ok &= policy.value(n, t.goal.state) == 0.0;
            for s in t.mdp.states() {
                let sum: f64 = policy.row(n, s).iter().sum();
                worst_row = worst_row.max((sum - 1.0).abs());
            }
        }
        let svf = policy_propagation(&policy, t.start, t.goal, t.horizon, &t.mdp).unwrap();
        let mut prev = svf.step_mass(1);
        for n in 2..=t.horizon + 1 {
            let mass = svf.step_mass(n);
            monotone_ok &= mass <= prev + 1e-12;
            prev = mass;
        }
        let absorbed = svf.total_absorbed();
        monotone_ok &= (0.0..=1.0 + 1e-12).contains(&absorbed);
    }
    let pass = worst_row <= 1e-12 && pinned_ok && monotone_ok;
    CheckResult {
        name: "structural-invariants".into(),
        pass,
        detail: format!(
            "{instances} instances, max row gap = {worst_row:.3e}, pinned = {pinned_ok}, monotone = {monotone_ok}"
        ),
    }
}

pub fn protocol_check(commands: usize) -> CheckResult {
    let zones = ["kitchen", "hall_2", "bedroom-a", "z"];
    let mut rng = SeededRng::new(19);
    let mut ok = true;
    for _ in 0..commands {
        let zone = zones[rng.index(zones.len())];
        let cmd = if rng.index(4) == 0 {
            LightingCommand::off(zone).unwrap()
        } else {
            LightingCommand::set(
                zone,
                rng.index(256) as u8,
                rng.index(256) as u8,
                rng.index(256) as u8,
                rng.index(101) as u8,
            )
            .unwrap()
        };
        ok &= decode(&cmd.encode()).as_ref() == Ok(&cmd);
    }
    CheckResult {
        name: "protocol-bijectivity".into(),
        pass: ok,
        detail: format!("{commands} random commands"),
    }
}

fn production_gradient(
    model: &RewardModel,
    demo: &Trajectory,
    mdp: &Mdp,
    field: &FeatureField,
    horizon: usize,
) -> Vec<f64> {
    irl_gradient(model, demo, mdp, field, horizon).expect("self-check instances are valid")
}

/// Run every suite; `quick` shrinks the instance counts to finish fast.
pub fn run(quick: bool) -> CheckReport {
    run_with_gradient(quick, &production_gradient)
}

pub fn run_with_gradient(quick: bool, gradient: &GradientFn) -> CheckReport {
    let (enum_n, grad_n, inv_n, proto_n) = if quick {
        (5, 10, 20, 1_000)
    } else {
        (25, 100, 100, 10_000)
    };
    CheckReport {
        checks: vec![
            enumeration_check(enum_n),
            gradient_check(grad_n, gradient),
            invariants_check(inv_n),
            protocol_check(proto_n),
        ],
    }
}
