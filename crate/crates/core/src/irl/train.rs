//! Stochastic gradient ascent on the demonstration log-likelihood.
//!
//! Each demonstration is conditioned on its own endpoints: the first
//! state seeds the propagation, the landing state is the goal. A batch
//! step averages the per-demo gradients and ascends; the loss curve
//! records the mean demonstration log-likelihood after every epoch.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::grid::{features, FeatureField, GridMap};
use crate::irl::reward::{RewardError, RewardModel, DEFAULT_HIDDEN_DIM};
use crate::irl::solve::{self, Policy, SolveError};
use crate::mdp::{GoalSpec, Mdp, StateId};
use crate::rng::SeededRng;
use crate::traj::Trajectory;

#[derive(Debug, Error, PartialEq)]
pub enum TrainError {
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("non-finite loss at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Reward(#[from] RewardError),
    #[error("no demonstrations given")]
    NoDemos,
}

/// Which reward parameterization to fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Linear,
    Mlp { hidden: usize },
}

impl Default for ModelKind {
    fn default() -> Self {
        ModelKind::Linear
    }
}

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    /// Demonstrations per gradient step.
    pub batch: usize,
    pub seed: u64,
    pub horizon: usize,
    pub model: ModelKind,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.05,
            epochs: 40,
            batch: 32,
            seed: 7,
            horizon: crate::mdp::DEFAULT_HORIZON,
            model: ModelKind::Linear,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(TrainError::InvalidConfig(
                "learning_rate must be positive".into(),
            ));
        }
        if self.epochs < 1 {
            return Err(TrainError::InvalidConfig("epochs must be >= 1".into()));
        }
        if self.batch < 1 {
            return Err(TrainError::InvalidConfig("batch must be >= 1".into()));
        }
        if self.horizon < 1 {
            return Err(TrainError::InvalidConfig("horizon must be >= 1".into()));
        }
        if let ModelKind::Mlp { hidden } = self.model {
            if hidden < 1 {
                return Err(TrainError::InvalidConfig("hidden must be >= 1".into()));
            }
        }
        Ok(())
    }

    pub fn initial_model(&self, input_dim: usize) -> RewardModel {
        match self.model {
            ModelKind::Linear => RewardModel::linear_zeros(input_dim),
            ModelKind::Mlp { hidden } => RewardModel::mlp_seeded(input_dim, hidden, self.seed),
        }
    }
}

pub fn mlp_default_hidden() -> usize {
    DEFAULT_HIDDEN_DIM
}

/// Trained model plus the per-epoch mean log-likelihood series.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: RewardModel,
    pub loss_curve: Vec<f64>,
}

/// Gradient of one demonstration's log-likelihood with respect to the
/// model parameters: the demonstration-minus-policy visitation gap,
/// chained through the reward parameterization.
pub fn irl_gradient(
    model: &RewardModel,
    demo: &Trajectory,
    mdp: &Mdp,
    field: &FeatureField,
    horizon: usize,
) -> Result<Vec<f64>, TrainError> {
    let rewards = model.reward_field(field, mdp)?;
    let goal = GoalSpec { state: demo.end() };
    let policy = solve::value_iteration(&rewards, goal, horizon, mdp)?;
    let mut grad = vec![0.0; model.param_count()];
    accumulate_gradient(model, demo, &policy, mdp, field, horizon, &mut grad)?;
    Ok(grad)
}

fn accumulate_gradient(
    model: &RewardModel,
    demo: &Trajectory,
    policy: &Policy,
    mdp: &Mdp,
    field: &FeatureField,
    horizon: usize,
    grad: &mut [f64],
) -> Result<(), TrainError> {
    let goal = GoalSpec { state: demo.end() };
    let d_demo = solve::demo_svf(core::slice::from_ref(demo), mdp, horizon)?;
    let d_policy = solve::policy_propagation(policy, demo.start(), goal, horizon, mdp)?;
    for s in mdp.states() {
        let coeff = d_demo.cumulative()[s.index()] - d_policy.cumulative()[s.index()];
        if coeff != 0.0 {
            let (r, c) = mdp.cell_of(s);
            model.accumulate_param_grad(field.at(r, c), coeff, grad);
        }
    }
    Ok(())
}

/// Exact log-likelihood of a demonstration under the goal-conditioned
/// policy for the current model.
pub fn log_likelihood(
    model: &RewardModel,
    demo: &Trajectory,
    mdp: &Mdp,
    field: &FeatureField,
    horizon: usize,
) -> Result<f64, TrainError> {
    let rewards = model.reward_field(field, mdp)?;
    let goal = GoalSpec { state: demo.end() };
    let policy = solve::value_iteration(&rewards, goal, horizon, mdp)?;
    Ok(solve::path_log_prob(&policy, demo, mdp)?)
}

/// Mean demonstration log-likelihood with one plan per distinct goal.
pub fn mean_log_likelihood(
    model: &RewardModel,
    demos: &[Trajectory],
    mdp: &Mdp,
    field: &FeatureField,
    horizon: usize,
) -> Result<f64, TrainError> {
    if demos.is_empty() {
        return Err(TrainError::NoDemos);
    }
    let rewards = model.reward_field(field, mdp)?;
    let mut policies: BTreeMap<StateId, Policy> = BTreeMap::new();
    let mut total = 0.0;
    for demo in demos {
        let goal = demo.end();
        if !policies.contains_key(&goal) {
            let policy = solve::value_iteration(&rewards, GoalSpec { state: goal }, horizon, mdp)?;
            policies.insert(goal, policy);
        }
        total += solve::path_log_prob(&policies[&goal], demo, mdp)?;
    }
    Ok(total / demos.len() as f64)
}

/// Fit a reward model to demonstrations on `map`.
pub fn train(
    demos: &[Trajectory],
    map: &GridMap,
    config: &TrainConfig,
) -> Result<TrainOutcome, TrainError> {
    config.validate()?;
    if demos.is_empty() {
        return Err(TrainError::NoDemos);
    }
    let mdp = Mdp::build(map);
    let field = features(map);
    let mut model = config.initial_model(field.dim());
    let mut loss_curve = Vec::with_capacity(config.epochs);

    let mut order: Vec<usize> = (0..demos.len()).collect();
    for epoch in 0..config.epochs {
        let mut rng = SeededRng::fork(config.seed, epoch as u64 + 1);
        rng.shuffle(&mut order);
        for chunk in order.chunks(config.batch) {
            let rewards = model.reward_field(&field, &mdp)?;
            let mut policies: BTreeMap<StateId, Policy> = BTreeMap::new();
            let mut grad = vec![0.0; model.param_count()];
            for &i in chunk {
                let demo = &demos[i];
                let goal = demo.end();
                if !policies.contains_key(&goal) {
                    let policy =
                        solve::value_iteration(&rewards, GoalSpec { state: goal }, config.horizon, &mdp)?;
                    policies.insert(goal, policy);
                }
                accumulate_gradient(
                    &model,
                    demo,
                    &policies[&goal],
                    &mdp,
                    &field,
                    config.horizon,
                    &mut grad,
                )?;
            }
            let scale = config.learning_rate / chunk.len() as f64;
            if grad.iter().any(|g| !g.is_finite()) {
                return Err(TrainError::NonFiniteLoss { epoch });
            }
            let mut params = model.params();
            for (p, g) in params.iter_mut().zip(&grad) {
                *p += scale * g;
            }
            model.set_params(&params);
        }
        let mean_ll = mean_log_likelihood(&model, demos, &mdp, &field, config.horizon)?;
        if !mean_ll.is_finite() {
            return Err(TrainError::NonFiniteLoss { epoch });
        }
        loss_curve.push(mean_ll);
    }

    Ok(TrainOutcome { model, loss_curve })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridMap;
    use crate::mdp::Action;

    fn corridor() -> (GridMap, Mdp, FeatureField) {
        let map = GridMap::parse("####\n#AA#\n####\n\nA=hall,1,1\n").unwrap();
        let mdp = Mdp::build(&map);
        let field = features(&map);
        (map, mdp, field)
    }

    #[test]
    fn stationary_point_has_zero_gradient() {
        // One absorbed path exists, so demo and policy visitation agree
        // for every parameter value.
        let (_, mdp, field) = corridor();
        let left = mdp.state_at(1, 1).unwrap();
        let demo = Trajectory::from_actions(left, alloc::vec![Action::Right], None, &mdp).unwrap();
        let model = RewardModel::linear(alloc::vec![0.3; field.dim()]);
        let grad = irl_gradient(&model, &demo, &mdp, &field, 1).unwrap();
        let linf = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        assert!(linf <= 1e-8, "gradient linf {linf}");
    }

    #[test]
    fn doubling_demo_multiplicity_doubles_gradient() {
        let map = GridMap::parse("#####\n#AAA#\n#AAA#\n#####\n\nA=room,1,1\n").unwrap();
        let mdp = Mdp::build(&map);
        let field = features(&map);
        let start = mdp.state_at(1, 1).unwrap();
        let demo = Trajectory::from_actions(
            start,
            alloc::vec![Action::Right, Action::Down, Action::Right],
            None,
            &mdp,
        )
        .unwrap();
        let model = RewardModel::linear_zeros(field.dim());
        let single = irl_gradient(&model, &demo, &mdp, &field, 6).unwrap();

        // Summing the per-demo gradients over two copies.
        let mut doubled = irl_gradient(&model, &demo, &mdp, &field, 6).unwrap();
        for (d, s) in doubled.iter_mut().zip(&single) {
            *d += s;
        }
        for (d, s) in doubled.iter().zip(&single) {
            assert!((d - 2.0 * s).abs() < 1e-14);
        }
    }

    #[test]
    fn config_validation() {
        let mut config = TrainConfig::default();
        config.epochs = 0;
        assert!(matches!(
            config.validate(),
            Err(TrainError::InvalidConfig(_))
        ));
        let mut config = TrainConfig::default();
        config.learning_rate = 0.0;
        assert!(config.validate().is_err());
    }

    #[test]
    fn training_is_bit_deterministic() {
        let map = GridMap::parse("#####\n#AAA#\n#AAA#\n#####\n\nA=room,1,1\n").unwrap();
        let mdp = Mdp::build(&map);
        let start = mdp.state_at(1, 1).unwrap();
        let demo = Trajectory::from_actions(
            start,
            alloc::vec![Action::Right, Action::Down, Action::Right],
            None,
            &mdp,
        )
        .unwrap();
        let config = TrainConfig {
            epochs: 5,
            horizon: 6,
            ..TrainConfig::default()
        };
        let a = train(&[demo.clone(), demo.clone()], &map, &config).unwrap();
        let b = train(&[demo.clone(), demo], &map, &config).unwrap();
        assert_eq!(a.model.params(), b.model.params());
        assert_eq!(a.loss_curve, b.loss_curve);
    }

    #[test]
    fn training_improves_likelihood_on_a_biased_demo_set() {
        // Demos hug the top row; training should raise their likelihood
        // clearly above the zero-model baseline.
        let map = GridMap::parse("######\n#AAAA#\n#AAAA#\n######\n\nA=room,1,1\n").unwrap();
        let mdp = Mdp::build(&map);
        let field = features(&map);
        let start = mdp.state_at(1, 1).unwrap();
        let demo = Trajectory::from_actions(
            start,
            alloc::vec![Action::Right, Action::Right, Action::Right],
            None,
            &mdp,
        )
        .unwrap();
        let demos = alloc::vec![demo; 4];
        let config = TrainConfig {
            epochs: 30,
            learning_rate: 0.2,
            horizon: 8,
            ..TrainConfig::default()
        };
        let before = mean_log_likelihood(
            &config.initial_model(field.dim()),
            &demos,
            &mdp,
            &field,
            8,
        )
        .unwrap();
        let outcome = train(&demos, &map, &config).unwrap();
        let after = *outcome.loss_curve.last().unwrap();
        assert!(after > before + 0.1, "before {before}, after {after}");
    }
}
