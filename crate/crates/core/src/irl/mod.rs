//! Maximum-entropy inverse reinforcement learning on the grid MDP:
//! nonpositive reward models, goal-conditioned soft value iteration,
//! visitation propagation, the likelihood gradient and its training
//! loop, and a brute-force enumeration oracle for tiny instances.

pub mod enumerate;
pub mod reward;
pub mod solve;
pub mod train;

pub use enumerate::{enumerate_paths, EnumError, PathDistribution};
pub use reward::{CheckpointError, LinearReward, MlpReward, RewardError, RewardModel};
pub use solve::{
    demo_svf, path_log_prob, path_state_prob, policy_propagation, value_iteration, Policy,
    SolveError, Svf,
};
pub use train::{
    irl_gradient, log_likelihood, mean_log_likelihood, train, ModelKind, TrainConfig,
    TrainError, TrainOutcome,
};
