//! Brute-force path distribution for tiny instances.
//!
//! Walks every action sequence of length `horizon` from the start
//! state, truncating at the first goal arrival. Each distinct absorbed
//! action prefix contributes `exp(sum of rewards of its pre-arrival
//! states)` once; prefixes sharing a state sequence (stay-in-place
//! steps have several blocked realizations) accumulate onto the same
//! path. Sequences that never reach the goal get zero mass.
//!
//! This is the cross-check for the value-iteration route and shares no
//! code with it.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use thiserror::Error;

use crate::math;
use crate::mdp::{Action, GoalSpec, Mdp, StateId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EnumError {
    #[error("instance too large: 4^{horizon} action sequences exceeds the 10^7 budget")]
    InstanceTooLarge { horizon: usize },
    #[error("reward at state {state} must be finite and <= 0")]
    BadReward { state: u32 },
}

/// Exact distribution over goal-absorbed state sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct PathDistribution {
    /// `(state sequence from start to goal inclusive, probability)`,
    /// in lexicographic state order.
    pub paths: Vec<(Vec<StateId>, f64)>,
    /// Normalizer: total unnormalized weight of absorbed prefixes.
    pub partition: f64,
}

impl PathDistribution {
    pub fn probability_of(&self, states: &[StateId]) -> f64 {
        self.paths
            .iter()
            .find(|(p, _)| p == states)
            .map(|(_, p)| *p)
            .unwrap_or(0.0)
    }
}

/// Enumerate every goal-absorbed path of at most `horizon` actions.
pub fn enumerate_paths(
    rewards: &[f64],
    s_init: StateId,
    goal: GoalSpec,
    horizon: usize,
    mdp: &Mdp,
) -> Result<PathDistribution, EnumError> {
    // 4^h <= 10^7  <=>  h <= 11.
    if horizon > 11 {
        return Err(EnumError::InstanceTooLarge { horizon });
    }
    for (s, &r) in rewards.iter().enumerate() {
        if !(r.is_finite() && r <= 0.0) {
            return Err(EnumError::BadReward { state: s as u32 });
        }
    }

    let mut weights: BTreeMap<Vec<StateId>, f64> = BTreeMap::new();
    let mut prefix: Vec<StateId> = Vec::with_capacity(horizon + 1);
    prefix.push(s_init);
    walk(
        rewards,
        goal.state,
        horizon,
        mdp,
        &mut prefix,
        0.0,
        &mut weights,
    );

    let partition: f64 = weights.values().sum();
    let paths = weights
        .into_iter()
        .map(|(states, w)| (states, if partition > 0.0 { w / partition } else { 0.0 }))
        .collect();
    Ok(PathDistribution { paths, partition })
}

fn walk(
    rewards: &[f64],
    goal: StateId,
    steps_left: usize,
    mdp: &Mdp,
    prefix: &mut Vec<StateId>,
    reward_sum: f64,
    weights: &mut BTreeMap<Vec<StateId>, f64>,
) {
    let here = *prefix.last().unwrap();
    if here == goal {
        *weights.entry(prefix.clone()).or_insert(0.0) += math::exp(reward_sum);
        return;
    }
    if steps_left == 0 {
        return;
    }
    let sum = reward_sum + rewards[here.index()];
    for a in Action::ALL {
        prefix.push(mdp.step(here, a));
        walk(rewards, goal, steps_left - 1, mdp, prefix, sum, weights);
        prefix.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridMap;
    use alloc::vec;

    #[test]
    fn single_path_gets_probability_one() {
        let map = GridMap::parse("####\n#AA#\n####\n\nA=hall,1,1\n").unwrap();
        let mdp = Mdp::build(&map);
        let left = mdp.state_at(1, 1).unwrap();
        let right = mdp.state_at(1, 2).unwrap();
        let dist = enumerate_paths(
            &[-1.0, -1.0],
            left,
            GoalSpec { state: right },
            1,
            &mdp,
        )
        .unwrap();
        assert_eq!(dist.paths.len(), 1);
        assert_eq!(dist.paths[0].0, vec![left, right]);
        assert!((dist.paths[0].1 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_reward_makes_absorbed_prefixes_equiprobable() {
        // Corridor of two cells, horizon 2: absorbed prefixes are R
        // (one way) and {U,D,L} then R (three ways onto one state
        // sequence). With r = 0 every prefix weighs 1.
        let map = GridMap::parse("####\n#AA#\n####\n\nA=hall,1,1\n").unwrap();
        let mdp = Mdp::build(&map);
        let left = mdp.state_at(1, 1).unwrap();
        let right = mdp.state_at(1, 2).unwrap();
        let dist =
            enumerate_paths(&[0.0, 0.0], left, GoalSpec { state: right }, 2, &mdp).unwrap();
        assert_eq!(dist.paths.len(), 2);
        assert!((dist.partition - 4.0).abs() < 1e-12);
        let direct = dist.probability_of(&[left, right]);
        let stay_then_go = dist.probability_of(&[left, left, right]);
        assert!((direct - 0.25).abs() < 1e-12);
        assert!((stay_then_go - 0.75).abs() < 1e-12);
    }

    #[test]
    fn start_at_goal_is_the_empty_path() {
        let map = GridMap::parse("###\n#A#\n###\n\nA=room,1,1\n").unwrap();
        let mdp = Mdp::build(&map);
        let s = StateId(0);
        let dist = enumerate_paths(&[-2.0], s, GoalSpec { state: s }, 3, &mdp).unwrap();
        assert_eq!(dist.paths.len(), 1);
        assert_eq!(dist.paths[0].0, vec![s]);
        assert_eq!(dist.paths[0].1, 1.0);
    }

    #[test]
    fn oversized_instances_rejected() {
        let map = GridMap::parse("###\n#A#\n###\n\nA=room,1,1\n").unwrap();
        let mdp = Mdp::build(&map);
        assert_eq!(
            enumerate_paths(&[-1.0], StateId(0), GoalSpec { state: StateId(0) }, 12, &mdp),
            Err(EnumError::InstanceTooLarge { horizon: 12 })
        );
    }
}
