//! Goal-conditioned planning: soft value iteration and the push-forward
//! of state visitation mass under the resulting policy.
//!
//! Value iteration runs backward over the horizon. Each sweep reads the
//! previous value table with the goal entry held at 0, forms action
//! values `Q(s, a) = r(s) + V(next)`, normalizes the policy row by the
//! log-sum-exp of the row, and stores the new values with the goal
//! pinned back to 0. `-inf` is kept as a true infinity throughout:
//! `exp(-inf)` contributes exactly zero mass, and a row whose
//! log-sum-exp is `-inf` (no absorbed continuation) is flagged
//! unreachable and left uniform.
//!
//! The propagation starts from a point mass, zeroes the goal entry at
//! every step (arrival mass is absorbed, including at the final step),
//! and records both the per-step occupancy and where absorption
//! happened.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::math::{self, NEG_INF};
use crate::mdp::{Action, GoalSpec, Mdp, StateId};
use crate::traj::Trajectory;

#[derive(Debug, Error, PartialEq)]
pub enum SolveError {
    #[error("reward at state {state} is {value}; rewards must be finite and <= 0")]
    NonpositiveRewardViolated { state: u32, value: f64 },
    #[error("policy horizon {policy} does not match requested horizon {given}")]
    HorizonMismatch { policy: usize, given: usize },
    #[error("policy goal {policy} does not match requested goal {given}")]
    GoalMismatch { policy: u32, given: u32 },
    #[error("state id {0} out of range (|S| = {1})")]
    InvalidState(u32, usize),
    #[error("inconsistent trajectory at step {step}: {reason}")]
    InconsistentTrajectory { step: usize, reason: String },
    #[error("demonstration step {step} has zero probability under the policy")]
    ZeroProbabilityStep { step: usize },
}

/// Non-stationary stochastic policy over `horizon` steps.
///
/// `prob(n, s, a)` is the step-`n` action distribution (`n` is 1-based;
/// step 1 acts first). Rows with no goal-reaching continuation are
/// uniform and flagged unreachable. `value(n, s)` is the log partition
/// of goal-absorbed continuations starting at `s` with steps `n..=N`
/// left, with the goal entry pinned to 0.
#[derive(Debug, Clone)]
pub struct Policy {
    horizon: usize,
    n_states: usize,
    goal: StateId,
    /// `[(n - 1) * n_states + s] * 4 + a`
    pi: Vec<f64>,
    /// `(n - 1) * n_states + s`
    reachable: Vec<bool>,
    values: Vec<f64>,
}

impl Policy {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn goal(&self) -> StateId {
        self.goal
    }

    #[inline]
    fn row_index(&self, n: usize, s: StateId) -> usize {
        debug_assert!((1..=self.horizon).contains(&n));
        (n - 1) * self.n_states + s.index()
    }

    pub fn row(&self, n: usize, s: StateId) -> &[f64] {
        let i = self.row_index(n, s) * Action::COUNT;
        &self.pi[i..i + Action::COUNT]
    }

    pub fn prob(&self, n: usize, s: StateId, a: Action) -> f64 {
        self.row(n, s)[a.index()]
    }

    pub fn is_reachable(&self, n: usize, s: StateId) -> bool {
        self.reachable[self.row_index(n, s)]
    }

    pub fn value(&self, n: usize, s: StateId) -> f64 {
        self.values[self.row_index(n, s)]
    }

    /// Uniform policy over every row; the no-knowledge baseline.
    pub fn uniform(n_states: usize, horizon: usize, goal: StateId) -> Policy {
        let rows = horizon * n_states;
        Policy {
            horizon,
            n_states,
            goal,
            pi: vec![1.0 / Action::COUNT as f64; rows * Action::COUNT],
            reachable: vec![true; rows],
            values: vec![0.0; rows],
        }
    }
}

/// Backward soft value iteration conditioned on `goal`.
pub fn value_iteration(
    rewards: &[f64],
    goal: GoalSpec,
    horizon: usize,
    mdp: &Mdp,
) -> Result<Policy, SolveError> {
    let n_states = mdp.n_states();
    assert_eq!(rewards.len(), n_states, "reward vector length");
    assert!(horizon >= 1, "horizon must be at least 1");
    if goal.state.index() >= n_states {
        return Err(SolveError::InvalidState(goal.state.0, n_states));
    }
    for (s, &r) in rewards.iter().enumerate() {
        if !(r.is_finite() && r <= 0.0) {
            return Err(SolveError::NonpositiveRewardViolated {
                state: s as u32,
                value: r,
            });
        }
    }

    let rows = horizon * n_states;
    let mut pi = vec![0.0; rows * Action::COUNT];
    let mut reachable = vec![false; rows];
    let mut values = vec![NEG_INF; rows];

    let mut v_next = vec![NEG_INF; n_states];
    v_next[goal.state.index()] = 0.0;
    let mut q_row = [0.0f64; Action::COUNT];

    for n in (1..=horizon).rev() {
        let base = (n - 1) * n_states;
        for s in mdp.states() {
            for a in Action::ALL {
                q_row[a.index()] = rewards[s.index()] + v_next[mdp.step(s, a).index()];
            }
            let lse = math::log_sum_exp(&q_row);
            let row = &mut pi[(base + s.index()) * Action::COUNT..][..Action::COUNT];
            if lse == NEG_INF {
                row.fill(1.0 / Action::COUNT as f64);
            } else {
                reachable[base + s.index()] = true;
                for a in 0..Action::COUNT {
                    row[a] = math::exp(q_row[a] - lse);
                }
            }
            values[base + s.index()] = lse;
        }
        values[base + goal.state.index()] = 0.0;
        v_next.copy_from_slice(&values[base..base + n_states]);
    }

    Ok(Policy {
        horizon,
        n_states,
        goal: goal.state,
        pi,
        reachable,
        values,
    })
}

/// Per-step state visitation mass with goal absorption.
///
/// `step(n)` (1-based, `n <= horizon + 1`) is the occupancy after the
/// goal mass at that step was absorbed; `absorbed_at(n)` is that
/// absorbed amount. `cumulative` sums steps `1..=horizon`, i.e. the
/// expected pre-absorption visit mass each state receives.
#[derive(Debug, Clone)]
pub struct Svf {
    horizon: usize,
    n_states: usize,
    per_step: Vec<f64>,
    absorbed_at: Vec<f64>,
    cumulative: Vec<f64>,
}

impl Svf {
    fn zeros(horizon: usize, n_states: usize) -> Svf {
        Svf {
            horizon,
            n_states,
            per_step: vec![0.0; (horizon + 1) * n_states],
            absorbed_at: vec![0.0; horizon + 2],
            cumulative: vec![0.0; n_states],
        }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn step(&self, n: usize) -> &[f64] {
        debug_assert!((1..=self.horizon + 1).contains(&n));
        &self.per_step[(n - 1) * self.n_states..n * self.n_states]
    }

    fn step_mut(&mut self, n: usize) -> &mut [f64] {
        &mut self.per_step[(n - 1) * self.n_states..n * self.n_states]
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn absorbed_at(&self, n: usize) -> f64 {
        self.absorbed_at[n]
    }

    pub fn total_absorbed(&self) -> f64 {
        self.absorbed_at.iter().sum()
    }

    /// Mass still unabsorbed after the final step.
    pub fn residual_mass(&self) -> f64 {
        self.step(self.horizon + 1).iter().sum()
    }

    pub fn step_mass(&self, n: usize) -> f64 {
        self.step(n).iter().sum()
    }

    fn finish_cumulative(&mut self) {
        for n in 1..=self.horizon {
            let base = (n - 1) * self.n_states;
            for s in 0..self.n_states {
                self.cumulative[s] += self.per_step[base + s];
            }
        }
    }
}

/// Push a point mass at `s_init` forward through the policy, absorbing
/// at the goal each step.
pub fn policy_propagation(
    policy: &Policy,
    s_init: StateId,
    goal: GoalSpec,
    horizon: usize,
    mdp: &Mdp,
) -> Result<Svf, SolveError> {
    if policy.horizon() != horizon {
        return Err(SolveError::HorizonMismatch {
            policy: policy.horizon(),
            given: horizon,
        });
    }
    if policy.goal() != goal.state {
        return Err(SolveError::GoalMismatch {
            policy: policy.goal().0,
            given: goal.state.0,
        });
    }
    let n_states = mdp.n_states();
    if s_init.index() >= n_states {
        return Err(SolveError::InvalidState(s_init.0, n_states));
    }

    let mut svf = Svf::zeros(horizon, n_states);
    let goal_idx = goal.state.index();
    let mut current = vec![0.0; n_states];
    current[s_init.index()] = 1.0;

    for n in 1..=horizon {
        svf.absorbed_at[n] += current[goal_idx];
        current[goal_idx] = 0.0;
        svf.step_mut(n).copy_from_slice(&current);
        let mut next = vec![0.0; n_states];
        for s in mdp.states() {
            let mass = current[s.index()];
            if mass == 0.0 {
                continue;
            }
            let row = policy.row(n, s);
            for a in Action::ALL {
                let p = row[a.index()];
                if p > 0.0 {
                    next[mdp.step(s, a).index()] += p * mass;
                }
            }
        }
        current = next;
    }
    svf.absorbed_at[horizon + 1] += current[goal_idx];
    current[goal_idx] = 0.0;
    svf.step_mut(horizon + 1).copy_from_slice(&current);
    svf.finish_cumulative();
    Ok(svf)
}

fn validate_demo(demo: &Trajectory, mdp: &Mdp, horizon: usize) -> Result<(), SolveError> {
    if demo.len() > horizon {
        return Err(SolveError::InconsistentTrajectory {
            step: demo.len(),
            reason: format!("demo has {} steps but horizon is {horizon}", demo.len()),
        });
    }
    for (i, (s, a)) in demo.steps().enumerate() {
        if s.index() >= mdp.n_states() {
            return Err(SolveError::InvalidState(s.0, mdp.n_states()));
        }
        if mdp.step(s, a) != demo.states()[i + 1] {
            return Err(SolveError::InconsistentTrajectory {
                step: i + 1,
                reason: "state does not follow from the transition table".to_string(),
            });
        }
    }
    Ok(())
}

/// Count visitation mass contributed by demonstrations, truncated at
/// each demo's first arrival at its landing state.
pub fn demo_svf(demos: &[Trajectory], mdp: &Mdp, horizon: usize) -> Result<Svf, SolveError> {
    let mut svf = Svf::zeros(horizon, mdp.n_states());
    for demo in demos {
        validate_demo(demo, mdp, horizon)?;
        let goal = demo.end();
        for (i, &s) in demo.states().iter().enumerate() {
            let step = i + 1;
            if s == goal {
                // First arrival: absorbed, nothing counted from here on.
                svf.absorbed_at[step] += 1.0;
                break;
            }
            svf.step_mut(step)[s.index()] += 1.0;
        }
    }
    svf.finish_cumulative();
    Ok(svf)
}

/// Log-probability of following `states` under the policy, reading step
/// `i` of the trajectory as policy step `i`.
///
/// The sequence may be a prefix (it need not reach the goal), but any
/// step taken *from* the goal is post-absorption and has probability 0.
pub fn path_log_prob(policy: &Policy, demo: &Trajectory, mdp: &Mdp) -> Result<f64, SolveError> {
    if demo.len() > policy.horizon() {
        return Err(SolveError::HorizonMismatch {
            policy: policy.horizon(),
            given: demo.len(),
        });
    }
    validate_demo(demo, mdp, policy.horizon())?;
    let mut total = 0.0;
    for (i, (s, a)) in demo.steps().enumerate() {
        let step = i + 1;
        if s == policy.goal() {
            return Err(SolveError::ZeroProbabilityStep { step });
        }
        if !policy.is_reachable(step, s) {
            return Err(SolveError::ZeroProbabilityStep { step });
        }
        let p = policy.prob(step, s, a);
        if p <= 0.0 {
            return Err(SolveError::ZeroProbabilityStep { step });
        }
        total += math::ln(p);
    }
    Ok(total)
}

/// Probability that stepwise sampling produces exactly this state
/// sequence (ending at the goal), summing over the blocked actions that
/// realize each stay-in-place step.
pub fn path_state_prob(policy: &Policy, states: &[StateId], mdp: &Mdp) -> f64 {
    let mut prob = 1.0;
    for (i, window) in states.windows(2).enumerate() {
        let (s, next) = (window[0], window[1]);
        if s == policy.goal() {
            return 0.0;
        }
        let step = i + 1;
        if !policy.is_reachable(step, s) {
            return 0.0;
        }
        let mut p_step = 0.0;
        for a in Action::ALL {
            if mdp.step(s, a) == next {
                p_step += policy.prob(step, s, a);
            }
        }
        prob *= p_step;
    }
    prob
}
