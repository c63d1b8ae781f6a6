//! Synthetic demonstration generation from a ground-truth reward.

use lightcast_core::forecast::{sample_paths, Forecaster};
use lightcast_core::grid::{FeatureField, GridMap};
use lightcast_core::irl::RewardModel;
use lightcast_core::mdp::{Mdp, StateId};
use lightcast_core::rng::SeededRng;
use lightcast_core::traj::Trajectory;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GenError {
    #[error(transparent)]
    Forecast(#[from] lightcast_core::forecast::ForecastError),
    #[error("gave up after {attempts} attempts: only {accepted} of {want} demos met the length bound")]
    TooManyRejections {
        attempts: usize,
        accepted: usize,
        want: usize,
    },
}

/// Sample `count` goal-absorbed demonstrations of at least `min_cells`
/// visited cells. Goals are drawn uniformly over zones and starts
/// uniformly over traversable cells; shorter samples are rejected.
pub fn gen_demos(
    map: &GridMap,
    mdp: &Mdp,
    field: &FeatureField,
    truth: &RewardModel,
    count: usize,
    min_cells: usize,
    horizon: usize,
    seed: u64,
) -> Result<Vec<(u64, Trajectory)>, GenError> {
    let forecaster = Forecaster::from_model(truth, map, field, mdp, horizon)?;
    let goals = forecaster.goals().to_vec();
    let mut rng = SeededRng::new(seed);
    let mut demos = Vec::with_capacity(count);
    let mut attempts = 0usize;
    let budget = count.saturating_mul(1000).max(1000);
    while demos.len() < count {
        attempts += 1;
        if attempts > budget {
            return Err(GenError::TooManyRejections {
                attempts,
                accepted: demos.len(),
                want: count,
            });
        }
        let (zone, goal_state) = goals[rng.index(goals.len())];
        let start = StateId(rng.index(mdp.n_states()) as u32);
        let policy = forecaster.policy_for(zone).expect("goal zones have policies");
        if !policy.is_reachable(1, start) && start != goal_state {
            continue;
        }
        let mut traj = match sample_paths(policy, mdp, start, 1, rng.next_u64()).pop() {
            Some(t) => t,
            None => continue,
        };
        if traj.end() != goal_state || traj.states().len() < min_cells {
            continue;
        }
        traj.goal_zone = Some(zone);
        demos.push((demos.len() as u64, traj));
    }
    Ok(demos)
}

/// Mean visited-cell count, for sanity reporting.
pub fn mean_cells(demos: &[(u64, Trajectory)]) -> f64 {
    if demos.is_empty() {
        return 0.0;
    }
    let total: usize = demos.iter().map(|(_, t)| t.states().len()).sum();
    total as f64 / demos.len() as f64
}

/// Split demos into observed prefix and true future for evaluation;
/// the future begins at the last observed cell. Demos too short to
/// leave a future are skipped.
pub fn eval_examples(
    demos: &[(u64, Trajectory)],
    obs_fraction: f64,
) -> Vec<lightcast_core::forecast::EvalExample> {
    let mut out = Vec::new();
    for (_, demo) in demos {
        let cells = demo.states();
        let obs_len = ((cells.len() as f64 * obs_fraction).round() as usize).max(1);
        if obs_len + 1 >= cells.len() {
            continue;
        }
        out.push(lightcast_core::forecast::EvalExample {
            observed: cells[..obs_len].to_vec(),
            truth: cells[obs_len - 1..].to_vec(),
        });
    }
    out
}
