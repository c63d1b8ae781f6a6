//! Goal-conditioned trajectory forecasting.
//!
//! A tracked resident's recent cells are scored against the planner
//! policy of every zone anchor to weight candidate goals; paths are
//! then sampled per goal in proportion to that posterior, resampled to
//! a fixed length, and clustered into K representative predictions.

pub mod kmeans;
pub mod metrics;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::grid::{FeatureField, GridMap, ZoneId};
use crate::irl::reward::{RewardError, RewardModel};
use crate::irl::solve::{self, Policy, SolveError};
use crate::math;
use crate::mdp::{Action, GoalSpec, Mdp, StateId};
use crate::rng::SeededRng;
use crate::traj::Trajectory;

pub use metrics::{ade, fde, min_ade, min_fde};

#[derive(Debug, Error, PartialEq)]
pub enum ForecastError {
    #[error("map has no zones to use as goals")]
    NoGoals,
    #[error("clustering needs at least {need} samples, got {have}")]
    TooFewSamples { have: usize, need: usize },
    #[error("forecast length {forecast} does not match truth length {truth}")]
    LengthMismatch { forecast: usize, truth: usize },
    #[error("history cells must be 4-adjacent or equal (index {index})")]
    NotAdjacent { index: usize },
    #[error("history is empty")]
    EmptyHistory,
    #[error(transparent)]
    Reward(#[from] RewardError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Recently observed cells of one tracked person, oldest first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservedHistory {
    pub person: String,
    cells: Vec<StateId>,
    ticks: Vec<u64>,
}

impl ObservedHistory {
    pub fn new(person: String, cell: StateId, tick: u64) -> Self {
        ObservedHistory {
            person,
            cells: vec![cell],
            ticks: vec![tick],
        }
    }

    pub fn from_cells(
        person: String,
        cells: &[(StateId, u64)],
        mdp: &Mdp,
    ) -> Result<Self, ForecastError> {
        let (first, rest) = cells.split_first().ok_or(ForecastError::EmptyHistory)?;
        let mut history = ObservedHistory::new(person, first.0, first.1);
        for (i, &(cell, tick)) in rest.iter().enumerate() {
            history
                .push(cell, tick, mdp)
                .map_err(|_| ForecastError::NotAdjacent { index: i + 1 })?;
        }
        Ok(history)
    }

    /// Append a cell, which must be the previous cell or a 4-neighbor.
    pub fn push(&mut self, cell: StateId, tick: u64, mdp: &Mdp) -> Result<(), ForecastError> {
        let last = *self.cells.last().unwrap();
        let adjacent = cell == last || mdp.action_between(last, cell).is_some();
        if !adjacent {
            return Err(ForecastError::NotAdjacent {
                index: self.cells.len(),
            });
        }
        self.cells.push(cell);
        self.ticks.push(tick);
        Ok(())
    }

    /// One legal step from the last cell toward `target`, for trackers
    /// whose raw position estimates may jump.
    pub fn step_toward(&self, target: StateId, mdp: &Mdp) -> StateId {
        let last = *self.cells.last().unwrap();
        if target == last || mdp.action_between(last, target).is_some() {
            return target;
        }
        let (lr, lc) = mdp.cell_of(last);
        let (tr, tc) = mdp.cell_of(target);
        let mut best = last;
        let mut best_d = lr.abs_diff(tr) + lc.abs_diff(tc);
        for a in Action::ALL {
            let next = mdp.step(last, a);
            let (nr, nc) = mdp.cell_of(next);
            let d = nr.abs_diff(tr) + nc.abs_diff(tc);
            if d < best_d {
                best_d = d;
                best = next;
            }
        }
        best
    }

    pub fn cells(&self) -> &[StateId] {
        &self.cells
    }

    pub fn ticks(&self) -> &[u64] {
        &self.ticks
    }

    pub fn last(&self) -> StateId {
        *self.cells.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Posterior weight per candidate goal zone; weights sum to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct GoalPosterior {
    /// `(zone, goal state, weight)`, ascending zone id.
    pub entries: Vec<(ZoneId, StateId, f64)>,
}

impl GoalPosterior {
    pub fn weight_of(&self, zone: ZoneId) -> f64 {
        self.entries
            .iter()
            .find(|(z, ..)| *z == zone)
            .map(|(_, _, w)| *w)
            .unwrap_or(0.0)
    }

    /// Highest-weight entry (lowest zone id wins ties).
    pub fn top(&self) -> (ZoneId, StateId, f64) {
        let mut best = self.entries[0];
        for &e in &self.entries[1..] {
            if e.2 > best.2 {
                best = e;
            }
        }
        best
    }
}

/// K representative predicted paths with their mass fractions.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastSet {
    pub k: usize,
    /// Each path has exactly the configured number of points, `(x, y)`
    /// in cell units.
    pub paths: Vec<Vec<(f64, f64)>>,
    pub weights: Vec<f64>,
}

/// Forecast tuning knobs.
#[derive(Debug, Clone, Copy)]
pub struct ForecastConfig {
    /// Total sampled paths across goals.
    pub samples: usize,
    pub k: usize,
    /// Points per resampled path.
    pub points: usize,
    pub seed: u64,
}

impl Default for ForecastConfig {
    fn default() -> Self {
        ForecastConfig {
            samples: 200,
            k: 5,
            points: 20,
            seed: 7,
        }
    }
}

/// Per-goal planner policies for one reward model on one map.
pub struct Forecaster {
    goals: Vec<(ZoneId, StateId)>,
    policies: Vec<Policy>,
    horizon: usize,
}

impl Forecaster {
    /// Plan one policy per zone anchor under the model's reward field.
    pub fn from_model(
        model: &RewardModel,
        map: &GridMap,
        field: &FeatureField,
        mdp: &Mdp,
        horizon: usize,
    ) -> Result<Self, ForecastError> {
        let rewards = model.reward_field(field, mdp)?;
        Self::from_rewards(&rewards, map, mdp, horizon)
    }

    pub fn from_rewards(
        rewards: &[f64],
        map: &GridMap,
        mdp: &Mdp,
        horizon: usize,
    ) -> Result<Self, ForecastError> {
        let mut goals = Vec::new();
        let mut policies = Vec::new();
        for (zone, (r, c)) in map.goal_candidates() {
            let state = mdp.state_at(r, c).expect("anchor is traversable");
            goals.push((zone, state));
            policies.push(solve::value_iteration(
                rewards,
                GoalSpec { state },
                horizon,
                mdp,
            )?);
        }
        if goals.is_empty() {
            return Err(ForecastError::NoGoals);
        }
        Ok(Forecaster {
            goals,
            policies,
            horizon,
        })
    }

    /// Goal-blind baseline: a uniform policy toward every anchor.
    pub fn uniform(map: &GridMap, mdp: &Mdp, horizon: usize) -> Result<Self, ForecastError> {
        let mut goals = Vec::new();
        let mut policies = Vec::new();
        for (zone, (r, c)) in map.goal_candidates() {
            let state = mdp.state_at(r, c).expect("anchor is traversable");
            goals.push((zone, state));
            policies.push(Policy::uniform(mdp.n_states(), horizon, state));
        }
        if goals.is_empty() {
            return Err(ForecastError::NoGoals);
        }
        Ok(Forecaster {
            goals,
            policies,
            horizon,
        })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn goals(&self) -> &[(ZoneId, StateId)] {
        &self.goals
    }

    pub fn policy_for(&self, zone: ZoneId) -> Option<&Policy> {
        self.goals
            .iter()
            .position(|(z, _)| *z == zone)
            .map(|i| &self.policies[i])
    }

    /// Score each goal by the likelihood of the observed transitions
    /// under that goal's policy (uniform prior). Only the most recent
    /// `horizon` transitions are scored. Goals whose policy assigns any
    /// observed step zero probability get exactly zero weight; with no
    /// evidence (single-cell history) the posterior is the prior.
    pub fn infer_goals(
        &self,
        history: &ObservedHistory,
        mdp: &Mdp,
    ) -> Result<GoalPosterior, ForecastError> {
        let cells = history.cells();
        let window_start = cells.len().saturating_sub(self.horizon + 1);
        let window = &cells[window_start..];

        let mut log_weights = Vec::with_capacity(self.goals.len());
        for policy in &self.policies {
            let mut lw = 0.0;
            for (i, pair) in window.windows(2).enumerate() {
                let (s, next) = (pair[0], pair[1]);
                let step = i + 1;
                if !policy.is_reachable(step, s) {
                    lw = math::NEG_INF;
                    break;
                }
                let p = if s == next {
                    Action::ALL
                        .iter()
                        .filter(|&&a| mdp.step(s, a) == s)
                        .map(|&a| policy.prob(step, s, a))
                        .sum()
                } else {
                    match mdp.action_between(s, next) {
                        Some(a) => policy.prob(step, s, a),
                        None => 0.0,
                    }
                };
                if p <= 0.0 {
                    lw = math::NEG_INF;
                    break;
                }
                lw += math::ln(p);
            }
            log_weights.push(lw);
        }

        let max_lw = log_weights.iter().cloned().fold(math::NEG_INF, f64::max);
        let mut weights: Vec<f64> = if max_lw == math::NEG_INF {
            // No goal explains the history; fall back to the prior.
            vec![1.0; self.goals.len()]
        } else {
            log_weights
                .iter()
                .map(|&lw| {
                    if lw == math::NEG_INF {
                        0.0
                    } else {
                        math::exp(lw - max_lw)
                    }
                })
                .collect()
        };
        let total: f64 = weights.iter().sum();
        for w in weights.iter_mut() {
            *w /= total;
        }
        Ok(GoalPosterior {
            entries: self
                .goals
                .iter()
                .zip(&weights)
                .map(|(&(z, s), &w)| (z, s, w))
                .collect(),
        })
    }

    /// Full pipeline: posterior, per-goal sampling proportional to it,
    /// resampling, clustering.
    pub fn forecast(
        &self,
        history: &ObservedHistory,
        mdp: &Mdp,
        config: &ForecastConfig,
    ) -> Result<(GoalPosterior, ForecastSet), ForecastError> {
        let posterior = self.infer_goals(history, mdp)?;
        let start = history.last();
        let budgets = sample_budgets(&posterior, config.samples);

        let mut rng = SeededRng::new(config.seed);
        let mut flat: Vec<Vec<f64>> = Vec::with_capacity(config.samples);
        let mut paths: Vec<Vec<(f64, f64)>> = Vec::with_capacity(config.samples);
        let mut weights: Vec<f64> = Vec::with_capacity(config.samples);
        for (gi, &(zone, _)) in self.goals.iter().enumerate() {
            let budget = budgets[gi];
            if budget == 0 {
                continue;
            }
            let per_sample_weight = posterior.weight_of(zone) / budget as f64;
            let samples = sample_paths_with_rng(&self.policies[gi], mdp, start, budget, &mut rng);
            for traj in samples {
                let resampled = resample_path(&traj.points(mdp), config.points);
                flat.push(flatten(&resampled));
                paths.push(resampled);
                weights.push(per_sample_weight);
            }
        }
        let cluster_seed = rng.next_u64();
        let set = cluster_resampled(&paths, &flat, &weights, config.k, cluster_seed)?;
        Ok((posterior, set))
    }
}

fn sample_budgets(posterior: &GoalPosterior, total: usize) -> Vec<usize> {
    let mut budgets: Vec<usize> = posterior
        .entries
        .iter()
        .map(|(_, _, w)| math::round(w * total as f64) as usize)
        .collect();
    let assigned: usize = budgets.iter().sum();
    let top = posterior
        .entries
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .2.partial_cmp(&b.1 .2).unwrap().then(b.0.cmp(&a.0)))
        .map(|(i, _)| i)
        .unwrap_or(0);
    if assigned < total {
        budgets[top] += total - assigned;
    } else {
        let mut excess = assigned - total;
        while excess > 0 && budgets[top] > 0 {
            budgets[top] -= 1;
            excess -= 1;
        }
        // Rounding can overshoot by at most a few; trim others if needed.
        for b in budgets.iter_mut() {
            if excess == 0 {
                break;
            }
            let cut = excess.min(*b);
            *b -= cut;
            excess -= cut;
        }
    }
    budgets
}

/// Draw stepwise samples from a planner policy, stopping at the goal or
/// the horizon.
pub fn sample_paths(
    policy: &Policy,
    mdp: &Mdp,
    start: StateId,
    count: usize,
    seed: u64,
) -> Vec<Trajectory> {
    let mut rng = SeededRng::new(seed);
    sample_paths_with_rng(policy, mdp, start, count, &mut rng)
}

fn sample_paths_with_rng(
    policy: &Policy,
    mdp: &Mdp,
    start: StateId,
    count: usize,
    rng: &mut SeededRng,
) -> Vec<Trajectory> {
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut states = vec![start];
        let mut actions = Vec::new();
        let mut s = start;
        for n in 1..=policy.horizon() {
            if s == policy.goal() {
                break;
            }
            let a = Action::from_index(rng.weighted_index(policy.row(n, s)));
            let next = mdp.step(s, a);
            actions.push(a);
            states.push(next);
            s = next;
        }
        out.push(
            Trajectory::new(states, actions, None, mdp).expect("sampled steps follow the table"),
        );
    }
    out
}

/// Arc-length uniform resampling of a polyline to exactly `points`
/// points; a single-point path is repeated.
pub fn resample_path(polyline: &[(f64, f64)], points: usize) -> Vec<(f64, f64)> {
    assert!(points >= 2, "need at least two output points");
    assert!(!polyline.is_empty());
    let mut lengths = Vec::with_capacity(polyline.len().saturating_sub(1));
    let mut total = 0.0;
    for pair in polyline.windows(2) {
        let d = math::hypot(pair[1].0 - pair[0].0, pair[1].1 - pair[0].1);
        lengths.push(d);
        total += d;
    }
    if total == 0.0 {
        return vec![polyline[0]; points];
    }
    let mut out = Vec::with_capacity(points);
    out.push(polyline[0]);
    let mut segment = 0;
    let mut walked = 0.0;
    for i in 1..points - 1 {
        let target = total * i as f64 / (points - 1) as f64;
        while segment < lengths.len() - 1 && walked + lengths[segment] < target {
            walked += lengths[segment];
            segment += 1;
        }
        let t = if lengths[segment] > 0.0 {
            (target - walked) / lengths[segment]
        } else {
            0.0
        };
        let (a, b) = (polyline[segment], polyline[segment + 1]);
        out.push((a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1)));
    }
    out.push(*polyline.last().unwrap());
    out
}

fn flatten(path: &[(f64, f64)]) -> Vec<f64> {
    let mut out = Vec::with_capacity(path.len() * 2);
    for &(x, y) in path {
        out.push(x);
        out.push(y);
    }
    out
}

/// Cluster resampled paths (with per-sample weights) into K medoids.
pub fn cluster_paths(
    samples: &[(Vec<(f64, f64)>, f64)],
    k: usize,
    seed: u64,
) -> Result<ForecastSet, ForecastError> {
    let paths: Vec<Vec<(f64, f64)>> = samples.iter().map(|(p, _)| p.clone()).collect();
    let flat: Vec<Vec<f64>> = paths.iter().map(|p| flatten(p)).collect();
    let weights: Vec<f64> = samples.iter().map(|(_, w)| *w).collect();
    cluster_resampled(&paths, &flat, &weights, k, seed)
}

fn cluster_resampled(
    paths: &[Vec<(f64, f64)>],
    flat: &[Vec<f64>],
    weights: &[f64],
    k: usize,
    seed: u64,
) -> Result<ForecastSet, ForecastError> {
    if paths.len() < k {
        return Err(ForecastError::TooFewSamples {
            have: paths.len(),
            need: k,
        });
    }
    let clustering = kmeans::kmeans(flat, weights, k, seed);
    Ok(ForecastSet {
        k,
        paths: clustering
            .medoids
            .iter()
            .map(|&m| paths[m].clone())
            .collect(),
        weights: clustering.weights,
    })
}

/// One labeled example: the observed prefix and the true future path
/// (starting at the last observed cell).
#[derive(Debug, Clone)]
pub struct EvalExample {
    pub observed: Vec<StateId>,
    pub truth: Vec<StateId>,
}

/// Metric rows in `metric,K,value` form.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsTable {
    pub rows: Vec<(String, usize, f64)>,
}

impl MetricsTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,K,value\n");
        for (metric, k, value) in &self.rows {
            out.push_str(&alloc::format!("{metric},{k},{value:.6}\n"));
        }
        out
    }

    pub fn value_of(&self, metric: &str, k: usize) -> Option<f64> {
        self.rows
            .iter()
            .find(|(m, kk, _)| m == metric && *kk == k)
            .map(|(_, _, v)| *v)
    }
}

/// Run the full forecast pipeline over a dataset and average the
/// displacement metrics for each requested K.
pub fn evaluate(
    examples: &[EvalExample],
    forecaster: &Forecaster,
    mdp: &Mdp,
    ks: &[usize],
    samples: usize,
    points: usize,
    seed: u64,
) -> Result<MetricsTable, ForecastError> {
    let mut sums: BTreeMap<usize, (f64, f64)> = ks.iter().map(|&k| (k, (0.0, 0.0))).collect();
    for (i, example) in examples.iter().enumerate() {
        let cells: Vec<(StateId, u64)> = example
            .observed
            .iter()
            .enumerate()
            .map(|(t, &s)| (s, t as u64))
            .collect();
        let history = ObservedHistory::from_cells(String::new(), &cells, mdp)?;
        let truth_points: Vec<(f64, f64)> = example
            .truth
            .iter()
            .map(|&s| {
                let (r, c) = mdp.cell_of(s);
                (c as f64, r as f64)
            })
            .collect();
        let truth = resample_path(&truth_points, points);
        for &k in ks {
            let config = ForecastConfig {
                samples,
                k,
                points,
                seed: seed ^ (i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15),
            };
            let (_, set) = forecaster.forecast(&history, mdp, &config)?;
            let entry = sums.get_mut(&k).unwrap();
            entry.0 += min_ade(&set, &truth)?;
            entry.1 += min_fde(&set, &truth)?;
        }
    }
    let n = examples.len().max(1) as f64;
    let mut rows = Vec::new();
    for &k in ks {
        let (ade_sum, fde_sum) = sums[&k];
        rows.push((String::from("minade"), k, ade_sum / n));
        rows.push((String::from("minfde"), k, fde_sum / n));
    }
    Ok(MetricsTable { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{features, GridMap};

    fn tiny() -> (GridMap, Mdp) {
        let map = GridMap::parse("####\n#AA#\n####\n\nA=hall,1,1\n").unwrap();
        let mdp = Mdp::build(&map);
        (map, mdp)
    }

    #[test]
    fn one_zone_map_gives_point_mass_posterior() {
        let (map, mdp) = tiny();
        let field = features(&map);
        let model = RewardModel::linear_zeros(field.dim());
        let forecaster = Forecaster::from_model(&model, &map, &field, &mdp, 4).unwrap();
        let history =
            ObservedHistory::new(String::new(), mdp.state_at(1, 2).unwrap(), 0);
        let posterior = forecaster.infer_goals(&history, &mdp).unwrap();
        assert_eq!(posterior.entries.len(), 1);
        assert_eq!(posterior.entries[0].2, 1.0);
    }

    #[test]
    fn single_cell_history_returns_prior() {
        let map = GridMap::parse(
            "#####\n#ADB#\n#####\n\nA=left,1,1\nB=right,1,3\nD=right,1,2\n",
        )
        .unwrap();
        let mdp = Mdp::build(&map);
        let field = features(&map);
        let model = RewardModel::linear_zeros(field.dim());
        let forecaster = Forecaster::from_model(&model, &map, &field, &mdp, 6).unwrap();
        let history =
            ObservedHistory::new(String::new(), mdp.state_at(1, 2).unwrap(), 0);
        let posterior = forecaster.infer_goals(&history, &mdp).unwrap();
        for (_, _, w) in &posterior.entries {
            assert!((w - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn walking_toward_a_zone_raises_its_weight() {
        let map = GridMap::parse(
            "#######\n#AADBB#\n#######\n\nA=left,1,1\nB=right,1,5\nD=right,1,3\n",
        )
        .unwrap();
        let mdp = Mdp::build(&map);
        let field = features(&map);
        // Goal-seeking regime: per-step reward below -ln(4), so the
        // policies actually head for their goals instead of wandering.
        let mut weights = alloc::vec![0.0; field.dim()];
        weights[field.slot("class:free", &map).unwrap()] = 3.0;
        weights[field.slot("class:door", &map).unwrap()] = 3.0;
        let model = RewardModel::linear(weights);
        let forecaster = Forecaster::from_model(&model, &map, &field, &mdp, 8).unwrap();
        let cells = [
            (mdp.state_at(1, 1).unwrap(), 0),
            (mdp.state_at(1, 2).unwrap(), 1),
            (mdp.state_at(1, 3).unwrap(), 2),
        ];
        let history = ObservedHistory::from_cells(String::new(), &cells, &mdp).unwrap();
        let posterior = forecaster.infer_goals(&history, &mdp).unwrap();
        let right = map.zone_named("right").unwrap().id;
        let left = map.zone_named("left").unwrap().id;
        assert!(posterior.weight_of(right) > posterior.weight_of(left));

        // Independent recomputation of the likelihood product.
        let mut expected = Vec::new();
        for &(zone, _) in forecaster.goals() {
            let policy = forecaster.policy_for(zone).unwrap();
            let mut lw = 0.0;
            for (i, pair) in cells.windows(2).enumerate() {
                let a = mdp.action_between(pair[0].0, pair[1].0).unwrap();
                lw += math::ln(policy.prob(i + 1, pair[0].0, a));
            }
            expected.push(math::exp(lw));
        }
        let total: f64 = expected.iter().sum();
        for (entry, e) in posterior.entries.iter().zip(&expected) {
            assert!((entry.2 - e / total).abs() < 1e-12);
        }
    }

    #[test]
    fn sampling_from_the_goal_gives_empty_paths() {
        let (map, mdp) = tiny();
        let field = features(&map);
        let model = RewardModel::linear_zeros(field.dim());
        let forecaster = Forecaster::from_model(&model, &map, &field, &mdp, 4).unwrap();
        let goal = forecaster.goals()[0].1;
        let policy = forecaster.policy_for(ZoneId(0)).unwrap();
        let paths = sample_paths(policy, &mdp, goal, 5, 3);
        assert_eq!(paths.len(), 5);
        assert!(paths.iter().all(|p| p.is_empty()));
    }

    #[test]
    fn deterministic_policy_gives_identical_samples() {
        let (_, mdp) = tiny();
        let left = mdp.state_at(1, 1).unwrap();
        let right = mdp.state_at(1, 2).unwrap();
        let policy = solve::value_iteration(
            &[-1.0, -1.0],
            GoalSpec { state: right },
            1,
            &mdp,
        )
        .unwrap();
        let paths = sample_paths(&policy, &mdp, left, 10, 1);
        for p in &paths {
            assert_eq!(p.states(), paths[0].states());
            assert_eq!(p.len(), 1);
        }
    }

    #[test]
    fn resampling_matches_hand_arithmetic() {
        let straight = [(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)];
        assert_eq!(
            resample_path(&straight, 3),
            alloc::vec![(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]
        );
        let five = resample_path(&straight, 5);
        assert_eq!(
            five,
            alloc::vec![(0.0, 0.0), (0.5, 0.0), (1.0, 0.0), (1.5, 0.0), (2.0, 0.0)]
        );
        // L-shaped path, arc length 3, quarter positions at 0,1,2,3.
        let ell = [(0.0, 0.0), (0.0, 1.0), (1.0, 1.0), (2.0, 1.0)];
        let four = resample_path(&ell, 4);
        assert_eq!(four[0], (0.0, 0.0));
        assert_eq!(four[1], (0.0, 1.0));
        assert_eq!(four[2], (1.0, 1.0));
        assert_eq!(four[3], (2.0, 1.0));
        // Zero-length path repeats its point.
        assert_eq!(resample_path(&[(3.0, 4.0)], 3), alloc::vec![(3.0, 4.0); 3]);
    }

    #[test]
    fn cluster_k1_returns_single_medoid_with_weight_one() {
        let samples = alloc::vec![
            (alloc::vec![(0.0, 0.0), (1.0, 0.0)], 0.5),
            (alloc::vec![(0.0, 0.1), (1.0, 0.1)], 0.5),
        ];
        let set = cluster_paths(&samples, 1, 0).unwrap();
        assert_eq!(set.k, 1);
        assert_eq!(set.weights, alloc::vec![1.0]);
    }

    #[test]
    fn cluster_rejects_too_few_samples() {
        let samples = alloc::vec![(alloc::vec![(0.0, 0.0), (1.0, 0.0)], 1.0)];
        assert!(matches!(
            cluster_paths(&samples, 2, 0),
            Err(ForecastError::TooFewSamples { have: 1, need: 2 })
        ));
    }

    #[test]
    fn budgets_sum_to_the_sample_count() {
        let posterior = GoalPosterior {
            entries: alloc::vec![
                (ZoneId(0), StateId(0), 0.4),
                (ZoneId(1), StateId(1), 0.35),
                (ZoneId(2), StateId(2), 0.25),
            ],
        };
        for total in [1usize, 7, 200] {
            let budgets = sample_budgets(&posterior, total);
            assert_eq!(budgets.iter().sum::<usize>(), total);
        }
    }
}
