//! Shared helpers: tiny random instances for cross-route checks.

use lightcast_core::grid::GridMap;
use lightcast_core::mdp::{GoalSpec, Mdp, StateId};
use lightcast_core::rng::SeededRng;

/// Small connected geometries, every |S| <= 9.
pub const TINY_MAPS: &[&str] = &[
    "####\n#AA#\n####\n\nA=room,1,1\n",
    "#####\n#AAA#\n#####\n\nA=room,1,1\n",
    "####\n#AA#\n#AA#\n####\n\nA=room,1,1\n",
    "#####\n#AAA#\n#AAA#\n#####\n\nA=room,1,1\n",
    "#####\n#AAA#\n#AAA#\n#AAA#\n#####\n\nA=room,1,1\n",
    "#####\n#A###\n#AAA#\n#####\n\nA=room,1,1\n",
    "#####\n#AAA#\n#A#A#\n#AAA#\n#####\n\nA=room,1,1\n",
];

pub struct TinyInstance {
    pub mdp: Mdp,
    pub rewards: Vec<f64>,
    pub start: StateId,
    pub goal: GoalSpec,
    pub horizon: usize,
}

/// Deterministic random instance: geometry, rewards in [-3, 0], random
/// start/goal, horizon 1..=6.
pub fn random_tiny_instance(rng: &mut SeededRng) -> TinyInstance {
    let text = TINY_MAPS[rng.index(TINY_MAPS.len())];
    let map = GridMap::parse(text).expect("fixture maps are valid");
    let mdp = Mdp::build(&map);
    let rewards: Vec<f64> = (0..mdp.n_states()).map(|_| -3.0 * rng.uniform()).collect();
    let start = StateId(rng.index(mdp.n_states()) as u32);
    let goal = GoalSpec {
        state: StateId(rng.index(mdp.n_states()) as u32),
    };
    let horizon = 1 + rng.index(6);
    TinyInstance {
        mdp,
        rewards,
        start,
        goal,
        horizon,
    }
}
