//! Finite-horizon MDP over the traversable cells of a [`GridMap`].
//!
//! States index free and door cells densely in row-major order; the
//! four movement actions are deterministic, and a move into a wall or
//! off the grid stays put.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::grid::GridMap;

/// Dense index of a traversable cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub u32);

impl StateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// The four movement actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Action {
    Up,
    Down,
    Left,
    Right,
}

impl Action {
    pub const ALL: [Action; 4] = [Action::Up, Action::Down, Action::Left, Action::Right];
    pub const COUNT: usize = 4;

    pub fn index(self) -> usize {
        match self {
            Action::Up => 0,
            Action::Down => 1,
            Action::Left => 2,
            Action::Right => 3,
        }
    }

    pub fn from_index(i: usize) -> Action {
        Action::ALL[i]
    }

    pub fn letter(self) -> char {
        match self {
            Action::Up => 'U',
            Action::Down => 'D',
            Action::Left => 'L',
            Action::Right => 'R',
        }
    }

    pub fn from_letter(c: char) -> Option<Action> {
        match c {
            'U' => Some(Action::Up),
            'D' => Some(Action::Down),
            'L' => Some(Action::Left),
            'R' => Some(Action::Right),
            _ => None,
        }
    }

    fn delta(self) -> (isize, isize) {
        match self {
            Action::Up => (-1, 0),
            Action::Down => (1, 0),
            Action::Left => (0, -1),
            Action::Right => (0, 1),
        }
    }
}

/// The conditioning goal for planning and propagation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GoalSpec {
    pub state: StateId,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MdpError {
    #[error("state id {0} out of range (|S| = {1})")]
    InvalidState(u32, usize),
}

/// Deterministic grid MDP: dense states, 4 actions, tabulated moves.
#[derive(Debug, Clone)]
pub struct Mdp {
    n_states: usize,
    /// `transition[s * 4 + a]`.
    transition: Vec<StateId>,
    /// StateId -> (row, col).
    cell_of: Vec<(usize, usize)>,
    /// Row-major cell index -> StateId for traversable cells.
    state_at: Vec<Option<StateId>>,
    width: usize,
    horizon_default: usize,
}

/// Planning horizon used when callers do not pass one explicitly.
pub const DEFAULT_HORIZON: usize = 64;

impl Mdp {
    /// Build the MDP for a map. States are assigned row-major over
    /// traversable cells; blocked moves self-loop.
    pub fn build(map: &GridMap) -> Mdp {
        let width = map.width();
        let mut cell_of = Vec::new();
        let mut state_at = vec![None; width * map.height()];
        for (r, c) in map.free_cells() {
            let id = StateId(cell_of.len() as u32);
            cell_of.push((r, c));
            state_at[r * width + c] = Some(id);
        }
        let n_states = cell_of.len();
        let mut transition = Vec::with_capacity(n_states * Action::COUNT);
        for (i, &(r, c)) in cell_of.iter().enumerate() {
            for action in Action::ALL {
                let (dr, dc) = action.delta();
                let nr = r as isize + dr;
                let nc = c as isize + dc;
                let target = if nr >= 0 && nc >= 0 {
                    state_at
                        .get(nr as usize * width + nc as usize)
                        .copied()
                        .flatten()
                } else {
                    None
                };
                transition.push(target.unwrap_or(StateId(i as u32)));
            }
        }
        Mdp {
            n_states,
            transition,
            cell_of,
            state_at,
            width,
            horizon_default: DEFAULT_HORIZON,
        }
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn horizon_default(&self) -> usize {
        self.horizon_default
    }

    pub fn set_horizon_default(&mut self, n: usize) {
        assert!(n >= 1);
        self.horizon_default = n;
    }

    /// Checked transition lookup.
    pub fn transition(&self, s: StateId, a: Action) -> Result<StateId, MdpError> {
        if s.index() >= self.n_states {
            return Err(MdpError::InvalidState(s.0, self.n_states));
        }
        Ok(self.step(s, a))
    }

    /// Unchecked-by-construction transition used on hot paths.
    #[inline]
    pub fn step(&self, s: StateId, a: Action) -> StateId {
        self.transition[s.index() * Action::COUNT + a.index()]
    }

    pub fn cell_of(&self, s: StateId) -> (usize, usize) {
        self.cell_of[s.index()]
    }

    pub fn state_at(&self, row: usize, col: usize) -> Option<StateId> {
        self.state_at.get(row * self.width + col).copied().flatten()
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        (0..self.n_states as u32).map(StateId)
    }

    /// The unique action moving `from -> to`, if the cells are distinct
    /// 4-neighbors; `None` for a stay (any blocked action realizes it).
    pub fn action_between(&self, from: StateId, to: StateId) -> Option<Action> {
        let (fr, fc) = self.cell_of(from);
        let (tr, tc) = self.cell_of(to);
        for action in Action::ALL {
            let (dr, dc) = action.delta();
            if fr as isize + dr == tr as isize && fc as isize + dc == tc as isize {
                return Some(action);
            }
        }
        None
    }

    /// Per-state reward vector from a feature field and a scorer.
    pub fn state_cells(&self) -> &[(usize, usize)] {
        &self.cell_of
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridMap;

    fn corridor() -> (GridMap, Mdp) {
        let map = GridMap::parse("####\n#AA#\n####\n\nA=hall,1,1\n").unwrap();
        let mdp = Mdp::build(&map);
        (map, mdp)
    }

    #[test]
    fn single_cell_all_self_loops() {
        let map = GridMap::parse("###\n#A#\n###\n\nA=room,1,1\n").unwrap();
        let mdp = Mdp::build(&map);
        assert_eq!(mdp.n_states(), 1);
        for a in Action::ALL {
            assert_eq!(mdp.step(StateId(0), a), StateId(0));
        }
    }

    #[test]
    fn corridor_moves_and_self_loops() {
        let (_, mdp) = corridor();
        assert_eq!(mdp.n_states(), 2);
        let left = mdp.state_at(1, 1).unwrap();
        let right = mdp.state_at(1, 2).unwrap();
        assert_eq!(mdp.step(left, Action::Right), right);
        assert_eq!(mdp.step(left, Action::Left), left);
        assert_eq!(mdp.step(left, Action::Up), left);
        assert_eq!(mdp.step(right, Action::Left), left);
    }

    #[test]
    fn state_ids_are_row_major() {
        let map = GridMap::parse("####\n#AA#\n#AA#\n####\n\nA=room,1,1\n").unwrap();
        let mdp = Mdp::build(&map);
        let cells: Vec<_> = mdp.states().map(|s| mdp.cell_of(s)).collect();
        assert_eq!(cells, vec![(1, 1), (1, 2), (2, 1), (2, 2)]);
    }

    #[test]
    fn out_of_range_state_rejected() {
        let (_, mdp) = corridor();
        assert_eq!(
            mdp.transition(StateId(9), Action::Up),
            Err(MdpError::InvalidState(9, 2))
        );
    }

    #[test]
    fn transitions_stay_in_bounds_and_connected() {
        let map =
            GridMap::parse("#####\n#AB##\n#ABB#\n#####\n\nA=west,1,1\nB=east,2,2\n").unwrap();
        let mdp = Mdp::build(&map);
        for s in mdp.states() {
            for a in Action::ALL {
                assert!(mdp.step(s, a).index() < mdp.n_states());
            }
        }
        // Every state reaches every other state (map connectivity).
        for start in mdp.states() {
            let mut seen = alloc::vec![false; mdp.n_states()];
            let mut queue = alloc::collections::VecDeque::new();
            seen[start.index()] = true;
            queue.push_back(start);
            while let Some(s) = queue.pop_front() {
                for a in Action::ALL {
                    let t = mdp.step(s, a);
                    if !seen[t.index()] {
                        seen[t.index()] = true;
                        queue.push_back(t);
                    }
                }
            }
            assert!(seen.iter().all(|&v| v));
        }
    }

    #[test]
    fn action_between_neighbors() {
        let (_, mdp) = corridor();
        let left = mdp.state_at(1, 1).unwrap();
        let right = mdp.state_at(1, 2).unwrap();
        assert_eq!(mdp.action_between(left, right), Some(Action::Right));
        assert_eq!(mdp.action_between(right, left), Some(Action::Left));
        assert_eq!(mdp.action_between(left, left), None);
    }
}
