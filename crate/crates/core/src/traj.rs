//! Demonstration and sampled trajectories, plus their text codec.
//!
//! One trajectory per line:
//!
//! ```text
//! <id>,<goal_zone>,<r1>,<c1>,<a1>,...,<rm>,<cm>,<am>,<r_end>,<c_end>
//! ```
//!
//! Each visited cell contributes `row,col,action-letter` (U/D/L/R); the
//! trailing `row,col` pair is the landing cell after the final action.
//! A zero-step trajectory is `<id>,<goal_zone>,<row>,<col>`. The goal
//! zone field may be empty for untagged trajectories.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

use crate::grid::{GridMap, ZoneId};
use crate::mdp::{Action, Mdp, StateId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TrajError {
    #[error("trajectory line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("inconsistent trajectory at step {step}: {reason}")]
    Inconsistent { step: usize, reason: String },
}

/// A sequence of `(state, action)` steps plus the landing state.
///
/// `states.len() == actions.len() + 1` and every consecutive pair obeys
/// the MDP transition table, so self-loop (blocked) steps are legal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    states: Vec<StateId>,
    actions: Vec<Action>,
    pub goal_zone: Option<ZoneId>,
}

impl Trajectory {
    pub fn new(
        states: Vec<StateId>,
        actions: Vec<Action>,
        goal_zone: Option<ZoneId>,
        mdp: &Mdp,
    ) -> Result<Self, TrajError> {
        if states.is_empty() || states.len() != actions.len() + 1 {
            return Err(TrajError::Inconsistent {
                step: 0,
                reason: "need exactly one more state than actions".to_string(),
            });
        }
        for (i, s) in states.iter().enumerate() {
            if s.index() >= mdp.n_states() {
                return Err(TrajError::Inconsistent {
                    step: i,
                    reason: format!("state id {} out of range", s.0),
                });
            }
        }
        for (i, (&s, &a)) in states.iter().zip(actions.iter()).enumerate() {
            let next = mdp.step(s, a);
            if next != states[i + 1] {
                return Err(TrajError::Inconsistent {
                    step: i + 1,
                    reason: format!(
                        "state {} does not follow from ({}, {:?})",
                        states[i + 1].0,
                        s.0,
                        a
                    ),
                });
            }
        }
        Ok(Trajectory {
            states,
            actions,
            goal_zone,
        })
    }

    /// Build from a start state and action sequence.
    pub fn from_actions(
        start: StateId,
        actions: Vec<Action>,
        goal_zone: Option<ZoneId>,
        mdp: &Mdp,
    ) -> Result<Self, TrajError> {
        let mut states = Vec::with_capacity(actions.len() + 1);
        states.push(start);
        for &a in &actions {
            let s = *states.last().unwrap();
            if s.index() >= mdp.n_states() {
                return Err(TrajError::Inconsistent {
                    step: states.len() - 1,
                    reason: format!("state id {} out of range", s.0),
                });
            }
            states.push(mdp.step(s, a));
        }
        Self::new(states, actions, goal_zone, mdp)
    }

    /// Number of actions taken.
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn start(&self) -> StateId {
        self.states[0]
    }

    /// Landing state; for demonstrations this is the goal.
    pub fn end(&self) -> StateId {
        *self.states.last().unwrap()
    }

    /// All visited states including the landing state.
    pub fn states(&self) -> &[StateId] {
        &self.states
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    /// `(state, action)` pairs, one per step.
    pub fn steps(&self) -> impl Iterator<Item = (StateId, Action)> + '_ {
        self.states.iter().copied().zip(self.actions.iter().copied())
    }

    /// Cell centers `(x, y)` of all visited states, in cell units.
    pub fn points(&self, mdp: &Mdp) -> Vec<(f64, f64)> {
        self.states
            .iter()
            .map(|&s| {
                let (r, c) = mdp.cell_of(s);
                (c as f64, r as f64)
            })
            .collect()
    }

    /// Encode as one codec line (without trailing newline).
    pub fn encode_line(&self, id: u64, map: &GridMap, mdp: &Mdp) -> String {
        let zone = self
            .goal_zone
            .map(|z| map.zone(z).name.clone())
            .unwrap_or_default();
        let mut out = format!("{id},{zone}");
        for (s, a) in self.steps() {
            let (r, c) = mdp.cell_of(s);
            out.push_str(&format!(",{r},{c},{}", a.letter()));
        }
        let (r, c) = mdp.cell_of(self.end());
        out.push_str(&format!(",{r},{c}"));
        out
    }

    /// Decode one codec line.
    pub fn decode_line(
        line: &str,
        line_no: usize,
        map: &GridMap,
        mdp: &Mdp,
    ) -> Result<(u64, Trajectory), TrajError> {
        let parse_err = |reason: String| TrajError::Parse {
            line: line_no,
            reason,
        };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < 4 {
            return Err(parse_err("expected id, zone and at least one cell".to_string()));
        }
        let id: u64 = fields[0]
            .parse()
            .map_err(|_| parse_err(format!("bad trajectory id '{}'", fields[0])))?;
        let goal_zone = if fields[1].is_empty() {
            None
        } else {
            Some(
                map.zone_named(fields[1])
                    .ok_or_else(|| parse_err(format!("unknown goal zone '{}'", fields[1])))?
                    .id,
            )
        };
        let rest = &fields[2..];
        if rest.len() % 3 != 2 {
            return Err(parse_err(
                "cell fields must be row,col,action triples plus a final row,col".to_string(),
            ));
        }
        let state_of = |r: &str, c: &str| -> Result<StateId, TrajError> {
            let row: usize = r.parse().map_err(|_| parse_err(format!("bad row '{r}'")))?;
            let col: usize = c.parse().map_err(|_| parse_err(format!("bad col '{c}'")))?;
            mdp.state_at(row, col)
                .ok_or_else(|| parse_err(format!("cell ({row},{col}) is not traversable")))
        };
        let steps = rest.len() / 3;
        let mut states = Vec::with_capacity(steps + 1);
        let mut actions = Vec::with_capacity(steps);
        for i in 0..steps {
            states.push(state_of(rest[3 * i], rest[3 * i + 1])?);
            let a = rest[3 * i + 2];
            let mut chars = a.chars();
            let letter = chars.next().unwrap_or(' ');
            if chars.next().is_some() {
                return Err(parse_err(format!("bad action '{a}'")));
            }
            actions.push(
                Action::from_letter(letter)
                    .ok_or_else(|| parse_err(format!("bad action '{a}'")))?,
            );
        }
        states.push(state_of(rest[rest.len() - 2], rest[rest.len() - 1])?);
        let traj = Trajectory::new(states, actions, goal_zone, mdp)?;
        Ok((id, traj))
    }
}

/// Encode trajectories to file contents, one line each, trailing newline.
pub fn encode_file(trajs: &[(u64, Trajectory)], map: &GridMap, mdp: &Mdp) -> String {
    let mut out = String::new();
    for (id, t) in trajs {
        out.push_str(&t.encode_line(*id, map, mdp));
        out.push('\n');
    }
    out
}

/// Decode file contents produced by [`encode_file`].
pub fn decode_file(
    text: &str,
    map: &GridMap,
    mdp: &Mdp,
) -> Result<Vec<(u64, Trajectory)>, TrajError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| Trajectory::decode_line(l, i, map, mdp))
        .collect()
}
