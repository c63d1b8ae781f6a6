//! Movement-aware personalized lighting, as a library.
//!
//! The crate models a house as a 2-D cell grid, learns a resident's
//! movement reward from demonstrated trajectories (maximum-entropy
//! inverse reinforcement learning over the grid MDP), forecasts likely
//! future paths conditioned on goal rooms, and drives a zone-addressed
//! lighting state machine from simulated presence/recognition events.
//!
//! Everything here is deterministic given explicit seeds and runs
//! without the standard library (`alloc` is required); IO, the CLI and
//! the TCP lamp service live in the companion `lightcast` crate.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod forecast;
pub mod grid;
pub mod irl;
pub mod math;
pub mod mdp;
pub mod pipeline;
pub mod protocol;
pub mod rng;
pub mod traj;

pub use grid::{FeatureField, GridMap, MapError, Zone, ZoneId};
pub use mdp::{Action, GoalSpec, Mdp, MdpError, StateId};
pub use traj::Trajectory;
