//! Standard-library companion to `lightcast-core`: file formats and
//! atomic artifact IO, synthetic demonstration generation, the TCP lamp
//! service, and the operational self-check suites.

pub mod files;
pub mod gen;
pub mod lamp;
pub mod rewardspec;
pub mod selfcheck;

pub use lightcast_core as core;
