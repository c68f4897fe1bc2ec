//! Online strongly convex optimization with unknown feedback delays.
//!
//! The crate is organized bottom-up:
//!
//! - [`geometry`]: decision vectors, Euclidean balls and projection.
//! - [`losses`]: loss oracles, the random quadratic family, offline comparators.
//! - [`delay_sim`]: delay schedules, arrival sets and the feedback buffer.
//! - [`estimators`]: (n+1)-point and two-point gradient estimators.
//! - [`learners`]: OGD-SC, DOGD, DOGD-SC and the bandit learners.
//! - [`harness`]: seeded experiment runs, regret ledgers and CSV output.

pub mod delay_sim;
pub mod error;
pub mod estimators;
pub mod geometry;
pub mod harness;
pub mod learners;
pub mod losses;

pub use error::{Error, Result};
