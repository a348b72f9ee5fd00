//! Bouncing solutions of the weakly singular repulsive oscillator
//!
//! ```text
//! u'' - 1/u^a = p(t),   0 < a < 1,   p 2pi-periodic and negative,
//! ```
//!
//! where solutions reach `u = 0` in finite time with finite speed and are
//! continued by elastic reflection.
//!
//! * [`potential`]: the autonomous power-law potential and its monotonicity criteria.
//! * [`period`]: the extended period function of the autonomous system.
//! * [`integrator`]: forced integration with regularized collisions.
//! * [`successor`]: the collision-to-collision section map and its diagnostics.
//! * [`finder`]: `2m pi`-periodic bouncing solutions with exactly `n` impacts.
//! * [`cli`]: the `bounce` command-line front end.

// `!(x > 0.0)` is the idiom for validation that must also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod finder;
pub mod integrator;
pub mod io;
pub mod period;
pub mod potential;
pub mod quad;
pub mod roots;
pub mod successor;
pub mod suites;

pub use error::{Error, Result};
