//! Ruin probabilities for the degenerate two-dimensional risk process
//! `X_i(t) = x_i + p_i t - S(t)`, `p1 > p2`, driven by one claim process `S`.
//!
//! Three families of estimates are provided for the events "at least one line
//! ruined" (OR), "both negative at the same time" (SIM) and "both ruined,
//! possibly at different times" (AND):
//!
//! * exact values from one-dimensional finite-time ruin under tilted measures,
//! * two-term and leading-order asymptotics along rays `(aK, K)`,
//! * Monte Carlo with exact event-driven paths and exponential tilting.

pub mod cli;
pub mod cones;
pub mod error;
pub mod finite_time;
pub mod models;
pub mod montecarlo;
pub mod numerics;
pub mod twodim;

pub use error::{Result, RuinError};
pub use models::{ClaimDriver, Distribution, LineModel, TwoLineModel};
