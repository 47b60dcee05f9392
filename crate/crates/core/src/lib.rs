//! Contact-event risk scoring for exposure notification.
//!
//! The crate computes per-event transmission risk scores from proximity
//! contact events, aggregates them into per-recipient totals, applies the
//! notification threshold and the de-cascading protocol for negative test
//! results, and reinterprets the scores probabilistically: each event's
//! score is an exponent `rho` such that the probability of escaping
//! infection is `nu^rho`. On top of that sit the symptom-free decay
//! probability (how the infection probability falls while no symptoms
//! appear) and Bayesian estimation of the base parameter `nu` from
//! observed outcomes.
//!
//! All absolute times are integer minutes since the Unix epoch; durations
//! and windows are minutes; epidemiological distributions work in days.

pub mod config;
pub mod distributions;
pub mod error;
pub mod inference;
pub mod notifier;
pub mod prob;
pub mod risk;
pub mod store;

pub use error::{Error, Result};

/// Absolute time or duration in minutes. Absolute values count from the
/// Unix epoch; day boundaries fall on multiples of `1440`.
pub type Minutes = i64;

/// Minutes per day, as used for every minute/day conversion.
pub const MINUTES_PER_DAY: f64 = 1440.0;

/// Converts a minute difference to a real-valued day difference.
pub fn minutes_to_days(delta: Minutes) -> f64 {
    delta as f64 / MINUTES_PER_DAY
}

/// Noon of the day containing `t`, used for symptom-onset marking.
pub fn noon_of_day(t: Minutes) -> Minutes {
    t.div_euclid(1440) * 1440 + 720
}

/// True if `t` is marked to noon of some day.
pub fn is_noon_marked(t: Minutes) -> bool {
    t.rem_euclid(1440) == 720
}
