//! Probabilistic reading of the risk score.
//!
//! Each event's score `rho` is the exponent for which the probability of
//! escaping infection from that event is `nu^rho`, with `nu` a base
//! parameter in (0,1). Under pairwise independence the infection
//! probability for a recipient is `1 - nu^(sum of rho)`. While the
//! recipient stays symptom-free the conditional infection probability
//! decays, governed by `G`, the CDF of generation + incubation: an
//! infecting contact at `t_E` produces symptoms by `t` with probability
//! `G(t - t_E)`.

use serde::{Deserialize, Serialize};

use crate::distributions::SumCdf;
use crate::error::{Error, Result};
use crate::{minutes_to_days, Minutes, MINUTES_PER_DAY};

/// Parameters of the probabilistic model: the base survival parameter,
/// the probability-space notification threshold, and the symptom CDF.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbParams {
    nu: f64,
    p_min: f64,
    sum_cdf: SumCdf,
}

impl ProbParams {
    pub fn new(nu: f64, p_min: f64, sum_cdf: SumCdf) -> Result<Self> {
        if !(nu > 0.0 && nu < 1.0) {
            return Err(Error::param(format!("nu must be in (0, 1), got {nu}")));
        }
        if !(p_min > 0.0 && p_min < 1.0) {
            return Err(Error::param(format!(
                "p_min must be in (0, 1), got {p_min}"
            )));
        }
        Ok(ProbParams { nu, p_min, sum_cdf })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn p_min(&self) -> f64 {
        self.p_min
    }

    pub fn sum_cdf(&self) -> &SumCdf {
        &self.sum_cdf
    }
}

/// One scored contact event seen from the recipient's side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExposureEvent {
    /// Absolute event time, minutes since epoch.
    pub event_time: Minutes,
    /// Exposure exponent, estimated by the event's risk score.
    pub rho: f64,
}

/// A recipient's exposure history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecipientExposure {
    pub recipient_id: String,
    pub events: Vec<ExposureEvent>,
}

impl RecipientExposure {
    pub fn total_rho(&self) -> f64 {
        self.events.iter().map(|e| e.rho).sum()
    }

    fn debug_check(&self) {
        debug_assert!(
            self.events.iter().all(|e| e.rho >= 0.0),
            "exposure exponents must be non-negative"
        );
    }
}

/// `P(infected) = 1 - nu^(total rho)`.
pub fn infection_probability(exposure: &RecipientExposure, params: &ProbParams) -> f64 {
    exposure.debug_check();
    1.0 - params.nu.powf(exposure.total_rho())
}

/// Probability-space notification: infection probability at least `p_min`,
/// which bounds the false-positive probability by `1 - p_min`.
pub fn prob_notify(exposure: &RecipientExposure, params: &ProbParams) -> bool {
    infection_probability(exposure, params) >= params.p_min
}

/// Decay of a single event's infection probability while no symptoms have
/// appeared: `p (1-g) / (1 - p g)` for initial probability `p` and symptom
/// CDF value `g`.
pub fn single_event_decay(initial_probability: f64, g: f64) -> f64 {
    initial_probability * (1.0 - g) / (1.0 - initial_probability * g)
}

/// `P(infected | no symptoms by t)` for a multi-event exposure:
///
/// ```text
/// [1 - prod_n (1 - (1 - G_n)(1 - nu^rho_n))] / [1 - sum_n G_n (1 - nu^rho_n)]
/// ```
///
/// with `G_n = G(t - t_n)`. The denominator truncates an
/// inclusion-exclusion expansion at first order; for many events with
/// large per-event probabilities it can leave `[0, 1]` or turn
/// non-positive, in which case the pairwise-independence approximation has
/// broken down and a model-validity error is returned rather than a
/// silently clamped value.
pub fn symptom_free_infection_probability(
    exposure: &RecipientExposure,
    t: Minutes,
    params: &ProbParams,
) -> Result<f64> {
    exposure.debug_check();
    let mut survival_product = 1.0;
    let mut symptom_mass = 0.0;
    for event in &exposure.events {
        let g = params.sum_cdf.eval(minutes_to_days(t - event.event_time));
        let p = 1.0 - params.nu.powf(event.rho);
        survival_product *= 1.0 - (1.0 - g) * p;
        symptom_mass += g * p;
    }
    let denominator = 1.0 - symptom_mass;
    if denominator <= 0.0 {
        return Err(Error::ModelValidity(format!(
            "symptom-free denominator {denominator:.6} <= 0 for recipient {}: \
             the pairwise-independence approximation does not hold for this exposure",
            exposure.recipient_id
        )));
    }
    let value = (1.0 - survival_product) / denominator;
    if value > 1.0 + 1e-12 {
        return Err(Error::ModelValidity(format!(
            "symptom-free probability {value:.6} > 1 for recipient {}: \
             the pairwise-independence approximation does not hold for this exposure",
            exposure.recipient_id
        )));
    }
    Ok(value.min(1.0))
}

/// Smallest grid-aligned time at which the symptom-free infection
/// probability drops strictly below `threshold`. The scan walks the sum
/// CDF grid offset from the latest event; if the probability plateaus
/// above the threshold at the grid horizon, a horizon error is returned.
pub fn release_time(
    exposure: &RecipientExposure,
    threshold: f64,
    params: &ProbParams,
) -> Result<Minutes> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::param(format!(
            "release threshold must be in (0, 1), got {threshold}"
        )));
    }
    let Some(last_event) = exposure.events.iter().map(|e| e.event_time).max() else {
        return Err(Error::param(
            "release time needs at least one exposure event",
        ));
    };
    let initial = symptom_free_infection_probability(exposure, last_event, params)?;
    if threshold >= initial {
        return Ok(last_event);
    }
    for &offset_days in &params.sum_cdf.grid_times()[1..] {
        let t = last_event + (offset_days * MINUTES_PER_DAY).round() as Minutes;
        if symptom_free_infection_probability(exposure, t, params)? < threshold {
            return Ok(t);
        }
    }
    Err(Error::Horizon(format!(
        "probability never drops below {threshold} within {} days of the last event",
        params.sum_cdf.horizon_days()
    )))
}
