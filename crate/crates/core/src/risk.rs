//! Per-event and aggregated transmission risk scores.
//!
//! A contact event's risk factorises as
//! `alpha * c * D * I * delta_t`: the source weight, the context factor,
//! the distance factor `min(1, d_min^2/d^2)`, the Gaussian infectiousness
//! factor centred `mu0` days from symptom onset, and the duration in
//! minutes. Per-pair scores sum the events inside the reporting window and
//! per-recipient totals sum over sources.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{is_noon_marked, minutes_to_days, Minutes};

/// One recorded proximity interaction between a source and a recipient.
/// At least one of `distance` and `rssi` must be present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContactEvent {
    pub source_id: String,
    pub recipient_id: String,
    /// Absolute start time of the contact, minutes since epoch.
    #[serde(rename = "start_time_min")]
    pub start_time: Minutes,
    /// Duration in minutes, strictly positive.
    #[serde(rename = "duration_min")]
    pub duration: f64,
    /// Measured distance in metres, if available.
    #[serde(
        rename = "distance_m",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub distance: Option<f64>,
    /// Received signal strength in dBm, if available.
    #[serde(rename = "rssi_dbm", default, skip_serializing_if = "Option::is_none")]
    pub rssi: Option<f64>,
    /// Context adjustment (indoors, ventilation, ...); defaults to 1.
    #[serde(default = "one")]
    pub context_factor: f64,
}

fn one() -> f64 {
    1.0
}

impl ContactEvent {
    /// Collects invariant violations, prefixed with `path` for reporting.
    pub fn problems(&self, path: &str, into: &mut Vec<String>) {
        if self.duration <= 0.0 || !self.duration.is_finite() {
            into.push(format!(
                "{path}.duration_min: must be positive, got {}",
                self.duration
            ));
        }
        if self.distance.is_none() && self.rssi.is_none() {
            into.push(format!(
                "{path}: needs at least one of distance_m, rssi_dbm"
            ));
        }
        if let Some(d) = self.distance {
            if d <= 0.0 || !d.is_finite() {
                into.push(format!("{path}.distance_m: must be positive, got {d}"));
            }
        }
        if self.context_factor < 0.0 || !self.context_factor.is_finite() {
            into.push(format!(
                "{path}.context_factor: must be non-negative, got {}",
                self.context_factor
            ));
        }
    }
}

/// A symptomatic source's upload: onset and report times plus the recorded
/// contact events. `events` is empty when the report rides in a file that
/// carries events separately.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceReport {
    pub source_id: String,
    /// Symptom onset, marked to noon of the onset day.
    #[serde(rename = "symptom_onset_min")]
    pub symptom_onset_time: Minutes,
    /// Time the source reported symptoms to the system.
    #[serde(rename = "report_min")]
    pub report_time: Minutes,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub events: Vec<ContactEvent>,
    /// Source-attribute weighting; the deployed algorithm keeps this at 1.
    #[serde(default = "one")]
    pub source_weight: f64,
}

impl SourceReport {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        let path = format!("report[{}]", self.source_id);
        if !is_noon_marked(self.symptom_onset_time) {
            problems.push(format!(
                "{path}.symptom_onset_min: must be marked to noon of a day (mod 1440 == 720), got {}",
                self.symptom_onset_time
            ));
        }
        if self.source_weight < 0.0 || !self.source_weight.is_finite() {
            problems.push(format!(
                "{path}.source_weight: must be non-negative, got {}",
                self.source_weight
            ));
        }
        for (i, event) in self.events.iter().enumerate() {
            let event_path = format!("{path}.events[{i}]");
            if event.source_id != self.source_id {
                problems.push(format!(
                    "{event_path}.source_id: {} does not match report source {}",
                    event.source_id, self.source_id
                ));
            }
            // The source self-isolates after reporting, so no event may
            // start later than the report.
            if event.start_time > self.report_time {
                problems.push(format!(
                    "{event_path}.start_time_min: {} is after report_min {}",
                    event.start_time, self.report_time
                ));
            }
            event.problems(&event_path, &mut problems);
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation { problems })
        }
    }
}

/// All tunable constants of the scoring algorithm. Defaults are the
/// deployed values: `d_min` 1 m, Gaussian centre -0.3 days and width 2.75
/// days, a 7-day storage window, and threshold 1.83 (one 15-minute contact
/// at 2 metres, 3 days after onset).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskParams {
    /// Distance (metres) below which the distance factor saturates at 1.
    pub d_min: f64,
    /// Centre of the infectiousness Gaussian, days from symptom onset.
    pub mu0: f64,
    /// Width of the infectiousness Gaussian, days.
    pub sigma0: f64,
    /// Storage window before symptom onset, minutes. The deployed value
    /// is 7 days (10080); note this is distinct from the 14-day advice
    /// period, with which it is sometimes conflated.
    pub delta_t_max: Minutes,
    /// Notification threshold on the total risk score.
    pub r_min: f64,
    /// RSSI measured at `rssi_ref_distance`, dBm.
    pub rssi_ref: f64,
    /// Reference distance for `rssi_ref`, metres.
    pub rssi_ref_distance: f64,
    /// Log-distance path-loss exponent (2 = free space).
    pub path_loss_exponent: f64,
    /// Whether events after symptom onset contribute (the printed
    /// aggregation has no upper bound; the earlier bounded variant is kept
    /// behind this switch).
    pub include_post_onset_events: bool,
}

impl Default for RiskParams {
    fn default() -> Self {
        RiskParams {
            d_min: 1.0,
            mu0: -0.3,
            sigma0: 2.75,
            delta_t_max: 10_080,
            r_min: 1.83,
            rssi_ref: -59.0,
            rssi_ref_distance: 1.0,
            path_loss_exponent: 2.0,
            include_post_onset_events: true,
        }
    }
}

impl RiskParams {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        for (name, v) in [
            ("d_min", self.d_min),
            ("sigma0", self.sigma0),
            ("r_min", self.r_min),
            ("rssi_ref_distance", self.rssi_ref_distance),
            ("path_loss_exponent", self.path_loss_exponent),
        ] {
            if v <= 0.0 || !v.is_finite() {
                problems.push(format!(
                    "risk.{name}: must be a positive finite number, got {v}"
                ));
            }
        }
        if self.delta_t_max <= 0 {
            problems.push(format!(
                "risk.delta_t_max: must be positive, got {}",
                self.delta_t_max
            ));
        }
        if !self.mu0.is_finite() {
            problems.push(format!("risk.mu0: must be finite, got {}", self.mu0));
        }
        if !self.rssi_ref.is_finite() {
            problems.push(format!(
                "risk.rssi_ref: must be finite, got {}",
                self.rssi_ref
            ));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation { problems })
        }
    }
}

/// One event's contribution to a source->recipient risk entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventContribution {
    pub start_time: Minutes,
    pub risk: f64,
}

/// All of one source's contributions to a recipient.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SourceContribution {
    pub risk: f64,
    pub events: Vec<EventContribution>,
}

/// Per-recipient decomposition of risk by source. The decomposition is
/// what makes de-cascading possible: zeroing one source and re-summing
/// never has to re-score the others.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecipientLedger {
    pub recipient_id: String,
    pub per_source: BTreeMap<String, SourceContribution>,
    pub total: f64,
}

impl RecipientLedger {
    pub fn new(recipient_id: impl Into<String>) -> Self {
        RecipientLedger {
            recipient_id: recipient_id.into(),
            per_source: BTreeMap::new(),
            total: 0.0,
        }
    }

    /// Re-derives `total` from the per-source entries, in key order.
    pub fn recompute_total(&mut self) {
        self.total = self.per_source.values().map(|c| c.risk).sum();
    }
}

/// Distance factor `min(1, d_min^2 / d^2)`.
pub fn distance_factor(d: f64, params: &RiskParams) -> Result<f64> {
    if d <= 0.0 || !d.is_finite() {
        return Err(Error::param(format!("distance must be positive, got {d}")));
    }
    Ok((params.d_min * params.d_min / (d * d)).min(1.0))
}

/// Log-distance path-loss inversion: distance grows by one decade for
/// every `10 * path_loss_exponent` dB drop below the reference RSSI.
pub fn rssi_to_distance(rssi: f64, params: &RiskParams) -> f64 {
    params.rssi_ref_distance
        * 10f64.powf((params.rssi_ref - rssi) / (10.0 * params.path_loss_exponent))
}

/// Gaussian weight for an event offset in days from onset, scaled so the
/// maximum is 1 at `mu0`.
pub fn infectiousness_weight(delta_days: f64, params: &RiskParams) -> f64 {
    let z = (delta_days - params.mu0) / params.sigma0;
    (-0.5 * z * z).exp()
}

/// Infectiousness factor of an event given the (noon-marked) onset time.
pub fn infectiousness_factor(
    event_start: Minutes,
    symptom_onset: Minutes,
    params: &RiskParams,
) -> f64 {
    infectiousness_weight(minutes_to_days(event_start - symptom_onset), params)
}

/// The event's distance: the measured value wins over the RSSI model.
pub fn resolve_distance(event: &ContactEvent, params: &RiskParams) -> Result<f64> {
    if let Some(d) = event.distance {
        return Ok(d);
    }
    if let Some(rssi) = event.rssi {
        return Ok(rssi_to_distance(rssi, params));
    }
    Err(Error::data(format!(
        "event {} -> {} at {} has neither distance nor rssi",
        event.source_id, event.recipient_id, event.start_time
    )))
}

/// Risk of one contact event: `alpha * c * D * I * delta_t`.
pub fn event_risk(event: &ContactEvent, report: &SourceReport, params: &RiskParams) -> Result<f64> {
    if event.source_id != report.source_id {
        return Err(Error::data(format!(
            "event source {} does not belong to report {}",
            event.source_id, report.source_id
        )));
    }
    let d = resolve_distance(event, params)?;
    Ok(report.source_weight
        * event.context_factor
        * distance_factor(d, params)?
        * infectiousness_factor(event.start_time, report.symptom_onset_time, params)
        * event.duration)
}

/// True if the event falls inside the report's scoring window. The lower
/// bound is strict: an event exactly `delta_t_max` before onset is out.
fn in_window(event: &ContactEvent, report: &SourceReport, params: &RiskParams) -> bool {
    let after_cutoff = report.symptom_onset_time - params.delta_t_max < event.start_time;
    let before_bound =
        params.include_post_onset_events || event.start_time <= report.symptom_onset_time;
    after_cutoff && before_bound
}

/// In-window event contributions from `report` to `recipient`.
pub fn pair_contributions(
    report: &SourceReport,
    recipient: &str,
    params: &RiskParams,
) -> Result<Vec<EventContribution>> {
    report
        .events
        .iter()
        .filter(|e| e.recipient_id == recipient && in_window(e, report, params))
        .map(|e| {
            Ok(EventContribution {
                start_time: e.start_time,
                risk: event_risk(e, report, params)?,
            })
        })
        .collect()
}

/// Aggregated risk from one source to one recipient: the sum of in-window
/// event risks. Empty selection sums to 0.
pub fn pair_risk(report: &SourceReport, recipient: &str, params: &RiskParams) -> Result<f64> {
    Ok(pair_contributions(report, recipient, params)?
        .iter()
        .map(|c| c.risk)
        .sum())
}

/// Total risk for one recipient across all source reports, with the
/// per-source decomposition retained.
pub fn total_risk(
    reports: &[SourceReport],
    recipient: &str,
    params: &RiskParams,
) -> Result<RecipientLedger> {
    let mut seen = std::collections::BTreeSet::new();
    let mut ledger = RecipientLedger::new(recipient);
    for report in reports {
        if !seen.insert(&report.source_id) {
            return Err(Error::data(format!(
                "duplicate report for source {}",
                report.source_id
            )));
        }
        let events = pair_contributions(report, recipient, params)?;
        if !events.is_empty() {
            let risk = events.iter().map(|c| c.risk).sum();
            ledger.per_source.insert(
                report.source_id.clone(),
                SourceContribution { risk, events },
            );
        }
    }
    ledger.recompute_total();
    Ok(ledger)
}

/// Ledgers for every recipient named by any report.
pub fn score_all(
    reports: &[SourceReport],
    params: &RiskParams,
) -> Result<BTreeMap<String, RecipientLedger>> {
    let mut seen = std::collections::BTreeSet::new();
    for report in reports {
        if !seen.insert(&report.source_id) {
            return Err(Error::data(format!(
                "duplicate report for source {}",
                report.source_id
            )));
        }
    }
    let mut ledgers: BTreeMap<String, RecipientLedger> = BTreeMap::new();
    for report in reports {
        let mut recipients: Vec<&str> = report
            .events
            .iter()
            .map(|e| e.recipient_id.as_str())
            .collect();
        recipients.sort_unstable();
        recipients.dedup();
        for recipient in recipients {
            let events = pair_contributions(report, recipient, params)?;
            if events.is_empty() {
                continue;
            }
            let risk = events.iter().map(|c| c.risk).sum();
            let ledger = ledgers
                .entry(recipient.to_string())
                .or_insert_with(|| RecipientLedger::new(recipient));
            ledger.per_source.insert(
                report.source_id.clone(),
                SourceContribution { risk, events },
            );
        }
    }
    for ledger in ledgers.values_mut() {
        ledger.recompute_total();
    }
    Ok(ledgers)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn event(
        source: &str,
        recipient: &str,
        start: Minutes,
        duration: f64,
        distance: f64,
    ) -> ContactEvent {
        ContactEvent {
            source_id: source.into(),
            recipient_id: recipient.into(),
            start_time: start,
            duration,
            distance: Some(distance),
            rssi: None,
            context_factor: 1.0,
        }
    }

    pub(crate) fn report(source: &str, onset: Minutes, events: Vec<ContactEvent>) -> SourceReport {
        SourceReport {
            source_id: source.into(),
            symptom_onset_time: onset,
            report_time: onset + 2 * 1440,
            events,
            source_weight: 1.0,
        }
    }

    const NOON: Minutes = 720;

    #[test]
    fn distance_factor_values() {
        let p = RiskParams::default();
        assert_eq!(distance_factor(1.0, &p).unwrap(), 1.0);
        assert_eq!(distance_factor(2.0, &p).unwrap(), 0.25);
        assert_eq!(distance_factor(0.5, &p).unwrap(), 1.0);
        assert!(distance_factor(0.0, &p).is_err());
        assert!(distance_factor(-1.0, &p).is_err());
    }

    #[test]
    fn rssi_model_reference_points() {
        let p = RiskParams::default();
        assert!((rssi_to_distance(p.rssi_ref, &p) - p.rssi_ref_distance).abs() < 1e-12);
        let one_decade = rssi_to_distance(p.rssi_ref - 10.0 * p.path_loss_exponent, &p);
        assert!((one_decade - 10.0 * p.rssi_ref_distance).abs() < 1e-9);
        assert!(rssi_to_distance(-70.0, &p) > rssi_to_distance(-69.0, &p));
    }

    #[test]
    fn infectiousness_peak_and_sigma() {
        let p = RiskParams::default();
        // Delta of -0.3 days = -432 minutes from onset.
        assert_eq!(infectiousness_factor(NOON - 432, NOON, &p), 1.0);
        let one_sigma = NOON - 432 + (2.75 * 1440.0) as Minutes;
        assert!((infectiousness_factor(one_sigma, NOON, &p) - (-0.5f64).exp()).abs() < 1e-9);
        // Hand-evaluated: ((3 + 0.3) / 2.75)^2 = 1.44, exp(-0.72).
        let three_days = NOON + 3 * 1440;
        assert!((infectiousness_factor(three_days, NOON, &p) - (-0.72f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn event_risk_phe_calibration() {
        // 15 minutes at 2 metres, 3 days after onset: the threshold case.
        let p = RiskParams::default();
        let r = report("s", NOON, vec![event("s", "r", NOON + 3 * 1440, 15.0, 2.0)]);
        let risk = event_risk(&r.events[0], &r, &p).unwrap();
        assert!((risk - 1.83).abs() < 0.005, "risk {risk}");
    }

    #[test]
    fn event_risk_annihilator_and_max() {
        let p = RiskParams::default();
        let mut r = report("s", NOON, vec![event("s", "r", NOON, 15.0, 2.0)]);
        r.events[0].context_factor = 0.0;
        assert_eq!(event_risk(&r.events[0], &r, &p).unwrap(), 0.0);

        // All factors at maximum, unit duration.
        let peak = NOON - 432;
        let r = report("s", NOON, vec![event("s", "r", peak, 1.0, 1.0)]);
        assert_eq!(event_risk(&r.events[0], &r, &p).unwrap(), 1.0);
    }

    #[test]
    fn event_risk_requires_distance_source() {
        let p = RiskParams::default();
        let mut e = event("s", "r", NOON, 15.0, 2.0);
        e.distance = None;
        let r = report("s", NOON, vec![e]);
        assert!(matches!(
            event_risk(&r.events[0], &r, &p),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn explicit_distance_wins_over_rssi() {
        let p = RiskParams::default();
        let mut e = event("s", "r", NOON, 15.0, 2.0);
        e.rssi = Some(p.rssi_ref); // would resolve to 1 m
        assert_eq!(resolve_distance(&e, &p).unwrap(), 2.0);
    }

    #[test]
    fn pair_risk_window_boundary() {
        let p = RiskParams::default();
        let onset = NOON + 100 * 1440;
        // Exactly delta_t_max before onset: excluded by the strict bound.
        let boundary = onset - p.delta_t_max;
        let r = report("s", onset, vec![event("s", "r", boundary, 15.0, 1.0)]);
        assert_eq!(pair_risk(&r, "r", &p).unwrap(), 0.0);
        // One minute later: included.
        let r = report("s", onset, vec![event("s", "r", boundary + 1, 15.0, 1.0)]);
        assert!(pair_risk(&r, "r", &p).unwrap() > 0.0);
    }

    #[test]
    fn pair_risk_post_onset_switch() {
        let mut p = RiskParams::default();
        let r = report("s", NOON, vec![event("s", "r", NOON + 1440, 15.0, 1.0)]);
        assert!(pair_risk(&r, "r", &p).unwrap() > 0.0);
        p.include_post_onset_events = false;
        assert_eq!(pair_risk(&r, "r", &p).unwrap(), 0.0);
        // Events at or before onset still count under the bounded variant.
        let r = report("s", NOON, vec![event("s", "r", NOON, 15.0, 1.0)]);
        assert!(pair_risk(&r, "r", &p).unwrap() > 0.0);
    }

    #[test]
    fn pair_risk_sums_matching_events() {
        let p = RiskParams::default();
        let peak = NOON - 432;
        let r = report(
            "s",
            NOON,
            vec![
                event("s", "r", peak, 1.0, 1.0),
                event("s", "r", peak, 1.0, 1.0),
                event("s", "other", peak, 1.0, 1.0),
            ],
        );
        assert_eq!(pair_risk(&r, "r", &p).unwrap(), 2.0);
        assert_eq!(pair_risk(&r, "nobody", &p).unwrap(), 0.0);
    }

    #[test]
    fn total_risk_aggregates_sources() {
        let p = RiskParams::default();
        let peak = NOON - 432;
        let reports = vec![
            report("s1", NOON, vec![event("s1", "r", peak, 1.0, 1.0)]),
            report("s2", NOON, vec![event("s2", "r", peak, 0.9, 1.0)]),
        ];
        let ledger = total_risk(&reports, "r", &p).unwrap();
        assert!((ledger.total - 1.9).abs() < 1e-12);
        assert_eq!(ledger.per_source.len(), 2);
        // Recomputing per source independently matches the ledger.
        let sum: f64 = reports.iter().map(|r| pair_risk(r, "r", &p).unwrap()).sum();
        assert_eq!(ledger.total, sum);

        let empty = total_risk(&[], "r", &p).unwrap();
        assert_eq!(empty.total, 0.0);
    }

    #[test]
    fn duplicate_sources_rejected() {
        let p = RiskParams::default();
        let reports = vec![report("s", NOON, vec![]), report("s", NOON, vec![])];
        assert!(matches!(total_risk(&reports, "r", &p), Err(Error::Data(_))));
        assert!(matches!(score_all(&reports, &p), Err(Error::Data(_))));
    }

    #[test]
    fn score_all_matches_total_risk() {
        let p = RiskParams::default();
        let peak = NOON - 432;
        let reports = vec![
            report(
                "s1",
                NOON,
                vec![
                    event("s1", "a", peak, 2.0, 1.0),
                    event("s1", "b", peak, 3.0, 2.0),
                ],
            ),
            report("s2", NOON, vec![event("s2", "a", peak, 5.0, 1.5)]),
        ];
        let ledgers = score_all(&reports, &p).unwrap();
        for recipient in ["a", "b"] {
            let direct = total_risk(&reports, recipient, &p).unwrap();
            assert_eq!(ledgers[recipient], direct);
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn params() -> RiskParams {
            RiskParams::default()
        }

        proptest! {
            #[test]
            fn doubling_duration_doubles_risk_exactly(
                duration in 0.1f64..500.0,
                distance in 0.1f64..10.0,
                offset in -10_000i64..10_000,
            ) {
                let p = params();
                let e = event("s", "r", NOON + offset, duration, distance);
                let mut doubled = e.clone();
                doubled.duration = 2.0 * duration;
                let r = report("s", NOON, vec![e]);
                let single = event_risk(&r.events[0], &r, &p).unwrap();
                prop_assert_eq!(event_risk(&doubled, &r, &p).unwrap(), 2.0 * single);
            }

            #[test]
            fn risk_is_non_increasing_in_distance(
                d1 in 0.1f64..10.0,
                extra in 0.001f64..10.0,
                duration in 0.1f64..500.0,
            ) {
                let p = params();
                let near = event("s", "r", NOON, duration, d1);
                let far = event("s", "r", NOON, duration, d1 + extra);
                let r = report("s", NOON, vec![near.clone()]);
                prop_assert!(
                    event_risk(&far, &r, &p).unwrap() <= event_risk(&near, &r, &p).unwrap()
                );
            }

            #[test]
            fn infectiousness_peaks_at_mu0(offset_days in -20.0f64..20.0) {
                let p = params();
                let at_peak = infectiousness_weight(p.mu0, &p);
                prop_assert!(infectiousness_weight(offset_days, &p) <= at_peak);
                prop_assert_eq!(at_peak, 1.0);
            }

            #[test]
            fn context_scaling_preserves_recipient_order(
                c1 in proptest::collection::vec(0.0f64..3.0, 1..4),
                c2 in proptest::collection::vec(0.0f64..3.0, 1..4),
            ) {
                // Scaling every context factor by a power of two scales
                // each score exactly, so the ordering cannot move.
                let p = params();
                let build = |cs: &[f64], recipient: &str, scale: f64| {
                    let events = cs
                        .iter()
                        .map(|&c| {
                            let mut e = event("s", recipient, NOON, 10.0, 1.5);
                            e.context_factor = c * scale;
                            e
                        })
                        .collect();
                    report("s", NOON, events)
                };
                let k = 4.0;
                let a1 = pair_risk(&build(&c1, "a", 1.0), "a", &p).unwrap();
                let b1 = pair_risk(&build(&c2, "b", 1.0), "b", &p).unwrap();
                let a2 = pair_risk(&build(&c1, "a", k), "a", &p).unwrap();
                let b2 = pair_risk(&build(&c2, "b", k), "b", &p).unwrap();
                prop_assert_eq!(a2, k * a1);
                prop_assert_eq!(b2, k * b1);
                prop_assert_eq!(a1.total_cmp(&b1), a2.total_cmp(&b2));
            }

            #[test]
            fn window_boundary_is_strict(offset in 0i64..20_000) {
                let p = params();
                let onset = NOON + 100 * 1440;
                let start = onset - p.delta_t_max - offset;
                let r = report("s", onset, vec![event("s", "r", start, 10.0, 1.0)]);
                prop_assert_eq!(pair_risk(&r, "r", &p).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn report_validation_catches_problems() {
        let mut r = report("s", NOON, vec![event("s", "r", NOON, 15.0, 2.0)]);
        r.symptom_onset_time = 0; // not noon-marked
        r.events[0].duration = -3.0;
        r.events[0].start_time = r.report_time + 1;
        let err = r.validate().unwrap_err();
        match err {
            Error::Validation { problems } => {
                assert_eq!(problems.len(), 3, "{problems:?}");
                assert!(problems.iter().any(|p| p.contains("symptom_onset_min")));
                assert!(problems.iter().any(|p| p.contains("duration_min")));
                assert!(problems.iter().any(|p| p.contains("after report_min")));
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }
}
