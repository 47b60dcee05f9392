//! Notification threshold, advice window, and de-cascading.
//!
//! A recipient is notified when their total risk reaches `r_min` and is
//! advised to follow restrictions for 14 days. When a source later tests
//! negative, their pre-test contributions are zeroed and every affected
//! recipient is re-checked: only those whose revised total falls below
//! the threshold are released.

use serde::{Deserialize, Serialize};

use crate::risk::{RecipientLedger, RiskParams};
use crate::Minutes;

/// Length of the advice period following a notification.
pub const ADVICE_PERIOD: Minutes = 14 * 1440;

/// A recipient's notification status together with the risk ledger that
/// justifies it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NotificationState {
    pub recipient_id: String,
    pub notified_at: Option<Minutes>,
    pub advice_until: Option<Minutes>,
    pub ledger: RecipientLedger,
}

impl NotificationState {
    pub fn new(ledger: RecipientLedger) -> Self {
        NotificationState {
            recipient_id: ledger.recipient_id.clone(),
            notified_at: None,
            advice_until: None,
            ledger,
        }
    }

    /// Marks the recipient notified at `now`, starting the 14-day clock.
    pub fn mark_notified(&mut self, now: Minutes) {
        self.notified_at = Some(now);
        self.advice_until = Some(now + ADVICE_PERIOD);
    }

    /// Clears the notification (release after a de-cascade).
    pub fn clear_notification(&mut self) {
        self.notified_at = None;
        self.advice_until = None;
    }

    pub fn is_notified(&self) -> bool {
        self.notified_at.is_some()
    }
}

/// A source's negative test result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegativeTestEvent {
    pub source_id: String,
    pub test_time: Minutes,
}

/// What a de-cascade did to one recipient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    /// Previously notified; revised total dropped below the threshold.
    Released,
    /// Previously notified; revised total still meets the threshold.
    StillNotified,
    /// Not notified to begin with; contribution zeroed anyway.
    Unaffected,
}

/// One line of the de-cascade outcome stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecascadeRecord {
    pub recipient_id: String,
    pub outcome: Outcome,
    pub old_total: f64,
    pub new_total: f64,
    pub cause_source_id: String,
    pub test_time: Minutes,
}

/// True iff the ledger total reaches the notification threshold.
pub fn should_notify(ledger: &RecipientLedger, params: &RiskParams) -> bool {
    ledger.total >= params.r_min
}

/// True while the advice window is running: `[notified_at, +14 days)`.
pub fn advice_active(state: &NotificationState, now: Minutes) -> bool {
    match (state.notified_at, state.advice_until) {
        (Some(from), Some(until)) => now >= from && now < until,
        _ => false,
    }
}

/// Applies a negative test to every state whose ledger holds pre-test
/// contributions from the tested source. Those contributions are zeroed,
/// totals recomputed, and previously notified recipients are released
/// exactly when their revised total falls below `r_min`. States without
/// such contributions are untouched and absent from the result; an
/// unknown source therefore yields an empty record list.
///
/// The per-state update is pure arithmetic with no failure point, so the
/// batch always applies in full.
pub fn decascade(
    states: &mut [NotificationState],
    negative: &NegativeTestEvent,
    params: &RiskParams,
) -> Vec<DecascadeRecord> {
    let mut records = Vec::new();
    for state in states.iter_mut() {
        let Some(entry) = state.ledger.per_source.get_mut(&negative.source_id) else {
            continue;
        };
        if !entry
            .events
            .iter()
            .any(|e| e.start_time < negative.test_time)
        {
            continue;
        }
        let old_total = state.ledger.total;
        for event in &mut entry.events {
            if event.start_time < negative.test_time {
                event.risk = 0.0;
            }
        }
        entry.risk = entry.events.iter().map(|e| e.risk).sum();
        state.ledger.recompute_total();

        let outcome = if state.is_notified() {
            if state.ledger.total < params.r_min {
                state.clear_notification();
                Outcome::Released
            } else {
                Outcome::StillNotified
            }
        } else {
            Outcome::Unaffected
        };
        records.push(DecascadeRecord {
            recipient_id: state.recipient_id.clone(),
            outcome,
            old_total,
            new_total: state.ledger.total,
            cause_source_id: negative.source_id.clone(),
            test_time: negative.test_time,
        });
    }
    records
}
