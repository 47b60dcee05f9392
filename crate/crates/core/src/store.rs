//! Journal-backed event store.
//!
//! The append-only journal of ingest and de-cascade operations is the
//! source of truth; reports, ledgers, and notification times are
//! materializations that replaying the journal reproduces exactly.
//! Journal timestamps come from the operations themselves (report time,
//! test time), never from a wall clock, so stores are fully deterministic.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::notifier::{self, DecascadeRecord, NegativeTestEvent, NotificationState};
use crate::risk::{self, RecipientLedger, RiskParams, SourceReport};
use crate::Minutes;

/// A journaled operation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", content = "payload", rename_all = "lowercase")]
pub enum JournalOp {
    Ingest(SourceReport),
    Decascade(NegativeTestEvent),
}

/// One journal line: the operation plus its logical timestamp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JournalEntry {
    #[serde(flatten)]
    pub op: JournalOp,
    pub ts: Minutes,
}

/// In-memory store with an append-only journal.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventStore {
    reports: BTreeMap<String, SourceReport>,
    ledgers: BTreeMap<String, RecipientLedger>,
    /// Recipients currently under notification, with the journal time at
    /// which the threshold was crossed.
    notified: BTreeMap<String, Minutes>,
    journal: Vec<JournalEntry>,
}

impl EventStore {
    pub fn new() -> Self {
        EventStore::default()
    }

    pub fn reports(&self) -> &BTreeMap<String, SourceReport> {
        &self.reports
    }

    pub fn ledgers(&self) -> &BTreeMap<String, RecipientLedger> {
        &self.ledgers
    }

    pub fn notified(&self) -> &BTreeMap<String, Minutes> {
        &self.notified
    }

    pub fn journal(&self) -> &[JournalEntry] {
        &self.journal
    }

    /// Validates and ingests a report, incrementally updating the ledgers
    /// of every recipient it touches. Returns the touched recipient ids.
    pub fn ingest_report(
        &mut self,
        report: SourceReport,
        params: &RiskParams,
    ) -> Result<Vec<String>> {
        report.validate()?;
        if self.reports.contains_key(&report.source_id) {
            return Err(Error::data(format!(
                "report for source {} already ingested",
                report.source_id
            )));
        }
        let ts = report.report_time;
        let updated = self.apply_ingest(&report, ts, params)?;
        self.journal.push(JournalEntry {
            op: JournalOp::Ingest(report),
            ts,
        });
        Ok(updated)
    }

    /// Applies a negative test: zeroes the source's pre-test contributions
    /// everywhere and re-evaluates notifications. Errors if the source has
    /// never reported.
    pub fn decascade(
        &mut self,
        negative: NegativeTestEvent,
        params: &RiskParams,
    ) -> Result<Vec<DecascadeRecord>> {
        if !self.reports.contains_key(&negative.source_id) {
            return Err(Error::data(format!(
                "unknown source {}",
                negative.source_id
            )));
        }
        let records = self.apply_decascade(&negative, params);
        let ts = negative.test_time;
        self.journal.push(JournalEntry {
            op: JournalOp::Decascade(negative),
            ts,
        });
        Ok(records)
    }

    fn apply_ingest(
        &mut self,
        report: &SourceReport,
        ts: Minutes,
        params: &RiskParams,
    ) -> Result<Vec<String>> {
        let mut recipients: Vec<&str> = report
            .events
            .iter()
            .map(|e| e.recipient_id.as_str())
            .collect();
        recipients.sort_unstable();
        recipients.dedup();

        let mut updated = Vec::new();
        for recipient in recipients {
            let events = risk::pair_contributions(report, recipient, params)?;
            if events.is_empty() {
                continue;
            }
            let contribution_risk: f64 = events.iter().map(|c| c.risk).sum();
            let ledger = self
                .ledgers
                .entry(recipient.to_string())
                .or_insert_with(|| RecipientLedger::new(recipient));
            ledger.per_source.insert(
                report.source_id.clone(),
                risk::SourceContribution {
                    risk: contribution_risk,
                    events,
                },
            );
            ledger.recompute_total();

            // Notify on crossing the threshold; a lapsed advice window is
            // re-opened (restarting the 14-day clock) if the total still
            // qualifies when new evidence arrives.
            if notifier::should_notify(ledger, params) {
                let expired = self
                    .notified
                    .get(recipient)
                    .is_some_and(|&at| ts >= at + notifier::ADVICE_PERIOD);
                if !self.notified.contains_key(recipient) || expired {
                    self.notified.insert(recipient.to_string(), ts);
                }
            }
            updated.push(recipient.to_string());
        }
        self.reports
            .insert(report.source_id.clone(), report.clone());
        Ok(updated)
    }

    fn apply_decascade(
        &mut self,
        negative: &NegativeTestEvent,
        params: &RiskParams,
    ) -> Vec<DecascadeRecord> {
        let mut states: Vec<NotificationState> = self
            .ledgers
            .values()
            .map(|ledger| {
                let mut state = NotificationState::new(ledger.clone());
                if let Some(&at) = self.notified.get(&ledger.recipient_id) {
                    state.mark_notified(at);
                }
                state
            })
            .collect();
        let records = notifier::decascade(&mut states, negative, params);
        for state in states {
            if !state.is_notified() {
                self.notified.remove(&state.recipient_id);
            }
            self.ledgers
                .insert(state.recipient_id.clone(), state.ledger);
        }
        records
    }

    /// Replays a journal into a fresh store.
    pub fn replay(entries: &[JournalEntry], params: &RiskParams) -> Result<EventStore> {
        let mut store = EventStore::new();
        for entry in entries {
            match &entry.op {
                JournalOp::Ingest(report) => {
                    report.validate()?;
                    if store.reports.contains_key(&report.source_id) {
                        return Err(Error::data(format!(
                            "journal replays source {} twice",
                            report.source_id
                        )));
                    }
                    store.apply_ingest(report, entry.ts, params)?;
                }
                JournalOp::Decascade(negative) => {
                    store.apply_decascade(negative, params);
                }
            }
            store.journal.push(entry.clone());
        }
        Ok(store)
    }

    /// Rebuilds this store from its own journal; the result must equal the
    /// incrementally maintained state bit for bit.
    pub fn rebuild(&self, params: &RiskParams) -> Result<EventStore> {
        EventStore::replay(&self.journal, params)
    }

    /// Loads a store by replaying a JSONL journal file.
    pub fn load(path: &Path, params: &RiskParams) -> Result<EventStore> {
        let entries = read_journal(path)?;
        EventStore::replay(&entries, params)
    }

    /// Serializes the journal as JSONL, one entry per line.
    pub fn journal_to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for entry in &self.journal {
            out.push_str(
                &serde_json::to_string(entry)
                    .map_err(|e| Error::data(format!("journal serialization: {e}")))?,
            );
            out.push('\n');
        }
        Ok(out)
    }
}

/// Reads a JSONL journal, reporting the 1-based line number of the first
/// corrupt line.
pub fn read_journal(path: &Path) -> Result<Vec<JournalEntry>> {
    let file = std::fs::File::open(path)?;
    let mut entries = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let entry: JournalEntry = serde_json::from_str(&line).map_err(|e| Error::Journal {
            line: idx + 1,
            message: e.to_string(),
        })?;
        entries.push(entry);
    }
    Ok(entries)
}
