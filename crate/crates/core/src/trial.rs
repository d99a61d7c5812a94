//! Append-only trial log and its JSON-lines encoding.
//!
//! One line per trial:
//! `{"trial":0,"batch":0,"point":[...],"value":1.5,"attempts":1,"cascade_size":0}`
//! and one line per classifier adoption:
//! `{"event":"adopt","batch":0,"cascade_size":1,"cv_accuracy":null}`.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::Point;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialRecord {
    pub trial: usize,
    pub batch: usize,
    pub point: Point,
    /// Objective value in the objective's own direction.
    pub value: f64,
    pub attempts: u64,
    pub cascade_size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case", deny_unknown_fields)]
pub enum Event {
    Adopt {
        batch: usize,
        cascade_size: usize,
        cv_accuracy: Option<f64>,
    },
}

/// An adoption event, as recorded in the log.
#[derive(Clone, Debug, PartialEq)]
pub struct AdoptionRecord {
    pub batch: usize,
    pub cascade_size: usize,
    pub cv_accuracy: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LogEntry {
    Trial(TrialRecord),
    Event(Event),
}

impl From<AdoptionRecord> for LogEntry {
    fn from(a: AdoptionRecord) -> Self {
        LogEntry::Event(Event::Adopt {
            batch: a.batch,
            cascade_size: a.cascade_size,
            cv_accuracy: a.cv_accuracy,
        })
    }
}

impl LogEntry {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("log entries always serialize")
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrialLog {
    entries: Vec<LogEntry>,
    n_trials: usize,
}

impl TrialLog {
    pub fn new() -> Self {
        TrialLog::default()
    }

    pub fn push(&mut self, entry: LogEntry) -> Result<()> {
        if let LogEntry::Trial(rec) = &entry {
            if let Some(last) = self.trials().last() {
                if rec.trial <= last.trial {
                    return Err(Error::Protocol(format!(
                        "trial index {} does not follow {}",
                        rec.trial, last.trial
                    )));
                }
            }
            self.n_trials += 1;
        }
        self.entries.push(entry);
        Ok(())
    }

    pub fn push_trial(&mut self, rec: TrialRecord) -> Result<()> {
        self.push(LogEntry::Trial(rec))
    }

    pub fn push_adoption(&mut self, rec: AdoptionRecord) -> Result<()> {
        self.push(rec.into())
    }

    pub fn entries(&self) -> &[LogEntry] {
        &self.entries
    }

    pub fn trials(&self) -> impl DoubleEndedIterator<Item = &TrialRecord> {
        self.entries.iter().filter_map(|e| match e {
            LogEntry::Trial(t) => Some(t),
            LogEntry::Event(_) => None,
        })
    }

    pub fn adoptions(&self) -> impl Iterator<Item = AdoptionRecord> + '_ {
        self.entries.iter().filter_map(|e| match e {
            LogEntry::Event(Event::Adopt {
                batch,
                cascade_size,
                cv_accuracy,
            }) => Some(AdoptionRecord {
                batch: *batch,
                cascade_size: *cascade_size,
                cv_accuracy: *cv_accuracy,
            }),
            LogEntry::Trial(_) => None,
        })
    }

    pub fn n_trials(&self) -> usize {
        self.n_trials
    }

    pub fn values(&self) -> Vec<f64> {
        self.trials().map(|t| t.value).collect()
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for e in &self.entries {
            writeln!(out, "{}", e.to_json_line())?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("json is utf-8")
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Self> {
        let mut log = TrialLog::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: LogEntry = serde_json::from_str(&line).map_err(|e| Error::MalformedLog {
                line: i + 1,
                detail: e.to_string(),
            })?;
            log.push(entry).map_err(|e| Error::MalformedLog {
                line: i + 1,
                detail: e.to_string(),
            })?;
        }
        Ok(log)
    }
}
