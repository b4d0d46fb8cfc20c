//! The message log of one protocol run.
//!
//! One `CLAIM` opens the session and is shared by all experiments. Each
//! experiment then alternates `ROUND`/`CHAL` records for `r` rounds and
//! closes with a `FINAL` record carrying the verifier's interpolated
//! constant. A single `VERDICT` ends the transcript; rejection is
//! fail-fast, so a rejected transcript stops at the failing experiment.

use std::fmt;

use crate::field::FieldElement;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Record {
    Claim(FieldElement),
    Round {
        experiment: u64,
        level: u32,
        values: Vec<FieldElement>,
    },
    Challenge {
        experiment: u64,
        level: u32,
        b: u32,
    },
    Final {
        experiment: u64,
        value: FieldElement,
    },
    Verdict(Verdict),
}

impl fmt::Display for Record {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Record::Claim(v) => write!(f, "CLAIM {v}"),
            Record::Round {
                experiment,
                level,
                values,
            } => {
                write!(f, "ROUND {experiment} {level}")?;
                for v in values {
                    write!(f, " {v}")?;
                }
                Ok(())
            }
            Record::Challenge {
                experiment,
                level,
                b,
            } => write!(f, "CHAL {experiment} {level} {b}"),
            Record::Final { experiment, value } => write!(f, "FINAL {experiment} {value}"),
            Record::Verdict(v) => write!(f, "VERDICT {v}"),
        }
    }
}

/// Why a run was rejected. The experiment index is kept for diagnostics;
/// the rendered reason token carries only the kind and level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    /// The weighted sum of the round values did not match the reference.
    RoundCheck { experiment: u64, level: u32 },
    /// The final constant did not match the lookup table.
    FinalCheck { experiment: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Reject(RejectReason),
}

impl Verdict {
    pub fn is_accept(&self) -> bool {
        matches!(self, Verdict::Accept)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Accept => write!(f, "accept ok"),
            Verdict::Reject(RejectReason::RoundCheck { level, .. }) => {
                write!(f, "reject round-{level}")
            }
            Verdict::Reject(RejectReason::FinalCheck { .. }) => write!(f, "reject final"),
        }
    }
}

/// Ordered record of everything exchanged in one run.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Transcript {
    pub records: Vec<Record>,
}

impl Transcript {
    pub fn push(&mut self, record: Record) {
        self.records.push(record);
    }

    pub fn claim(&self) -> Option<FieldElement> {
        self.records.iter().find_map(|r| match r {
            Record::Claim(v) => Some(*v),
            _ => None,
        })
    }

    pub fn verdict(&self) -> Option<Verdict> {
        self.records.iter().rev().find_map(|r| match r {
            Record::Verdict(v) => Some(*v),
            _ => None,
        })
    }

    /// Challenge values drawn in one experiment, in round order.
    pub fn challenges(&self, experiment: u64) -> Vec<u32> {
        self.records
            .iter()
            .filter_map(|r| match r {
                Record::Challenge { experiment: e, b, .. } if *e == experiment => Some(*b),
                _ => None,
            })
            .collect()
    }

    /// Experiment indices that reached their final check.
    pub fn completed_experiments(&self) -> Vec<u64> {
        self.records
            .iter()
            .filter_map(|r| match r {
                Record::Final { experiment, .. } => Some(*experiment),
                _ => None,
            })
            .collect()
    }

    /// Whether experiment `e` passed all its checks including the table
    /// comparison. `None` if the run never reached that experiment.
    pub fn experiment_accepted(&self, experiment: u64) -> Option<bool> {
        match self.verdict()? {
            Verdict::Accept => {
                self.completed_experiments().contains(&experiment).then_some(true)
            }
            Verdict::Reject(
                RejectReason::RoundCheck { experiment: fe, .. }
                | RejectReason::FinalCheck { experiment: fe },
            ) => {
                if experiment < fe {
                    Some(true)
                } else if experiment == fe {
                    Some(false)
                } else {
                    None
                }
            }
        }
    }

    /// Canonical newline-delimited rendering: the transcript file format.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&r.to_string());
            out.push('\n');
        }
        out
    }
}
