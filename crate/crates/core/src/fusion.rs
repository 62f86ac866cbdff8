//! Per-beacon verdicts: detector opinions, their consensus, and classification.

use std::fmt;
use std::str::FromStr;

use crate::opinion::{fuse_all, Opinion, OpinionError};

/// Output labels used in CSV files and metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Detector {
    Art,
    Eart,
    Exchange,
    Merged,
}

impl Detector {
    pub const ALL: [Detector; 4] = [
        Detector::Art,
        Detector::Eart,
        Detector::Exchange,
        Detector::Merged,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Detector::Art => "ART",
            Detector::Eart => "eART",
            Detector::Exchange => "Exchange",
            Detector::Merged => "Merged",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Detector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Detector {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Detector::ALL
            .into_iter()
            .find(|d| d.label() == s)
            .ok_or_else(|| format!("unknown detector label {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classification {
    Benign,
    Malicious,
}

impl Classification {
    pub fn is_malicious(self) -> bool {
        self == Classification::Malicious
    }
}

pub const DEFAULT_DECISION_THRESHOLD: f64 = 0.5;

/// Consensus of the detector opinions, in the order given.
pub fn merge(opinions: &[Opinion]) -> Result<Opinion, OpinionError> {
    fuse_all(opinions)
}

/// Malicious iff the expectation falls strictly below `decision_threshold`.
pub fn classify(opinion: &Opinion, decision_threshold: f64) -> Classification {
    if opinion.expectation() < decision_threshold {
        Classification::Malicious
    } else {
        Classification::Benign
    }
}

pub fn classify_binary(flag: bool) -> Classification {
    if flag {
        Classification::Malicious
    } else {
        Classification::Benign
    }
}

/// Everything the detectors concluded about one received beacon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verdict {
    pub art_flag: bool,
    pub eart: Opinion,
    pub exchange: Opinion,
    pub merged: Opinion,
    pub decision_threshold: f64,
}

impl Verdict {
    /// Merges `[eart, exchange]` in that order.
    pub fn new(
        art_flag: bool,
        eart: Opinion,
        exchange: Opinion,
        decision_threshold: f64,
    ) -> Result<Self, OpinionError> {
        let merged = merge(&[eart, exchange])?;
        Ok(Verdict {
            art_flag,
            eart,
            exchange,
            merged,
            decision_threshold,
        })
    }

    /// `None` for ART, which produces no opinion.
    pub fn opinion(&self, detector: Detector) -> Option<&Opinion> {
        match detector {
            Detector::Art => None,
            Detector::Eart => Some(&self.eart),
            Detector::Exchange => Some(&self.exchange),
            Detector::Merged => Some(&self.merged),
        }
    }

    pub fn expectation(&self, detector: Detector) -> Option<f64> {
        self.opinion(detector).map(Opinion::expectation)
    }

    pub fn classification(&self, detector: Detector) -> Classification {
        match self.opinion(detector) {
            None => classify_binary(self.art_flag),
            Some(op) => classify(op, self.decision_threshold),
        }
    }
}
