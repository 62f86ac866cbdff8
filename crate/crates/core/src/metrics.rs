//! Per-message false/true positive rates and their aggregation over repetitions.
//!
//! Every message from an attacker counts as malicious, including the ones whose claimed
//! position happens to equal the true one.

use thiserror::Error;

use crate::fusion::{Detector, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("cannot aggregate an empty set of runs")]
    NoRuns,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DetectorCounts {
    pub received_malicious: u64,
    pub received_benign: u64,
    pub flagged_malicious_of_malicious: u64,
    pub flagged_malicious_of_benign: u64,
}

impl DetectorCounts {
    pub fn record(&mut self, is_attacker: bool, flagged: bool) {
        if is_attacker {
            self.received_malicious += 1;
            self.flagged_malicious_of_malicious += u64::from(flagged);
        } else {
            self.received_benign += 1;
            self.flagged_malicious_of_benign += u64::from(flagged);
        }
    }

    pub fn add(&mut self, other: &DetectorCounts) {
        self.received_malicious += other.received_malicious;
        self.received_benign += other.received_benign;
        self.flagged_malicious_of_malicious += other.flagged_malicious_of_malicious;
        self.flagged_malicious_of_benign += other.flagged_malicious_of_benign;
    }

    pub fn is_consistent(&self) -> bool {
        self.flagged_malicious_of_malicious <= self.received_malicious
            && self.flagged_malicious_of_benign <= self.received_benign
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Flagged benign messages over received benign messages; 0 without benign traffic.
pub fn fp_rate(counts: &DetectorCounts) -> f64 {
    ratio(counts.flagged_malicious_of_benign, counts.received_benign)
}

/// Undetected attacker messages over received attacker messages; 0 without attacker traffic.
pub fn fn_rate(counts: &DetectorCounts) -> f64 {
    ratio(
        counts.received_malicious - counts.flagged_malicious_of_malicious,
        counts.received_malicious,
    )
}

/// `1 - fn_rate`, undefined without attacker traffic.
pub fn tp_rate(counts: &DetectorCounts) -> Option<f64> {
    (counts.received_malicious > 0).then(|| 1.0 - fn_rate(counts))
}

/// Counts for every detector label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionCounts {
    per_detector: [DetectorCounts; 4],
}

impl ConfusionCounts {
    pub fn get(&self, detector: Detector) -> &DetectorCounts {
        &self.per_detector[detector.index()]
    }

    pub fn get_mut(&mut self, detector: Detector) -> &mut DetectorCounts {
        &mut self.per_detector[detector.index()]
    }

    pub fn record(&mut self, is_attacker: bool, verdict: &Verdict) {
        for d in Detector::ALL {
            let flagged = verdict.classification(d).is_malicious();
            self.get_mut(d).record(is_attacker, flagged);
        }
    }

    pub fn add(&mut self, other: &ConfusionCounts) {
        for d in Detector::ALL {
            self.get_mut(d).add(other.get(d));
        }
    }
}

/// Outcome of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub seed: u64,
    pub vehicles_spawned: u32,
    pub attackers_spawned: u32,
    /// Time-averaged number of vehicles in the area over the measured period.
    pub mean_vehicles: f64,
    pub counts: ConfusionCounts,
}

impl RunResult {
    pub fn realized_attacker_fraction(&self) -> f64 {
        ratio(
            u64::from(self.attackers_spawned),
            u64::from(self.vehicles_spawned),
        )
    }
}

/// Pooled rates for one parameter point. Pooling the counts is the same as averaging the
/// per-run rates weighted by their denominators.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSummary {
    pub runs: usize,
    pub mean_realized_attacker_fraction: f64,
    pub counts: ConfusionCounts,
}

impl PointSummary {
    pub fn fp_rate(&self, d: Detector) -> f64 {
        fp_rate(self.counts.get(d))
    }

    pub fn tp_rate(&self, d: Detector) -> Option<f64> {
        tp_rate(self.counts.get(d))
    }

    pub fn fn_rate(&self, d: Detector) -> f64 {
        fn_rate(self.counts.get(d))
    }
}

pub fn aggregate(results: &[RunResult]) -> Result<PointSummary, MetricsError> {
    if results.is_empty() {
        return Err(MetricsError::NoRuns);
    }
    let mut counts = ConfusionCounts::default();
    for r in results {
        counts.add(&r.counts);
    }
    let fraction = results
        .iter()
        .map(RunResult::realized_attacker_fraction)
        .sum::<f64>()
        / results.len() as f64;
    Ok(PointSummary {
        runs: results.len(),
        mean_realized_attacker_fraction: fraction,
        counts,
    })
}
