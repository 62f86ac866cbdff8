//! Position-verification detectors.
//!
//! * `ART`: binary acceptance range threshold.
//! * `eART`: the same threshold test expressed as an opinion whose uncertainty is a
//!   Gaussian bump centred on the threshold.
//! * `Exchange`: cross-checks the claimed position against the piggybacked neighbor
//!   lists of the receiver's direct neighbors.

use thiserror::Error;

use crate::geom::Vec2;
use crate::opinion::{Opinion, OpinionError, DEFAULT_BASE_RATE};
use crate::sim::beacon::VehicleId;
use crate::sim::table::NeighborTable;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum DetectorError {
    #[error("{name} must be strictly positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("non-finite position in evidence")]
    NonFinitePosition,
    #[error("benign sample count {benign} exceeds total {total}")]
    TooManyBenign { benign: u32, total: u32 },
    #[error(transparent)]
    Opinion(#[from] OpinionError),
}

fn positive(name: &'static str, value: f64) -> Result<f64, DetectorError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(DetectorError::NonPositive { name, value })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EartConfig {
    threshold: f64,
    sigma: f64,
}

impl EartConfig {
    pub fn new(threshold: f64, sigma: f64) -> Result<Self, DetectorError> {
        Ok(EartConfig {
            threshold: positive("threshold_theta", threshold)?,
            sigma: positive("sigma", sigma)?,
        })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

impl Default for EartConfig {
    fn default() -> Self {
        EartConfig {
            threshold: 400.0,
            sigma: 100.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExchangeConfig {
    distance_threshold: f64,
    decay_constant: f64,
    table_ttl: f64,
}

impl ExchangeConfig {
    pub fn new(
        distance_threshold: f64,
        decay_constant: f64,
        table_ttl: f64,
    ) -> Result<Self, DetectorError> {
        Ok(ExchangeConfig {
            distance_threshold: positive("distance_threshold", distance_threshold)?,
            decay_constant: positive("decay_constant", decay_constant)?,
            table_ttl: positive("table_ttl", table_ttl)?,
        })
    }

    pub fn distance_threshold(&self) -> f64 {
        self.distance_threshold
    }

    pub fn decay_constant(&self) -> f64 {
        self.decay_constant
    }

    pub fn table_ttl(&self) -> f64 {
        self.table_ttl
    }
}

impl Default for ExchangeConfig {
    fn default() -> Self {
        ExchangeConfig {
            distance_threshold: 350.0,
            decay_constant: 10.0,
            table_ttl: 3.0,
        }
    }
}

/// What a receiver knows when a beacon arrives. The table is the receiver's state
/// before this beacon is stored.
#[derive(Debug, Clone, Copy)]
pub struct Evidence<'a> {
    pub sender_id: VehicleId,
    pub claimed_position: Vec2,
    pub receiver_position: Vec2,
    pub neighbor_table: &'a NeighborTable,
    pub now: f64,
}

impl Evidence<'_> {
    /// Distance between the receiver and the claimed sender position.
    pub fn claimed_distance(&self) -> f64 {
        self.receiver_position.distance(self.claimed_position)
    }

    fn checked_distance(&self) -> Result<f64, DetectorError> {
        if !self.claimed_position.is_finite() || !self.receiver_position.is_finite() {
            return Err(DetectorError::NonFinitePosition);
        }
        Ok(self.claimed_distance())
    }
}

/// Opinion for an estimate `delta` against an expected value `threshold` with spread `sigma`.
///
/// Uncertainty is `exp(-(delta - threshold)^2 / (2 sigma^2))`; the remaining mass goes to
/// belief when `delta <= threshold` and to disbelief otherwise.
pub fn gaussian_threshold_opinion(delta: f64, config: &EartConfig) -> Opinion {
    let z = (delta - config.threshold) / config.sigma;
    let u = (-0.5 * z * z).exp();
    let (b, d) = if delta <= config.threshold {
        (1.0 - u, 0.0)
    } else {
        (0.0, 1.0 - u)
    };
    Opinion::new(b, d, u, DEFAULT_BASE_RATE).expect("b + d + u = 1 by construction")
}

pub fn eart_opinion(evidence: &Evidence<'_>, config: &EartConfig) -> Result<Opinion, DetectorError> {
    let delta = evidence.checked_distance()?;
    Ok(gaussian_threshold_opinion(delta, config))
}

/// True when the beacon is flagged as falsified, i.e. the claimed position lies
/// strictly beyond `threshold`.
pub fn art_binary(evidence: &Evidence<'_>, threshold: f64) -> bool {
    evidence.claimed_distance() > threshold
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ExchangeSamples {
    pub benign: u32,
    pub total: u32,
}

/// Counts neighbors that should have heard the sender (they sit within the exchange
/// threshold of the claimed position) and how many of them list it.
pub fn exchange_samples(evidence: &Evidence<'_>, config: &ExchangeConfig) -> ExchangeSamples {
    let mut samples = ExchangeSamples::default();
    let limit_sq = config.distance_threshold * config.distance_threshold;
    for (id, entry) in evidence
        .neighbor_table
        .fresh(evidence.now, config.table_ttl)
    {
        if id == evidence.sender_id {
            continue;
        }
        if entry.position.distance_squared(evidence.claimed_position) <= limit_sq {
            samples.total += 1;
            if entry.lists(evidence.sender_id) {
                samples.benign += 1;
            }
        }
    }
    samples
}

/// `u = exp(-n / decay)`; belief and disbelief split `1 - u` in the ratio `benign : total - benign`.
pub fn exchange_opinion(
    benign: u32,
    total: u32,
    config: &ExchangeConfig,
) -> Result<Opinion, DetectorError> {
    if benign > total {
        return Err(DetectorError::TooManyBenign { benign, total });
    }
    if total == 0 {
        return Ok(Opinion::vacuous(DEFAULT_BASE_RATE)?);
    }
    let n = f64::from(total);
    let u = (-n / config.decay_constant).exp();
    let certainty = 1.0 - u;
    let ratio = f64::from(benign) / n;
    Ok(Opinion::new(
        ratio * certainty,
        (1.0 - ratio) * certainty,
        u,
        DEFAULT_BASE_RATE,
    )?)
}
