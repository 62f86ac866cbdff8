use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::attackers::StrategySpec;

/// Attacker probabilities used in the reference evaluation.
pub const REFERENCE_ATTACKER_PROBABILITIES: [f64; 4] = [0.01, 0.1, 0.2, 0.3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DensityPreset {
    Low,
    Medium,
    High,
}

impl DensityPreset {
    /// Vehicles placed on the roads at t = 0.
    pub fn initial_vehicles(self) -> u32 {
        match self {
            DensityPreset::Low => 150,
            DensityPreset::Medium => 300,
            DensityPreset::High => 600,
        }
    }

    /// Poisson arrival rate (vehicles/s) that roughly balances departures for the
    /// initial population on the default 4 km grid.
    pub fn arrival_rate(self) -> f64 {
        match self {
            DensityPreset::Low => 0.25,
            DensityPreset::Medium => 0.5,
            DensityPreset::High => 1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            DensityPreset::Low => "low",
            DensityPreset::Medium => "medium",
            DensityPreset::High => "high",
        }
    }
}

impl fmt::Display for DensityPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for DensityPreset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "low" => Ok(DensityPreset::Low),
            "medium" => Ok(DensityPreset::Medium),
            "high" => Ok(DensityPreset::High),
            _ => Err(format!("unknown density {s:?}; expected low | medium | high")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid scenario: {field} {problem}")]
pub struct ScenarioError {
    pub field: &'static str,
    pub problem: String,
}

/// Every knob of a single simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub world_width: f64,
    pub world_height: f64,
    pub grid_spacing: f64,
    pub density: DensityPreset,
    /// Overrides the density preset when set.
    pub arrival_rate: Option<f64>,
    /// Overrides the density preset when set.
    pub initial_vehicles: Option<u32>,
    pub speed_min: f64,
    pub speed_max: f64,
    pub attacker_probability: f64,
    pub strategy: StrategySpec,
    /// Measured time in seconds, after `warmup`.
    pub duration: f64,
    /// Seconds simulated before any reception is counted.
    pub warmup: f64,
    pub step: f64,
    pub seed: u64,
    pub beacon_rate: f64,
    pub art_threshold: f64,
    pub sigma: f64,
    pub exchange_threshold: f64,
    pub decay_constant: f64,
    pub table_ttl: f64,
    pub exchange_enabled: bool,
    pub r_full: f64,
    pub r_cut: f64,
    pub radio_falloff: f64,
    pub decision_threshold: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            world_width: 4000.0,
            world_height: 4000.0,
            grid_spacing: 250.0,
            density: DensityPreset::Medium,
            arrival_rate: None,
            initial_vehicles: None,
            speed_min: 8.0,
            speed_max: 14.0,
            attacker_probability: 0.1,
            strategy: StrategySpec::default(),
            duration: 360.0,
            warmup: 5.0,
            step: 0.1,
            seed: 1,
            beacon_rate: 1.0,
            art_threshold: 400.0,
            sigma: 100.0,
            exchange_threshold: 350.0,
            decay_constant: 10.0,
            table_ttl: 3.0,
            exchange_enabled: true,
            r_full: 300.0,
            r_cut: 500.0,
            radio_falloff: 50.0,
            decision_threshold: 0.5,
        }
    }
}

fn err(field: &'static str, problem: impl Into<String>) -> ScenarioError {
    ScenarioError {
        field,
        problem: problem.into(),
    }
}

fn positive(field: &'static str, v: f64) -> Result<(), ScenarioError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(err(field, format!("must be > 0, got {v}")))
    }
}

impl ScenarioConfig {
    pub fn effective_arrival_rate(&self) -> f64 {
        self.arrival_rate
            .unwrap_or_else(|| self.density.arrival_rate())
    }

    pub fn effective_initial_vehicles(&self) -> u32 {
        self.initial_vehicles
            .unwrap_or_else(|| self.density.initial_vehicles())
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        positive("world_width", self.world_width)?;
        positive("world_height", self.world_height)?;
        positive("grid_spacing", self.grid_spacing)?;
        positive("duration", self.duration)?;
        positive("step", self.step)?;
        positive("beacon_rate", self.beacon_rate)?;
        positive("art_threshold", self.art_threshold)?;
        positive("sigma", self.sigma)?;
        positive("exchange_threshold", self.exchange_threshold)?;
        positive("decay_constant", self.decay_constant)?;
        positive("table_ttl", self.table_ttl)?;
        positive("r_full", self.r_full)?;
        positive("radio_falloff", self.radio_falloff)?;
        positive("speed_max", self.speed_max)?;
        if !(self.warmup >= 0.0 && self.warmup.is_finite()) {
            return Err(err("warmup", "must be >= 0"));
        }
        if self.grid_spacing > self.world_width || self.grid_spacing > self.world_height {
            return Err(err("grid_spacing", "must not exceed the world size"));
        }
        if !(self.speed_min >= 0.0 && self.speed_min <= self.speed_max) {
            return Err(err("speed_min", "must lie in [0, speed_max]"));
        }
        if !(self.r_cut > self.r_full) || !self.r_cut.is_finite() {
            return Err(err("r_cut", "must be greater than r_full"));
        }
        if !(0.0..=1.0).contains(&self.attacker_probability) {
            return Err(err("attacker_probability", "must lie in [0, 1]"));
        }
        if !(self.decision_threshold > 0.0 && self.decision_threshold < 1.0) {
            return Err(err("decision_threshold", "must lie in (0, 1)"));
        }
        if self.step > 1.0 / self.beacon_rate {
            return Err(err("step", "must not exceed the beacon interval"));
        }
        if let Some(rate) = self.arrival_rate {
            if !(rate >= 0.0 && rate.is_finite()) {
                return Err(err("arrival_rate", "must be >= 0"));
            }
        }
        Ok(())
    }
}
