//! Position-falsification strategies. Attackers lie about their own position only.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

use crate::geom::{Rect, Vec2};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StrategyError {
    #[error("unrecognized strategy {0:?}; expected fixed:dx,dy | random_position | random_offset:w")]
    Unrecognized(String),
    #[error("bad number in strategy {0:?}")]
    BadNumber(String),
    #[error("random_offset half-width must be > 0, got {0}")]
    NonPositiveHalfWidth(f64),
    #[error("random_position area must lie within the world bounds")]
    AreaOutsideWorld,
}

/// Strategy as written in configuration, before the world bounds are known.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StrategySpec {
    FixedOffset { dx: f64, dy: f64 },
    RandomPosition,
    RandomOffset { half_width: f64 },
}

impl StrategySpec {
    pub fn resolve(&self, world: Rect) -> Strategy {
        match *self {
            StrategySpec::FixedOffset { dx, dy } => Strategy::FixedOffset(Vec2::new(dx, dy)),
            StrategySpec::RandomPosition => Strategy::RandomPosition(world),
            StrategySpec::RandomOffset { half_width } => Strategy::RandomOffset { half_width },
        }
    }
}

impl Default for StrategySpec {
    fn default() -> Self {
        StrategySpec::FixedOffset { dx: 300.0, dy: 300.0 }
    }
}

impl FromStr for StrategySpec {
    type Err = StrategyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| StrategyError::BadNumber(s.to_string()))
        };
        if s == "random_position" {
            return Ok(StrategySpec::RandomPosition);
        }
        if let Some(rest) = s.strip_prefix("fixed:") {
            let (dx, dy) = rest
                .split_once(',')
                .ok_or_else(|| StrategyError::BadNumber(s.to_string()))?;
            return Ok(StrategySpec::FixedOffset {
                dx: num(dx)?,
                dy: num(dy)?,
            });
        }
        if let Some(rest) = s.strip_prefix("random_offset:") {
            let half_width = num(rest)?;
            if half_width <= 0.0 {
                return Err(StrategyError::NonPositiveHalfWidth(half_width));
            }
            return Ok(StrategySpec::RandomOffset { half_width });
        }
        Err(StrategyError::Unrecognized(s.to_string()))
    }
}

impl fmt::Display for StrategySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategySpec::FixedOffset { dx, dy } => write!(f, "fixed:{dx},{dy}"),
            StrategySpec::RandomPosition => f.write_str("random_position"),
            StrategySpec::RandomOffset { half_width } => write!(f, "random_offset:{half_width}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strategy {
    /// Adds a constant vector to the true position.
    FixedOffset(Vec2),
    /// Claims a uniformly random point of the area, redrawn on every beacon.
    RandomPosition(Rect),
    /// Claims a uniformly random point of the square of half-width `half_width`
    /// around the true position, redrawn on every beacon.
    RandomOffset { half_width: f64 },
}

impl Strategy {
    pub fn random_position(area: Rect, world: Rect) -> Result<Self, StrategyError> {
        if !world.contains_rect(&area) {
            return Err(StrategyError::AreaOutsideWorld);
        }
        Ok(Strategy::RandomPosition(area))
    }

    pub fn random_offset(half_width: f64) -> Result<Self, StrategyError> {
        if !(half_width > 0.0) {
            return Err(StrategyError::NonPositiveHalfWidth(half_width));
        }
        Ok(Strategy::RandomOffset { half_width })
    }

    pub fn apply<R: Rng + ?Sized>(&self, true_position: Vec2, rng: &mut R) -> Vec2 {
        match *self {
            Strategy::FixedOffset(offset) => true_position + offset,
            Strategy::RandomPosition(area) => Vec2::new(
                rng.random_range(area.min.x..=area.max.x),
                rng.random_range(area.min.y..=area.max.y),
            ),
            Strategy::RandomOffset { half_width: w } => {
                true_position + Vec2::new(rng.random_range(-w..=w), rng.random_range(-w..=w))
            }
        }
    }
}
