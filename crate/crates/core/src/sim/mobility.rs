//! Manhattan-grid mobility: vehicles drive along axis-aligned roads at constant speed and
//! pick straight, left or right uniformly at every intersection.

use rand::Rng;

use crate::geom::{Rect, Vec2};

// Positions land exactly on intersections after a turn; this keeps the "next
// intersection" search from returning the one the vehicle is standing on.
const GRID_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoadGrid {
    bounds: Rect,
    spacing: f64,
    columns: u32,
    rows: u32,
}

impl RoadGrid {
    /// Roads at `min + k * spacing` along both axes, for every such line inside `bounds`.
    pub fn new(bounds: Rect, spacing: f64) -> Option<Self> {
        if !(spacing > 0.0) || !(bounds.width() > 0.0) || !(bounds.height() > 0.0) {
            return None;
        }
        let columns = (bounds.width() / spacing + GRID_EPSILON).floor() as u32 + 1;
        let rows = (bounds.height() / spacing + GRID_EPSILON).floor() as u32 + 1;
        Some(RoadGrid {
            bounds,
            spacing,
            columns,
            rows,
        })
    }

    pub fn bounds(&self) -> Rect {
        self.bounds
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    fn road_x(&self, k: u32) -> f64 {
        self.bounds.min.x + f64::from(k) * self.spacing
    }

    fn road_y(&self, k: u32) -> f64 {
        self.bounds.min.y + f64::from(k) * self.spacing
    }

    /// Uniform point over total road length, with a random direction along that road.
    pub fn random_road_point<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec2, Vec2) {
        let vertical_len = f64::from(self.columns) * self.bounds.height();
        let horizontal_len = f64::from(self.rows) * self.bounds.width();
        let forward = rng.random_bool(0.5);
        let sign = if forward { 1.0 } else { -1.0 };
        if rng.random::<f64>() * (vertical_len + horizontal_len) < vertical_len {
            let x = self.road_x(rng.random_range(0..self.columns));
            let y = rng.random_range(self.bounds.min.y..=self.bounds.max.y);
            (Vec2::new(x, y), Vec2::new(0.0, sign))
        } else {
            let y = self.road_y(rng.random_range(0..self.rows));
            let x = rng.random_range(self.bounds.min.x..=self.bounds.max.x);
            (Vec2::new(x, y), Vec2::new(sign, 0.0))
        }
    }

    /// A road end on the boundary, with the inward direction.
    pub fn random_entry<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec2, Vec2) {
        let total = 2 * (self.columns + self.rows);
        let pick = rng.random_range(0..total);
        let b = self.bounds;
        if pick < 2 * self.columns {
            let x = self.road_x(pick / 2);
            if pick % 2 == 0 {
                (Vec2::new(x, b.min.y), Vec2::new(0.0, 1.0))
            } else {
                (Vec2::new(x, b.max.y), Vec2::new(0.0, -1.0))
            }
        } else {
            let k = pick - 2 * self.columns;
            let y = self.road_y(k / 2);
            if k.is_multiple_of(2) {
                (Vec2::new(b.min.x, y), Vec2::new(1.0, 0.0))
            } else {
                (Vec2::new(b.max.x, y), Vec2::new(-1.0, 0.0))
            }
        }
    }

    /// Distance to the next grid line strictly ahead of `coord` along one axis.
    fn gap_ahead(&self, coord: f64, origin: f64, direction: f64) -> f64 {
        let cell = (coord - origin) / self.spacing;
        let next = if direction > 0.0 {
            (cell + GRID_EPSILON).floor() + 1.0
        } else {
            (cell - GRID_EPSILON).ceil() - 1.0
        };
        (origin + next * self.spacing - coord).abs()
    }

    /// Moves `distance` meters along the heading of `velocity` (axis-aligned), turning at
    /// each intersection passed. Returns the new position and velocity.
    pub fn advance<R: Rng + ?Sized>(
        &self,
        mut position: Vec2,
        mut velocity: Vec2,
        distance: f64,
        rng: &mut R,
    ) -> (Vec2, Vec2) {
        let mut remaining = distance;
        loop {
            let gap = if velocity.x != 0.0 {
                self.gap_ahead(position.x, self.bounds.min.x, velocity.x)
            } else if velocity.y != 0.0 {
                self.gap_ahead(position.y, self.bounds.min.y, velocity.y)
            } else {
                return (position, velocity);
            };
            let speed = velocity.norm();
            let heading = velocity * (1.0 / speed);
            if gap > remaining {
                return (position + heading * remaining, velocity);
            }
            remaining -= gap;
            position = position + heading * gap;
            position = self.snap(position);
            velocity = match rng.random_range(0..3u8) {
                0 => velocity,
                1 => Vec2::new(-velocity.y, velocity.x),
                _ => Vec2::new(velocity.y, -velocity.x),
            };
        }
    }

    fn snap(&self, p: Vec2) -> Vec2 {
        let snap_axis = |c: f64, origin: f64| {
            let k = ((c - origin) / self.spacing).round();
            origin + k * self.spacing
        };
        Vec2::new(
            snap_axis(p.x, self.bounds.min.x),
            snap_axis(p.y, self.bounds.min.y),
        )
    }
}
