use std::fmt;
use std::sync::Arc;

use crate::geom::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VehicleId(pub u32);

impl fmt::Display for VehicleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Single-hop broadcast carrying a claimed position and the sender's current neighbor ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Beacon {
    pub sender_id: VehicleId,
    pub claimed_position: Vec2,
    pub timestamp: f64,
    /// Sorted ascending, never contains `sender_id`.
    pub neighbor_ids: Arc<[VehicleId]>,
}

impl Beacon {
    pub fn lists(&self, id: VehicleId) -> bool {
        self.neighbor_ids.binary_search(&id).is_ok()
    }
}
