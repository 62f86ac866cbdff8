use std::collections::BTreeMap;
use std::sync::Arc;

use crate::geom::Vec2;
use crate::sim::beacon::{Beacon, VehicleId};

// Times are tick multiples; this absorbs accumulated rounding in `now - timestamp`.
const AGE_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct NeighborEntry {
    pub position: Vec2,
    pub timestamp: f64,
    /// Sorted ascending.
    pub neighbors: Arc<[VehicleId]>,
}

impl NeighborEntry {
    pub fn lists(&self, id: VehicleId) -> bool {
        self.neighbors.binary_search(&id).is_ok()
    }
}

/// Last data heard from each direct neighbor, keyed by id.
///
/// Readers go through [`NeighborTable::fresh`], which hides entries older than the ttl.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NeighborTable {
    entries: BTreeMap<VehicleId, NeighborEntry>,
}

impl NeighborTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Stores the beacon's claimed data verbatim, overwriting older data from the same sender.
    pub fn update(&mut self, beacon: &Beacon) {
        self.entries.insert(
            beacon.sender_id,
            NeighborEntry {
                position: beacon.claimed_position,
                timestamp: beacon.timestamp,
                neighbors: Arc::clone(&beacon.neighbor_ids),
            },
        );
    }

    pub fn insert(&mut self, id: VehicleId, entry: NeighborEntry) {
        self.entries.insert(id, entry);
    }

    pub fn fresh(
        &self,
        now: f64,
        ttl: f64,
    ) -> impl Iterator<Item = (VehicleId, &NeighborEntry)> + '_ {
        self.entries
            .iter()
            .filter(move |(_, e)| now - e.timestamp <= ttl + AGE_EPSILON)
            .map(|(id, e)| (*id, e))
    }

    /// Sorted ids of the fresh entries.
    pub fn fresh_ids(&self, now: f64, ttl: f64) -> Vec<VehicleId> {
        self.fresh(now, ttl).map(|(id, _)| id).collect()
    }

    /// Drops stale entries. Purely a memory bound; `fresh` already filters.
    pub fn prune(&mut self, now: f64, ttl: f64) {
        self.entries
            .retain(|_, e| now - e.timestamp <= ttl + AGE_EPSILON);
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }

    /// Raw entry count, stale entries included.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
