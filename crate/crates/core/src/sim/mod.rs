//! Discrete-time VANET world: grid mobility, stochastic single-hop reception, 1 Hz
//! beacons with piggybacked neighbor lists, and per-reception detection.

pub mod beacon;
pub mod mobility;
pub mod radio;
pub mod run;
pub mod scenario;
pub mod table;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::attackers::Strategy;
use crate::detectors::Evidence;
use crate::geom::{Rect, Vec2};

pub use beacon::{Beacon, VehicleId};
pub use mobility::RoadGrid;
pub use radio::{RadioError, RadioModel};
pub use run::{run_scenario, ReceptionEvent};
pub use scenario::{DensityPreset, ScenarioConfig, ScenarioError};
pub use table::{NeighborEntry, NeighborTable};

const TIME_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct VehicleState {
    pub id: VehicleId,
    pub true_position: Vec2,
    pub velocity: Vec2,
    pub is_attacker: bool,
    pub strategy: Option<Strategy>,
    pub next_beacon_time: f64,
}

#[derive(Debug, Clone)]
pub struct Vehicle {
    pub state: VehicleState,
    pub table: NeighborTable,
}

/// Static parameters of a world.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldParams {
    pub grid: RoadGrid,
    pub speed_min: f64,
    pub speed_max: f64,
    pub arrival_rate: f64,
    pub attacker_probability: f64,
    pub strategy: Strategy,
    pub beacon_interval: f64,
    pub radio: RadioModel,
    pub table_ttl: f64,
    /// When false, neighbor tables are never filled.
    pub tables_enabled: bool,
}

impl WorldParams {
    pub fn from_scenario(cfg: &ScenarioConfig) -> Result<Self, ScenarioError> {
        cfg.validate()?;
        let bounds = Rect::from_size(cfg.world_width, cfg.world_height);
        let grid = RoadGrid::new(bounds, cfg.grid_spacing).ok_or_else(|| ScenarioError {
            field: "grid_spacing",
            problem: "does not produce a road grid".into(),
        })?;
        let radio =
            RadioModel::new(cfg.r_full, cfg.r_cut, cfg.radio_falloff).map_err(|e| ScenarioError {
                field: "r_full",
                problem: e.to_string(),
            })?;
        Ok(WorldParams {
            grid,
            speed_min: cfg.speed_min,
            speed_max: cfg.speed_max,
            arrival_rate: cfg.effective_arrival_rate(),
            attacker_probability: cfg.attacker_probability,
            strategy: cfg.strategy.resolve(bounds),
            beacon_interval: 1.0 / cfg.beacon_rate,
            radio,
            table_ttl: cfg.table_ttl,
            tables_enabled: cfg.exchange_enabled,
        })
    }
}

/// Independent random streams so that, e.g., attacker draws never shift mobility.
#[derive(Debug, Clone)]
struct RngStreams {
    mobility: ChaCha8Rng,
    spawn: ChaCha8Rng,
    radio: ChaCha8Rng,
    attack: ChaCha8Rng,
}

impl RngStreams {
    fn new(seed: u64) -> Self {
        let stream = |k: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k);
            rng
        };
        RngStreams {
            mobility: stream(1),
            spawn: stream(2),
            radio: stream(3),
            attack: stream(4),
        }
    }
}

/// What a receiver sees when a beacon reaches it, before its table is updated.
#[derive(Debug)]
pub struct ReceptionContext<'a> {
    pub receiver: VehicleId,
    pub true_distance: f64,
    pub evidence: Evidence<'a>,
}

#[derive(Debug, Clone)]
pub struct World {
    params: WorldParams,
    /// Sorted by id.
    vehicles: Vec<Vehicle>,
    next_id: u32,
    now: f64,
    spawned: u32,
    attackers_spawned: u32,
    rng: RngStreams,
}

impl World {
    /// An empty world at t = 0.
    pub fn new(params: WorldParams, seed: u64) -> Self {
        World {
            params,
            vehicles: Vec::new(),
            next_id: 0,
            now: 0.0,
            spawned: 0,
            attackers_spawned: 0,
            rng: RngStreams::new(seed),
        }
    }

    pub fn params(&self) -> &WorldParams {
        &self.params
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn vehicles(&self) -> &[Vehicle] {
        &self.vehicles
    }

    pub fn vehicle(&self, id: VehicleId) -> Option<&Vehicle> {
        self.index_of(id).map(|i| &self.vehicles[i])
    }

    fn index_of(&self, id: VehicleId) -> Option<usize> {
        self.vehicles
            .binary_search_by_key(&id, |v| v.state.id)
            .ok()
    }

    pub fn spawned(&self) -> u32 {
        self.spawned
    }

    pub fn attackers_spawned(&self) -> u32 {
        self.attackers_spawned
    }

    /// Attacker vehicles over all vehicles ever spawned; 0 for an empty history.
    pub fn realized_attacker_fraction(&self) -> f64 {
        if self.spawned == 0 {
            0.0
        } else {
            f64::from(self.attackers_spawned) / f64::from(self.spawned)
        }
    }

    /// Places `count` vehicles uniformly over the road network.
    pub fn populate(&mut self, count: u32) {
        for _ in 0..count {
            let (pos, dir) = self.params.grid.random_road_point(&mut self.rng.mobility);
            let speed = self.draw_speed();
            self.spawn(pos, dir * speed);
        }
    }

    fn draw_speed(&mut self) -> f64 {
        let (lo, hi) = (self.params.speed_min, self.params.speed_max);
        if hi > lo {
            self.rng.mobility.random_range(lo..=hi)
        } else {
            lo
        }
    }

    /// Adds a vehicle, drawing its attacker flag and beacon phase.
    pub fn spawn(&mut self, position: Vec2, velocity: Vec2) -> VehicleId {
        let is_attacker = self.rng.spawn.random_bool(self.params.attacker_probability);
        self.spawn_with_role(position, velocity, is_attacker)
    }

    pub fn spawn_with_role(&mut self, position: Vec2, velocity: Vec2, is_attacker: bool) -> VehicleId {
        let phase = self.rng.spawn.random::<f64>() * self.params.beacon_interval;
        let id = VehicleId(self.next_id);
        self.next_id += 1;
        self.spawned += 1;
        if is_attacker {
            self.attackers_spawned += 1;
        }
        self.vehicles.push(Vehicle {
            state: VehicleState {
                id,
                true_position: position,
                velocity,
                is_attacker,
                strategy: is_attacker.then_some(self.params.strategy),
                next_beacon_time: self.now + phase,
            },
            table: NeighborTable::new(),
        });
        id
    }

    /// Advances time by `dt`: moves every vehicle, drops those that left the area, then
    /// samples Poisson arrivals at the boundary.
    pub fn step(&mut self, dt: f64) {
        let grid = self.params.grid;
        for v in &mut self.vehicles {
            let speed = v.state.velocity.norm();
            let (p, vel) = grid.advance(
                v.state.true_position,
                v.state.velocity,
                speed * dt,
                &mut self.rng.mobility,
            );
            v.state.true_position = p;
            v.state.velocity = vel;
        }
        let bounds = grid.bounds();
        self.vehicles
            .retain(|v| bounds.contains(v.state.true_position));
        self.now += dt;

        let mean = self.params.arrival_rate * dt;
        if mean > 0.0 {
            let arrivals = Poisson::new(mean)
                .expect("positive finite mean")
                .sample(&mut self.rng.spawn) as u32;
            for _ in 0..arrivals {
                let (pos, dir) = grid.random_entry(&mut self.rng.mobility);
                let speed = self.draw_speed();
                self.spawn(pos, dir * speed);
            }
        }
    }

    /// Ids of vehicles whose next beacon is due, in id order.
    pub fn due_senders(&self) -> Vec<VehicleId> {
        self.vehicles
            .iter()
            .filter(|v| self.now + TIME_EPSILON >= v.state.next_beacon_time)
            .map(|v| v.state.id)
            .collect()
    }

    /// Builds the vehicle's beacon and schedules the next one.
    pub fn emit_beacon(&mut self, id: VehicleId) -> Option<Beacon> {
        let idx = self.index_of(id)?;
        let now = self.now;
        let ttl = self.params.table_ttl;
        let interval = self.params.beacon_interval;
        let vehicle = &mut self.vehicles[idx];
        let claimed_position = match vehicle.state.strategy {
            Some(strategy) => strategy.apply(vehicle.state.true_position, &mut self.rng.attack),
            None => vehicle.state.true_position,
        };
        vehicle.table.prune(now, ttl);
        let neighbor_ids: Arc<[VehicleId]> = vehicle.table.fresh_ids(now, ttl).into();
        vehicle.state.next_beacon_time += interval;
        Some(Beacon {
            sender_id: id,
            claimed_position,
            timestamp: now,
            neighbor_ids,
        })
    }

    /// Delivers `beacon` to every other vehicle that receives it (independent draws on the
    /// true distance). `on_receive` runs against the receiver's table as it was before this
    /// beacon; the claimed data is stored afterwards.
    pub fn broadcast<E, F>(&mut self, beacon: &Beacon, mut on_receive: F) -> Result<usize, E>
    where
        F: FnMut(&ReceptionContext<'_>) -> Result<(), E>,
    {
        let Some(sender_idx) = self.index_of(beacon.sender_id) else {
            return Ok(0);
        };
        let origin = self.vehicles[sender_idx].state.true_position;
        let now = self.now;
        let radio = self.params.radio;
        let tables_enabled = self.params.tables_enabled;
        let cut_sq = radio.r_cut() * radio.r_cut();
        let mut received = 0;
        for (idx, v) in self.vehicles.iter_mut().enumerate() {
            if idx == sender_idx {
                continue;
            }
            if origin.distance_squared(v.state.true_position) >= cut_sq {
                continue;
            }
            let true_distance = origin.distance(v.state.true_position);
            let p = radio
                .reception_probability(true_distance)
                .expect("distances are non-negative");
            let hit = if p >= 1.0 {
                true
            } else if p <= 0.0 {
                false
            } else {
                self.rng.radio.random::<f64>() < p
            };
            if !hit {
                continue;
            }
            received += 1;
            let ctx = ReceptionContext {
                receiver: v.state.id,
                true_distance,
                evidence: Evidence {
                    sender_id: beacon.sender_id,
                    claimed_position: beacon.claimed_position,
                    receiver_position: v.state.true_position,
                    neighbor_table: &v.table,
                    now,
                },
            };
            on_receive(&ctx)?;
            if tables_enabled {
                v.table.update(beacon);
            }
        }
        Ok(received)
    }

    /// Kinematic state of every vehicle, for replay comparisons.
    pub fn snapshot(&self) -> Vec<VehicleState> {
        self.vehicles.iter().map(|v| v.state.clone()).collect()
    }
}

#[cfg(test)]
mod tests {
    use std::convert::Infallible;

    use super::*;

    fn params() -> WorldParams {
        WorldParams::from_scenario(&ScenarioConfig::default()).unwrap()
    }

    fn quiet_params() -> WorldParams {
        WorldParams {
            arrival_rate: 0.0,
            attacker_probability: 0.0,
            ..params()
        }
    }

    #[test]
    fn empty_world_stays_empty_without_arrivals() {
        let mut w = World::new(quiet_params(), 1);
        for _ in 0..100 {
            w.step(0.1);
        }
        assert!(w.vehicles().is_empty());
        assert_eq!(w.spawned(), 0);
    }

    #[test]
    fn single_vehicle_moves_straight() {
        let mut w = World::new(quiet_params(), 1);
        w.spawn(Vec2::ZERO, Vec2::new(10.0, 0.0));
        w.step(1.0);
        assert_eq!(w.vehicles()[0].state.true_position, Vec2::new(10.0, 0.0));
    }

    #[test]
    fn vehicles_leaving_the_area_depart() {
        // At the corner two of the three choices lead outside.
        let mut departed = 0;
        for seed in 0..60 {
            let mut w = World::new(quiet_params(), seed);
            w.spawn(Vec2::new(5.0, 0.0), Vec2::new(-10.0, 0.0));
            w.step(1.0);
            assert_eq!(w.spawned(), 1);
            match w.vehicles() {
                [] => departed += 1,
                [v] => assert_eq!(v.state.true_position, Vec2::new(0.0, 5.0)),
                _ => unreachable!(),
            }
        }
        assert!((25..=55).contains(&departed), "{departed}");
    }

    #[test]
    fn replay_is_deterministic() {
        let run = || {
            let mut w = World::new(params(), 42);
            w.populate(50);
            for _ in 0..1000 {
                w.step(0.1);
            }
            w.snapshot()
        };
        let a = run();
        assert!(!a.is_empty());
        assert_eq!(a, run());
    }

    #[test]
    fn broadcast_respects_radio_range() {
        let mut w = World::new(quiet_params(), 1);
        let s = w.spawn(Vec2::new(1000.0, 1000.0), Vec2::ZERO);
        w.spawn(Vec2::new(1010.0, 1000.0), Vec2::ZERO);
        w.spawn(Vec2::new(1600.0, 1000.0), Vec2::ZERO);
        let beacon = w.emit_beacon(s).unwrap();
        let mut heard = Vec::new();
        let n = w
            .broadcast(&beacon, |ctx| {
                heard.push(ctx.receiver);
                Ok::<_, Infallible>(())
            })
            .unwrap();
        assert_eq!(n, 1);
        assert_eq!(heard, vec![VehicleId(1)]);
    }

    #[test]
    fn detection_sees_the_table_before_the_update() {
        let mut w = World::new(quiet_params(), 1);
        let s = w.spawn(Vec2::new(1000.0, 1000.0), Vec2::ZERO);
        w.spawn(Vec2::new(1010.0, 1000.0), Vec2::ZERO);
        let beacon = w.emit_beacon(s).unwrap();
        let mut sizes = Vec::new();
        for _ in 0..2 {
            w.broadcast(&beacon, |ctx| {
                sizes.push(ctx.evidence.neighbor_table.len());
                Ok::<_, Infallible>(())
            })
            .unwrap();
        }
        assert_eq!(sizes, vec![0, 1]);
    }

    #[test]
    fn beacons_carry_claimed_positions_and_fresh_neighbors() {
        let mut w = World::new(
            WorldParams {
                strategy: Strategy::FixedOffset(Vec2::new(300.0, 300.0)),
                ..quiet_params()
            },
            1,
        );
        let honest = w.spawn_with_role(Vec2::new(100.0, 200.0), Vec2::ZERO, false);
        let liar = w.spawn_with_role(Vec2::new(100.0, 200.0), Vec2::ZERO, true);
        let b = w.emit_beacon(honest).unwrap();
        assert_eq!(b.claimed_position, Vec2::new(100.0, 200.0));
        assert!(b.neighbor_ids.is_empty());
        w.broadcast(&b, |_| Ok::<_, Infallible>(())).unwrap();
        let b = w.emit_beacon(liar).unwrap();
        assert_eq!(b.claimed_position, Vec2::new(400.0, 500.0));
        // The attacker's list is its genuine table.
        assert_eq!(&*b.neighbor_ids, &[honest]);
    }

    #[test]
    fn beacon_schedule_advances_by_one_interval() {
        let mut w = World::new(quiet_params(), 9);
        let id = w.spawn(Vec2::new(500.0, 500.0), Vec2::ZERO);
        let first = w.vehicle(id).unwrap().state.next_beacon_time;
        assert!((0.0..1.0).contains(&first));
        w.emit_beacon(id).unwrap();
        assert_eq!(w.vehicle(id).unwrap().state.next_beacon_time, first + 1.0);
    }
}
