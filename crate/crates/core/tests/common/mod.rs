#![allow(dead_code)]

pub mod bridge_harness;
pub mod oracle;

use std::collections::BTreeSet;

use rand::Rng;
use semnav::costmap::{CostMap, GridGeometry, LabelCostTable, SemanticMap};
use semnav::labels::{NUM_CLASSES, ROOF};
use semnav::planner::{
    CostScaling, DecayClock, KinodynamicLimits, ObjectiveWeights, OccupancyGrid, PlanRequest, PlannerConfig,
    UavState,
};

/// One randomized planning problem.
pub struct Case {
    pub costmap: CostMap,
    pub obstacles: OccupancyGrid,
    pub config: PlannerConfig,
    pub state: UavState,
    pub goal: (f64, f64),
    pub mission_time: f64,
}

impl Case {
    pub fn request(&self) -> PlanRequest<'_> {
        PlanRequest {
            state: self.state,
            goal: self.goal,
            costmap: &self.costmap,
            obstacles: &self.obstacles,
            mission_time: self.mission_time,
        }
    }
}

pub fn random_limits<R: Rng>(rng: &mut R) -> KinodynamicLimits {
    let v_min = if rng.gen_bool(0.7) { 0.0 } else { rng.gen_range(0.0..0.3) };
    let w = rng.gen_range(0.3..1.5);
    KinodynamicLimits {
        v_min,
        v_max: rng.gen_range(v_min + 0.2..2.0),
        omega_min: -w,
        omega_max: if rng.gen_bool(0.7) { w } else { rng.gen_range(0.0..w) },
        a_lin: rng.gen_range(0.3..2.0),
        a_ang: rng.gen_range(0.5..3.0),
    }
}

pub fn random_config<R: Rng>(rng: &mut R) -> PlannerConfig {
    let dt = [0.1, 0.2, 0.25, 0.5][rng.gen_range(0..4)];
    let steps = rng.gen_range(2..=12);
    PlannerConfig {
        weights: ObjectiveWeights {
            alpha: rng.gen_range(0.0..1.0),
            beta: rng.gen_range(0.0..1.0),
            gamma: rng.gen_range(0.0..1.0),
            epsilon: rng.gen_range(0.0..3.0),
        },
        decay: rng.gen_range(0.0..0.5),
        decay_clock: if rng.gen_bool(0.5) { DecayClock::Mission } else { DecayClock::Rollout },
        cost_scaling: if rng.gen_bool(0.5) { CostScaling::Horizon } else { CostScaling::Batch },
        dt,
        horizon: steps as f64 * dt,
        n_v: 7,
        n_omega: 7,
        d_max: rng.gen_range(0.5..3.0),
        limits: random_limits(rng),
    }
}

pub fn random_labels<R: Rng>(rng: &mut R, geometry: GridGeometry, obstacle_density: f64) -> SemanticMap {
    let labels = (0..geometry.len())
        .map(|_| {
            if rng.gen_bool(obstacle_density) {
                ROOF
            } else {
                rng.gen_range(0..NUM_CLASSES as u8)
            }
        })
        .collect();
    SemanticMap::new(geometry, labels).unwrap()
}

pub fn random_table<R: Rng>(rng: &mut R) -> LabelCostTable {
    let mut costs = [0.0; NUM_CLASSES];
    costs.iter_mut().for_each(|c| *c = rng.gen_range(0.0..=1.0));
    LabelCostTable::from_costs(costs).unwrap()
}

pub fn random_case<R: Rng>(rng: &mut R) -> Case {
    let geometry = GridGeometry::new(
        rng.gen_range(12..30),
        rng.gen_range(12..30),
        [0.25, 0.5, 1.0][rng.gen_range(0..3)],
        (rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)),
    )
    .unwrap();
    let density = [0.0, 0.02, 0.08][rng.gen_range(0..3)];
    let sem = random_labels(rng, geometry, density);
    let table = if rng.gen_bool(0.3) { LabelCostTable::linear() } else { random_table(rng) };
    let config = random_config(rng);
    let (w, h) = (geometry.width as f64 * geometry.resolution, geometry.height as f64 * geometry.resolution);
    let (ox, oy) = geometry.origin;
    let l = &config.limits;
    let state = UavState::new(
        ox + rng.gen_range(0.2..0.8) * w,
        oy + rng.gen_range(0.2..0.8) * h,
        rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
        rng.gen_range(l.v_min..=l.v_max),
        rng.gen_range(l.omega_min..=l.omega_max),
    );
    Case {
        costmap: CostMap::from_semantic(&sem, &table),
        obstacles: OccupancyGrid::from_labels(&sem, &BTreeSet::from([ROOF])),
        config,
        state,
        goal: (ox + rng.gen_range(0.0..w), oy + rng.gen_range(0.0..h)),
        mission_time: rng.gen_range(0.0..60.0),
    }
}

/// The oracle's answer for a case.
pub fn oracle_choice(case: &Case) -> oracle::OracleChoice {
    let s = case.state;
    oracle::brute_force_select(
        &oracle::Scene::from_maps(&case.costmap, &case.obstacles),
        (s.x, s.y, s.theta, s.v, s.omega),
        case.goal,
        case.mission_time,
        &case.config,
    )
}
