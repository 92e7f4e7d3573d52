use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use super::scenario::{RawScenario, Scenario, ScenarioError};
use super::SimError;
use crate::costmap::{GridGeometry, SemanticMap};
use crate::labels::{MAX_LABEL, UNLABELED};
use crate::pgm::load_semantic_map;
use crate::planner::{Pose, UavState};

/// What the planner knows about the world before sensing anything.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Prior {
    /// Every cell starts unlabeled (class 0).
    Unknown,
    /// The planner starts with the ground-truth labels.
    Full,
}

impl FromStr for Prior {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "unknown" => Ok(Prior::Unknown),
            "full" => Ok(Prior::Full),
            other => Err(format!("unknown prior {other:?} (expected unknown or full)")),
        }
    }
}

impl fmt::Display for Prior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Prior::Unknown => "unknown",
            Prior::Full => "full",
        })
    }
}

/// Downward camera footprint: a square of `footprint` cells centered
/// `offset` meters ahead of the vehicle, axis-aligned with the map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorSpec {
    pub footprint: usize,
    pub offset: f64,
}

impl Default for SensorSpec {
    fn default() -> Self {
        Self {
            footprint: 21,
            offset: 3.0,
        }
    }
}

/// Ground truth for one simulated mission.
#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub name: String,
    pub semantic: SemanticMap,
    pub obstacle_labels: BTreeSet<u8>,
    pub unreliable_labels: BTreeSet<u8>,
    pub start: Pose,
    pub goal: (f64, f64),
    pub goal_radius: f64,
    /// Reserved for pose-noise injection; the simulator flies ground truth and
    /// ignores it.
    pub localization_noise: f64,
}

impl World {
    pub fn validate(&self) -> Result<(), SimError> {
        let g = self.semantic.geometry();
        if !g.contains(self.start.x, self.start.y) {
            return Err(SimError::World("start out of bounds".into()));
        }
        if !g.contains(self.goal.0, self.goal.1) {
            return Err(SimError::World("goal out of bounds".into()));
        }
        for (name, set) in [("obstacle_labels", &self.obstacle_labels), ("unreliable_labels", &self.unreliable_labels)] {
            if let Some(l) = set.iter().find(|&&l| l > MAX_LABEL) {
                return Err(SimError::World(format!("{name} contains invalid label {l}")));
            }
        }
        if !(self.goal_radius.is_finite() && self.goal_radius >= 0.0) {
            return Err(SimError::World("goal_radius must be nonnegative".into()));
        }
        Ok(())
    }

    pub fn from_scenario(s: &Scenario, semantic: SemanticMap) -> Result<Self, SimError> {
        let world = Self {
            name: s.name.clone(),
            semantic,
            obstacle_labels: s.obstacle_labels.clone(),
            unreliable_labels: s.unreliable_labels.clone(),
            start: Pose {
                x: s.start.0,
                y: s.start.1,
                theta: s.start.2,
            },
            goal: s.goal,
            goal_radius: s.goal_radius,
            localization_noise: 0.0,
        };
        world.validate()?;
        Ok(world)
    }

    pub fn start_state(&self) -> UavState {
        UavState::at_rest(self.start.x, self.start.y, self.start.theta)
    }

    pub fn is_unreliable(&self, x: f64, y: f64) -> bool {
        self.semantic
            .label_at(x, y)
            .is_some_and(|l| self.unreliable_labels.contains(&l))
    }

    /// Number of cells carrying an obstacle label.
    pub fn obstacle_cells(&self) -> usize {
        self.semantic
            .labels()
            .iter()
            .filter(|l| self.obstacle_labels.contains(l))
            .count()
    }

    /// What the planner is told before the first frame.
    pub fn prior_map(&self, prior: Prior) -> SemanticMap {
        match prior {
            Prior::Full => self.semantic.clone(),
            Prior::Unknown => SemanticMap::filled(*self.semantic.geometry(), UNLABELED).expect("valid geometry"),
        }
    }
}

/// Load a map and the scenario describing the mission flown over it.
pub fn load_world(map_path: &Path, scenario_path: &Path) -> Result<World, SimError> {
    let scenario = RawScenario::load(scenario_path)?.resolve()?;
    let semantic = load_semantic_map(map_path)?;
    World::from_scenario(&scenario, semantic)
}

/// Load a scenario and the map it references.
pub fn load_scenario(path: &Path) -> Result<(Scenario, World), SimError> {
    load_raw_scenario(RawScenario::load(path)?)
}

pub fn load_raw_scenario(raw: RawScenario) -> Result<(Scenario, World), SimError> {
    let scenario = raw.resolve()?;
    let semantic = load_semantic_map(&scenario.map)?;
    let world = World::from_scenario(&scenario, semantic)?;
    Ok((scenario, world))
}

impl From<ScenarioError> for SimError {
    fn from(e: ScenarioError) -> Self {
        SimError::Scenario(Box::new(e))
    }
}

/// Label patch seen by the camera. Cells beyond the map read as unlabeled.
pub fn sense(world: &World, state: &UavState, spec: &SensorSpec) -> SemanticMap {
    let g = world.semantic.geometry();
    let cx = state.x + spec.offset * state.theta.cos();
    let cy = state.y + spec.offset * state.theta.sin();
    let (ccol, crow) = g.cell_coords(cx, cy);
    let half = (spec.footprint / 2) as i64;
    let (col0, row0) = (ccol - half, crow - half);
    let n = spec.footprint;
    let mut labels = Vec::with_capacity(n * n);
    for r in 0..n as i64 {
        for c in 0..n as i64 {
            let label = g
                .checked_cell(col0 + c, row0 + r)
                .map_or(UNLABELED, |(col, row)| world.semantic.get(col, row));
            labels.push(label);
        }
    }
    let geometry = GridGeometry::new(
        n,
        n,
        g.resolution,
        (
            g.origin.0 + col0 as f64 * g.resolution,
            g.origin.1 + row0 as f64 * g.resolution,
        ),
    )
    .expect("footprint >= 1");
    SemanticMap::new(geometry, labels).expect("labels copied from a valid map")
}
