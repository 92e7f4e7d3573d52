use std::fmt;

use super::record::{RunRecord, StepRecord};
use super::scenario::Scenario;
use super::world::{sense, Prior, SensorSpec, World};
use super::SimError;
use crate::costmap::LabelCostTable;
use crate::keyframe::KeyframeModel;
use crate::pipeline::Pipeline;
use crate::planner::{advance, PlannerConfig, UavState};

/// Consecutive recovery commands after which an episode gives up.
pub const RECOVERY_LIMIT: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Reached,
    Timeout,
    RecoveryStuck,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Reached => "reached",
            Outcome::Timeout => "timeout",
            Outcome::RecoveryStuck => "recovery_stuck",
        })
    }
}

/// Everything besides the world that shapes an episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeConfig {
    pub planner: PlannerConfig,
    pub cost_table: LabelCostTable,
    pub prior: Prior,
    pub sensor: SensorSpec,
    pub max_steps: usize,
}

impl EpisodeConfig {
    pub fn from_scenario(s: &Scenario) -> Self {
        Self {
            planner: s.planner,
            cost_table: s.cost_table.clone(),
            prior: s.prior,
            sensor: s.sensor,
            max_steps: s.max_steps,
        }
    }
}

/// Fly from the world's start towards its goal.
///
/// Row `i` holds the pose at `t = i·dt` and the command issued there. The last
/// row is the final pose with a zero command.
pub fn run_episode(world: &World, cfg: &EpisodeConfig, keyframe: Option<&KeyframeModel>) -> Result<RunRecord, SimError> {
    world.validate()?;
    let dt = cfg.planner.dt;
    let mut pipeline = Pipeline::new(
        world.prior_map(cfg.prior),
        cfg.cost_table.clone(),
        world.obstacle_labels.clone(),
        cfg.planner,
        keyframe.cloned(),
    );
    let mut state = world.start_state();
    let mut steps = Vec::new();
    let mut streak = 0;
    let mut i = 0usize;
    let outcome = loop {
        let t = i as f64 * dt;
        let reached = (state.x - world.goal.0).hypot(state.y - world.goal.1) <= world.goal_radius;
        let stop = if reached {
            Some(Outcome::Reached)
        } else if streak >= RECOVERY_LIMIT {
            Some(Outcome::RecoveryStuck)
        } else if i >= cfg.max_steps {
            Some(Outcome::Timeout)
        } else {
            None
        };
        let unreliable = world.is_unreliable(state.x, state.y);
        if let Some(outcome) = stop {
            steps.push(StepRecord::logged(t, state.x, state.y, state.theta, 0.0, 0.0, false, 0.0, unreliable));
            break outcome;
        }
        let frame = pipeline.ingest(&sense(world, &state, &cfg.sensor))?;
        let choice = pipeline.plan(state, world.goal, t);
        streak = if choice.recovery { streak + 1 } else { 0 };
        let cmd = choice.command;
        steps.push(StepRecord::logged(
            t,
            state.x,
            state.y,
            state.theta,
            cmd.v,
            cmd.omega,
            frame.applied,
            choice.raw.cost,
            unreliable,
        ));
        let next = advance(state.pose(), cmd, dt);
        state = UavState::new(next.x, next.y, next.theta, cmd.v, cmd.omega);
        i += 1;
    };
    log::info!("{}: {} after {} steps", world.name, outcome, i);
    Ok(RunRecord {
        world_name: world.name.clone(),
        outcome,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costmap::{GridGeometry, SemanticMap};
    use crate::labels::{GRASS, WALL};
    use crate::planner::Pose;
    use crate::sim::compute_metrics;
    use std::collections::BTreeSet;

    fn open_world(goal: (f64, f64), radius: f64) -> World {
        let g = GridGeometry::new(40, 20, 0.5, (0.0, 0.0)).unwrap();
        World {
            name: "open".into(),
            semantic: SemanticMap::filled(g, GRASS).unwrap(),
            obstacle_labels: BTreeSet::from([WALL]),
            unreliable_labels: BTreeSet::new(),
            start: Pose { x: 2.0, y: 5.0, theta: 0.0 },
            goal,
            goal_radius: radius,
            localization_noise: 0.0,
        }
    }

    fn cfg() -> EpisodeConfig {
        EpisodeConfig {
            planner: PlannerConfig::default(),
            cost_table: LabelCostTable::linear(),
            prior: Prior::Unknown,
            sensor: SensorSpec::default(),
            max_steps: 400,
        }
    }

    #[test]
    fn straight_to_goal() {
        let w = open_world((7.0, 5.0), 0.3);
        let rec = run_episode(&w, &cfg(), None).unwrap();
        assert_eq!(rec.outcome, Outcome::Reached);
        let m = compute_metrics(&rec.steps, &w);
        assert!((m.flight_distance - 5.0).abs() <= 0.5, "{}", m.flight_distance);
        for (i, s) in rec.steps.iter().enumerate() {
            assert_eq!(s.t, crate::sim::round_sig(i as f64 * 0.25));
        }
        let last = rec.steps.last().unwrap();
        assert_eq!((last.v_cmd, last.omega_cmd), (0.0, 0.0));
    }

    #[test]
    fn already_at_goal() {
        let w = open_world((3.0, 5.0), 1.0);
        let rec = run_episode(&w, &cfg(), None).unwrap();
        assert_eq!(rec.outcome, Outcome::Reached);
        assert_eq!(rec.steps.len(), 1);
        assert_eq!(compute_metrics(&rec.steps, &w).flight_distance, 0.0);
    }

    #[test]
    fn walled_off_goal_terminates() {
        let mut w = open_world((17.0, 5.0), 0.3);
        let g = *w.semantic.geometry();
        let labels = (0..g.len()).map(|i| if i % 40 == 20 { WALL } else { GRASS }).collect();
        w.semantic = SemanticMap::new(g, labels).unwrap();
        let mut c = cfg();
        c.max_steps = 300;
        let rec = run_episode(&w, &c, None).unwrap();
        assert!(matches!(rec.outcome, Outcome::Timeout | Outcome::RecoveryStuck), "{:?}", rec.outcome);
    }

    #[test]
    fn deterministic() {
        let w = open_world((15.0, 8.0), 0.3);
        let a = run_episode(&w, &cfg(), None).unwrap();
        let b = run_episode(&w, &cfg(), None).unwrap();
        assert_eq!(a, b);
    }
}
