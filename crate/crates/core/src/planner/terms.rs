//! The four per-candidate terms of the objective, before normalization.

use std::f64::consts::PI;

use super::kinematics::{angle_diff, Trajectory};
use super::occupancy::OccupancyGrid;
use super::KinodynamicLimits;
use crate::costmap::CostMap;

/// Goal alignment of the final pose: 1 when facing the goal, 0 when facing away.
pub fn heading_term(traj: &Trajectory, goal: (f64, f64)) -> f64 {
    let Some(last) = traj.last() else {
        return 1.0;
    };
    let (dx, dy) = (goal.0 - last.x, goal.1 - last.y);
    if dx == 0.0 && dy == 0.0 {
        return 1.0;
    }
    let bearing = dy.atan2(dx);
    1.0 - angle_diff(last.theta, bearing).abs() / PI
}

/// Obstacle proximity of a rollout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Clearance {
    /// Some sample lies inside an obstacle cell.
    Collision,
    /// Distance to the closest obstacle center within `d_max`, if any.
    Clear { nearest: Option<f64> },
}

pub fn clearance(traj: &Trajectory, obstacles: &OccupancyGrid, d_max: f64) -> Clearance {
    let mut nearest: Option<f64> = None;
    for s in &traj.samples {
        if obstacles.is_occupied(s.x, s.y) {
            return Clearance::Collision;
        }
        if let Some(d) = obstacles.nearest_within(s.x, s.y, d_max) {
            if nearest.is_none_or(|n| d < n) {
                nearest = Some(d);
            }
        }
    }
    Clearance::Clear { nearest }
}

/// `min(d, d_max) / d_max`; no obstacle in range scores 1.
pub fn clearance_score(nearest: Option<f64>, d_max: f64) -> f64 {
    nearest.map_or(1.0, |d| d.min(d_max) / d_max)
}

/// Clearance score, or `None` when the rollout collides.
pub fn clearance_term(traj: &Trajectory, obstacles: &OccupancyGrid, d_max: f64) -> Option<f64> {
    match clearance(traj, obstacles, d_max) {
        Clearance::Collision => None,
        Clearance::Clear { nearest } => Some(clearance_score(nearest, d_max)),
    }
}

pub fn velocity_term(v: f64, limits: &KinodynamicLimits) -> f64 {
    (v / limits.v_max).clamp(0.0, 1.0)
}

/// Time-decayed cost accumulated along a rollout:
/// `Σ exp(−decay·(t0 + t_i)) · cost(x_i, y_i)`.
///
/// `t0` is the mission time at which the rollout starts (0 for a
/// rollout-local clock).
pub fn semantic_cost_term(traj: &Trajectory, cm: &CostMap, decay: f64, t0: f64) -> f64 {
    traj.samples
        .iter()
        .map(|s| (-decay * (t0 + s.t)).exp() * cm.sample(s.x, s.y))
        .sum()
}
