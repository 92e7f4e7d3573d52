//! Semantic-aware Dynamic Window Approach.
//!
//! Each control cycle:
//!
//! 1. the [`DynamicWindow`] bounds the velocities reachable within one `dt`;
//! 2. an `n_v × n_ω` grid of commands is sampled over it, endpoints included;
//! 3. each command is rolled out for the planning horizon and dropped if it
//!    hits an obstacle cell or could not brake before the nearest obstacle;
//! 4. survivors are scored with
//!    `G = α·Ĥ + β·D̂ + γ·V̂ − ε·Ĉ`
//!    where `H`, `D`, `V` reward goal heading, clearance and speed and `C` is
//!    the time-decayed semantic cost collected along the rollout.
//!
//! `C` enters with a negative sign: it measures how unreliable the terrain is
//! for localization, so it is a penalty under maximization.
//!
//! `Ĥ`, `D̂`, `V̂` are min-max normalized over the admissible batch (an all-equal
//! batch maps to 1). `Ĉ` is scaled by default against the largest value the
//! term can take over one horizon ([`CostScaling::Horizon`]); with a
//! mission-clock decay this lets the semantic penalty fade as the mission goes
//! on. [`CostScaling::Batch`] applies min-max to `C` like the other terms.

mod kinematics;
mod occupancy;
mod terms;

pub use kinematics::{
    advance, angle_diff, normalize_angle, rollout, Command, Pose, Trajectory, TrajectorySample, UavState,
    STRAIGHT_EPS,
};
pub use occupancy::OccupancyGrid;
pub use terms::{
    clearance, clearance_score, clearance_term, heading_term, semantic_cost_term, velocity_term, Clearance,
};

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::costmap::CostMap;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("invalid planner configuration: {0}")]
pub struct ConfigError(pub String);

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinodynamicLimits {
    pub v_min: f64,
    pub v_max: f64,
    pub omega_min: f64,
    pub omega_max: f64,
    /// Largest linear acceleration or deceleration, m/s².
    pub a_lin: f64,
    /// Largest angular acceleration or deceleration, rad/s².
    pub a_ang: f64,
}

impl Default for KinodynamicLimits {
    fn default() -> Self {
        Self {
            v_min: 0.0,
            v_max: 1.5,
            omega_min: -1.0,
            omega_max: 1.0,
            a_lin: 1.0,
            a_ang: 2.0,
        }
    }
}

impl KinodynamicLimits {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let finite = [self.v_min, self.v_max, self.omega_min, self.omega_max, self.a_lin, self.a_ang]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return invalid("limits must be finite");
        }
        if self.v_min > self.v_max {
            return invalid(format!("v_min {} > v_max {}", self.v_min, self.v_max));
        }
        if self.omega_min > self.omega_max {
            return invalid(format!("omega_min {} > omega_max {}", self.omega_min, self.omega_max));
        }
        if self.v_max <= 0.0 {
            return invalid("v_max must be positive");
        }
        if self.a_lin <= 0.0 || self.a_ang <= 0.0 {
            return invalid("a_lin and a_ang must be positive");
        }
        Ok(())
    }
}

/// Weights of heading, clearance, velocity and semantic cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveWeights {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub epsilon: f64,
}

impl Default for ObjectiveWeights {
    fn default() -> Self {
        Self {
            alpha: 0.8,
            beta: 0.1,
            gamma: 0.1,
            epsilon: 1.0,
        }
    }
}

impl ObjectiveWeights {
    pub fn scaled(self, k: f64) -> Self {
        Self {
            alpha: self.alpha * k,
            beta: self.beta * k,
            gamma: self.gamma * k,
            epsilon: self.epsilon * k,
        }
    }
}

/// Which clock the cost decay `exp(−decay·t)` reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayClock {
    /// Time since the mission started: penalties fade as the mission goes on.
    Mission,
    /// Time since the start of each rollout.
    Rollout,
}

/// How the raw semantic cost is brought into `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostScaling {
    /// Divide by `Σ_i exp(−decay·i·dt)`, the cost of a horizon spent entirely
    /// on cost-1 cells.
    Horizon,
    /// Min-max over the admissible batch, like the other terms.
    Batch,
}

macro_rules! keyword_enum {
    ($ty:ident { $($name:literal => $variant:ident),+ }) => {
        impl FromStr for $ty {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($name => Ok($ty::$variant),)+
                    other => Err(format!(
                        "unknown value {other:?} (expected one of: {})",
                        [$($name),+].join(", ")
                    )),
                }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($ty::$variant => $name,)+ })
            }
        }
    };
}

keyword_enum!(DecayClock { "mission" => Mission, "rollout" => Rollout });
keyword_enum!(CostScaling { "horizon" => Horizon, "batch" => Batch });

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerConfig {
    pub weights: ObjectiveWeights,
    /// Per-second decay rate of the semantic cost.
    pub decay: f64,
    pub decay_clock: DecayClock,
    pub cost_scaling: CostScaling,
    /// Rollout step and control period, seconds.
    pub dt: f64,
    /// Rollout length, seconds; a whole multiple of `dt`.
    pub horizon: f64,
    pub n_v: usize,
    pub n_omega: usize,
    /// Clearance saturation distance; obstacles farther away are ignored.
    pub d_max: f64,
    pub limits: KinodynamicLimits,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            weights: ObjectiveWeights::default(),
            decay: 0.2,
            decay_clock: DecayClock::Mission,
            cost_scaling: CostScaling::Horizon,
            dt: 0.25,
            horizon: 2.5,
            n_v: 7,
            n_omega: 7,
            d_max: 2.0,
            limits: KinodynamicLimits::default(),
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.limits.validate()?;
        let w = &self.weights;
        if [w.alpha, w.beta, w.gamma, w.epsilon].iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return invalid("objective weights must be finite and nonnegative");
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return invalid("dt must be positive");
        }
        if !(self.horizon.is_finite() && self.horizon >= self.dt) {
            return invalid("horizon must be at least dt");
        }
        let ratio = self.horizon / self.dt;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) {
            return invalid(format!("horizon {} is not a whole multiple of dt {}", self.horizon, self.dt));
        }
        if self.n_v < 2 || self.n_omega < 2 {
            return invalid("n_v and n_omega must be at least 2");
        }
        if !(self.decay.is_finite() && self.decay >= 0.0) {
            return invalid("decay must be nonnegative");
        }
        if !(self.d_max.is_finite() && self.d_max > 0.0) {
            return invalid("d_max must be positive");
        }
        Ok(())
    }

    /// Samples per rollout, `round(horizon / dt)`.
    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }

    /// Mission time offset applied to the decay for a plan issued at `mission_time`.
    pub fn decay_offset(&self, mission_time: f64) -> f64 {
        match self.decay_clock {
            DecayClock::Mission => mission_time,
            DecayClock::Rollout => 0.0,
        }
    }

    /// `Σ_{i=1..k} exp(−decay·i·dt)`.
    pub fn horizon_cost_bound(&self) -> f64 {
        (1..=self.steps()).map(|i| (-self.decay * (i as f64 * self.dt)).exp()).sum()
    }
}

/// Closed velocity intervals reachable within one control period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicWindow {
    pub v: (f64, f64),
    pub omega: (f64, f64),
}

fn reachable(current: f64, lo: f64, hi: f64, accel: f64, dt: f64) -> (f64, f64) {
    let a = lo.max(current - accel * dt);
    let b = hi.min(current + accel * dt);
    if a <= b {
        (a, b)
    } else {
        // Current velocity is far outside the limits; pin to the nearest bound.
        let c = current.clamp(lo, hi);
        (c, c)
    }
}

pub fn dynamic_window(state: &UavState, limits: &KinodynamicLimits, dt: f64) -> DynamicWindow {
    DynamicWindow {
        v: reachable(state.v, limits.v_min, limits.v_max, limits.a_lin, dt),
        omega: reachable(state.omega, limits.omega_min, limits.omega_max, limits.a_ang, dt),
    }
}

fn grid_values(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| {
        if i + 1 == n {
            hi
        } else {
            lo + (hi - lo) * (i as f64 / (n - 1) as f64)
        }
    })
}

impl DynamicWindow {
    pub fn contains(&self, cmd: Command) -> bool {
        (self.v.0..=self.v.1).contains(&cmd.v) && (self.omega.0..=self.omega.1).contains(&cmd.omega)
    }

    /// `n_v × n_ω` commands, `v`-major, both axes including their endpoints.
    pub fn samples(&self, n_v: usize, n_omega: usize) -> Vec<Command> {
        grid_values(self.v.0, self.v.1, n_v)
            .flat_map(|v| grid_values(self.omega.0, self.omega.1, n_omega).map(move |w| Command::new(v, w)))
            .collect()
    }
}

/// Heading, clearance, velocity and semantic cost of one candidate.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Terms {
    pub heading: f64,
    pub clearance: f64,
    pub velocity: f64,
    pub cost: f64,
}

/// A command with the values that ranked it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredCandidate {
    pub command: Command,
    /// Unnormalized terms; `cost` is the decayed semantic cost `C`.
    pub raw: Terms,
    pub normalized: Terms,
    /// `α·Ĥ + β·D̂ + γ·V̂ − ε·Ĉ`.
    pub score: f64,
    /// Set when no candidate was admissible and the command rotates in place.
    pub recovery: bool,
}

impl ScoredCandidate {
    /// Recompute the objective from the stored normalized terms.
    pub fn objective(&self, w: &ObjectiveWeights) -> f64 {
        objective(&self.normalized, w)
    }
}

fn objective(n: &Terms, w: &ObjectiveWeights) -> f64 {
    w.alpha * n.heading + w.beta * n.clearance + w.gamma * n.velocity - w.epsilon * n.cost
}

/// Everything a planning cycle reads.
#[derive(Debug, Clone, Copy)]
pub struct PlanRequest<'a> {
    pub state: UavState,
    pub goal: (f64, f64),
    pub costmap: &'a CostMap,
    pub obstacles: &'a OccupancyGrid,
    /// Seconds since the mission started.
    pub mission_time: f64,
}

/// Raw terms of one sampled command, or `None` if it is inadmissible.
pub fn evaluate_command(req: &PlanRequest<'_>, cfg: &PlannerConfig, cmd: Command) -> Option<Terms> {
    let traj = rollout(&req.state, cmd, cfg.dt, cfg.steps());
    let nearest = match clearance(&traj, req.obstacles, cfg.d_max) {
        Clearance::Collision => return None,
        Clearance::Clear { nearest } => nearest,
    };
    if let Some(d) = nearest {
        if cmd.v > (2.0 * cfg.limits.a_lin * d).sqrt() {
            return None;
        }
    }
    Some(Terms {
        heading: heading_term(&traj, req.goal),
        clearance: clearance_score(nearest, cfg.d_max),
        velocity: velocity_term(cmd.v, &cfg.limits),
        cost: semantic_cost_term(&traj, req.costmap, cfg.decay, cfg.decay_offset(req.mission_time)),
    })
}

#[derive(Clone, Copy)]
struct Span {
    lo: f64,
    hi: f64,
}

impl Span {
    fn of(values: impl Iterator<Item = f64>) -> Self {
        values.fold(
            Span {
                lo: f64::INFINITY,
                hi: f64::NEG_INFINITY,
            },
            |s, v| Span {
                lo: s.lo.min(v),
                hi: s.hi.max(v),
            },
        )
    }

    fn normalize(self, v: f64) -> f64 {
        if self.hi > self.lo {
            (v - self.lo) / (self.hi - self.lo)
        } else {
            1.0
        }
    }
}

/// Order used to pick the winner: higher score, then higher `v`, then smaller
/// `|ω|`, then smaller `ω`. `Greater` means `a` wins.
fn rank(a: &ScoredCandidate, b: &ScoredCandidate) -> Ordering {
    a.score
        .total_cmp(&b.score)
        .then(a.command.v.total_cmp(&b.command.v))
        .then(b.command.omega.abs().total_cmp(&a.command.omega.abs()))
        .then(b.command.omega.total_cmp(&a.command.omega))
}

/// Score every admissible sample of the window. Order follows
/// [`DynamicWindow::samples`].
pub fn score_candidates(req: &PlanRequest<'_>, cfg: &PlannerConfig) -> Vec<ScoredCandidate> {
    let window = dynamic_window(&req.state, &cfg.limits, cfg.dt);
    let admissible: Vec<(Command, Terms)> = window
        .samples(cfg.n_v, cfg.n_omega)
        .into_iter()
        .filter_map(|cmd| evaluate_command(req, cfg, cmd).map(|t| (cmd, t)))
        .collect();
    let heading = Span::of(admissible.iter().map(|(_, t)| t.heading));
    let clear = Span::of(admissible.iter().map(|(_, t)| t.clearance));
    let vel = Span::of(admissible.iter().map(|(_, t)| t.velocity));
    let cost = Span::of(admissible.iter().map(|(_, t)| t.cost));
    let bound = cfg.horizon_cost_bound();
    admissible
        .into_iter()
        .map(|(command, raw)| {
            let normalized = Terms {
                heading: heading.normalize(raw.heading),
                clearance: clear.normalize(raw.clearance),
                velocity: vel.normalize(raw.velocity),
                cost: match cfg.cost_scaling {
                    CostScaling::Horizon => raw.cost / bound,
                    CostScaling::Batch => cost.normalize(raw.cost),
                },
            };
            ScoredCandidate {
                command,
                raw,
                normalized,
                score: objective(&normalized, &cfg.weights),
                recovery: false,
            }
        })
        .collect()
}

/// Rotate in place as fast as the window allows, at the slowest reachable
/// non-negative speed.
pub fn recovery_command(window: &DynamicWindow) -> Command {
    let v = 0.0f64.clamp(window.v.0, window.v.1);
    let (lo, hi) = window.omega;
    let omega = if hi.abs() >= lo.abs() { hi } else { lo };
    Command::new(v, omega)
}

/// Pick the best admissible command, or a flagged recovery rotation when
/// every sample is inadmissible.
pub fn select_velocity(req: &PlanRequest<'_>, cfg: &PlannerConfig) -> ScoredCandidate {
    let best = score_candidates(req, cfg).into_iter().max_by(rank);
    best.unwrap_or_else(|| {
        let window = dynamic_window(&req.state, &cfg.limits, cfg.dt);
        log::debug!("no admissible command at ({:.3}, {:.3}); recovering", req.state.x, req.state.y);
        ScoredCandidate {
            command: recovery_command(&window),
            raw: Terms::default(),
            normalized: Terms::default(),
            score: 0.0,
            recovery: true,
        }
    })
}
