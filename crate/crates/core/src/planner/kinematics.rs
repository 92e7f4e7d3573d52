use std::f64::consts::PI;

/// Below this turn rate a step is integrated as a straight line.
pub const STRAIGHT_EPS: f64 = 1e-9;

/// Wrap an angle into `(−π, π]`.
pub fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// Signed smallest rotation from `b` to `a`, in `(−π, π]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    normalize_angle(a - b)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

/// Planar pose plus the velocities currently being flown.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UavState {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub v: f64,
    pub omega: f64,
}

impl UavState {
    pub fn new(x: f64, y: f64, theta: f64, v: f64, omega: f64) -> Self {
        Self {
            x,
            y,
            theta: normalize_angle(theta),
            v,
            omega,
        }
    }

    pub fn at_rest(x: f64, y: f64, theta: f64) -> Self {
        Self::new(x, y, theta, 0.0, 0.0)
    }

    pub fn pose(&self) -> Pose {
        Pose {
            x: self.x,
            y: self.y,
            theta: self.theta,
        }
    }
}

/// A `(v, ω)` velocity command.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Command {
    pub v: f64,
    pub omega: f64,
}

impl Command {
    pub fn new(v: f64, omega: f64) -> Self {
        Self { v, omega }
    }
}

/// Integrate the unicycle model exactly over one interval of constant `(v, ω)`.
pub fn advance(pose: Pose, cmd: Command, dt: f64) -> Pose {
    let Pose { x, y, theta } = pose;
    let (v, w) = (cmd.v, cmd.omega);
    let (nx, ny) = if w.abs() < STRAIGHT_EPS {
        (x + v * dt * theta.cos(), y + v * dt * theta.sin())
    } else {
        let r = v / w;
        let th1 = theta + w * dt;
        (x + r * (th1.sin() - theta.sin()), y + r * (theta.cos() - th1.cos()))
    };
    Pose {
        x: nx,
        y: ny,
        theta: normalize_angle(theta + w * dt),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    /// Seconds since the start of the rollout.
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub command: Command,
    /// Poses at `t = dt, 2·dt, …`; the start pose is not included.
    pub samples: Vec<TrajectorySample>,
}

impl Trajectory {
    pub fn last(&self) -> Option<&TrajectorySample> {
        self.samples.last()
    }
}

/// Forward-simulate a constant command for `steps` intervals of `dt`.
pub fn rollout(state: &UavState, cmd: Command, dt: f64, steps: usize) -> Trajectory {
    let mut pose = state.pose();
    let samples = (1..=steps)
        .map(|i| {
            pose = advance(pose, cmd, dt);
            TrajectorySample {
                t: i as f64 * dt,
                x: pose.x,
                y: pose.y,
                theta: pose.theta,
            }
        })
        .collect();
    Trajectory { command: cmd, samples }
}
