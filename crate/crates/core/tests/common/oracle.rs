//! Brute-force reference implementations used by the integration and
//! acceptance tests. Everything here works on plain slices and loop nests and
//! calls nothing from the library except data accessors.

#![allow(dead_code)]

use std::f64::consts::PI;

use semnav::costmap::CostMap;
use semnav::planner::{CostScaling, DecayClock, OccupancyGrid, PlannerConfig};

/// Pose after flying `(v, ω)` for `t` seconds from `(x, y, θ)`, in one shot.
pub fn closed_form_pose(x: f64, y: f64, theta: f64, v: f64, omega: f64, t: f64) -> (f64, f64, f64) {
    if omega == 0.0 {
        (x + v * t * theta.cos(), y + v * t * theta.sin(), theta)
    } else {
        let r = v / omega;
        let th = theta + omega * t;
        (x + r * (th.sin() - theta.sin()), y + r * (theta.cos() - th.cos()), th)
    }
}

/// Smallest absolute angle between two headings.
pub fn heading_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

fn wrap(a: f64) -> f64 {
    let r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// Flattened copy of the world as the planner sees it.
pub struct Scene {
    pub width: usize,
    pub height: usize,
    pub resolution: f64,
    pub origin: (f64, f64),
    pub costs: Vec<f64>,
    pub occupied: Vec<bool>,
}

impl Scene {
    pub fn from_maps(cm: &CostMap, obstacles: &OccupancyGrid) -> Self {
        let g = cm.geometry();
        let mut occupied = Vec::with_capacity(g.width * g.height);
        for row in 0..g.height {
            for col in 0..g.width {
                occupied.push(obstacles.is_occupied_cell(col, row));
            }
        }
        Scene {
            width: g.width,
            height: g.height,
            resolution: g.resolution,
            origin: g.origin,
            costs: cm.costs().to_vec(),
            occupied,
        }
    }

    fn cell(&self, x: f64, y: f64) -> Option<usize> {
        let col = ((x - self.origin.0) / self.resolution).floor();
        let row = ((y - self.origin.1) / self.resolution).floor();
        if col < 0.0 || row < 0.0 || col >= self.width as f64 || row >= self.height as f64 {
            return None;
        }
        Some(row as usize * self.width + col as usize)
    }

    fn cost_at(&self, x: f64, y: f64) -> f64 {
        self.cell(x, y).map_or(1.0, |i| self.costs[i])
    }

    fn blocked(&self, x: f64, y: f64) -> bool {
        self.cell(x, y).is_some_and(|i| self.occupied[i])
    }

    /// Nearest obstacle center within `radius`, scanning every cell.
    fn nearest(&self, x: f64, y: f64, radius: f64) -> Option<f64> {
        let mut best: Option<f64> = None;
        for i in 0..self.occupied.len() {
            if !self.occupied[i] {
                continue;
            }
            let cx = self.origin.0 + ((i % self.width) as f64 + 0.5) * self.resolution;
            let cy = self.origin.1 + ((i / self.width) as f64 + 0.5) * self.resolution;
            let d = ((x - cx) * (x - cx) + (y - cy) * (y - cy)).sqrt();
            if d <= radius && best.map_or(true, |b| d < b) {
                best = Some(d);
            }
        }
        best
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleChoice {
    pub v: f64,
    pub omega: f64,
    pub recovery: bool,
    pub score: f64,
}

fn axis(current: f64, lo: f64, hi: f64, acc: f64, dt: f64, n: usize) -> Vec<f64> {
    let mut a = current - acc * dt;
    let mut b = current + acc * dt;
    if a < lo {
        a = lo;
    }
    if b > hi {
        b = hi;
    }
    if a > b {
        let c = current.max(lo).min(hi);
        a = c;
        b = c;
    }
    let mut out = Vec::new();
    for i in 0..n {
        out.push(if i == n - 1 { b } else { a + (b - a) * (i as f64 / (n - 1) as f64) });
    }
    out
}

/// Exhaustive evaluation of every `(v, ω)` sample followed by a linear scan
/// for the best one.
pub fn brute_force_select(
    scene: &Scene,
    state: (f64, f64, f64, f64, f64),
    goal: (f64, f64),
    mission_time: f64,
    cfg: &PlannerConfig,
) -> OracleChoice {
    let (x0, y0, th0, v0, w0) = state;
    let l = &cfg.limits;
    let vs = axis(v0, l.v_min, l.v_max, l.a_lin, cfg.dt, cfg.n_v);
    let ws = axis(w0, l.omega_min, l.omega_max, l.a_ang, cfg.dt, cfg.n_omega);
    let k = (cfg.horizon / cfg.dt).round() as usize;
    let t0 = if cfg.decay_clock == DecayClock::Mission { mission_time } else { 0.0 };

    // (v, ω, H, D, V, C)
    let mut rows: Vec<[f64; 6]> = Vec::new();
    for &v in &vs {
        for &w in &ws {
            let (mut x, mut y, mut th) = (x0, y0, th0);
            let mut hit = false;
            let mut nearest: Option<f64> = None;
            let mut c = 0.0;
            for i in 1..=k {
                if w.abs() < 1e-9 {
                    x += v * cfg.dt * th.cos();
                    y += v * cfg.dt * th.sin();
                } else {
                    let th1 = th + w * cfg.dt;
                    x += v / w * (th1.sin() - th.sin());
                    y += v / w * (th.cos() - th1.cos());
                }
                th = wrap(th + w * cfg.dt);
                if scene.blocked(x, y) {
                    hit = true;
                    break;
                }
                if let Some(d) = scene.nearest(x, y, cfg.d_max) {
                    if nearest.map_or(true, |n| d < n) {
                        nearest = Some(d);
                    }
                }
                c += (-cfg.decay * (t0 + i as f64 * cfg.dt)).exp() * scene.cost_at(x, y);
            }
            if hit {
                continue;
            }
            if let Some(d) = nearest {
                if v > (2.0 * l.a_lin * d).sqrt() {
                    continue;
                }
            }
            let (dx, dy) = (goal.0 - x, goal.1 - y);
            let h = if dx == 0.0 && dy == 0.0 {
                1.0
            } else {
                1.0 - wrap(th - dy.atan2(dx)).abs() / PI
            };
            let d = match nearest {
                None => 1.0,
                Some(n) => n.min(cfg.d_max) / cfg.d_max,
            };
            let vel = (v / l.v_max).max(0.0).min(1.0);
            rows.push([v, w, h, d, vel, c]);
        }
    }

    if rows.is_empty() {
        let v = 0.0f64.max(vs[0]).min(vs[vs.len() - 1]);
        let (lo, hi) = (ws[0], ws[ws.len() - 1]);
        return OracleChoice {
            v,
            omega: if hi.abs() >= lo.abs() { hi } else { lo },
            recovery: true,
            score: 0.0,
        };
    }

    let mut lo = [f64::INFINITY; 6];
    let mut hi = [f64::NEG_INFINITY; 6];
    for r in &rows {
        for j in 2..6 {
            lo[j] = lo[j].min(r[j]);
            hi[j] = hi[j].max(r[j]);
        }
    }
    let norm = |j: usize, val: f64| if hi[j] > lo[j] { (val - lo[j]) / (hi[j] - lo[j]) } else { 1.0 };
    let mut bound = 0.0;
    for i in 1..=k {
        bound += (-cfg.decay * (i as f64 * cfg.dt)).exp();
    }
    let wt = &cfg.weights;

    let mut best: Option<OracleChoice> = None;
    for r in &rows {
        let c_hat = match cfg.cost_scaling {
            CostScaling::Horizon => r[5] / bound,
            CostScaling::Batch => norm(5, r[5]),
        };
        let g = wt.alpha * norm(2, r[2]) + wt.beta * norm(3, r[3]) + wt.gamma * norm(4, r[4]) - wt.epsilon * c_hat;
        let cand = OracleChoice {
            v: r[0],
            omega: r[1],
            recovery: false,
            score: g,
        };
        let better = match best {
            None => true,
            Some(b) => {
                if g != b.score {
                    g > b.score
                } else if cand.v != b.v {
                    cand.v > b.v
                } else if cand.omega.abs() != b.omega.abs() {
                    cand.omega.abs() < b.omega.abs()
                } else {
                    cand.omega < b.omega
                }
            }
        };
        if better {
            best = Some(cand);
        }
    }
    best.unwrap()
}

/// Spatial mean per channel of an `h × w × c` buffer.
pub fn gap(h: usize, w: usize, c: usize, data: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for ch in 0..c {
        let mut s = 0.0;
        for r in 0..h {
            for col in 0..w {
                s += data[(r * w + col) * c + ch];
            }
        }
        out.push(s / (h * w) as f64);
    }
    out
}

/// Pooled `p × p` tiles, grid row-major, channels innermost.
pub fn flatten(h: usize, w: usize, c: usize, data: &[f64], p: usize) -> Vec<f64> {
    let mut out = Vec::new();
    for ti in 0..h / p {
        for tj in 0..w / p {
            for ch in 0..c {
                let mut s = 0.0;
                for u in 0..p {
                    for q in 0..p {
                        s += data[((ti * p + u) * w + tj * p + q) * c + ch];
                    }
                }
                out.push(s / (p * p) as f64);
            }
        }
    }
    out
}

/// `W x + b` with `W` given as `outputs × inputs`, then the named activation.
pub fn dense(w: &[f64], b: &[f64], x: &[f64], activation: &str) -> Vec<f64> {
    let n = x.len();
    let mut out = Vec::new();
    for o in 0..b.len() {
        let mut z = 0.0;
        for i in 0..n {
            z += w[o * n + i] * x[i];
        }
        z += b[o];
        out.push(match activation {
            "sigmoid" => 1.0 / (1.0 + (-z).exp()),
            "relu" => {
                if z > 0.0 {
                    z
                } else {
                    0.0
                }
            }
            _ => z,
        });
    }
    out
}

/// Zero-padded, stride-1 cross-correlation. Weights are `[out][in][ky][kx]`.
#[allow(clippy::too_many_arguments)]
pub fn conv(h: usize, w: usize, cin: usize, data: &[f64], k: usize, weights: &[f64], bias: &[f64]) -> Vec<f64> {
    let cout = bias.len();
    let half = (k / 2) as i64;
    let mut out = vec![0.0; h * w * cout];
    for r in 0..h as i64 {
        for c in 0..w as i64 {
            for o in 0..cout {
                let mut acc = bias[o];
                for ky in 0..k as i64 {
                    for kx in 0..k as i64 {
                        let (rr, cc) = (r + ky - half, c + kx - half);
                        if rr < 0 || cc < 0 || rr >= h as i64 || cc >= w as i64 {
                            continue;
                        }
                        for i in 0..cin {
                            let wi = ((o * cin + i) * k + ky as usize) * k + kx as usize;
                            acc += weights[wi] * data[((rr as usize) * w + cc as usize) * cin + i];
                        }
                    }
                }
                out[((r as usize) * w + c as usize) * cout + o] = acc;
            }
        }
    }
    out
}

/// `f + conv3x3(f) ⊙ (W_ctx · mean(f) + b_ctx)` broadcast over pixels.
#[allow(clippy::too_many_arguments)]
pub fn attention(
    h: usize,
    w: usize,
    c: usize,
    data: &[f64],
    ctx_w: &[f64],
    ctx_b: &[f64],
    sp_w: &[f64],
    sp_b: &[f64],
) -> Vec<f64> {
    let pooled = gap(h, w, c, data);
    let ctx = dense(ctx_w, ctx_b, &pooled, "identity");
    let spatial = conv(h, w, c, data, 3, sp_w, sp_b);
    let mut out = data.to_vec();
    for p in 0..h * w {
        for ch in 0..c {
            out[p * c + ch] += spatial[p * c + ch] * ctx[ch];
        }
    }
    out
}
