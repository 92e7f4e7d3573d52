//! Seeded generators for the two reference worlds.
//!
//! * `village`: a grass field with an asphalt road and parked cars; the
//!   straight line from start to goal runs down the road's southern lane.
//! * `bay`: grass with a lake edge on the direct route, a road that must be
//!   crossed, and a building ringed by a paved strip that stands for its GPS
//!   shadow.
//!
//! Each template writes `<prefix>.pgm`, `<prefix>.meta` and a `<prefix>.toy`
//! scenario referencing the map.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SimError;
use crate::costmap::{GridGeometry, SemanticMap};
use crate::labels::{BALD_TREE, CAR, DIRT, GRASS, GRAVEL, PAVED_AREA, ROOF, VEGETATION, WATER};
use crate::pgm::save_semantic_map;

pub const RESOLUTION: f64 = 0.5;

/// Width in cells of the paved ring around bay buildings.
pub const BUILDING_BUFFER_CELLS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Template {
    Village,
    Bay,
}

pub const TEMPLATE_NAMES: [&str; 2] = ["village", "bay"];

impl FromStr for Template {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "village" => Ok(Template::Village),
            "bay" => Ok(Template::Bay),
            other => Err(format!(
                "unknown template {other:?}; available templates: {}",
                TEMPLATE_NAMES.join(", ")
            )),
        }
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Template::Village => "village",
            Template::Bay => "bay",
        })
    }
}

/// A generated map plus the body of its scenario file (without the `map =`
/// line, which depends on where the map is written).
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedWorld {
    pub template: Template,
    pub map: SemanticMap,
    scenario: String,
}

impl GeneratedWorld {
    pub fn scenario_text(&self, map_file: &str) -> String {
        self.scenario.replace("{map}", map_file)
    }

    /// Write `<prefix>.pgm`, `<prefix>.meta` and `<prefix>.toy`; returns the
    /// scenario path.
    pub fn write(&self, prefix: &Path) -> Result<PathBuf, SimError> {
        let name = prefix
            .file_name()
            .and_then(|n| n.to_str())
            .ok_or_else(|| SimError::World(format!("bad output prefix {}", prefix.display())))?;
        let pgm = prefix.with_file_name(format!("{name}.pgm"));
        let toy = prefix.with_file_name(format!("{name}.toy"));
        save_semantic_map(&self.map, &pgm)?;
        fs::write(&toy, self.scenario_text(&format!("{name}.pgm"))).map_err(|source| SimError::Io {
            path: toy.clone(),
            source,
        })?;
        Ok(toy)
    }
}

struct Canvas {
    w: usize,
    h: usize,
    cells: Vec<u8>,
}

impl Canvas {
    fn new(w: usize, h: usize, fill: u8) -> Self {
        Self {
            w,
            h,
            cells: vec![fill; w * h],
        }
    }

    fn set(&mut self, col: i64, row: i64, label: u8) {
        if (0..self.w as i64).contains(&col) && (0..self.h as i64).contains(&row) {
            self.cells[row as usize * self.w + col as usize] = label;
        }
    }

    fn get(&self, col: usize, row: usize) -> u8 {
        self.cells[row * self.w + col]
    }

    /// Fill cells whose centers fall inside `[x0, x1) × [y0, y1)` meters.
    fn rect(&mut self, x0: f64, y0: f64, x1: f64, y1: f64, label: u8) {
        self.fill_where(label, |x, y| x >= x0 && x < x1 && y >= y0 && y < y1);
    }

    fn ellipse(&mut self, cx: f64, cy: f64, rx: f64, ry: f64, label: u8) {
        self.fill_where(label, |x, y| ((x - cx) / rx).powi(2) + ((y - cy) / ry).powi(2) <= 1.0);
    }

    fn fill_where(&mut self, label: u8, inside: impl Fn(f64, f64) -> bool) {
        for row in 0..self.h {
            for col in 0..self.w {
                let (x, y) = ((col as f64 + 0.5) * RESOLUTION, (row as f64 + 0.5) * RESOLUTION);
                if inside(x, y) {
                    self.cells[row * self.w + col] = label;
                }
            }
        }
    }

    /// Scatter small blobs of `label` over cells currently holding `on`.
    fn speckle(&mut self, rng: &mut ChaCha8Rng, count: usize, label: u8, on: u8) {
        for _ in 0..count {
            let col = rng.gen_range(0..self.w) as i64;
            let row = rng.gen_range(0..self.h) as i64;
            let r = rng.gen_range(0..=2i64);
            for dr in -r..=r {
                for dc in -r..=r {
                    let (c, rr) = (col + dc, row + dr);
                    if dr * dr + dc * dc <= r * r
                        && (0..self.w as i64).contains(&c)
                        && (0..self.h as i64).contains(&rr)
                        && self.get(c as usize, rr as usize) == on
                    {
                        self.set(c, rr, label);
                    }
                }
            }
        }
    }

    fn into_map(self) -> SemanticMap {
        let g = GridGeometry::new(self.w, self.h, RESOLUTION, (0.0, 0.0)).expect("template geometry");
        SemanticMap::new(g, self.cells).expect("template labels are valid")
    }
}

/// Planner settings of the reference scenarios. Only the weight ratios affect
/// the chosen command: this is (α, β, γ, ε) = (0.8, 0.1, 1.0, 2.5) scaled to
/// ε = 1. The semantic cost decays along each rollout rather than over the
/// mission, so the penalty does not vanish on long flights.
const PLANNER_BLOCK: &str = "\
[planner]
alpha = 0.32
beta = 0.04
gamma = 0.4
epsilon = 1.0
decay = 0.2
decay_clock = rollout
cost_scaling = horizon
dt = 0.25
horizon = 2.5
n_v = 7
n_omega = 7
v_min = 0.0
v_max = 1.5
omega_min = -1.0
omega_max = 1.0
a_lin = 1.0
a_ang = 2.0
d_max = 2.0

[sensor]
footprint = 21
offset = 3.0
";

/// Costs shared by both worlds: unknown cells are middling, natural ground is
/// cheap, asphalt, water and buildings are maximal.
const COST_OVERRIDES: &str = "0:0.5, 1:1.0, 2:0.1, 3:0.0, 4:0.1, 5:1.0, 8:0.1, 9:1.0, 17:1.0, 20:0.2";

pub fn generate(template: Template, seed: u64) -> GeneratedWorld {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match template {
        Template::Village => village(&mut rng),
        Template::Bay => bay(&mut rng),
    }
}

fn village(rng: &mut ChaCha8Rng) -> GeneratedWorld {
    let (w, h) = (80, 48);
    let mut c = Canvas::new(w, h, GRASS);
    c.speckle(rng, 40, DIRT, GRASS);
    c.speckle(rng, 25, VEGETATION, GRASS);
    c.speckle(rng, 12, BALD_TREE, GRASS);
    // Road from x = 6 m to x = 34 m; the direct route runs down its southern
    // lane.
    c.rect(6.0, 10.5, 34.0, 14.5, GRAVEL);
    c.rect(6.0, 11.0, 34.0, 14.0, PAVED_AREA);
    // Cars (2 m × 1 m) parked along the northern edge.
    let mut x = 8.0 + rng.gen_range(0.0..3.0);
    while x < 31.0 {
        c.rect(x, 13.0, x + 2.0, 14.0, CAR);
        x += rng.gen_range(4.0..7.0);
    }
    let scenario = format!(
        "# village: grass field with an asphalt road and parked cars\n\
         [world]\n\
         name = village\n\
         map = {{map}}\n\
         start_x = 3.0\n\
         start_y = 12.0\n\
         start_theta = 0.0\n\
         goal_x = 37.0\n\
         goal_y = 12.0\n\
         goal_radius = 0.5\n\
         obstacle_labels = {CAR}\n\
         unreliable_labels = {PAVED_AREA}, {CAR}\n\
         cost_overrides = {COST_OVERRIDES}\n\
         prior = unknown\n\
         max_steps = 600\n\n{PLANNER_BLOCK}"
    );
    GeneratedWorld {
        template: Template::Village,
        map: c.into_map(),
        scenario,
    }
}

fn bay(rng: &mut ChaCha8Rng) -> GeneratedWorld {
    let (w, h) = (100, 80);
    let mut c = Canvas::new(w, h, GRASS);
    c.speckle(rng, 60, DIRT, GRASS);
    c.speckle(rng, 30, VEGETATION, GRASS);
    // Lake overlapping the direct route from the north.
    let lake = (rng.gen_range(15.0..17.0), rng.gen_range(21.5..22.5));
    c.ellipse(lake.0, lake.1, 5.0, 3.5, WATER);
    // North-south road.
    let road_x = rng.gen_range(26.0..28.0);
    c.rect(road_x, 0.0, road_x + 2.0, 40.0, PAVED_AREA);
    // A building just north of the direct route, ringed by its paved shadow.
    let buf = BUILDING_BUFFER_CELLS as f64 * RESOLUTION;
    let (x0, y0) = (rng.gen_range(35.0..37.0), rng.gen_range(20.5..21.0));
    let (bw, bh) = (3.0, 3.0);
    c.rect(x0 - buf, y0 - buf, x0 + bw + buf, y0 + bh + buf, PAVED_AREA);
    c.rect(x0, y0, x0 + bw, y0 + bh, ROOF);
    let scenario = format!(
        "# bay: lake, road and buildings between start and goal\n\
         [world]\n\
         name = bay\n\
         map = {{map}}\n\
         start_x = 3.0\n\
         start_y = 20.0\n\
         start_theta = 0.0\n\
         goal_x = 47.0\n\
         goal_y = 20.0\n\
         goal_radius = 0.5\n\
         obstacle_labels = {ROOF}\n\
         unreliable_labels = {PAVED_AREA}, {WATER}, {ROOF}\n\
         cost_overrides = {COST_OVERRIDES}\n\
         prior = unknown\n\
         max_steps = 800\n\n{PLANNER_BLOCK}"
    );
    GeneratedWorld {
        template: Template::Bay,
        map: c.into_map(),
        scenario,
    }
}
