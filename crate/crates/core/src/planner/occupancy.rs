use std::collections::BTreeSet;

use crate::costmap::{GridGeometry, SemanticMap};

/// Cells that trajectories may not enter.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    geometry: GridGeometry,
    occupied: Vec<bool>,
    centers: Vec<(f64, f64)>,
}

impl OccupancyGrid {
    pub fn empty(geometry: GridGeometry) -> Self {
        Self {
            geometry,
            occupied: vec![false; geometry.len()],
            centers: Vec::new(),
        }
    }

    /// Mark every cell whose label is in `obstacle_labels`.
    pub fn from_labels(map: &SemanticMap, obstacle_labels: &BTreeSet<u8>) -> Self {
        let geometry = *map.geometry();
        let occupied: Vec<bool> = map.labels().iter().map(|l| obstacle_labels.contains(l)).collect();
        let centers = occupied
            .iter()
            .enumerate()
            .filter(|(_, &o)| o)
            .map(|(i, _)| geometry.cell_center(i % geometry.width, i / geometry.width))
            .collect();
        Self {
            geometry,
            occupied,
            centers,
        }
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    /// Centers of all occupied cells, row-major order.
    pub fn obstacle_centers(&self) -> &[(f64, f64)] {
        &self.centers
    }

    pub fn is_occupied_cell(&self, col: usize, row: usize) -> bool {
        self.occupied[self.geometry.index(col, row)]
    }

    /// Whether a world point falls in an occupied cell. Off-map points are free.
    pub fn is_occupied(&self, x: f64, y: f64) -> bool {
        self.geometry
            .cell_of(x, y)
            .is_some_and(|(c, r)| self.is_occupied_cell(c, r))
    }

    /// Distance from `(x, y)` to the nearest occupied cell center, considering
    /// only centers at most `radius` away.
    pub fn nearest_within(&self, x: f64, y: f64, radius: f64) -> Option<f64> {
        if self.centers.is_empty() {
            return None;
        }
        let g = &self.geometry;
        let (c0, r0) = g.cell_coords(x - radius, y - radius);
        let (c1, r1) = g.cell_coords(x + radius, y + radius);
        let clamp_c = |c: i64| c.clamp(0, g.width as i64 - 1) as usize;
        let clamp_r = |r: i64| r.clamp(0, g.height as i64 - 1) as usize;
        if c1 < 0 || r1 < 0 || c0 >= g.width as i64 || r0 >= g.height as i64 {
            return None;
        }
        let mut best: Option<f64> = None;
        for row in clamp_r(r0)..=clamp_r(r1) {
            for col in clamp_c(c0)..=clamp_c(c1) {
                if !self.is_occupied_cell(col, row) {
                    continue;
                }
                let (cx, cy) = g.cell_center(col, row);
                let (dx, dy) = (x - cx, y - cy);
                let d = (dx * dx + dy * dy).sqrt();
                if d <= radius && best.is_none_or(|b| d < b) {
                    best = Some(d);
                }
            }
        }
        best
    }
}
