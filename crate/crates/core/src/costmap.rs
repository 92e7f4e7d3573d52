//! Semantic label grids and the localization-reliability cost maps derived
//! from them.
//!
//! Both grids are row-major with row `r` covering world `y` in
//! `[origin.1 + r·res, origin.1 + (r+1)·res)` and column `c` covering world `x`
//! in `[origin.0 + c·res, origin.0 + (c+1)·res)`.

use thiserror::Error;

use crate::labels::{MAX_LABEL, NUM_CLASSES};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error("label {label} out of range 0..={MAX_LABEL}")]
    LabelOutOfRange { label: u8 },
    #[error("cost {cost} for label {label} outside [0, 1]")]
    CostOutOfRange { label: u8, cost: f64 },
    #[error("grid holds {actual} cells, expected {expected}")]
    SizeMismatch { expected: usize, actual: usize },
    #[error("resolution must be finite and > 0, got {0}")]
    InvalidResolution(f64),
    #[error("grid dimensions must be at least 1x1, got {width}x{height}")]
    EmptyGrid { width: usize, height: usize },
}

/// Placement of a grid in the world frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridGeometry {
    pub width: usize,
    pub height: usize,
    /// Meters per cell.
    pub resolution: f64,
    /// World coordinates of the corner of cell (0, 0).
    pub origin: (f64, f64),
}

impl GridGeometry {
    pub fn new(
        width: usize,
        height: usize,
        resolution: f64,
        origin: (f64, f64),
    ) -> Result<Self, MapError> {
        if width == 0 || height == 0 {
            return Err(MapError::EmptyGrid { width, height });
        }
        if !(resolution.is_finite() && resolution > 0.0) {
            return Err(MapError::InvalidResolution(resolution));
        }
        Ok(Self {
            width,
            height,
            resolution,
            origin,
        })
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Signed cell index `(col, row)` containing a world point.
    pub fn cell_coords(&self, x: f64, y: f64) -> (i64, i64) {
        let col = ((x - self.origin.0) / self.resolution).floor();
        let row = ((y - self.origin.1) / self.resolution).floor();
        (col as i64, row as i64)
    }

    /// Cell `(col, row)` containing a world point, `None` outside the grid.
    pub fn cell_of(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        if !(x.is_finite() && y.is_finite()) {
            return None;
        }
        let (col, row) = self.cell_coords(x, y);
        self.checked_cell(col, row)
    }

    pub fn checked_cell(&self, col: i64, row: i64) -> Option<(usize, usize)> {
        if col < 0 || row < 0 || col >= self.width as i64 || row >= self.height as i64 {
            None
        } else {
            Some((col as usize, row as usize))
        }
    }

    pub fn index(&self, col: usize, row: usize) -> usize {
        row * self.width + col
    }

    pub fn cell_center(&self, col: usize, row: usize) -> (f64, f64) {
        (
            self.origin.0 + (col as f64 + 0.5) * self.resolution,
            self.origin.1 + (row as f64 + 0.5) * self.resolution,
        )
    }

    /// Whether a world point lies inside the mapped area.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.cell_of(x, y).is_some()
    }
}

/// Grid of class ids in `0..=22`.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticMap {
    geometry: GridGeometry,
    labels: Vec<u8>,
}

impl SemanticMap {
    pub fn new(geometry: GridGeometry, labels: Vec<u8>) -> Result<Self, MapError> {
        if labels.len() != geometry.len() {
            return Err(MapError::SizeMismatch {
                expected: geometry.len(),
                actual: labels.len(),
            });
        }
        if let Some(&label) = labels.iter().find(|&&l| l > MAX_LABEL) {
            return Err(MapError::LabelOutOfRange { label });
        }
        Ok(Self { geometry, labels })
    }

    /// A map with every cell set to `label`.
    pub fn filled(geometry: GridGeometry, label: u8) -> Result<Self, MapError> {
        Self::new(geometry, vec![label; geometry.len()])
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn width(&self) -> usize {
        self.geometry.width
    }

    pub fn height(&self) -> usize {
        self.geometry.height
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn get(&self, col: usize, row: usize) -> u8 {
        self.labels[self.geometry.index(col, row)]
    }

    /// Label at a world point, `None` outside the map.
    pub fn label_at(&self, x: f64, y: f64) -> Option<u8> {
        self.geometry
            .cell_of(x, y)
            .map(|(c, r)| self.labels[self.geometry.index(c, r)])
    }

    /// Overwrite the cells covered by `patch`, returning how many were written.
    pub fn apply_patch(&mut self, patch: &SemanticMap) -> usize {
        let mut written = 0;
        for (col, row, target) in overlap(&self.geometry, patch.geometry()) {
            self.labels[target] = patch.get(col, row);
            written += 1;
        }
        written
    }
}

/// Mapping from class id to cost.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelCostTable {
    costs: [f64; NUM_CLASSES],
}

impl Default for LabelCostTable {
    fn default() -> Self {
        Self::linear()
    }
}

impl LabelCostTable {
    /// `label / 22`: class 0 costs 0, class 22 costs 1.
    pub fn linear() -> Self {
        let mut costs = [0.0; NUM_CLASSES];
        for (label, cost) in costs.iter_mut().enumerate() {
            *cost = label as f64 / MAX_LABEL as f64;
        }
        Self { costs }
    }

    /// Build a table from exactly one cost per class.
    pub fn from_costs(costs: [f64; NUM_CLASSES]) -> Result<Self, MapError> {
        for (label, &cost) in costs.iter().enumerate() {
            check_cost(label as u8, cost)?;
        }
        Ok(Self { costs })
    }

    /// Replace the cost of one class.
    pub fn with_override(mut self, label: u8, cost: f64) -> Result<Self, MapError> {
        if label > MAX_LABEL {
            return Err(MapError::LabelOutOfRange { label });
        }
        check_cost(label, cost)?;
        self.costs[label as usize] = cost;
        Ok(self)
    }

    pub fn costs(&self) -> &[f64; NUM_CLASSES] {
        &self.costs
    }

    /// Cost of a single class id.
    pub fn cost(&self, label: u8) -> Result<f64, MapError> {
        self.costs
            .get(label as usize)
            .copied()
            .ok_or(MapError::LabelOutOfRange { label })
    }
}

fn check_cost(label: u8, cost: f64) -> Result<(), MapError> {
    if (0.0..=1.0).contains(&cost) {
        Ok(())
    } else {
        Err(MapError::CostOutOfRange { label, cost })
    }
}

/// Free-function form of [`LabelCostTable::cost`].
pub fn cost_from_label(label: u8, table: &LabelCostTable) -> Result<f64, MapError> {
    table.cost(label)
}

/// Grid of costs in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMap {
    geometry: GridGeometry,
    costs: Vec<f64>,
}

/// Cost reported for points outside the mapped area.
pub const OUT_OF_MAP_COST: f64 = 1.0;

impl CostMap {
    pub fn new(geometry: GridGeometry, costs: Vec<f64>) -> Result<Self, MapError> {
        if costs.len() != geometry.len() {
            return Err(MapError::SizeMismatch {
                expected: geometry.len(),
                actual: costs.len(),
            });
        }
        if let Some(&cost) = costs.iter().find(|c| !(0.0..=1.0).contains(*c)) {
            return Err(MapError::CostOutOfRange { label: 0, cost });
        }
        Ok(Self { geometry, costs })
    }

    /// Per-cell table lookup over a semantic map, keeping its geometry.
    pub fn from_semantic(sem: &SemanticMap, table: &LabelCostTable) -> Self {
        // Labels are validated on construction, so indexing cannot fail.
        let costs = sem
            .labels()
            .iter()
            .map(|&l| table.costs[l as usize])
            .collect();
        Self {
            geometry: *sem.geometry(),
            costs,
        }
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.costs[self.geometry.index(col, row)]
    }

    /// Nearest-cell cost at a world point; [`OUT_OF_MAP_COST`] outside the grid.
    pub fn sample(&self, x: f64, y: f64) -> f64 {
        match self.geometry.cell_of(x, y) {
            Some((c, r)) => self.costs[self.geometry.index(c, r)],
            None => OUT_OF_MAP_COST,
        }
    }

    /// Overwrite the cells under `patch` with freshly computed costs.
    pub fn patch_update(&self, patch: &SemanticMap, table: &LabelCostTable) -> PatchUpdate {
        let mut costs = self.costs.clone();
        let mut cells_written = 0;
        for (col, row, target) in overlap(&self.geometry, patch.geometry()) {
            costs[target] = table.costs[patch.get(col, row) as usize];
            cells_written += 1;
        }
        PatchUpdate {
            map: CostMap {
                geometry: self.geometry,
                costs,
            },
            cells_written,
            no_overlap: cells_written == 0,
        }
    }
}

/// Free-function form of [`CostMap::from_semantic`].
pub fn build_costmap(sem: &SemanticMap, table: &LabelCostTable) -> CostMap {
    CostMap::from_semantic(sem, table)
}

/// Free-function form of [`CostMap::sample`].
pub fn sample_cost(cm: &CostMap, x: f64, y: f64) -> f64 {
    cm.sample(x, y)
}

/// Result of [`CostMap::patch_update`].
#[derive(Debug, Clone, PartialEq)]
pub struct PatchUpdate {
    pub map: CostMap,
    pub cells_written: usize,
    /// Set when the patch did not touch the map; `map` is then unchanged.
    pub no_overlap: bool,
}

/// Pairs each patch cell whose center falls inside `target` with the target's
/// flat index. Yields `(patch_col, patch_row, target_index)`.
fn overlap<'a>(
    target: &'a GridGeometry,
    patch: &'a GridGeometry,
) -> impl Iterator<Item = (usize, usize, usize)> + 'a {
    (0..patch.height).flat_map(move |row| {
        (0..patch.width).filter_map(move |col| {
            let (x, y) = patch.cell_center(col, row);
            target
                .cell_of(x, y)
                .map(|(tc, tr)| (col, row, target.index(tc, tr)))
        })
    })
}
