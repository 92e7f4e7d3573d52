//! Frame-to-command pipeline shared by the simulator and the socket bridge:
//! keyframe gate → label/cost map update → planner.

use std::collections::BTreeSet;

use crate::costmap::{CostMap, LabelCostTable, SemanticMap};
use crate::keyframe::{image_from_labels, KeyframeModel};
use crate::nn::NnError;
use crate::planner::{select_velocity, OccupancyGrid, PlanRequest, PlannerConfig, ScoredCandidate, UavState};

/// What happened to one sensed frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameOutcome {
    /// Whether the frame was written into the maps.
    pub applied: bool,
    /// Keyframe score, when a model is configured.
    pub score: Option<f64>,
    pub cells_written: usize,
}

#[derive(Debug, Clone)]
pub struct Pipeline {
    table: LabelCostTable,
    obstacle_labels: BTreeSet<u8>,
    belief: SemanticMap,
    costmap: CostMap,
    obstacles: OccupancyGrid,
    keyframe: Option<KeyframeModel>,
    planner: PlannerConfig,
}

impl Pipeline {
    /// Start from a prior label map (all-unlabeled when nothing is known).
    pub fn new(
        prior: SemanticMap,
        table: LabelCostTable,
        obstacle_labels: BTreeSet<u8>,
        planner: PlannerConfig,
        keyframe: Option<KeyframeModel>,
    ) -> Self {
        let costmap = CostMap::from_semantic(&prior, &table);
        let obstacles = OccupancyGrid::from_labels(&prior, &obstacle_labels);
        Self {
            table,
            obstacle_labels,
            belief: prior,
            costmap,
            obstacles,
            keyframe,
            planner,
        }
    }

    pub fn belief(&self) -> &SemanticMap {
        &self.belief
    }

    pub fn costmap(&self) -> &CostMap {
        &self.costmap
    }

    pub fn obstacles(&self) -> &OccupancyGrid {
        &self.obstacles
    }

    pub fn planner(&self) -> &PlannerConfig {
        &self.planner
    }

    pub fn keyframe(&self) -> Option<&KeyframeModel> {
        self.keyframe.as_ref()
    }

    /// Gate a sensed label patch and, if it passes, merge it into the maps.
    /// Without a keyframe model every frame passes.
    pub fn ingest(&mut self, patch: &SemanticMap) -> Result<FrameOutcome, NnError> {
        let score = match &self.keyframe {
            Some(model) => {
                let d = model.decide(&image_from_labels(patch))?;
                if !d.is_keyframe {
                    return Ok(FrameOutcome {
                        applied: false,
                        score: Some(d.score),
                        cells_written: 0,
                    });
                }
                Some(d.score)
            }
            None => None,
        };
        let update = self.costmap.patch_update(patch, &self.table);
        if update.no_overlap {
            log::debug!("frame does not overlap the map; ignored");
        }
        let cells_written = self.belief.apply_patch(patch);
        self.costmap = update.map;
        if cells_written > 0 {
            self.obstacles = OccupancyGrid::from_labels(&self.belief, &self.obstacle_labels);
        }
        Ok(FrameOutcome {
            applied: true,
            score,
            cells_written,
        })
    }

    pub fn plan(&self, state: UavState, goal: (f64, f64), mission_time: f64) -> ScoredCandidate {
        select_velocity(
            &PlanRequest {
                state,
                goal,
                costmap: &self.costmap,
                obstacles: &self.obstacles,
                mission_time,
            },
            &self.planner,
        )
    }
}
