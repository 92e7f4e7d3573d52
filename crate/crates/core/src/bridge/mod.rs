//! TCP bridge to an external simulator.
//!
//! Protocol v1 is newline-delimited JSON. A session is
//!
//! ```text
//! → {"type":"hello","version":"1","width":W,"height":H,"resolution":R,"origin":[ox,oy]}
//! ← {"type":"hello","version":"1"}
//! → {"type":"frame","t":..,"cx":..,"cy":..,"w":..,"h":..,"labels":[..]}     (no reply)
//! → {"type":"state","t":..,"x":..,"y":..,"theta":..,"v":..,"omega":..,"goal":[gx,gy]}
//! ← {"type":"command","t":..,"v":..,"omega":..,"recovery":false}
//! → {"type":"bye"}
//! ```
//!
//! Frames and states run through the same [`Pipeline`](crate::pipeline::Pipeline)
//! the simulator uses, starting from an all-unlabeled map of the negotiated
//! geometry. Any protocol violation is answered with an `error` message and
//! the connection is closed; the server then waits for the next client.

mod protocol;
mod server;
mod session;

pub use protocol::{decode, encode, DecodeError, Message, MAX_LINE_BYTES, PROTOCOL_VERSION};
pub use server::{Client, Server};
pub use session::{Action, Session};

use std::collections::BTreeSet;

use crate::costmap::LabelCostTable;
use crate::keyframe::KeyframeModel;
use crate::planner::PlannerConfig;

pub const DEFAULT_PORT: u16 = 7787;

/// Read-only settings shared by every session.
#[derive(Debug, Clone)]
pub struct BridgeConfig {
    pub planner: PlannerConfig,
    pub cost_table: LabelCostTable,
    pub obstacle_labels: BTreeSet<u8>,
    pub keyframe: Option<KeyframeModel>,
}

impl BridgeConfig {
    pub fn from_scenario(s: &crate::sim::Scenario, keyframe: Option<KeyframeModel>) -> Self {
        Self {
            planner: s.planner,
            cost_table: s.cost_table.clone(),
            obstacle_labels: s.obstacle_labels.clone(),
            keyframe,
        }
    }
}
