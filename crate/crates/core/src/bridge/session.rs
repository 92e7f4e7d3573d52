use super::protocol::{Message, PROTOCOL_VERSION};
use super::BridgeConfig;
use crate::costmap::{GridGeometry, SemanticMap};
use crate::labels::UNLABELED;
use crate::pipeline::Pipeline;
use crate::planner::UavState;

/// What the server should do after one client message.
#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    Reply(Message),
    /// Accepted; nothing to send back.
    Silent,
    /// Send the message, if any, then close the connection.
    Close(Option<Message>),
}

fn violation(message: impl Into<String>) -> Action {
    Action::Close(Some(Message::error(message)))
}

fn finite(name: &str, values: &[f64]) -> Result<(), Action> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(violation(format!("{name}: values must be finite")))
    }
}

/// Per-connection protocol state.
#[derive(Debug)]
pub struct Session<'a> {
    config: &'a BridgeConfig,
    pipeline: Option<Pipeline>,
    mission_time: f64,
    last_state: Option<UavState>,
}

impl<'a> Session<'a> {
    pub fn new(config: &'a BridgeConfig) -> Self {
        Self {
            config,
            pipeline: None,
            mission_time: 0.0,
            last_state: None,
        }
    }

    pub fn pipeline(&self) -> Option<&Pipeline> {
        self.pipeline.as_ref()
    }

    pub fn mission_time(&self) -> f64 {
        self.mission_time
    }

    pub fn last_state(&self) -> Option<UavState> {
        self.last_state
    }

    pub fn handle(&mut self, msg: Message) -> Action {
        self.step(msg).unwrap_or_else(|a| a)
    }

    fn step(&mut self, msg: Message) -> Result<Action, Action> {
        if self.pipeline.is_none() && !matches!(msg, Message::Hello { .. } | Message::Bye) {
            return Err(violation("handshake required"));
        }
        match msg {
            Message::Hello {
                version,
                width,
                height,
                resolution,
                origin,
            } => {
                if self.pipeline.is_some() {
                    return Err(violation("unexpected hello: session already established"));
                }
                if version != PROTOCOL_VERSION {
                    return Err(violation(format!(
                        "unsupported protocol version {version:?} (server speaks {PROTOCOL_VERSION:?})"
                    )));
                }
                let missing = |f: &str| violation(format!("hello: missing field `{f}`"));
                let width = width.ok_or_else(|| missing("width"))?;
                let height = height.ok_or_else(|| missing("height"))?;
                let resolution = resolution.ok_or_else(|| missing("resolution"))?;
                let origin = origin.ok_or_else(|| missing("origin"))?;
                finite("hello.origin", &origin)?;
                let geometry = GridGeometry::new(width, height, resolution, (origin[0], origin[1]))
                    .map_err(|e| violation(format!("hello: {e}")))?;
                let prior = SemanticMap::filled(geometry, UNLABELED).expect("validated geometry");
                self.pipeline = Some(Pipeline::new(
                    prior,
                    self.config.cost_table.clone(),
                    self.config.obstacle_labels.clone(),
                    self.config.planner,
                    self.config.keyframe.clone(),
                ));
                Ok(Action::Reply(Message::hello_ack()))
            }
            Message::Frame { t, cx, cy, w, h, labels } => {
                finite("frame.t", &[t])?;
                let pipeline = self.pipeline.as_mut().expect("checked above");
                let g = *pipeline.belief().geometry();
                let origin = (g.origin.0 + cx as f64 * g.resolution, g.origin.1 + cy as f64 * g.resolution);
                let geometry =
                    GridGeometry::new(w, h, g.resolution, origin).map_err(|e| violation(format!("frame: {e}")))?;
                let patch = SemanticMap::new(geometry, labels).map_err(|e| violation(format!("frame: {e}")))?;
                pipeline
                    .ingest(&patch)
                    .map_err(|e| violation(format!("frame rejected by keyframe model: {e}")))?;
                Ok(Action::Silent)
            }
            Message::State {
                t,
                x,
                y,
                theta,
                v,
                omega,
                goal,
            } => {
                finite("state", &[t, x, y, theta, v, omega, goal[0], goal[1]])?;
                let pipeline = self.pipeline.as_ref().expect("checked above");
                let state = UavState::new(x, y, theta, v, omega);
                self.mission_time = t;
                self.last_state = Some(state);
                let choice = pipeline.plan(state, (goal[0], goal[1]), t);
                Ok(Action::Reply(Message::Command {
                    t,
                    v: choice.command.v,
                    omega: choice.command.omega,
                    recovery: choice.recovery,
                }))
            }
            Message::Bye => Ok(Action::Close(None)),
            other @ (Message::Command { .. } | Message::Error { .. }) => {
                Err(violation(format!("unexpected message type {:?} from client", other.kind())))
            }
        }
    }
}
