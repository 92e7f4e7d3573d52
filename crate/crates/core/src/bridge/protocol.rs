//! Wire format: one JSON object per line, tagged by `"type"`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const PROTOCOL_VERSION: &str = "1";

/// Longest accepted line, newline included.
pub const MAX_LINE_BYTES: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Message {
    /// Client → server with the map geometry; server → client with only the
    /// version as the acknowledgement.
    Hello {
        version: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        width: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        height: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        resolution: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        origin: Option<[f64; 2]>,
    },
    /// Label patch whose lower-left cell sits at map cell `(cx, cy)`.
    Frame {
        t: f64,
        cx: i64,
        cy: i64,
        w: usize,
        h: usize,
        labels: Vec<u8>,
    },
    State {
        t: f64,
        x: f64,
        y: f64,
        theta: f64,
        v: f64,
        omega: f64,
        goal: [f64; 2],
    },
    Command {
        t: f64,
        v: f64,
        omega: f64,
        recovery: bool,
    },
    Bye,
    Error {
        message: String,
    },
}

impl Message {
    pub fn hello_ack() -> Self {
        Message::Hello {
            version: PROTOCOL_VERSION.to_string(),
            width: None,
            height: None,
            resolution: None,
            origin: None,
        }
    }

    pub fn error(message: impl Into<String>) -> Self {
        Message::Error {
            message: message.into(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Message::Hello { .. } => "hello",
            Message::Frame { .. } => "frame",
            Message::State { .. } => "state",
            Message::Command { .. } => "command",
            Message::Bye => "bye",
            Message::Error { .. } => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("line is not terminated by a newline")]
    Unterminated,
    #[error("line exceeds {MAX_LINE_BYTES} bytes")]
    TooLong,
    #[error("line is not valid UTF-8")]
    Utf8,
    #[error("malformed message: {0}")]
    Json(String),
}

/// Serialize as one line with exactly one trailing newline.
pub fn encode(msg: &Message) -> String {
    let mut s = serde_json::to_string(msg).expect("messages always serialize");
    s.push('\n');
    s
}

/// Parse one newline-terminated line.
pub fn decode(line: &[u8]) -> Result<Message, DecodeError> {
    if line.len() > MAX_LINE_BYTES {
        return Err(DecodeError::TooLong);
    }
    let body = line.strip_suffix(b"\n").ok_or(DecodeError::Unterminated)?;
    let body = body.strip_suffix(b"\r").unwrap_or(body);
    let text = std::str::from_utf8(body).map_err(|_| DecodeError::Utf8)?;
    serde_json::from_str(text).map_err(|e| DecodeError::Json(e.to_string()))
}
