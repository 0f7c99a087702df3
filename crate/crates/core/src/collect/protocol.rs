//! Newline-delimited JSON messages exchanged with a trainer process.
//!
//! ```text
//! -> {"action":"handshake","protocol":"prune-planner/1"}
//! <- {"status":"ok","protocol":"prune-planner/1"}
//! -> {"action":"prune_finetune","dimension":"width","target":0.8536,"round":2}
//! <- {"status":"ok","d":1.0,"w":0.85,"r":1.0,"accuracy":0.9155}
//! -> {"action":"shutdown"}
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const PROTOCOL_VERSION: &str = "prune-planner/1";

/// Largest accepted gap between a requested target and the ratio the trainer
/// reports for the pruned coordinate.
pub const ECHO_TOLERANCE: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dimension {
    Depth,
    Width,
    Resolution,
}

impl Dimension {
    pub const ALL: [Dimension; 3] = [Dimension::Depth, Dimension::Width, Dimension::Resolution];

    /// Position of this dimension in a `(d, w, r)` triple.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Dimension::Depth => "depth",
            Dimension::Width => "width",
            Dimension::Resolution => "resolution",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case", deny_unknown_fields)]
pub enum Request {
    Handshake { protocol: String },
    PruneFinetune { dimension: Dimension, target: f64, round: usize },
    Shutdown,
}

impl Request {
    pub fn handshake() -> Self {
        Request::Handshake {
            protocol: PROTOCOL_VERSION.into(),
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("requests always serialize")
    }

    pub fn from_line(line: &str) -> Result<Self> {
        Ok(serde_json::from_str(line)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Response {
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub protocol: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl Response {
    fn empty(status: Status) -> Self {
        Response {
            status,
            protocol: None,
            d: None,
            w: None,
            r: None,
            accuracy: None,
            message: None,
        }
    }

    pub fn ok() -> Self {
        Self::empty(Status::Ok)
    }

    pub fn handshake_ok() -> Self {
        Response {
            protocol: Some(PROTOCOL_VERSION.into()),
            ..Self::empty(Status::Ok)
        }
    }

    pub fn measured(point: [f64; 3], accuracy: f64) -> Self {
        Response {
            d: Some(point[0]),
            w: Some(point[1]),
            r: Some(point[2]),
            accuracy: Some(accuracy),
            ..Self::empty(Status::Ok)
        }
    }

    pub fn error(message: impl Into<String>) -> Self {
        Response {
            message: Some(message.into()),
            ..Self::empty(Status::Error)
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("responses always serialize")
    }

    pub fn from_line(line: &str) -> Result<Self> {
        serde_json::from_str(line).map_err(|e| Error::Protocol(format!("malformed response {line:?}: {e}")))
    }
}
