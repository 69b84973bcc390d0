//! Messages exchanged over the game websocket. Every frame is one JSON object
//! with `type`, `msg_id`, an optional `game_id` and a `payload`.

use aiaudit_core::bots::Strategy;
use aiaudit_core::engine::{Action, Event, GameRecord, Outcome, PlayerId, RedactedView, Zones};
use aiaudit_core::GameConfig;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

/// Stable error codes carried in `error` messages.
pub mod codes {
    pub const BAD_MESSAGE: &str = "bad-message";
    pub const UNKNOWN_TYPE: &str = "unknown-type";
    pub const NO_IDENTITY: &str = "no-identity";
    pub const UNKNOWN_TOKEN: &str = "unknown-token";
    pub const SESSION_EXPIRED: &str = "session-expired";
    pub const UNKNOWN_GAME: &str = "unknown-game";
    pub const UNKNOWN_CATALOG: &str = "unknown-catalog";
    pub const INVALID_CONFIG: &str = "invalid-config";
    pub const FULL_LOBBY: &str = "full-lobby";
    pub const GAME_STARTED: &str = "game-started";
    pub const NOT_CREATOR: &str = "not-creator";
    pub const NOT_YOUR_PHASE: &str = "not-your-phase";
    pub const ILLEGAL_ACTION: &str = "illegal-action";
    pub const INVALID_NARRATIVE: &str = "invalid-narrative";
    pub const MISSING_GAME_ID: &str = "missing-game-id";
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("{0}")]
    BadMessage(String),
    #[error("unknown message type {0:?}")]
    UnknownType(String),
}

impl ProtocolError {
    pub fn code(&self) -> &'static str {
        match self {
            ProtocolError::BadMessage(_) => codes::BAD_MESSAGE,
            ProtocolError::UnknownType(_) => codes::UNKNOWN_TYPE,
        }
    }
}

/// The raw frame, before the payload is interpreted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    #[serde(rename = "type")]
    pub kind: String,
    pub msg_id: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub game_id: Option<String>,
    #[serde(default)]
    pub payload: Value,
}

impl Envelope {
    pub fn to_text(&self) -> String {
        serde_json::to_string(self).expect("envelopes serialize")
    }

    pub fn from_text(text: &str) -> Result<Envelope, ProtocolError> {
        serde_json::from_str(text).map_err(|e| ProtocolError::BadMessage(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JoinRole {
    #[default]
    Player,
    Spectator,
    /// A spectator who also receives guide excerpts.
    Educator,
}

fn default_true() -> bool {
    true
}

fn default_catalog_name() -> String {
    "default".into()
}

/// Client to server.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "payload", rename_all = "snake_case")]
pub enum ClientMessage {
    Hello {
        name: String,
    },
    Create {
        #[serde(default)]
        config: GameConfig,
        #[serde(default = "default_catalog_name")]
        catalog: String,
        /// Take seat 0. When false the creator only spectates.
        #[serde(default = "default_true")]
        seat: bool,
    },
    Join {
        #[serde(default)]
        role: JoinRole,
    },
    AddBot {
        strategy: Strategy,
    },
    Start {},
    Action {
        action: Action,
    },
    Vote {
        approve: bool,
    },
    Resume {
        resume_token: String,
    },
}

impl ClientMessage {
    pub const TYPES: [&'static str; 8] = ["hello", "create", "join", "add_bot", "start", "action", "vote", "resume"];

    pub fn into_envelope(self, msg_id: u64, game_id: Option<String>) -> Envelope {
        let Value::Object(mut map) = serde_json::to_value(&self).expect("messages serialize") else {
            unreachable!("tagged enums serialize to objects")
        };
        let kind = map.remove("type").and_then(|v| v.as_str().map(str::to_string)).expect("tag present");
        let payload = map.remove("payload").unwrap_or_else(|| Value::Object(Default::default()));
        Envelope { kind, msg_id, game_id, payload }
    }

    pub fn from_envelope(envelope: &Envelope) -> Result<ClientMessage, ProtocolError> {
        if !Self::TYPES.contains(&envelope.kind.as_str()) {
            return Err(ProtocolError::UnknownType(envelope.kind.clone()));
        }
        let payload = match &envelope.payload {
            Value::Null => Value::Object(Default::default()),
            other => other.clone(),
        };
        let tagged = serde_json::json!({ "type": envelope.kind, "payload": payload });
        serde_json::from_value(tagged).map_err(|e| ProtocolError::BadMessage(format!("{}: {e}", envelope.kind)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Occupant {
    Open,
    Human { name: String, connected: bool },
    Bot { strategy: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeatInfo {
    pub seat: PlayerId,
    pub occupant: Occupant,
    /// This seat belongs to the recipient.
    #[serde(default)]
    pub you: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LobbyInfo {
    pub catalog: String,
    pub config: GameConfig,
    pub seats: Vec<SeatInfo>,
    pub started: bool,
    /// Whether the recipient created the lobby.
    pub creator: bool,
    pub spectators: usize,
}

impl LobbyInfo {
    pub fn my_seat(&self) -> Option<PlayerId> {
        self.seats.iter().find(|s| s.you).map(|s| s.seat)
    }

    pub fn open_seats(&self) -> usize {
        self.seats.iter().filter(|s| s.occupant == Occupant::Open).count()
    }
}

/// What the recipient is being asked to do.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prompt {
    Setup,
    Turn,
    Defense,
    Vote,
}

/// Titles and teaching notes for the cards an event mentions.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub business: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub harm: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guide_excerpt: Option<String>,
}

impl Annotation {
    pub fn is_empty(&self) -> bool {
        *self == Annotation::default()
    }
}

/// Server to client.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "payload", rename_all = "snake_case")]
pub enum ServerMessage {
    Welcome {
        resume_token: String,
        name: String,
    },
    Lobby(LobbyInfo),
    View {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seat: Option<PlayerId>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        prompt: Option<Prompt>,
        view: Box<RedactedView>,
    },
    Event {
        index: usize,
        event: Event,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        annotation: Option<Annotation>,
    },
    Error {
        code: String,
        text: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        reply_to: Option<u64>,
    },
    Ack {
        reply_to: u64,
        /// The message repeated an already handled `msg_id` and was ignored.
        #[serde(default)]
        duplicate: bool,
    },
    GameOver {
        outcome: Outcome,
        /// Decimal text so it survives JSON number precision.
        seed: String,
        action_log: GameRecord,
        digest: String,
        final_state: Box<Zones>,
    },
}

impl ServerMessage {
    pub fn kind(&self) -> &'static str {
        match self {
            ServerMessage::Welcome { .. } => "welcome",
            ServerMessage::Lobby(_) => "lobby",
            ServerMessage::View { .. } => "view",
            ServerMessage::Event { .. } => "event",
            ServerMessage::Error { .. } => "error",
            ServerMessage::Ack { .. } => "ack",
            ServerMessage::GameOver { .. } => "game_over",
        }
    }

    pub fn error(code: &str, text: impl Into<String>, reply_to: Option<u64>) -> ServerMessage {
        ServerMessage::Error { code: code.to_string(), text: text.into(), reply_to }
    }

    pub fn into_envelope(self, msg_id: u64, game_id: Option<String>) -> Envelope {
        let Value::Object(mut map) = serde_json::to_value(&self).expect("messages serialize") else {
            unreachable!("tagged enums serialize to objects")
        };
        let kind = map.remove("type").and_then(|v| v.as_str().map(str::to_string)).expect("tag present");
        let payload = map.remove("payload").unwrap_or(Value::Null);
        Envelope { kind, msg_id, game_id, payload }
    }

    pub fn from_envelope(envelope: &Envelope) -> Result<ServerMessage, ProtocolError> {
        let tagged = serde_json::json!({ "type": envelope.kind, "payload": envelope.payload });
        serde_json::from_value(tagged).map_err(|e| ProtocolError::BadMessage(format!("{}: {e}", envelope.kind)))
    }

    /// The `reply_to` of an ack or error.
    pub fn reply_to(&self) -> Option<u64> {
        match self {
            ServerMessage::Ack { reply_to, .. } => Some(*reply_to),
            ServerMessage::Error { reply_to, .. } => *reply_to,
            _ => None,
        }
    }
}
