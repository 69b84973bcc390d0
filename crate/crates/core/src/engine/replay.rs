use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::cards::PlayerId;
use super::config::GameConfig;
use super::types::Action;
use super::{EngineError, GameState};
use crate::catalog::Catalog;

/// One applied action, stamped with the turn counter it was applied at.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogRecord {
    pub turn: u32,
    pub player: PlayerId,
    pub action: Action,
}

/// A finished (or interrupted) game: enough to rebuild it exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameRecord {
    pub config: GameConfig,
    /// Hex digest of the final state, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub digest: Option<String>,
    #[serde(default)]
    pub records: Vec<LogRecord>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReplayError {
    #[error("cannot start game: {0}")]
    Setup(EngineError),
    #[error("replay diverged at step {step}: {reason}")]
    Divergence { step: usize, reason: String },
    #[error("final digest {actual} does not match recorded {expected}")]
    DigestMismatch { expected: String, actual: String },
    #[error("malformed game record: {0}")]
    Format(String),
}

pub fn format_digest(digest: u64) -> String {
    format!("{digest:016x}")
}

impl GameRecord {
    pub fn from_state(state: &GameState) -> GameRecord {
        GameRecord {
            config: state.config().clone(),
            digest: Some(format_digest(state.digest())),
            records: state.action_log().to_vec(),
        }
    }

    pub fn to_toml(&self) -> Result<String, ReplayError> {
        toml::to_string(self).map_err(|e| ReplayError::Format(e.to_string()))
    }

    pub fn from_toml(source: &str) -> Result<GameRecord, ReplayError> {
        toml::from_str(source).map_err(|e| ReplayError::Format(e.to_string()))
    }
}

/// Re-applies `records` to a fresh game. Each record must apply cleanly at
/// the turn it was stamped with.
pub fn replay(config: GameConfig, catalog: Arc<Catalog>, records: &[LogRecord]) -> Result<GameState, ReplayError> {
    let mut state = GameState::new(config, catalog).map_err(ReplayError::Setup)?;
    for (step, record) in records.iter().enumerate() {
        if state.turn_counter() != record.turn {
            return Err(ReplayError::Divergence {
                step,
                reason: format!("turn counter is {} but the record says {}", state.turn_counter(), record.turn),
            });
        }
        state
            .apply_mut(record.player, &record.action)
            .map_err(|e| ReplayError::Divergence { step, reason: e.to_string() })?;
    }
    Ok(state)
}

/// Replays a record and checks the recorded digest, if any.
pub fn verify_record(record: &GameRecord, catalog: Arc<Catalog>) -> Result<GameState, ReplayError> {
    let state = replay(record.config.clone(), catalog, &record.records)?;
    if let Some(expected) = &record.digest {
        let actual = format_digest(state.digest());
        if !expected.eq_ignore_ascii_case(&actual) {
            return Err(ReplayError::DigestMismatch { expected: expected.clone(), actual });
        }
    }
    Ok(state)
}
