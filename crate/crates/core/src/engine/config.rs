use serde::{Deserialize, Serialize};

use super::EngineError;

pub const MIN_PLAYERS: u8 = 2;
pub const MAX_PLAYERS: u8 = 7;
const MAX_COPIES: u32 = 1000;

/// Table rules for one game. Every rule variant that came out of playtesting
/// is a flag here.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GameConfig {
    pub player_count: u8,
    pub initial_harm_hand: u32,
    /// 3 by default; 2 is the faster variant.
    pub initial_feature_hand: u32,
    pub wild_harm_copies: u32,
    pub wild_feature_copies: u32,
    pub harm_copies_per_kind: u32,
    pub feature_copies_per_kind: u32,
    pub max_setups_per_turn: u32,
    /// A player with no playable harm may swap one for the top of the deck.
    pub harm_exchange_enabled: bool,
    /// A defender may decline even while holding a matching feature.
    pub decline_defense_allowed: bool,
    /// After a successful defense both players draw a harm and a feature
    /// instead of each replacing only the card they spent.
    pub literal_replacement_draw: bool,
    pub turn_cap: u32,
    #[serde(with = "crate::seed::serde_u64")]
    pub seed: u64,
}

impl Default for GameConfig {
    fn default() -> Self {
        GameConfig {
            player_count: 4,
            initial_harm_hand: 2,
            initial_feature_hand: 3,
            wild_harm_copies: 1,
            wild_feature_copies: 2,
            harm_copies_per_kind: 3,
            feature_copies_per_kind: 2,
            max_setups_per_turn: 3,
            harm_exchange_enabled: true,
            decline_defense_allowed: true,
            literal_replacement_draw: false,
            turn_cap: 500,
            seed: 0,
        }
    }
}

impl GameConfig {
    pub fn with_players(player_count: u8) -> Self {
        GameConfig { player_count, ..Default::default() }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        let fail = |msg: String| Err(EngineError::InvalidConfig(msg));
        if !(MIN_PLAYERS..=MAX_PLAYERS).contains(&self.player_count) {
            return fail(format!(
                "player_count must be between {MIN_PLAYERS} and {MAX_PLAYERS}, got {}",
                self.player_count
            ));
        }
        if self.turn_cap == 0 {
            return fail("turn_cap must be at least 1".into());
        }
        if self.max_setups_per_turn == 0 {
            return fail("max_setups_per_turn must be at least 1".into());
        }
        for (name, value) in [
            ("wild_harm_copies", self.wild_harm_copies),
            ("wild_feature_copies", self.wild_feature_copies),
            ("harm_copies_per_kind", self.harm_copies_per_kind),
            ("feature_copies_per_kind", self.feature_copies_per_kind),
            ("initial_harm_hand", self.initial_harm_hand),
            ("initial_feature_hand", self.initial_feature_hand),
        ] {
            if value > MAX_COPIES {
                return fail(format!("{name} must be at most {MAX_COPIES}, got {value}"));
            }
        }
        Ok(())
    }
}
