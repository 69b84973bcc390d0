//! Rules engine, card catalog, heuristic bots and balance simulator for the
//! AI Audit card game.

pub mod bots;
pub mod catalog;
pub mod engine;
pub mod seed;
pub mod sim;

pub use catalog::{default_catalog, Catalog};
pub use engine::{Action, CardUid, GameConfig, GameState, PlayerId};
