//! The game state machine: setup, turns, challenges, defenses, wild-card
//! votes, elimination and termination.
//!
//! [`GameState`] is a value. [`GameState::apply`] returns a new state and
//! leaves the old one untouched; [`GameState::apply_mut`] is the in-place
//! form used by the simulator. Both validate the action completely before
//! moving any card, so a rejected action never changes the state.

mod cards;
mod config;
mod legal;
mod replay;
mod types;
mod view;
mod zones;

use std::collections::BTreeSet;
use std::sync::Arc;

use fnv::FnvHasher;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::catalog::{Catalog, CatalogError, Family};

pub use cards::{CardUid, ParseCardError, PlayerId, WILD};
pub use config::{GameConfig, MAX_PLAYERS, MIN_PLAYERS};
pub use legal::legal_actions;
pub use replay::{format_digest, replay, verify_record, GameRecord, LogRecord, ReplayError};
pub use types::{
    majority_approves, Action, Challenge, DefenseClaim, Event, Outcome, OutcomeKind, Phase, Placement, VoteContext,
    VoteSubject, NARRATIVE_MAX,
};
pub use view::{GuideNote, HandView, PhaseView, PlayerView, RedactedView, Viewer, VoteView};
pub use zones::{PlayerZones, Zones};

use types::Stage;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("catalog error: {0}")]
    Catalog(String),
    #[error("unknown player {0}")]
    UnknownPlayer(PlayerId),
    #[error("{action} is not accepted while the game is in phase {phase}")]
    WrongPhase { action: &'static str, phase: &'static str },
    #[error("not {player}'s turn to act")]
    NotYourTurn { player: PlayerId },
    #[error("illegal action for {player}: {reason}")]
    IllegalAction { player: PlayerId, reason: String },
    #[error("invalid narrative: {0}")]
    InvalidNarrative(String),
}

impl EngineError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            EngineError::InvalidConfig(_) => "invalid-config",
            EngineError::Catalog(_) => "catalog",
            EngineError::UnknownPlayer(_) => "unknown-player",
            EngineError::WrongPhase { .. } => "wrong-phase",
            EngineError::NotYourTurn { .. } => "not-your-turn",
            EngineError::IllegalAction { .. } => "illegal-action",
            EngineError::InvalidNarrative(_) => "invalid-narrative",
        }
    }
}

impl From<CatalogError> for EngineError {
    fn from(e: CatalogError) -> Self {
        EngineError::Catalog(e.to_string())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GameState {
    config: GameConfig,
    #[serde(skip)]
    catalog: Arc<Catalog>,
    zones: Zones,
    turn_order: Vec<PlayerId>,
    /// In elimination order.
    eliminated: Vec<PlayerId>,
    /// Owner of the current turn; unchanged while a challenge resolves.
    active: PlayerId,
    phase: Phase,
    turn_counter: u32,
    rng: ChaCha8Rng,
    events: Vec<Event>,
    log: Vec<LogRecord>,
}

/// Fixed 64-bit digest (FNV-1a) of a canonical serialization.
pub fn digest_of<T: Serialize>(value: &T) -> u64 {
    use std::hash::Hasher;
    let bytes = serde_json::to_vec(value).expect("state serializes");
    let mut hasher = FnvHasher::default();
    hasher.write(&bytes);
    hasher.finish()
}

impl GameState {
    /// Deals a fresh game. Businesses are shuffled and split evenly with the
    /// remainder boxed; harm and feature decks are shuffled and dealt one card
    /// per seat per round.
    pub fn new(config: GameConfig, catalog: Arc<Catalog>) -> Result<GameState, EngineError> {
        config.validate()?;
        catalog.ensure_playable()?;
        let players = config.player_count as usize;
        if catalog.businesses.len() < players {
            return Err(EngineError::InvalidConfig(format!(
                "{} businesses cannot be dealt to {players} players",
                catalog.businesses.len()
            )));
        }

        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

        let mut businesses: Vec<CardUid> = catalog.businesses.iter().map(|b| CardUid::business(b.id)).collect();
        businesses.sort();
        businesses.shuffle(&mut rng);

        let mut harm_deck = Vec::new();
        let mut harm_kinds: Vec<u8> = catalog.harms.iter().map(|h| h.id).collect();
        harm_kinds.sort();
        for kind in harm_kinds {
            harm_deck.extend((1..=config.harm_copies_per_kind).map(|c| CardUid::harm(kind, c as u16)));
        }
        harm_deck.extend((1..=config.wild_harm_copies).map(|c| CardUid::harm(WILD, c as u16)));
        harm_deck.shuffle(&mut rng);

        let mut feature_deck = Vec::new();
        let mut feature_kinds: Vec<u8> = catalog.features.iter().map(|f| f.id).collect();
        feature_kinds.sort();
        for kind in feature_kinds {
            feature_deck.extend((1..=config.feature_copies_per_kind).map(|c| CardUid::feature(kind, c as u16)));
        }
        feature_deck.extend((1..=config.wild_feature_copies).map(|c| CardUid::feature(WILD, c as u16)));
        feature_deck.shuffle(&mut rng);

        let per_player = businesses.len() / players;
        let mut zones = Zones {
            harm_deck: harm_deck.into(),
            feature_deck: feature_deck.into(),
            players: vec![PlayerZones::default(); players],
            ..Default::default()
        };
        let mut dealt = businesses.into_iter();
        for p in &mut zones.players {
            p.business_hand.extend(dealt.by_ref().take(per_player));
        }
        zones.boxed.extend(dealt);

        let turn_order: Vec<PlayerId> = (0..players as u8).map(PlayerId).collect();
        let mut state = GameState {
            config,
            catalog,
            zones,
            turn_order: turn_order.clone(),
            eliminated: Vec::new(),
            active: PlayerId(0),
            phase: Phase::Setup { player: PlayerId(0) },
            turn_counter: 0,
            rng,
            events: Vec::new(),
            log: Vec::new(),
        };
        state.events.push(Event::GameStarted {
            players: players as u8,
            harm_deck: state.zones.harm_deck.len(),
            feature_deck: state.zones.feature_deck.len(),
            boxed: state.zones.boxed.len(),
        });
        let mut events = Vec::new();
        for _ in 0..state.config.initial_harm_hand {
            for &p in &turn_order {
                state.draw(p, Family::Harm, &mut events);
            }
        }
        for _ in 0..state.config.initial_feature_hand {
            for &p in &turn_order {
                state.draw(p, Family::Feature, &mut events);
            }
        }
        state.events.extend(events);
        Ok(state)
    }

    /// Builds a state from an explicit arrangement of cards. Used for
    /// scenarios and tests; conservation is measured relative to whatever is
    /// arranged here.
    pub fn arranged(
        config: GameConfig,
        catalog: Arc<Catalog>,
        zones: Zones,
        phase: Phase,
    ) -> Result<GameState, EngineError> {
        config.validate()?;
        catalog.ensure_playable()?;
        if zones.players.len() != config.player_count as usize {
            return Err(EngineError::InvalidConfig(format!(
                "arrangement has {} seats but config.player_count is {}",
                zones.players.len(),
                config.player_count
            )));
        }
        zones.check_families().map_err(EngineError::InvalidConfig)?;
        if let Phase::AwaitingVote { vote } = &phase {
            if (vote.subject == VoteSubject::WildHarmValidity) != vote.defense.is_none() {
                return Err(EngineError::InvalidConfig("vote subject and defense claim disagree".into()));
            }
        }
        let active = match &phase {
            Phase::Setup { player } | Phase::AwaitingTurnAction { player, .. } => *player,
            Phase::AwaitingDefense { challenge } => challenge.challenger,
            Phase::AwaitingVote { vote } => vote.challenge.challenger,
            Phase::Terminal { .. } => PlayerId(0),
        };
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        Ok(GameState {
            turn_order: (0..config.player_count).map(PlayerId).collect(),
            config,
            catalog,
            zones,
            eliminated: Vec::new(),
            active,
            phase,
            turn_counter: 0,
            rng,
            events: Vec::new(),
            log: Vec::new(),
        })
    }

    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    pub fn catalog(&self) -> &Arc<Catalog> {
        &self.catalog
    }

    pub fn zones(&self) -> &Zones {
        &self.zones
    }

    pub fn phase(&self) -> &Phase {
        &self.phase
    }

    pub fn active(&self) -> PlayerId {
        self.active
    }

    pub fn turn_counter(&self) -> u32 {
        self.turn_counter
    }

    pub fn turn_order(&self) -> &[PlayerId] {
        &self.turn_order
    }

    pub fn eliminated(&self) -> &[PlayerId] {
        &self.eliminated
    }

    pub fn is_eliminated(&self, p: PlayerId) -> bool {
        self.eliminated.contains(&p)
    }

    pub fn players(&self) -> impl Iterator<Item = PlayerId> + '_ {
        (0..self.config.player_count).map(PlayerId)
    }

    pub fn live_players(&self) -> impl Iterator<Item = PlayerId> + '_ {
        self.turn_order.iter().copied().filter(|p| !self.eliminated.contains(p))
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn action_log(&self) -> &[LogRecord] {
        &self.log
    }

    pub fn is_terminal(&self) -> Option<&Outcome> {
        match &self.phase {
            Phase::Terminal { outcome } => Some(outcome),
            _ => None,
        }
    }

    pub fn digest(&self) -> u64 {
        digest_of(self)
    }

    pub fn legal_actions(&self, player: PlayerId) -> Vec<Action> {
        legal_actions(self, player)
    }

    pub fn view_for(&self, viewer: Viewer) -> Result<RedactedView, EngineError> {
        view::view_for(self, viewer, 0)
    }

    /// Like [`GameState::view_for`] but only carries events from `from_event` on.
    pub fn view_since(&self, viewer: Viewer, from_event: usize) -> Result<RedactedView, EngineError> {
        view::view_for(self, viewer, from_event)
    }

    /// Pure transition: returns the successor state and the events it produced.
    pub fn apply(&self, player: PlayerId, action: &Action) -> Result<(GameState, Vec<Event>), EngineError> {
        let mut next = self.clone();
        let events = next.apply_mut(player, action)?;
        Ok((next, events))
    }

    /// In-place transition. On error the state is unchanged.
    pub fn apply_mut(&mut self, player: PlayerId, action: &Action) -> Result<Vec<Event>, EngineError> {
        self.check(player, action)?;
        let turn = self.turn_counter;
        let start = self.events.len();
        let mut events = Vec::new();
        self.resolve(player, action, &mut events);
        self.events.extend(events);
        self.log.push(LogRecord { turn, player, action: action.clone() });
        Ok(self.events[start..].to_vec())
    }

    fn check(&self, player: PlayerId, action: &Action) -> Result<(), EngineError> {
        if player.index() >= self.zones.players.len() {
            return Err(EngineError::UnknownPlayer(player));
        }
        let stage = action.stage();
        let expected = match (&self.phase, stage) {
            (Phase::Setup { player: p }, Stage::Turn) => {
                if !matches!(action, Action::SetupBusiness { .. }) {
                    return Err(EngineError::WrongPhase { action: action.kind_name(), phase: self.phase.name() });
                }
                *p
            }
            (Phase::AwaitingTurnAction { player: p, .. }, Stage::Turn) => *p,
            (Phase::AwaitingDefense { challenge }, Stage::Defense) => challenge.defender,
            (Phase::AwaitingVote { vote }, Stage::Vote) => {
                if !vote.voters.contains(&player) {
                    return Err(EngineError::NotYourTurn { player });
                }
                if vote.ballots.contains_key(&player) {
                    return Err(EngineError::IllegalAction { player, reason: "ballot already cast".into() });
                }
                player
            }
            _ => return Err(EngineError::WrongPhase { action: action.kind_name(), phase: self.phase.name() }),
        };
        if expected != player {
            return Err(EngineError::NotYourTurn { player });
        }
        let legal = legal_actions(self, player);
        if !legal.iter().any(|a| a.same_move(action)) {
            return Err(EngineError::IllegalAction { player, reason: format!("{action:?} is not among the legal moves") });
        }
        if let Some(text) = action.narrative() {
            if text.trim().is_empty() {
                return Err(EngineError::InvalidNarrative("a narrative is required for this play".into()));
            }
            if text.chars().count() > NARRATIVE_MAX {
                return Err(EngineError::InvalidNarrative(format!("narratives are limited to {NARRATIVE_MAX} characters")));
            }
        }
        Ok(())
    }

    fn resolve(&mut self, player: PlayerId, action: &Action, events: &mut Vec<Event>) {
        match action.clone() {
            Action::SetupBusiness { business } => {
                let zones = self.zones.player_mut(player);
                zones.business_hand.remove(&business);
                zones.in_play.push(business);
                match self.phase {
                    Phase::Setup { .. } => {
                        events.push(Event::SetupCommitted { player, business: Some(business) });
                        self.advance_setup(player, events);
                    }
                    Phase::AwaitingTurnAction { setups_done, .. } => {
                        events.push(Event::BusinessSetUp { player, business });
                        self.phase = Phase::AwaitingTurnAction { player, setups_done: setups_done + 1 };
                    }
                    _ => unreachable!("checked"),
                }
            }
            Action::EndTurn => {
                events.push(Event::TurnEnded { player });
                self.finish_turn(events);
            }
            Action::Pass => {
                events.push(Event::Passed { player });
                self.finish_turn(events);
            }
            Action::ExchangeHarm { harm } => {
                self.zones.player_mut(player).harm_hand.remove(&harm);
                self.zones.harm_deck.push_back(harm);
                events.push(Event::HarmExchanged { player, returned: Some(harm) });
                self.draw(player, Family::Harm, events);
                self.finish_turn(events);
            }
            Action::PlayHarm { harm, defender, target } => {
                self.commit_from_hand(player, harm);
                events.push(Event::HarmPlayed { challenger: player, defender, target, harm });
                self.phase = Phase::AwaitingDefense {
                    challenge: Challenge { challenger: player, defender, target, harm, narrative: None },
                };
            }
            Action::PlayWildHarm { harm, defender, target, narrative } => {
                self.commit_from_hand(player, harm);
                events.push(Event::WildHarmPlayed { challenger: player, defender, target, harm, narrative: narrative.clone() });
                let challenge = Challenge { challenger: player, defender, target, harm, narrative: Some(narrative) };
                self.open_vote(VoteSubject::WildHarmValidity, player, challenge, None, events);
            }
            Action::Defend { feature } => {
                self.commit_from_hand(player, feature);
                events.push(Event::Defended { defender: player, feature });
                let challenge = self.take_challenge();
                self.defense_succeeds(challenge, feature, events);
            }
            Action::DefendWithNarrative { feature, narrative } => {
                self.commit_from_hand(player, feature);
                events.push(Event::NarratedDefense { defender: player, feature, narrative: narrative.clone() });
                let challenge = self.take_challenge();
                let claim = DefenseClaim { feature, narrative };
                self.open_vote(VoteSubject::NarratedFeatureVsWildHarm, player, challenge, Some(claim), events);
            }
            Action::DefendWild { feature, narrative } => {
                self.commit_from_hand(player, feature);
                events.push(Event::WildDefense { defender: player, feature, narrative: narrative.clone() });
                let challenge = self.take_challenge();
                let claim = DefenseClaim { feature, narrative };
                self.open_vote(VoteSubject::WildFeatureAdequacy, player, challenge, Some(claim), events);
            }
            Action::Decline => {
                events.push(Event::Declined { defender: player });
                let challenge = self.take_challenge();
                self.defense_fails(challenge, events);
            }
            Action::CastVote { approve } => {
                let Phase::AwaitingVote { vote } = &mut self.phase else { unreachable!("checked") };
                vote.ballots.insert(player, approve);
                events.push(Event::VoteCast { voter: player });
                if vote.is_complete() {
                    let vote = vote.clone();
                    self.close_vote(vote, events);
                }
            }
        }
    }

    fn commit_from_hand(&mut self, player: PlayerId, card: CardUid) {
        let zones = self.zones.player_mut(player);
        let removed = match card.family {
            Family::Harm => zones.harm_hand.remove(&card),
            Family::Feature => zones.feature_hand.remove(&card),
            Family::Business => zones.business_hand.remove(&card),
        };
        debug_assert!(removed, "{card} not in hand");
        self.zones.table.push(card);
    }

    fn table_to_deck_bottom(&mut self, card: CardUid) {
        if let Some(i) = self.zones.table.iter().position(|&c| c == card) {
            self.zones.table.remove(i);
        }
        match card.family {
            Family::Harm => self.zones.harm_deck.push_back(card),
            Family::Feature => self.zones.feature_deck.push_back(card),
            Family::Business => unreachable!("businesses never return to a deck"),
        }
    }

    fn table_to_hand(&mut self, player: PlayerId, card: CardUid) {
        if let Some(i) = self.zones.table.iter().position(|&c| c == card) {
            self.zones.table.remove(i);
        }
        let zones = self.zones.player_mut(player);
        match card.family {
            Family::Harm => zones.harm_hand.insert(card),
            Family::Feature => zones.feature_hand.insert(card),
            Family::Business => zones.business_hand.insert(card),
        };
    }

    /// Draws the top card of a deck; an empty deck is skipped.
    fn draw(&mut self, player: PlayerId, family: Family, events: &mut Vec<Event>) {
        let deck = match family {
            Family::Harm => &mut self.zones.harm_deck,
            Family::Feature => &mut self.zones.feature_deck,
            Family::Business => return,
        };
        if let Some(card) = deck.pop_front() {
            let zones = self.zones.player_mut(player);
            match family {
                Family::Harm => zones.harm_hand.insert(card),
                _ => zones.feature_hand.insert(card),
            };
            events.push(Event::Drew { player, family, card: Some(card) });
        }
    }

    fn take_challenge(&mut self) -> Challenge {
        match &self.phase {
            Phase::AwaitingDefense { challenge } => challenge.clone(),
            Phase::AwaitingVote { vote } => vote.challenge.clone(),
            _ => unreachable!("no pending challenge"),
        }
    }

    fn open_vote(
        &mut self,
        subject: VoteSubject,
        proposer: PlayerId,
        challenge: Challenge,
        defense: Option<DefenseClaim>,
        events: &mut Vec<Event>,
    ) {
        let voters: BTreeSet<PlayerId> = self.live_players().filter(|&p| p != proposer).collect();
        events.push(Event::VoteOpened { subject, proposer, voters: voters.iter().copied().collect() });
        self.phase = Phase::AwaitingVote {
            vote: VoteContext { subject, proposer, voters, ballots: Default::default(), challenge, defense },
        };
    }

    fn close_vote(&mut self, vote: VoteContext, events: &mut Vec<Event>) {
        let approvals = vote.approvals() as u32;
        let approved = vote.approved();
        events.push(Event::VoteClosed {
            subject: vote.subject,
            approvals,
            rejections: vote.ballots.len() as u32 - approvals,
            approved,
        });
        let challenge = vote.challenge;
        match (vote.subject, approved) {
            (VoteSubject::WildHarmValidity, true) => {
                self.phase = Phase::AwaitingDefense { challenge };
            }
            (VoteSubject::WildHarmValidity, false) => {
                self.table_to_deck_bottom(challenge.harm);
                events.push(Event::WildHarmRejected { challenger: challenge.challenger, harm: challenge.harm });
                self.draw(challenge.challenger, Family::Harm, events);
                self.finish_turn(events);
            }
            (_, true) => {
                let feature = vote.defense.expect("defense votes carry a claim").feature;
                self.defense_succeeds(challenge, feature, events);
            }
            (VoteSubject::WildFeatureAdequacy, false) => {
                let feature = vote.defense.expect("defense votes carry a claim").feature;
                self.table_to_deck_bottom(feature);
                self.draw(challenge.defender, Family::Feature, events);
                self.defense_fails(challenge, events);
            }
            (VoteSubject::NarratedFeatureVsWildHarm, false) => {
                let feature = vote.defense.expect("defense votes carry a claim").feature;
                self.table_to_hand(challenge.defender, feature);
                self.defense_fails(challenge, events);
            }
        }
    }

    fn defense_succeeds(&mut self, challenge: Challenge, feature: CardUid, events: &mut Vec<Event>) {
        self.table_to_deck_bottom(challenge.harm);
        self.table_to_deck_bottom(feature);
        events.push(Event::ChallengeDefeated {
            challenger: challenge.challenger,
            defender: challenge.defender,
            target: challenge.target,
            harm: challenge.harm,
            feature,
        });
        self.draw(challenge.challenger, Family::Harm, events);
        self.draw(challenge.defender, Family::Feature, events);
        if self.config.literal_replacement_draw {
            self.draw(challenge.challenger, Family::Feature, events);
            self.draw(challenge.defender, Family::Harm, events);
        }
        self.finish_turn(events);
    }

    fn defense_fails(&mut self, challenge: Challenge, events: &mut Vec<Event>) {
        let defender = self.zones.player_mut(challenge.defender);
        defender.in_play.retain(|&b| b != challenge.target);
        self.zones.business_discard.insert(challenge.target);
        self.table_to_deck_bottom(challenge.harm);
        events.push(Event::BusinessLost { player: challenge.defender, business: challenge.target, harm: challenge.harm });
        self.draw(challenge.challenger, Family::Harm, events);
        self.finish_turn(events);
    }

    fn advance_setup(&mut self, player: PlayerId, events: &mut Vec<Event>) {
        let pos = self.turn_order.iter().position(|&p| p == player).expect("seated");
        if let Some(&next) = self.turn_order.get(pos + 1) {
            self.phase = Phase::Setup { player: next };
            return;
        }
        let placements = self
            .turn_order
            .iter()
            .flat_map(|&p| self.zones.player(p).in_play.iter().map(move |&business| Placement { player: p, business }))
            .collect();
        events.push(Event::BusinessesRevealed { placements });
        let first = self.turn_order[0];
        self.active = first;
        self.phase = Phase::AwaitingTurnAction { player: first, setups_done: 0 };
        events.push(Event::TurnStarted { player: first, turn: self.turn_counter });
    }

    /// Ends the current turn: eliminations, then the win check, then the turn
    /// cap, then the next live seat.
    fn finish_turn(&mut self, events: &mut Vec<Event>) {
        let out: Vec<PlayerId> = self
            .live_players()
            .filter(|&p| {
                let z = self.zones.player(p);
                z.in_play.is_empty() && z.business_hand.is_empty()
            })
            .collect();
        for p in out {
            self.eliminate(p, events);
        }

        let live: Vec<PlayerId> = self.live_players().collect();
        if live.len() <= 1 {
            let outcome = match live.first() {
                Some(&winner) => Outcome {
                    kind: OutcomeKind::Win,
                    winner: Some(winner),
                    ranking: std::iter::once(vec![winner])
                        .chain(self.eliminated.iter().rev().map(|&p| vec![p]))
                        .collect(),
                },
                None => self.stalemate_outcome(),
            };
            self.terminate(outcome, events);
            return;
        }

        self.turn_counter += 1;
        if self.turn_counter >= self.config.turn_cap {
            let outcome = self.stalemate_outcome();
            self.terminate(outcome, events);
            return;
        }

        let pos = self.turn_order.iter().position(|&p| p == self.active).unwrap_or(0);
        let n = self.turn_order.len();
        let next = (1..=n)
            .map(|k| self.turn_order[(pos + k) % n])
            .find(|p| !self.eliminated.contains(p))
            .expect("at least two live players");
        self.active = next;
        self.phase = Phase::AwaitingTurnAction { player: next, setups_done: 0 };
        events.push(Event::TurnStarted { player: next, turn: self.turn_counter });
    }

    fn eliminate(&mut self, player: PlayerId, events: &mut Vec<Event>) {
        self.eliminated.push(player);
        let z = self.zones.player_mut(player);
        let harms = std::mem::take(&mut z.harm_hand);
        let features = std::mem::take(&mut z.feature_hand);
        self.zones.harm_deck.extend(harms);
        self.zones.feature_deck.extend(features);
        events.push(Event::PlayerEliminated { player });
    }

    fn stalemate_outcome(&self) -> Outcome {
        let mut live: Vec<(PlayerId, usize, usize)> = self
            .live_players()
            .map(|p| {
                let z = self.zones.player(p);
                (p, z.in_play.len(), z.in_play.len() + z.business_hand.len())
            })
            .collect();
        live.sort_by(|a, b| (b.1, b.2, a.0).cmp(&(a.1, a.2, b.0)));
        let mut ranking: Vec<Vec<PlayerId>> = Vec::new();
        let mut last_key = None;
        for (p, in_play, total) in live {
            if last_key == Some((in_play, total)) {
                ranking.last_mut().expect("group exists").push(p);
            } else {
                ranking.push(vec![p]);
                last_key = Some((in_play, total));
            }
        }
        ranking.extend(self.eliminated.iter().rev().map(|&p| vec![p]));
        Outcome { kind: OutcomeKind::Stalemate, winner: None, ranking }
    }

    fn terminate(&mut self, outcome: Outcome, events: &mut Vec<Event>) {
        events.push(Event::GameOver { outcome: outcome.clone() });
        self.phase = Phase::Terminal { outcome };
    }

    /// Card multiset and zone-family invariants; `Err` describes the first
    /// violation found.
    pub fn check_invariants(&self, expected_cards: &[CardUid]) -> Result<(), String> {
        let cards = self.zones.all_cards();
        if cards != expected_cards {
            return Err(format!("card multiset changed: {} cards now, {} expected", cards.len(), expected_cards.len()));
        }
        self.zones.check_families()?;
        match &self.phase {
            Phase::AwaitingTurnAction { player, .. } if self.is_eliminated(*player) => {
                return Err(format!("eliminated {player} is active"));
            }
            Phase::AwaitingDefense { challenge } => {
                if self.zones.player(challenge.defender).in_play.iter().all(|&b| b != challenge.target) {
                    return Err("challenge target is not in play".into());
                }
                if !self.zones.table.contains(&challenge.harm) {
                    return Err("challenge harm is not on the table".into());
                }
            }
            Phase::AwaitingVote { vote } if vote.voters.contains(&vote.proposer) => {
                return Err("proposer is a voter".into());
            }
            _ => {}
        }
        if self.phase.challenge().is_none() && !self.zones.table.is_empty() {
            return Err("cards left on the table outside a challenge".into());
        }
        if self.turn_counter > self.config.turn_cap {
            return Err("turn counter exceeded the cap".into());
        }
        Ok(())
    }
}

/// Convenience wrapper matching the functional form of the operations.
pub fn new_game(config: GameConfig, catalog: Arc<Catalog>) -> Result<GameState, EngineError> {
    GameState::new(config, catalog)
}

#[cfg(test)]
mod tests;
