use serde::{Deserialize, Serialize};

use super::cards::{CardUid, PlayerId};
use super::types::{Action, Challenge, DefenseClaim, Event, Outcome, Phase, VoteSubject};
use super::{legal_actions, EngineError, GameState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "role", rename_all = "snake_case")]
pub enum Viewer {
    Player { id: PlayerId },
    Spectator,
    /// A spectator who also sees guide excerpts for the pending challenge.
    Educator,
}

impl Viewer {
    pub fn player(self) -> Option<PlayerId> {
        match self {
            Viewer::Player { id } => Some(id),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HandView {
    pub businesses: Vec<CardUid>,
    pub harms: Vec<CardUid>,
    pub features: Vec<CardUid>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayerView {
    pub id: PlayerId,
    pub eliminated: bool,
    pub business_hand: usize,
    pub harm_hand: usize,
    pub feature_hand: usize,
    /// Revealed businesses. Empty while the opening placement is face down.
    pub in_play: Vec<CardUid>,
    pub face_down: usize,
}

/// A vote in progress. Individual ballots stay secret until it closes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoteView {
    pub subject: VoteSubject,
    pub proposer: PlayerId,
    pub voters: Vec<PlayerId>,
    pub voted: Vec<PlayerId>,
    pub ballots_cast: usize,
    pub challenge: Challenge,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub defense: Option<DefenseClaim>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "phase", rename_all = "snake_case")]
pub enum PhaseView {
    Setup { player: PlayerId },
    AwaitingTurnAction { player: PlayerId, setups_done: u32 },
    AwaitingDefense { challenge: Challenge },
    AwaitingVote { vote: VoteView },
    Terminal { outcome: Outcome },
}

impl PhaseView {
    pub fn challenge(&self) -> Option<&Challenge> {
        match self {
            PhaseView::AwaitingDefense { challenge } => Some(challenge),
            PhaseView::AwaitingVote { vote } => Some(&vote.challenge),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuideNote {
    pub business: u8,
    pub harm: u8,
    pub text: String,
}

/// What one viewer is entitled to see: their own hand, the public table and
/// counts for everything hidden.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RedactedView {
    pub viewer: Viewer,
    pub phase: PhaseView,
    pub active: PlayerId,
    pub awaiting: Vec<PlayerId>,
    pub turn_counter: u32,
    pub turn_cap: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hand: Option<HandView>,
    pub players: Vec<PlayerView>,
    pub business_discard: Vec<CardUid>,
    pub table: Vec<CardUid>,
    pub harm_deck_size: usize,
    pub feature_deck_size: usize,
    pub box_size: usize,
    /// Index in the full event log of `events[0]`.
    pub event_offset: usize,
    pub events: Vec<Event>,
    pub legal_actions: Vec<Action>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guide_excerpt: Option<GuideNote>,
}

impl RedactedView {
    pub fn me(&self) -> Option<PlayerId> {
        self.viewer.player()
    }

    pub fn is_awaiting_me(&self) -> bool {
        self.me().is_some_and(|me| self.awaiting.contains(&me))
    }

    pub fn player(&self, id: PlayerId) -> Option<&PlayerView> {
        self.players.iter().find(|p| p.id == id)
    }
}

pub(super) fn view_for(state: &GameState, viewer: Viewer, from_event: usize) -> Result<RedactedView, EngineError> {
    let me = viewer.player();
    if let Some(p) = me {
        if p.index() >= state.zones().players.len() {
            return Err(EngineError::UnknownPlayer(p));
        }
    }
    let face_down = matches!(state.phase(), Phase::Setup { .. });
    let zones = state.zones();

    let players = state
        .players()
        .map(|id| {
            let z = zones.player(id);
            let hidden = face_down && me != Some(id);
            PlayerView {
                id,
                eliminated: state.is_eliminated(id),
                business_hand: z.business_hand.len(),
                harm_hand: z.harm_hand.len(),
                feature_hand: z.feature_hand.len(),
                in_play: if hidden { Vec::new() } else { z.in_play.clone() },
                face_down: if hidden { z.in_play.len() } else { 0 },
            }
        })
        .collect();

    let hand = me.map(|p| {
        let z = zones.player(p);
        HandView {
            businesses: z.business_hand.iter().copied().collect(),
            harms: z.harm_hand.iter().copied().collect(),
            features: z.feature_hand.iter().copied().collect(),
        }
    });

    let phase = match state.phase() {
        Phase::Setup { player } => PhaseView::Setup { player: *player },
        Phase::AwaitingTurnAction { player, setups_done } => {
            PhaseView::AwaitingTurnAction { player: *player, setups_done: *setups_done }
        }
        Phase::AwaitingDefense { challenge } => PhaseView::AwaitingDefense { challenge: challenge.clone() },
        Phase::AwaitingVote { vote } => PhaseView::AwaitingVote {
            vote: VoteView {
                subject: vote.subject,
                proposer: vote.proposer,
                voters: vote.voters.iter().copied().collect(),
                voted: vote.ballots.keys().copied().collect(),
                ballots_cast: vote.ballots.len(),
                challenge: vote.challenge.clone(),
                defense: vote.defense.clone(),
            },
        },
        Phase::Terminal { outcome } => PhaseView::Terminal { outcome: outcome.clone() },
    };

    let guide_excerpt = match (viewer, state.phase().challenge()) {
        (Viewer::Educator, Some(c)) if !c.harm.is_wild() => state
            .catalog()
            .guide_excerpt(c.target.kind, c.harm.kind)
            .ok()
            .flatten()
            .map(|text| GuideNote { business: c.target.kind, harm: c.harm.kind, text: text.to_string() }),
        _ => None,
    };

    let from = from_event.min(state.events().len());
    Ok(RedactedView {
        viewer,
        phase,
        active: state.active(),
        awaiting: state.phase().awaiting(),
        turn_counter: state.turn_counter(),
        turn_cap: state.config().turn_cap,
        hand,
        players,
        business_discard: zones.business_discard.iter().copied().collect(),
        table: zones.table.clone(),
        harm_deck_size: zones.harm_deck.len(),
        feature_deck_size: zones.feature_deck.len(),
        box_size: zones.boxed.len(),
        event_offset: from,
        events: state.events()[from..].iter().map(|e| e.redacted_for(me)).collect(),
        legal_actions: me.map(|p| legal_actions(state, p)).unwrap_or_default(),
        guide_excerpt,
    })
}
