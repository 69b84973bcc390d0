use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::cards::{CardUid, PlayerId};
use crate::catalog::Family;

/// Longest narrative accepted with a wild or narrated play.
pub const NARRATIVE_MAX: usize = 500;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Action {
    SetupBusiness { business: CardUid },
    EndTurn,
    PlayHarm { harm: CardUid, defender: PlayerId, target: CardUid },
    PlayWildHarm { harm: CardUid, defender: PlayerId, target: CardUid, narrative: String },
    Defend { feature: CardUid },
    DefendWithNarrative { feature: CardUid, narrative: String },
    DefendWild { feature: CardUid, narrative: String },
    Decline,
    CastVote { approve: bool },
    ExchangeHarm { harm: CardUid },
    Pass,
}

impl Action {
    pub fn narrative(&self) -> Option<&str> {
        match self {
            Action::PlayWildHarm { narrative, .. }
            | Action::DefendWithNarrative { narrative, .. }
            | Action::DefendWild { narrative, .. } => Some(narrative),
            _ => None,
        }
    }

    pub fn needs_narrative(&self) -> bool {
        self.narrative().is_some()
    }

    /// Copy of this action carrying `text` as its narrative. Actions without
    /// a narrative are returned unchanged.
    pub fn with_narrative(&self, text: impl Into<String>) -> Action {
        let text = text.into();
        match self.clone() {
            Action::PlayWildHarm { harm, defender, target, .. } => {
                Action::PlayWildHarm { harm, defender, target, narrative: text }
            }
            Action::DefendWithNarrative { feature, .. } => Action::DefendWithNarrative { feature, narrative: text },
            Action::DefendWild { feature, .. } => Action::DefendWild { feature, narrative: text },
            other => other,
        }
    }

    /// The move with its free text removed; two actions are the same move
    /// when their skeletons are equal.
    pub fn skeleton(&self) -> Action {
        self.with_narrative(String::new())
    }

    pub fn same_move(&self, other: &Action) -> bool {
        self.skeleton() == other.skeleton()
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Action::SetupBusiness { .. } => "setup_business",
            Action::EndTurn => "end_turn",
            Action::PlayHarm { .. } => "play_harm",
            Action::PlayWildHarm { .. } => "play_wild_harm",
            Action::Defend { .. } => "defend",
            Action::DefendWithNarrative { .. } => "defend_with_narrative",
            Action::DefendWild { .. } => "defend_wild",
            Action::Decline => "decline",
            Action::CastVote { .. } => "cast_vote",
            Action::ExchangeHarm { .. } => "exchange_harm",
            Action::Pass => "pass",
        }
    }

    pub(crate) fn stage(&self) -> Stage {
        match self {
            Action::SetupBusiness { .. }
            | Action::EndTurn
            | Action::PlayHarm { .. }
            | Action::PlayWildHarm { .. }
            | Action::ExchangeHarm { .. }
            | Action::Pass => Stage::Turn,
            Action::Defend { .. } | Action::DefendWithNarrative { .. } | Action::DefendWild { .. } | Action::Decline => {
                Stage::Defense
            }
            Action::CastVote { .. } => Stage::Vote,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Stage {
    Turn,
    Defense,
    Vote,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Challenge {
    pub challenger: PlayerId,
    pub defender: PlayerId,
    pub target: CardUid,
    pub harm: CardUid,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub narrative: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VoteSubject {
    WildHarmValidity,
    WildFeatureAdequacy,
    NarratedFeatureVsWildHarm,
}

/// A defense card committed to the table and awaiting a vote.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefenseClaim {
    pub feature: CardUid,
    pub narrative: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoteContext {
    pub subject: VoteSubject,
    pub proposer: PlayerId,
    pub voters: BTreeSet<PlayerId>,
    pub ballots: BTreeMap<PlayerId, bool>,
    pub challenge: Challenge,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub defense: Option<DefenseClaim>,
}

impl VoteContext {
    pub fn approvals(&self) -> usize {
        self.ballots.values().filter(|&&b| b).count()
    }

    pub fn is_complete(&self) -> bool {
        self.ballots.len() == self.voters.len()
    }

    pub fn pending_voters(&self) -> impl Iterator<Item = PlayerId> + '_ {
        self.voters.iter().copied().filter(|v| !self.ballots.contains_key(v))
    }

    /// Strict majority of all voters; ties fail.
    pub fn approved(&self) -> bool {
        majority_approves(self.approvals(), self.voters.len())
    }
}

pub fn majority_approves(approvals: usize, voters: usize) -> bool {
    approvals > voters / 2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeKind {
    Win,
    Stalemate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outcome {
    pub kind: OutcomeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub winner: Option<PlayerId>,
    /// Best first; players sharing a group are tied.
    pub ranking: Vec<Vec<PlayerId>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "phase", rename_all = "snake_case")]
pub enum Phase {
    /// Opening round: each seat in turn order places one business face down.
    Setup { player: PlayerId },
    AwaitingTurnAction { player: PlayerId, setups_done: u32 },
    AwaitingDefense { challenge: Challenge },
    AwaitingVote { vote: VoteContext },
    Terminal { outcome: Outcome },
}

impl Phase {
    pub fn name(&self) -> &'static str {
        match self {
            Phase::Setup { .. } => "setup",
            Phase::AwaitingTurnAction { .. } => "awaiting_turn_action",
            Phase::AwaitingDefense { .. } => "awaiting_defense",
            Phase::AwaitingVote { .. } => "awaiting_vote",
            Phase::Terminal { .. } => "terminal",
        }
    }

    /// Players who may act right now.
    pub fn awaiting(&self) -> Vec<PlayerId> {
        match self {
            Phase::Setup { player } | Phase::AwaitingTurnAction { player, .. } => vec![*player],
            Phase::AwaitingDefense { challenge } => vec![challenge.defender],
            Phase::AwaitingVote { vote } => vote.pending_voters().collect(),
            Phase::Terminal { .. } => Vec::new(),
        }
    }

    pub fn challenge(&self) -> Option<&Challenge> {
        match self {
            Phase::AwaitingDefense { challenge } => Some(challenge),
            Phase::AwaitingVote { vote } => Some(&vote.challenge),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub player: PlayerId,
    pub business: CardUid,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    GameStarted { players: u8, harm_deck: usize, feature_deck: usize, boxed: usize },
    Drew { player: PlayerId, family: Family, card: Option<CardUid> },
    SetupCommitted { player: PlayerId, business: Option<CardUid> },
    BusinessesRevealed { placements: Vec<Placement> },
    BusinessSetUp { player: PlayerId, business: CardUid },
    TurnEnded { player: PlayerId },
    Passed { player: PlayerId },
    HarmExchanged { player: PlayerId, returned: Option<CardUid> },
    HarmPlayed { challenger: PlayerId, defender: PlayerId, target: CardUid, harm: CardUid },
    WildHarmPlayed { challenger: PlayerId, defender: PlayerId, target: CardUid, harm: CardUid, narrative: String },
    VoteOpened { subject: VoteSubject, proposer: PlayerId, voters: Vec<PlayerId> },
    VoteCast { voter: PlayerId },
    VoteClosed { subject: VoteSubject, approvals: u32, rejections: u32, approved: bool },
    Defended { defender: PlayerId, feature: CardUid },
    NarratedDefense { defender: PlayerId, feature: CardUid, narrative: String },
    WildDefense { defender: PlayerId, feature: CardUid, narrative: String },
    Declined { defender: PlayerId },
    WildHarmRejected { challenger: PlayerId, harm: CardUid },
    ChallengeDefeated { challenger: PlayerId, defender: PlayerId, target: CardUid, harm: CardUid, feature: CardUid },
    BusinessLost { player: PlayerId, business: CardUid, harm: CardUid },
    PlayerEliminated { player: PlayerId },
    TurnStarted { player: PlayerId, turn: u32 },
    GameOver { outcome: Outcome },
}

impl Event {
    /// The event as `viewer` may see it. Harm and feature cards circulate
    /// back into hands, so public logs only name their faces; private draws
    /// and exchanges are hidden from everyone but their owner.
    pub fn redacted_for(&self, viewer: Option<PlayerId>) -> Event {
        let owns = |p: &PlayerId| viewer == Some(*p);
        let face = |c: &CardUid| if c.family == Family::Business { *c } else { c.face() };
        match self.clone() {
            Event::Drew { player, family, card } => Event::Drew {
                player,
                family,
                card: if owns(&player) { card.map(|c| face(&c)) } else { None },
            },
            Event::SetupCommitted { player, business } => Event::SetupCommitted {
                player,
                business: if owns(&player) { business } else { None },
            },
            Event::HarmExchanged { player, returned } => Event::HarmExchanged {
                player,
                returned: if owns(&player) { returned.map(|c| face(&c)) } else { None },
            },
            Event::HarmPlayed { challenger, defender, target, harm } => {
                Event::HarmPlayed { challenger, defender, target, harm: face(&harm) }
            }
            Event::WildHarmPlayed { challenger, defender, target, harm, narrative } => {
                Event::WildHarmPlayed { challenger, defender, target, harm: face(&harm), narrative }
            }
            Event::Defended { defender, feature } => Event::Defended { defender, feature: face(&feature) },
            Event::NarratedDefense { defender, feature, narrative } => {
                Event::NarratedDefense { defender, feature: face(&feature), narrative }
            }
            Event::WildDefense { defender, feature, narrative } => {
                Event::WildDefense { defender, feature: face(&feature), narrative }
            }
            Event::WildHarmRejected { challenger, harm } => Event::WildHarmRejected { challenger, harm: face(&harm) },
            Event::ChallengeDefeated { challenger, defender, target, harm, feature } => Event::ChallengeDefeated {
                challenger,
                defender,
                target,
                harm: face(&harm),
                feature: face(&feature),
            },
            Event::BusinessLost { player, business, harm } => Event::BusinessLost { player, business, harm: face(&harm) },
            other => other,
        }
    }
}
