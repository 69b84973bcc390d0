use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::cards::{CardUid, PlayerId};
use crate::catalog::Family;

/// Cards held by one seat.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayerZones {
    pub business_hand: BTreeSet<CardUid>,
    pub harm_hand: BTreeSet<CardUid>,
    pub feature_hand: BTreeSet<CardUid>,
    /// Businesses set up, in setup order.
    pub in_play: Vec<CardUid>,
}

impl PlayerZones {
    pub fn hand_len(&self) -> usize {
        self.business_hand.len() + self.harm_hand.len() + self.feature_hand.len()
    }

    pub fn holds(&self, card: CardUid) -> bool {
        self.business_hand.contains(&card) || self.harm_hand.contains(&card) || self.feature_hand.contains(&card)
    }
}

/// Every place a card can be. Each card is in exactly one zone.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Zones {
    /// Top of deck is the front.
    pub harm_deck: VecDeque<CardUid>,
    pub feature_deck: VecDeque<CardUid>,
    /// Undistributed businesses.
    pub boxed: BTreeSet<CardUid>,
    pub players: Vec<PlayerZones>,
    pub business_discard: BTreeSet<CardUid>,
    /// Cards committed to the pending challenge or vote.
    pub table: Vec<CardUid>,
}

impl Zones {
    pub fn player(&self, p: PlayerId) -> &PlayerZones {
        &self.players[p.index()]
    }

    pub(crate) fn player_mut(&mut self, p: PlayerId) -> &mut PlayerZones {
        &mut self.players[p.index()]
    }

    /// All cards, sorted. Equal before and after any transition.
    pub fn all_cards(&self) -> Vec<CardUid> {
        let mut cards: Vec<CardUid> = self
            .harm_deck
            .iter()
            .chain(&self.feature_deck)
            .chain(&self.boxed)
            .chain(&self.business_discard)
            .chain(&self.table)
            .copied()
            .collect();
        for p in &self.players {
            cards.extend(p.business_hand.iter().chain(&p.harm_hand).chain(&p.feature_hand).chain(&p.in_play));
        }
        cards.sort();
        cards
    }

    /// The owner of a card currently in some player's hand.
    pub fn hand_owner(&self, card: CardUid) -> Option<PlayerId> {
        self.players.iter().position(|p| p.holds(card)).map(|i| PlayerId(i as u8))
    }

    pub fn in_play_owner(&self, card: CardUid) -> Option<PlayerId> {
        self.players.iter().position(|p| p.in_play.contains(&card)).map(|i| PlayerId(i as u8))
    }

    /// Checks that every zone only holds cards of the family it accepts.
    pub fn check_families(&self) -> Result<(), String> {
        fn expect<'a>(zone: &str, family: Family, cards: impl IntoIterator<Item = &'a CardUid>) -> Result<(), String> {
            for c in cards {
                if c.family != family {
                    return Err(format!("{c} found in {zone}"));
                }
                if family == Family::Business && c.kind == 0 {
                    return Err(format!("wild business {c} in {zone}"));
                }
            }
            Ok(())
        }
        expect("harm deck", Family::Harm, &self.harm_deck)?;
        expect("feature deck", Family::Feature, &self.feature_deck)?;
        expect("box", Family::Business, &self.boxed)?;
        expect("business discard", Family::Business, &self.business_discard)?;
        for (i, p) in self.players.iter().enumerate() {
            let seat = format!("seat {i}");
            expect(&format!("{seat} business hand"), Family::Business, &p.business_hand)?;
            expect(&format!("{seat} harm hand"), Family::Harm, &p.harm_hand)?;
            expect(&format!("{seat} feature hand"), Family::Feature, &p.feature_hand)?;
            expect(&format!("{seat} in play"), Family::Business, &p.in_play)?;
        }
        Ok(())
    }
}
