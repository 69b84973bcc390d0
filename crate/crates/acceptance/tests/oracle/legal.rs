//! Brute-force legality: every conceivable action is generated and judged
//! against the table rules one at a time.

use std::collections::BTreeSet;
use std::sync::Arc;

use aiaudit_core::engine::{
    Challenge, DefenseClaim, Phase, PlayerZones, VoteContext, VoteSubject, Zones,
};
use aiaudit_core::{Action, CardUid, Catalog, GameConfig, GameState, PlayerId};
use rand::seq::SliceRandom;
use rand::Rng;

use super::cards;

fn vulnerable(business: u8, harm: u8) -> bool {
    cards::BUSINESSES[business as usize - 1].1.contains(&harm)
}

fn counters(feature: u8, harm: u8) -> bool {
    cards::FEATURES[feature as usize - 1].1.contains(&harm)
}

fn all_harms() -> Vec<CardUid> {
    (0..=13u8).flat_map(|k| (1..=3u16).map(move |c| CardUid::harm(k, c))).collect()
}

fn all_features() -> Vec<CardUid> {
    (0..=7u8).flat_map(|k| (1..=2u16).map(move |c| CardUid::feature(k, c))).collect()
}

fn all_businesses() -> Vec<CardUid> {
    (1..=14u8).map(CardUid::business).collect()
}

/// A random two-seat position with at most four cards in each hand.
pub fn small_state<R: Rng>(rng: &mut R, catalog: Arc<Catalog>) -> GameState {
    let config = GameConfig {
        max_setups_per_turn: rng.gen_range(1..=3),
        harm_exchange_enabled: rng.gen_bool(0.5),
        decline_defense_allowed: rng.gen_bool(0.5),
        seed: rng.gen(),
        ..GameConfig::with_players(2)
    };
    let mut businesses = all_businesses();
    let mut harms = all_harms();
    let mut features = all_features();
    businesses.shuffle(rng);
    harms.shuffle(rng);
    features.shuffle(rng);

    let mut players = Vec::new();
    for _ in 0..2 {
        let mut z = PlayerZones::default();
        for _ in 0..rng.gen_range(0..=4) {
            match rng.gen_range(0..3) {
                0 => z.business_hand.extend(businesses.pop()),
                1 => z.harm_hand.extend(harms.pop()),
                _ => z.feature_hand.extend(features.pop()),
            }
        }
        for _ in 0..rng.gen_range(0..=3) {
            z.in_play.extend(businesses.pop());
        }
        if z.in_play.is_empty() && z.business_hand.is_empty() {
            z.in_play.extend(businesses.pop());
        }
        players.push(z);
    }

    let p = PlayerId(rng.gen_range(0..2));
    let other = PlayerId(1 - p.0);
    let mut table = Vec::new();
    let phase = match rng.gen_range(0..4) {
        0 => Phase::Setup { player: p },
        1 => Phase::AwaitingTurnAction { player: p, setups_done: rng.gen_range(0..=config.max_setups_per_turn) },
        kind => {
            if players[other.index()].in_play.is_empty() {
                players[other.index()].in_play.extend(businesses.pop());
            }
            let target = *players[other.index()].in_play.choose(rng).unwrap();
            let wild = rng.gen_bool(0.4);
            let harm = if wild {
                harms.iter().copied().find(|h| h.is_wild())
            } else {
                harms.iter().copied().find(|h| !h.is_wild() && (rng.gen_bool(0.2) || vulnerable(target.kind, h.kind)))
            };
            let harm = harm.unwrap_or_else(|| harms[0]);
            harms.retain(|&h| h != harm);
            table.push(harm);
            let narrative = harm.is_wild().then(|| "a story".to_string());
            let challenge = Challenge { challenger: p, defender: other, target, harm, narrative };
            let regular_pair = !harm.is_wild() && !features.last().is_some_and(|f| f.is_wild());
            if kind == 2 || regular_pair {
                Phase::AwaitingDefense { challenge }
            } else {
                let feature = features.pop().unwrap();
                let (subject, proposer, defense) = if feature.is_wild() {
                    (VoteSubject::WildFeatureAdequacy, other, Some(feature))
                } else if harm.is_wild() && rng.gen_bool(0.5) {
                    (VoteSubject::NarratedFeatureVsWildHarm, other, Some(feature))
                } else if harm.is_wild() {
                    (VoteSubject::WildHarmValidity, p, None)
                } else {
                    (VoteSubject::WildHarmValidity, p, None)
                };
                let defense = defense.map(|f| {
                    table.push(f);
                    DefenseClaim { feature: f, narrative: "a defense".into() }
                });
                let voters: BTreeSet<PlayerId> = [p, other].into_iter().filter(|&v| v != proposer).collect();
                Phase::AwaitingVote {
                    vote: VoteContext { subject, proposer, voters, ballots: Default::default(), challenge, defense },
                }
            }
        }
    };

    let zones = Zones {
        harm_deck: harms.into_iter().collect(),
        feature_deck: features.into_iter().collect(),
        boxed: businesses.into_iter().collect(),
        players,
        table,
        ..Default::default()
    };
    GameState::arranged(config, catalog, zones, phase).expect("arranged state")
}

/// Every action any seat could name in this position, legal or not.
pub fn candidates(state: &GameState) -> Vec<(PlayerId, Action)> {
    let mut actions = vec![Action::EndTurn, Action::Pass, Action::Decline];
    actions.extend([true, false].map(|approve| Action::CastVote { approve }));
    actions.extend(all_businesses().into_iter().map(|business| Action::SetupBusiness { business }));
    for harm in all_harms() {
        actions.push(Action::ExchangeHarm { harm });
        for defender in state.players() {
            for target in all_businesses() {
                actions.push(Action::PlayHarm { harm, defender, target });
                actions.push(Action::PlayWildHarm { harm, defender, target, narrative: String::new() });
            }
        }
    }
    for feature in all_features() {
        actions.push(Action::Defend { feature });
        actions.push(Action::DefendWithNarrative { feature, narrative: String::new() });
        actions.push(Action::DefendWild { feature, narrative: String::new() });
    }
    state.players().flat_map(|p| actions.iter().map(move |a| (p, a.clone()))).collect()
}

fn turn_rule(state: &GameState, me: PlayerId, setups_done: u32, action: &Action) -> bool {
    let config = state.config();
    let own = state.zones().player(me);
    let opponents_business = |defender: PlayerId, target: CardUid| {
        defender != me && !state.is_eliminated(defender) && state.zones().player(defender).in_play.contains(&target)
    };
    let any_regular_attack = own.harm_hand.iter().filter(|h| !h.is_wild()).any(|h| {
        state.players().any(|d| {
            state.zones().player(d).in_play.iter().any(|&t| opponents_business(d, t) && vulnerable(t.kind, h.kind))
        })
    });
    let any_wild_attack = own.harm_hand.iter().any(|h| h.is_wild())
        && state.players().any(|d| state.zones().player(d).in_play.iter().any(|&t| opponents_business(d, t)));
    let may_setup = setups_done < config.max_setups_per_turn && !own.business_hand.is_empty();
    // Someone with nothing running and businesses in hand has to set one up.
    let must_setup = own.in_play.is_empty() && !own.business_hand.is_empty();
    let attacking_window = setups_done == 0 && !must_setup;
    let may_exchange = attacking_window && config.harm_exchange_enabled && !any_regular_attack && !own.harm_hand.is_empty();

    match action {
        Action::SetupBusiness { business } => setups_done < config.max_setups_per_turn && own.business_hand.contains(business),
        Action::EndTurn => setups_done >= 1,
        Action::PlayHarm { harm, defender, target } => {
            attacking_window
                && !harm.is_wild()
                && own.harm_hand.contains(harm)
                && opponents_business(*defender, *target)
                && vulnerable(target.kind, harm.kind)
        }
        Action::PlayWildHarm { harm, defender, target, .. } => {
            attacking_window && harm.is_wild() && own.harm_hand.contains(harm) && opponents_business(*defender, *target)
        }
        Action::ExchangeHarm { harm } => may_exchange && own.harm_hand.contains(harm),
        Action::Pass => {
            attacking_window && !may_setup && !any_regular_attack && !any_wild_attack && !may_exchange
        }
        _ => false,
    }
}

fn defense_rule(state: &GameState, me: PlayerId, challenge: &Challenge, action: &Action) -> bool {
    if challenge.defender != me {
        return false;
    }
    let hand = &state.zones().player(me).feature_hand;
    let wild_harm = challenge.harm.is_wild();
    let defends = |f: &CardUid| {
        if f.is_wild() || wild_harm {
            true
        } else {
            counters(f.kind, challenge.harm.kind)
        }
    };
    match action {
        Action::Defend { feature } => !wild_harm && !feature.is_wild() && hand.contains(feature) && defends(feature),
        Action::DefendWithNarrative { feature, .. } => wild_harm && !feature.is_wild() && hand.contains(feature),
        Action::DefendWild { feature, .. } => feature.is_wild() && hand.contains(feature),
        Action::Decline => state.config().decline_defense_allowed || !hand.iter().any(defends),
        _ => false,
    }
}

/// Whether the rules let `me` take `action` right now.
pub fn allowed(state: &GameState, me: PlayerId, action: &Action) -> bool {
    if state.is_eliminated(me) {
        return false;
    }
    match state.phase() {
        Phase::Setup { player } => {
            *player == me
                && matches!(action, Action::SetupBusiness { business } if state.zones().player(me).business_hand.contains(business))
        }
        Phase::AwaitingTurnAction { player, setups_done } => *player == me && turn_rule(state, me, *setups_done, action),
        Phase::AwaitingDefense { challenge } => defense_rule(state, me, challenge, action),
        Phase::AwaitingVote { vote } => {
            vote.voters.contains(&me) && !vote.ballots.contains_key(&me) && matches!(action, Action::CastVote { .. })
        }
        Phase::Terminal { .. } => false,
    }
}
