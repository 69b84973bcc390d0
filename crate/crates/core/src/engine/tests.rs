use std::collections::BTreeSet;
use std::sync::Arc;

use super::*;
use crate::catalog::default_catalog;

fn catalog() -> Arc<Catalog> {
    Arc::new(default_catalog())
}

fn b(kind: u8) -> CardUid {
    CardUid::business(kind)
}

fn h(kind: u8, copy: u16) -> CardUid {
    CardUid::harm(kind, copy)
}

fn f(kind: u8, copy: u16) -> CardUid {
    CardUid::feature(kind, copy)
}

const P0: PlayerId = PlayerId(0);
const P1: PlayerId = PlayerId(1);
const P2: PlayerId = PlayerId(2);

fn seat(businesses: &[u8], harms: &[CardUid], features: &[CardUid], in_play: &[u8]) -> PlayerZones {
    PlayerZones {
        business_hand: businesses.iter().map(|&k| b(k)).collect(),
        harm_hand: harms.iter().copied().collect(),
        feature_hand: features.iter().copied().collect(),
        in_play: in_play.iter().map(|&k| b(k)).collect(),
    }
}

fn turn_of(p: PlayerId) -> Phase {
    Phase::AwaitingTurnAction { player: p, setups_done: 0 }
}

fn arranged(players: Vec<PlayerZones>, harm_deck: &[CardUid], feature_deck: &[CardUid], phase: Phase) -> GameState {
    let config = GameConfig::with_players(players.len() as u8);
    arranged_with(config, players, harm_deck, feature_deck, phase)
}

fn arranged_with(
    config: GameConfig,
    players: Vec<PlayerZones>,
    harm_deck: &[CardUid],
    feature_deck: &[CardUid],
    phase: Phase,
) -> GameState {
    let zones = Zones {
        harm_deck: harm_deck.iter().copied().collect(),
        feature_deck: feature_deck.iter().copied().collect(),
        players,
        ..Default::default()
    };
    GameState::arranged(config, catalog(), zones, phase).unwrap()
}

fn play(state: &mut GameState, p: PlayerId, a: Action) -> Vec<Event> {
    let cards = state.zones().all_cards();
    let events = state.apply_mut(p, &a).unwrap_or_else(|e| panic!("{a:?} by {p}: {e}"));
    state.check_invariants(&cards).unwrap();
    events
}

#[test]
fn four_players_deal() {
    let s = GameState::new(GameConfig::default(), catalog()).unwrap();
    for p in &s.zones().players {
        assert_eq!(p.business_hand.len(), 3);
        assert_eq!(p.harm_hand.len(), 2);
        assert_eq!(p.feature_hand.len(), 3);
        assert!(p.in_play.is_empty());
    }
    assert_eq!(s.zones().boxed.len(), 2);
    assert_eq!(s.zones().harm_deck.len(), 32);
    assert_eq!(s.zones().feature_deck.len(), 4);
    assert!(matches!(s.events()[0], Event::GameStarted { harm_deck: 40, feature_deck: 16, boxed: 2, players: 4 }));
    assert_eq!(s.phase(), &Phase::Setup { player: P0 });
    assert!(s.is_terminal().is_none());
    assert_eq!(s.zones().all_cards().len(), 14 + 40 + 16);
}

#[test]
fn seven_players_deal_with_feature_shortfall() {
    let s = GameState::new(GameConfig::with_players(7), catalog()).unwrap();
    assert!(s.zones().players.iter().all(|p| p.business_hand.len() == 2));
    assert!(s.zones().boxed.is_empty());
    let features: usize = s.zones().players.iter().map(|p| p.feature_hand.len()).sum();
    assert_eq!(features, 16);
    assert!(s.zones().feature_deck.is_empty());
}

#[test]
fn deck_composition() {
    let s = GameState::new(GameConfig::default(), catalog()).unwrap();
    let cards = s.zones().all_cards();
    let harms: Vec<_> = cards.iter().filter(|c| c.family == Family::Harm).collect();
    let features: Vec<_> = cards.iter().filter(|c| c.family == Family::Feature).collect();
    assert_eq!(harms.len(), 40);
    assert_eq!(harms.iter().filter(|c| c.is_wild()).count(), 1);
    assert_eq!(features.len(), 16);
    assert_eq!(features.iter().filter(|c| c.is_wild()).count(), 2);
    let unique: BTreeSet<_> = cards.iter().collect();
    assert_eq!(unique.len(), cards.len());
}

#[test]
fn seeds_change_the_shuffle() {
    let a = GameState::new(GameConfig::default().with_seed(1), catalog()).unwrap();
    let b = GameState::new(GameConfig::default().with_seed(2), catalog()).unwrap();
    let again = GameState::new(GameConfig::default().with_seed(1), catalog()).unwrap();
    assert_ne!(a.digest(), b.digest());
    assert_eq!(a.digest(), again.digest());
}

#[test]
fn setup_round_is_hidden_until_complete() {
    let mut s = GameState::new(GameConfig::with_players(3), catalog()).unwrap();
    for p in [P0, P1, P2] {
        let legal = s.legal_actions(p);
        if s.phase() == &(Phase::Setup { player: p }) {
            assert!(legal.iter().all(|a| matches!(a, Action::SetupBusiness { .. })));
            assert_eq!(legal.len(), 4);
        }
        let choice = s.legal_actions(p)[0].clone();
        play(&mut s, p, choice);
        if p != P2 {
            let other = s.view_for(Viewer::Player { id: PlayerId((p.0 + 1) % 3) }).unwrap();
            let mine = other.player(p).unwrap();
            assert!(mine.in_play.is_empty());
            assert_eq!(mine.face_down, 1);
            let json = serde_json::to_string(&other).unwrap();
            let committed = s.zones().player(p).in_play[0].to_string();
            assert!(!json.contains(&format!("\"{committed}\"")));
        }
    }
    assert_eq!(s.phase(), &turn_of(P0));
    assert!(s.events().iter().any(|e| matches!(e, Event::BusinessesRevealed { placements } if placements.len() == 3)));
    let v = s.view_for(Viewer::Spectator).unwrap();
    assert!(v.players.iter().all(|p| p.in_play.len() == 1 && p.face_down == 0));
}

#[test]
fn harm_five_hits_business_three() {
    let s = arranged(
        vec![seat(&[], &[h(5, 1)], &[], &[1]), seat(&[], &[], &[], &[3])],
        &[],
        &[],
        turn_of(P0),
    );
    let legal = s.legal_actions(P0);
    assert!(legal.contains(&Action::PlayHarm { harm: h(5, 1), defender: P1, target: b(3) }));
    assert!(!legal.iter().any(|a| matches!(a, Action::ExchangeHarm { .. })));
    assert!(!legal.contains(&Action::Pass));
}

#[test]
fn harm_five_misses_business_fourteen() {
    let s = arranged(
        vec![seat(&[], &[h(5, 1)], &[], &[1]), seat(&[], &[], &[], &[14])],
        &[],
        &[],
        turn_of(P0),
    );
    let legal = s.legal_actions(P0);
    assert!(!legal.iter().any(|a| matches!(a, Action::PlayHarm { .. })));
    assert_eq!(legal, vec![Action::ExchangeHarm { harm: h(5, 1) }]);
}

#[test]
fn orphan_harm_offers_exchange() {
    let all: Vec<u8> = (1..=14).collect();
    let s = arranged(
        vec![seat(&[], &[h(9, 1)], &[], &[1]), seat(&[], &[], &[], &all[1..])],
        &[h(1, 1)],
        &[],
        turn_of(P0),
    );
    let legal = s.legal_actions(P0);
    assert_eq!(legal, vec![Action::ExchangeHarm { harm: h(9, 1) }]);
}

#[test]
fn exchange_swaps_and_passes_turn() {
    let mut s = arranged(
        vec![seat(&[], &[h(9, 1)], &[], &[1]), seat(&[], &[], &[], &[3])],
        &[h(5, 1), h(6, 1)],
        &[],
        turn_of(P0),
    );
    play(&mut s, P0, Action::ExchangeHarm { harm: h(9, 1) });
    assert_eq!(s.zones().player(P0).harm_hand, BTreeSet::from([h(5, 1)]));
    assert_eq!(s.zones().harm_deck.iter().copied().collect::<Vec<_>>(), vec![h(6, 1), h(9, 1)]);
    assert_eq!(s.phase(), &turn_of(P1));
    assert_eq!(s.turn_counter(), 1);
}

#[test]
fn exchange_can_be_disabled() {
    let mut config = GameConfig::with_players(2);
    config.harm_exchange_enabled = false;
    let s = arranged_with(
        config,
        vec![seat(&[], &[h(9, 1)], &[], &[1]), seat(&[], &[], &[], &[3])],
        &[],
        &[],
        turn_of(P0),
    );
    assert_eq!(s.legal_actions(P0), vec![Action::Pass]);
}

#[test]
fn empty_table_forces_setup() {
    let s = arranged(
        vec![seat(&[2, 7], &[h(5, 1)], &[], &[]), seat(&[], &[], &[], &[3])],
        &[],
        &[],
        turn_of(P0),
    );
    let legal = s.legal_actions(P0);
    assert_eq!(legal, vec![Action::SetupBusiness { business: b(2) }, Action::SetupBusiness { business: b(7) }]);
}

#[test]
fn setups_then_end_turn() {
    let mut s = arranged(
        vec![seat(&[2, 7, 9, 11], &[h(5, 1)], &[], &[1]), seat(&[], &[], &[], &[3])],
        &[],
        &[],
        turn_of(P0),
    );
    assert!(!s.legal_actions(P0).contains(&Action::EndTurn));
    play(&mut s, P0, Action::SetupBusiness { business: b(2) });
    let legal = s.legal_actions(P0);
    assert!(legal.contains(&Action::EndTurn));
    assert!(!legal.iter().any(|a| matches!(a, Action::PlayHarm { .. } | Action::Pass)));
    play(&mut s, P0, Action::SetupBusiness { business: b(7) });
    play(&mut s, P0, Action::SetupBusiness { business: b(9) });
    assert_eq!(s.legal_actions(P0), vec![Action::EndTurn]);
    play(&mut s, P0, Action::EndTurn);
    assert_eq!(s.phase(), &turn_of(P1));
    assert_eq!(s.zones().player(P0).in_play, vec![b(1), b(2), b(7), b(9)]);
}

#[test]
fn successful_defense_recycles_both_cards() {
    let mut s = arranged(
        vec![seat(&[], &[h(5, 1)], &[], &[1]), seat(&[], &[], &[f(2, 1)], &[13])],
        &[h(3, 1)],
        &[f(6, 1)],
        turn_of(P0),
    );
    play(&mut s, P0, Action::PlayHarm { harm: h(5, 1), defender: P1, target: b(13) });
    assert_eq!(s.phase().awaiting(), vec![P1]);
    assert_eq!(s.zones().table, vec![h(5, 1)]);
    assert_eq!(s.legal_actions(P1), vec![Action::Defend { feature: f(2, 1) }, Action::Decline]);
    play(&mut s, P1, Action::Defend { feature: f(2, 1) });
    let z = s.zones();
    assert_eq!(z.player(P1).in_play, vec![b(13)]);
    assert_eq!(z.player(P0).harm_hand, BTreeSet::from([h(3, 1)]));
    assert_eq!(z.player(P1).feature_hand, BTreeSet::from([f(6, 1)]));
    assert_eq!(z.harm_deck.back(), Some(&h(5, 1)));
    assert_eq!(z.feature_deck.back(), Some(&f(2, 1)));
    assert_eq!(s.phase(), &turn_of(P1));
}

#[test]
fn literal_replacement_draws_both_types() {
    let mut config = GameConfig::with_players(2);
    config.literal_replacement_draw = true;
    let mut s = arranged_with(
        config,
        vec![seat(&[], &[h(5, 1)], &[], &[1]), seat(&[], &[], &[f(2, 1)], &[13])],
        &[h(3, 1), h(4, 1)],
        &[f(6, 1), f(7, 1)],
        turn_of(P0),
    );
    play(&mut s, P0, Action::PlayHarm { harm: h(5, 1), defender: P1, target: b(13) });
    play(&mut s, P1, Action::Defend { feature: f(2, 1) });
    let z = s.zones();
    assert_eq!(z.player(P0).hand_len(), 2);
    assert_eq!(z.player(P1).hand_len(), 2);
}

#[test]
fn decline_discards_target() {
    let mut s = arranged(
        vec![seat(&[], &[h(8, 1)], &[], &[1]), seat(&[], &[], &[f(1, 1)], &[12, 3])],
        &[h(2, 1)],
        &[],
        turn_of(P0),
    );
    play(&mut s, P0, Action::PlayHarm { harm: h(8, 1), defender: P1, target: b(12) });
    // Feature 1 does not counter harm 8, so only a decline is possible.
    assert_eq!(s.legal_actions(P1), vec![Action::Decline]);
    play(&mut s, P1, Action::Decline);
    let z = s.zones();
    assert!(z.business_discard.contains(&b(12)));
    assert_eq!(z.player(P1).in_play, vec![b(3)]);
    assert_eq!(z.harm_deck.back(), Some(&h(8, 1)));
    assert_eq!(z.player(P0).harm_hand, BTreeSet::from([h(2, 1)]));
    assert!(s.is_terminal().is_none());
}

#[test]
fn decline_can_be_forbidden() {
    let mut config = GameConfig::with_players(2);
    config.decline_defense_allowed = false;
    let mut s = arranged_with(
        config,
        vec![seat(&[], &[h(5, 1)], &[], &[1]), seat(&[], &[], &[f(2, 1)], &[13])],
        &[],
        &[],
        turn_of(P0),
    );
    play(&mut s, P0, Action::PlayHarm { harm: h(5, 1), defender: P1, target: b(13) });
    assert_eq!(s.legal_actions(P1), vec![Action::Defend { feature: f(2, 1) }]);
    let err = s.apply(P1, &Action::Decline).unwrap_err();
    assert_eq!(err.code(), "illegal-action");
}

#[test]
fn last_business_lost_wins_the_game() {
    let mut s = arranged(
        vec![seat(&[], &[h(8, 1)], &[], &[1]), seat(&[], &[h(1, 1)], &[f(1, 1)], &[12])],
        &[],
        &[],
        turn_of(P0),
    );
    play(&mut s, P0, Action::PlayHarm { harm: h(8, 1), defender: P1, target: b(12) });
    play(&mut s, P1, Action::Decline);
    let outcome = s.is_terminal().unwrap();
    assert_eq!(outcome.kind, OutcomeKind::Win);
    assert_eq!(outcome.winner, Some(P0));
    assert_eq!(outcome.ranking, vec![vec![P0], vec![P1]]);
    assert_eq!(s.eliminated(), &[P1]);
    // Eliminated hands go to the deck bottoms.
    assert_eq!(s.zones().harm_deck.back(), Some(&h(1, 1)));
    assert_eq!(s.zones().feature_deck.back(), Some(&f(1, 1)));
    assert!(s.legal_actions(P0).is_empty());
    assert_eq!(s.apply(P0, &Action::Pass).unwrap_err().code(), "wrong-phase");
}

#[test]
fn eliminated_seats_are_skipped() {
    let mut s = arranged(
        vec![
            seat(&[], &[h(8, 1)], &[], &[1]),
            seat(&[], &[], &[], &[12]),
            seat(&[], &[], &[], &[3]),
        ],
        &[],
        &[],
        turn_of(P0),
    );
    play(&mut s, P0, Action::PlayHarm { harm: h(8, 1), defender: P1, target: b(12) });
    play(&mut s, P1, Action::Decline);
    assert_eq!(s.eliminated(), &[P1]);
    assert_eq!(s.phase(), &turn_of(P2));
    assert!(s.is_terminal().is_none());
}

fn wild_defense_state(players: usize) -> GameState {
    let mut seats = vec![
        seat(&[], &[h(8, 1)], &[], &[1]),
        seat(&[], &[], &[f(0, 1)], &[12, 3]),
    ];
    for k in 2..players {
        seats.push(seat(&[], &[], &[], &[4 + k as u8]));
    }
    let mut s = arranged(seats, &[h(2, 1)], &[f(5, 1)], turn_of(P0));
    play(&mut s, P0, Action::PlayHarm { harm: h(8, 1), defender: P1, target: b(12) });
    s
}

#[test]
fn wild_defense_needs_a_strict_majority() {
    let mut s = wild_defense_state(5);
    let legal = s.legal_actions(P1);
    assert!(legal.iter().any(|a| matches!(a, Action::DefendWild { .. })));
    let err = s.apply(P1, &Action::DefendWild { feature: f(0, 1), narrative: "  ".into() }).unwrap_err();
    assert_eq!(err.code(), "invalid-narrative");
    play(&mut s, P1, Action::DefendWild { feature: f(0, 1), narrative: "We audit every model.".into() });
    let Phase::AwaitingVote { vote } = s.phase() else { panic!("expected a vote") };
    assert_eq!(vote.voters.len(), 4);
    assert!(!vote.voters.contains(&P1));
    assert_eq!(s.apply(P1, &Action::CastVote { approve: true }).unwrap_err().code(), "not-your-turn");
    for (voter, approve) in [(PlayerId(0), true), (PlayerId(2), true), (PlayerId(3), false)] {
        play(&mut s, voter, Action::CastVote { approve });
        assert!(matches!(s.phase(), Phase::AwaitingVote { .. }));
    }
    assert_eq!(s.apply(P0, &Action::CastVote { approve: true }).unwrap_err().code(), "illegal-action");
    let events = play(&mut s, PlayerId(4), Action::CastVote { approve: false });
    assert!(events.iter().any(|e| matches!(
        e,
        Event::VoteClosed { approvals: 2, rejections: 2, approved: false, .. }
    )));
    let z = s.zones();
    assert!(z.business_discard.contains(&b(12)));
    // The rejected wild is spent and replaced.
    assert_eq!(z.player(P1).feature_hand, BTreeSet::from([f(5, 1)]));
    assert_eq!(z.feature_deck.back(), Some(&f(0, 1)));
}

#[test]
fn approved_wild_defense_defeats_the_challenge() {
    let mut s = wild_defense_state(3);
    play(&mut s, P1, Action::DefendWild { feature: f(0, 1), narrative: "We audit every model.".into() });
    play(&mut s, P0, Action::CastVote { approve: true });
    play(&mut s, P2, Action::CastVote { approve: true });
    let z = s.zones();
    assert_eq!(z.player(P1).in_play, vec![b(12), b(3)]);
    assert!(z.business_discard.is_empty());
    assert!(s.events().iter().any(|e| matches!(e, Event::ChallengeDefeated { .. })));
}

#[test]
fn rejected_wild_harm_is_spent() {
    let mut s = arranged(
        vec![
            seat(&[], &[h(0, 1)], &[], &[1]),
            seat(&[], &[], &[f(2, 1)], &[12]),
            seat(&[], &[], &[], &[3]),
        ],
        &[h(4, 1)],
        &[],
        turn_of(P0),
    );
    let legal = s.legal_actions(P0);
    assert!(legal.contains(&Action::PlayWildHarm { harm: h(0, 1), defender: P1, target: b(12), narrative: String::new() }));
    let long = "x".repeat(NARRATIVE_MAX + 1);
    let err = s.apply(P0, &Action::PlayWildHarm { harm: h(0, 1), defender: P1, target: b(12), narrative: long }).unwrap_err();
    assert_eq!(err.code(), "invalid-narrative");
    let narrative = "Face filters can push narrow beauty ideals.".to_string();
    play(&mut s, P0, Action::PlayWildHarm { harm: h(0, 1), defender: P1, target: b(12), narrative });
    play(&mut s, P1, Action::CastVote { approve: true });
    play(&mut s, P2, Action::CastVote { approve: false });
    let z = s.zones();
    assert_eq!(z.player(P0).harm_hand, BTreeSet::from([h(4, 1)]));
    assert_eq!(z.harm_deck.back(), Some(&h(0, 1)));
    assert_eq!(z.player(P1).in_play, vec![b(12)]);
    assert_eq!(s.phase(), &turn_of(P1));
}

#[test]
fn approved_wild_harm_admits_narrated_defense() {
    let mut s = arranged(
        vec![
            seat(&[], &[h(0, 1)], &[], &[1]),
            seat(&[], &[], &[f(2, 1)], &[12, 14]),
            seat(&[], &[], &[], &[3]),
        ],
        &[h(4, 1)],
        &[],
        turn_of(P0),
    );
    let narrative = "It harms privacy.".to_string();
    play(&mut s, P0, Action::PlayWildHarm { harm: h(0, 1), defender: P1, target: b(12), narrative });
    play(&mut s, P1, Action::CastVote { approve: true });
    play(&mut s, P2, Action::CastVote { approve: true });
    assert!(matches!(s.phase(), Phase::AwaitingDefense { .. }));
    let legal = s.legal_actions(P1);
    assert!(legal.iter().any(|a| matches!(a, Action::DefendWithNarrative { feature, .. } if *feature == f(2, 1))));
    assert!(!legal.iter().any(|a| matches!(a, Action::Defend { .. })));
    play(&mut s, P1, Action::DefendWithNarrative { feature: f(2, 1), narrative: "Encryption fixes it.".into() });
    play(&mut s, P0, Action::CastVote { approve: false });
    play(&mut s, P2, Action::CastVote { approve: false });
    let z = s.zones();
    // A rejected narrated feature goes back to its owner.
    assert_eq!(z.player(P1).feature_hand, BTreeSet::from([f(2, 1)]));
    assert_eq!(z.player(P1).in_play, vec![b(14)]);
    assert!(z.business_discard.contains(&b(12)));
    assert_eq!(s.phase(), &turn_of(P1));
}

#[test]
fn errors_by_kind() {
    let s = arranged(
        vec![seat(&[], &[h(5, 1)], &[], &[1]), seat(&[], &[h(6, 1)], &[f(2, 1)], &[3])],
        &[],
        &[],
        turn_of(P0),
    );
    assert_eq!(s.apply(P1, &Action::Pass).unwrap_err().code(), "not-your-turn");
    assert_eq!(s.apply(P0, &Action::Decline).unwrap_err().code(), "wrong-phase");
    assert_eq!(s.apply(P0, &Action::CastVote { approve: true }).unwrap_err().code(), "wrong-phase");
    assert_eq!(s.apply(PlayerId(9), &Action::Pass).unwrap_err().code(), "unknown-player");
    assert_eq!(
        s.apply(P0, &Action::PlayHarm { harm: h(6, 1), defender: P1, target: b(3) }).unwrap_err().code(),
        "illegal-action"
    );
    assert_eq!(s.apply(P0, &Action::Pass).unwrap_err().code(), "illegal-action");
    // Failed applies leave the state untouched.
    let before = s.digest();
    let _ = s.apply(P0, &Action::EndTurn);
    assert_eq!(s.digest(), before);
}

#[test]
fn turn_cap_ends_in_a_ranked_stalemate() {
    let mut config = GameConfig::with_players(3);
    config.turn_cap = 2;
    let mut s = arranged_with(
        config,
        vec![
            seat(&[2], &[h(9, 1)], &[], &[1]),
            seat(&[], &[h(9, 2)], &[], &[3, 4]),
            seat(&[5], &[h(9, 3)], &[], &[6]),
        ],
        &[],
        &[],
        turn_of(P0),
    );
    play(&mut s, P0, Action::ExchangeHarm { harm: h(9, 1) });
    play(&mut s, P1, Action::ExchangeHarm { harm: h(9, 2) });
    let outcome = s.is_terminal().unwrap();
    assert_eq!(outcome.kind, OutcomeKind::Stalemate);
    assert_eq!(outcome.winner, None);
    assert_eq!(outcome.ranking, vec![vec![P1], vec![P0, P2]]);
    assert_eq!(s.turn_counter(), 2);
}

#[test]
fn educator_sees_guide_excerpt() {
    let mut s = arranged(
        vec![seat(&[], &[h(8, 1)], &[], &[1]), seat(&[], &[], &[f(3, 1)], &[4])],
        &[],
        &[],
        turn_of(P0),
    );
    play(&mut s, P0, Action::PlayHarm { harm: h(8, 1), defender: P1, target: b(4) });
    let v = s.view_for(Viewer::Educator).unwrap();
    let note = v.guide_excerpt.unwrap();
    assert_eq!((note.business, note.harm), (4, 8));
    assert!(note.text.contains("Emily or Greg"));
    assert!(s.view_for(Viewer::Spectator).unwrap().guide_excerpt.is_none());
    assert!(s.view_for(Viewer::Player { id: P1 }).unwrap().guide_excerpt.is_none());
}

#[test]
fn views_hide_other_hands() {
    let s = GameState::new(GameConfig::default().with_seed(11), catalog()).unwrap();
    for viewer in s.players() {
        let json = serde_json::to_string(&s.view_for(Viewer::Player { id: viewer }).unwrap()).unwrap();
        for other in s.players().filter(|&p| p != viewer) {
            let z = s.zones().player(other);
            for card in z.business_hand.iter().chain(&z.harm_hand).chain(&z.feature_hand) {
                assert!(!json.contains(&format!("\"{card}\"")), "{card} leaked to {viewer}");
            }
        }
    }
    assert_eq!(s.view_for(Viewer::Player { id: PlayerId(4) }).unwrap_err().code(), "unknown-player");
    let spectator = s.view_for(Viewer::Spectator).unwrap();
    assert!(spectator.hand.is_none());
    assert!(spectator.legal_actions.is_empty());
    assert_eq!(spectator.harm_deck_size, 32);
    assert_eq!(spectator.feature_deck_size, 4);
}

fn random_game(seed: u64) -> GameState {
    use rand::{Rng, SeedableRng};
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = GameState::new(GameConfig::default().with_seed(seed), catalog()).unwrap();
    let cards = s.zones().all_cards();
    while s.is_terminal().is_none() {
        let p = s.phase().awaiting()[0];
        let legal = s.legal_actions(p);
        let action = legal[rng.gen_range(0..legal.len())].clone();
        let action = if action.needs_narrative() { action.with_narrative("because") } else { action };
        s.apply_mut(p, &action).unwrap();
        s.check_invariants(&cards).unwrap();
    }
    s
}

#[test]
fn replay_reproduces_digest() {
    let s = random_game(5);
    let record = GameRecord::from_state(&s);
    let text = record.to_toml().unwrap();
    let parsed = GameRecord::from_toml(&text).unwrap();
    assert_eq!(parsed, record);
    let again = verify_record(&parsed, catalog()).unwrap();
    assert_eq!(again.digest(), s.digest());
}

#[test]
fn empty_replay_equals_new_game() {
    let config = GameConfig::default().with_seed(77);
    let fresh = GameState::new(config.clone(), catalog()).unwrap();
    assert_eq!(replay(config, catalog(), &[]).unwrap().digest(), fresh.digest());
}

#[test]
fn altered_seed_diverges() {
    let s = random_game(6);
    let config = s.config().clone().with_seed(7);
    let err = replay(config, catalog(), s.action_log()).unwrap_err();
    assert!(matches!(err, ReplayError::Divergence { .. }), "{err}");
}

#[test]
fn tampered_digest_is_reported() {
    let s = random_game(8);
    let mut record = GameRecord::from_state(&s);
    record.digest = Some(format_digest(s.digest() ^ 1));
    assert!(matches!(verify_record(&record, catalog()), Err(ReplayError::DigestMismatch { .. })));
}

#[test]
fn apply_is_pure() {
    let s = GameState::new(GameConfig::default().with_seed(3), catalog()).unwrap();
    let action = s.legal_actions(P0)[0].clone();
    let before = s.digest();
    let (next, events) = s.apply(P0, &action).unwrap();
    assert_eq!(s.digest(), before);
    assert_ne!(next.digest(), before);
    assert!(!events.is_empty());
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn random_play_conserves_cards(seed in any::<u64>(), players in 2u8..=7) {
            use rand::{Rng, SeedableRng};
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut s = GameState::new(GameConfig::with_players(players).with_seed(seed), catalog()).unwrap();
            let cards = s.zones().all_cards();
            let mut eliminated = 0;
            for _ in 0..400 {
                if s.is_terminal().is_some() {
                    break;
                }
                let p = s.phase().awaiting()[0];
                let legal = s.legal_actions(p);
                prop_assert!(!legal.is_empty());
                let action = legal[rng.gen_range(0..legal.len())].clone();
                let action = if action.needs_narrative() { action.with_narrative("n") } else { action };
                s.apply_mut(p, &action).unwrap();
                prop_assert_eq!(s.check_invariants(&cards), Ok(()));
                prop_assert!(s.eliminated().len() >= eliminated);
                eliminated = s.eliminated().len();
            }
        }

        #[test]
        fn apply_accepts_exactly_the_legal_set(seed in any::<u64>(), steps in 0usize..60, probe in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut s = GameState::new(GameConfig::with_players(3).with_seed(seed), catalog()).unwrap();
            for _ in 0..steps {
                if s.is_terminal().is_some() {
                    break;
                }
                let p = s.phase().awaiting()[0];
                let legal = s.legal_actions(p);
                let action = legal[rng.gen_range(0..legal.len())].clone();
                let action = if action.needs_narrative() { action.with_narrative("n") } else { action };
                s.apply_mut(p, &action).unwrap();
            }
            // Probe every seat with a spread of candidate moves.
            let mut probe_rng = ChaCha8Rng::seed_from_u64(probe);
            let all = s.zones().all_cards();
            for p in s.players() {
                let legal = s.legal_actions(p);
                let mut candidates = vec![Action::EndTurn, Action::Pass, Action::Decline, Action::CastVote { approve: true }];
                for _ in 0..20 {
                    let card = all[probe_rng.gen_range(0..all.len())];
                    let other = all[probe_rng.gen_range(0..all.len())];
                    let defender = PlayerId(probe_rng.gen_range(0..3));
                    candidates.push(match card.family {
                        Family::Business => Action::SetupBusiness { business: card },
                        Family::Harm => Action::PlayHarm { harm: card, defender, target: other },
                        Family::Feature => Action::Defend { feature: card },
                    });
                    if card.family == Family::Harm {
                        candidates.push(Action::ExchangeHarm { harm: card });
                    }
                }
                candidates.extend(legal.iter().cloned());
                for c in candidates {
                    let c = if c.needs_narrative() { c.with_narrative("n") } else { c };
                    let accepted = s.apply(p, &c).is_ok();
                    prop_assert_eq!(accepted, legal.iter().any(|l| l.same_move(&c)), "{:?} by {}", c, p);
                }
            }
        }
    }
}
