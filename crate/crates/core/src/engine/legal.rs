use super::cards::PlayerId;
use super::types::{Action, Phase};
use super::GameState;

/// Every move `player` may make now, in a stable order. Narrative-bearing
/// moves are listed with an empty narrative; the caller supplies the text.
pub fn legal_actions(state: &GameState, player: PlayerId) -> Vec<Action> {
    if player.index() >= state.zones().players.len() || state.is_eliminated(player) {
        return Vec::new();
    }
    match state.phase() {
        Phase::Setup { player: p } if *p == player => state
            .zones()
            .player(player)
            .business_hand
            .iter()
            .map(|&business| Action::SetupBusiness { business })
            .collect(),
        Phase::AwaitingTurnAction { player: p, setups_done } if *p == player => turn_actions(state, player, *setups_done),
        Phase::AwaitingDefense { challenge } if challenge.defender == player => defense_actions(state, player),
        Phase::AwaitingVote { vote } if vote.voters.contains(&player) && !vote.ballots.contains_key(&player) => {
            vec![Action::CastVote { approve: true }, Action::CastVote { approve: false }]
        }
        _ => Vec::new(),
    }
}

fn turn_actions(state: &GameState, player: PlayerId, setups_done: u32) -> Vec<Action> {
    let config = state.config();
    let catalog = state.catalog();
    let own = state.zones().player(player);
    let mut out = Vec::new();

    if setups_done < config.max_setups_per_turn {
        out.extend(own.business_hand.iter().map(|&business| Action::SetupBusiness { business }));
    }
    if setups_done >= 1 {
        out.push(Action::EndTurn);
        return out;
    }
    if own.in_play.is_empty() && !own.business_hand.is_empty() {
        return out;
    }

    let mut harm_plays = 0;
    for &harm in own.harm_hand.iter().filter(|h| !h.is_wild()) {
        for opponent in state.live_players().filter(|&o| o != player) {
            for &target in &state.zones().player(opponent).in_play {
                let vulnerable = catalog.legal_harms(target.kind).map(|s| s.contains(&harm.kind)).unwrap_or(false);
                if vulnerable {
                    out.push(Action::PlayHarm { harm, defender: opponent, target });
                    harm_plays += 1;
                }
            }
        }
    }
    for &harm in own.harm_hand.iter().filter(|h| h.is_wild()) {
        for opponent in state.live_players().filter(|&o| o != player) {
            for &target in &state.zones().player(opponent).in_play {
                out.push(Action::PlayWildHarm { harm, defender: opponent, target, narrative: String::new() });
            }
        }
    }
    if config.harm_exchange_enabled && harm_plays == 0 {
        out.extend(own.harm_hand.iter().map(|&harm| Action::ExchangeHarm { harm }));
    }
    if out.is_empty() {
        out.push(Action::Pass);
    }
    out
}

fn defense_actions(state: &GameState, player: PlayerId) -> Vec<Action> {
    let Some(challenge) = state.phase().challenge() else { return Vec::new() };
    let catalog = state.catalog();
    let own = state.zones().player(player);
    let mut out = Vec::new();

    for &feature in own.feature_hand.iter().filter(|f| !f.is_wild()) {
        if challenge.harm.is_wild() {
            out.push(Action::DefendWithNarrative { feature, narrative: String::new() });
        } else if catalog.can_counter(feature.kind, challenge.harm.kind).unwrap_or(false) {
            out.push(Action::Defend { feature });
        }
    }
    for &feature in own.feature_hand.iter().filter(|f| f.is_wild()) {
        out.push(Action::DefendWild { feature, narrative: String::new() });
    }
    if state.config().decline_defense_allowed || out.is_empty() {
        out.push(Action::Decline);
    }
    out
}
