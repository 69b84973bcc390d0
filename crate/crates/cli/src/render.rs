//! Plain-text rendering for terminal play. Cards always show their id next
//! to the title so nothing depends on color.

use aiaudit_core::catalog::Family;
use aiaudit_core::engine::{Event, OutcomeKind, PhaseView, PlayerId, RedactedView, VoteSubject};
use aiaudit_core::{Action, CardUid, Catalog};
use aiaudit_protocol::Annotation;

pub fn card(catalog: &Catalog, uid: &CardUid) -> String {
    let title = match uid.family {
        _ if uid.is_wild() => None,
        Family::Business => catalog.business(uid.kind).ok().map(|k| k.title.as_str()),
        Family::Harm => catalog.harm(uid.kind).ok().map(|k| k.title.as_str()),
        Family::Feature => catalog.feature(uid.kind).ok().map(|k| k.title.as_str()),
    };
    match (uid.family, title) {
        (Family::Harm, None) => format!("{} wild harm", uid.face()),
        (Family::Feature, None) => format!("{} wild feature", uid.face()),
        (_, Some(t)) => format!("{} {t}", uid.face()),
        (_, None) => uid.face().to_string(),
    }
}

fn seat(p: PlayerId, me: Option<PlayerId>) -> String {
    if me == Some(p) {
        format!("{p} (you)")
    } else {
        p.to_string()
    }
}

fn subject(s: VoteSubject) -> &'static str {
    match s {
        VoteSubject::WildHarmValidity => "is the wild harm valid",
        VoteSubject::WildFeatureAdequacy => "does the wild feature defend",
        VoteSubject::NarratedFeatureVsWildHarm => "does the feature answer the wild harm",
    }
}

pub fn action(catalog: &Catalog, a: &Action, me: Option<PlayerId>) -> String {
    let c = |u: &CardUid| card(catalog, u);
    match a {
        Action::SetupBusiness { business } => format!("Set up {}", c(business)),
        Action::EndTurn => "End your turn".into(),
        Action::PlayHarm { harm, defender, target } => {
            format!("Play {} on {}'s {}", c(harm), seat(*defender, me), c(target))
        }
        Action::PlayWildHarm { harm, defender, target, .. } => {
            format!("Play {} on {}'s {} (needs a narrative and a vote)", c(harm), seat(*defender, me), c(target))
        }
        Action::Defend { feature } => format!("Defend with {}", c(feature)),
        Action::DefendWithNarrative { feature, .. } => format!("Defend with {} and a narrative (vote)", c(feature)),
        Action::DefendWild { feature, .. } => format!("Defend with {} and a narrative (vote)", c(feature)),
        Action::Decline => "Decline and lose the business".into(),
        Action::CastVote { approve: true } => "Approve".into(),
        Action::CastVote { approve: false } => "Reject".into(),
        Action::ExchangeHarm { harm } => format!("Exchange {} for the top of the harm deck", c(harm)),
        Action::Pass => "Pass".into(),
    }
}

pub fn event(catalog: &Catalog, e: &Event, annotation: Option<&Annotation>, me: Option<PlayerId>) -> Option<String> {
    let c = |u: &CardUid| card(catalog, u);
    let s = |p: &PlayerId| seat(*p, me);
    let line = match e {
        Event::GameStarted { players, .. } => format!("Game started with {players} players."),
        Event::Drew { player, card: Some(uid), .. } if me == Some(*player) => format!("You drew {}.", c(uid)),
        Event::Drew { .. } => return None,
        Event::SetupCommitted { player, .. } => format!("{} placed a business face down.", s(player)),
        Event::BusinessesRevealed { placements } => {
            let shown: Vec<String> = placements.iter().map(|p| format!("{} {}", s(&p.player), c(&p.business))).collect();
            format!("Businesses revealed: {}.", shown.join(", "))
        }
        Event::BusinessSetUp { player, business } => format!("{} set up {}.", s(player), c(business)),
        Event::TurnEnded { .. } => return None,
        Event::Passed { player } => format!("{} passed.", s(player)),
        Event::HarmExchanged { player, .. } => format!("{} exchanged a harm.", s(player)),
        Event::HarmPlayed { challenger, defender, target, harm } => {
            format!("{} challenges {}'s {} with {}.", s(challenger), s(defender), c(target), c(harm))
        }
        Event::WildHarmPlayed { challenger, defender, target, narrative, .. } => {
            format!("{} plays a wild harm on {}'s {}: \"{narrative}\"", s(challenger), s(defender), c(target))
        }
        Event::VoteOpened { subject: sub, proposer, .. } => format!("Vote opened by {}: {}?", s(proposer), subject(*sub)),
        Event::VoteCast { .. } => return None,
        Event::VoteClosed { approvals, rejections, approved, .. } => format!(
            "Vote closed, {} ({approvals} for, {rejections} against).",
            if *approved { "approved" } else { "rejected" }
        ),
        Event::Defended { defender, feature } => format!("{} defends with {}.", s(defender), c(feature)),
        Event::NarratedDefense { defender, feature, narrative } | Event::WildDefense { defender, feature, narrative } => {
            format!("{} defends with {}: \"{narrative}\"", s(defender), c(feature))
        }
        Event::Declined { defender } => format!("{} declines to defend.", s(defender)),
        Event::WildHarmRejected { challenger, .. } => format!("{}'s wild harm was rejected.", s(challenger)),
        Event::ChallengeDefeated { defender, target, .. } => format!("{} keeps {}.", s(defender), c(target)),
        Event::BusinessLost { player, business, .. } => format!("{} loses {}.", s(player), c(business)),
        Event::PlayerEliminated { player } => format!("{} is out of the game.", s(player)),
        Event::TurnStarted { player, turn } => format!("-- turn {turn}: {} --", s(player)),
        Event::GameOver { .. } => return None,
    };
    match annotation.and_then(|a| a.guide_excerpt.as_deref()) {
        Some(excerpt) => Some(format!("{line}\n   Guide: {excerpt}")),
        None => Some(line),
    }
}

pub fn outcome(o: &aiaudit_core::engine::Outcome, me: Option<PlayerId>) -> String {
    let ranking: Vec<String> = o
        .ranking
        .iter()
        .map(|group| group.iter().map(|p| seat(*p, me)).collect::<Vec<_>>().join(" = "))
        .collect();
    match (o.kind, o.winner) {
        (OutcomeKind::Win, Some(w)) => format!("{} wins. Ranking: {}", seat(w, me), ranking.join(", ")),
        _ => format!("Stalemate. Ranking: {}", ranking.join(", ")),
    }
}

/// The table as the viewer sees it.
pub fn table(catalog: &Catalog, view: &RedactedView) -> String {
    let me = view.me();
    let mut out = String::new();
    for p in &view.players {
        let status = if p.eliminated { " (out)" } else { "" };
        let shown: Vec<String> = p.in_play.iter().map(|b| card(catalog, b)).collect();
        let down = if p.face_down > 0 { format!(" +{} face down", p.face_down) } else { String::new() };
        out.push_str(&format!(
            "  {}{status}: [{}]{down}; hand {}B {}H {}F\n",
            seat(p.id, me),
            shown.join(", "),
            p.business_hand,
            p.harm_hand,
            p.feature_hand
        ));
    }
    out.push_str(&format!(
        "  decks: {} harms, {} features; turn {}/{}\n",
        view.harm_deck_size, view.feature_deck_size, view.turn_counter, view.turn_cap
    ));
    if let Some(hand) = &view.hand {
        let list = |cards: &[CardUid]| cards.iter().map(|u| card(catalog, u)).collect::<Vec<_>>().join(", ");
        out.push_str(&format!("  your businesses: {}\n", list(&hand.businesses)));
        out.push_str(&format!("  your harms: {}\n", list(&hand.harms)));
        out.push_str(&format!("  your features: {}\n", list(&hand.features)));
    }
    match &view.phase {
        PhaseView::AwaitingDefense { challenge } => {
            out.push_str(&format!("  challenge: {} on {}", card(catalog, &challenge.harm), card(catalog, &challenge.target)));
            if let Some(n) = &challenge.narrative {
                out.push_str(&format!(": \"{n}\""));
            }
            out.push('\n');
        }
        PhaseView::AwaitingVote { vote } => {
            out.push_str(&format!("  vote: {}?\n", subject(vote.subject)));
            if let Some(n) = &vote.challenge.narrative {
                out.push_str(&format!("  harm narrative: \"{n}\"\n"));
            }
            if let Some(d) = &vote.defense {
                out.push_str(&format!("  defense: {}: \"{}\"\n", card(catalog, &d.feature), d.narrative));
            }
        }
        _ => {}
    }
    if let Some(note) = &view.guide_excerpt {
        out.push_str(&format!("  guide: {}\n", note.text));
    }
    out
}
