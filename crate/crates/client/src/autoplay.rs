//! A fixed scripted policy for driving seats over the wire, used for demos
//! and smoke tests. It plays greedily and approves every vote.

use aiaudit_core::engine::RedactedView;
use aiaudit_core::Action;
use aiaudit_protocol::ServerMessage;

use crate::{ClientError, GameClient, Received};

pub const SCRIPTED_NARRATIVE: &str = "Our audit process already covers this case.";

/// The scripted reply to `view`, if the viewer is being asked to act.
///
/// Defense: a wild feature when held, otherwise decline. Turn: attack, set
/// up, end the turn, exchange, play a wild harm, pass; in that order.
pub fn scripted_choice(view: &RedactedView) -> Option<Action> {
    if !view.is_awaiting_me() {
        return None;
    }
    let legal = &view.legal_actions;
    let find = |pred: fn(&Action) -> bool| legal.iter().find(|a| pred(a)).cloned();
    find(|a| matches!(a, Action::CastVote { approve: true }))
        .or_else(|| find(|a| matches!(a, Action::DefendWild { .. })))
        .or_else(|| find(|a| matches!(a, Action::Decline)))
        .or_else(|| find(|a| matches!(a, Action::PlayHarm { .. })))
        .or_else(|| find(|a| matches!(a, Action::SetupBusiness { .. })))
        .or_else(|| find(|a| matches!(a, Action::EndTurn)))
        .or_else(|| find(|a| matches!(a, Action::ExchangeHarm { .. })))
        .or_else(|| find(|a| matches!(a, Action::PlayWildHarm { .. })))
        .or_else(|| legal.first().cloned())
        .map(|a| if a.needs_narrative() { a.with_narrative(SCRIPTED_NARRATIVE) } else { a })
}

/// Everything one seat saw while playing a game to the end.
#[derive(Debug, Default)]
pub struct Transcript {
    pub messages: Vec<Received>,
    pub actions: Vec<Action>,
    /// Refusals of scripted actions, as (code, text).
    pub refusals: Vec<(String, String)>,
}

impl Transcript {
    pub fn game_over(&self) -> Option<&ServerMessage> {
        self.messages.iter().map(|r| &r.message).find(|m| matches!(m, ServerMessage::GameOver { .. }))
    }
}

/// Plays the scripted policy for `game_id` until the game-over broadcast.
/// Each view is answered at most once, keyed by its position in the log.
pub async fn play_scripted(client: &mut GameClient, game_id: &str) -> Result<Transcript, ClientError> {
    let mut transcript = Transcript::default();
    let mut answered: Option<usize> = None;
    loop {
        let r = client.recv().await?;
        let over = matches!(r.message, ServerMessage::GameOver { .. });
        match &r.message {
            ServerMessage::View { view, .. } if r.game_id.as_deref() == Some(game_id) => {
                let key = view.event_offset + view.events.len();
                if answered != Some(key) {
                    if let Some(action) = scripted_choice(view) {
                        answered = Some(key);
                        client.send(aiaudit_protocol::ClientMessage::Action { action: action.clone() }, Some(game_id)).await?;
                        transcript.actions.push(action);
                    }
                }
            }
            ServerMessage::Error { code, text, .. } => transcript.refusals.push((code.clone(), text.clone())),
            _ => {}
        }
        transcript.messages.push(r);
        if over {
            return Ok(transcript);
        }
    }
}

/// Opens a lobby on `ws_url` with `humans` scripted seats followed by
/// `bots`, starts it and plays it out. Transcripts are in seat order.
pub async fn scripted_table(
    ws_url: &str,
    config: aiaudit_core::GameConfig,
    humans: usize,
    bots: &[aiaudit_core::bots::Strategy],
) -> Result<(String, Vec<Transcript>), ClientError> {
    let mut clients = Vec::with_capacity(humans);
    for i in 0..humans {
        let mut c = GameClient::connect(ws_url).await?;
        c.hello(&format!("script-{}", i + 1)).await?;
        clients.push(c);
    }
    let game_id = clients[0].create(config, "default", true).await?;
    for c in clients.iter_mut().skip(1) {
        c.join(&game_id, aiaudit_protocol::JoinRole::Player).await?;
    }
    for strategy in bots {
        clients[0].add_bot(&game_id, strategy.clone()).await?;
    }
    clients[0].start(&game_id).await?;
    let games = clients.iter_mut().map(|c| play_scripted(c, &game_id));
    let transcripts = futures_util::future::try_join_all(games).await?;
    Ok((game_id, transcripts))
}
