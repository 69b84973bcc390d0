use std::sync::Arc;

use aiaudit_protocol::{codes, ClientMessage, Envelope, ServerMessage};
use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::Response;
use futures_util::{SinkExt, StreamExt};
use tokio::sync::mpsc;

use crate::hub::{Connection, Hub, Outbound};
use crate::session::{Command, SessionMsg};

pub(crate) async fn upgrade(ws: WebSocketUpgrade, State(hub): State<Arc<Hub>>) -> Response {
    ws.on_upgrade(move |socket| connection(socket, hub))
}

struct ConnState {
    conn: Connection,
    token: Option<String>,
    last_msg_id: Option<u64>,
}

impl ConnState {
    fn reply(&self, game_id: Option<&str>, message: ServerMessage) {
        let _ = self.conn.tx.send(Outbound { game_id: game_id.map(str::to_string), message });
    }
}

async fn connection(socket: WebSocket, hub: Arc<Hub>) {
    let (mut sink, mut stream) = socket.split();
    let (tx, mut rx) = mpsc::unbounded_channel::<Outbound>();
    let writer = tokio::spawn(async move {
        let mut msg_id = 0u64;
        while let Some(out) = rx.recv().await {
            msg_id += 1;
            let text = out.message.into_envelope(msg_id, out.game_id).to_text();
            if sink.send(Message::Text(text.into())).await.is_err() {
                break;
            }
        }
        let _ = sink.close().await;
    });

    let mut state = ConnState { conn: Connection { id: hub.next_connection_id(), tx }, token: None, last_msg_id: None };
    while let Some(Ok(frame)) = stream.next().await {
        match frame {
            Message::Text(text) => handle_text(&hub, &mut state, text.as_str()),
            Message::Close(_) => break,
            _ => {}
        }
    }

    if let Some(token) = &state.token {
        for game_id in hub.disconnect(token, state.conn.id) {
            let _ = hub.route(&game_id, SessionMsg::Disconnected { token: token.clone() });
        }
    }
    drop(state);
    let _ = writer.await;
}

fn handle_text(hub: &Arc<Hub>, state: &mut ConnState, text: &str) {
    let envelope = match Envelope::from_text(text) {
        Ok(e) => e,
        Err(e) => return state.reply(None, ServerMessage::error(e.code(), e.to_string(), None)),
    };
    let msg_id = envelope.msg_id;
    let game_id = envelope.game_id.clone();
    if state.last_msg_id.is_some_and(|last| msg_id <= last) {
        return state.reply(game_id.as_deref(), ServerMessage::Ack { reply_to: msg_id, duplicate: true });
    }
    state.last_msg_id = Some(msg_id);

    let message = match ClientMessage::from_envelope(&envelope) {
        Ok(m) => m,
        Err(e) => return state.reply(game_id.as_deref(), ServerMessage::error(e.code(), e.to_string(), Some(msg_id))),
    };

    let token = match message {
        ClientMessage::Hello { name } => {
            let token = hub.register(name.clone(), state.conn.clone());
            state.token = Some(token.clone());
            return state.reply(None, ServerMessage::Welcome { resume_token: token, name });
        }
        ClientMessage::Resume { resume_token } => {
            match hub.resume(&resume_token, state.conn.clone()) {
                Ok((name, games)) => {
                    state.token = Some(resume_token.clone());
                    state.reply(None, ServerMessage::Welcome { resume_token: resume_token.clone(), name });
                    for game in games {
                        let _ = hub.route(&game, SessionMsg::Reconnected { token: resume_token.clone() });
                    }
                }
                Err(code) => state.reply(None, ServerMessage::error(code, "cannot resume with that token", Some(msg_id))),
            }
            return;
        }
        _ => match &state.token {
            Some(t) => t.clone(),
            None => {
                return state.reply(
                    game_id.as_deref(),
                    ServerMessage::error(codes::NO_IDENTITY, "send hello or resume first", Some(msg_id)),
                )
            }
        },
    };

    let command = match message {
        ClientMessage::Create { config, catalog, seat } => {
            if let Err(err) = hub.create(&token, msg_id, config, catalog, seat) {
                state.reply(None, err);
            }
            return;
        }
        ClientMessage::Join { role } => Command::Join { role },
        ClientMessage::AddBot { strategy } => Command::AddBot { strategy },
        ClientMessage::Start {} => Command::Start,
        ClientMessage::Action { action } => Command::Act { action },
        ClientMessage::Vote { approve } => Command::Act { action: aiaudit_core::Action::CastVote { approve } },
        ClientMessage::Hello { .. } | ClientMessage::Resume { .. } => unreachable!("handled above"),
    };
    let Some(game_id) = game_id else {
        return state.reply(None, ServerMessage::error(codes::MISSING_GAME_ID, "this message needs a game_id", Some(msg_id)));
    };
    if let Err(e) = hub.route(&game_id, SessionMsg::Command { token, msg_id, command }) {
        state.reply(Some(&game_id), e.to_message(&game_id, msg_id));
    }
}
