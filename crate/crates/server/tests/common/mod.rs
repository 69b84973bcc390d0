#![allow(dead_code)]

use std::time::Duration;

use aiaudit_client::{GameClient, Received};
use aiaudit_protocol::{LobbyInfo, ServerMessage};
use aiaudit_server::{spawn, RunningServer, ServerOptions};

pub fn options() -> ServerOptions {
    ServerOptions { honor_client_seeds: true, ..ServerOptions::default() }
}

pub async fn server(options: ServerOptions) -> RunningServer {
    spawn("127.0.0.1:0", options).await.expect("bind")
}

pub async fn player(server: &RunningServer, name: &str) -> (GameClient, String) {
    let mut c = GameClient::connect(&server.ws_url()).await.expect("connect");
    c.set_timeout(Duration::from_secs(20));
    let token = c.hello(name).await.expect("hello");
    (c, token)
}

pub async fn next_lobby(c: &mut GameClient) -> LobbyInfo {
    let r = c.recv_matching(|r| matches!(r.message, ServerMessage::Lobby(_))).await.expect("lobby");
    match r.message {
        ServerMessage::Lobby(l) => l,
        _ => unreachable!(),
    }
}

pub async fn next_view(c: &mut GameClient) -> Received {
    c.recv_matching(|r| matches!(r.message, ServerMessage::View { .. })).await.expect("view")
}

pub async fn next_game_over(c: &mut GameClient) -> Received {
    c.recv_matching(|r| matches!(r.message, ServerMessage::GameOver { .. })).await.expect("game over")
}
