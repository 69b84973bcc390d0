mod common;

use aiaudit_core::bots::{Strategy, StrategyName};
use aiaudit_core::GameConfig;
use aiaudit_protocol::{codes, ClientMessage, JoinRole, Occupant, Prompt, ServerMessage};

#[tokio::test]
async fn create_opens_a_lobby_with_the_creator_seated() {
    let server = common::server(common::options()).await;
    let (mut alice, _) = common::player(&server, "alice").await;
    let game_id = alice.create(GameConfig::with_players(4), "default", true).await.unwrap();
    let lobby = common::next_lobby(&mut alice).await;
    assert_eq!(lobby.seats.len(), 4);
    assert_eq!(lobby.open_seats(), 3);
    assert!(matches!(&lobby.seats[0].occupant, Occupant::Human { name, connected: true } if name == "alice"));
    assert_eq!(lobby.my_seat(), Some(aiaudit_core::PlayerId(0)));
    assert!(lobby.creator);
    assert!(!lobby.started);

    let other = alice.create(GameConfig::with_players(4), "default", true).await.unwrap();
    assert_ne!(game_id, other);
}

#[tokio::test]
async fn create_rejects_bad_configs_and_catalogs() {
    let server = common::server(common::options()).await;
    let (mut alice, _) = common::player(&server, "alice").await;
    let err = alice.create(GameConfig::with_players(9), "default", true).await.unwrap_err();
    assert_eq!(err.code(), Some(codes::INVALID_CONFIG));
    let err = alice.create(GameConfig::with_players(4), "nope", true).await.unwrap_err();
    assert_eq!(err.code(), Some(codes::UNKNOWN_CATALOG));
    assert_eq!(server.hub.session_count(), 0);
}

#[tokio::test]
async fn three_humans_and_a_bot_each_get_their_first_view() {
    let server = common::server(common::options()).await;
    let mut humans = Vec::new();
    for name in ["a", "b", "c"] {
        humans.push(common::player(&server, name).await.0);
    }
    let game_id = humans[0].create(GameConfig::with_players(4).with_seed(3), "default", true).await.unwrap();
    for h in humans.iter_mut().skip(1) {
        h.join(&game_id, JoinRole::Player).await.unwrap();
    }
    humans[0].add_bot(&game_id, Strategy::new(StrategyName::Random)).await.unwrap();
    humans[0].start(&game_id).await.unwrap();
    for (seat, h) in humans.iter_mut().enumerate() {
        let r = common::next_view(h).await;
        assert_eq!(r.game_id.as_deref(), Some(game_id.as_str()));
        let ServerMessage::View { seat: s, prompt, view } = r.message else { unreachable!() };
        assert_eq!(s, Some(aiaudit_core::PlayerId(seat as u8)));
        assert_eq!(view.hand.as_ref().map(|h| h.businesses.len()), Some(14 / 4));
        assert_eq!(prompt, (seat == 0).then_some(Prompt::Setup));
    }
}

#[tokio::test]
async fn lobby_preconditions_are_enforced() {
    let server = common::server(common::options()).await;
    let (mut alice, _) = common::player(&server, "alice").await;
    let (mut bob, _) = common::player(&server, "bob").await;
    let game_id = alice.create(GameConfig::with_players(2), "default", true).await.unwrap();

    let err = alice.start(&game_id).await.unwrap_err();
    assert_eq!(err.code(), Some(codes::FULL_LOBBY));
    let err = bob.add_bot(&game_id, Strategy::new(StrategyName::Random)).await.unwrap_err();
    assert_eq!(err.code(), Some(codes::NOT_CREATOR));

    bob.join(&game_id, JoinRole::Player).await.unwrap();
    let (mut carol, _) = common::player(&server, "carol").await;
    let err = carol.join(&game_id, JoinRole::Player).await.unwrap_err();
    assert_eq!(err.code(), Some(codes::FULL_LOBBY));
    let err = bob.start(&game_id).await.unwrap_err();
    assert_eq!(err.code(), Some(codes::NOT_CREATOR));

    alice.start(&game_id).await.unwrap();
    let err = carol.join(&game_id, JoinRole::Player).await.unwrap_err();
    assert_eq!(err.code(), Some(codes::GAME_STARTED));
    assert!(err.to_string().contains("spectator"));
    carol.join(&game_id, JoinRole::Spectator).await.unwrap();
    let ServerMessage::View { seat, view, .. } = common::next_view(&mut carol).await.message else { unreachable!() };
    assert_eq!(seat, None);
    assert!(view.hand.is_none());
}

#[tokio::test]
async fn unknown_games_and_missing_ids_are_reported() {
    let server = common::server(common::options()).await;
    let (mut alice, _) = common::player(&server, "alice").await;
    let err = alice.join("no-such-game", JoinRole::Player).await.unwrap_err();
    assert_eq!(err.code(), Some(codes::UNKNOWN_GAME));
    let err = alice.request(ClientMessage::Start {}, None).await.unwrap_err();
    assert_eq!(err.code(), Some(codes::MISSING_GAME_ID));
}

#[tokio::test]
async fn envelopes_are_checked_before_anything_else() {
    let server = common::server(common::options()).await;
    let mut c = aiaudit_client::GameClient::connect(&server.ws_url()).await.unwrap();

    let err = c.request(ClientMessage::Start {}, Some("g")).await.unwrap_err();
    assert_eq!(err.code(), Some(codes::NO_IDENTITY));

    c.send_raw(r#"{"type":"teleport","msg_id":5,"payload":{}}"#).await.unwrap();
    let err = c.answer_to(5).await.unwrap_err();
    assert_eq!(err.code(), Some(codes::UNKNOWN_TYPE));

    c.send_raw("not json").await.unwrap();
    let r = c.recv_matching(|r| matches!(r.message, ServerMessage::Error { .. })).await.unwrap();
    let ServerMessage::Error { code, reply_to, .. } = r.message else { unreachable!() };
    assert_eq!(code, codes::BAD_MESSAGE);
    assert_eq!(reply_to, None);

    c.send_raw(r#"{"type":"vote","msg_id":6,"payload":{"approve":"maybe"}}"#).await.unwrap();
    let err = c.answer_to(6).await.unwrap_err();
    assert_eq!(err.code(), Some(codes::BAD_MESSAGE));
}

#[tokio::test]
async fn sessions_are_isolated() {
    let server = common::server(common::options()).await;
    let (mut alice, _) = common::player(&server, "alice").await;
    let (mut watcher, _) = common::player(&server, "watcher").await;
    let a = alice.create(GameConfig::with_players(2).with_seed(1), "default", true).await.unwrap();
    alice.add_bot(&a, Strategy::new(StrategyName::Random)).await.unwrap();
    let b = watcher.create(GameConfig::with_players(2).with_seed(1), "default", false).await.unwrap();
    watcher.add_bot(&b, Strategy::new(StrategyName::Random)).await.unwrap();
    watcher.add_bot(&b, Strategy::new(StrategyName::Random)).await.unwrap();
    alice.start(&a).await.unwrap();
    let ServerMessage::View { view, .. } = common::next_view(&mut alice).await.message else { unreachable!() };
    alice.act(&a, view.legal_actions[0].clone()).await.unwrap();
    common::next_view(&mut alice).await;

    watcher.set_timeout(std::time::Duration::from_millis(300));
    loop {
        match watcher.recv().await {
            Ok(r) => assert_ne!(r.game_id.as_deref(), Some(a.as_str()), "{r:?}"),
            Err(aiaudit_client::ClientError::Timeout) => break,
            Err(e) => panic!("{e}"),
        }
    }
}
