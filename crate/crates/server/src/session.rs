use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use aiaudit_core::bots::{BotContext, Strategy, StrategyName};
use aiaudit_core::engine::{
    format_digest, Action, EngineError, Event, GameRecord, GameState, Phase, PlayerId, Viewer,
};
use aiaudit_core::sim::bot_seed;
use aiaudit_core::{Catalog, GameConfig};
use aiaudit_protocol::{codes, Annotation, JoinRole, LobbyInfo, Occupant, Prompt, SeatInfo, ServerMessage};
use tokio::sync::mpsc;
use tokio::time::{sleep_until, Instant};

use crate::hub::Hub;

#[derive(Debug)]
pub(crate) enum Command {
    Join { role: JoinRole },
    AddBot { strategy: Strategy },
    Start,
    Act { action: Action },
}

#[derive(Debug)]
pub(crate) enum SessionMsg {
    Command { token: String, msg_id: u64, command: Command },
    Reconnected { token: String },
    Disconnected { token: String },
    VoteTimeout { serial: usize },
    DisconnectTimeout { token: String, generation: u64 },
}

pub(crate) struct Setup {
    pub game_id: String,
    pub catalog_name: String,
    pub catalog: Arc<Catalog>,
    pub config: GameConfig,
    pub creator: String,
    pub creator_name: String,
    pub seat: bool,
}

enum Seat {
    Open,
    Human { token: String, name: String },
    Bot { strategy: Strategy },
}

struct Game {
    state: GameState,
    bots: BTreeMap<usize, (BotContext, usize)>,
    sent_events: usize,
    vote_timer_for: usize,
    game_over_sent: bool,
}

struct Session {
    hub: Arc<Hub>,
    id: String,
    catalog_name: String,
    catalog: Arc<Catalog>,
    config: GameConfig,
    creator: String,
    seats: Vec<Seat>,
    spectators: BTreeMap<String, JoinRole>,
    game: Option<Game>,
    inbox: mpsc::UnboundedSender<SessionMsg>,
    disconnects: HashMap<String, u64>,
}

pub(crate) fn spawn(
    hub: Arc<Hub>,
    setup: Setup,
    inbox: mpsc::UnboundedSender<SessionMsg>,
    mut rx: mpsc::UnboundedReceiver<SessionMsg>,
) {
    let mut seats: Vec<Seat> = (0..setup.config.player_count).map(|_| Seat::Open).collect();
    let mut spectators = BTreeMap::new();
    if setup.seat {
        seats[0] = Seat::Human { token: setup.creator.clone(), name: setup.creator_name };
    } else {
        spectators.insert(setup.creator.clone(), JoinRole::Spectator);
    }
    let mut session = Session {
        hub,
        id: setup.game_id,
        catalog_name: setup.catalog_name,
        catalog: setup.catalog,
        config: setup.config,
        creator: setup.creator,
        seats,
        spectators,
        game: None,
        inbox,
        disconnects: HashMap::new(),
    };
    tokio::spawn(async move {
        session.broadcast_lobby();
        let ttl = session.hub.options.session_ttl;
        let mut deadline = Instant::now() + ttl;
        loop {
            tokio::select! {
                msg = rx.recv() => {
                    let Some(msg) = msg else { break };
                    if matches!(msg, SessionMsg::Command { .. } | SessionMsg::Reconnected { .. }) {
                        deadline = Instant::now() + ttl;
                    }
                    session.handle(msg);
                }
                _ = sleep_until(deadline) => break,
            }
        }
        tracing::debug!(game = %session.id, "session closed");
        session.hub.expire(&session.id);
    });
}

fn prompt_for(phase: &Phase) -> Prompt {
    match phase {
        Phase::Setup { .. } => Prompt::Setup,
        Phase::AwaitingTurnAction { .. } => Prompt::Turn,
        Phase::AwaitingDefense { .. } => Prompt::Defense,
        Phase::AwaitingVote { .. } | Phase::Terminal { .. } => Prompt::Vote,
    }
}

fn engine_error(e: &EngineError, reply_to: u64) -> ServerMessage {
    let code = match e {
        EngineError::WrongPhase { .. } | EngineError::NotYourTurn { .. } => codes::NOT_YOUR_PHASE,
        other => other.code(),
    };
    ServerMessage::error(code, e.to_string(), Some(reply_to))
}

impl Session {
    fn send(&self, token: &str, message: ServerMessage) {
        self.hub.send(token, Some(&self.id), message);
    }

    fn seat_of(&self, token: &str) -> Option<PlayerId> {
        self.seats
            .iter()
            .position(|s| matches!(s, Seat::Human { token: t, .. } if t == token))
            .map(|i| PlayerId(i as u8))
    }

    fn humans(&self) -> impl Iterator<Item = (PlayerId, &str)> + '_ {
        self.seats.iter().enumerate().filter_map(|(i, s)| match s {
            Seat::Human { token, .. } => Some((PlayerId(i as u8), token.as_str())),
            _ => None,
        })
    }

    fn lobby_for(&self, token: &str) -> LobbyInfo {
        let seats = self
            .seats
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let (occupant, you) = match s {
                    Seat::Open => (Occupant::Open, false),
                    Seat::Human { token: t, name } => {
                        (Occupant::Human { name: name.clone(), connected: self.hub.is_connected(t) }, t == token)
                    }
                    Seat::Bot { strategy } => (Occupant::Bot { strategy: strategy.to_string() }, false),
                };
                SeatInfo { seat: PlayerId(i as u8), occupant, you }
            })
            .collect();
        LobbyInfo {
            catalog: self.catalog_name.clone(),
            config: self.config.clone(),
            seats,
            started: self.game.is_some(),
            creator: token == self.creator,
            spectators: self.spectators.len(),
        }
    }

    fn recipients(&self) -> Vec<String> {
        let mut out: Vec<String> = self.humans().map(|(_, t)| t.to_string()).collect();
        out.extend(self.spectators.keys().cloned());
        out
    }

    fn broadcast_lobby(&self) {
        for token in self.recipients() {
            self.send(&token, ServerMessage::Lobby(self.lobby_for(&token)));
        }
    }

    fn handle(&mut self, msg: SessionMsg) {
        match msg {
            SessionMsg::Command { token, msg_id, command } => self.command(&token, msg_id, command),
            SessionMsg::Reconnected { token } => {
                self.disconnects.entry(token.clone()).and_modify(|g| *g += 1);
                self.broadcast_lobby();
                self.send_full_state(&token);
            }
            SessionMsg::Disconnected { token } => {
                self.broadcast_lobby();
                let running = self.game.as_ref().is_some_and(|g| g.state.is_terminal().is_none());
                if running && self.seat_of(&token).is_some() {
                    let generation = self.disconnects.entry(token.clone()).or_insert(0);
                    *generation += 1;
                    let msg = SessionMsg::DisconnectTimeout { token, generation: *generation };
                    self.schedule(self.hub.options.disconnect_grace(), msg);
                }
            }
            SessionMsg::DisconnectTimeout { token, generation } => {
                if self.disconnects.get(&token) != Some(&generation) || self.hub.is_connected(&token) {
                    return;
                }
                let Some(seat) = self.seat_of(&token) else { return };
                let Some(game) = &mut self.game else { return };
                if game.state.is_terminal().is_some() {
                    return;
                }
                let strategy = Strategy::new(StrategyName::Random);
                let seed = bot_seed(game.state.config().seed, seat.index());
                let bot = BotContext::new(strategy.clone(), seed, self.catalog.clone());
                game.bots.insert(seat.index(), (bot, 0));
                self.seats[seat.index()] = Seat::Bot { strategy };
                tracing::info!(game = %self.id, %seat, "seat handed to a bot after disconnect");
                self.broadcast_lobby();
                self.advance();
            }
            SessionMsg::VoteTimeout { serial } => self.expire_ballots(serial),
        }
    }

    fn schedule(&self, after: std::time::Duration, msg: SessionMsg) {
        let inbox = self.inbox.clone();
        tokio::spawn(async move {
            tokio::time::sleep(after).await;
            let _ = inbox.send(msg);
        });
    }

    fn command(&mut self, token: &str, msg_id: u64, command: Command) {
        let result = match command {
            Command::Join { role } => self.join(token, role),
            Command::AddBot { strategy } => self.add_bot(token, strategy),
            Command::Start => self.start(token),
            Command::Act { action } => self.act(token, action),
        };
        match result {
            Ok(after) => {
                self.send(token, ServerMessage::Ack { reply_to: msg_id, duplicate: false });
                match after {
                    After::Lobby => self.broadcast_lobby(),
                    After::Spectate => {
                        self.broadcast_lobby();
                        self.send_full_state(token);
                    }
                    After::Started => {
                        self.broadcast_lobby();
                        self.advance();
                    }
                    After::Applied => self.advance(),
                }
            }
            Err(Reject::Refused(code, text)) => self.send(token, ServerMessage::error(code, text, Some(msg_id))),
            Err(Reject::Engine(e)) => self.send(token, engine_error(&e, msg_id)),
        }
    }

    fn join(&mut self, token: &str, role: JoinRole) -> Result<After, Reject> {
        self.hub.attach_game(token, &self.id);
        if role != JoinRole::Player {
            self.spectators.insert(token.to_string(), role);
            return Ok(After::Spectate);
        }
        if self.seat_of(token).is_some() {
            return Ok(After::Lobby);
        }
        if self.game.is_some() {
            return Err(refuse(codes::GAME_STARTED, "the game has already started; join as a spectator instead".into()));
        }
        let Some(open) = self.seats.iter().position(|s| matches!(s, Seat::Open)) else {
            return Err(refuse(codes::FULL_LOBBY, "every seat is taken".into()));
        };
        let name = self.hub.name_of(token).unwrap_or_default();
        self.spectators.remove(token);
        self.seats[open] = Seat::Human { token: token.to_string(), name };
        Ok(After::Lobby)
    }

    fn add_bot(&mut self, token: &str, strategy: Strategy) -> Result<After, Reject> {
        if token != self.creator {
            return Err(refuse(codes::NOT_CREATOR, "only the lobby creator can add bots".into()));
        }
        if self.game.is_some() {
            return Err(refuse(codes::GAME_STARTED, "the game has already started".into()));
        }
        let Some(open) = self.seats.iter().position(|s| matches!(s, Seat::Open)) else {
            return Err(refuse(codes::FULL_LOBBY, "every seat is taken".into()));
        };
        self.seats[open] = Seat::Bot { strategy };
        Ok(After::Lobby)
    }

    fn start(&mut self, token: &str) -> Result<After, Reject> {
        if token != self.creator {
            return Err(refuse(codes::NOT_CREATOR, "only the lobby creator can start the game".into()));
        }
        if self.game.is_some() {
            return Err(refuse(codes::GAME_STARTED, "the game has already started".into()));
        }
        if self.seats.iter().any(|s| matches!(s, Seat::Open)) {
            return Err(refuse(codes::FULL_LOBBY, "every seat must be filled before starting".into()));
        }
        let mut config = self.config.clone();
        if !self.hub.options.honor_client_seeds {
            config.seed = rand::random();
        }
        let state = GameState::new(config.clone(), self.catalog.clone())
            .map_err(|e| refuse(codes::INVALID_CONFIG, e.to_string()))?;
        let bots = self
            .seats
            .iter()
            .enumerate()
            .filter_map(|(i, s)| match s {
                Seat::Bot { strategy } => {
                    Some((i, (BotContext::new(strategy.clone(), bot_seed(config.seed, i), self.catalog.clone()), 0)))
                }
                _ => None,
            })
            .collect();
        self.config = config;
        self.game = Some(Game { state, bots, sent_events: 0, vote_timer_for: 0, game_over_sent: false });
        Ok(After::Started)
    }

    fn act(&mut self, token: &str, action: Action) -> Result<After, Reject> {
        let Some(game) = &mut self.game else {
            return Err(refuse(codes::NOT_YOUR_PHASE, "the game has not started".into()));
        };
        let seat = self
            .seats
            .iter()
            .position(|s| matches!(s, Seat::Human { token: t, .. } if t == token))
            .map(|i| PlayerId(i as u8));
        let Some(seat) = seat else {
            return Err(refuse(codes::NOT_YOUR_PHASE, "you do not hold a seat in this game".into()));
        };
        game.state.apply_mut(seat, &action).map_err(Reject::Engine)?;
        Ok(After::Applied)
    }

    /// Lets bots act until a human is needed, then publishes.
    fn advance(&mut self) {
        let Some(game) = &mut self.game else { return };
        while game.state.is_terminal().is_none() {
            let awaiting = game.state.phase().awaiting();
            let Some(bot_seat) = awaiting.into_iter().find(|p| game.bots.contains_key(&p.index())) else {
                break;
            };
            let (bot, seen) = game.bots.get_mut(&bot_seat.index()).expect("bot seat");
            let view = match game.state.view_since(Viewer::Player { id: bot_seat }, *seen) {
                Ok(v) => v,
                Err(e) => {
                    tracing::error!(game = %self.id, "bot view failed: {e}");
                    break;
                }
            };
            *seen = game.state.events().len();
            let applied = bot
                .choose_action(&view)
                .map_err(|e| e.to_string())
                .and_then(|action| game.state.apply_mut(bot_seat, &action).map_err(|e| e.to_string()));
            if let Err(e) = applied {
                tracing::error!(game = %self.id, seat = %bot_seat, "bot move failed: {e}");
                break;
            }
        }
        self.publish();
        self.arm_vote_timer();
    }

    fn arm_vote_timer(&mut self) {
        let Some(game) = &mut self.game else { return };
        if !matches!(game.state.phase(), Phase::AwaitingVote { .. }) {
            return;
        }
        let serial = game.state.events().iter().filter(|e| matches!(e, Event::VoteOpened { .. })).count();
        if game.vote_timer_for == serial {
            return;
        }
        game.vote_timer_for = serial;
        self.schedule(self.hub.options.vote_timeout, SessionMsg::VoteTimeout { serial });
    }

    fn expire_ballots(&mut self, serial: usize) {
        let humans: Vec<PlayerId> = self.humans().map(|(p, _)| p).collect();
        let Some(game) = &mut self.game else { return };
        let current = game.state.events().iter().filter(|e| matches!(e, Event::VoteOpened { .. })).count();
        if current != serial {
            return;
        }
        for p in humans {
            if !matches!(game.state.phase(), Phase::AwaitingVote { .. }) {
                break;
            }
            if game.state.phase().awaiting().contains(&p) {
                let _ = game.state.apply_mut(p, &Action::CastVote { approve: false });
            }
        }
        self.advance();
    }

    fn annotate(&self, event: &Event) -> Option<Annotation> {
        let c = &self.catalog;
        let business = |b: &aiaudit_core::CardUid| c.business(b.kind).ok().map(|k| k.title.clone());
        let harm = |h: &aiaudit_core::CardUid| (!h.is_wild()).then(|| c.harm(h.kind).ok().map(|k| k.title.clone())).flatten();
        let feature =
            |f: &aiaudit_core::CardUid| (!f.is_wild()).then(|| c.feature(f.kind).ok().map(|k| k.title.clone())).flatten();
        let guide = |b: &aiaudit_core::CardUid, h: &aiaudit_core::CardUid| {
            (!h.is_wild()).then(|| c.guide_excerpt(b.kind, h.kind).ok().flatten().map(str::to_string)).flatten()
        };
        let a = match event {
            Event::HarmPlayed { target, harm: h, .. } | Event::WildHarmPlayed { target, harm: h, .. } => Annotation {
                business: business(target),
                harm: harm(h),
                feature: None,
                guide_excerpt: guide(target, h),
            },
            Event::ChallengeDefeated { target, harm: h, feature: f, .. } => Annotation {
                business: business(target),
                harm: harm(h),
                feature: feature(f),
                guide_excerpt: None,
            },
            Event::BusinessLost { business: b, harm: h, .. } => {
                Annotation { business: business(b), harm: harm(h), ..Default::default() }
            }
            Event::Defended { feature: f, .. }
            | Event::NarratedDefense { feature: f, .. }
            | Event::WildDefense { feature: f, .. } => Annotation { feature: feature(f), ..Default::default() },
            Event::BusinessSetUp { business: b, .. } => Annotation { business: business(b), ..Default::default() },
            _ => return None,
        };
        (!a.is_empty()).then_some(a)
    }

    fn prompt(&self, seat: PlayerId) -> Option<Prompt> {
        let game = self.game.as_ref()?;
        game.state.phase().awaiting().contains(&seat).then(|| prompt_for(game.state.phase()))
    }

    fn viewer_for(&self, token: &str) -> Option<Viewer> {
        if let Some(seat) = self.seat_of(token) {
            return Some(Viewer::Player { id: seat });
        }
        match self.spectators.get(token)? {
            JoinRole::Educator => Some(Viewer::Educator),
            _ => Some(Viewer::Spectator),
        }
    }

    fn send_view(&self, token: &str, from_event: usize) {
        let Some(game) = &self.game else { return };
        let Some(viewer) = self.viewer_for(token) else { return };
        match game.state.view_since(viewer, from_event) {
            Ok(view) => {
                let seat = viewer.player();
                let prompt = seat.and_then(|s| self.prompt(s));
                self.send(token, ServerMessage::View { seat, prompt, view: Box::new(view) });
            }
            Err(e) => tracing::error!(game = %self.id, "view failed: {e}"),
        }
    }

    /// Full view with the event history, plus the result if the game ended.
    fn send_full_state(&self, token: &str) {
        self.send_view(token, 0);
        if let Some(game) = &self.game {
            if game.game_over_sent {
                if let Some(msg) = self.game_over() {
                    self.send(token, msg);
                }
            }
        }
    }

    fn game_over(&self) -> Option<ServerMessage> {
        let game = self.game.as_ref()?;
        let outcome = game.state.is_terminal()?.clone();
        Some(ServerMessage::GameOver {
            outcome,
            seed: game.state.config().seed.to_string(),
            action_log: GameRecord::from_state(&game.state),
            digest: format_digest(game.state.digest()),
            final_state: Box::new(game.state.zones().clone()),
        })
    }

    /// Sends new events and fresh views to everyone watching.
    fn publish(&mut self) {
        let Some(game) = &self.game else { return };
        let events = game.state.events();
        let from = game.sent_events;
        let total = events.len();
        let recipients: Vec<(String, Option<PlayerId>)> = self
            .humans()
            .map(|(p, t)| (t.to_string(), Some(p)))
            .chain(self.spectators.keys().map(|t| (t.clone(), None)))
            .collect();
        for (index, event) in events.iter().enumerate().skip(from) {
            let annotation = self.annotate(event);
            for (token, seat) in &recipients {
                let message =
                    ServerMessage::Event { index, event: event.redacted_for(*seat), annotation: annotation.clone() };
                self.send(token, message);
            }
        }
        for (token, _) in &recipients {
            self.send_view(token, total);
        }
        let over = game.state.is_terminal().is_some() && !game.game_over_sent;
        if over {
            if let Some(msg) = self.game_over() {
                for (token, _) in &recipients {
                    self.send(token, msg.clone());
                }
            }
        }
        let game = self.game.as_mut().expect("game present");
        game.sent_events = total;
        game.game_over_sent |= over;
    }
}

enum After {
    Lobby,
    Spectate,
    Started,
    Applied,
}

enum Reject {
    Refused(&'static str, String),
    Engine(EngineError),
}

fn refuse(code: &'static str, text: String) -> Reject {
    Reject::Refused(code, text)
}
