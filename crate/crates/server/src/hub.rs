use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use aiaudit_core::{Catalog, GameConfig};
use aiaudit_protocol::{codes, ServerMessage};
use tokio::sync::mpsc;

use crate::session::{self, SessionMsg};
use crate::ServerOptions;

/// A message queued for one connection's writer.
#[derive(Debug)]
pub(crate) struct Outbound {
    pub game_id: Option<String>,
    pub message: ServerMessage,
}

#[derive(Clone)]
pub(crate) struct Connection {
    pub id: u64,
    pub tx: mpsc::UnboundedSender<Outbound>,
}

struct Identity {
    name: String,
    conn: Option<Connection>,
    games: BTreeSet<String>,
    expired: BTreeSet<String>,
}

/// Shared registry of identities and sessions.
pub struct Hub {
    pub(crate) options: ServerOptions,
    identities: Mutex<HashMap<String, Identity>>,
    sessions: Mutex<HashMap<String, mpsc::UnboundedSender<SessionMsg>>>,
    tombstones: Mutex<HashSet<String>>,
    next_conn: AtomicU64,
}

pub(crate) enum RouteError {
    Unknown,
    Expired,
}

impl RouteError {
    pub fn to_message(&self, game_id: &str, reply_to: u64) -> ServerMessage {
        match self {
            RouteError::Unknown => ServerMessage::error(codes::UNKNOWN_GAME, format!("no game {game_id:?}"), Some(reply_to)),
            RouteError::Expired => {
                ServerMessage::error(codes::SESSION_EXPIRED, format!("game {game_id:?} has expired"), Some(reply_to))
            }
        }
    }
}

impl Hub {
    pub fn new(options: ServerOptions) -> Arc<Hub> {
        Arc::new(Hub {
            options,
            identities: Mutex::new(HashMap::new()),
            sessions: Mutex::new(HashMap::new()),
            tombstones: Mutex::new(HashSet::new()),
            next_conn: AtomicU64::new(1),
        })
    }

    pub fn session_count(&self) -> usize {
        self.sessions.lock().unwrap().len()
    }

    pub fn catalog(&self, name: &str) -> Option<Arc<Catalog>> {
        self.options.catalogs.get(name).cloned()
    }

    pub(crate) fn next_connection_id(&self) -> u64 {
        self.next_conn.fetch_add(1, Ordering::Relaxed)
    }

    pub(crate) fn register(&self, name: String, conn: Connection) -> String {
        let token = uuid::Uuid::new_v4().simple().to_string();
        let identity = Identity { name, conn: Some(conn), games: BTreeSet::new(), expired: BTreeSet::new() };
        self.identities.lock().unwrap().insert(token.clone(), identity);
        token
    }

    /// Binds `conn` to an existing identity. Returns its name and live games.
    pub(crate) fn resume(&self, token: &str, conn: Connection) -> Result<(String, Vec<String>), &'static str> {
        let mut ids = self.identities.lock().unwrap();
        let identity = ids.get_mut(token).ok_or(codes::UNKNOWN_TOKEN)?;
        if identity.games.is_empty() && !identity.expired.is_empty() {
            return Err(codes::SESSION_EXPIRED);
        }
        identity.conn = Some(conn);
        Ok((identity.name.clone(), identity.games.iter().cloned().collect()))
    }

    pub(crate) fn name_of(&self, token: &str) -> Option<String> {
        self.identities.lock().unwrap().get(token).map(|i| i.name.clone())
    }

    pub(crate) fn is_connected(&self, token: &str) -> bool {
        self.identities.lock().unwrap().get(token).is_some_and(|i| i.conn.is_some())
    }

    /// Forgets `conn` if it is still the identity's current connection and
    /// returns the games to notify.
    pub(crate) fn disconnect(&self, token: &str, conn_id: u64) -> Vec<String> {
        let mut ids = self.identities.lock().unwrap();
        match ids.get_mut(token) {
            Some(i) if i.conn.as_ref().is_some_and(|c| c.id == conn_id) => {
                i.conn = None;
                i.games.iter().cloned().collect()
            }
            _ => Vec::new(),
        }
    }

    pub(crate) fn attach_game(&self, token: &str, game_id: &str) {
        if let Some(i) = self.identities.lock().unwrap().get_mut(token) {
            i.games.insert(game_id.to_string());
        }
    }

    pub(crate) fn send(&self, token: &str, game_id: Option<&str>, message: ServerMessage) {
        let ids = self.identities.lock().unwrap();
        if let Some(conn) = ids.get(token).and_then(|i| i.conn.as_ref()) {
            let _ = conn.tx.send(Outbound { game_id: game_id.map(str::to_string), message });
        }
    }

    pub(crate) fn route(&self, game_id: &str, msg: SessionMsg) -> Result<(), RouteError> {
        let sessions = self.sessions.lock().unwrap();
        match sessions.get(game_id) {
            Some(tx) if tx.send(msg).is_ok() => Ok(()),
            _ if self.tombstones.lock().unwrap().contains(game_id) => Err(RouteError::Expired),
            _ => Err(RouteError::Unknown),
        }
    }

    /// Validates and opens a lobby. The creator gets the ack before the
    /// session's first lobby message.
    pub(crate) fn create(
        self: &Arc<Self>,
        token: &str,
        msg_id: u64,
        config: GameConfig,
        catalog_name: String,
        seat: bool,
    ) -> Result<String, ServerMessage> {
        let Some(catalog) = self.catalog(&catalog_name) else {
            return Err(ServerMessage::error(
                codes::UNKNOWN_CATALOG,
                format!("no catalog named {catalog_name:?}"),
                Some(msg_id),
            ));
        };
        if let Err(e) = config.validate() {
            return Err(ServerMessage::error(codes::INVALID_CONFIG, e.to_string(), Some(msg_id)));
        }
        let game_id = uuid::Uuid::new_v4().simple().to_string();
        let (tx, rx) = mpsc::unbounded_channel();
        self.sessions.lock().unwrap().insert(game_id.clone(), tx.clone());
        self.attach_game(token, &game_id);
        self.send(token, Some(&game_id), ServerMessage::Ack { reply_to: msg_id, duplicate: false });
        let name = self.name_of(token).unwrap_or_default();
        session::spawn(
            self.clone(),
            session::Setup { game_id: game_id.clone(), catalog_name, catalog, config, creator: token.to_string(), creator_name: name, seat },
            tx,
            rx,
        );
        Ok(game_id)
    }

    /// Called by a session when it closes.
    pub(crate) fn expire(&self, game_id: &str) {
        self.sessions.lock().unwrap().remove(game_id);
        self.tombstones.lock().unwrap().insert(game_id.to_string());
        for identity in self.identities.lock().unwrap().values_mut() {
            if identity.games.remove(game_id) {
                identity.expired.insert(game_id.to_string());
            }
        }
    }
}
