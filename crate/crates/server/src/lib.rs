//! Game service. Each session is owned by a single task with an inbox;
//! websocket connections and HTTP handlers only talk to sessions through
//! messages.

mod api;
mod hub;
mod session;
mod ws;

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Duration;

use aiaudit_core::{default_catalog, Catalog};
use axum::routing::{get, post};
use axum::Router;
use tokio::net::{TcpListener, ToSocketAddrs};
use tokio::task::JoinHandle;

pub use hub::Hub;

#[derive(Debug, Clone)]
pub struct ServerOptions {
    /// Unanswered human ballots count as rejections after this long.
    pub vote_timeout: Duration,
    /// A disconnected human's seat becomes a random bot after this long.
    /// Defaults to three vote timeouts.
    pub disconnect_grace: Option<Duration>,
    /// Sessions with no commands for this long are closed.
    pub session_ttl: Duration,
    /// Use the seed from the client's config instead of a fresh one. Meant
    /// for tests and scripted demos.
    pub honor_client_seeds: bool,
    /// Catalogs that lobbies may name. Always contains "default".
    pub catalogs: BTreeMap<String, Arc<Catalog>>,
}

impl Default for ServerOptions {
    fn default() -> Self {
        ServerOptions {
            vote_timeout: Duration::from_secs(120),
            disconnect_grace: None,
            session_ttl: Duration::from_secs(30 * 60),
            honor_client_seeds: false,
            catalogs: BTreeMap::from([("default".to_string(), Arc::new(default_catalog()))]),
        }
    }
}

impl ServerOptions {
    pub fn disconnect_grace(&self) -> Duration {
        self.disconnect_grace.unwrap_or(self.vote_timeout * 3)
    }

    pub fn with_catalog(mut self, name: impl Into<String>, catalog: Catalog) -> Self {
        self.catalogs.insert(name.into(), Arc::new(catalog));
        self
    }
}

pub fn router(hub: Arc<Hub>) -> Router {
    Router::new()
        .route("/health", get(api::health))
        .route("/ws", get(ws::upgrade))
        .route("/api/catalog", get(api::catalog))
        .route("/api/validate", post(api::validate))
        .route("/api/simulate", post(api::simulate))
        .route("/api/compare", post(api::compare))
        .route("/api/replay", post(api::replay))
        .with_state(hub)
}

/// Serves until the listener fails.
pub async fn serve(listener: TcpListener, options: ServerOptions) -> std::io::Result<()> {
    let hub = Hub::new(options);
    axum::serve(listener, router(hub)).await
}

/// A server running on a background task.
pub struct RunningServer {
    pub addr: SocketAddr,
    pub hub: Arc<Hub>,
    task: JoinHandle<std::io::Result<()>>,
}

impl RunningServer {
    pub fn http_url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn ws_url(&self) -> String {
        format!("ws://{}/ws", self.addr)
    }

    pub fn shutdown(self) {
        self.task.abort();
    }
}

/// Binds `addr` (port 0 picks a free port) and serves in the background.
pub async fn spawn(addr: impl ToSocketAddrs, options: ServerOptions) -> std::io::Result<RunningServer> {
    let listener = TcpListener::bind(addr).await?;
    let addr = listener.local_addr()?;
    let hub = Hub::new(options);
    let app = router(hub.clone());
    let task = tokio::spawn(async move { axum::serve(listener, app).await });
    Ok(RunningServer { addr, hub, task })
}
