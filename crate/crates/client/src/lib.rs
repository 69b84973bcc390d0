//! Clients for the game server: [`GameClient`] speaks the websocket
//! protocol, [`ServiceClient`] wraps the HTTP API.

pub mod autoplay;

use std::collections::VecDeque;
use std::time::Duration;

use aiaudit_core::bots::Strategy;
use aiaudit_core::catalog::ValidationReport;
use aiaudit_core::engine::GameRecord;
use aiaudit_core::sim::SimPlan;
use aiaudit_core::{Action, Catalog, GameConfig};
use aiaudit_protocol::{ClientMessage, Envelope, JoinRole, ProtocolError, ServerMessage};
use futures_util::{SinkExt, StreamExt};
use serde::Deserialize;
use serde_json::json;
use thiserror::Error;
use tokio::net::TcpStream;
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{MaybeTlsStream, WebSocketStream};

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("websocket error: {0}")]
    Ws(#[from] tokio_tungstenite::tungstenite::Error),
    #[error("http error: {0}")]
    Http(#[from] reqwest::Error),
    #[error("timed out waiting for the server")]
    Timeout,
    #[error("connection closed")]
    Closed,
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("server refused ({code}): {text}")]
    Server { code: String, text: String },
}

impl ClientError {
    /// The server's error code, if this is a refusal.
    pub fn code(&self) -> Option<&str> {
        match self {
            ClientError::Server { code, .. } => Some(code),
            _ => None,
        }
    }
}

/// A server message together with the game it concerns.
#[derive(Debug, Clone)]
pub struct Received {
    pub msg_id: u64,
    pub game_id: Option<String>,
    pub message: ServerMessage,
}

pub struct GameClient {
    socket: WebSocketStream<MaybeTlsStream<TcpStream>>,
    next_msg_id: u64,
    buffer: VecDeque<Received>,
    timeout: Duration,
}

impl GameClient {
    pub async fn connect(url: &str) -> Result<GameClient, ClientError> {
        let (socket, _) = tokio_tungstenite::connect_async(url).await?;
        Ok(GameClient { socket, next_msg_id: 1, buffer: VecDeque::new(), timeout: Duration::from_secs(10) })
    }

    pub fn set_timeout(&mut self, timeout: Duration) {
        self.timeout = timeout;
    }

    /// Sends `message` with the next msg_id and returns that id.
    pub async fn send(&mut self, message: ClientMessage, game_id: Option<&str>) -> Result<u64, ClientError> {
        let id = self.next_msg_id;
        self.send_with_id(message, id, game_id).await?;
        Ok(id)
    }

    /// Sends with an explicit msg_id. Later ids continue after the larger of
    /// this one and the running counter.
    pub async fn send_with_id(
        &mut self,
        message: ClientMessage,
        msg_id: u64,
        game_id: Option<&str>,
    ) -> Result<(), ClientError> {
        self.next_msg_id = self.next_msg_id.max(msg_id + 1);
        let text = message.into_envelope(msg_id, game_id.map(str::to_string)).to_text();
        self.send_raw(&text).await
    }

    pub async fn send_raw(&mut self, text: &str) -> Result<(), ClientError> {
        self.socket.send(Message::Text(text.into())).await?;
        Ok(())
    }

    async fn read(&mut self) -> Result<Received, ClientError> {
        loop {
            let frame = tokio::time::timeout(self.timeout, self.socket.next()).await.map_err(|_| ClientError::Timeout)?;
            match frame {
                None => return Err(ClientError::Closed),
                Some(Err(e)) => return Err(e.into()),
                Some(Ok(Message::Text(text))) => {
                    let envelope = Envelope::from_text(text.as_str())?;
                    let message = ServerMessage::from_envelope(&envelope)?;
                    return Ok(Received { msg_id: envelope.msg_id, game_id: envelope.game_id, message });
                }
                Some(Ok(Message::Close(_))) => return Err(ClientError::Closed),
                Some(Ok(_)) => {}
            }
        }
    }

    /// Next message, buffered ones first.
    pub async fn recv(&mut self) -> Result<Received, ClientError> {
        match self.buffer.pop_front() {
            Some(r) => Ok(r),
            None => self.read().await,
        }
    }

    /// First message matching `pred`. Others stay buffered in order.
    pub async fn recv_matching(&mut self, mut pred: impl FnMut(&Received) -> bool) -> Result<Received, ClientError> {
        if let Some(pos) = self.buffer.iter().position(&mut pred) {
            return Ok(self.buffer.remove(pos).expect("position in range"));
        }
        loop {
            let r = self.read().await?;
            if pred(&r) {
                return Ok(r);
            }
            self.buffer.push_back(r);
        }
    }

    /// Drops everything buffered.
    pub fn clear(&mut self) {
        self.buffer.clear();
    }

    /// Sends and waits for the ack or error that answers it.
    pub async fn request(&mut self, message: ClientMessage, game_id: Option<&str>) -> Result<Received, ClientError> {
        let id = self.send(message, game_id).await?;
        self.answer_to(id).await
    }

    pub async fn answer_to(&mut self, msg_id: u64) -> Result<Received, ClientError> {
        let r = self.recv_matching(|r| r.message.reply_to() == Some(msg_id)).await?;
        match r.message {
            ServerMessage::Error { code, text, .. } => Err(ClientError::Server { code, text }),
            _ => Ok(r),
        }
    }

    /// Registers a name and returns the resume token.
    pub async fn hello(&mut self, name: &str) -> Result<String, ClientError> {
        let id = self.send(ClientMessage::Hello { name: name.to_string() }, None).await?;
        self.welcome(id).await
    }

    pub async fn resume(&mut self, token: &str) -> Result<String, ClientError> {
        let id = self.send(ClientMessage::Resume { resume_token: token.to_string() }, None).await?;
        self.welcome(id).await
    }

    async fn welcome(&mut self, id: u64) -> Result<String, ClientError> {
        let r = self
            .recv_matching(|r| {
                matches!(r.message, ServerMessage::Welcome { .. }) || r.message.reply_to() == Some(id)
            })
            .await?;
        match r.message {
            ServerMessage::Welcome { resume_token, .. } => Ok(resume_token),
            ServerMessage::Error { code, text, .. } => Err(ClientError::Server { code, text }),
            other => Err(ClientError::Server { code: "unexpected".into(), text: format!("{other:?}") }),
        }
    }

    /// Opens a lobby and returns its game id.
    pub async fn create(&mut self, config: GameConfig, catalog: &str, seat: bool) -> Result<String, ClientError> {
        let message = ClientMessage::Create { config, catalog: catalog.to_string(), seat };
        let r = self.request(message, None).await?;
        r.game_id.ok_or(ClientError::Server { code: "unexpected".into(), text: "ack without game_id".into() })
    }

    pub async fn join(&mut self, game_id: &str, role: JoinRole) -> Result<(), ClientError> {
        self.request(ClientMessage::Join { role }, Some(game_id)).await.map(drop)
    }

    pub async fn add_bot(&mut self, game_id: &str, strategy: Strategy) -> Result<(), ClientError> {
        self.request(ClientMessage::AddBot { strategy }, Some(game_id)).await.map(drop)
    }

    pub async fn start(&mut self, game_id: &str) -> Result<(), ClientError> {
        self.request(ClientMessage::Start {}, Some(game_id)).await.map(drop)
    }

    pub async fn act(&mut self, game_id: &str, action: Action) -> Result<(), ClientError> {
        self.request(ClientMessage::Action { action }, Some(game_id)).await.map(drop)
    }

    pub async fn vote(&mut self, game_id: &str, approve: bool) -> Result<(), ClientError> {
        self.request(ClientMessage::Vote { approve }, Some(game_id)).await.map(drop)
    }

    pub async fn close(mut self) -> Result<(), ClientError> {
        self.socket.close(None).await?;
        Ok(())
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct Health {
    pub status: String,
    pub sessions: usize,
}

/// Result of replaying a record on the server.
#[derive(Debug, Clone, Deserialize)]
pub struct Verified {
    pub verified: bool,
    pub digest: String,
}

#[derive(Debug, Deserialize)]
struct Refusal {
    code: String,
    text: String,
}

/// HTTP client for the service's JSON API.
#[derive(Debug, Clone)]
pub struct ServiceClient {
    base: String,
    http: reqwest::Client,
}

impl ServiceClient {
    pub fn new(base_url: &str) -> ServiceClient {
        ServiceClient { base: base_url.trim_end_matches('/').to_string(), http: reqwest::Client::new() }
    }

    fn url(&self, path: &str) -> String {
        format!("{}{}", self.base, path)
    }

    async fn check(response: reqwest::Response) -> Result<reqwest::Response, ClientError> {
        if response.status().is_success() {
            return Ok(response);
        }
        let status = response.status();
        let body = response.text().await?;
        Err(match serde_json::from_str::<Refusal>(&body) {
            Ok(r) => ClientError::Server { code: r.code, text: r.text },
            Err(_) => ClientError::Server { code: status.as_u16().to_string(), text: body },
        })
    }

    pub async fn health(&self) -> Result<Health, ClientError> {
        let r = Self::check(self.http.get(self.url("/health")).send().await?).await?;
        Ok(r.json().await?)
    }

    pub async fn catalog(&self, name: &str) -> Result<Catalog, ClientError> {
        let r = Self::check(self.http.get(self.url("/api/catalog")).query(&[("name", name)]).send().await?).await?;
        Ok(r.json().await?)
    }

    /// Validates catalog TOML on the server.
    pub async fn validate(&self, catalog_toml: &str) -> Result<ValidationReport, ClientError> {
        let request = self.http.post(self.url("/api/validate")).body(catalog_toml.to_string());
        let r = Self::check(request.send().await?).await?;
        Ok(r.json().await?)
    }

    /// Runs a plan and returns the report text, JSON or CSV.
    pub async fn simulate(&self, plan: &SimPlan, csv: bool, catalog: Option<&str>) -> Result<String, ClientError> {
        let body = json!({ "plan": plan, "format": if csv { "csv" } else { "json" }, "catalog": catalog });
        let r = Self::check(self.http.post(self.url("/api/simulate")).json(&body).send().await?).await?;
        Ok(r.text().await?)
    }

    /// Runs both plans and returns the paired report as JSON text.
    pub async fn compare(&self, plan_a: &SimPlan, plan_b: &SimPlan, catalog: Option<&str>) -> Result<String, ClientError> {
        let body = json!({ "plan_a": plan_a, "plan_b": plan_b, "catalog": catalog });
        let r = Self::check(self.http.post(self.url("/api/compare")).json(&body).send().await?).await?;
        Ok(r.text().await?)
    }

    pub async fn replay(&self, record: &GameRecord, catalog: Option<&str>) -> Result<Verified, ClientError> {
        let body = json!({ "record": record, "catalog": catalog });
        let r = Self::check(self.http.post(self.url("/api/replay")).json(&body).send().await?).await?;
        Ok(r.json().await?)
    }
}
