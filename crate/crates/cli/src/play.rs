//! Terminal play against a server: numbered prompts on every decision.

use std::io::Write;

use aiaudit_client::GameClient;
use aiaudit_core::engine::{GameRecord, NARRATIVE_MAX};
use aiaudit_core::{Action, Catalog};
use aiaudit_protocol::{ClientMessage, ServerMessage};
use anyhow::{bail, Context, Result};
use tokio::io::{AsyncBufRead, AsyncBufReadExt};

use crate::render;

async fn read_line<R: AsyncBufRead + Unpin>(input: &mut R) -> Result<String> {
    let mut line = String::new();
    if input.read_line(&mut line).await? == 0 {
        bail!("input closed before the game ended");
    }
    Ok(line.trim().to_string())
}

/// Asks until the answer is a number in 1..=n.
async fn choose<R: AsyncBufRead + Unpin, W: Write>(input: &mut R, out: &mut W, n: usize) -> Result<usize> {
    loop {
        write!(out, "choose 1-{n}> ")?;
        out.flush()?;
        let line = read_line(input).await?;
        match line.parse::<usize>() {
            Ok(k) if (1..=n).contains(&k) => return Ok(k - 1),
            _ => writeln!(out, "'{line}' is not one of the listed choices.")?,
        }
    }
}

async fn narrative<R: AsyncBufRead + Unpin, W: Write>(input: &mut R, out: &mut W) -> Result<String> {
    loop {
        write!(out, "narrative> ")?;
        out.flush()?;
        let line = read_line(input).await?;
        if line.is_empty() {
            writeln!(out, "A narrative is required for this card.")?;
        } else if line.chars().count() > NARRATIVE_MAX {
            writeln!(out, "Keep it under {NARRATIVE_MAX} characters.")?;
        } else {
            return Ok(line);
        }
    }
}

/// Plays `game_id` from the seat this client holds until the game ends and
/// returns the disclosed record.
pub async fn play<R: AsyncBufRead + Unpin, W: Write>(
    client: &mut GameClient,
    game_id: &str,
    catalog: &Catalog,
    input: &mut R,
    out: &mut W,
) -> Result<GameRecord> {
    let mut me = None;
    let mut answered = None;
    loop {
        let r = client.recv().await.context("lost the server")?;
        match r.message {
            ServerMessage::Event { event, annotation, .. } => {
                if let Some(line) = render::event(catalog, &event, annotation.as_ref(), me) {
                    writeln!(out, "{line}")?;
                }
            }
            ServerMessage::View { seat, prompt, view } => {
                me = seat.or(me);
                let key = view.event_offset + view.events.len();
                if prompt.is_none() || answered == Some(key) {
                    continue;
                }
                answered = Some(key);
                writeln!(out, "\n{}", render::table(catalog, &view))?;
                loop {
                    for (i, a) in view.legal_actions.iter().enumerate() {
                        writeln!(out, "  {}) {}", i + 1, render::action(catalog, a, me))?;
                    }
                    let mut action: Action = view.legal_actions[choose(input, out, view.legal_actions.len()).await?].clone();
                    if action.needs_narrative() {
                        action = action.with_narrative(narrative(input, out).await?);
                    }
                    match client.request(ClientMessage::Action { action }, Some(game_id)).await {
                        Ok(_) => break,
                        Err(e) if e.code().is_some() => writeln!(out, "{e}")?,
                        Err(e) => return Err(e.into()),
                    }
                }
            }
            ServerMessage::GameOver { outcome, seed, action_log, digest, .. } => {
                writeln!(out, "\n{}", render::outcome(&outcome, me))?;
                writeln!(out, "seed {seed}, final digest {digest}")?;
                return Ok(action_log);
            }
            ServerMessage::Error { text, .. } => writeln!(out, "server: {text}")?,
            ServerMessage::Lobby(_) | ServerMessage::Welcome { .. } | ServerMessage::Ack { .. } => {}
        }
    }
}
