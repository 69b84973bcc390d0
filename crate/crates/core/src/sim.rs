//! Monte-Carlo harness: many seeded bot games, aggregated into a
//! [`MatchReport`] of plain counts. Rates are derived on output.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::bots::{BotContext, BotError, Strategy};
use crate::catalog::Catalog;
use crate::engine::{EngineError, Event, GameConfig, GameState, PlayerId, Viewer, VoteSubject};
use crate::seed::{serde_u64, split_seed};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("plans differ in more than their config: {0}")]
    MismatchedPlans(String),
    #[error("game with seed {seed} failed: {error}")]
    Engine { seed: u64, error: EngineError },
    #[error("bot failed in game with seed {seed}: {error}")]
    Bot { seed: u64, error: BotError },
    #[error("malformed report: {0}")]
    Format(String),
    #[error("cannot write {path}: {source}")]
    Unwritable { path: String, source: std::io::Error },
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimPlan {
    pub games: u64,
    #[serde(with = "serde_u64")]
    pub base_seed: u64,
    #[serde(default = "default_true")]
    pub rotate_seats: bool,
    pub lineup: Vec<Strategy>,
    #[serde(default)]
    pub config: GameConfig,
}

impl SimPlan {
    pub fn new(games: u64, base_seed: u64, config: GameConfig, lineup: Vec<Strategy>) -> SimPlan {
        SimPlan { games, base_seed, rotate_seats: true, lineup, config }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.games == 0 {
            return Err(SimError::InvalidPlan("games must be at least 1".into()));
        }
        if self.lineup.len() != self.config.player_count as usize {
            return Err(SimError::InvalidPlan(format!(
                "lineup has {} strategies for {} players",
                self.lineup.len(),
                self.config.player_count
            )));
        }
        self.config.validate().map_err(|e| SimError::InvalidPlan(e.to_string()))
    }

    pub fn game_seed(&self, game: u64) -> u64 {
        split_seed(self.base_seed, game)
    }

    /// Strategy per seat for game `game`.
    pub fn seating(&self, game: u64) -> Vec<Strategy> {
        let n = self.lineup.len();
        let shift = if self.rotate_seats { (game % n as u64) as usize } else { 0 };
        (0..n).map(|seat| self.lineup[(seat + shift) % n].clone()).collect()
    }

    pub fn to_toml(&self) -> Result<String, SimError> {
        toml::to_string(self).map_err(|e| SimError::Format(e.to_string()))
    }

    pub fn from_toml(source: &str) -> Result<SimPlan, SimError> {
        toml::from_str(source).map_err(|e| SimError::InvalidPlan(e.to_string()))
    }
}

/// Seed of the bot in `seat` for a game seeded with `game_seed`.
pub fn bot_seed(game_seed: u64, seat: usize) -> u64 {
    split_seed(game_seed ^ 0xB07_5EED, seat as u64)
}

/// Plays one game to the end with a bot in every seat.
pub fn play_game(config: GameConfig, catalog: Arc<Catalog>, seating: &[Strategy]) -> Result<GameState, SimError> {
    let seed = config.seed;
    let mut state = GameState::new(config, catalog.clone()).map_err(|error| SimError::Engine { seed, error })?;
    let mut bots: Vec<BotContext> = seating
        .iter()
        .enumerate()
        .map(|(seat, s)| BotContext::new(s.clone(), bot_seed(seed, seat), catalog.clone()))
        .collect();
    let mut seen = vec![0usize; bots.len()];
    while state.is_terminal().is_none() {
        let Some(player) = state.phase().awaiting().first().copied() else {
            return Err(SimError::Engine {
                seed,
                error: EngineError::IllegalAction { player: state.active(), reason: "nobody to act".into() },
            });
        };
        let seat = player.index();
        let view = state
            .view_since(Viewer::Player { id: player }, seen[seat])
            .map_err(|error| SimError::Engine { seed, error })?;
        seen[seat] = state.events().len();
        let action = bots[seat].choose_action(&view).map_err(|error| SimError::Bot { seed, error })?;
        state.apply_mut(player, &action).map_err(|error| SimError::Engine { seed, error })?;
    }
    Ok(state)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyTally {
    pub appearances: u64,
    pub wins: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BusinessTally {
    pub setups: u64,
    pub survived: u64,
}

/// Aggregate counts over a batch of games. Every field merges by addition.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchReport {
    pub games: u64,
    pub stalemates: u64,
    /// Keyed by strategy text.
    pub strategies: BTreeMap<String, StrategyTally>,
    pub seat_wins: Vec<u64>,
    /// Final turn counter -> number of games.
    pub turn_histogram: BTreeMap<u32, u64>,
    pub challenges: u64,
    /// Challenges that reached a defense decision.
    pub defense_attempts: u64,
    pub defense_successes: u64,
    pub defense_cards_played: u64,
    /// Harm kind (0 = wild) -> challenges.
    pub harm_usage: BTreeMap<u8, u64>,
    pub businesses: BTreeMap<u8, BusinessTally>,
    pub exchanges: u64,
    pub wilds_played: u64,
    pub wilds_approved: u64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl MatchReport {
    pub fn merge(mut self, other: MatchReport) -> MatchReport {
        self.games += other.games;
        self.stalemates += other.stalemates;
        for (k, v) in other.strategies {
            let e = self.strategies.entry(k).or_default();
            e.appearances += v.appearances;
            e.wins += v.wins;
        }
        if self.seat_wins.len() < other.seat_wins.len() {
            self.seat_wins.resize(other.seat_wins.len(), 0);
        }
        for (i, w) in other.seat_wins.into_iter().enumerate() {
            self.seat_wins[i] += w;
        }
        for (k, v) in other.turn_histogram {
            *self.turn_histogram.entry(k).or_default() += v;
        }
        self.challenges += other.challenges;
        self.defense_attempts += other.defense_attempts;
        self.defense_successes += other.defense_successes;
        self.defense_cards_played += other.defense_cards_played;
        for (k, v) in other.harm_usage {
            *self.harm_usage.entry(k).or_default() += v;
        }
        for (k, v) in other.businesses {
            let e = self.businesses.entry(k).or_default();
            e.setups += v.setups;
            e.survived += v.survived;
        }
        self.exchanges += other.exchanges;
        self.wilds_played += other.wilds_played;
        self.wilds_approved += other.wilds_approved;
        self
    }

    /// Tallies one finished game.
    pub fn from_game(state: &GameState, seating: &[Strategy]) -> MatchReport {
        let mut r = MatchReport { games: 1, seat_wins: vec![0; seating.len()], ..Default::default() };
        for s in seating {
            r.strategies.entry(s.to_string()).or_default().appearances += 1;
        }
        *r.turn_histogram.entry(state.turn_counter()).or_default() += 1;
        for event in state.events() {
            match event {
                Event::HarmPlayed { harm, .. } => {
                    r.challenges += 1;
                    *r.harm_usage.entry(harm.kind).or_default() += 1;
                }
                Event::WildHarmPlayed { .. } => {
                    r.challenges += 1;
                    r.wilds_played += 1;
                    *r.harm_usage.entry(0).or_default() += 1;
                }
                Event::Defended { .. } | Event::NarratedDefense { .. } => r.defense_cards_played += 1,
                Event::WildDefense { .. } => {
                    r.defense_cards_played += 1;
                    r.wilds_played += 1;
                }
                Event::ChallengeDefeated { .. } => {
                    r.defense_attempts += 1;
                    r.defense_successes += 1;
                }
                Event::BusinessLost { .. } => r.defense_attempts += 1,
                Event::HarmExchanged { .. } => r.exchanges += 1,
                Event::VoteClosed { subject, approved: true, .. }
                    if matches!(subject, VoteSubject::WildHarmValidity | VoteSubject::WildFeatureAdequacy) =>
                {
                    r.wilds_approved += 1
                }
                Event::BusinessSetUp { business, .. } => r.businesses.entry(business.kind).or_default().setups += 1,
                Event::BusinessesRevealed { placements } => {
                    for p in placements {
                        r.businesses.entry(p.business.kind).or_default().setups += 1;
                    }
                }
                _ => {}
            }
        }
        for p in &state.zones().players {
            for b in &p.in_play {
                r.businesses.entry(b.kind).or_default().survived += 1;
            }
        }
        match state.is_terminal().and_then(|o| o.winner) {
            Some(PlayerId(seat)) => {
                r.seat_wins[seat as usize] += 1;
                r.strategies.entry(seating[seat as usize].to_string()).or_default().wins += 1;
            }
            None => r.stalemates += 1,
        }
        r
    }

    pub fn wins(&self) -> u64 {
        self.strategies.values().map(|s| s.wins).sum::<u64>()
    }

    pub fn stalemate_rate(&self) -> f64 {
        ratio(self.stalemates, self.games)
    }

    pub fn defense_success_rate(&self) -> f64 {
        ratio(self.defense_successes, self.defense_attempts)
    }

    pub fn wild_approval_rate(&self) -> f64 {
        ratio(self.wilds_approved, self.wilds_played)
    }

    pub fn win_rate(&self, strategy: &str) -> f64 {
        self.strategies.get(strategy).map_or(0.0, |s| ratio(s.wins, s.appearances))
    }

    pub fn turns_min(&self) -> u32 {
        self.turn_histogram.keys().next().copied().unwrap_or(0)
    }

    pub fn turns_max(&self) -> u32 {
        self.turn_histogram.keys().next_back().copied().unwrap_or(0)
    }

    pub fn turns_mean(&self) -> f64 {
        let total: u64 = self.turn_histogram.iter().map(|(t, n)| *t as u64 * n).sum();
        ratio(total, self.turn_histogram.values().sum())
    }

    /// Lower median.
    pub fn turns_median(&self) -> u32 {
        let n: u64 = self.turn_histogram.values().sum();
        if n == 0 {
            return 0;
        }
        let mut seen = 0;
        for (t, c) in &self.turn_histogram {
            seen += c;
            if seen * 2 >= n {
                return *t;
            }
        }
        self.turns_max()
    }

    pub fn survival_rate(&self, kind: u8) -> f64 {
        self.businesses.get(&kind).map_or(0.0, |b| ratio(b.survived, b.setups))
    }
}

/// Plays every game in the plan and aggregates the results.
pub fn run(plan: &SimPlan, catalog: Arc<Catalog>) -> Result<MatchReport, SimError> {
    plan.validate()?;
    (0..plan.games)
        .into_par_iter()
        .map(|game| {
            let seating = plan.seating(game);
            let config = plan.config.clone().with_seed(plan.game_seed(game));
            let state = play_game(config, catalog.clone(), &seating)?;
            Ok(MatchReport::from_game(&state, &seating))
        })
        .try_reduce(MatchReport::default, |a, b| Ok(a.merge(b)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deltas {
    pub mean_turns: f64,
    pub median_turns: i64,
    pub defense_success_rate: f64,
    pub stalemate_rate: f64,
    pub stalemates: i64,
}

/// Two reports over the same seeds; deltas are `b - a`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedReport {
    pub a: MatchReport,
    pub b: MatchReport,
    pub delta: Deltas,
}

impl PairedReport {
    pub fn new(a: MatchReport, b: MatchReport) -> PairedReport {
        let delta = Deltas {
            mean_turns: b.turns_mean() - a.turns_mean(),
            median_turns: b.turns_median() as i64 - a.turns_median() as i64,
            defense_success_rate: b.defense_success_rate() - a.defense_success_rate(),
            stalemate_rate: b.stalemate_rate() - a.stalemate_rate(),
            stalemates: b.stalemates as i64 - a.stalemates as i64,
        };
        PairedReport { a, b, delta }
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Doc<'a> {
            a: ReportDoc<'a>,
            b: ReportDoc<'a>,
            delta: DeltaDoc,
        }
        #[derive(Serialize)]
        struct DeltaDoc {
            mean_turns: Fixed,
            median_turns: i64,
            defense_success_rate: Fixed,
            stalemate_rate: Fixed,
            stalemates: i64,
        }
        let d = &self.delta;
        let doc = Doc {
            a: ReportDoc::new(&self.a),
            b: ReportDoc::new(&self.b),
            delta: DeltaDoc {
                mean_turns: Fixed(d.mean_turns),
                median_turns: d.median_turns,
                defense_success_rate: Fixed(d.defense_success_rate),
                stalemate_rate: Fixed(d.stalemate_rate),
                stalemates: d.stalemates,
            },
        };
        serde_json::to_string_pretty(&doc).expect("report serializes") + "\n"
    }
}

/// Runs both plans on identical per-game seeds.
pub fn compare(plan_a: &SimPlan, plan_b: &SimPlan, catalog: Arc<Catalog>) -> Result<PairedReport, SimError> {
    let mismatch = |what: &str| Err(SimError::MismatchedPlans(what.to_string()));
    if plan_a.games != plan_b.games {
        return mismatch("games");
    }
    if plan_a.base_seed != plan_b.base_seed {
        return mismatch("base_seed");
    }
    if plan_a.lineup != plan_b.lineup {
        return mismatch("lineup");
    }
    if plan_a.rotate_seats != plan_b.rotate_seats {
        return mismatch("rotate_seats");
    }
    let a = run(plan_a, catalog.clone())?;
    let b = run(plan_b, catalog)?;
    Ok(PairedReport::new(a, b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl ReportFormat {
    /// Guesses from a file extension; anything but `.csv` is JSON.
    pub fn from_path(path: &Path) -> ReportFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => ReportFormat::Csv,
            _ => ReportFormat::Json,
        }
    }
}

/// A rate written with exactly four decimals.
struct Fixed(f64);

impl Serialize for Fixed {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let raw = serde_json::value::RawValue::from_string(format!("{:.4}", self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(serializer)
    }
}

#[derive(Serialize)]
struct Derived {
    stalemate_rate: Fixed,
    defense_success_rate: Fixed,
    wild_approval_rate: Fixed,
    turns_min: u32,
    turns_mean: Fixed,
    turns_median: u32,
    turns_max: u32,
    win_rates: BTreeMap<String, Fixed>,
    survival_rates: BTreeMap<u8, Fixed>,
}

#[derive(Serialize)]
struct ReportDoc<'a> {
    #[serde(flatten)]
    counts: &'a MatchReport,
    derived: Derived,
}

impl<'a> ReportDoc<'a> {
    fn new(r: &'a MatchReport) -> ReportDoc<'a> {
        ReportDoc {
            counts: r,
            derived: Derived {
                stalemate_rate: Fixed(r.stalemate_rate()),
                defense_success_rate: Fixed(r.defense_success_rate()),
                wild_approval_rate: Fixed(r.wild_approval_rate()),
                turns_min: r.turns_min(),
                turns_mean: Fixed(r.turns_mean()),
                turns_median: r.turns_median(),
                turns_max: r.turns_max(),
                win_rates: r.strategies.keys().map(|k| (k.clone(), Fixed(r.win_rate(k)))).collect(),
                survival_rates: r.businesses.keys().map(|k| (*k, Fixed(r.survival_rate(*k)))).collect(),
            },
        }
    }
}

const CSV_HEADER: [&str; 24] = [
    "row",
    "strategy",
    "appearances",
    "wins",
    "win_rate",
    "games",
    "stalemates",
    "stalemate_rate",
    "turns_min",
    "turns_mean",
    "turns_median",
    "turns_max",
    "challenges",
    "defense_attempts",
    "defense_successes",
    "defense_success_rate",
    "defense_cards_played",
    "exchanges",
    "wilds_played",
    "wilds_approved",
    "seat_wins",
    "turn_histogram",
    "harm_usage",
    "businesses",
];

fn join_map<K: std::fmt::Display, V>(map: &BTreeMap<K, V>, value: impl Fn(&V) -> String) -> String {
    let mut out = String::new();
    for (k, v) in map {
        if !out.is_empty() {
            out.push(' ');
        }
        let _ = write!(out, "{k}:{}", value(v));
    }
    out
}

fn parse_map<K: std::str::FromStr + Ord, V>(
    text: &str,
    value: impl Fn(&str) -> Option<V>,
) -> Result<BTreeMap<K, V>, SimError> {
    text.split_whitespace()
        .map(|pair| {
            let (k, v) = pair.split_once(':').ok_or_else(|| SimError::Format(format!("bad entry {pair:?}")))?;
            let k = k.parse().map_err(|_| SimError::Format(format!("bad key {k:?}")))?;
            let v = value(v).ok_or_else(|| SimError::Format(format!("bad value {v:?}")))?;
            Ok((k, v))
        })
        .collect()
}

/// Serializes a report. JSON carries the counts plus a `derived` block; CSV
/// has one row per strategy and a final summary row.
pub fn emit_report(report: &MatchReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => serde_json::to_string_pretty(&ReportDoc::new(report)).expect("report serializes") + "\n",
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(CSV_HEADER).expect("in-memory write");
            for (name, s) in &report.strategies {
                let mut row = vec![
                    "strategy".to_string(),
                    name.clone(),
                    s.appearances.to_string(),
                    s.wins.to_string(),
                    format!("{:.4}", report.win_rate(name)),
                ];
                row.resize(CSV_HEADER.len(), String::new());
                w.write_record(&row).expect("in-memory write");
            }
            let r = report;
            let row = vec![
                "summary".to_string(),
                String::new(),
                String::new(),
                r.wins().to_string(),
                String::new(),
                r.games.to_string(),
                r.stalemates.to_string(),
                format!("{:.4}", r.stalemate_rate()),
                r.turns_min().to_string(),
                format!("{:.4}", r.turns_mean()),
                r.turns_median().to_string(),
                r.turns_max().to_string(),
                r.challenges.to_string(),
                r.defense_attempts.to_string(),
                r.defense_successes.to_string(),
                format!("{:.4}", r.defense_success_rate()),
                r.defense_cards_played.to_string(),
                r.exchanges.to_string(),
                r.wilds_played.to_string(),
                r.wilds_approved.to_string(),
                r.seat_wins.iter().map(u64::to_string).collect::<Vec<_>>().join(" "),
                join_map(&r.turn_histogram, u64::to_string),
                join_map(&r.harm_usage, u64::to_string),
                join_map(&r.businesses, |b| format!("{}/{}", b.setups, b.survived)),
            ];
            w.write_record(&row).expect("in-memory write");
            String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
        }
    }
}

/// Reads a report written by [`emit_report`].
pub fn parse_report(text: &str, format: ReportFormat) -> Result<MatchReport, SimError> {
    match format {
        ReportFormat::Json => serde_json::from_str(text).map_err(|e| SimError::Format(e.to_string())),
        ReportFormat::Csv => parse_csv(text),
    }
}

fn parse_csv(text: &str) -> Result<MatchReport, SimError> {
    let fmt = |e: csv::Error| SimError::Format(e.to_string());
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().map_err(fmt)?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(SimError::Format("unexpected header".into()));
    }
    let mut report = MatchReport::default();
    let mut summary = false;
    for record in reader.records() {
        let record = record.map_err(fmt)?;
        let num = |i: usize| -> Result<u64, SimError> {
            record[i].parse().map_err(|_| SimError::Format(format!("bad {} {:?}", CSV_HEADER[i], &record[i])))
        };
        match &record[0] {
            "strategy" => {
                report
                    .strategies
                    .insert(record[1].to_string(), StrategyTally { appearances: num(2)?, wins: num(3)? });
            }
            "summary" => {
                summary = true;
                report.games = num(5)?;
                report.stalemates = num(6)?;
                report.challenges = num(12)?;
                report.defense_attempts = num(13)?;
                report.defense_successes = num(14)?;
                report.defense_cards_played = num(16)?;
                report.exchanges = num(17)?;
                report.wilds_played = num(18)?;
                report.wilds_approved = num(19)?;
                report.seat_wins = record[20]
                    .split_whitespace()
                    .map(|w| w.parse().map_err(|_| SimError::Format(format!("bad seat win {w:?}"))))
                    .collect::<Result<_, _>>()?;
                report.turn_histogram = parse_map(&record[21], |v| v.parse().ok())?;
                report.harm_usage = parse_map(&record[22], |v| v.parse().ok())?;
                report.businesses = parse_map(&record[23], |v| {
                    let (s, k) = v.split_once('/')?;
                    Some(BusinessTally { setups: s.parse().ok()?, survived: k.parse().ok()? })
                })?;
            }
            other => return Err(SimError::Format(format!("unknown row kind {other:?}"))),
        }
    }
    if !summary {
        return Err(SimError::Format("missing summary row".into()));
    }
    Ok(report)
}

/// Writes a report, creating parent directories.
pub fn write_report(report: &MatchReport, format: ReportFormat, path: &Path) -> Result<(), SimError> {
    let unwritable = |source| SimError::Unwritable { path: path.display().to_string(), source };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(unwritable)?;
    }
    std::fs::write(path, emit_report(report, format)).map_err(unwritable)
}
