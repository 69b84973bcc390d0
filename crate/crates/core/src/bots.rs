//! Heuristic players. A bot sees only its [`RedactedView`]; everything it
//! decides is a function of that view, its seeded generator and what it has
//! remembered from earlier views.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::catalog::{BusinessId, Catalog, FeatureId, HarmId};
use crate::engine::{Action, CardUid, Event, PhaseView, PlayerId, RedactedView, VoteSubject, VoteView};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyName {
    Random,
    LeastHarmFirst,
    BackupOverlap,
    Mimic,
    GreedyDefender,
}

impl StrategyName {
    pub const ALL: [StrategyName; 5] = [
        StrategyName::Random,
        StrategyName::LeastHarmFirst,
        StrategyName::BackupOverlap,
        StrategyName::Mimic,
        StrategyName::GreedyDefender,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StrategyName::Random => "random",
            StrategyName::LeastHarmFirst => "least_harm_first",
            StrategyName::BackupOverlap => "backup_overlap",
            StrategyName::Mimic => "mimic",
            StrategyName::GreedyDefender => "greedy_defender",
        }
    }
}

/// Probability that a random bot approves a vote.
pub const PARAM_APPROVE: &str = "approve";
/// Non-zero: hold back the last feature in hand while another business is in
/// play (all strategies except greedy_defender).
pub const PARAM_SAVE_LAST: &str = "save_last";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BotError {
    #[error("unknown strategy {0:?}")]
    UnknownStrategy(String),
    #[error("bad strategy parameter: {0}")]
    BadParameter(String),
    #[error("no legal action offered to the bot")]
    NoLegalAction,
}

/// A strategy and its optional weights. Text form: `name` or
/// `name:key=value;key=value`.
#[derive(Debug, Clone, PartialEq)]
pub struct Strategy {
    pub name: StrategyName,
    pub params: BTreeMap<String, f64>,
}

impl Strategy {
    pub fn new(name: StrategyName) -> Self {
        Strategy { name, params: BTreeMap::new() }
    }

    pub fn param(&self, key: &str, default: f64) -> f64 {
        self.params.get(key).copied().unwrap_or(default)
    }

    /// Parses a comma-separated lineup such as `random,least_harm_first`.
    pub fn parse_list(text: &str) -> Result<Vec<Strategy>, BotError> {
        text.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect()
    }
}

impl From<StrategyName> for Strategy {
    fn from(name: StrategyName) -> Self {
        Strategy::new(name)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name.as_str())?;
        if !self.params.is_empty() {
            let parts: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            write!(f, ":{}", parts.join(";"))?;
        }
        Ok(())
    }
}

impl FromStr for Strategy {
    type Err = BotError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let name = StrategyName::ALL
            .into_iter()
            .find(|n| n.as_str() == name.trim())
            .ok_or_else(|| BotError::UnknownStrategy(name.to_string()))?;
        let mut params = BTreeMap::new();
        for pair in rest.split(';').filter(|p| !p.trim().is_empty()) {
            let (k, v) = pair.split_once('=').ok_or_else(|| BotError::BadParameter(pair.to_string()))?;
            let v: f64 = v.trim().parse().map_err(|_| BotError::BadParameter(pair.to_string()))?;
            if !v.is_finite() {
                return Err(BotError::BadParameter(format!("{k} must be finite")));
            }
            params.insert(k.trim().to_string(), v);
        }
        if let Some(p) = params.get(PARAM_APPROVE) {
            if !(0.0..=1.0).contains(p) {
                return Err(BotError::BadParameter(format!("{PARAM_APPROVE} must lie in [0, 1]")));
            }
        }
        Ok(Strategy { name, params })
    }
}

impl Serialize for Strategy {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Strategy {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Per-game scratch a bot accumulates from the public log.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BotMemory {
    events_seen: usize,
    /// Harm kinds seen in challenges.
    pub seen_harms: BTreeMap<HarmId, u32>,
    /// Harm kinds that were successfully defended against.
    pub defended_harms: BTreeMap<HarmId, u32>,
}

/// What a wild or narrated card is about, for templating.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NarrativeContext {
    WildHarm { business: BusinessId, harm: HarmId },
    WildFeature { business: BusinessId, harm: Option<HarmId>, feature: Option<FeatureId> },
    NarratedFeature { business: BusinessId, harm: Option<HarmId>, feature: FeatureId },
}

fn quoted(title: Option<&str>, fallback: &str) -> String {
    format!("\"{}\"", title.unwrap_or(fallback))
}

/// Deterministic narrative for a bot's wild or narrated play. Titles are
/// quoted verbatim so other bots can check the claim against the catalog.
pub fn narrative_template(strategy: &Strategy, catalog: &Catalog, context: NarrativeContext) -> String {
    let business = |id| quoted(catalog.business(id).ok().map(|b| b.title.as_str()), "this business");
    let harm = |id: Option<HarmId>| quoted(id.and_then(|h| catalog.harm(h).ok()).map(|h| h.title.as_str()), "this harm");
    let feature = |id: Option<FeatureId>| {
        quoted(id.and_then(|f| catalog.feature(f).ok()).map(|f| f.title.as_str()), "an independent audit before every release")
    };
    let closer = match strategy.name {
        StrategyName::GreedyDefender => " We will not let this one through.",
        StrategyName::Random => "",
        _ => " Think about who gets hurt.",
    };
    match context {
        NarrativeContext::WildHarm { business: b, harm: h } => {
            format!("{} can end up {}.{closer}", business(b), harm(Some(h)))
        }
        NarrativeContext::WildFeature { business: b, harm: h, feature: f } => {
            format!("To stop {} from {}, we commit to {}.{closer}", business(b), harm(h), feature(f))
        }
        NarrativeContext::NarratedFeature { business: b, harm: h, feature: f } => {
            format!("{} answers {} for {}.{closer}", feature(Some(f)), harm(h), business(b))
        }
    }
}

/// First harm whose title appears in `text`.
pub fn claimed_harm(catalog: &Catalog, text: &str) -> Option<HarmId> {
    let lower = text.to_lowercase();
    catalog.harms.iter().find(|h| lower.contains(&h.title.to_lowercase())).map(|h| h.id)
}

/// First feature whose title appears in `text`.
pub fn claimed_feature(catalog: &Catalog, text: &str) -> Option<FeatureId> {
    let lower = text.to_lowercase();
    catalog.features.iter().find(|f| lower.contains(&f.title.to_lowercase())).map(|f| f.id)
}

/// Whether the claim under vote matches a real catalog relation.
pub fn claim_holds(catalog: &Catalog, vote: &VoteView) -> bool {
    let challenge = &vote.challenge;
    let harm_kind = if challenge.harm.is_wild() {
        challenge.narrative.as_deref().and_then(|n| claimed_harm(catalog, n))
    } else {
        Some(challenge.harm.kind)
    };
    let counters = |feature: Option<FeatureId>| match (feature, harm_kind) {
        (Some(f), Some(h)) => catalog.can_counter(f, h).unwrap_or(false),
        _ => false,
    };
    match vote.subject {
        VoteSubject::WildHarmValidity => harm_kind
            .is_some_and(|h| catalog.legal_harms(challenge.target.kind).is_ok_and(|set| set.contains(&h))),
        VoteSubject::WildFeatureAdequacy => {
            counters(vote.defense.as_ref().and_then(|d| claimed_feature(catalog, &d.narrative)))
        }
        VoteSubject::NarratedFeatureVsWildHarm => counters(vote.defense.as_ref().map(|d| d.feature.kind)),
    }
}

pub struct BotContext {
    strategy: Strategy,
    rng: ChaCha8Rng,
    catalog: Arc<Catalog>,
    memory: BotMemory,
}

impl BotContext {
    pub fn new(strategy: Strategy, seed: u64, catalog: Arc<Catalog>) -> Self {
        BotContext { strategy, rng: ChaCha8Rng::seed_from_u64(seed), catalog, memory: BotMemory::default() }
    }

    pub fn strategy(&self) -> &Strategy {
        &self.strategy
    }

    pub fn memory(&self) -> &BotMemory {
        &self.memory
    }

    fn observe(&mut self, view: &RedactedView) {
        let skip = self.memory.events_seen.saturating_sub(view.event_offset);
        for event in view.events.iter().skip(skip) {
            match event {
                Event::HarmPlayed { harm, .. } => *self.memory.seen_harms.entry(harm.kind).or_default() += 1,
                Event::ChallengeDefeated { harm, .. } => *self.memory.defended_harms.entry(harm.kind).or_default() += 1,
                _ => {}
            }
        }
        self.memory.events_seen = self.memory.events_seen.max(view.event_offset + view.events.len());
    }

    /// Picks one of `view.legal_actions`, with any narrative filled in.
    pub fn choose_action(&mut self, view: &RedactedView) -> Result<Action, BotError> {
        self.observe(view);
        if view.legal_actions.is_empty() {
            return Err(BotError::NoLegalAction);
        }
        let action = match self.strategy.name {
            StrategyName::Random => self.choose_random(view),
            _ => self.choose_heuristic(view),
        };
        Ok(self.with_narrative(view, action))
    }

    fn choose_random(&mut self, view: &RedactedView) -> Action {
        if let PhaseView::AwaitingVote { .. } = view.phase {
            let approve = self.rng.gen_bool(self.strategy.param(PARAM_APPROVE, 0.5).clamp(0.0, 1.0));
            return Action::CastVote { approve };
        }
        let i = self.rng.gen_range(0..view.legal_actions.len());
        view.legal_actions[i].clone()
    }

    fn choose_heuristic(&mut self, view: &RedactedView) -> Action {
        let legal = &view.legal_actions;
        match &view.phase {
            PhaseView::AwaitingVote { vote } => Action::CastVote { approve: claim_holds(&self.catalog, vote) },
            PhaseView::AwaitingDefense { .. } => self.choose_defense(view),
            PhaseView::Setup { .. } => self.best_setup(view).unwrap_or_else(|| legal[0].clone()),
            PhaseView::AwaitingTurnAction { setups_done, .. } => {
                if *setups_done >= 1 && legal.contains(&Action::EndTurn) {
                    return Action::EndTurn;
                }
                if let Some(attack) = self.best_attack(view) {
                    return attack;
                }
                if let Some(setup) = self.best_setup(view) {
                    return setup;
                }
                if let Some(wild) = self.best_wild_attack(view) {
                    return wild;
                }
                if let Some(exchange) = self.best_exchange(view) {
                    return exchange;
                }
                legal[0].clone()
            }
            PhaseView::Terminal { .. } => legal[0].clone(),
        }
    }

    fn harms_of(&self, business: BusinessId) -> BTreeSet<HarmId> {
        self.catalog.legal_harms(business).cloned().unwrap_or_default()
    }

    fn harm_union<'a>(&self, businesses: impl Iterator<Item = &'a CardUid>) -> BTreeSet<HarmId> {
        businesses.flat_map(|b| self.harms_of(b.kind)).collect()
    }

    fn best_setup(&self, view: &RedactedView) -> Option<Action> {
        let me = view.me()?;
        let own = view.player(me).map(|p| p.in_play.iter().collect::<Vec<_>>()).unwrap_or_default();
        let own_harms = self.harm_union(own.into_iter());
        let opponent_harms = self.harm_union(
            view.players.iter().filter(|p| p.id != me && !p.eliminated).flat_map(|p| p.in_play.iter()),
        );
        let held_counters: BTreeSet<HarmId> = view
            .hand
            .as_ref()
            .map(|h| {
                h.features
                    .iter()
                    .filter(|f| !f.is_wild())
                    .flat_map(|f| self.catalog.feature(f.kind).map(|k| k.counters.clone()).unwrap_or_default())
                    .collect()
            })
            .unwrap_or_default();

        view.legal_actions
            .iter()
            .filter_map(|a| match a {
                Action::SetupBusiness { business } => Some(*business),
                _ => None,
            })
            .min_by_key(|b| {
                let harms = self.harms_of(b.kind);
                let size = harms.len();
                // Smaller keys win; negate the quantities to maximise.
                let primary: i64 = match self.strategy.name {
                    StrategyName::BackupOverlap => -(harms.intersection(&own_harms).count() as i64),
                    StrategyName::Mimic => -(harms.intersection(&opponent_harms).count() as i64),
                    StrategyName::GreedyDefender => -(harms.intersection(&held_counters).count() as i64),
                    _ => 0,
                };
                (primary, size, b.kind)
            })
            .map(|business| Action::SetupBusiness { business })
    }

    fn harm_preference(&self, harm: CardUid) -> (u32, CardUid) {
        (self.memory.defended_harms.get(&harm.kind).copied().unwrap_or(0), harm)
    }

    fn best_attack(&self, view: &RedactedView) -> Option<Action> {
        let attacks: Vec<(CardUid, PlayerId, CardUid)> = view
            .legal_actions
            .iter()
            .filter_map(|a| match a {
                Action::PlayHarm { harm, defender, target } => Some((*harm, *defender, *target)),
                _ => None,
            })
            .collect();
        if attacks.is_empty() {
            return None;
        }
        let target = match self.strategy.name {
            StrategyName::GreedyDefender => {
                let mut hits: BTreeMap<CardUid, usize> = BTreeMap::new();
                for (_, _, t) in &attacks {
                    *hits.entry(*t).or_default() += 1;
                }
                hits.into_iter().max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0))).map(|(t, _)| t)?
            }
            _ => attacks
                .iter()
                .min_by_key(|(_, d, t)| {
                    let strength = view.player(*d).map_or(0, |p| p.in_play.len() + p.business_hand);
                    (strength, *t)
                })
                .map(|(_, _, t)| *t)?,
        };
        attacks
            .iter()
            .filter(|(_, _, t)| *t == target)
            .min_by_key(|(h, _, _)| self.harm_preference(*h))
            .map(|&(harm, defender, target)| Action::PlayHarm { harm, defender, target })
    }

    fn best_wild_attack(&self, view: &RedactedView) -> Option<Action> {
        view.legal_actions
            .iter()
            .filter(|a| matches!(a, Action::PlayWildHarm { .. }))
            .min_by_key(|a| match a {
                Action::PlayWildHarm { defender, target, .. } => {
                    let strength = view.player(*defender).map_or(0, |p| p.in_play.len() + p.business_hand);
                    (strength, *target)
                }
                _ => unreachable!(),
            })
            .cloned()
    }

    fn best_exchange(&self, view: &RedactedView) -> Option<Action> {
        // Swap the regular harm that applies to the fewest businesses.
        let reach = |kind: HarmId| self.catalog.businesses.iter().filter(|b| b.harms.contains(&kind)).count();
        view.legal_actions
            .iter()
            .filter_map(|a| match a {
                Action::ExchangeHarm { harm } => Some(*harm),
                _ => None,
            })
            .min_by_key(|h| (h.is_wild(), reach(h.kind), *h))
            .map(|harm| Action::ExchangeHarm { harm })
    }

    fn choose_defense(&self, view: &RedactedView) -> Action {
        let legal = &view.legal_actions;
        let defends: Vec<CardUid> = legal
            .iter()
            .filter_map(|a| match a {
                Action::Defend { feature } => Some(*feature),
                _ => None,
            })
            .collect();
        if !defends.is_empty() {
            let save = self.strategy.name != StrategyName::GreedyDefender
                && self.strategy.param(PARAM_SAVE_LAST, 1.0) != 0.0
                && legal.contains(&Action::Decline)
                && self.is_last_feature_with_backup(view);
            if !save {
                // Spend the narrowest feature, keep the versatile ones.
                let feature = defends
                    .into_iter()
                    .min_by_key(|f| (self.catalog.feature(f.kind).map_or(0, |k| k.counters.len()), *f))
                    .expect("non-empty");
                return Action::Defend { feature };
            }
            return Action::Decline;
        }
        if let Some(wild) = legal.iter().find(|a| matches!(a, Action::DefendWild { .. })) {
            return wild.clone();
        }
        if let Some(narrated) = legal.iter().find(|a| matches!(a, Action::DefendWithNarrative { .. })) {
            return narrated.clone();
        }
        Action::Decline
    }

    fn is_last_feature_with_backup(&self, view: &RedactedView) -> bool {
        let Some(me) = view.me() else { return false };
        let features = view.hand.as_ref().map_or(0, |h| h.features.len());
        let in_play = view.player(me).map_or(0, |p| p.in_play.len());
        features <= 1 && in_play >= 2
    }

    fn with_narrative(&self, view: &RedactedView, action: Action) -> Action {
        if !action.needs_narrative() {
            return action;
        }
        let catalog = &self.catalog;
        let challenge = view.phase.challenge();
        let harm_in_play = challenge.and_then(|c| {
            if c.harm.is_wild() {
                c.narrative.as_deref().and_then(|n| claimed_harm(catalog, n))
            } else {
                Some(c.harm.kind)
            }
        });
        let context = match &action {
            Action::PlayWildHarm { target, .. } => {
                let harm = self.harms_of(target.kind).into_iter().next().unwrap_or(0);
                NarrativeContext::WildHarm { business: target.kind, harm }
            }
            Action::DefendWild { .. } => {
                let feature = harm_in_play.and_then(|h| {
                    catalog.features.iter().filter(|f| f.counters.contains(&h)).map(|f| f.id).min()
                });
                NarrativeContext::WildFeature {
                    business: challenge.map_or(0, |c| c.target.kind),
                    harm: harm_in_play,
                    feature,
                }
            }
            Action::DefendWithNarrative { feature, .. } => NarrativeContext::NarratedFeature {
                business: challenge.map_or(0, |c| c.target.kind),
                harm: harm_in_play,
                feature: feature.kind,
            },
            _ => unreachable!("only narrative actions reach here"),
        };
        action.with_narrative(narrative_template(&self.strategy, catalog, context))
    }
}
