//! Card definitions and the relations that drive legality: which harms a
//! business is vulnerable to and which harms a feature can counter.
//!
//! The engine keys every legality check on integer ids; colors and shapes are
//! presentation only and exist so printed and rendered badges stay
//! distinguishable.

mod default;
pub mod export;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type BusinessId = u8;
pub type HarmId = u8;
pub type FeatureId = u8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HarmKind {
    pub id: HarmId,
    pub title: String,
    pub color: String,
    pub shape: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BusinessKind {
    pub id: BusinessId,
    pub title: String,
    /// Harms this business is vulnerable to.
    pub harms: BTreeSet<HarmId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureKind {
    pub id: FeatureId,
    pub title: String,
    pub counters: BTreeSet<HarmId>,
}

/// Explanatory prose for one business/harm pairing, used by facilitators.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuideEntry {
    pub business: BusinessId,
    pub harm: HarmId,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Catalog {
    pub businesses: Vec<BusinessKind>,
    pub harms: Vec<HarmKind>,
    pub features: Vec<FeatureKind>,
    #[serde(default)]
    pub guide: Vec<GuideEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Business,
    Harm,
    Feature,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Business => "business",
            Family::Harm => "harm",
            Family::Feature => "feature",
        })
    }
}

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("catalog parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("duplicate {family} id {id}")]
    DuplicateId { family: Family, id: u8 },
    #[error("unknown {family} id {id}")]
    UnknownId { family: Family, id: u8 },
    #[error("catalog is not playable: {0}")]
    Invalid(String),
    #[error("could not serialize catalog: {0}")]
    Serialize(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A single validation finding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub code: String,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub errors: Vec<Finding>,
    pub warnings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_playable(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn warnings_with_code<'a>(&'a self, code: &'a str) -> impl Iterator<Item = &'a Finding> + 'a {
        self.warnings.iter().filter(move |w| w.code == code)
    }

    fn error(&mut self, code: &str, message: String) {
        self.errors.push(Finding { code: code.into(), message });
    }

    fn warn(&mut self, code: &str, message: String) {
        self.warnings.push(Finding { code: code.into(), message });
    }
}

/// Finding codes emitted by [`validate`].
pub mod codes {
    pub const DUPLICATE_ID: &str = "duplicate-id";
    pub const RESERVED_ID: &str = "reserved-id";
    pub const DANGLING_HARM: &str = "dangling-harm";
    pub const EMPTY_VULNERABLE_SET: &str = "empty-vulnerable-set";
    pub const EMPTY_COUNTER_SET: &str = "empty-counter-set";
    pub const DUPLICATE_BADGE: &str = "duplicate-badge";
    pub const EMPTY_FAMILY: &str = "empty-family";
    pub const ILLEGAL_GUIDE_PAIRING: &str = "illegal-guide-pairing";
    pub const ORPHAN_HARM: &str = "orphan-harm";
    pub const UNCOUNTERABLE_HARM: &str = "uncounterable-harm";
    pub const UNDEFENDABLE_BUSINESS: &str = "undefendable-business";
    pub const IDLE_FEATURE: &str = "idle-feature";
}

/// The shipped catalog: 14 businesses, 13 harms, 7 features and the hiring
/// guide excerpts.
pub fn default_catalog() -> Catalog {
    default::build()
}

/// Parses a TOML catalog document. Only structure and id uniqueness are
/// checked here; run [`validate`] for semantic checks.
pub fn load_catalog(source: &str) -> Result<Catalog, CatalogError> {
    let catalog: Catalog = toml::from_str(source).map_err(|err| {
        let (line, column) = err
            .span()
            .map(|span| line_column(source, span.start))
            .unwrap_or((0, 0));
        CatalogError::Parse { line, column, message: err.message().to_string() }
    })?;
    check_unique(Family::Business, catalog.businesses.iter().map(|b| b.id))?;
    check_unique(Family::Harm, catalog.harms.iter().map(|h| h.id))?;
    check_unique(Family::Feature, catalog.features.iter().map(|f| f.id))?;
    Ok(catalog)
}

fn check_unique(family: Family, ids: impl Iterator<Item = u8>) -> Result<(), CatalogError> {
    let mut seen = BTreeSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(CatalogError::DuplicateId { family, id });
        }
    }
    Ok(())
}

fn line_column(source: &str, offset: usize) -> (usize, usize) {
    let before = &source[..offset.min(source.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

/// Checks every structural and semantic rule a playable catalog must satisfy.
pub fn validate(catalog: &Catalog) -> ValidationReport {
    use codes::*;
    let mut report = ValidationReport::default();

    for (family, ids) in [
        (Family::Business, catalog.businesses.iter().map(|b| b.id).collect::<Vec<_>>()),
        (Family::Harm, catalog.harms.iter().map(|h| h.id).collect()),
        (Family::Feature, catalog.features.iter().map(|f| f.id).collect()),
    ] {
        if ids.is_empty() {
            report.error(EMPTY_FAMILY, format!("catalog has no {family} cards"));
        }
        let mut seen = BTreeSet::new();
        for id in ids {
            if id == 0 {
                report.error(RESERVED_ID, format!("{family} id 0 is reserved for wild cards"));
            }
            if !seen.insert(id) {
                report.error(DUPLICATE_ID, format!("{family} id {id} appears more than once"));
            }
        }
    }

    let harm_ids: BTreeSet<HarmId> = catalog.harms.iter().map(|h| h.id).collect();

    let mut badges = BTreeMap::new();
    for harm in &catalog.harms {
        if let Some(other) = badges.insert((harm.color.as_str(), harm.shape.as_str()), harm.id) {
            report.error(
                DUPLICATE_BADGE,
                format!("harms {other} and {} share the badge {} {}", harm.id, harm.color, harm.shape),
            );
        }
    }

    for business in &catalog.businesses {
        if business.harms.is_empty() {
            report.error(EMPTY_VULNERABLE_SET, format!("business {} has an empty vulnerable set", business.id));
        }
        for h in business.harms.difference(&harm_ids) {
            report.error(DANGLING_HARM, format!("business {} references unknown harm {h}", business.id));
        }
    }
    for feature in &catalog.features {
        if feature.counters.is_empty() {
            report.error(EMPTY_COUNTER_SET, format!("feature {} has an empty counter set", feature.id));
        }
        for h in feature.counters.difference(&harm_ids) {
            report.error(DANGLING_HARM, format!("feature {} references unknown harm {h}", feature.id));
        }
    }
    for entry in &catalog.guide {
        let legal = catalog
            .businesses
            .iter()
            .find(|b| b.id == entry.business)
            .is_some_and(|b| b.harms.contains(&entry.harm) && harm_ids.contains(&entry.harm));
        if !legal {
            report.error(
                ILLEGAL_GUIDE_PAIRING,
                format!("guide entry for business {} and harm {} is not a legal pairing", entry.business, entry.harm),
            );
        }
    }

    let reachable: BTreeSet<HarmId> = catalog.businesses.iter().flat_map(|b| b.harms.iter().copied()).collect();
    let counterable: BTreeSet<HarmId> = catalog.features.iter().flat_map(|f| f.counters.iter().copied()).collect();

    for harm in &catalog.harms {
        if !reachable.contains(&harm.id) {
            report.warn(
                ORPHAN_HARM,
                format!("harm {} (\"{}\") appears on no business and can never be played as a challenge", harm.id, harm.title),
            );
        }
        if !counterable.contains(&harm.id) {
            report.warn(UNCOUNTERABLE_HARM, format!("harm {} (\"{}\") is countered by no feature", harm.id, harm.title));
        }
    }
    for business in &catalog.businesses {
        if !business.harms.is_empty() && business.harms.is_disjoint(&counterable) {
            report.warn(
                UNDEFENDABLE_BUSINESS,
                format!("no feature can defend business {} against any of its harms", business.id),
            );
        }
    }
    for feature in &catalog.features {
        if !feature.counters.is_empty() && feature.counters.is_disjoint(&reachable) {
            report.warn(IDLE_FEATURE, format!("feature {} counters no harm any business can suffer", feature.id));
        }
    }

    report
}

impl Catalog {
    pub fn to_toml(&self) -> Result<String, CatalogError> {
        toml::to_string(self).map_err(|e| CatalogError::Serialize(e.to_string()))
    }

    pub fn business(&self, id: BusinessId) -> Result<&BusinessKind, CatalogError> {
        self.businesses
            .iter()
            .find(|b| b.id == id)
            .ok_or(CatalogError::UnknownId { family: Family::Business, id })
    }

    pub fn harm(&self, id: HarmId) -> Result<&HarmKind, CatalogError> {
        self.harms
            .iter()
            .find(|h| h.id == id)
            .ok_or(CatalogError::UnknownId { family: Family::Harm, id })
    }

    pub fn feature(&self, id: FeatureId) -> Result<&FeatureKind, CatalogError> {
        self.features
            .iter()
            .find(|f| f.id == id)
            .ok_or(CatalogError::UnknownId { family: Family::Feature, id })
    }

    /// Harms that may legally be played against `business`.
    pub fn legal_harms(&self, business: BusinessId) -> Result<&BTreeSet<HarmId>, CatalogError> {
        self.business(business).map(|b| &b.harms)
    }

    pub fn can_counter(&self, feature: FeatureId, harm: HarmId) -> Result<bool, CatalogError> {
        self.harm(harm)?;
        Ok(self.feature(feature)?.counters.contains(&harm))
    }

    pub fn guide_excerpt(&self, business: BusinessId, harm: HarmId) -> Result<Option<&str>, CatalogError> {
        self.business(business)?;
        self.harm(harm)?;
        Ok(self
            .guide
            .iter()
            .find(|g| g.business == business && g.harm == harm)
            .map(|g| g.text.as_str()))
    }

    /// Fails with [`CatalogError::Invalid`] when validation reports errors.
    pub fn ensure_playable(&self) -> Result<(), CatalogError> {
        let report = validate(self);
        if report.is_playable() {
            Ok(())
        } else {
            let joined: Vec<String> = report.errors.iter().map(ToString::to_string).collect();
            Err(CatalogError::Invalid(joined.join("; ")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legal_harms_match_printed_cards() {
        let c = default_catalog();
        assert_eq!(c.legal_harms(3).unwrap(), &BTreeSet::from([5, 6]));
        assert_eq!(c.legal_harms(10).unwrap(), &BTreeSet::from([1, 2, 3, 4, 5, 6]));
        assert_eq!(c.legal_harms(4).unwrap(), &BTreeSet::from([3, 7, 8, 12]));
        assert!(matches!(
            c.legal_harms(99),
            Err(CatalogError::UnknownId { family: Family::Business, id: 99 })
        ));
    }

    #[test]
    fn counters() {
        let c = default_catalog();
        assert!(c.can_counter(2, 5).unwrap());
        assert!(!c.can_counter(2, 1).unwrap());
        assert!(c.can_counter(7, 8).unwrap());
        assert!(c.can_counter(8, 1).is_err());
        assert!(c.can_counter(1, 14).is_err());
    }

    #[test]
    fn guide_lookup() {
        let c = default_catalog();
        assert!(c.guide_excerpt(4, 8).unwrap().unwrap().contains("more likely to select applicants with common white names"));
        assert!(c.guide_excerpt(4, 7).unwrap().unwrap().contains("what happens to the human recruiter's job"));
        assert_eq!(c.guide_excerpt(3, 5).unwrap(), None);
        assert!(c.guide_excerpt(15, 5).is_err());
    }

    #[test]
    fn empty_counter_set_is_an_error() {
        let mut c = default_catalog();
        c.features[1].counters.clear();
        let report = validate(&c);
        assert!(report.errors.iter().any(|e| e.code == codes::EMPTY_COUNTER_SET));
        assert!(c.ensure_playable().is_err());
    }

    #[test]
    fn dangling_reference_is_deferred_to_validate() {
        let mut doc = default_catalog().to_toml().unwrap();
        doc = doc.replacen("harms = [5, 6]", "harms = [5, 99]", 1);
        let c = load_catalog(&doc).unwrap();
        let report = validate(&c);
        assert_eq!(report.errors.len(), 1);
        assert_eq!(report.errors[0].code, codes::DANGLING_HARM);
    }

    #[test]
    fn duplicate_harm_id_fails_to_load() {
        let mut c = default_catalog();
        c.harms[4].id = 3;
        let doc = c.to_toml().unwrap();
        assert!(matches!(load_catalog(&doc), Err(CatalogError::DuplicateId { family: Family::Harm, id: 3 })));
    }

    #[test]
    fn parse_errors_carry_location() {
        let err = load_catalog("businesses = []\nharms = [\n  { id = \"x\" }\n]\nfeatures = []\n").unwrap_err();
        match err {
            CatalogError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn illegal_guide_pairing() {
        let mut c = default_catalog();
        c.guide.push(GuideEntry { business: 3, harm: 1, text: "x".into() });
        let report = validate(&c);
        assert_eq!(report.errors.len(), 1);
        assert_eq!(report.errors[0].code, codes::ILLEGAL_GUIDE_PAIRING);
    }

    #[test]
    fn duplicate_badge() {
        let mut c = default_catalog();
        c.harms[1].color = c.harms[0].color.clone();
        c.harms[1].shape = c.harms[0].shape.clone();
        assert!(validate(&c).errors.iter().any(|e| e.code == codes::DUPLICATE_BADGE));
    }

    #[test]
    fn uncounterable_and_undefendable_warnings() {
        let mut c = default_catalog();
        // Feature 2 is the only thing besides features 1 and 4 that touches harm 5.
        for f in &mut c.features {
            f.counters.remove(&5);
            f.counters.remove(&6);
        }
        c.features.retain(|f| !f.counters.is_empty());
        let report = validate(&c);
        assert!(report.is_playable());
        assert_eq!(report.warnings_with_code(codes::UNCOUNTERABLE_HARM).count(), 2);
        // Business 3 is vulnerable to exactly {5, 6}.
        let undefendable: Vec<_> = report.warnings_with_code(codes::UNDEFENDABLE_BUSINESS).collect();
        assert_eq!(undefendable.len(), 1);
        assert!(undefendable[0].message.contains("business 3"));
    }
}
