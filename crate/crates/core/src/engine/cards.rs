use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::catalog::Family;

/// Seat index, 0-based. Displayed 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PlayerId(pub u8);

impl PlayerId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for PlayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{}", self.0 as u32 + 1)
    }
}

/// Identity of one physical card. Kind 0 is the wild card of the harm and
/// feature families. Copy 0 means the copy is withheld (a face-only
/// reference, used in public logs).
///
/// Written as `B4.1`, `H0.2`, `F7.1`, or `H5` for a face-only reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CardUid {
    pub family: Family,
    pub kind: u8,
    pub copy: u16,
}

pub const WILD: u8 = 0;

impl CardUid {
    pub const fn business(kind: u8) -> Self {
        CardUid { family: Family::Business, kind, copy: 1 }
    }

    pub const fn harm(kind: u8, copy: u16) -> Self {
        CardUid { family: Family::Harm, kind, copy }
    }

    pub const fn feature(kind: u8, copy: u16) -> Self {
        CardUid { family: Family::Feature, kind, copy }
    }

    pub fn is_wild(self) -> bool {
        self.kind == WILD && self.family != Family::Business
    }

    /// The same card with its copy index withheld.
    pub fn face(self) -> Self {
        CardUid { copy: 0, ..self }
    }
}

impl fmt::Display for CardUid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.family {
            Family::Business => 'B',
            Family::Harm => 'H',
            Family::Feature => 'F',
        };
        if self.copy == 0 {
            write!(f, "{prefix}{}", self.kind)
        } else {
            write!(f, "{prefix}{}.{}", self.kind, self.copy)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed card id {0:?}")]
pub struct ParseCardError(pub String);

impl FromStr for CardUid {
    type Err = ParseCardError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ParseCardError(s.to_string());
        let mut chars = s.chars();
        let family = match chars.next() {
            Some('B') => Family::Business,
            Some('H') => Family::Harm,
            Some('F') => Family::Feature,
            _ => return Err(bad()),
        };
        let rest = chars.as_str();
        let (kind, copy) = match rest.split_once('.') {
            Some((k, c)) => (k.parse().map_err(|_| bad())?, c.parse().map_err(|_| bad())?),
            None => (rest.parse().map_err(|_| bad())?, 0),
        };
        if family == Family::Business && kind == WILD {
            return Err(bad());
        }
        Ok(CardUid { family, kind, copy })
    }
}

impl Serialize for CardUid {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CardUid {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn formats() {
        assert_eq!(CardUid::business(4).to_string(), "B4.1");
        assert_eq!(CardUid::harm(0, 2).to_string(), "H0.2");
        assert_eq!(CardUid::feature(7, 1).face().to_string(), "F7");
        assert!(CardUid::harm(0, 1).is_wild());
        assert!("B0.1".parse::<CardUid>().is_err());
        assert!("X1.1".parse::<CardUid>().is_err());
        assert!("H1.".parse::<CardUid>().is_err());
    }

    proptest! {
        #[test]
        fn text_round_trip(fam in 0u8..3, kind in 0u8..=255, copy in 0u16..1000) {
            let family = [Family::Business, Family::Harm, Family::Feature][fam as usize];
            prop_assume!(!(family == Family::Business && kind == 0));
            let uid = CardUid { family, kind, copy };
            prop_assert_eq!(uid.to_string().parse::<CardUid>().unwrap(), uid);
        }
    }
}
