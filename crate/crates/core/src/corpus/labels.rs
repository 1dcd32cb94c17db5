use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// A closed label set with a fixed class order.
pub trait ClassLabel: Copy + Eq + fmt::Debug + fmt::Display + Send + Sync + 'static {
    const ALL: &'static [Self];

    fn index(self) -> usize;

    fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    fn count() -> usize {
        Self::ALL.len()
    }

    fn names() -> Vec<String> {
        Self::ALL.iter().map(|l| l.to_string()).collect()
    }
}

/// Rhetorical role of a citation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FunctionLabel {
    /// Points to weaknesses or problems of the cited work.
    Weak,
    /// Compares or contrasts the cited work with another.
    CoCo,
    /// Approves of, or builds upon, the cited work.
    Pos,
    /// Background, mere mention, or undecidable.
    Neut,
}

impl ClassLabel for FunctionLabel {
    const ALL: &'static [Self] = &[Self::Weak, Self::CoCo, Self::Pos, Self::Neut];

    fn index(self) -> usize {
        self as usize
    }
}

impl FunctionLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Weak => "Weak",
            Self::CoCo => "CoCo",
            Self::Pos => "Pos",
            Self::Neut => "Neut",
        }
    }
}

/// Whether a fragment of the cited paper carries the cited information.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProvenanceLabel {
    Prov,
    NonProv,
}

impl ClassLabel for ProvenanceLabel {
    const ALL: &'static [Self] = &[Self::Prov, Self::NonProv];

    fn index(self) -> usize {
        self as usize
    }
}

impl ProvenanceLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Prov => "Prov",
            Self::NonProv => "NonProv",
        }
    }
}

macro_rules! label_traits {
    ($ty:ty) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                <$ty as ClassLabel>::ALL
                    .iter()
                    .copied()
                    .find(|l| l.as_str() == s)
                    .ok_or_else(|| Error::UnknownLabel(s.to_string()))
            }
        }

        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(self.as_str())
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

label_traits!(FunctionLabel);
label_traits!(ProvenanceLabel);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arity() {
        assert_eq!(FunctionLabel::count(), 4);
        assert_eq!(ProvenanceLabel::count(), 2);
    }

    #[test]
    fn string_round_trip() {
        for l in FunctionLabel::ALL {
            assert_eq!(l.to_string().parse::<FunctionLabel>().unwrap(), *l);
            let json = serde_json::to_string(l).unwrap();
            assert_eq!(serde_json::from_str::<FunctionLabel>(&json).unwrap(), *l);
        }
        for l in ProvenanceLabel::ALL {
            assert_eq!(l.to_string().parse::<ProvenanceLabel>().unwrap(), *l);
            assert_eq!(ProvenanceLabel::from_index(l.index()), Some(*l));
        }
    }

    #[test]
    fn rejects_long_names() {
        let err = "Positive".parse::<FunctionLabel>().unwrap_err();
        assert!(err.to_string().contains("Positive"));
    }
}
