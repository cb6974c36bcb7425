//! Relation labels and the canonical relation record shared by every stage.
//!
//! A label always reads "arg1 LABEL arg2". `HypernymOf(x, y)` is the reverse of
//! `HyponymOf(y, x)` and only exists as a model output class; canonical relations
//! never carry it.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RelationLabel {
    #[serde(rename = "None")]
    None,
    #[serde(rename = "Synonym-of")]
    SynonymOf,
    #[serde(rename = "Hyponym-of")]
    HyponymOf,
    #[serde(rename = "Hypernym-of")]
    HypernymOf,
}

impl RelationLabel {
    pub const ALL: [RelationLabel; 4] = [
        RelationLabel::None,
        RelationLabel::SynonymOf,
        RelationLabel::HyponymOf,
        RelationLabel::HypernymOf,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RelationLabel::None => "None",
            RelationLabel::SynonymOf => "Synonym-of",
            RelationLabel::HyponymOf => "Hyponym-of",
            RelationLabel::HypernymOf => "Hypernym-of",
        }
    }

    pub fn is_positive(self) -> bool {
        self != RelationLabel::None
    }

    /// The label that holds when the two arguments are swapped.
    pub fn reversed(self) -> RelationLabel {
        match self {
            RelationLabel::HyponymOf => RelationLabel::HypernymOf,
            RelationLabel::HypernymOf => RelationLabel::HyponymOf,
            other => other,
        }
    }
}

impl fmt::Display for RelationLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownLabel(pub String);

impl fmt::Display for UnknownLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown relation label `{}`", self.0)
    }
}

impl std::error::Error for UnknownLabel {}

impl FromStr for RelationLabel {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RelationLabel::ALL
            .into_iter()
            .find(|l| l.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownLabel(s.to_string()))
    }
}

/// A relation between two entity mentions of one document.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Relation {
    pub doc_id: String,
    pub arg1: String,
    pub arg2: String,
    pub label: RelationLabel,
}

impl Relation {
    pub fn new(
        doc_id: impl Into<String>,
        arg1: impl Into<String>,
        arg2: impl Into<String>,
        label: RelationLabel,
    ) -> Self {
        Relation {
            doc_id: doc_id.into(),
            arg1: arg1.into(),
            arg2: arg2.into(),
            label,
        }
    }
}
