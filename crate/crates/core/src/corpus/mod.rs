//! Corpus scanning: alias indexing, per-document mention detection, and daily
//! count aggregation.
//!
//! Mentions are detected at document granularity (a document either mentions a
//! person or it does not), which is what the downstream fraction series are
//! defined on. News documents are held to a stricter rule than tweets: a tweet
//! counts on a single full-name match, a news document needs a full name plus a
//! second, non-overlapping reference.

mod inclusion;
mod index;
mod scan;
mod tokens;

pub use inclusion::{apply_inclusion_criteria, ExclusionReason, InclusionReport};
pub use index::{build_alias_index, AliasIndex, RejectReason, RejectedSurface};
pub use scan::{aggregate_counts, aggregate_counts_par, scan_document, DailyMentionCounts};
pub use tokens::{normalize_surface, tokenize};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Identifier of a person in the registry.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PersonId(pub String);

impl PersonId {
    pub fn new(id: impl Into<String>) -> Self {
        PersonId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PersonId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for PersonId {
    fn from(s: &str) -> Self {
        PersonId(s.to_owned())
    }
}

/// The two document streams the pipeline distinguishes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Medium {
    News,
    Twitter,
}

impl Medium {
    pub const ALL: [Medium; 2] = [Medium::News, Medium::Twitter];

    pub fn as_str(self) -> &'static str {
        match self {
            Medium::News => "news",
            Medium::Twitter => "twitter",
        }
    }
}

impl fmt::Display for Medium {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One document from either stream.
///
/// Wire format (newline-delimited JSON, one object per line):
/// `{"id","date","medium","title","body","domain"}` with `date` as
/// `YYYY-MM-DD` and `medium` one of `"news"` / `"twitter"`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub date: NaiveDate,
    pub medium: Medium,
    pub title: String,
    pub body: String,
    #[serde(default)]
    pub domain: Option<String>,
}

/// How an alias surface relates to a person's full name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AliasKind {
    FullName,
    Prefix,
    Suffix,
}

/// One alias of a person together with its ambiguity share: the fraction of
/// uses of this surface that refer to this person.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AliasEntry {
    pub surface: String,
    pub share: f64,
    pub kind: AliasKind,
}

/// Registry entry for one person.
///
/// Wire format: JSON array of
/// `{"id","names":[{"surface","share","kind"}],"death_date","age_at_death",
/// "gender","manner_of_death","notability_type","language_group"}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PersonRecord {
    pub id: PersonId,
    pub names: Vec<AliasEntry>,
    pub death_date: Option<NaiveDate>,
    pub age_at_death: Option<u32>,
    pub gender: Option<String>,
    pub manner_of_death: Option<String>,
    pub notability_type: Option<String>,
    pub language_group: Option<String>,
}

/// Inclusive calendar range of the corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusWindow {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl CorpusWindow {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Self {
        CorpusWindow { start, end }
    }

    pub fn contains(&self, day: NaiveDate) -> bool {
        self.start <= day && day <= self.end
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("ambiguity threshold must lie in (0, 1], got {0}")]
    InvalidThreshold(f64),
    #[error("alias '{surface}' of person {person} has ambiguity share {share} outside [0, 1]")]
    InvalidShare {
        person: PersonId,
        surface: String,
        share: f64,
    },
    #[error("person {0} has no death date; registry invalid")]
    MissingDeathDate(PersonId),
}
