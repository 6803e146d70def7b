//! Domain types shared by every stage: tweets, minute-indexed timelines,
//! per-match datasets and pipeline configuration.
//!
//! Time is measured in whole minutes relative to kickoff. Sub-minute
//! timestamps are floored to the containing minute during ingest.

use std::collections::BTreeMap;
use std::fmt;

use chrono::{DateTime, FixedOffset};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::ingest;

/// A preprocessed post, positioned on the match-relative minute axis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tweet {
    pub id: String,
    pub minute: i64,
    /// Body with URLs and hashtags removed.
    pub text: String,
    /// Original body as found in the archive.
    pub raw_text: String,
}

impl Tweet {
    /// Builds a tweet, preprocessing `raw_text` into `text`.
    pub fn new(id: impl Into<String>, minute: i64, raw_text: impl Into<String>) -> Self {
        let raw_text = raw_text.into();
        Tweet {
            id: id.into(),
            minute,
            text: ingest::preprocess_text(&raw_text),
            raw_text,
        }
    }

    fn sort_key(&self) -> (i64, &str) {
        (self.minute, &self.id)
    }
}

/// One timeline slot. `text == None` is the ABSENT value (the "NaN" output).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Update {
    pub minute: i64,
    #[serde(
        serialize_with = "serialize_update_text",
        deserialize_with = "deserialize_update_text"
    )]
    pub text: Option<String>,
}

impl Update {
    pub fn absent(minute: i64) -> Self {
        Update { minute, text: None }
    }

    /// A present update. Text that is empty after trimming, or the literal
    /// `NaN`, yields ABSENT.
    pub fn new(minute: i64, text: impl Into<String>) -> Self {
        Update {
            minute,
            text: normalize_update_text(Some(text.into())),
        }
    }

    pub fn is_present(&self) -> bool {
        self.text.is_some()
    }

    pub fn text(&self) -> Option<&str> {
        self.text.as_deref()
    }
}

/// Maps empty / whitespace-only text and the compatibility string `NaN` to
/// ABSENT, otherwise keeps the trimmed text.
pub fn normalize_update_text(text: Option<String>) -> Option<String> {
    let text = text?;
    let trimmed = text.trim();
    if trimmed.is_empty() || trimmed == "NaN" {
        None
    } else if trimmed.len() == text.len() {
        Some(text)
    } else {
        Some(trimmed.to_string())
    }
}

fn serialize_update_text<S: Serializer>(text: &Option<String>, s: S) -> Result<S::Ok, S::Error> {
    match text {
        Some(t) => s.serialize_str(t),
        None => s.serialize_none(),
    }
}

fn deserialize_update_text<'de, D: Deserializer<'de>>(d: D) -> Result<Option<String>, D::Error> {
    let raw: Option<String> = Option::deserialize(d)?;
    Ok(normalize_update_text(raw))
}

/// Dense minute-indexed sequence of updates.
///
/// `entries[k].minute == start_minute + k`. The fields are public so that
/// archives can be represented faithfully even when malformed;
/// [`validate_dataset`] reports density violations. Use
/// [`Timeline::from_sparse`] to build a well-formed one.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Timeline {
    pub start_minute: i64,
    pub entries: Vec<Update>,
}

impl Timeline {
    /// Builds a dense timeline covering `[first, last]` of the given minutes.
    /// Missing minutes become ABSENT. When a minute appears more than once
    /// the last occurrence wins.
    pub fn from_sparse<I, S>(updates: I) -> Self
    where
        I: IntoIterator<Item = (i64, Option<S>)>,
        S: Into<String>,
    {
        let by_minute: BTreeMap<i64, Option<String>> = updates
            .into_iter()
            .map(|(m, t)| (m, normalize_update_text(t.map(Into::into))))
            .collect();
        let (Some(&first), Some(&last)) = (by_minute.keys().next(), by_minute.keys().next_back())
        else {
            return Timeline::default();
        };
        let mut tl = Timeline::absent_span(first, last);
        for (minute, text) in by_minute {
            tl.entries[(minute - first) as usize].text = text;
        }
        tl
    }

    /// All-ABSENT timeline over the closed span `[first, last]`.
    pub fn absent_span(first: i64, last: i64) -> Self {
        Timeline {
            start_minute: first,
            entries: (first..=last).map(Update::absent).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Closed minute span, `None` when empty.
    pub fn span(&self) -> Option<(i64, i64)> {
        let last = self.entries.last()?;
        Some((self.start_minute, last.minute))
    }

    pub fn end_minute(&self) -> Option<i64> {
        self.entries.last().map(|u| u.minute)
    }

    /// Entry at `minute`, assuming density.
    pub fn get(&self, minute: i64) -> Option<&Update> {
        let k = minute.checked_sub(self.start_minute)?;
        if k < 0 {
            return None;
        }
        self.entries.get(k as usize).filter(|u| u.minute == minute)
    }

    pub fn text_at(&self, minute: i64) -> Option<&str> {
        self.get(minute).and_then(Update::text)
    }

    pub fn present(&self) -> impl Iterator<Item = &Update> {
        self.entries.iter().filter(|u| u.is_present())
    }

    pub fn present_count(&self) -> usize {
        self.present().count()
    }

    pub fn is_dense(&self) -> bool {
        self.entries
            .iter()
            .enumerate()
            .all(|(k, u)| u.minute == self.start_minute + k as i64)
    }

    /// JSON Lines form: one `{"minute": m, "text": string|null}` per entry.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for u in &self.entries {
            out.push_str(&serde_json::to_string(u).expect("update serializes"));
            out.push('\n');
        }
        out
    }
}

/// All data for one match: tweets, the reference timeline and metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct MatchDataset {
    pub match_id: String,
    pub kickoff: DateTime<FixedOffset>,
    /// Sorted ascending by `(minute, id)`.
    pub tweets: Vec<Tweet>,
    pub reference: Timeline,
    /// Query hashtags used at collection time.
    pub hashtags: Vec<String>,
}

impl MatchDataset {
    /// Last reference minute; the match has no other end marker.
    pub fn end_minute(&self) -> Option<i64> {
        self.reference.end_minute()
    }

    pub fn sort_tweets(&mut self) {
        self.tweets.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    }
}

/// Which of the four generation wirings to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Generator only, may emit ABSENT itself.
    Base,
    /// Gate decides, generator always writes when asked.
    Clf,
    /// Generator sees preceding updates as context.
    Cxt,
    /// Gate plus context.
    ClfCxt,
}

impl Variant {
    pub fn is_gated(self) -> bool {
        matches!(self, Variant::Clf | Variant::ClfCxt)
    }

    pub fn uses_context(self) -> bool {
        matches!(self, Variant::Cxt | Variant::ClfCxt)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Base => "base",
            Variant::Clf => "clf",
            Variant::Cxt => "cxt",
            Variant::ClfCxt => "clf_cxt",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where the preceding-update context comes from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContextSource {
    /// Updates emitted earlier in the same run.
    #[default]
    Generated,
    /// Reference updates (the oracle-context setting).
    Reference,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub variant: Variant,
    /// Tweets from minutes `[t, t + lookahead]` feed minute `t`.
    pub tweet_lookahead_minutes: u32,
    /// Present updates from `[t - lookback, t - 1]` are the context.
    pub context_lookback_minutes: u32,
    pub context_source: ContextSource,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            variant: Variant::Base,
            tweet_lookahead_minutes: 3,
            context_lookback_minutes: 4,
            context_source: ContextSource::Generated,
        }
    }
}

impl PipelineConfig {
    pub fn with_variant(variant: Variant) -> Self {
        PipelineConfig {
            variant,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.variant.uses_context() && self.context_lookback_minutes < 1 {
            return Err(format!(
                "variant {} requires context_lookback_minutes >= 1",
                self.variant
            ));
        }
        Ok(())
    }
}

/// A broken dataset invariant. Violations are data, not failures.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub field: &'static str,
    pub record: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}]: {}", self.field, self.record, self.message)
    }
}

/// Checks every dataset invariant with the default one-hour window on both
/// sides of the match.
pub fn validate_dataset(d: &MatchDataset) -> Vec<Violation> {
    validate_dataset_with_window(d, 60, 60)
}

pub fn validate_dataset_with_window(
    d: &MatchDataset,
    before_minutes: i64,
    after_minutes: i64,
) -> Vec<Violation> {
    let mut out = Vec::new();

    let tl = &d.reference;
    for (k, u) in tl.entries.iter().enumerate() {
        let expected = tl.start_minute + k as i64;
        if u.minute != expected {
            out.push(Violation {
                field: "reference",
                record: format!("entry {k}"),
                message: format!("expected minute {expected}, found {}", u.minute),
            });
            // A single gap shifts every later entry; report it once.
            break;
        }
    }
    for u in &tl.entries {
        if let Some(t) = &u.text {
            if t.trim().is_empty() {
                out.push(Violation {
                    field: "reference",
                    record: format!("minute {}", u.minute),
                    message: "present update has empty text".into(),
                });
            }
        }
    }

    for pair in d.tweets.windows(2) {
        if pair[0].sort_key() > pair[1].sort_key() {
            out.push(Violation {
                field: "tweets",
                record: format!("id {}", pair[1].id),
                message: "tweets not sorted by (minute, id)".into(),
            });
        }
    }

    let upper = d.end_minute().map(|e| e + after_minutes);
    for t in &d.tweets {
        let too_late = upper.is_some_and(|u| t.minute > u);
        if t.minute < -before_minutes || too_late {
            out.push(Violation {
                field: "tweets",
                record: format!("id {}", t.id),
                message: format!("minute {} outside match window", t.minute),
            });
        }
        if ingest::contains_markup(&t.text) {
            out.push(Violation {
                field: "tweets",
                record: format!("id {}", t.id),
                message: "text still contains a URL or hashtag".into(),
            });
        }
    }
    out
}
