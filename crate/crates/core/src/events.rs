//! Key-event extraction and detection scoring.
//!
//! Goals, substitutions and cards are pulled out of update text with
//! regular expressions whose named groups fill the event attributes. Two
//! event lists are then compared within a minute window: LENIENT needs the
//! same kind only, STRICT also needs the identifying attributes to agree.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::align::{prf, Prf};
use crate::types::Timeline;

/// Default matching window in minutes.
pub const DEFAULT_WINDOW: i64 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Goal,
    Substitution,
    Card,
}

impl EventKind {
    pub const ALL: [EventKind; 3] = [EventKind::Goal, EventKind::Substitution, EventKind::Card];

    /// Attributes a STRICT match compares.
    pub fn attr_keys(self) -> &'static [&'static str] {
        match self {
            EventKind::Goal => &["scorer"],
            EventKind::Substitution => &["player_out", "player_in"],
            EventKind::Card => &["card_type", "player"],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Goal => "goal",
            EventKind::Substitution => "substitution",
            EventKind::Card => "card",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One detected event. A missing attribute is UNKNOWN.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EventRecord {
    pub minute: i64,
    pub kind: EventKind,
    pub attrs: BTreeMap<String, String>,
}

impl EventRecord {
    pub fn new(minute: i64, kind: EventKind) -> Self {
        EventRecord {
            minute,
            kind,
            attrs: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: &str) -> Self {
        self.attrs.insert(key.to_string(), value.to_string());
        self
    }

    pub fn attr(&self, key: &str) -> Option<&str> {
        self.attrs.get(key).map(String::as_str)
    }

    /// Normalized identifying attributes, or `None` if any is UNKNOWN.
    fn strict_key(&self) -> Option<Vec<String>> {
        self.kind
            .attr_keys()
            .iter()
            .map(|k| {
                self.attr(k)
                    .map(|v| v.trim().to_lowercase())
                    .filter(|v| !v.is_empty())
            })
            .collect()
    }
}

#[derive(Debug, Error)]
pub enum PatternError {
    #[error("invalid {kind} pattern {pattern:?}: {source}")]
    Regex {
        kind: EventKind,
        pattern: String,
        #[source]
        source: regex::Error,
    },
    #[error("{kind} pattern {pattern:?} captures unknown attribute {group:?}")]
    UnknownGroup {
        kind: EventKind,
        pattern: String,
        group: String,
    },
    #[error("cannot read pattern file: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid pattern file: {0}")]
    Json(#[from] serde_json::Error),
}

/// Pattern file layout.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternSpec {
    #[serde(default)]
    pub goal: Vec<String>,
    #[serde(default)]
    pub card: Vec<String>,
    #[serde(default)]
    pub substitution: Vec<String>,
}

impl PatternSpec {
    /// Patterns for English and J-League-style Japanese update phrasing.
    pub fn builtin() -> Self {
        let v = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect();
        PatternSpec {
            goal: v(&[
                r"(?i:\bgoal\b)[^.]*?\bby\s+(?:\d+\s+)?(?P<scorer>[\p{Lu}][\w'.-]*)",
                r"(?P<scorer>[^\s、。]+?)(?:選手)?(?:が|の)(?:ゴール|得点)",
                r"(?i:\bgoal\b)|ゴール|得点",
            ]),
            substitution: v(&[
                r"(?:\d+\s*)?(?P<player_out>[^\s→]+)\s*OUT\s*→\s*(?:\d+\s*)?(?P<player_in>[^\s→.]+)\s*IN",
                r"(?:\d+\s*)?(?P<player_out>[^\s→、]+?)(?:選手)?\s*→\s*(?:\d+\s*)?(?P<player_in>[^\s→、]+?)(?:選手)?\s*(?:に)?交代",
                r"(?i:\bsubstitution\b)|交代",
            ]),
            card: v(&[
                r"(?i:(?P<card_type>yellow|red)\s+card)(?:\s+(?:to|for)\s+(?:\d+\s+)?(?P<player>[\w'.-]+))?",
                r"(?:\d+\s*)?(?P<player>[^\s、。]+?)(?:選手)?に(?P<card_type>イエロー|レッド)カード",
                r"(?P<card_type>(?:イエロー|レッド)カード|警告|退場)",
            ]),
        }
    }

    pub fn load(path: &Path) -> Result<Self, PatternError> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

/// Compiled, validated patterns.
#[derive(Clone, Debug)]
pub struct EventPatternSet {
    patterns: Vec<(EventKind, Vec<Regex>)>,
}

impl EventPatternSet {
    pub fn compile(spec: &PatternSpec) -> Result<Self, PatternError> {
        let mut patterns = Vec::new();
        for (kind, list) in [
            (EventKind::Goal, &spec.goal),
            (EventKind::Substitution, &spec.substitution),
            (EventKind::Card, &spec.card),
        ] {
            let mut compiled = Vec::with_capacity(list.len());
            for p in list {
                let re = Regex::new(p).map_err(|source| PatternError::Regex {
                    kind,
                    pattern: p.clone(),
                    source,
                })?;
                if let Some(group) = re
                    .capture_names()
                    .flatten()
                    .find(|g| !kind.attr_keys().contains(g))
                {
                    return Err(PatternError::UnknownGroup {
                        kind,
                        pattern: p.clone(),
                        group: group.to_string(),
                    });
                }
                compiled.push(re);
            }
            patterns.push((kind, compiled));
        }
        Ok(EventPatternSet { patterns })
    }

    pub fn builtin() -> Self {
        Self::compile(&PatternSpec::builtin()).expect("builtin patterns compile")
    }

    pub fn load(path: &Path) -> Result<Self, PatternError> {
        Self::compile(&PatternSpec::load(path)?)
    }

    /// Events in one update: at most one per kind, from the first pattern
    /// of that kind that matches.
    pub fn extract_text(&self, minute: i64, text: &str) -> Vec<EventRecord> {
        let mut out = Vec::new();
        for (kind, list) in &self.patterns {
            let Some(caps) = list.iter().find_map(|re| re.captures(text)) else {
                continue;
            };
            let mut ev = EventRecord::new(minute, *kind);
            for &key in kind.attr_keys() {
                let value = caps
                    .name(key)
                    .map(|m| trim_attr(m.as_str()))
                    .filter(|v| !v.is_empty());
                let value = match (key, value) {
                    ("card_type", Some(v)) => normalize_card_type(v),
                    (_, v) => v,
                };
                if let Some(v) = value {
                    ev.attrs.insert(key.to_string(), v.to_string());
                }
            }
            out.push(ev);
        }
        out
    }
}

/// Drops surrounding whitespace and sentence punctuation that a greedy
/// capture picks up at the end of a clause, keeping inner dots of initials.
fn trim_attr(raw: &str) -> &str {
    raw.trim()
        .trim_end_matches(['.', ',', '!', '?', ':', ';', '。', '、', '！', '？'])
        .trim_end()
}

fn normalize_card_type(raw: &str) -> Option<&'static str> {
    let lower = raw.to_lowercase();
    if lower.contains("yellow") || raw.contains("イエロー") || raw.contains("警告") {
        Some("yellow")
    } else if lower.contains("red") || raw.contains("レッド") || raw.contains("退場") {
        Some("red")
    } else {
        None
    }
}

/// Events of every present update, in minute order.
pub fn extract_events(tl: &Timeline, patterns: &EventPatternSet) -> Vec<EventRecord> {
    tl.present()
        .flat_map(|u| patterns.extract_text(u.minute, u.text().unwrap_or_default()))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchMode {
    Lenient,
    Strict,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EventCounts {
    pub reference: usize,
    pub generated: usize,
    pub matched: usize,
}

impl EventCounts {
    pub fn prf(&self) -> Prf {
        prf(
            self.matched as u64,
            self.generated as u64,
            self.reference as u64,
        )
    }

    fn add(&mut self, other: &EventCounts) {
        self.reference += other.reference;
        self.generated += other.generated;
        self.matched += other.matched;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KindScore {
    pub reference: usize,
    pub generated: usize,
    pub matched: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl From<EventCounts> for KindScore {
    fn from(c: EventCounts) -> Self {
        let Prf {
            precision,
            recall,
            f1,
        } = c.prf();
        KindScore {
            reference: c.reference,
            generated: c.generated,
            matched: c.matched,
            precision,
            recall,
            f1,
        }
    }
}

/// Counts per kind for one mode; ratios are derived on serialization.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EventScores {
    pub per_kind: BTreeMap<EventKind, EventCounts>,
}

impl EventScores {
    pub fn kind(&self, kind: EventKind) -> EventCounts {
        self.per_kind.get(&kind).copied().unwrap_or_default()
    }

    pub fn total(&self) -> EventCounts {
        let mut t = EventCounts::default();
        for c in self.per_kind.values() {
            t.add(c);
        }
        t
    }

    pub fn merge(&mut self, other: &EventScores) {
        for (k, c) in &other.per_kind {
            self.per_kind.entry(*k).or_default().add(c);
        }
    }

    pub fn summary(&self) -> ScoreSummary {
        ScoreSummary {
            per_kind: EventKind::ALL
                .iter()
                .map(|&k| (k, self.kind(k).into()))
                .collect(),
            total: self.total().into(),
        }
    }
}

/// Serialized view of [`EventScores`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreSummary {
    pub per_kind: BTreeMap<EventKind, KindScore>,
    pub total: KindScore,
}

/// Size of a maximum one-to-one matching where reference minute `r` may
/// pair with generated minute `g` iff `|r - g| <= window`. Both slices
/// must be sorted. Each reference takes the earliest generated event still
/// in reach, which is optimal when every window has the same width.
fn max_window_matching(reference: &[i64], generated: &[i64], window: i64) -> usize {
    let mut next = 0;
    let mut matched = 0;
    for &r in reference {
        while next < generated.len() && generated[next] < r - window {
            next += 1;
        }
        if next < generated.len() && generated[next] <= r + window {
            matched += 1;
            next += 1;
        }
    }
    matched
}

/// Matches reference against generated events kind by kind.
///
/// LENIENT pairs any two events of the same kind at most `window` minutes
/// apart; STRICT also requires the identifying attributes to be equal
/// (case-insensitive) and known. The matching is one-to-one and of maximum
/// size, so STRICT never matches more than LENIENT.
pub fn match_events(
    reference: &[EventRecord],
    generated: &[EventRecord],
    mode: MatchMode,
    window: i64,
) -> EventScores {
    type Classes = BTreeMap<Option<Vec<String>>, Vec<i64>>;
    let group = |events: &[EventRecord], kind: EventKind| -> Classes {
        let mut classes: Classes = BTreeMap::new();
        for e in events.iter().filter(|e| e.kind == kind) {
            let key = match mode {
                MatchMode::Lenient => Some(Vec::new()),
                MatchMode::Strict => e.strict_key(),
            };
            classes.entry(key).or_default().push(e.minute);
        }
        for minutes in classes.values_mut() {
            minutes.sort_unstable();
        }
        classes
    };

    let mut scores = EventScores::default();
    for kind in EventKind::ALL {
        let refs = group(reference, kind);
        let gens = group(generated, kind);
        let matched = refs
            .iter()
            .filter_map(|(key, r)| {
                // UNKNOWN attributes never match.
                key.as_ref()?;
                gens.get(key).map(|g| max_window_matching(r, g, window))
            })
            .sum();
        scores.per_kind.insert(
            kind,
            EventCounts {
                reference: refs.values().map(Vec::len).sum(),
                generated: gens.values().map(Vec::len).sum(),
                matched,
            },
        );
    }
    scores
}

/// Event evaluation of one match, both modes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchEventReport {
    pub match_id: String,
    pub lenient: ScoreSummary,
    pub strict: ScoreSummary,
}

/// Corpus event report: counts summed across matches, then ratios.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventReport {
    pub window: i64,
    pub lenient: ScoreSummary,
    pub strict: ScoreSummary,
    pub matches: Vec<MatchEventReport>,
}

impl EventReport {
    /// `inputs` holds `(match_id, reference events, generated events)`.
    pub fn build(window: i64, inputs: &[(String, Vec<EventRecord>, Vec<EventRecord>)]) -> Self {
        let mut lenient = EventScores::default();
        let mut strict = EventScores::default();
        let mut matches = Vec::new();
        let mut sorted: Vec<_> = inputs.iter().collect();
        sorted.sort_by(|a, b| a.0.cmp(&b.0));
        for (id, r, g) in sorted {
            let l = match_events(r, g, MatchMode::Lenient, window);
            let s = match_events(r, g, MatchMode::Strict, window);
            lenient.merge(&l);
            strict.merge(&s);
            matches.push(MatchEventReport {
                match_id: id.clone(),
                lenient: l.summary(),
                strict: s.summary(),
            });
        }
        EventReport {
            window,
            lenient: lenient.summary(),
            strict: strict.summary(),
            matches,
        }
    }

    pub fn table(&self, mode: MatchMode) -> String {
        let summary = match mode {
            MatchMode::Lenient => &self.lenient,
            MatchMode::Strict => &self.strict,
        };
        let label = match mode {
            MatchMode::Lenient => "lenient",
            MatchMode::Strict => "strict",
        };
        let mut out = format!("{label} matching, window {} min\n", self.window);
        out.push_str(&format!(
            "{:<14} {:>6} {:>6} {:>8} {:>9} {:>9} {:>9}\n",
            "event", "# ref", "# gen", "matched", "P", "R", "F1"
        ));
        let rows = summary
            .per_kind
            .iter()
            .map(|(k, s)| (k.as_str(), s))
            .chain(std::iter::once(("total", &summary.total)));
        for (name, s) in rows {
            out.push_str(&format!(
                "{name:<14} {:>6} {:>6} {:>8} {:>9.3} {:>9.3} {:>9.3}\n",
                s.reference, s.generated, s.matched, s.precision, s.recall, s.f1
            ));
        }
        out
    }
}
