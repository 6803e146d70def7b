//! Archive parsing, tweet preprocessing and match-level filtering.
//!
//! Tweet archives are JSON Lines, one `{"id", "t" | "ts", "text"}` object
//! per line. Reference archives are JSON Lines of `{"minute", "text"}`
//! with `null` (or the string `"NaN"`) for minutes without an update.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use chrono::{DateTime, FixedOffset};
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::types::{normalize_update_text, MatchDataset, Timeline, Tweet};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("malformed record in {archive} archive at line {line}: {detail}")]
    MalformedRecord {
        archive: &'static str,
        line: usize,
        detail: String,
    },
    #[error("match {match_id} rejected: {surviving} tweets, need more than {min_tweets}")]
    Volume {
        match_id: String,
        surviving: usize,
        min_tweets: usize,
    },
    #[error("reference archive for {0} has no updates")]
    EmptyReference(String),
    #[error("invalid exclusion pattern {pattern:?}: {source}")]
    Pattern {
        pattern: String,
        #[source]
        source: regex::Error,
    },
    #[error("invalid manifest {path}: {detail}")]
    Manifest { path: PathBuf, detail: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl IngestError {
    /// Input problems (as opposed to datasets that parse fine but fail the
    /// volume filter).
    pub fn is_malformed(&self) -> bool {
        !matches!(self, IngestError::Volume { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct IngestConfig {
    /// A match is kept only with strictly more surviving tweets than this.
    pub min_tweets: usize,
    pub window_before_minutes: u32,
    pub window_after_minutes: u32,
    /// Regexes; a reference update matching any of them becomes ABSENT.
    /// Example rules: `"通算\\d+ゴール"`, `"(?i)lifetime"`.
    pub exclusion_patterns: Vec<String>,
    pub hashtag_strip: bool,
    pub url_strip: bool,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            min_tweets: 3200,
            window_before_minutes: 60,
            window_after_minutes: 60,
            exclusion_patterns: Vec::new(),
            hashtag_strip: true,
            url_strip: true,
        }
    }
}

fn url_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"https?://\S*").unwrap())
}

// `\w` is Unicode-aware: letters (kana and kanji included), digits, marks
// and `_`. Anything else ends the hashtag.
fn hashtag_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"[#＃]\w+").unwrap())
}

fn whitespace_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\s+").unwrap())
}

/// Removes URLs and hashtags, collapses whitespace and trims.
pub fn preprocess_text(raw: &str) -> String {
    preprocess_with(raw, true, true)
}

/// Removed spans are replaced with a space so that deleting one token
/// never splices its neighbours into a new URL or hashtag; that keeps the
/// function idempotent.
pub fn preprocess_with(raw: &str, strip_urls: bool, strip_hashtags: bool) -> String {
    let mut text = raw.to_string();
    if strip_urls {
        text = url_re().replace_all(&text, " ").into_owned();
    }
    if strip_hashtags {
        text = hashtag_re().replace_all(&text, " ").into_owned();
    }
    whitespace_re().replace_all(&text, " ").trim().to_string()
}

/// True when `text` still contains something [`preprocess_text`] removes.
pub fn contains_markup(text: &str) -> bool {
    url_re().is_match(text) || hashtag_re().is_match(text)
}

/// One tweet archive line as written by this crate: minute-relative form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub id: String,
    pub t: i64,
    pub text: String,
}

#[derive(Deserialize)]
struct RawTweetRecord {
    id: String,
    #[serde(default)]
    t: Option<i64>,
    #[serde(default)]
    ts: Option<String>,
    text: String,
}

/// Minute containing `ts`, relative to kickoff. Floors towards negative
/// infinity so that 30 seconds before kickoff is minute -1.
pub fn minute_from_timestamp(ts: DateTime<FixedOffset>, kickoff: DateTime<FixedOffset>) -> i64 {
    (ts - kickoff).num_milliseconds().div_euclid(60_000)
}

/// Parses one tweet archive line into its normalized minute-relative form.
pub fn parse_tweet_line(line: &str, kickoff: DateTime<FixedOffset>) -> Result<TweetRecord, String> {
    let raw: RawTweetRecord = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let t = match (raw.t, raw.ts) {
        (Some(t), _) => t,
        (None, Some(ts)) => {
            let ts =
                DateTime::parse_from_rfc3339(&ts).map_err(|e| format!("bad ts {ts:?}: {e}"))?;
            minute_from_timestamp(ts, kickoff)
        }
        (None, None) => return Err("record has neither \"t\" nor \"ts\"".into()),
    };
    Ok(TweetRecord {
        id: raw.id,
        t,
        text: raw.text,
    })
}

fn non_blank_lines<R: BufRead>(
    reader: R,
    archive: &'static str,
) -> impl Iterator<Item = Result<(usize, String), IngestError>> {
    reader
        .lines()
        .enumerate()
        .map(move |(k, line)| {
            line.map(|l| (k + 1, l))
                .map_err(|e| IngestError::MalformedRecord {
                    archive,
                    line: k + 1,
                    detail: e.to_string(),
                })
        })
        .filter(|r| !matches!(r, Ok((_, l)) if l.trim().is_empty()))
}

#[derive(Deserialize)]
struct ReferenceRecord {
    minute: i64,
    text: Option<String>,
}

/// Reads a reference archive into a dense timeline. Gaps become ABSENT;
/// a repeated minute is malformed.
pub fn read_reference<R: BufRead>(reader: R) -> Result<Timeline, IngestError> {
    let mut by_minute: BTreeMap<i64, Option<String>> = BTreeMap::new();
    for item in non_blank_lines(reader, "reference") {
        let (line, text) = item?;
        let rec: ReferenceRecord =
            serde_json::from_str(&text).map_err(|e| IngestError::MalformedRecord {
                archive: "reference",
                line,
                detail: e.to_string(),
            })?;
        if by_minute
            .insert(rec.minute, normalize_update_text(rec.text))
            .is_some()
        {
            return Err(IngestError::MalformedRecord {
                archive: "reference",
                line,
                detail: format!("duplicate minute {}", rec.minute),
            });
        }
    }
    Ok(Timeline::from_sparse(by_minute))
}

fn compile_patterns(patterns: &[String]) -> Result<Vec<Regex>, IngestError> {
    patterns
        .iter()
        .map(|p| {
            Regex::new(p).map_err(|source| IngestError::Pattern {
                pattern: p.clone(),
                source,
            })
        })
        .collect()
}

/// Replaces every reference update matching one of `patterns` with ABSENT.
pub fn apply_exclusions(
    reference: &mut Timeline,
    patterns: &[String],
) -> Result<usize, IngestError> {
    let compiled = compile_patterns(patterns)?;
    let mut excluded = 0;
    for u in &mut reference.entries {
        if u.text
            .as_deref()
            .is_some_and(|t| compiled.iter().any(|re| re.is_match(t)))
        {
            u.text = None;
            excluded += 1;
        }
    }
    Ok(excluded)
}

/// Identifying metadata for one match.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchMeta {
    pub match_id: String,
    pub kickoff: DateTime<FixedOffset>,
    pub hashtags: Vec<String>,
}

/// Parses both archives, preprocesses and filters tweets, applies reference
/// exclusions and the volume threshold.
pub fn load_match<T: BufRead, R: BufRead>(
    meta: MatchMeta,
    tweet_archive: T,
    reference_archive: R,
    cfg: &IngestConfig,
) -> Result<MatchDataset, IngestError> {
    let mut reference = read_reference(reference_archive)?;
    let end = reference
        .end_minute()
        .ok_or_else(|| IngestError::EmptyReference(meta.match_id.clone()))?;
    apply_exclusions(&mut reference, &cfg.exclusion_patterns)?;

    let lo = -i64::from(cfg.window_before_minutes);
    let hi = end + i64::from(cfg.window_after_minutes);
    let mut tweets = Vec::new();
    for item in non_blank_lines(tweet_archive, "tweet") {
        let (line, text) = item?;
        let rec = parse_tweet_line(&text, meta.kickoff).map_err(|detail| {
            IngestError::MalformedRecord {
                archive: "tweet",
                line,
                detail,
            }
        })?;
        if rec.t < lo || rec.t > hi {
            continue;
        }
        tweets.push(Tweet {
            text: preprocess_with(&rec.text, cfg.url_strip, cfg.hashtag_strip),
            id: rec.id,
            minute: rec.t,
            raw_text: rec.text,
        });
    }

    if tweets.len() <= cfg.min_tweets {
        return Err(IngestError::Volume {
            match_id: meta.match_id,
            surviving: tweets.len(),
            min_tweets: cfg.min_tweets,
        });
    }

    let mut dataset = MatchDataset {
        match_id: meta.match_id,
        kickoff: meta.kickoff,
        tweets,
        reference,
        hashtags: meta.hashtags,
    };
    dataset.sort_tweets();
    Ok(dataset)
}

/// Partitions tweets by minute, keeping their relative order.
pub fn bucket_by_minute(tweets: &[Tweet]) -> BTreeMap<i64, Vec<&Tweet>> {
    let mut buckets: BTreeMap<i64, Vec<&Tweet>> = BTreeMap::new();
    for t in tweets {
        buckets.entry(t.minute).or_default().push(t);
    }
    buckets
}

/// Tweet count per minute.
pub fn minute_counts(tweets: &[Tweet]) -> BTreeMap<i64, usize> {
    let mut counts = BTreeMap::new();
    for t in tweets {
        *counts.entry(t.minute).or_insert(0) += 1;
    }
    counts
}

/// On-disk match manifest. Archive paths are relative to the manifest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchManifest {
    pub match_id: String,
    pub kickoff: DateTime<FixedOffset>,
    #[serde(default)]
    pub hashtags: Vec<String>,
    pub tweets: PathBuf,
    pub reference: PathBuf,
}

impl MatchManifest {
    pub fn load(path: &Path) -> Result<Self, IngestError> {
        let text = std::fs::read_to_string(path).map_err(|source| IngestError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut m: MatchManifest =
            serde_json::from_str(&text).map_err(|e| IngestError::Manifest {
                path: path.to_path_buf(),
                detail: e.to_string(),
            })?;
        let base = path.parent().unwrap_or(Path::new("."));
        m.tweets = base.join(&m.tweets);
        m.reference = base.join(&m.reference);
        Ok(m)
    }

    pub fn meta(&self) -> MatchMeta {
        MatchMeta {
            match_id: self.match_id.clone(),
            kickoff: self.kickoff,
            hashtags: self.hashtags.clone(),
        }
    }

    fn open(path: &Path) -> Result<BufReader<File>, IngestError> {
        File::open(path)
            .map(BufReader::new)
            .map_err(|source| IngestError::Io {
                path: path.to_path_buf(),
                source,
            })
    }

    pub fn load_dataset(&self, cfg: &IngestConfig) -> Result<MatchDataset, IngestError> {
        load_match(
            self.meta(),
            Self::open(&self.tweets)?,
            Self::open(&self.reference)?,
            cfg,
        )
    }

    /// Reference timeline only, with exclusions applied.
    pub fn load_reference(&self, cfg: &IngestConfig) -> Result<Timeline, IngestError> {
        let mut tl = read_reference(Self::open(&self.reference)?)?;
        apply_exclusions(&mut tl, &cfg.exclusion_patterns)?;
        Ok(tl)
    }
}
