//! Oracle extractive model: at each reference-present minute, return the
//! window tweet whose tokens best cover the reference update.

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::align::{ngram_multiset, overlap, tokenize, TokenizerConfig};
use crate::pipeline::{GenerationRequest, Generator, GeneratorError};
use crate::types::{MatchDataset, Tweet};

/// Denominator of the match fraction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchDenominator {
    /// Reference token count.
    #[default]
    Reference,
    /// Candidate tweet token count.
    Tweet,
    /// Size of the multiset union.
    Union,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleConfig {
    /// Word segmentation; only unigrams are used.
    pub tokenizer: TokenizerConfig,
    pub denominator: MatchDenominator,
}

/// Fraction of matching tokens between `tweet` and `reference`, as an exact
/// ratio `(numerator, denominator)`.
fn match_fraction(tweet: &str, reference: &str, cfg: &OracleConfig) -> (u64, u64) {
    let tok = TokenizerConfig {
        ngram_n: 1,
        ..cfg.tokenizer.clone()
    };
    let t = ngram_multiset(&tokenize(tweet, &tok), 1);
    let r = ngram_multiset(&tokenize(reference, &tok), 1);
    let shared = overlap(&t, &r);
    let denom = match cfg.denominator {
        MatchDenominator::Reference => r.total(),
        MatchDenominator::Tweet => t.total(),
        MatchDenominator::Union => t.total() + r.total() - shared,
    };
    (shared, denom)
}

fn cmp_fraction(a: (u64, u64), b: (u64, u64)) -> Ordering {
    // Zero denominators score 0.
    let norm = |(n, d): (u64, u64)| {
        if d == 0 {
            (0u128, 1u128)
        } else {
            (n as u128, d as u128)
        }
    };
    let (an, ad) = norm(a);
    let (bn, bd) = norm(b);
    (an * bd).cmp(&(bn * ad))
}

/// Text of the best-matching tweet, or `None` for an empty window.
///
/// Ties go to the earlier minute, then the lexicographically smaller id.
pub fn oracle_extract(
    req: &GenerationRequest<'_>,
    reference_text: &str,
    cfg: &OracleConfig,
) -> Option<String> {
    best_tweet(req.tweets, reference_text, cfg).map(|t| t.text.clone())
}

pub(crate) fn best_tweet<'a>(
    tweets: &'a [Tweet],
    reference_text: &str,
    cfg: &OracleConfig,
) -> Option<&'a Tweet> {
    tweets
        .iter()
        .map(|t| (match_fraction(&t.text, reference_text, cfg), t))
        .max_by(|(fa, ta), (fb, tb)| {
            cmp_fraction(*fa, *fb)
                .then_with(|| tb.minute.cmp(&ta.minute))
                .then_with(|| tb.id.cmp(&ta.id))
        })
        .map(|(_, t)| t)
}

/// [`oracle_extract`] bound to one match's reference timeline. Minutes
/// without a reference update yield ABSENT.
#[derive(Clone, Debug)]
pub struct OracleGenerator {
    reference: HashMap<i64, String>,
    cfg: OracleConfig,
}

impl OracleGenerator {
    pub fn new(d: &MatchDataset, cfg: OracleConfig) -> Self {
        OracleGenerator {
            reference: d
                .reference
                .present()
                .map(|u| (u.minute, u.text().unwrap_or_default().to_string()))
                .collect(),
            cfg,
        }
    }
}

impl Generator for OracleGenerator {
    fn generate(&mut self, req: &GenerationRequest<'_>) -> Result<Option<String>, GeneratorError> {
        Ok(self
            .reference
            .get(&req.minute)
            .and_then(|r| oracle_extract(req, r, &self.cfg)))
    }
}
