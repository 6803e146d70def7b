//! Aligned n-gram precision / recall / F1 between a generated and a
//! reference timeline.
//!
//! Both timelines share one minute axis. Cell `s[i][j]` of the score
//! matrix holds the clipped n-gram overlap between the generated update at
//! slot `i` and the reference update at slot `j`, and is zero whenever the
//! slots are more than one minute apart. A dynamic program then picks the
//! order-preserving one-to-one matching that maximizes the total overlap:
//!
//! ```text
//! D[i][j] = max(D[i-1][j], D[i][j-1], D[i-1][j-1] + s[i][j])
//! ```
//!
//! The optimum `D[m][n]` is the aligned n-gram count; precision divides it
//! by the generated n-gram total and recall by the reference total.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::types::Timeline;

/// Maximum `|i - j|` for a nonzero cell.
pub const BAND: usize = 1;

/// Largest dimension accepted by [`brute_force_align`].
pub const BRUTE_FORCE_MAX_DIM: usize = 8;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AlignError {
    #[error("timeline spans differ: generated {generated:?}, reference {reference:?}")]
    SpanMismatch {
        generated: Option<(i64, i64)>,
        reference: Option<(i64, i64)>,
    },
    #[error("matrix {rows}x{cols} exceeds the brute-force cap of {BRUTE_FORCE_MAX_DIM}")]
    TooLarge { rows: usize, cols: usize },
    #[error("matrix rows have unequal lengths")]
    Ragged,
    #[error("nonzero score at ({0}, {1}) lies outside the band")]
    OutOfBand(usize, usize),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenizerMode {
    /// Every non-whitespace Unicode scalar is a token.
    #[default]
    Char,
    /// Whitespace-separated words.
    #[serde(alias = "ws")]
    Whitespace,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default)]
pub struct TokenizerConfig {
    pub mode: TokenizerMode,
    pub ngram_n: usize,
    /// Applies to whitespace mode only.
    pub lowercase: bool,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        TokenizerConfig {
            mode: TokenizerMode::Char,
            ngram_n: 1,
            lowercase: true,
        }
    }
}

impl TokenizerConfig {
    pub fn chars(ngram_n: usize) -> Self {
        TokenizerConfig {
            ngram_n,
            ..Default::default()
        }
    }

    pub fn words(ngram_n: usize) -> Self {
        TokenizerConfig {
            mode: TokenizerMode::Whitespace,
            ngram_n,
            lowercase: true,
        }
    }
}

pub fn tokenize(text: &str, cfg: &TokenizerConfig) -> Vec<String> {
    match cfg.mode {
        TokenizerMode::Char => {
            let text = if cfg.lowercase {
                text.to_lowercase()
            } else {
                text.to_string()
            };
            text.chars()
                .filter(|c| !c.is_whitespace())
                .map(String::from)
                .collect()
        }
        TokenizerMode::Whitespace => text
            .split_whitespace()
            .map(|w| {
                if cfg.lowercase {
                    w.to_lowercase()
                } else {
                    w.to_string()
                }
            })
            .collect(),
    }
}

/// Multiset of n-grams.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NgramCounts(HashMap<Vec<String>, u64>);

impl NgramCounts {
    pub fn total(&self) -> u64 {
        self.0.values().sum()
    }

    pub fn get(&self, gram: &[&str]) -> u64 {
        let key: Vec<String> = gram.iter().map(|s| s.to_string()).collect();
        self.0.get(&key).copied().unwrap_or(0)
    }

    pub fn distinct(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// All contiguous n-grams with multiplicity; empty when `n` is zero or
/// exceeds the token count.
pub fn ngram_multiset(tokens: &[String], n: usize) -> NgramCounts {
    let mut counts = HashMap::new();
    if n > 0 {
        for gram in tokens.windows(n) {
            *counts.entry(gram.to_vec()).or_insert(0) += 1;
        }
    }
    NgramCounts(counts)
}

/// Clipped intersection size: `sum_k min(a[k], b[k])`.
pub fn overlap(a: &NgramCounts, b: &NgramCounts) -> u64 {
    let (small, large) = if a.0.len() <= b.0.len() {
        (a, b)
    } else {
        (b, a)
    };
    small
        .0
        .iter()
        .filter_map(|(k, &c)| large.0.get(k).map(|&d| c.min(d)))
        .sum()
}

fn text_ngrams(text: Option<&str>, cfg: &TokenizerConfig) -> NgramCounts {
    text.map(|t| ngram_multiset(&tokenize(t, cfg), cfg.ngram_n))
        .unwrap_or_default()
}

/// Banded overlap matrix between two timelines on the same minute axis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScoreMatrix {
    /// Row `i` is the generated slot, column `j` the reference slot.
    pub s: Vec<Vec<u64>>,
    /// Minute of each row.
    pub g_minutes: Vec<i64>,
    /// Minute of each column.
    pub r_minutes: Vec<i64>,
    /// N-gram count of each generated slot.
    pub gen_ngrams: Vec<u64>,
    /// N-gram count of each reference slot.
    pub ref_ngrams: Vec<u64>,
}

impl ScoreMatrix {
    /// Wraps raw scores (slot indices as minutes, zero totals). Rejects
    /// ragged input and nonzero cells outside the band.
    pub fn from_rows(s: Vec<Vec<u64>>) -> Result<Self, AlignError> {
        let cols = s.first().map_or(0, Vec::len);
        if s.iter().any(|r| r.len() != cols) {
            return Err(AlignError::Ragged);
        }
        for (i, row) in s.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0 && i.abs_diff(j) > BAND {
                    return Err(AlignError::OutOfBand(i, j));
                }
            }
        }
        let rows = s.len();
        Ok(ScoreMatrix {
            s,
            g_minutes: (0..rows as i64).collect(),
            r_minutes: (0..cols as i64).collect(),
            gen_ngrams: vec![0; rows],
            ref_ngrams: vec![0; cols],
        })
    }

    pub fn rows(&self) -> usize {
        self.s.len()
    }

    pub fn cols(&self) -> usize {
        self.s.first().map_or(0, Vec::len)
    }

    pub fn at(&self, i: usize, j: usize) -> u64 {
        self.s[i][j]
    }
}

/// Builds the score matrix. ABSENT slots have no n-grams, so their rows and
/// columns are zero.
pub fn build_score_matrix(
    generated: &Timeline,
    reference: &Timeline,
    tok: &TokenizerConfig,
) -> Result<ScoreMatrix, AlignError> {
    if generated.span() != reference.span() || !generated.is_dense() || !reference.is_dense() {
        return Err(AlignError::SpanMismatch {
            generated: generated.span(),
            reference: reference.span(),
        });
    }
    let gen: Vec<NgramCounts> = generated
        .entries
        .iter()
        .map(|u| text_ngrams(u.text(), tok))
        .collect();
    let refs: Vec<NgramCounts> = reference
        .entries
        .iter()
        .map(|u| text_ngrams(u.text(), tok))
        .collect();
    let n = gen.len();
    let mut s = vec![vec![0u64; n]; n];
    for (i, row) in s.iter_mut().enumerate() {
        for j in i.saturating_sub(BAND)..(i + BAND + 1).min(n) {
            row[j] = overlap(&gen[i], &refs[j]);
        }
    }
    Ok(ScoreMatrix {
        s,
        g_minutes: generated.entries.iter().map(|u| u.minute).collect(),
        r_minutes: reference.entries.iter().map(|u| u.minute).collect(),
        gen_ngrams: gen.iter().map(NgramCounts::total).collect(),
        ref_ngrams: refs.iter().map(NgramCounts::total).collect(),
    })
}

/// Optimal matching and the totals needed for precision and recall.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AlignmentResult {
    pub aligned: u64,
    /// Matched `(generated slot, reference slot)` pairs, increasing in both.
    pub pairs: Vec<(usize, usize)>,
    pub gen_total: u64,
    pub ref_total: u64,
}

impl AlignmentResult {
    pub fn prf(&self) -> Prf {
        prf(self.aligned, self.gen_total, self.ref_total)
    }
}

/// Maximum-weight order-preserving one-to-one matching.
///
/// Backtracking prefers the diagonal move when it is optimal and the cell
/// is positive, then skipping a generated slot, then skipping a reference
/// slot. Zero-weight cells are never reported as pairs.
pub fn align(m: &ScoreMatrix) -> AlignmentResult {
    let rows = m.rows();
    let cols = m.cols();
    let mut dp = vec![vec![0u64; cols + 1]; rows + 1];
    for i in 1..=rows {
        for j in 1..=cols {
            dp[i][j] = dp[i - 1][j]
                .max(dp[i][j - 1])
                .max(dp[i - 1][j - 1] + m.s[i - 1][j - 1]);
        }
    }

    let mut pairs = Vec::new();
    let (mut i, mut j) = (rows, cols);
    while i > 0 && j > 0 {
        let w = m.s[i - 1][j - 1];
        if w > 0 && dp[i][j] == dp[i - 1][j - 1] + w {
            pairs.push((i - 1, j - 1));
            i -= 1;
            j -= 1;
        } else if dp[i][j] == dp[i - 1][j] {
            i -= 1;
        } else {
            j -= 1;
        }
    }
    pairs.reverse();

    AlignmentResult {
        aligned: dp[rows][cols],
        pairs,
        gen_total: m.gen_ngrams.iter().sum(),
        ref_total: m.ref_ngrams.iter().sum(),
    }
}

/// Best total over every order-preserving one-to-one matching, by
/// enumeration: for each pair of equal-size row and column subsets there
/// is exactly one such matching (the k-th chosen row with the k-th chosen
/// column).
pub fn brute_force_align(m: &ScoreMatrix) -> Result<u64, AlignError> {
    let (rows, cols) = (m.rows(), m.cols());
    if rows > BRUTE_FORCE_MAX_DIM || cols > BRUTE_FORCE_MAX_DIM {
        return Err(AlignError::TooLarge { rows, cols });
    }
    let members =
        |mask: u32, n: usize| -> Vec<usize> { (0..n).filter(|&k| mask & (1 << k) != 0).collect() };
    let mut best = 0;
    for row_mask in 0u32..(1 << rows) {
        let chosen_rows = members(row_mask, rows);
        for col_mask in 0u32..(1 << cols) {
            if col_mask.count_ones() != row_mask.count_ones() {
                continue;
            }
            let chosen_cols = members(col_mask, cols);
            let total: u64 = chosen_rows
                .iter()
                .zip(&chosen_cols)
                .map(|(&i, &j)| m.s[i][j])
                .sum();
            best = best.max(total);
        }
    }
    Ok(best)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Ratios with zero-denominator cases mapped to zero.
pub fn prf(aligned: u64, gen_total: u64, ref_total: u64) -> Prf {
    let ratio = |n: u64, d: u64| if d == 0 { 0.0 } else { n as f64 / d as f64 };
    let precision = ratio(aligned, gen_total);
    let recall = ratio(aligned, ref_total);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Prf {
        precision,
        recall,
        f1,
    }
}

/// Evaluation of one match.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub match_id: String,
    pub n: usize,
    pub gen_total: u64,
    pub ref_total: u64,
    pub aligned: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub pairs: Vec<[usize; 2]>,
}

pub fn evaluate_match(
    match_id: &str,
    generated: &Timeline,
    reference: &Timeline,
    tok: &TokenizerConfig,
) -> Result<MatchReport, AlignError> {
    let matrix = build_score_matrix(generated, reference, tok)?;
    let result = align(&matrix);
    let Prf {
        precision,
        recall,
        f1,
    } = result.prf();
    Ok(MatchReport {
        match_id: match_id.to_string(),
        n: tok.ngram_n,
        gen_total: result.gen_total,
        ref_total: result.ref_total,
        aligned: result.aligned,
        precision,
        recall,
        f1,
        pairs: result.pairs.iter().map(|&(i, j)| [i, j]).collect(),
    })
}

/// Micro-averaged corpus report: counts are summed across matches before
/// the ratios are taken.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub n: usize,
    pub gen_total: u64,
    pub ref_total: u64,
    pub aligned: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub matches: Vec<MatchReport>,
}

impl CorpusReport {
    pub fn from_matches(n: usize, mut matches: Vec<MatchReport>) -> Self {
        matches.sort_by(|a, b| a.match_id.cmp(&b.match_id));
        let gen_total = matches.iter().map(|m| m.gen_total).sum();
        let ref_total = matches.iter().map(|m| m.ref_total).sum();
        let aligned = matches.iter().map(|m| m.aligned).sum();
        let Prf {
            precision,
            recall,
            f1,
        } = prf(aligned, gen_total, ref_total);
        CorpusReport {
            n,
            gen_total,
            ref_total,
            aligned,
            precision,
            recall,
            f1,
            matches,
        }
    }

    /// Fixed-width summary with the reference/generated/aligned counts and
    /// the three ratios.
    pub fn table(&self) -> String {
        let gram = match self.n {
            1 => "unigrams".to_string(),
            2 => "bigrams".to_string(),
            n => format!("{n}-grams"),
        };
        let mut out = format!(
            "{:<24} {:>12} {:>12} {:>12} {:>9} {:>9} {:>9}\n",
            "match",
            format!("# ref {gram}"),
            format!("# gen {gram}"),
            "# aligned",
            "P",
            "R",
            "F1"
        );
        let mut line = |name: &str, r: u64, g: u64, a: u64, p: f64, rc: f64, f: f64| {
            out.push_str(&format!(
                "{name:<24} {r:>12} {g:>12} {a:>12} {p:>9.3} {rc:>9.3} {f:>9.3}\n"
            ));
        };
        for m in &self.matches {
            line(
                &m.match_id,
                m.ref_total,
                m.gen_total,
                m.aligned,
                m.precision,
                m.recall,
                m.f1,
            );
        }
        line(
            "TOTAL (micro)",
            self.ref_total,
            self.gen_total,
            self.aligned,
            self.precision,
            self.recall,
            self.f1,
        );
        out
    }
}
