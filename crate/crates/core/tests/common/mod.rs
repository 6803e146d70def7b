//! Seeded fixture builders shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, FixedOffset};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use livetl::{MatchDataset, Timeline, Tweet};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub const VOCAB: &[&str] = &[
    "goal",
    "pass",
    "shot",
    "keeper",
    "cross",
    "corner",
    "foul",
    "save",
    "header",
    "offside",
    "ito",
    "tanaka",
    "suzuki",
    "kick",
    "ball",
    "wide",
    "post",
    "ゴール",
    "シュート",
    "パス",
    "コーナー",
    "ファウル",
    "決定機",
];

pub fn sentence(rng: &mut impl Rng, min_words: usize, max_words: usize) -> String {
    let n = rng.gen_range(min_words..=max_words);
    (0..n)
        .map(|_| *VOCAB.choose(rng).unwrap())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Raw tweet text: a sentence with occasional hashtags and links.
pub fn raw_tweet(rng: &mut impl Rng) -> String {
    let mut s = sentence(rng, 1, 8);
    if rng.gen_bool(0.3) {
        s.push_str(" #jleague");
    }
    if rng.gen_bool(0.2) {
        s.insert_str(0, "https://t.co/abc123 ");
    }
    s
}

pub fn kickoff() -> DateTime<FixedOffset> {
    DateTime::parse_from_rfc3339("2022-05-03T14:00:00+09:00").unwrap()
}

/// Dense timeline over `[start, start + len)` with updates at rate `p`.
pub fn random_timeline(rng: &mut impl Rng, start: i64, len: usize, p: f64) -> Timeline {
    Timeline::from_sparse(
        (0..len as i64).map(|k| (start + k, rng.gen_bool(p).then(|| sentence(rng, 1, 6)))),
    )
}

/// Match over minutes `0..minutes` with tweets from a few minutes before
/// kickoff to a few minutes past the end.
pub fn random_dataset(
    rng: &mut impl Rng,
    match_id: &str,
    minutes: usize,
    max_per_minute: usize,
    p: f64,
) -> MatchDataset {
    let mut reference = random_timeline(rng, 0, minutes, p);
    if reference.present_count() == 0 {
        reference.entries[0].text = Some(sentence(rng, 1, 4));
    }
    let mut tweets = Vec::new();
    for minute in -3..(minutes as i64 + 5) {
        for _ in 0..rng.gen_range(0..=max_per_minute) {
            tweets.push(Tweet::new(
                format!("{match_id}-{:05}", tweets.len()),
                minute,
                raw_tweet(rng),
            ));
        }
    }
    let mut d = MatchDataset {
        match_id: match_id.to_string(),
        kickoff: kickoff(),
        tweets,
        reference,
        hashtags: vec!["#jleague".into()],
    };
    d.sort_tweets();
    d
}

/// Nonzero entries only within `|i - j| <= 1`.
pub fn banded_matrix(rng: &mut impl Rng, rows: usize, cols: usize, max: u64) -> Vec<Vec<u64>> {
    (0..rows)
        .map(|i| {
            (0..cols)
                .map(|j| {
                    if i.abs_diff(j) <= 1 {
                        rng.gen_range(0..=max)
                    } else {
                        0
                    }
                })
                .collect()
        })
        .collect()
}

/// `tl` moved by `k` minutes on its own span; entries pushed past either end
/// are lost and vacated minutes become ABSENT.
pub fn shift(tl: &Timeline, k: i64) -> Timeline {
    let (first, last) = tl.span().expect("non-empty timeline");
    Timeline::from_sparse((first..=last).map(|m| (m, tl.text_at(m - k).map(str::to_string))))
}

/// Writes tweets, reference and match manifest under `dir/<match_id>/`.
pub fn write_match(dir: &Path, d: &MatchDataset) -> PathBuf {
    let mdir = dir.join(&d.match_id);
    fs::create_dir_all(&mdir).unwrap();
    let tweets: String = d
        .tweets
        .iter()
        .map(|t| json!({"id": t.id, "t": t.minute, "text": t.raw_text}).to_string() + "\n")
        .collect();
    fs::write(mdir.join("tweets.jsonl"), tweets).unwrap();
    fs::write(mdir.join("reference.jsonl"), d.reference.to_jsonl()).unwrap();
    let manifest = json!({
        "match_id": d.match_id,
        "kickoff": d.kickoff.to_rfc3339(),
        "hashtags": d.hashtags,
        "tweets": "tweets.jsonl",
        "reference": "reference.jsonl",
    });
    let path = mdir.join("manifest.json");
    fs::write(&path, serde_json::to_string_pretty(&manifest).unwrap()).unwrap();
    path
}

/// Writes `n` random matches and a run manifest whose fields are `extra`
/// merged over a low tweet-volume threshold.
pub fn write_corpus(dir: &Path, seed: u64, n: usize, minutes: usize, extra: Value) -> PathBuf {
    let mut rng = rng(seed);
    let mut matches = Vec::new();
    for k in 0..n {
        let d = random_dataset(&mut rng, &format!("m{k:02}"), minutes, 6, 0.4);
        write_match(dir, &d);
        matches.push(format!("{}/manifest.json", d.match_id));
    }
    let mut run = json!({
        "matches": matches,
        "ingest": {"min_tweets": 10},
        "out": "out",
    });
    if let (Some(run), Some(extra)) = (run.as_object_mut(), extra.as_object()) {
        for (k, v) in extra {
            run.insert(k.clone(), v.clone());
        }
    }
    let path = dir.join("run.json");
    fs::write(&path, serde_json::to_string_pretty(&run).unwrap()).unwrap();
    path
}

/// Clipped overlap of whitespace-token n-grams, lowercase.
pub fn word_ngram_overlap(a: &str, b: &str, n: usize) -> u64 {
    let grams = |s: &str| {
        let toks: Vec<String> = s.split_whitespace().map(str::to_lowercase).collect();
        let mut m: HashMap<Vec<String>, u64> = HashMap::new();
        if toks.len() >= n {
            for w in toks.windows(n) {
                *m.entry(w.to_vec()).or_default() += 1;
            }
        }
        m
    };
    let (ga, gb) = (grams(a), grams(b));
    ga.iter()
        .map(|(g, c)| (*c).min(gb.get(g).copied().unwrap_or(0)))
        .sum()
}

/// Best order-preserving one-to-one matching by memoized recursion over
/// "skip row / skip column / take cell".
pub fn exhaustive_alignment(s: &[Vec<u64>]) -> u64 {
    fn go(s: &[Vec<u64>], i: usize, j: usize, memo: &mut HashMap<(usize, usize), u64>) -> u64 {
        if i == s.len() || j == s[0].len() {
            return 0;
        }
        if let Some(&v) = memo.get(&(i, j)) {
            return v;
        }
        let take = s[i][j] + go(s, i + 1, j + 1, memo);
        let best = take.max(go(s, i + 1, j, memo)).max(go(s, i, j + 1, memo));
        memo.insert((i, j), best);
        best
    }
    if s.is_empty() || s[0].is_empty() {
        0
    } else {
        go(s, 0, 0, &mut HashMap::new())
    }
}

/// Size of a maximum bipartite matching, by augmenting paths.
pub fn max_bipartite(left: usize, right: usize, edge: impl Fn(usize, usize) -> bool) -> usize {
    fn augment(
        u: usize,
        right: usize,
        edge: &dyn Fn(usize, usize) -> bool,
        seen: &mut [bool],
        owner: &mut [Option<usize>],
    ) -> bool {
        for v in 0..right {
            if edge(u, v) && !seen[v] {
                seen[v] = true;
                if owner[v].is_none_or(|w| augment(w, right, edge, seen, owner)) {
                    owner[v] = Some(u);
                    return true;
                }
            }
        }
        false
    }
    let mut owner = vec![None; right];
    (0..left)
        .filter(|&u| augment(u, right, &edge, &mut vec![false; right], &mut owner))
        .count()
}
