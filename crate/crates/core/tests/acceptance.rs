//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line whether or not it fails.

mod common;

use std::collections::BTreeMap;
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;

use rand::Rng;

use common::*;
use livetl::align::{align, brute_force_align, build_score_matrix, ScoreMatrix};
use livetl::cli::{self, Overrides, RunManifest};
use livetl::events::{match_events, DEFAULT_WINDOW};
use livetl::generators::{oracle_extract, OracleConfig, OracleGenerator};
use livetl::pipeline::{reference_presence_gate, run_match, GeneratorError};
use livetl::{
    prf, ContextSource, Decision, EventKind, EventRecord, Gate, GenerationRequest, Generator,
    MatchDataset, MatchMode, PipelineConfig, Prf, Timeline, TokenizerConfig, Tweet, Variant,
};

type Check = fn() -> Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
}

// ---------------------------------------------------------------------------

/// (label, aligned, generated, reference, reported P, R, F1)
type Row = (&'static str, u64, u64, u64, f64, f64, f64);

const UNIGRAM_REF: u64 = 164_245;
const BIGRAM_REF: u64 = 159_605;

#[allow(clippy::approx_constant)]
const REPORTED: [Row; 12] = [
    (
        "unigram base",
        19585,
        49088,
        UNIGRAM_REF,
        0.401,
        0.118,
        0.182,
    ),
    (
        "unigram clf",
        42199,
        129387,
        UNIGRAM_REF,
        0.326,
        0.255,
        0.286,
    ),
    (
        "unigram cxt",
        41639,
        107049,
        UNIGRAM_REF,
        0.389,
        0.251,
        0.305,
    ),
    (
        "unigram clf+cxt",
        43074,
        137072,
        UNIGRAM_REF,
        0.318,
        0.260,
        0.284,
    ),
    (
        "unigram oracle extractive",
        33159,
        109046,
        UNIGRAM_REF,
        0.304,
        0.200,
        0.241,
    ),
    (
        "unigram oracle+clf+cxt",
        51487,
        134598,
        UNIGRAM_REF,
        0.382,
        0.311,
        0.343,
    ),
    ("bigram base", 8825, 46505, BIGRAM_REF, 0.192, 0.055, 0.085),
    ("bigram clf", 16160, 123680, BIGRAM_REF, 0.130, 0.101, 0.114),
    ("bigram cxt", 16309, 102739, BIGRAM_REF, 0.156, 0.100, 0.122),
    (
        "bigram clf+cxt",
        15752,
        131441,
        BIGRAM_REF,
        0.121,
        0.098,
        0.108,
    ),
    (
        "bigram oracle extractive",
        3447,
        103406,
        BIGRAM_REF,
        0.033,
        0.021,
        0.026,
    ),
    (
        "bigram oracle+clf+cxt",
        20764,
        128958,
        BIGRAM_REF,
        0.161,
        0.130,
        0.143,
    ),
];

const TOLERANCE: f64 = 0.005;

fn metric_arithmetic() -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for &(label, a, g, r, p0, r0, f0) in &REPORTED {
        let Prf {
            precision,
            recall,
            f1,
        } = prf(a, g, r);
        // Independent recomputation from the definitions.
        let p1 = a as f64 / g as f64;
        let r1 = a as f64 / r as f64;
        let f1_direct = 2.0 * a as f64 / (g + r) as f64;
        ensure!(
            (precision - p1).abs() < 1e-12
                && (recall - r1).abs() < 1e-12
                && (f1 - f1_direct).abs() < 1e-12,
            "{label}: prf disagrees with direct arithmetic"
        );
        for (name, got, want) in [("P", precision, p0), ("R", recall, r0), ("F1", f1, f0)] {
            let d = (got - want).abs();
            worst = worst.max(d);
            ensure!(
                d <= TOLERANCE,
                "{label} {name}: {got:.4} vs reported {want:.3} (|d| = {d:.4})"
            );
        }
    }
    Ok(format!("12 rows, max |d| = {worst:.4} <= {TOLERANCE}"))
}

// ---------------------------------------------------------------------------

fn dp_vs_brute_force() -> Result<String, String> {
    let mut rng = rng(0xA11C);
    let cases = 10_000;
    for case in 0..cases {
        let (rows, cols) = (rng.gen_range(1..=6), rng.gen_range(1..=6));
        let s = banded_matrix(&mut rng, rows, cols, 9);
        let m = ScoreMatrix::from_rows(s.clone()).map_err(|e| e.to_string())?;
        let dp = align(&m);
        let brute = brute_force_align(&m).map_err(|e| e.to_string())?;
        let exhaustive = exhaustive_alignment(&s);
        ensure!(
            dp.aligned == brute && brute == exhaustive,
            "case {case}: dp {} brute {brute} exhaustive {exhaustive} on {s:?}",
            dp.aligned
        );
        let pair_sum: u64 = dp.pairs.iter().map(|&(i, j)| s[i][j]).sum();
        ensure!(
            pair_sum == dp.aligned,
            "case {case}: pairs sum {pair_sum} != {}",
            dp.aligned
        );
        ensure!(
            dp.pairs
                .windows(2)
                .all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1),
            "case {case}: pairs not strictly increasing {:?}",
            dp.pairs
        );
    }
    Ok(format!(
        "{cases} banded matrices up to 6x6, entries 0-9, all equal"
    ))
}

// ---------------------------------------------------------------------------

/// Random timeline with the two minutes at each end ABSENT, so shifts of up
/// to two minutes lose nothing.
fn padded_timeline(rng: &mut impl Rng, unique_tokens: bool) -> Timeline {
    let len = rng.gen_range(6..=30);
    Timeline::from_sparse((0..len as i64).map(|m| {
        let edge = m < 2 || m >= len as i64 - 2;
        let text = (!edge && rng.gen_bool(0.5)).then(|| {
            if unique_tokens {
                let k = rng.gen_range(1..=5);
                (0..k)
                    .map(|w| format!("u{m}w{w}"))
                    .collect::<Vec<_>>()
                    .join(" ")
            } else {
                sentence(rng, 1, 6)
            }
        });
        (m, text)
    }))
}

fn shift_tolerance() -> Result<String, String> {
    let mut rng = rng(0x5EED);
    let fixtures = 1_000;
    let toks = [
        TokenizerConfig::chars(1),
        TokenizerConfig::chars(2),
        TokenizerConfig::words(1),
        TokenizerConfig::words(2),
    ];
    for case in 0..fixtures {
        let tok = &toks[case % toks.len()];
        let reference = padded_timeline(&mut rng, false);
        let aligned_at = |k: i64| -> Result<(u64, ScoreMatrix), String> {
            let m = build_score_matrix(&shift(&reference, k), &reference, tok)
                .map_err(|e| e.to_string())?;
            Ok((align(&m).aligned, m))
        };
        let (identity, m0) = aligned_at(0)?;
        let total: u64 = m0.ref_ngrams.iter().sum();
        ensure!(
            identity == total,
            "case {case}: identity aligned {identity} != total {total}"
        );
        for k in [-1, 1] {
            let (a, _) = aligned_at(k)?;
            ensure!(
                a == identity,
                "case {case}: shift {k} aligned {a} != identity {identity}"
            );
        }
        for k in [-2, 2] {
            let (a, m) = aligned_at(k)?;
            for i in 0..m.rows() {
                for j in 0..m.cols() {
                    ensure!(
                        i.abs_diff(j) <= 1 || m.at(i, j) == 0,
                        "case {case}: out-of-band cell ({i},{j})"
                    );
                }
            }
            if tok.mode == livetl::TokenizerMode::Whitespace {
                // Independent in-band-only optimum from raw text.
                let g = shift(&reference, k);
                let s: Vec<Vec<u64>> = g
                    .entries
                    .iter()
                    .enumerate()
                    .map(|(i, gu)| {
                        reference
                            .entries
                            .iter()
                            .enumerate()
                            .map(|(j, ru)| match (gu.text(), ru.text()) {
                                (Some(a), Some(b)) if i.abs_diff(j) <= 1 => {
                                    word_ngram_overlap(a, b, tok.ngram_n)
                                }
                                _ => 0,
                            })
                            .collect()
                    })
                    .collect();
                let banded = exhaustive_alignment(&s);
                ensure!(
                    a == banded,
                    "case {case}: shift {k} aligned {a} != in-band optimum {banded}"
                );
            }
        }
        // Disjoint vocabulary per update: a two-minute shift leaves nothing.
        let unique = padded_timeline(&mut rng, true);
        for k in [-2, 2] {
            let m = build_score_matrix(&shift(&unique, k), &unique, &TokenizerConfig::words(1))
                .map_err(|e| e.to_string())?;
            let r = align(&m);
            ensure!(
                r.aligned == 0 && r.pairs.is_empty(),
                "case {case}: unique shift {k} aligned {}",
                r.aligned
            );
        }
    }
    Ok(format!(
        "{fixtures} timelines; +/-1 equals identity, +/-2 contributes nothing outside the band"
    ))
}

// ---------------------------------------------------------------------------

/// (minute, tweet ids, context entries) of one request.
type Logged = (i64, Vec<String>, Vec<(i64, String)>);

#[derive(Default)]
struct Recorder {
    requests: Vec<Logged>,
}

impl Recorder {
    fn record(&mut self, req: &GenerationRequest<'_>) {
        self.requests.push((
            req.minute,
            req.tweets.iter().map(|t| t.id.clone()).collect(),
            req.context
                .iter()
                .map(|c| (c.minute, c.text.clone()))
                .collect(),
        ));
    }
}

impl Generator for Recorder {
    fn generate(&mut self, req: &GenerationRequest<'_>) -> Result<Option<String>, GeneratorError> {
        self.record(req);
        Ok((req.minute % 3 != 0).then(|| format!("upd {} {}", req.minute, req.tweets.len())))
    }
}

struct ParityGate(Recorder);

impl Gate for ParityGate {
    fn decide(&mut self, req: &GenerationRequest<'_>) -> Result<Decision, GeneratorError> {
        self.0.record(req);
        Ok(if req.minute % 2 == 0 && req.minute % 3 != 0 {
            Decision::Yes
        } else {
            Decision::No
        })
    }
}

fn check_requests(
    d: &MatchDataset,
    log: &[Logged],
    la: i64,
    lb: i64,
    context: Option<&Timeline>,
) -> Result<(), String> {
    for (t, ids, ctx) in log {
        let want: Vec<String> = d
            .tweets
            .iter()
            .filter(|tw| tw.minute >= *t && tw.minute <= t + la)
            .map(|tw| tw.id.clone())
            .collect();
        ensure!(
            *ids == want,
            "minute {t} la {la}: tweets {ids:?} != window {want:?}"
        );
        let want_ctx: Vec<(i64, String)> = match context {
            Some(src) => (t - lb..*t)
                .filter_map(|m| src.text_at(m).map(|x| (m, x.to_string())))
                .collect(),
            None => vec![],
        };
        ensure!(
            *ctx == want_ctx,
            "minute {t} lb {lb}: context {ctx:?} != {want_ctx:?}"
        );
    }
    Ok(())
}

fn window_boundaries() -> Result<String, String> {
    let mut rng = rng(0xB0B);
    let fixtures = 1_000;
    let mut requests = 0usize;
    for case in 0..fixtures {
        let minutes = rng.gen_range(1..=14);
        let d = random_dataset(&mut rng, &format!("w{case}"), minutes, 3, 0.5);
        for la in 0..=5u32 {
            for lb in 1..=6u32 {
                let cfg = |variant, source| PipelineConfig {
                    variant,
                    tweet_lookahead_minutes: la,
                    context_lookback_minutes: lb,
                    context_source: source,
                };
                let (la, lb) = (i64::from(la), i64::from(lb));

                let mut g = Recorder::default();
                let out = run_match(
                    &d,
                    &cfg(Variant::Cxt, ContextSource::Generated),
                    &mut g,
                    None,
                )
                .map_err(|e| e.to_string())?;
                check_requests(&d, &g.requests, la, lb, Some(&out))
                    .map_err(|e| format!("case {case} cxt: {e}"))?;
                requests += g.requests.len();

                let mut g = Recorder::default();
                let mut gate = ParityGate(Recorder::default());
                run_match(
                    &d,
                    &cfg(Variant::ClfCxt, ContextSource::Reference),
                    &mut g,
                    Some(&mut gate),
                )
                .map_err(|e| e.to_string())?;
                check_requests(&d, &g.requests, la, lb, Some(&d.reference))
                    .map_err(|e| format!("case {case} clf+cxt: {e}"))?;
                check_requests(&d, &gate.0.requests, la, lb, Some(&d.reference))
                    .map_err(|e| format!("case {case} gate: {e}"))?;
                requests += g.requests.len() + gate.0.requests.len();

                let mut g = Recorder::default();
                run_match(
                    &d,
                    &cfg(Variant::Base, ContextSource::Generated),
                    &mut g,
                    None,
                )
                .map_err(|e| e.to_string())?;
                check_requests(&d, &g.requests, la, lb, None)
                    .map_err(|e| format!("case {case} base: {e}"))?;
                requests += g.requests.len();
            }
        }
    }
    Ok(format!(
        "{fixtures} fixtures x lookahead 0..5 x lookback 1..6, {requests} requests, none outside the windows"
    ))
}

// ---------------------------------------------------------------------------

/// True when every character of `reference` occurs at least as often in
/// `tweet` (lowercase, whitespace ignored), i.e. the tweet would score a
/// perfect match and could tie with the planted one.
fn covers(tweet: &str, reference: &str) -> bool {
    let counts = |s: &str| {
        let mut m: BTreeMap<char, usize> = BTreeMap::new();
        for c in s.to_lowercase().chars().filter(|c| !c.is_whitespace()) {
            *m.entry(c).or_default() += 1;
        }
        m
    };
    let (t, r) = (counts(tweet), counts(reference));
    r.iter().all(|(c, n)| t.get(c).copied().unwrap_or(0) >= *n)
}

/// A dataset where every reference update is planted verbatim as one tweet
/// inside its own window and no other tweet in that window could tie.
fn planted_dataset(rng: &mut impl Rng, id: &str) -> MatchDataset {
    loop {
        let minutes = rng.gen_range(3..=20);
        let mut d = random_dataset(rng, id, minutes, 3, 0.4);
        let updates: Vec<(i64, String)> = d
            .reference
            .present()
            .map(|u| (u.minute, u.text().unwrap().to_string()))
            .collect();
        let mut planted = Vec::new();
        for (k, (t, text)) in updates.iter().enumerate() {
            planted.push(Tweet::new(
                format!("{id}-planted-{k}"),
                t + rng.gen_range(0..=3),
                text.clone(),
            ));
        }
        d.tweets.retain(|tw| {
            !updates
                .iter()
                .any(|(t, text)| tw.minute >= *t && tw.minute <= t + 3 && covers(&tw.text, text))
        });
        let clash = planted.iter().enumerate().any(|(k, p)| {
            updates.iter().enumerate().any(|(k2, (t, text))| {
                k2 != k && p.minute >= *t && p.minute <= t + 3 && covers(&p.text, text)
            })
        });
        if clash {
            continue;
        }
        d.tweets.extend(planted);
        d.sort_tweets();
        return d;
    }
}

fn oracle_correctness() -> Result<String, String> {
    let mut rng = rng(0x0AC1E);
    let fixtures = 1_000;
    let mut selections = 0;
    let cfg = OracleConfig::default();
    let pipeline = PipelineConfig::with_variant(Variant::Clf);
    for case in 0..fixtures {
        let d = planted_dataset(&mut rng, &format!("o{case}"));
        for u in d.reference.present() {
            let req =
                livetl::pipeline::build_request(&d, u.minute, &pipeline, &Timeline::default());
            let got = oracle_extract(&req, u.text().unwrap(), &cfg);
            ensure!(
                got.as_deref() == u.text(),
                "case {case} minute {}: picked {got:?}, planted {:?}",
                u.minute,
                u.text()
            );
            selections += 1;
        }
        let mut generator = OracleGenerator::new(&d, cfg.clone());
        let mut gate = reference_presence_gate(&d);
        let out = run_match(&d, &pipeline, &mut generator, Some(&mut gate))
            .map_err(|e| format!("case {case}: {e}"))?;
        ensure!(
            out.present_count() == d.reference.present_count(),
            "case {case}: {} generated vs {} reference updates",
            out.present_count(),
            d.reference.present_count()
        );
        ensure!(
            out == d.reference,
            "case {case}: gated oracle timeline differs from the reference"
        );
    }
    Ok(format!(
        "{selections} planted selections over {fixtures} matches; gated update counts equal"
    ))
}

// ---------------------------------------------------------------------------

fn run_and_eval(
    run_manifest: &Path,
    out: &Path,
    jobs: usize,
) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut m = RunManifest::load(run_manifest).map_err(|e| e.to_string())?;
    Overrides {
        out: Some(out.join("gen")),
        jobs: Some(jobs),
        ..Default::default()
    }
    .apply(&mut m);
    cli::cmd_run(&m).map_err(|e| e.to_string())?;
    let mut sink = Vec::new();
    cli::cmd_eval(&m, &out.join("gen"), Some(&out.join("eval")), &mut sink)
        .map_err(|e| e.to_string())?;
    m.tokenizer = TokenizerConfig::chars(2);
    cli::cmd_eval(&m, &out.join("gen"), Some(&out.join("eval")), &mut sink)
        .map_err(|e| e.to_string())?;
    let mut files = Vec::new();
    for sub in ["gen", "eval"] {
        let mut names: Vec<_> = fs::read_dir(out.join(sub))
            .map_err(|e| e.to_string())?
            .map(|e| e.unwrap().path())
            .collect();
        names.sort();
        for p in names {
            files.push((
                format!("{sub}/{}", p.file_name().unwrap().to_string_lossy()),
                fs::read(&p).unwrap(),
            ));
        }
    }
    files.push(("stdout".into(), sink));
    Ok(files)
}

fn determinism() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let configs = [
        serde_json::json!({"pipeline": {"variant": "cxt"}, "generator": {"kind": "echo"}}),
        serde_json::json!({"pipeline": {"variant": "clf_cxt"}, "generator": {"kind": "oracle"}, "gate": {"kind": "reference"}}),
        serde_json::json!({"pipeline": {"variant": "clf"}, "generator": {"kind": "echo"}, "gate": {"kind": "burst", "burst": {"min_count": 2}}}),
    ];
    let mut compared = 0;
    for (k, extra) in configs.into_iter().enumerate() {
        let base = dir.path().join(format!("c{k}"));
        let manifest = write_corpus(&base, 77 + k as u64, 5, 25, extra);
        let a = run_and_eval(&manifest, &base.join("a"), 1)?;
        let b = run_and_eval(&manifest, &base.join("b"), 4)?;
        ensure!(
            a.len() == b.len(),
            "config {k}: {} vs {} output files",
            a.len(),
            b.len()
        );
        for ((na, ba), (nb, bb)) in a.iter().zip(&b) {
            ensure!(na == nb && ba == bb, "config {k}: {na} differs from {nb}");
        }
        ensure!(
            a.iter().any(|(n, _)| n == "gen/provenance.json"),
            "config {k}: no provenance written"
        );
        compared += a.len();
    }
    Ok(format!(
        "3 configurations, {compared} files byte-identical across two runs (1 and 4 workers)"
    ))
}

// ---------------------------------------------------------------------------

const NAMES: &[&str] = &["Ito", "ito", "Tanaka", "Suzuki", "Kato"];

fn random_event(rng: &mut impl Rng) -> EventRecord {
    let kind = EventKind::ALL[rng.gen_range(0..3)];
    let mut e = EventRecord::new(rng.gen_range(0..30), kind);
    for key in kind.attr_keys() {
        if rng.gen_bool(0.85) {
            let v = if *key == "card_type" {
                ["yellow", "red", "Yellow"][rng.gen_range(0..3)]
            } else {
                NAMES[rng.gen_range(0..NAMES.len())]
            };
            e = e.with(key, v);
        }
    }
    e
}

fn strict_key(e: &EventRecord) -> Option<Vec<String>> {
    e.kind
        .attr_keys()
        .iter()
        .map(|k| {
            e.attr(k)
                .map(|v| v.trim().to_lowercase())
                .filter(|v| !v.is_empty())
        })
        .collect()
}

fn oracle_matched(
    r: &[EventRecord],
    g: &[EventRecord],
    kind: EventKind,
    strict: bool,
    window: i64,
) -> usize {
    let r: Vec<_> = r.iter().filter(|e| e.kind == kind).collect();
    let g: Vec<_> = g.iter().filter(|e| e.kind == kind).collect();
    max_bipartite(r.len(), g.len(), |i, j| {
        (r[i].minute - g[j].minute).abs() <= window
            && (!strict || (strict_key(r[i]).is_some() && strict_key(r[i]) == strict_key(g[j])))
    })
}

fn event_properties() -> Result<String, String> {
    let mut rng = rng(0xE7E7);
    let fixtures = 1_000;
    let w = DEFAULT_WINDOW;
    for case in 0..fixtures {
        let r: Vec<_> = (0..rng.gen_range(0..12))
            .map(|_| random_event(&mut rng))
            .collect();
        let g: Vec<_> = (0..rng.gen_range(0..12))
            .map(|_| random_event(&mut rng))
            .collect();
        let lenient = match_events(&r, &g, MatchMode::Lenient, w);
        let strict = match_events(&r, &g, MatchMode::Strict, w);
        for kind in EventKind::ALL {
            let (l, s) = (lenient.kind(kind), strict.kind(kind));
            ensure!(
                l.matched == oracle_matched(&r, &g, kind, false, w)
                    && s.matched == oracle_matched(&r, &g, kind, true, w),
                "case {case} {kind:?}: matched {}/{} vs maximum matching",
                l.matched,
                s.matched
            );
        }
        let pairs = EventKind::ALL
            .iter()
            .map(|&k| (lenient.kind(k), strict.kind(k)))
            .chain([(lenient.total(), strict.total())]);
        for (l, s) in pairs {
            let (lp, sp) = (l.prf(), s.prf());
            ensure!(
                s.matched <= l.matched
                    && sp.precision <= lp.precision
                    && sp.recall <= lp.recall
                    && sp.f1 <= lp.f1,
                "case {case}: strict {s:?} exceeds lenient {l:?}"
            );
        }
    }
    let boundary = |delta: i64, mode| -> usize {
        EventKind::ALL
            .iter()
            .map(|&kind| {
                let mut e = EventRecord::new(40, kind);
                for key in kind.attr_keys() {
                    e = e.with(key, if *key == "card_type" { "red" } else { "Ito" });
                }
                let mut moved = e.clone();
                moved.minute += delta;
                match_events(&[e], &[moved], mode, w).total().matched
            })
            .sum()
    };
    for mode in [MatchMode::Lenient, MatchMode::Strict] {
        for delta in [-2, 2] {
            ensure!(boundary(delta, mode) == 3, "{mode:?}: |d|=2 did not match");
        }
        for delta in [-3, 3] {
            ensure!(boundary(delta, mode) == 0, "{mode:?}: |d|=3 matched");
        }
    }
    Ok(format!(
        "{fixtures} fixtures STRICT <= LENIENT on every score; |d|=2 matches, |d|=3 does not"
    ))
}

// ---------------------------------------------------------------------------

fn main() -> ExitCode {
    let checks: [(&str, Check); 7] = [
        ("metric arithmetic on reported counts", metric_arithmetic),
        ("alignment DP equals brute force", dp_vs_brute_force),
        ("shift tolerance", shift_tolerance),
        ("tweet and context window boundaries", window_boundaries),
        ("oracle extraction and presence gate", oracle_correctness),
        ("run and eval determinism", determinism),
        ("event matching properties", event_properties),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check) in checks {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
