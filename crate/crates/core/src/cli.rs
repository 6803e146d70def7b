//! Batch commands behind the `livetl` binary: ingest, run, eval, events.
//!
//! Every command takes a manifest. A run manifest lists match manifests
//! and the run configuration; a bare match manifest is accepted wherever a
//! run manifest is, with default configuration.
//!
//! Exit codes: 0 success, 1 usage or I/O problem, 2 malformed input,
//! 3 generator failure, 4 timeline span mismatch.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::align::{evaluate_match, AlignError, CorpusReport, TokenizerConfig};
use crate::events::{
    extract_events, EventPatternSet, EventReport, MatchMode, PatternError, DEFAULT_WINDOW,
};
use crate::generators::{
    BridgeConfig, BridgeGate, BridgeGenerator, BurstGate, BurstGateConfig, EchoGenerator,
    OracleConfig, OracleGenerator,
};
use crate::ingest::{read_reference, IngestConfig, IngestError, MatchManifest};
use crate::pipeline::{reference_presence_gate, run_match, Gate, Generator, PipelineError};
use crate::types::{validate_dataset_with_window, MatchDataset, PipelineConfig, Timeline};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_MALFORMED: i32 = 2;
pub const EXIT_GENERATOR: i32 = 3;
pub const EXIT_SPAN: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("match {match_id}: {source}")]
    MatchIngest {
        match_id: String,
        #[source]
        source: IngestError,
    },
    #[error("{path}: {detail}")]
    Malformed { path: PathBuf, detail: String },
    #[error("match {match_id}: {source}")]
    Generator {
        match_id: String,
        #[source]
        source: PipelineError,
    },
    #[error("match {match_id}: {source}")]
    Span {
        match_id: String,
        #[source]
        source: AlignError,
    },
    #[error(transparent)]
    Patterns(#[from] PatternError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => EXIT_USAGE,
            CliError::Ingest(e) | CliError::MatchIngest { source: e, .. } if !e.is_malformed() => {
                EXIT_USAGE
            }
            CliError::MatchIngest { .. } => EXIT_MALFORMED,
            CliError::Ingest(_) | CliError::Malformed { .. } | CliError::Patterns(_) => {
                EXIT_MALFORMED
            }
            CliError::Generator { .. } => EXIT_GENERATOR,
            CliError::Span { .. } => EXIT_SPAN,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// How each match's generator is built.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSpec {
    /// First tweet of the window.
    #[default]
    Echo,
    /// Oracle extractive model over the reference updates.
    Oracle {
        #[serde(default)]
        oracle: OracleConfig,
    },
    /// External model over the bridge protocol.
    Bridge { bridge: BridgeConfig },
}

/// Gate used by the gated variants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GateSpec {
    /// YES exactly at reference-present minutes.
    Reference,
    /// Tweet-volume spikes.
    Burst {
        #[serde(default)]
        burst: BurstGateConfig,
    },
    /// External classifier.
    Bridge { bridge: BridgeConfig },
}

impl GateSpec {
    /// Default gate for a generator when none is configured.
    pub fn default_for(generator: &GeneratorSpec) -> Self {
        match generator {
            GeneratorSpec::Echo => GateSpec::Burst {
                burst: BurstGateConfig::default(),
            },
            GeneratorSpec::Oracle { .. } => GateSpec::Reference,
            GeneratorSpec::Bridge { bridge } => GateSpec::Bridge {
                bridge: bridge.clone(),
            },
        }
    }
}

/// Batch configuration. Paths are relative to the manifest file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunManifest {
    pub matches: Vec<PathBuf>,
    pub ingest: IngestConfig,
    pub pipeline: PipelineConfig,
    pub generator: GeneratorSpec,
    pub gate: Option<GateSpec>,
    pub tokenizer: TokenizerConfig,
    pub patterns: Option<PathBuf>,
    pub event_window: Option<i64>,
    pub out: Option<PathBuf>,
    /// Seed for randomized fixture generation.
    pub seed: u64,
    pub jobs: Option<usize>,
}

impl RunManifest {
    /// Loads a run manifest, or wraps a single match manifest.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let value: Value = serde_json::from_str(&text).map_err(|e| CliError::Malformed {
            path: path.to_path_buf(),
            detail: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        if value.get("matches").is_none() && value.get("match_id").is_some() {
            return Ok(RunManifest {
                matches: vec![path.to_path_buf()],
                ..Default::default()
            });
        }
        let mut m: RunManifest =
            serde_json::from_value(value).map_err(|e| CliError::Malformed {
                path: path.to_path_buf(),
                detail: e.to_string(),
            })?;
        for p in &mut m.matches {
            *p = base.join(&*p);
        }
        m.patterns = m.patterns.map(|p| base.join(p));
        m.out = m.out.map(|p| base.join(p));
        Ok(m)
    }

    pub fn match_manifests(&self) -> Result<Vec<MatchManifest>, CliError> {
        let mut out = Vec::with_capacity(self.matches.len());
        for p in &self.matches {
            out.push(MatchManifest::load(p)?);
        }
        out.sort_by(|a, b| a.match_id.cmp(&b.match_id));
        Ok(out)
    }

    pub fn gate_spec(&self) -> GateSpec {
        self.gate
            .clone()
            .unwrap_or_else(|| GateSpec::default_for(&self.generator))
    }

    fn out_dir(&self) -> Result<&Path, CliError> {
        self.out
            .as_deref()
            .ok_or_else(|| CliError::Usage("no output directory: pass --out or set \"out\"".into()))
    }

    /// Configuration that determines run outputs, hashed into provenance.
    fn effective_config(&self, ids: &[String]) -> Value {
        json!({
            "matches": ids,
            "ingest": self.ingest,
            "pipeline": self.pipeline,
            "generator": self.generator,
            "gate": self.pipeline.variant.is_gated().then(|| self.gate_spec()),
            "seed": self.seed,
        })
    }
}

/// Command-line overrides applied on top of a manifest.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub variant: Option<crate::types::Variant>,
    pub lookahead: Option<u32>,
    pub lookback: Option<u32>,
    pub context_source: Option<crate::types::ContextSource>,
    pub generator: Option<GeneratorSpec>,
    pub gate: Option<GateSpec>,
    pub tokenizer: Option<crate::align::TokenizerMode>,
    pub ngram: Option<usize>,
    pub patterns: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub min_tweets: Option<usize>,
}

impl Overrides {
    pub fn apply(self, m: &mut RunManifest) {
        if let Some(v) = self.variant {
            m.pipeline.variant = v;
        }
        if let Some(v) = self.lookahead {
            m.pipeline.tweet_lookahead_minutes = v;
        }
        if let Some(v) = self.lookback {
            m.pipeline.context_lookback_minutes = v;
        }
        if let Some(v) = self.context_source {
            m.pipeline.context_source = v;
        }
        if let Some(v) = self.generator {
            m.generator = v;
        }
        if let Some(v) = self.gate {
            m.gate = Some(v);
        }
        if let Some(v) = self.tokenizer {
            m.tokenizer.mode = v;
        }
        if let Some(v) = self.ngram {
            m.tokenizer.ngram_n = v;
        }
        if let Some(v) = self.patterns {
            m.patterns = Some(v);
        }
        if let Some(v) = self.out {
            m.out = Some(v);
        }
        if let Some(v) = self.jobs {
            m.jobs = Some(v);
        }
        if let Some(v) = self.min_tweets {
            m.ingest.min_tweets = v;
        }
    }
}

fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(1).max(1))
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))
}

/// File name for a match's timeline.
pub fn timeline_file_name(match_id: &str) -> String {
    let safe: String = match_id
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "-_.".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("{safe}.jsonl")
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn write_json<W: Write + ?Sized>(w: &mut W, value: &impl Serialize) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *w, value)?;
    writeln!(w)
}

// ---------------------------------------------------------------------------
// ingest

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IngestSummary {
    pub match_id: String,
    pub accepted: bool,
    pub tweets: usize,
    pub reference_minutes: usize,
    pub reference_updates: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub violations: Vec<String>,
}

/// Loads and validates every match, printing one JSON summary per match.
pub fn cmd_ingest(
    manifest: &RunManifest,
    out: &mut dyn Write,
) -> Result<Vec<IngestSummary>, CliError> {
    let mut summaries = Vec::new();
    for mm in manifest.match_manifests()? {
        let summary = match mm.load_dataset(&manifest.ingest) {
            Ok(d) => {
                let violations = validate_dataset_with_window(
                    &d,
                    manifest.ingest.window_before_minutes.into(),
                    manifest.ingest.window_after_minutes.into(),
                );
                IngestSummary {
                    match_id: d.match_id.clone(),
                    accepted: true,
                    tweets: d.tweets.len(),
                    reference_minutes: d.reference.len(),
                    reference_updates: d.reference.present_count(),
                    reason: None,
                    violations: violations.iter().map(ToString::to_string).collect(),
                }
            }
            Err(IngestError::Volume {
                match_id,
                surviving,
                ..
            }) => IngestSummary {
                match_id,
                accepted: false,
                tweets: surviving,
                reference_minutes: 0,
                reference_updates: 0,
                reason: Some("VOLUME".into()),
                violations: vec![],
            },
            Err(source) => {
                return Err(CliError::MatchIngest {
                    match_id: mm.match_id.clone(),
                    source,
                })
            }
        };
        writeln!(
            out,
            "{}",
            serde_json::to_string(&summary).expect("summary serializes")
        )
        .map_err(io_err(Path::new("<stdout>")))?;
        summaries.push(summary);
    }
    Ok(summaries)
}

// ---------------------------------------------------------------------------
// run

fn build_generator(
    spec: &GeneratorSpec,
    d: &MatchDataset,
) -> Result<Box<dyn Generator>, PipelineError> {
    let failure = |e| PipelineError::GeneratorFailure {
        minute: d.reference.start_minute,
        source: crate::pipeline::GeneratorError::Bridge(e),
    };
    Ok(match spec {
        GeneratorSpec::Echo => Box::new(EchoGenerator),
        GeneratorSpec::Oracle { oracle } => Box::new(OracleGenerator::new(d, oracle.clone())),
        GeneratorSpec::Bridge { bridge } => {
            Box::new(BridgeGenerator::connect(bridge).map_err(failure)?)
        }
    })
}

fn build_gate(spec: &GateSpec, d: &MatchDataset) -> Result<Box<dyn Gate>, PipelineError> {
    Ok(match spec {
        GateSpec::Reference => Box::new(reference_presence_gate(d)),
        GateSpec::Burst { burst } => {
            burst.validate().map_err(PipelineError::Config)?;
            Box::new(BurstGate::new(d, burst.clone()))
        }
        GateSpec::Bridge { bridge } => {
            Box::new(
                BridgeGate::connect(bridge).map_err(|e| PipelineError::GeneratorFailure {
                    minute: d.reference.start_minute,
                    source: crate::pipeline::GeneratorError::Bridge(e),
                })?,
            )
        }
    })
}

/// Runs the configured pipeline over one dataset.
pub fn run_dataset(manifest: &RunManifest, d: &MatchDataset) -> Result<Timeline, PipelineError> {
    let mut generator = build_generator(&manifest.generator, d)?;
    if manifest.pipeline.variant.is_gated() {
        let mut gate = build_gate(&manifest.gate_spec(), d)?;
        run_match(
            d,
            &manifest.pipeline,
            generator.as_mut(),
            Some(gate.as_mut()),
        )
    } else {
        run_match(d, &manifest.pipeline, generator.as_mut(), None)
    }
}

enum MatchOutcome {
    Done(Timeline),
    Skipped(String),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSummary {
    pub written: Vec<PathBuf>,
    pub skipped: Vec<String>,
    pub config_hash: String,
}

/// Generates one timeline file per accepted match plus `provenance.json`.
///
/// Nothing is written unless every match succeeds.
pub fn cmd_run(manifest: &RunManifest) -> Result<RunSummary, CliError> {
    manifest.pipeline.validate().map_err(CliError::Usage)?;
    let out_dir = manifest.out_dir()?.to_path_buf();
    let matches = manifest.match_manifests()?;

    let results: Vec<Result<(String, MatchOutcome), CliError>> =
        pool(manifest.jobs)?.install(|| {
            matches
                .par_iter()
                .map(|mm| {
                    let d = match mm.load_dataset(&manifest.ingest) {
                        Ok(d) => d,
                        Err(IngestError::Volume {
                            match_id,
                            surviving,
                            min_tweets,
                        }) => {
                            info!("skipping {match_id}: {surviving} tweets <= {min_tweets}");
                            return Ok((match_id, MatchOutcome::Skipped("VOLUME".into())));
                        }
                        Err(source) => {
                            return Err(CliError::MatchIngest {
                                match_id: mm.match_id.clone(),
                                source,
                            })
                        }
                    };
                    info!("running {} ({} tweets)", d.match_id, d.tweets.len());
                    let tl = run_dataset(manifest, &d).map_err(|source| CliError::Generator {
                        match_id: d.match_id.clone(),
                        source,
                    })?;
                    Ok((d.match_id, MatchOutcome::Done(tl)))
                })
                .collect()
        });
    let mut done = Vec::with_capacity(results.len());
    for r in results {
        done.push(r?);
    }
    done.sort_by(|a, b| a.0.cmp(&b.0));

    fs::create_dir_all(&out_dir).map_err(io_err(&out_dir))?;
    let ids: Vec<String> = done.iter().map(|(id, _)| id.clone()).collect();
    let config = manifest.effective_config(&ids);
    let config_hash = sha256_hex(config.to_string().as_bytes());

    let mut written = Vec::new();
    let mut skipped = Vec::new();
    let mut records = Vec::new();
    let mut write_all = || -> Result<(), CliError> {
        for (id, outcome) in &done {
            match outcome {
                MatchOutcome::Done(tl) => {
                    let body = tl.to_jsonl();
                    let path = out_dir.join(timeline_file_name(id));
                    fs::write(&path, &body).map_err(io_err(&path))?;
                    written.push(path);
                    records.push(json!({
                        "match_id": id,
                        "status": "generated",
                        "minutes": tl.len(),
                        "present_updates": tl.present_count(),
                        "timeline_sha256": sha256_hex(body.as_bytes()),
                    }));
                }
                MatchOutcome::Skipped(reason) => {
                    skipped.push(id.clone());
                    records.push(json!({"match_id": id, "status": "skipped", "reason": reason}));
                }
            }
        }
        let provenance = json!({
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "config_hash": config_hash,
            "config": config,
            "matches": records,
        });
        let path = out_dir.join("provenance.json");
        let mut body = Vec::new();
        write_json(&mut body, &provenance).map_err(io_err(&path))?;
        fs::write(&path, body).map_err(io_err(&path))?;
        written.push(path);
        Ok(())
    };
    if let Err(e) = write_all() {
        for p in &written {
            let _ = fs::remove_file(p);
        }
        return Err(e);
    }
    Ok(RunSummary {
        written,
        skipped,
        config_hash,
    })
}

// ---------------------------------------------------------------------------
// eval / events

fn load_generated(gen_dir: &Path, match_id: &str) -> Result<Option<Timeline>, CliError> {
    let path = gen_dir.join(timeline_file_name(match_id));
    if !path.exists() {
        warn!("no generated timeline for {match_id} at {}", path.display());
        return Ok(None);
    }
    let file = fs::File::open(&path).map_err(io_err(&path))?;
    read_reference(io::BufReader::new(file))
        .map(Some)
        .map_err(|e| CliError::Malformed {
            path,
            detail: e.to_string(),
        })
}

/// Pairs of `(match_id, reference, generated)` for every match with output.
fn timeline_pairs(
    manifest: &RunManifest,
    gen_dir: &Path,
) -> Result<Vec<(String, Timeline, Timeline)>, CliError> {
    let mut pairs = Vec::new();
    for mm in manifest.match_manifests()? {
        if let Some(generated) = load_generated(gen_dir, &mm.match_id)? {
            let reference =
                mm.load_reference(&manifest.ingest)
                    .map_err(|source| CliError::MatchIngest {
                        match_id: mm.match_id.clone(),
                        source,
                    })?;
            pairs.push((mm.match_id.clone(), reference, generated));
        }
    }
    Ok(pairs)
}

fn emit_report(
    out_dir: Option<&Path>,
    file_name: &str,
    report: &impl Serialize,
    table: &str,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let console = Path::new("<stdout>");
    match out_dir {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(io_err(dir))?;
            let path = dir.join(file_name);
            let mut body = Vec::new();
            write_json(&mut body, report).map_err(io_err(&path))?;
            fs::write(&path, body).map_err(io_err(&path))?;
            stdout
                .write_all(table.as_bytes())
                .map_err(io_err(console))?;
        }
        None => {
            eprint!("{table}");
            write_json(stdout, report).map_err(io_err(console))?;
        }
    }
    Ok(())
}

/// Aligned n-gram evaluation of generated timelines against the references.
pub fn cmd_eval(
    manifest: &RunManifest,
    gen_dir: &Path,
    report_dir: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<CorpusReport, CliError> {
    let tok = &manifest.tokenizer;
    if tok.ngram_n == 0 {
        return Err(CliError::Usage("--ngram must be >= 1".into()));
    }
    let mut reports = Vec::new();
    for (id, reference, generated) in timeline_pairs(manifest, gen_dir)? {
        let r =
            evaluate_match(&id, &generated, &reference, tok).map_err(|source| CliError::Span {
                match_id: id.clone(),
                source,
            })?;
        reports.push(r);
    }
    let corpus = CorpusReport::from_matches(tok.ngram_n, reports);
    emit_report(
        report_dir,
        &format!("eval_n{}.json", tok.ngram_n),
        &corpus,
        &corpus.table(),
        stdout,
    )?;
    Ok(corpus)
}

/// Key-event detection report, both matching modes; `mode` selects the
/// printed table.
pub fn cmd_events(
    manifest: &RunManifest,
    gen_dir: &Path,
    mode: MatchMode,
    report_dir: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<EventReport, CliError> {
    let patterns = match &manifest.patterns {
        Some(p) => EventPatternSet::load(p)?,
        None => EventPatternSet::builtin(),
    };
    let window = manifest.event_window.unwrap_or(DEFAULT_WINDOW);
    let mut inputs = Vec::new();
    for (id, reference, generated) in timeline_pairs(manifest, gen_dir)? {
        if reference.span() != generated.span() {
            return Err(CliError::Span {
                match_id: id,
                source: AlignError::SpanMismatch {
                    generated: generated.span(),
                    reference: reference.span(),
                },
            });
        }
        inputs.push((
            id,
            extract_events(&reference, &patterns),
            extract_events(&generated, &patterns),
        ));
    }
    let report = EventReport::build(window, &inputs);
    emit_report(
        report_dir,
        "events.json",
        &report,
        &report.table(mode),
        stdout,
    )?;
    Ok(report)
}

/// Default generated-timeline directory for eval and events.
pub fn default_gen_dir(manifest: &RunManifest) -> Result<PathBuf, CliError> {
    manifest
        .out
        .clone()
        .ok_or_else(|| CliError::Usage("pass --gen DIR (the manifest sets no \"out\")".into()))
}
