//! Live sports commentary from tweet streams.
//!
//! A match is a stream of tweets plus a minute-by-minute reference
//! timeline of commentary updates, where most minutes have no update. The
//! crate covers the whole batch flow:
//!
//! - [`ingest`]: read tweet archives and reference timelines, normalize
//!   tweet text, drop low-volume matches.
//! - [`pipeline`]: walk the match minute by minute and ask a [`Generator`]
//!   (optionally behind a [`Gate`]) for an update.
//! - [`generators`]: echo, oracle, burst gate and the external-model bridge.
//! - [`align`]: aligned n-gram precision / recall / F1 between a generated
//!   and a reference timeline.
//! - [`events`]: goal, substitution and card detection and scoring.
//! - [`cli`]: the batch commands behind the `livetl` binary.
//!
//! ```
//! use livetl::{align, Timeline, TokenizerConfig};
//!
//! let reference = Timeline::from_sparse([(0, Some("goal by Ito")), (1, None), (2, Some("yellow card"))]);
//! let generated = Timeline::from_sparse([(0, None), (1, Some("goal Ito")), (2, None)]);
//! let report = align::evaluate_match("demo", &generated, &reference, &TokenizerConfig::words(1)).unwrap();
//! assert_eq!(report.aligned, 2);
//! ```
//!
//! [`Generator`]: pipeline::Generator
//! [`Gate`]: pipeline::Gate

pub mod align;
pub mod cli;
pub mod events;
pub mod generators;
pub mod ingest;
pub mod pipeline;
pub mod stub_peer;
pub mod types;

pub use align::{
    evaluate_match, prf, CorpusReport, MatchReport, Prf, TokenizerConfig, TokenizerMode,
};
pub use events::{EventKind, EventPatternSet, EventRecord, MatchMode};
pub use ingest::{preprocess_text, IngestConfig, IngestError, MatchManifest};
pub use pipeline::{run_match, Decision, Gate, GenerationRequest, Generator, PipelineError};
pub use types::{ContextSource, MatchDataset, PipelineConfig, Timeline, Tweet, Update, Variant};
