//! Per-minute generation loop.
//!
//! For every minute `t` in the reference span the driver assembles the
//! tweet window `[t, t + lookahead]` and, for context variants, the present
//! updates in `[t - lookback, t - 1]`. Gated variants ask the [`Gate`]
//! first and emit ABSENT on NO without touching the generator.

use std::collections::HashSet;

use serde::Serialize;
use thiserror::Error;

use crate::generators::bridge::BridgeError;
use crate::types::{ContextSource, MatchDataset, PipelineConfig, Timeline, Tweet, Update};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ContextEntry {
    pub minute: i64,
    pub text: String,
}

/// Everything a gate or generator sees for one minute.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenerationRequest<'a> {
    pub minute: i64,
    /// Tweets of the lookahead window, in `(minute, id)` order.
    pub tweets: &'a [Tweet],
    /// Present updates of the lookback window, oldest first.
    pub context: Vec<ContextEntry>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Yes,
    No,
}

/// Failure inside a gate or generator.
#[derive(Debug, Error)]
pub enum GeneratorError {
    #[error(transparent)]
    Bridge(#[from] BridgeError),
    #[error("{0}")]
    Other(String),
}

/// Yes/no decision on whether to write an update this minute.
pub trait Gate {
    fn decide(&mut self, req: &GenerationRequest<'_>) -> Result<Decision, GeneratorError>;
}

/// Produces update text, or `None` for ABSENT.
pub trait Generator {
    fn generate(&mut self, req: &GenerationRequest<'_>) -> Result<Option<String>, GeneratorError>;
}

impl<G: Gate + ?Sized> Gate for Box<G> {
    fn decide(&mut self, req: &GenerationRequest<'_>) -> Result<Decision, GeneratorError> {
        (**self).decide(req)
    }
}

impl<G: Generator + ?Sized> Generator for Box<G> {
    fn generate(&mut self, req: &GenerationRequest<'_>) -> Result<Option<String>, GeneratorError> {
        (**self).generate(req)
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid pipeline config: {0}")]
    Config(String),
    #[error("generator failed at minute {minute}: {source}")]
    GeneratorFailure {
        minute: i64,
        #[source]
        source: GeneratorError,
    },
    #[error("generator returned ABSENT at minute {0} after the gate said yes")]
    AbsentUnderGate(i64),
}

/// Tweets with minute in `[first, last]`, relying on the dataset's sort order.
pub fn tweet_window(tweets: &[Tweet], first: i64, last: i64) -> &[Tweet] {
    let lo = tweets.partition_point(|t| t.minute < first);
    let hi = tweets.partition_point(|t| t.minute <= last);
    &tweets[lo..hi.max(lo)]
}

/// Assembles the request for `minute`.
///
/// `emitted` is the timeline produced so far in this run; it is consulted
/// only when context comes from generated updates.
pub fn build_request<'a>(
    d: &'a MatchDataset,
    minute: i64,
    cfg: &PipelineConfig,
    emitted: &Timeline,
) -> GenerationRequest<'a> {
    let tweets = tweet_window(
        &d.tweets,
        minute,
        minute + i64::from(cfg.tweet_lookahead_minutes),
    );
    let context = if cfg.variant.uses_context() {
        let source = match cfg.context_source {
            ContextSource::Generated => emitted,
            ContextSource::Reference => &d.reference,
        };
        let lookback = i64::from(cfg.context_lookback_minutes);
        (minute - lookback..minute)
            .filter_map(|m| {
                source.text_at(m).map(|text| ContextEntry {
                    minute: m,
                    text: text.to_string(),
                })
            })
            .collect()
    } else {
        Vec::new()
    };
    GenerationRequest {
        minute,
        tweets,
        context,
    }
}

/// Runs one match and returns a timeline over the reference span.
///
/// `gate` must be present exactly for the gated variants. Any gate or
/// generator failure aborts the run; no partial timeline is returned.
pub fn run_match(
    d: &MatchDataset,
    cfg: &PipelineConfig,
    generator: &mut dyn Generator,
    mut gate: Option<&mut dyn Gate>,
) -> Result<Timeline, PipelineError> {
    cfg.validate().map_err(PipelineError::Config)?;
    let gated = cfg.variant.is_gated();
    if gated != gate.is_some() {
        return Err(PipelineError::Config(format!(
            "variant {} {} a gate",
            cfg.variant,
            if gated { "requires" } else { "does not take" }
        )));
    }
    let Some((first, last)) = d.reference.span() else {
        return Ok(Timeline::default());
    };

    let mut out = Timeline {
        start_minute: first,
        entries: Vec::with_capacity((last - first + 1) as usize),
    };
    for minute in first..=last {
        let req = build_request(d, minute, cfg, &out);
        let failure = |source| PipelineError::GeneratorFailure { minute, source };
        let text = match gate.as_deref_mut() {
            Some(g) => match g.decide(&req).map_err(failure)? {
                Decision::No => None,
                Decision::Yes => {
                    let text = generator.generate(&req).map_err(failure)?;
                    let update = Update::new(minute, text.unwrap_or_default());
                    if !update.is_present() {
                        return Err(PipelineError::AbsentUnderGate(minute));
                    }
                    update.text
                }
            },
            None => generator.generate(&req).map_err(failure)?,
        };
        out.entries
            .push(Update::new(minute, text.unwrap_or_default()));
    }
    Ok(out)
}

/// Says YES exactly where the reference timeline has an update.
#[derive(Clone, Debug)]
pub struct ReferencePresenceGate {
    minutes: HashSet<i64>,
}

impl Gate for ReferencePresenceGate {
    fn decide(&mut self, req: &GenerationRequest<'_>) -> Result<Decision, GeneratorError> {
        Ok(if self.minutes.contains(&req.minute) {
            Decision::Yes
        } else {
            Decision::No
        })
    }
}

pub fn reference_presence_gate(d: &MatchDataset) -> ReferencePresenceGate {
    ReferencePresenceGate {
        minutes: d.reference.present().map(|u| u.minute).collect(),
    }
}

/// Gate with a fixed answer.
#[derive(Clone, Copy, Debug)]
pub struct ConstantGate(pub Decision);

impl Gate for ConstantGate {
    fn decide(&mut self, _req: &GenerationRequest<'_>) -> Result<Decision, GeneratorError> {
        Ok(self.0)
    }
}
