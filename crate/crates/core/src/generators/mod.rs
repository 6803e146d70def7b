//! Built-in gates and generators.
//!
//! - [`EchoGenerator`]: first tweet of the window, a deterministic stand-in.
//! - [`oracle`]: picks the window tweet with the largest word overlap with
//!   the reference update (an upper bound for extractive systems).
//! - [`burst`]: volume-spike gate.
//! - [`bridge`]: hands requests to an external model process over
//!   newline-delimited JSON.

pub mod bridge;
pub mod burst;
pub mod oracle;

pub use bridge::{BridgeClient, BridgeConfig, BridgeError, BridgeGate, BridgeGenerator, Transport};
pub use burst::{burst_gate_decide, BurstGate, BurstGateConfig};
pub use oracle::{oracle_extract, MatchDenominator, OracleConfig, OracleGenerator};

use crate::pipeline::{GenerationRequest, Generator, GeneratorError};

/// Returns the first tweet's text, or ABSENT for an empty window.
#[derive(Clone, Copy, Debug, Default)]
pub struct EchoGenerator;

impl Generator for EchoGenerator {
    fn generate(&mut self, req: &GenerationRequest<'_>) -> Result<Option<String>, GeneratorError> {
        Ok(req.tweets.first().map(|t| t.text.clone()))
    }
}
