//! Volume-spike gate: say YES when this minute's tweet count clears both an
//! absolute floor and a multiple of the trailing mean.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ingest::minute_counts;
use crate::pipeline::{Decision, Gate, GenerationRequest, GeneratorError};
use crate::types::MatchDataset;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BurstGateConfig {
    pub trailing_minutes: u32,
    pub ratio_threshold: f64,
    pub min_count: usize,
}

impl Default for BurstGateConfig {
    fn default() -> Self {
        BurstGateConfig {
            trailing_minutes: 5,
            ratio_threshold: 2.0,
            min_count: 5,
        }
    }
}

impl BurstGateConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.trailing_minutes < 1 {
            return Err("trailing_minutes must be >= 1".into());
        }
        if !self.ratio_threshold.is_finite() || self.ratio_threshold <= 0.0 {
            return Err("ratio_threshold must be a positive number".into());
        }
        Ok(())
    }
}

/// YES iff `count(t) >= min_count` and `count(t) >= ratio * mean(count)`
/// over `[t - trailing, t - 1]`. Missing minutes count as zero.
pub fn burst_gate_decide(
    minute_counts: &BTreeMap<i64, usize>,
    minute: i64,
    cfg: &BurstGateConfig,
) -> Decision {
    let count = minute_counts.get(&minute).copied().unwrap_or(0);
    let trailing = i64::from(cfg.trailing_minutes.max(1));
    let sum: usize = minute_counts
        .range(minute - trailing..minute)
        .map(|(_, c)| c)
        .sum();
    // count >= ratio * sum / trailing, without dividing.
    let spikes = count as f64 * trailing as f64 >= cfg.ratio_threshold * sum as f64;
    if count >= cfg.min_count && spikes {
        Decision::Yes
    } else {
        Decision::No
    }
}

/// [`burst_gate_decide`] over one match's per-minute tweet counts.
#[derive(Clone, Debug)]
pub struct BurstGate {
    counts: BTreeMap<i64, usize>,
    cfg: BurstGateConfig,
}

impl BurstGate {
    pub fn new(d: &MatchDataset, cfg: BurstGateConfig) -> Self {
        BurstGate {
            counts: minute_counts(&d.tweets),
            cfg,
        }
    }

    pub fn from_counts(counts: BTreeMap<i64, usize>, cfg: BurstGateConfig) -> Self {
        BurstGate { counts, cfg }
    }
}

impl Gate for BurstGate {
    fn decide(&mut self, req: &GenerationRequest<'_>) -> Result<Decision, GeneratorError> {
        Ok(burst_gate_decide(&self.counts, req.minute, &self.cfg))
    }
}
