//! Tweet-burst gate decisions over a synthetic per-minute count series.
//!
//! ```text
//! cargo run --example burst_gate
//! ```

use std::collections::BTreeMap;

use livetl::generators::{burst_gate_decide, BurstGateConfig};

fn main() {
    let counts: BTreeMap<i64, usize> = [3, 4, 3, 5, 4, 21, 12, 6, 4, 3, 2, 9, 4, 30, 8]
        .into_iter()
        .enumerate()
        .map(|(m, c)| (m as i64, c))
        .collect();
    let cfg = BurstGateConfig::default();
    println!(
        "trailing {} min, ratio {}, min count {}",
        cfg.trailing_minutes, cfg.ratio_threshold, cfg.min_count
    );
    for (&minute, &count) in &counts {
        let decision = burst_gate_decide(&counts, minute, &cfg);
        println!(
            "{minute:>3} {count:>3} {}",
            "#".repeat(count) + &format!(" {decision:?}")
        );
    }
}
