//! The four generation variants over the sample match, with the echo
//! generator and the tweet-burst gate.
//!
//! ```text
//! cargo run --example pipeline_variants
//! ```

use std::path::Path;

use livetl::generators::{BurstGate, BurstGateConfig, EchoGenerator};
use livetl::ingest::{IngestConfig, MatchManifest};
use livetl::{run_match, Gate, PipelineConfig, Variant};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/sample/manifest.json");
    let cfg = IngestConfig {
        min_tweets: 100,
        ..Default::default()
    };
    let d = MatchManifest::load(&manifest)?.load_dataset(&cfg)?;
    let burst = BurstGateConfig {
        min_count: 8,
        ..Default::default()
    };

    for variant in [Variant::Base, Variant::Clf, Variant::Cxt, Variant::ClfCxt] {
        let pipeline = PipelineConfig::with_variant(variant);
        let mut gate = BurstGate::new(&d, burst.clone());
        let gate = variant.is_gated().then_some(&mut gate as &mut dyn Gate);
        let out = run_match(&d, &pipeline, &mut EchoGenerator, gate)?;
        println!("== {variant}: {} updates", out.present_count());
        for u in out.present() {
            println!("  {:>3}  {}", u.minute, u.text().unwrap_or_default());
        }
    }
    Ok(())
}
