//! Oracle extractive generation: for each reference update, pick the window
//! tweet that shares the most characters with it. Gated by reference
//! presence, the output has exactly as many updates as the reference.
//!
//! ```text
//! cargo run --example oracle
//! ```

use std::path::Path;

use livetl::generators::{MatchDenominator, OracleConfig, OracleGenerator};
use livetl::ingest::{IngestConfig, MatchManifest};
use livetl::pipeline::reference_presence_gate;
use livetl::{evaluate_match, run_match, PipelineConfig, TokenizerConfig, Variant};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/sample/manifest.json");
    let cfg = IngestConfig {
        min_tweets: 100,
        ..Default::default()
    };
    let d = MatchManifest::load(&manifest)?.load_dataset(&cfg)?;

    for denominator in [MatchDenominator::Reference, MatchDenominator::Union] {
        let oracle = OracleConfig {
            denominator,
            ..Default::default()
        };
        let mut generator = OracleGenerator::new(&d, oracle);
        let mut gate = reference_presence_gate(&d);
        let out = run_match(
            &d,
            &PipelineConfig::with_variant(Variant::Clf),
            &mut generator,
            Some(&mut gate),
        )?;
        println!("== denominator {denominator:?}");
        for u in d.reference.present() {
            println!(
                "  {:>3}  ref: {}\n       got: {}",
                u.minute,
                u.text().unwrap_or_default(),
                out.text_at(u.minute).unwrap_or("-")
            );
        }
        for n in [1, 2] {
            let r = evaluate_match(&d.match_id, &out, &d.reference, &TokenizerConfig::chars(n))?;
            println!(
                "  char {n}-grams: P {:.3} R {:.3} F1 {:.3}",
                r.precision, r.recall, r.f1
            );
        }
    }
    Ok(())
}
