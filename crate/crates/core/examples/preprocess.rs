//! Tweet normalization and per-minute bucketing on the bundled sample match.
//!
//! ```text
//! cargo run --example preprocess
//! ```

use std::path::Path;

use livetl::ingest::{bucket_by_minute, preprocess_text, IngestConfig, MatchManifest};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for raw in [
        "GOAL!! #fmarinos https://t.co/abc",
        "ＧＯＡＬ　＃マリノス　やった",
        "  spaced\tout \n text ",
    ] {
        println!("{raw:?} -> {:?}", preprocess_text(raw));
    }

    let manifest = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/sample/manifest.json");
    let cfg = IngestConfig {
        min_tweets: 100,
        ..Default::default()
    };
    let d = MatchManifest::load(&manifest)?.load_dataset(&cfg)?;
    println!(
        "\n{}: {} tweets, reference minutes {:?}, {} updates",
        d.match_id,
        d.tweets.len(),
        d.reference.span(),
        d.reference.present_count()
    );
    for (minute, tweets) in bucket_by_minute(&d.tweets) {
        let update = d.reference.text_at(minute).unwrap_or("");
        println!("{minute:>4} {:>3} tweets  {update}", tweets.len());
    }
    Ok(())
}
