//! Drives the pipeline through the bridge protocol against an in-process
//! TCP stub peer and checks the result against the in-process echo
//! generator.
//!
//! ```text
//! cargo run --example bridge_loopback
//! ```

use std::path::Path;
use std::sync::mpsc;
use std::thread;

use livetl::generators::{BridgeConfig, BridgeGate, BridgeGenerator, EchoGenerator};
use livetl::ingest::{IngestConfig, MatchManifest};
use livetl::pipeline::ConstantGate;
use livetl::stub_peer::{serve_tcp, StubBehavior};
use livetl::{run_match, Decision, PipelineConfig, Variant};

fn peer(behavior: StubBehavior) -> BridgeConfig {
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || serve_tcp(behavior, "127.0.0.1:0", |addr| tx.send(addr).unwrap()));
    BridgeConfig::tcp(rx.recv().unwrap().to_string()).with_timeout_ms(2_000)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/sample/manifest.json");
    let cfg = IngestConfig {
        min_tweets: 100,
        ..Default::default()
    };
    let d = MatchManifest::load(&manifest)?.load_dataset(&cfg)?;
    let pipeline = PipelineConfig::with_variant(Variant::ClfCxt);

    let mut generator = BridgeGenerator::connect(&peer(StubBehavior::EchoFirstTweet))?;
    let mut gate = BridgeGate::connect(&peer(StubBehavior::AlwaysYes))?;
    let bridged = run_match(&d, &pipeline, &mut generator, Some(&mut gate))?;

    let local = run_match(
        &d,
        &pipeline,
        &mut EchoGenerator,
        Some(&mut ConstantGate(Decision::Yes)),
    )?;
    print!("{}", bridged.to_jsonl());
    println!(
        "identical to in-process echo: {}",
        bridged.to_jsonl() == local.to_jsonl()
    );

    let mut generator = BridgeGenerator::connect(&peer(StubBehavior::Template))?;
    let templated = run_match(
        &d,
        &PipelineConfig::with_variant(Variant::Cxt),
        &mut generator,
        None,
    )?;
    println!("template peer, minute 6: {:?}", templated.text_at(6));

    let mut broken = BridgeGenerator::connect(&peer(StubBehavior::Garbage))?;
    match run_match(&d, &PipelineConfig::default(), &mut broken, None) {
        Ok(_) => println!("unexpected success"),
        Err(e) => println!("garbage peer: {e}"),
    }
    Ok(())
}
