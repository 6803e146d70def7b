//! The batch commands as a library: run the sample manifest, then score it.
//! Writes into the system temp directory.
//!
//! ```text
//! cargo run --example batch_run
//! ```

use std::io;
use std::path::Path;

use livetl::cli::{cmd_eval, cmd_events, cmd_run, Overrides, RunManifest};
use livetl::MatchMode;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/sample/run.json");
    let out = std::env::temp_dir().join("livetl-batch-run");
    let mut m = RunManifest::load(&manifest)?;
    Overrides {
        out: Some(out.join("timelines")),
        jobs: Some(2),
        ..Default::default()
    }
    .apply(&mut m);

    let summary = cmd_run(&m)?;
    println!("config hash {}", summary.config_hash);
    for p in &summary.written {
        println!("wrote {}", p.display());
    }
    let stdout = &mut io::stdout();
    cmd_eval(
        &m,
        &out.join("timelines"),
        Some(&out.join("reports")),
        stdout,
    )?;
    cmd_events(
        &m,
        &out.join("timelines"),
        MatchMode::Strict,
        Some(&out.join("reports")),
        stdout,
    )?;
    println!("reports in {}", out.join("reports").display());
    Ok(())
}
