//! Key-event extraction and LENIENT / STRICT matching.
//!
//! ```text
//! cargo run --example events
//! ```

use livetl::events::{extract_events, EventReport, DEFAULT_WINDOW};
use livetl::{EventPatternSet, MatchMode, Timeline};

fn main() {
    let patterns = EventPatternSet::builtin();
    let reference = Timeline::from_sparse([
        (5, Some("Goal by Nishimura! Yokohama lead 1-0.")),
        (8, Some("Yellow card to Kobayashi.")),
        (11, Some("10 MJunio OUT → 16 Fujita IN")),
        (13, Some("マルコス選手のゴール！")),
    ]);
    let generated = Timeline::from_sparse([
        (6, Some("goal by Nishimura")),
        (8, None),
        (9, Some("yellow card to Kato")),
        (12, Some("交代")),
        (16, Some("マルコス選手のゴール")),
    ]);

    let refs = extract_events(&reference, &patterns);
    let gens = extract_events(&generated, &patterns);
    for (label, events) in [("reference", &refs), ("generated", &gens)] {
        println!("{label}:");
        for e in events.iter() {
            println!("  {:>3} {:<12} {:?}", e.minute, e.kind.as_str(), e.attrs);
        }
    }

    // Start-minute alignment: the generated timeline starts later, but event
    // minutes are absolute.
    let report = EventReport::build(DEFAULT_WINDOW, &[("demo".into(), refs, gens)]);
    println!();
    print!("{}", report.table(MatchMode::Lenient));
    println!();
    print!("{}", report.table(MatchMode::Strict));
}
