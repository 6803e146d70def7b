//! Aligned n-gram scoring: a generated timeline whose updates arrive a
//! minute late still gets full credit, two minutes late gets none.
//!
//! ```text
//! cargo run --example aligned_ngrams
//! ```

use livetl::align::{align, brute_force_align, build_score_matrix};
use livetl::{evaluate_match, Timeline, TokenizerConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let reference = Timeline::from_sparse([
        (0, None),
        (1, Some("kick off")),
        (2, None),
        (3, Some("goal by ito")),
        (4, Some("yellow card for kato")),
        (5, None),
        (6, None),
    ]);
    let tok = TokenizerConfig::words(1);

    for lag in 0..=2 {
        let generated = Timeline::from_sparse(
            reference
                .entries
                .iter()
                .map(|u| (u.minute, reference.text_at(u.minute - lag))),
        );
        let m = build_score_matrix(&generated, &reference, &tok)?;
        let result = align(&m);
        println!(
            "lag {lag}: aligned {} of {}, pairs {:?}",
            result.aligned, result.ref_total, result.pairs
        );
        assert_eq!(result.aligned, brute_force_align(&m)?);
    }

    // Paraphrased, split across minutes, one spurious update.
    let generated = Timeline::from_sparse([
        (0, Some("the match is about to start")),
        (1, None),
        (2, Some("kick off and ito goal")),
        (3, None),
        (4, Some("card")),
        (5, Some("yellow for kato")),
        (6, None),
    ]);
    for n in [1, 2] {
        let r = evaluate_match("demo", &generated, &reference, &TokenizerConfig::words(n))?;
        println!(
            "{n}-grams: ref {} gen {} aligned {}  P {:.3} R {:.3} F1 {:.3}",
            r.ref_total, r.gen_total, r.aligned, r.precision, r.recall, r.f1
        );
    }
    Ok(())
}
