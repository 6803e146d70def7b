//! Precision, recall and F1 recomputed from published corpus-level counts
//! (aligned, generated, reference n-grams), compared to the reported
//! three-decimal ratios.
//!
//! ```text
//! cargo run --example reported_counts
//! ```

use livetl::prf;

#[allow(clippy::approx_constant)]
fn main() {
    let rows = [
        (
            "unigram",
            "base",
            19585,
            49088,
            164245,
            [0.401, 0.118, 0.182],
        ),
        (
            "unigram",
            "clf",
            42199,
            129387,
            164245,
            [0.326, 0.255, 0.286],
        ),
        (
            "unigram",
            "cxt",
            41639,
            107049,
            164245,
            [0.389, 0.251, 0.305],
        ),
        (
            "unigram",
            "clf+cxt",
            43074,
            137072,
            164245,
            [0.318, 0.260, 0.284],
        ),
        (
            "unigram",
            "oracle extr.",
            33159,
            109046,
            164245,
            [0.304, 0.200, 0.241],
        ),
        (
            "unigram",
            "oracle+clf+cxt",
            51487,
            134598,
            164245,
            [0.382, 0.311, 0.343],
        ),
        ("bigram", "base", 8825, 46505, 159605, [0.192, 0.055, 0.085]),
        (
            "bigram",
            "clf",
            16160,
            123680,
            159605,
            [0.130, 0.101, 0.114],
        ),
        (
            "bigram",
            "cxt",
            16309,
            102739,
            159605,
            [0.156, 0.100, 0.122],
        ),
        (
            "bigram",
            "clf+cxt",
            15752,
            131441,
            159605,
            [0.121, 0.098, 0.108],
        ),
        (
            "bigram",
            "oracle extr.",
            3447,
            103406,
            159605,
            [0.033, 0.021, 0.026],
        ),
        (
            "bigram",
            "oracle+clf+cxt",
            20764,
            128958,
            159605,
            [0.161, 0.130, 0.143],
        ),
    ];
    println!(
        "{:<8} {:<15} {:>8} {:>8} {:>8}   {:>17}   {:>17}",
        "n", "system", "aligned", "gen", "ref", "P / R / F1", "reported"
    );
    for (n, system, aligned, gen, reference, reported) in rows {
        let p = prf(aligned, gen, reference);
        let worst = [p.precision, p.recall, p.f1]
            .iter()
            .zip(reported)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        println!(
            "{n:<8} {system:<15} {aligned:>8} {gen:>8} {reference:>8}   {:.3} {:.3} {:.3}   {:.3} {:.3} {:.3}   max |d| {worst:.4}",
            p.precision, p.recall, p.f1, reported[0], reported[1], reported[2]
        );
    }
}
