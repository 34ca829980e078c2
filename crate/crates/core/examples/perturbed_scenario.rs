//! Prints a scenario whose pair is a seeded GL pullback of the standard pair
//! that keeps the coordinate subtorus special Lagrangian.
//!
//!     cargo run --example perturbed_scenario -- <n> <seed> [scale]

use slagkit::sampling;
use slagkit::scenario::form_terms;
use slagkit::slag::{slag_preserving_deformation, SubtorusSpec};
use slagkit::structures::CalibrationPair;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().and_then(|s| s.parse().ok()).unwrap_or(2);
    let seed: u64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let scale: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0.25);

    let m = SubtorusSpec::coordinate(n);
    let mut rng = sampling::rng(seed);
    let g = slag_preserving_deformation(&m, &mut rng, scale).expect("deformation");
    let pair = CalibrationPair::standard(n).pullback(&g).expect("pullback");

    let doc = serde_json::json!({
        "name": format!("perturbed-n{n}-seed{seed}"),
        "n": n,
        "Omega": form_terms(pair.volume(), 0.0),
        "omega": form_terms(pair.kahler(), 0.0),
        "subtorus": m.integer_rows(),
        "seed": seed,
        "checks": ["all"],
        "expect_pass": true,
    });
    println!("{}", serde_json::to_string_pretty(&doc).unwrap());
}
