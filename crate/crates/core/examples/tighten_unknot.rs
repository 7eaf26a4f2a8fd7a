//! Ropelength descent from a noisy circle toward 2π. Pass the step count as
//! the first argument (default 2000).

use curve_thickness::fixtures;
use curve_thickness::tighten::{tighten, TightenConfig};

fn main() {
    let steps = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2000);
    let start = fixtures::perturbed_circle(7, 400, 0.05);
    let trace = tighten(
        &start,
        &TightenConfig {
            steps,
            ..TightenConfig::default()
        },
    )
    .unwrap();
    println!(
        "ropelength {:.5} -> {:.5} after {steps} steps ({} accepted); 2π = {:.5}",
        trace.initial_objective,
        trace.final_objective,
        trace.accepted,
        std::f64::consts::TAU
    );
}
