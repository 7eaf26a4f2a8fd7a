//! Thickness and MDC along a circle with shrinking frequency-8 bumps.

use curve_thickness::fixtures;
use curve_thickness::semicontinuity::{run_experiment, PerturbationFamily, PerturbationSpec};

fn main() {
    let circle = fixtures::circle(400, 1.0);
    for family in [
        PerturbationFamily::RadialBumps { frequency: 8 },
        PerturbationFamily::TangentialNoise { seed: 1 },
        PerturbationFamily::Mixed { frequency: 8, seed: 1 },
    ] {
        let e = run_experiment(&circle, &PerturbationSpec::harmonic(family.clone(), 0.05, 32)).expect("embedded terms");
        println!(
            "{family:?}: tail max thickness {:.6} (base {:.6}), tail min MDC {:.6}, pass {}",
            e.upper_thickness.tail_extreme,
            e.base_thickness,
            e.lower_mdc.tail_extreme,
            e.passed()
        );
    }
}
