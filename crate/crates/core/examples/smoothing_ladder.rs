//! Raising the focal distance of a stadium from 1 to 0.9 within C¹ distance 1e-2.

use curve_thickness::fixtures;
use curve_thickness::patch::{smoothing_ladder, LadderConfig};

fn main() {
    let s = fixtures::stadium(1.0, 4.0, 2000);
    let out = smoothing_ladder(&s, &LadderConfig::new(1.0, 0.9, 1e-2)).expect("ladder converges");
    println!(
        "{} windows, sup curvature {:.6} (cap {:.6}), d_C1 {:.3e}",
        out.steps.len(),
        out.sup_curvature,
        1.0 / 0.9,
        out.d_c1
    );
}
