//! Doubly-critical chords of an ellipse: both axes show up.

use curve_thickness::estimate_tangents;
use curve_thickness::fixtures;
use curve_thickness::kernel::{default_adjacency_window, find_double_critical_pairs, DEFAULT_PERP_TOL};

fn main() {
    let e = fixtures::ellipse(2.0, 1.0, 800);
    let pairs = find_double_critical_pairs(
        &e,
        &estimate_tangents(&e),
        DEFAULT_PERP_TOL,
        default_adjacency_window(&e),
    )
    .expect("tangents match");
    for p in &pairs {
        println!(
            "chord {:.6} between s = {:.4} and s = {:.4}",
            p.chord_length, p.coord_p.s, p.coord_q.s
        );
    }
}
