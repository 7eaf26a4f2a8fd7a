//! Second-derivative certificate on the parabola z = x²/2, whose focal
//! distance at the vertex is 1.

use curve_thickness::patch::{focal_certificate, focal_radius_bound, GraphPatch};

fn main() {
    let p = GraphPatch::centered(1, 1, 1.0, 401, |x| (vec![0.5 * x[0] * x[0]], vec![x[0]])).unwrap();
    let origin = p.nearest_node(&[0.0]).unwrap();
    println!(
        "bound at the vertex: {}",
        focal_radius_bound(&p, origin, &[1.0], &[1.0]).unwrap()
    );
    for r in [0.9, 1.1] {
        let c = focal_certificate(&p, r).unwrap();
        println!("R = {r}: {:?}", c.verdict);
    }
}
