//! The spike surface: bounded directional second derivatives at the origin
//! with a mixed partial of size n/2.

use curve_thickness::patch::{angular_profile_surface, directional_second_difference, jacobian_derivative, Profile};

fn main() {
    let n = 10;
    let p = angular_profile_surface(Profile::Spike { n }, 1.0, 201).expect("even spike");
    let o = p.nearest_node(&[0.0, 0.0]).unwrap();
    let mut worst: f64 = 0.0;
    for v in [[1, 0], [0, 1], [1, 1], [1, -1]] {
        let d = directional_second_difference(&p, o, &v, 1).unwrap()[0];
        worst = worst.max(d.abs());
    }
    println!("max |f_vv(0)| over lattice directions: {worst:.3}");
    println!(
        "|f_yx(0,0)| = {:.6} (n/2 = {})",
        jacobian_derivative(&p, o, 1, 0).unwrap().abs(),
        n / 2
    );
}
