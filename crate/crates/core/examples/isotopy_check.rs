//! Normal-projection isotopy between a trefoil and a small perturbation.

use curve_thickness::fixtures;
use curve_thickness::isotopy::{hausdorff_distance, isotopy_check, suggested_rho};
use curve_thickness::kernel::thickness;

fn main() {
    let k = fixtures::trefoil(600);
    let t = thickness(&k).unwrap().thickness;
    let l = k
        .map_points(|p| vec![p[0] + 0.02 * (3.0 * p[1]).sin(), p[1], p[2]])
        .unwrap();
    let rho = suggested_rho(t).unwrap();
    let check = isotopy_check(&k, &l, rho).unwrap();
    println!(
        "thickness {t}, rho {rho:.4}, Hausdorff {:.4}",
        hausdorff_distance(&k, &l)
    );
    println!("isotopic: {} ({} frames embedded)", check.is_isotopic(), check.frames);
}
