//! Thickness of the standard fixtures and which term attains it.

use curve_thickness::fixtures;
use curve_thickness::kernel::thickness;

fn main() {
    for (name, curve) in fixtures::standard_set() {
        let r = thickness(&curve).expect("fixtures are valid");
        println!(
            "{name:>15}  thickness {:.6}  F_g {}  MDC {}  via {}",
            r.thickness.or(f64::NAN),
            r.focal_distance,
            r.mdc,
            r.attaining_feature.tag()
        );
    }
}
