//! A-priori bounds for thick curves in R³ and surfaces in R⁴.

use curve_thickness::bounds::class_count_bound;

fn main() {
    for (n, k) in [(3, 1), (4, 2)] {
        let r = class_count_bound(n, k, 1.0, 1.0).unwrap();
        println!("n = {n}, k = {k}");
        for (name, value) in r.table_rows() {
            println!("  {name:<22} {value}");
        }
    }
}
