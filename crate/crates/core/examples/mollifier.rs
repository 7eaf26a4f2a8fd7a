//! Mollifying the rounded absolute value and checking the five bounds.

use curve_thickness::patch::{mollify, smoothed_abs_patch, MollifierSpec};

fn main() {
    let patch = smoothed_abs_patch(1.5, 1201).expect("odd node count");
    let m = mollify(&patch, &MollifierSpec { delta: 0.01, rho: 0.5 }).expect("grid covers the support");
    let r = &m.report;
    println!("a = {:.4}, b = {:.4}", r.a, r.b);
    println!("sup |h - f|    {:.3e} <= {:.3e}", r.sup_value_change, r.bound_value);
    println!(
        "sup |h' - f'|  {:.3e} <= {:.3e}",
        r.sup_derivative_change, r.bound_derivative
    );
    println!("Lip(h')        {:.3e} <= {:.3e}", r.lipschitz_after, r.bound_lipschitz);
    println!(
        "second diff    {:.3e} <= {:.3e}",
        r.second_difference_after, r.bound_second_difference
    );
    println!("identity outside 2ρ: {}, all hold: {}", r.identity_outside, r.holds());
}
