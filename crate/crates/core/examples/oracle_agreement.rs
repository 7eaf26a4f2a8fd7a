//! Rolling-ball and normal-cut-value oracles against the formula on seeded
//! random curves.

use curve_thickness::fixtures;
use curve_thickness::kernel::{thickness_with_oracles, OracleChoice};

fn main() {
    for seed in 0..5 {
        let curve = fixtures::random_trig_curve(seed, 5, 1000, 2);
        let r = thickness_with_oracles(&curve, OracleChoice::Both, None).expect("oracles bracket the value");
        let t = r.thickness.or(f64::NAN);
        println!(
            "seed {seed}: formula {t:.6}  ball {}  cut {}  max rel discrepancy {:.2e}",
            r.oracle_rolling_ball.unwrap(),
            r.oracle_cut_value.unwrap(),
            r.max_discrepancy.or(f64::NAN) / t
        );
    }
}
