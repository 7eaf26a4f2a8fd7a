use std::f64::consts::{PI, TAU};

use proptest::prelude::*;

use curve_thickness::bounds::{class_count_bound, Magnitude};
use curve_thickness::curve::{build_curve, estimate_tangents, point_at, vertex_curvatures, DiscreteCurve};
use curve_thickness::fixtures;
use curve_thickness::io::{curve_from_csv, curve_from_json, curve_to_csv, curve_to_json};
use curve_thickness::isotopy::{isotopy_check, suggested_rho};
use curve_thickness::kernel::{thickness, thickness_with_oracles, OracleChoice, ThicknessReport};
use curve_thickness::patch::{smoothed_abs_patch, GraphPatch};
use curve_thickness::semicontinuity::{run_experiment, PerturbationFamily, PerturbationSpec, SemicontinuityExperiment};
use curve_thickness::tighten::{tighten, TightenConfig, TightenTrace};
use curve_thickness::Length;

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig {
        cases: n,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn t_of(c: &DiscreteCurve) -> f64 {
    thickness(c).unwrap().thickness.finite().unwrap()
}

/// Orthonormal basis from Gram-Schmidt on the given rows.
fn orthonormal(raw: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let mut q: Vec<Vec<f64>> = Vec::new();
    for r in raw {
        let mut v = r.clone();
        for b in &q {
            let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n < 1e-3 {
            return None;
        }
        q.push(v.into_iter().map(|x| x / n).collect());
    }
    Some(q)
}

fn apply(q: &[Vec<f64>], p: &[f64]) -> Vec<f64> {
    q.iter()
        .map(|row| row.iter().zip(p).map(|(a, b)| a * b).sum())
        .collect()
}

fn rigid(curve: &DiscreteCurve, q: &[Vec<f64>], shift: &[f64]) -> DiscreteCurve {
    curve
        .map_points(|p| apply(q, p).iter().zip(shift).map(|(a, b)| a + b).collect())
        .unwrap()
}

fn basis3() -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-1.0..1.0f64, 3), 3)
        .prop_filter_map("degenerate", |raw| orthonormal(&raw))
}

fn small_fixture() -> impl Strategy<Value = DiscreteCurve> {
    prop_oneof![
        (0.5..3.0f64).prop_map(|r| fixtures::circle(300, r)),
        (1.2..3.0f64).prop_map(|a| fixtures::ellipse(a, 1.0, 400)),
        (0.5..3.0f64).prop_map(|f| fixtures::stadium(1.0, f, 400)),
        (0u64..50).prop_map(|s| fixtures::random_trig_curve(s, 4, 400, 2)),
        Just(fixtures::trefoil(300)),
    ]
}

fn lift3(c: &DiscreteCurve) -> DiscreteCurve {
    if c.dim() == 3 {
        return c.clone();
    }
    let comps = c
        .components()
        .into_iter()
        .map(|r| r.into_iter().map(|p| vec![p[0], p[1], 0.0]).collect())
        .collect();
    build_curve(comps, 3).unwrap()
}

#[test]
fn arclength_converges_quadratically() {
    let err = |n: usize| (TAU * 1.7 - fixtures::circle(n, 1.7).total_length()).abs();
    for n in [50, 100, 200, 400, 800] {
        let ratio = err(n) / err(2 * n);
        assert!((ratio - 4.0).abs() < 0.05, "n {n}: ratio {ratio}");
        // the inscribed n-gon misses 2πρ by π³ρ/(3n²) to leading order
        let lead = PI.powi(3) / 3.0 * 1.7 / (n * n) as f64;
        assert!(
            (err(n) / lead - 1.0).abs() < 5.0 / (n * n) as f64,
            "n {n}: {}",
            err(n) / lead
        );
    }
}

proptest! {
    #![proptest_config(cases(24))]

    #[test]
    fn tangents_are_rigidly_equivariant(c in small_fixture(), q in basis3(), shift in prop::collection::vec(-5.0..5.0f64, 3)) {
        let c = lift3(&c);
        let moved = rigid(&c, &q, &shift);
        let (a, b) = (estimate_tangents(&c), estimate_tangents(&moved));
        for comp in 0..c.num_components() {
            for i in 0..c.ring(comp).len() {
                let expect = apply(&q, a.at_vertex(comp, i));
                let got = b.at_vertex(comp, i);
                for d in 0..3 {
                    prop_assert!((expect[d] - got[d]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn tangents_are_unit_and_oriented(c in small_fixture()) {
        let tf = estimate_tangents(&c);
        for comp in 0..c.num_components() {
            let r = c.ring(comp);
            for i in 0..r.len() {
                let t = tf.at_vertex(comp, i);
                let n: f64 = t.iter().map(|x| x * x).sum::<f64>().sqrt();
                prop_assert!((n - 1.0).abs() < 1e-12);
                let fwd: f64 = t.iter().zip(r.vertex_offset(i, 1).iter().zip(r.vertex_offset(i, -1))).map(|(t, (a, b))| t * (a - b)).sum();
                prop_assert!(fwd > 0.0);
            }
        }
    }

    #[test]
    fn point_at_is_one_lipschitz(c in small_fixture(), u in 0.0..1.0f64, v in 0.0..1.0f64) {
        let r = c.ring(0);
        let (s1, s2) = (u * r.length(), v * r.length());
        let p1 = point_at(&c, &c.coord_at_arclength(0, s1).unwrap()).unwrap();
        let p2 = point_at(&c, &c.coord_at_arclength(0, s2).unwrap()).unwrap();
        let d: f64 = p1.iter().zip(&p2).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        prop_assert!(d <= r.arc_separation(s1, s2) + 1e-12);
    }

    #[test]
    fn thickness_is_rigidly_invariant(c in small_fixture(), q in basis3(), shift in prop::collection::vec(-5.0..5.0f64, 3)) {
        let c = lift3(&c);
        let (a, b) = (t_of(&c), t_of(&rigid(&c, &q, &shift)));
        prop_assert!((a - b).abs() <= 1e-9 * a, "{a} vs {b}");
    }

    #[test]
    fn thickness_is_bounded_by_both_terms(c in small_fixture()) {
        let r = thickness(&c).unwrap();
        prop_assert!(r.thickness <= r.focal_distance);
        prop_assert!(r.thickness <= r.mdc.half());
        prop_assert!(r.thickness == r.focal_distance.min(r.mdc.half()));
    }
}

proptest! {
    #![proptest_config(cases(8))]

    #[test]
    fn thickness_scales_linearly(c in small_fixture()) {
        let t = t_of(&c);
        for lam in [0.5, 2.0, 10.0] {
            let ts = t_of(&c.scaled(lam));
            prop_assert!((ts - lam * t).abs() <= 1e-9 * lam * t, "λ {lam}: {ts} vs {}", lam * t);
        }
    }

    #[test]
    fn curve_round_trips_through_json_and_csv(c in small_fixture()) {
        prop_assert_eq!(&curve_from_json(&curve_to_json(&c)).unwrap(), &c);
        prop_assert_eq!(&curve_from_csv(&curve_to_csv(&c)).unwrap(), &c);
    }

    #[test]
    fn thickness_report_round_trips(c in small_fixture()) {
        let r = thickness(&c).unwrap();
        let back: ThicknessReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        prop_assert_eq!(back, r);
    }

    #[test]
    fn isotopy_check_identity(c in small_fixture(), frac in 0.01..1.0f64) {
        let rho = frac * suggested_rho(thickness(&c).unwrap().thickness).unwrap();
        prop_assert!(isotopy_check(&c, &c, rho).unwrap().is_isotopic());
    }

    #[test]
    fn isotopy_check_is_symmetric_at_small_gap(seed in 0u64..1000, frac in 0.05..0.9f64) {
        let k = fixtures::random_trig_curve(seed, 3, 400, 2);
        let tk = t_of(&k);
        // rigid shift by a fraction of the radius both curves can tolerate
        let shift = frac * tk / 8.0 * 0.5;
        let l = k.map_points(|p| vec![p[0] + shift, p[1]]).unwrap();
        let rho = suggested_rho(Length::Finite(tk.min(t_of(&l)))).unwrap();
        prop_assert!(isotopy_check(&k, &l, rho).unwrap().is_isotopic());
        prop_assert!(isotopy_check(&l, &k, rho).unwrap().is_isotopic());
    }
}

#[test]
fn chord_bound_on_fixtures() {
    for (name, curve) in fixtures::standard_set() {
        let kappas = vertex_curvatures(&curve);
        for (c, ring) in curve.rings().iter().enumerate() {
            let cmax = kappas[c].iter().cloned().fold(0.0, f64::max);
            let h = ring.max_segment_length();
            let slack = cmax * h * h + 1e-9;
            let reach = (PI / (2.0 * cmax)).min(ring.length() / 2.0);
            for i in (0..ring.len()).step_by(7) {
                let s0 = ring.arclength_at(i);
                let p0 = ring.vertex(i);
                for j in 1..=40 {
                    let s = reach * j as f64 / 40.0;
                    let coord = curve.coord_at_arclength(c, (s0 + s) % ring.length()).unwrap();
                    let p = point_at(&curve, &coord).unwrap();
                    let chord: f64 = p.iter().zip(p0).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                    let bound = (s * cmax).sin() / cmax;
                    assert!(
                        chord >= bound - slack,
                        "{name} c{c} i{i} s {s}: chord {chord} < {bound}"
                    );
                }
            }
        }
    }
}

fn magnitude_le(a: &Magnitude, b: &Magnitude) -> bool {
    match (a.ln, b.ln) {
        (Some(x), Some(y)) => x <= y * (1.0 + 1e-12),
        (Some(_), None) => true,
        (None, Some(_)) => false,
        (None, None) => a.ln_abs_ln.unwrap() <= b.ln_abs_ln.unwrap() * (1.0 + 1e-12),
    }
}

#[test]
fn bounds_are_monotone_in_radius_and_dimension() {
    for k in [1u32, 2, 3] {
        for n in (k + 1)..=8 {
            let mut prev = class_count_bound(n, k, 1.0, 1.0).unwrap();
            for r in [1.5, 2.0, 4.0, 10.0, 100.0] {
                let next = class_count_bound(n, k, r, 1.0).unwrap();
                assert!(
                    magnitude_le(&prev.class_bound_exponent, &next.class_bound_exponent),
                    "k {k} n {n} R {r}"
                );
                prev = next;
            }
            if n > k + 1 {
                let lower = class_count_bound(n - 1, k, 2.0, 1.0).unwrap();
                let upper = class_count_bound(n, k, 2.0, 1.0).unwrap();
                assert!(
                    magnitude_le(&lower.class_bound_exponent, &upper.class_bound_exponent),
                    "k {k} n {n}"
                );
            }
            let b = class_count_bound(n, k, 1.0, 1.0).unwrap();
            assert!(k > 1 || b.rho.value.unwrap() <= 0.125);
            assert!(b.lambda0.ln.map_or(true, |l| l >= 0.0));
        }
    }
}

#[test]
fn reports_round_trip_through_json() {
    fn round<T: serde::Serialize + serde::de::DeserializeOwned + PartialEq + std::fmt::Debug>(x: &T) {
        let back: T = serde_json::from_str(&serde_json::to_string(x).unwrap()).unwrap();
        assert_eq!(&back, x);
    }
    round(&class_count_bound(4, 2, 1.0, 1.0).unwrap());
    round(&class_count_bound(3, 1, 2.5, 0.5).unwrap());
    round(&smoothed_abs_patch(1.0, 41).unwrap());
    let p: GraphPatch =
        serde_json::from_str(&serde_json::to_string(&smoothed_abs_patch(1.0, 41).unwrap()).unwrap()).unwrap();
    assert!(p.validate().is_ok());
    round(&thickness_with_oracles(&fixtures::ellipse(2.0, 1.0, 400), OracleChoice::Both, None).unwrap());
    let e: SemicontinuityExperiment = run_experiment(
        &fixtures::circle(200, 1.0),
        &PerturbationSpec::harmonic(PerturbationFamily::Mixed { frequency: 5, seed: 3 }, 0.05, 8),
    )
    .unwrap();
    round(&e);
    let c = fixtures::circle(60, 1.0);
    round(&isotopy_check(&c, &c, 0.1).unwrap());
    let mut trace = tighten(
        &fixtures::ellipse(1.5, 1.0, 80),
        &TightenConfig {
            steps: 200,
            ..TightenConfig::default()
        },
    )
    .unwrap();
    trace.final_curve = None;
    let back: TightenTrace = serde_json::from_str(&serde_json::to_string(&trace).unwrap()).unwrap();
    assert_eq!(back, trace);
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let curve = fixtures::random_trig_curve(11, 5, 1000, 2);
            let report = thickness_with_oracles(&curve, OracleChoice::Both, None).unwrap();
            let trace = tighten(
                &fixtures::perturbed_circle(3, 120, 0.05),
                &TightenConfig {
                    steps: 300,
                    ..TightenConfig::default()
                },
            )
            .unwrap();
            let k = fixtures::trefoil(300);
            let l = k.map_points(|p| vec![p[0] + 0.01, p[1], p[2]]).unwrap();
            let iso = isotopy_check(&k, &l, 0.05).unwrap();
            (
                serde_json::to_string(&report).unwrap(),
                serde_json::to_string(&trace).unwrap(),
                serde_json::to_string(&iso).unwrap(),
            )
        })
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn broken_curves_are_rejected() {
    let figure_eight: Vec<Vec<f64>> = (0..200)
        .map(|i| {
            let t = TAU * i as f64 / 200.0;
            vec![t.sin(), (2.0 * t).sin() / 2.0]
        })
        .collect();
    assert!(build_curve(vec![figure_eight], 2).is_err());
}
