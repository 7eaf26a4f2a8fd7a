use serde::{Deserialize, Serialize};

use super::certificate::directional_second_difference;
use super::eta::{Eta, MollifierSpec};
use super::{lipschitz_over_neighbors, operator_norm, GraphPatch, PatchError};

/// Measured constants of a mollification and the bounds they imply.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MollifyReport {
    pub spec: MollifierSpec,
    /// `sup |∇φ|` and `sup ||Hess φ||` of the cutoff.
    pub a: f64,
    pub b: f64,
    /// Bounds used for `||f'||` and the Lipschitz constant of `f'`.
    pub derivative_bound: f64,
    pub lipschitz: f64,
    /// Largest `|D²_v f · w|` over grid axes `v` and basis vectors `w`.
    pub second_difference_bound: f64,
    /// Continuum normalization and its relative difference from the
    /// discrete weight sum actually used.
    pub c_delta: f64,
    pub quadrature_rel_error: f64,
    pub sup_value_change: f64,
    pub sup_derivative_change: f64,
    pub lipschitz_after: f64,
    pub second_difference_after: f64,
    pub bound_value: f64,
    pub bound_derivative: f64,
    pub bound_lipschitz: f64,
    pub bound_second_difference: f64,
    pub identity_outside: bool,
}

impl MollifyReport {
    /// All four measured quantities are within their bounds (up to rounding).
    pub fn holds(&self) -> bool {
        let ok = |m: f64, b: f64| m <= b * (1.0 + 1e-9) + 1e-12;
        ok(self.sup_value_change, self.bound_value)
            && ok(self.sup_derivative_change, self.bound_derivative)
            && ok(self.lipschitz_after, self.bound_lipschitz)
            && ok(self.second_difference_after, self.bound_second_difference)
            && self.identity_outside
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mollified {
    pub patch: GraphPatch,
    pub report: MollifyReport,
}

fn strides(shape: &[usize]) -> Vec<i64> {
    let mut s = vec![1i64; shape.len()];
    for d in (0..shape.len().saturating_sub(1)).rev() {
        s[d] = s[d + 1] * shape[d + 1] as i64;
    }
    s
}

/// Sup over nodes, grid axes and basis normals of `|D²_v f · w|`.
fn second_difference_sup(patch: &GraphPatch) -> f64 {
    let mut worst: f64 = 0.0;
    for idx in 0..patch.node_count() {
        for d in 0..patch.k {
            let mut o = vec![0i64; patch.k];
            o[d] = 1;
            if let Ok(d2) = directional_second_difference(patch, idx, &o, 1) {
                worst = d2.iter().fold(worst, |m, x| m.max(x.abs()));
            }
        }
    }
    worst
}

/// Blend `f` with its `η`-weighted average `g` over `δ`-balls:
/// `h = (1 - φ) f + φ g` with `φ(x) = η(|x| / (2ρ))`. The grid must contain
/// the averaging stencil of every node within `2ρ` of the origin, and the
/// spacing must be at most `δ / 4`.
pub fn mollify(patch: &GraphPatch, spec: &MollifierSpec) -> Result<Mollified, PatchError> {
    patch.validate()?;
    spec.validate()?;
    let (k, m, h) = (patch.k, patch.m, patch.spacing);
    let (delta, rho) = (spec.delta, spec.rho);
    if delta < 4.0 * h * (1.0 - 1e-12) {
        return Err(PatchError::InvalidParameters(format!(
            "delta {delta} must be at least four grid spacings ({})",
            4.0 * h
        )));
    }
    let eta = Eta::standard();
    let reach = (delta / h + 1e-9).floor() as i64;
    // the box [-(2ρ + δ), 2ρ + δ]^k must lie in the grid
    let need = 2.0 * rho + delta;
    for d in 0..k {
        let lo = patch.origin[d];
        let hi = lo + (patch.shape[d] - 1) as f64 * h;
        if lo > -need + 1e-12 * need || hi < need - 1e-12 * need {
            return Err(PatchError::DomainTooSmall(format!(
                "axis {d} spans [{lo}, {hi}], need [-{need}, {need}]"
            )));
        }
    }

    // stencil offsets and weights
    let st = strides(&patch.shape);
    let mut offsets: Vec<(Vec<i64>, i64, f64)> = Vec::new();
    let side = (2 * reach + 1) as usize;
    for code in 0..side.pow(k as u32) {
        let mut c = code;
        let o: Vec<i64> = (0..k)
            .map(|_| {
                let v = (c % side) as i64 - reach;
                c /= side;
                v
            })
            .collect();
        let r = h * (o.iter().map(|x| (x * x) as f64).sum::<f64>()).sqrt();
        let w = eta.value(r / delta);
        if w > 0.0 {
            let lin = o.iter().zip(&st).map(|(a, b)| a * b).sum();
            offsets.push((o, lin, w));
        }
    }
    let weight_sum: f64 = offsets.iter().map(|x| x.2).sum();
    let c_delta = eta.normalization(k, delta);
    let quadrature_rel_error = ((weight_sum * h.powi(k as i32)) * c_delta - 1.0).abs();

    let s = m * k;
    let mut values = patch.values.clone();
    let mut jacobian = patch.jacobian.clone();
    let mut identity_outside = true;
    let mut g = vec![0.0; m];
    let mut gj = vec![0.0; s];
    for idx in 0..patch.node_count() {
        let x = patch.point(idx);
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let t = r / (2.0 * rho);
        let phi = eta.value(t);
        if phi == 0.0 {
            continue;
        }
        let mi = patch.multi_index(idx);
        if (0..k).any(|d| mi[d] - reach < 0 || mi[d] + reach >= patch.shape[d] as i64) {
            return Err(PatchError::DomainTooSmall(format!(
                "averaging stencil of node {mi:?} leaves the grid"
            )));
        }
        g.iter_mut().for_each(|v| *v = 0.0);
        gj.iter_mut().for_each(|v| *v = 0.0);
        for (_, lin, w) in &offsets {
            let j = (idx as i64 + lin) as usize;
            for r in 0..m {
                g[r] += w * patch.values[j * m + r];
            }
            for e in 0..s {
                gj[e] += w * patch.jacobian[j * s + e];
            }
        }
        g.iter_mut().for_each(|v| *v /= weight_sum);
        gj.iter_mut().for_each(|v| *v /= weight_sum);
        let dphi = eta.d1(t) / (2.0 * rho);
        let grad: Vec<f64> = if r > 0.0 {
            x.iter().map(|v| dphi * v / r).collect()
        } else {
            vec![0.0; k]
        };
        for row in 0..m {
            let fv = patch.values[idx * m + row];
            values[idx * m + row] = (1.0 - phi) * fv + phi * g[row];
            for col in 0..k {
                let e = row * k + col;
                jacobian[idx * s + e] =
                    (1.0 - phi) * patch.jacobian[idx * s + e] + phi * gj[e] + (g[row] - fv) * grad[col];
            }
        }
    }
    for idx in 0..patch.node_count() {
        let r = patch.point(idx).iter().map(|v| v * v).sum::<f64>().sqrt();
        if r >= 2.0 * rho && patch.value(idx) != &values[idx * m..(idx + 1) * m] {
            identity_outside = false;
        }
    }

    let (a, b) = eta.cutoff_constants(k, rho);
    let big_a = patch.a();
    let big_b = patch.b();
    let big_c = second_difference_sup(patch);
    let spread = delta * (2.0 * a * big_b + b * big_a);

    let mut out = patch.clone();
    out.values = values;
    out.jacobian = jacobian;
    out.derivative_bound_a = Some(big_a + (a * big_a + big_b) * delta);
    out.lipschitz_b = Some(big_b + spread);

    let mut sup_value_change: f64 = 0.0;
    let mut sup_derivative_change: f64 = 0.0;
    let mut diff = vec![0.0; s];
    for idx in 0..patch.node_count() {
        let dv = (0..m)
            .map(|r| (out.values[idx * m + r] - patch.values[idx * m + r]).powi(2))
            .sum::<f64>()
            .sqrt();
        sup_value_change = sup_value_change.max(dv);
        for e in 0..s {
            diff[e] = out.jacobian[idx * s + e] - patch.jacobian[idx * s + e];
        }
        sup_derivative_change = sup_derivative_change.max(operator_norm(&diff, m, k));
    }
    let report = MollifyReport {
        spec: *spec,
        a,
        b,
        derivative_bound: big_a,
        lipschitz: big_b,
        second_difference_bound: big_c,
        c_delta,
        quadrature_rel_error,
        sup_value_change,
        sup_derivative_change,
        lipschitz_after: lipschitz_over_neighbors(&out, &out.jacobian),
        second_difference_after: second_difference_sup(&out),
        bound_value: big_a * delta,
        bound_derivative: (a * big_a + big_b) * delta,
        bound_lipschitz: big_b + spread,
        bound_second_difference: big_c + spread,
        identity_outside,
    };
    Ok(Mollified { patch: out, report })
}

/// `|x|` with its kink rounded to `x²/2` on `[-1, 1]`, on `[-half, half]`,
/// with the exact bounds `|f'| <= 1` and `Lip(f') = 1` declared.
pub fn smoothed_abs_patch(half: f64, nodes: usize) -> Result<GraphPatch, PatchError> {
    Ok(GraphPatch::centered(1, 1, half, nodes, |x| {
        let t = x[0];
        if t.abs() <= 1.0 {
            (vec![0.5 * t * t], vec![t])
        } else {
            (vec![t.abs() - 0.5], vec![t.signum()])
        }
    })?
    .with_bounds(1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoothed_absolute_value() {
        let f = smoothed_abs_patch(1.5, 1201).unwrap();
        let spec = MollifierSpec { delta: 0.01, rho: 0.5 };
        let out = mollify(&f, &spec).unwrap();
        let r = &out.report;
        assert!(r.holds(), "{r:#?}");
        assert!(r.quadrature_rel_error < 0.05);
        // a quadratic averaged by a symmetric kernel gains a constant offset
        let c = f.nearest_node(&[0.0]).unwrap();
        let lift = out.patch.value(c)[0] - f.value(c)[0];
        assert!(lift > 0.0 && lift < 0.01 * 0.01);
    }

    #[test]
    fn untouched_outside_and_convolved_inside() {
        let f = smoothed_abs_patch(1.5, 1201).unwrap();
        let spec = MollifierSpec { delta: 0.02, rho: 0.4 };
        let out = mollify(&f, &spec).unwrap();
        assert!(out.report.identity_outside);
        for idx in 0..f.node_count() {
            let x = f.point(idx)[0].abs();
            if x >= 0.8 {
                assert_eq!(out.patch.value(idx), f.value(idx));
                assert_eq!(out.patch.jac(idx), f.jac(idx));
            }
        }
        // inside B(0, ρ) the derivative of a quadratic is preserved exactly by
        // symmetric averaging
        let c = f.nearest_node(&[0.2]).unwrap();
        assert!((out.patch.jac(c)[0] - f.jac(c)[0]).abs() < 1e-12);
    }

    #[test]
    fn domain_and_spacing_checks() {
        let f = smoothed_abs_patch(1.0, 401).unwrap();
        let too_big = MollifierSpec { delta: 0.02, rho: 0.5 };
        assert!(matches!(mollify(&f, &too_big), Err(PatchError::DomainTooSmall(_))));
        let too_fine = MollifierSpec { delta: 0.005, rho: 0.2 };
        assert!(matches!(mollify(&f, &too_fine), Err(PatchError::InvalidParameters(_))));
    }

    #[test]
    fn two_dimensional_vector_valued() {
        let f = GraphPatch::centered(2, 2, 1.0, 161, |x| {
            let (u, v) = (x[0], x[1]);
            (
                vec![(2.0 * u).sin() * 0.3 + 0.1 * v * v, (u + v).cos() * 0.2],
                vec![
                    0.6 * (2.0 * u).cos(),
                    0.2 * v,
                    -0.2 * (u + v).sin(),
                    -0.2 * (u + v).sin(),
                ],
            )
        })
        .unwrap();
        let spec = MollifierSpec { delta: 0.05, rho: 0.35 };
        let out = mollify(&f, &spec).unwrap();
        assert!(out.report.identity_outside);
        assert!(out.report.sup_value_change <= out.report.bound_value);
        assert!(out.report.sup_derivative_change <= out.report.bound_derivative);
        assert!(out.report.second_difference_after <= out.report.bound_second_difference);
    }
}
