use serde::{Deserialize, Serialize};

use super::{GraphPatch, PatchError};
use crate::length::Length;

/// Integer grid offset parallel to `v`, with entries in `{-1, 0, 1}`.
pub(crate) fn lattice_offset(v: &[f64]) -> Result<Vec<i64>, PatchError> {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(PatchError::NotLatticeDirection(v.to_vec()));
    }
    let o: Vec<i64> = v.iter().map(|x| (x / scale).round() as i64).collect();
    if v.iter().zip(&o).any(|(x, &i)| (x / scale - i as f64).abs() > 1e-9) {
        return Err(PatchError::NotLatticeDirection(v.to_vec()));
    }
    Ok(o)
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

/// Central second difference `(f(p + s o) - 2 f(p) + f(p - s o)) / (s |o| h)^2`
/// at node `idx` along the integer offset `o` with stride `s`.
pub fn directional_second_difference(
    patch: &GraphPatch,
    idx: usize,
    offset: &[i64],
    stride: i64,
) -> Result<Vec<f64>, PatchError> {
    let fwd: Vec<i64> = offset.iter().map(|o| o * stride).collect();
    let back: Vec<i64> = fwd.iter().map(|o| -o).collect();
    let (Some(a), Some(c)) = (patch.offset(idx, &fwd), patch.offset(idx, &back)) else {
        return Err(PatchError::BoundaryPoint(patch.multi_index(idx)));
    };
    let step2 = patch.spacing * patch.spacing * fwd.iter().map(|o| (o * o) as f64).sum::<f64>();
    let (fa, fb, fc) = (patch.value(a), patch.value(idx), patch.value(c));
    Ok((0..patch.m).map(|r| (fa[r] - 2.0 * fb[r] + fc[r]) / step2).collect())
}

/// Weighted first-derivative terms at a node: `(1 + |f_v|^2) sqrt(1 + |∇(f·w)|^2)`.
fn tilt_factor(patch: &GraphPatch, idx: usize, v: &[f64], w: &[f64]) -> f64 {
    let j = patch.jac(idx);
    let (m, k) = (patch.m, patch.k);
    let fv2: f64 = (0..m)
        .map(|r| (0..k).map(|c| j[r * k + c] * v[c]).sum::<f64>().powi(2))
        .sum();
    let gw2: f64 = (0..k)
        .map(|c| (0..m).map(|r| j[r * k + c] * w[r]).sum::<f64>().powi(2))
        .sum();
    (1.0 + fv2) * (1.0 + gw2).sqrt()
}

/// Focal-distance lower bound at node `idx` for unit directions `v` (a
/// lattice direction of the grid) and `w` in R^m. Unbounded when the second
/// difference along `v` has no component along `w` beyond rounding.
pub fn focal_radius_bound(patch: &GraphPatch, idx: usize, v: &[f64], w: &[f64]) -> Result<Length, PatchError> {
    if v.len() != patch.k || w.len() != patch.m {
        return Err(PatchError::InvalidParameters(
            "direction sizes do not match the patch".into(),
        ));
    }
    let o = lattice_offset(v)?;
    let (v, w) = (unit(v), unit(w));
    if w.iter().any(|x| !x.is_finite()) {
        return Err(PatchError::InvalidParameters("w must be nonzero".into()));
    }
    let d2 = directional_second_difference(patch, idx, &o, 1)?;
    let along: f64 = d2.iter().zip(&w).map(|(a, b)| a * b).sum();
    if along.abs() <= rounding_floor(patch, idx, &o) {
        return Ok(Length::Unbounded);
    }
    Ok(Length::Finite(tilt_factor(patch, idx, &v, &w) / along.abs()))
}

// Size of the second difference that rounding alone can produce.
fn rounding_floor(patch: &GraphPatch, idx: usize, o: &[i64]) -> f64 {
    let back: Vec<i64> = o.iter().map(|x| -x).collect();
    let mag = |i: Option<usize>| i.map_or(0.0, |i| patch.value(i).iter().fold(0.0f64, |m, x| m.max(x.abs())));
    let step2 = patch.spacing * patch.spacing * o.iter().map(|x| (x * x) as f64).sum::<f64>();
    64.0 * f64::EPSILON * (mag(patch.offset(idx, o)) + 2.0 * mag(Some(idx)) + mag(patch.offset(idx, &back))) / step2
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Verdict {
    FocalAtLeast(f64),
    FocalLessThan(f64),
}

/// Point where the second-derivative condition fails, and the ball of
/// radius `radius` it produces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub point: Vec<f64>,
    pub v: Vec<f64>,
    /// Oriented so that `f_vv · w > 0`.
    pub w: Vec<f64>,
    pub second_derivative: f64,
    pub tilt_factor: f64,
    pub ball_center: Vec<f64>,
    pub radius: f64,
}

impl Witness {
    /// Grid nodes whose graph point lies in the open witness ball.
    pub fn graph_points_inside(&self, patch: &GraphPatch) -> usize {
        (0..patch.node_count())
            .filter(|&i| {
                let x = patch.point(i);
                let d2: f64 = x
                    .iter()
                    .chain(patch.value(i))
                    .zip(&self.ball_center)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                d2 < self.radius * self.radius
            })
            .count()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateResult {
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    /// Largest `(|f_vv · w| - margin) R / tilt` over the scan; the verdict is
    /// `FocalLessThan` exactly when this exceeds 1.
    pub worst_ratio: f64,
    pub checked: usize,
}

fn scan_directions(k: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for i in 0..k {
        let mut e = vec![0.0; k];
        e[i] = 1.0;
        out.push(e);
    }
    for i in 0..k {
        for j in i + 1..k {
            for s in [1.0, -1.0] {
                let mut e = vec![0.0; k];
                e[i] = std::f64::consts::FRAC_1_SQRT_2;
                e[j] = s * std::f64::consts::FRAC_1_SQRT_2;
                out.push(e);
            }
        }
    }
    out
}

/// Decide whether every sampled second derivative is compatible with a
/// focal distance of at least `r`. Each node, lattice direction and normal
/// direction is checked with a Richardson error margin from the doubled
/// stencil; nodes without that stencil are skipped.
pub fn focal_certificate(patch: &GraphPatch, r: f64) -> Result<CertificateResult, PatchError> {
    patch.validate()?;
    if !(r > 0.0) {
        return Err(PatchError::InvalidParameters(format!(
            "radius must be positive, got {r}"
        )));
    }
    let vs = scan_directions(patch.k);
    let ws = scan_directions(patch.m);
    let mut worst = 0.0f64;
    let mut best: Option<(usize, usize, usize, f64, f64, f64)> = None;
    let mut checked = 0;
    for idx in 0..patch.node_count() {
        for (vi, v) in vs.iter().enumerate() {
            let o = lattice_offset(v)?;
            let (Ok(d1), Ok(d2)) = (
                directional_second_difference(patch, idx, &o, 1),
                directional_second_difference(patch, idx, &o, 2),
            ) else {
                continue;
            };
            for (wi, w) in ws.iter().enumerate() {
                checked += 1;
                let a: f64 = d1.iter().zip(w).map(|(x, y)| x * y).sum();
                let b: f64 = d2.iter().zip(w).map(|(x, y)| x * y).sum();
                let margin = (a - b).abs() / 3.0;
                let eff = a.abs() - margin;
                if eff <= 0.0 {
                    continue;
                }
                let tilt = tilt_factor(patch, idx, v, w);
                let ratio = eff * r / tilt;
                if ratio > worst {
                    worst = ratio;
                    best = Some((idx, vi, wi, a, tilt, ratio));
                }
            }
        }
    }
    if checked == 0 {
        return Err(PatchError::InvalidParameters(
            "grid has no node with a full second-difference stencil".into(),
        ));
    }
    let witness = match best {
        Some((idx, vi, wi, a, tilt, ratio)) if ratio > 1.0 => {
            let w: Vec<f64> = ws[wi].iter().map(|x| x * a.signum()).collect();
            let j = patch.jac(idx);
            let (m, k) = (patch.m, patch.k);
            let mut n: Vec<f64> = (0..k)
                .map(|c| -(0..m).map(|row| j[row * k + c] * w[row]).sum::<f64>())
                .collect();
            n.extend_from_slice(&w);
            let n = unit(&n);
            let base: Vec<f64> = patch
                .point(idx)
                .into_iter()
                .chain(patch.value(idx).iter().copied())
                .collect();
            Some(Witness {
                point: patch.point(idx),
                v: vs[vi].clone(),
                w,
                second_derivative: a.abs(),
                tilt_factor: tilt,
                ball_center: base.iter().zip(&n).map(|(p, q)| p + r * q).collect(),
                radius: r,
            })
        }
        _ => None,
    };
    let verdict = if witness.is_some() {
        Verdict::FocalLessThan(r)
    } else {
        Verdict::FocalAtLeast(r)
    };
    Ok(CertificateResult {
        verdict,
        witness,
        worst_ratio: worst,
        checked,
    })
}
