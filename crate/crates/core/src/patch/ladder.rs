use serde::{Deserialize, Serialize};

use super::eta::MollifierSpec;
use super::mollify::mollify;
use super::{GraphPatch, PatchError};
use crate::bvh::SegmentBvh;
use crate::curve::{build_curve, circumcircle_curvature, estimate_tangents, DiscreteCurve};
use crate::geom;
use crate::kernel::{focal_distance, mdc, sup_curvature};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderConfig {
    /// Focal distance of the input (must hold already).
    pub r1: f64,
    /// Focal distance guaranteed for the output, `0 < r2 < r1`.
    pub r2: f64,
    /// Allowed C¹ distance between input and output.
    pub sigma: f64,
    pub max_halvings: u32,
}

pub const DEFAULT_MAX_HALVINGS: u32 = 12;

impl LadderConfig {
    pub fn new(r1: f64, r2: f64, sigma: f64) -> LadderConfig {
        LadderConfig {
            r1,
            r2,
            sigma,
            max_halvings: DEFAULT_MAX_HALVINGS,
        }
    }
}

/// What one window accepted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowStep {
    pub component: usize,
    pub center_vertex: usize,
    pub delta: f64,
    /// Curvature and slope allowances after this window.
    pub curvature_allowance: f64,
    pub slope_allowance: f64,
    pub max_curvature: f64,
    pub max_slope: f64,
    pub local_change: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothingResult {
    #[serde(skip)]
    pub curve: Option<DiscreteCurve>,
    /// Cutoff scale of every window (mollified region has radius `2 rho`).
    pub rho: f64,
    pub steps: Vec<WindowStep>,
    pub sup_curvature: f64,
    pub d_c1: f64,
}

impl SmoothingResult {
    pub fn curve(&self) -> &DiscreteCurve {
        self.curve.as_ref().expect("smoothing result carries its curve")
    }
}

/// Smooth a curve window by window. Each window is the curve written as a
/// graph over its tangent line at a vertex, mollified with the radial cutoff
/// and written back at the original vertex abscissas. Window `j` of `J` must
/// keep the curvature below `1/r1 + (j+1)/J (1/r2 - 1/r1)` and the slope
/// below `1 + (j+1)/J` and move the curve by at most `sigma / 4` in the C¹
/// sense; otherwise its `δ` is halved.
pub fn smoothing_ladder(curve: &DiscreteCurve, cfg: &LadderConfig) -> Result<SmoothingResult, PatchError> {
    let LadderConfig {
        r1,
        r2,
        sigma,
        max_halvings,
    } = *cfg;
    if !(r1 > r2 && r2 > 0.0 && sigma > 0.0 && r1.is_finite()) {
        return Err(PatchError::InvalidParameters(format!(
            "need r1 > r2 > 0 and sigma > 0, got {r1}, {r2}, {sigma}"
        )));
    }
    let focal = focal_distance(curve);
    if focal.or(f64::INFINITY) < r1 * (1.0 - 1e-9) {
        return Err(PatchError::InvalidParameters(format!(
            "input focal distance {focal:?} is below r1 = {r1}"
        )));
    }
    let tf = estimate_tangents(curve);
    let (m, _) = mdc(curve, &tf).map_err(|e| PatchError::InvalidParameters(e.to_string()))?;
    let rho = r2.min(m.half().or(f64::INFINITY)) / 4.0;

    let windows: Vec<(usize, usize)> = curve
        .rings()
        .iter()
        .enumerate()
        .flat_map(|(c, ring)| {
            let count = (ring.length() / (2.0 * rho)).ceil().max(1.0) as usize;
            (0..count).map(move |j| (c, (j * ring.len()) / count))
        })
        .collect();
    let total = windows.len() as f64;

    let mut cur = curve.clone();
    let mut steps = Vec::with_capacity(windows.len());
    for (j, &(c, center)) in windows.iter().enumerate() {
        let curvature_allowance = 1.0 / r1 + (j + 1) as f64 / total * (1.0 / r2 - 1.0 / r1);
        let slope_allowance = 1.0 + (j + 1) as f64 / total;
        let mut delta = rho / 2.0;
        let floor = cur.ring(c).mean_segment_length() / 8.0;
        let mut last = (f64::INFINITY, f64::INFINITY);
        let mut accepted = None;
        for _ in 0..=max_halvings {
            if delta < floor {
                break;
            }
            // A_j (1 + δ) <= A_{j+1}
            let slope_step_ok = (1.0 + j as f64 / total) * (1.0 + delta) <= slope_allowance;
            let attempt = smooth_window(&cur, c, center, rho, delta, j)?;
            last = (attempt.local_change, attempt.max_curvature);
            if slope_step_ok
                && attempt.max_curvature <= curvature_allowance
                && attempt.max_slope <= slope_allowance
                && attempt.local_change <= sigma / 4.0
            {
                accepted = Some(attempt);
                break;
            }
            delta /= 2.0;
        }
        let Some(a) = accepted else {
            return Err(PatchError::LadderExhausted {
                window: j,
                achieved_d_c1: last.0,
                achieved_sup_curvature: last.1,
            });
        };
        steps.push(WindowStep {
            component: c,
            center_vertex: center,
            delta,
            curvature_allowance,
            slope_allowance,
            max_curvature: a.max_curvature,
            max_slope: a.max_slope,
            local_change: a.local_change,
        });
        cur = a.curve;
    }
    let sup_k = sup_curvature(&cur);
    let d = d_c1(curve, &cur);
    if sup_k > (1.0 / r2) * (1.0 + 1e-9) || d > sigma {
        return Err(PatchError::LadderExhausted {
            window: windows.len(),
            achieved_d_c1: d,
            achieved_sup_curvature: sup_k,
        });
    }
    Ok(SmoothingResult {
        curve: Some(cur),
        rho,
        steps,
        sup_curvature: sup_k,
        d_c1: d,
    })
}

struct WindowAttempt {
    curve: DiscreteCurve,
    max_curvature: f64,
    max_slope: f64,
    local_change: f64,
}

fn hermite(xs: &[f64], ys: &[Vec<f64>], slopes: &[Vec<f64>], x: f64) -> (Vec<f64>, Vec<f64>) {
    let i = match xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
        Ok(i) => i.min(xs.len() - 2),
        Err(i) => i.clamp(1, xs.len() - 1) - 1,
    };
    let d = xs[i + 1] - xs[i];
    let t = (x - xs[i]) / d;
    let (t2, t3) = (t * t, t * t * t);
    let (h00, h10, h01, h11) = (
        2.0 * t3 - 3.0 * t2 + 1.0,
        t3 - 2.0 * t2 + t,
        3.0 * t2 - 2.0 * t3,
        t3 - t2,
    );
    let (d00, d10, d01, d11) = (
        6.0 * t2 - 6.0 * t,
        3.0 * t2 - 4.0 * t + 1.0,
        6.0 * t - 6.0 * t2,
        3.0 * t2 - 2.0 * t,
    );
    let m = ys[i].len();
    let val = (0..m)
        .map(|r| h00 * ys[i][r] + h10 * d * slopes[i][r] + h01 * ys[i + 1][r] + h11 * d * slopes[i + 1][r])
        .collect();
    let der = (0..m)
        .map(|r| (d00 * ys[i][r] + d01 * ys[i + 1][r]) / d + d10 * slopes[i][r] + d11 * slopes[i + 1][r])
        .collect();
    (val, der)
}

fn smooth_window(
    cur: &DiscreteCurve,
    c: usize,
    center: usize,
    rho: f64,
    delta: f64,
    window: usize,
) -> Result<WindowAttempt, PatchError> {
    let ring = cur.ring(c);
    let n = ring.len();
    let dim = cur.dim();
    let tf = estimate_tangents(cur);
    let origin = ring.vertex(center).to_vec();
    let tangent = tf.at_vertex(c, center).to_vec();
    let normals = geom::normal_basis(&tangent);
    let m = normals.len();
    let hg = delta / 4.0;
    let reach = 2.0 * rho + 3.0 * delta;
    let arc_half = 1.25 * reach + 2.0 * ring.max_segment_length();
    if 2.0 * arc_half >= 0.9 * ring.length() {
        return Err(PatchError::NotAGraph { window });
    }

    // window vertices in order of increasing arclength
    let s0 = ring.arclength_at(center);
    let mut idx: Vec<usize> = Vec::new();
    let mut i = center;
    while ring.arc_separation(ring.arclength_at(i), s0) <= arc_half {
        idx.push(i);
        i = (i + n - 1) % n;
    }
    idx.reverse();
    let mut i = (center + 1) % n;
    while ring.arc_separation(ring.arclength_at(i), s0) <= arc_half {
        idx.push(i);
        i = (i + 1) % n;
    }
    let local = |p: &[f64]| -> (f64, Vec<f64>) {
        let d = geom::sub(p, &origin);
        (
            geom::dot(&d, &tangent),
            normals.iter().map(|nv| geom::dot(&d, nv)).collect(),
        )
    };
    let mut xs = Vec::with_capacity(idx.len());
    let mut ys = Vec::with_capacity(idx.len());
    let mut slopes = Vec::with_capacity(idx.len());
    for &v in &idx {
        let (x, y) = local(ring.vertex(v));
        let t = tf.at_vertex(c, v);
        let tx = geom::dot(t, &tangent);
        if tx <= 0.1 {
            return Err(PatchError::NotAGraph { window });
        }
        xs.push(x);
        ys.push(y);
        slopes.push(normals.iter().map(|nv| geom::dot(t, nv) / tx).collect::<Vec<f64>>());
    }
    if xs.windows(2).any(|w| w[1] <= w[0]) || xs[0] > -reach || *xs.last().unwrap() < reach {
        return Err(PatchError::NotAGraph { window });
    }

    let steps = (reach / hg).ceil() as usize;
    let patch = GraphPatch::centered(1, m, steps as f64 * hg, 2 * steps + 1, |x| {
        let (v, d) = hermite(&xs, &ys, &slopes, x[0]);
        (v, d)
    })?;
    let out = mollify(&patch, &MollifierSpec { delta, rho })?;
    let h = &out.patch;
    let grid_x: Vec<f64> = (0..h.node_count()).map(|i| h.point(i)[0]).collect();
    let grid_y: Vec<Vec<f64>> = (0..h.node_count()).map(|i| h.value(i).to_vec()).collect();
    let grid_s: Vec<Vec<f64>> = (0..h.node_count()).map(|i| h.jac(i).to_vec()).collect();

    let mut rings = cur.components();
    let mut moved = Vec::new();
    let mut max_slope: f64 = 0.0;
    for (k, &v) in idx.iter().enumerate() {
        if xs[k].abs() >= 2.0 * rho {
            continue;
        }
        let (y, s) = hermite(&grid_x, &grid_y, &grid_s, xs[k]);
        max_slope = max_slope.max(s.iter().map(|q| q * q).sum::<f64>().sqrt());
        let mut p = geom::axpy(&origin, xs[k], &tangent);
        for (r, nv) in normals.iter().enumerate() {
            p = geom::axpy(&p, y[r], nv);
        }
        rings[c][v] = p;
        moved.push(v);
    }
    let next = build_curve(rings, dim)?;
    let new_ring = next.ring(c);
    let new_tf = estimate_tangents(&next);
    let mut max_curvature: f64 = 0.0;
    let mut local_change: f64 = 0.0;
    for &v in &moved {
        for w in [v + n - 1, v, v + 1] {
            let w = w % n;
            let k = circumcircle_curvature(
                new_ring.vertex_offset(w, -1),
                new_ring.vertex(w),
                new_ring.vertex(w + 1),
            );
            max_curvature = max_curvature.max(k);
        }
        let shift = geom::dist(ring.vertex(v), new_ring.vertex(v));
        let turn = geom::angle_between(tf.at_vertex(c, v), new_tf.at_vertex(c, v));
        local_change = local_change.max(shift + turn);
    }
    Ok(WindowAttempt {
        curve: next,
        max_curvature,
        max_slope,
        local_change,
    })
}

/// C¹ distance estimate between two curves with the same component count:
/// each component of `a` is matched to the same component of `b` by the
/// arclength-proportional map anchored at the point of `b` nearest to the
/// first vertex of `a`; the result is the largest position error plus
/// tangent angle over the vertices of `a`.
pub fn d_c1(a: &DiscreteCurve, b: &DiscreteCurve) -> f64 {
    if a.num_components() != b.num_components() || a.dim() != b.dim() {
        return f64::INFINITY;
    }
    let ta = estimate_tangents(a);
    let tb = estimate_tangents(b);
    let bvh = SegmentBvh::new(b);
    let mut worst: f64 = 0.0;
    for c in 0..a.num_components() {
        let (ra, rb) = (a.ring(c), b.ring(c));
        let Some(anchor) = bvh.nearest(ra.vertex(0), |cc, _| cc == c) else {
            return f64::INFINITY;
        };
        let s_b0 = rb.arclength_at(anchor.segment) + anchor.t * rb.segment_length(anchor.segment);
        let forward = geom::dot(ta.at_vertex(c, 0), &tb.interpolated(c, anchor.segment, anchor.t)) >= 0.0;
        let ratio = rb.length() / ra.length();
        for i in 0..ra.len() {
            let s = ra.arclength_at(i) * ratio;
            let sb = if forward { s_b0 + s } else { s_b0 - s }.rem_euclid(rb.length());
            let (seg, t) = rb.locate(sb);
            let p = rb.point_on_segment(seg, t);
            let mut tan = tb.interpolated(c, seg, t);
            if !forward {
                tan.iter_mut().for_each(|x| *x = -*x);
            }
            let e = geom::dist(ra.vertex(i), &p) + geom::angle_between(ta.at_vertex(c, i), &tan);
            worst = worst.max(e);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn d_c1_of_identical_curves_is_zero() {
        let k = fixtures::ellipse(2.0, 1.0, 500);
        assert!(d_c1(&k, &k) < 1e-12);
        let shifted = k.map_points(|p| vec![p[0] + 1e-3, p[1]]).unwrap();
        let d = d_c1(&k, &shifted);
        // the arclength-proportional match is an upper estimate of the distance
        assert!(d >= 1e-3 - 1e-12 && d < 1.05e-3, "{d}");
    }

    #[test]
    fn stadium_ladder() {
        let s = fixtures::stadium(1.0, 4.0, 2000);
        let out = smoothing_ladder(&s, &LadderConfig::new(1.0, 0.9, 1e-2)).unwrap();
        assert!(out.sup_curvature <= 1.0 / 0.9 + 1e-3);
        assert!(out.d_c1 <= 1e-2);
        assert_eq!(out.curve().num_vertices(), 2000);
        for (j, st) in out.steps.iter().enumerate() {
            assert!(st.max_curvature <= st.curvature_allowance, "window {j}");
        }
    }

    #[test]
    fn precondition_and_exhaustion() {
        let e = fixtures::ellipse(2.0, 1.0, 800);
        // focal distance 0.5 < r1
        assert!(matches!(
            smoothing_ladder(&e, &LadderConfig::new(1.0, 0.9, 1e-2)),
            Err(PatchError::InvalidParameters(_))
        ));
        let s = fixtures::stadium(1.0, 4.0, 400);
        let mut cfg = LadderConfig::new(1.0, 0.9, 1e-9);
        cfg.max_halvings = 2;
        assert!(matches!(
            smoothing_ladder(&s, &cfg),
            Err(PatchError::LadderExhausted { .. })
        ));
    }
}
