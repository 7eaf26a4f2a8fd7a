use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::KernelError;
use crate::bvh::SegmentBvh;
use crate::curve::{estimate_tangents, vertex_curvatures, DiscreteCurve, TangentField};
use crate::defaults::{ORACLE_BRACKET, ORACLE_REL_TOL};
use crate::geom;

/// How tangent balls are sampled by the oracles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalSampleSpec {
    /// Unit normals per vertex. In R² the normal sphere is two points and both
    /// are always used.
    pub normal_directions_per_vertex: usize,
    pub radius_bracket: [f64; 2],
    pub bisection_tolerance: f64,
}

impl NormalSampleSpec {
    /// Default direction count for the ambient dimension, bracket
    /// `[t/4, 4t]` and tolerance `1e-6 t` around an estimate `t`.
    pub fn around(dim: usize, estimate: f64) -> NormalSampleSpec {
        let [lo, hi] = ORACLE_BRACKET;
        NormalSampleSpec {
            normal_directions_per_vertex: default_direction_count(dim),
            radius_bracket: [estimate * lo, estimate * hi],
            bisection_tolerance: ORACLE_REL_TOL * estimate,
        }
    }

    pub fn validate(&self) -> Result<(), KernelError> {
        let [lo, hi] = self.radius_bracket;
        if self.normal_directions_per_vertex == 0 {
            return Err(KernelError::InvalidSpec(
                "normal_directions_per_vertex must be at least 1".into(),
            ));
        }
        if !(lo > 0.0 && lo < hi && hi.is_finite()) {
            return Err(KernelError::InvalidSpec(format!("radius bracket [{lo}, {hi}]")));
        }
        if !(self.bisection_tolerance > 0.0) {
            return Err(KernelError::InvalidSpec("bisection_tolerance must be positive".into()));
        }
        Ok(())
    }
}

pub fn default_direction_count(dim: usize) -> usize {
    match dim {
        2 => 2,
        3 => 64,
        _ => 256,
    }
}

/// Unit normals at a point with unit tangent `t`.
///
/// R²: the two normals. R³: `count` equally spaced angles in the normal plane.
/// Higher dimensions: an additive-recurrence low-discrepancy sequence pushed
/// through Box-Muller and normalized, expressed in the fixed normal basis.
pub fn normal_directions(t: &[f64], count: usize) -> Vec<Vec<f64>> {
    let dim = t.len();
    if dim == 2 {
        return vec![vec![-t[1], t[0]], vec![t[1], -t[0]]];
    }
    let basis = geom::normal_basis(t);
    let combine = |coef: &[f64]| -> Vec<f64> {
        let mut v = vec![0.0; dim];
        for (c, b) in coef.iter().zip(&basis) {
            for d in 0..dim {
                v[d] += c * b[d];
            }
        }
        v
    };
    if dim == 3 {
        return (0..count)
            .map(|k| {
                let a = TAU * k as f64 / count as f64;
                combine(&[a.cos(), a.sin()])
            })
            .collect();
    }
    let m = basis.len();
    let pairs = m.div_ceil(2);
    let alpha = recurrence_alphas(2 * pairs);
    (0..count)
        .map(|k| {
            let u: Vec<f64> = alpha.iter().map(|a| (0.5 + (k + 1) as f64 * a).fract()).collect();
            let mut g = Vec::with_capacity(2 * pairs);
            for p in 0..pairs {
                let r = (-2.0 * u[2 * p].max(1e-12).ln()).sqrt();
                let th = TAU * u[2 * p + 1];
                g.push(r * th.cos());
                g.push(r * th.sin());
            }
            g.truncate(m);
            let n = geom::norm(&g);
            combine(&g.iter().map(|x| x / n).collect::<Vec<_>>())
        })
        .collect()
}

// Generalized golden ratio: the positive root of x^(d+1) = x + 1.
fn recurrence_alphas(d: usize) -> Vec<f64> {
    let mut phi = 2.0f64;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (d as f64 + 1.0));
    }
    (1..=d).map(|j| (1.0 / phi.powi(j as i32)).fract()).collect()
}

/// Tangent-ball hit test shared by both oracles.
///
/// A ball tangent at vertex `p` hits the curve when a vertex outside the
/// exclusion arc around `p` lies strictly inside it, or when the part of a
/// segment outside the arc comes closer to the center than the radius minus
/// that segment's sagitta allowance `1.5 len² κ / 8`. Vertices lie on the
/// underlying smooth curve while chords cut inside it; the allowance keeps
/// chords from registering hits the smooth curve would not.
pub struct BallProbe<'a> {
    curve: &'a DiscreteCurve,
    bvh: SegmentBvh<'a>,
    tangents: TangentField,
    sagitta: Vec<Vec<f64>>,
    exclusion: Vec<Vec<f64>>,
}

impl<'a> BallProbe<'a> {
    pub fn new(curve: &'a DiscreteCurve) -> BallProbe<'a> {
        let kappa = vertex_curvatures(curve);
        let sup = kappa.iter().flatten().fold(0.0f64, |a, &b| a.max(b));
        let arc_cap = if sup > 0.0 { PI / (2.0 * sup) } else { f64::INFINITY };
        let mut sagitta = Vec::new();
        let mut exclusion = Vec::new();
        for (c, ring) in curve.rings().iter().enumerate() {
            let n = ring.len();
            let k = &kappa[c];
            sagitta.push(
                (0..n)
                    .map(|j| {
                        let len = ring.segment_length(j);
                        1.5 * len * len * k[j].max(k[(j + 1) % n]) / 8.0
                    })
                    .collect(),
            );
            exclusion.push(
                (0..n)
                    .map(|i| {
                        let adj = ring.segment_length(i).max(ring.segment_length((i + n - 1) % n));
                        arc_cap.min(2.0 * adj)
                    })
                    .collect(),
            );
        }
        BallProbe {
            curve,
            bvh: SegmentBvh::new(curve),
            tangents: estimate_tangents(curve),
            sagitta,
            exclusion,
        }
    }

    pub fn tangents(&self) -> &TangentField {
        &self.tangents
    }

    /// Whether the open ball of radius `r` tangent at vertex `(c, i)` with
    /// inward unit normal `w` hits the curve.
    pub fn hits(&self, c: usize, i: usize, w: &[f64], r: f64) -> bool {
        let p = self.curve.ring(c).vertex(i);
        let center = geom::axpy(p, r, w);
        self.bvh
            .any_in_ball(&center, r, |cj, j| self.segment_hits(c, i, cj, j, &center, r))
    }

    fn segment_hits(&self, c: usize, i: usize, cj: usize, j: usize, center: &[f64], r: f64) -> bool {
        let ring = self.curve.ring(cj);
        let a = ring.vertex(j);
        let b = ring.vertex(j + 1);
        let tol = self.sagitta[cj][j];
        if cj != c {
            if geom::dist2(a, center) < r * r {
                return true;
            }
            let (_, d2) = geom::point_segment(center, a, b);
            return d2.sqrt() < r - tol;
        }
        let l = ring.length();
        let len = ring.segment_length(j);
        let e = self.exclusion[c][i];
        let o0 = (ring.arclength_at(j) - ring.arclength_at(i)).rem_euclid(l);
        if o0 > e && o0 < l - e && geom::dist2(a, center) < r * r {
            return true;
        }
        let lo = o0.max(e);
        let hi = (o0 + len).min(l - e);
        if lo >= hi {
            return false;
        }
        if lo == o0 && hi == o0 + len {
            let (_, d2) = geom::point_segment(center, a, b);
            return d2.sqrt() < r - tol;
        }
        let a2 = geom::lerp(a, b, (lo - o0) / len);
        let b2 = geom::lerp(a, b, (hi - o0) / len);
        let (_, d2) = geom::point_segment(center, &a2, &b2);
        d2.sqrt() < r - tol
    }

    /// Every `(component, vertex, normal)` sample in index order.
    pub fn samples(&self, count: usize) -> Vec<(usize, usize, Vec<f64>)> {
        let mut out = Vec::new();
        for (c, ring) in self.curve.rings().iter().enumerate() {
            for i in 0..ring.len() {
                for w in normal_directions(self.tangents.at_vertex(c, i), count) {
                    out.push((c, i, w));
                }
            }
        }
        out
    }

    /// Normal cut value along `w` at vertex `(c, i)`: the largest radius whose
    /// tangent ball still misses the curve. `r_hi` when even that ball misses.
    pub fn cut_value(&self, c: usize, i: usize, w: &[f64], spec: &NormalSampleSpec) -> Result<f64, KernelError> {
        let [mut lo, mut hi] = spec.radius_bracket;
        if !self.hits(c, i, w, hi) {
            return Ok(hi);
        }
        if self.hits(c, i, w, lo) {
            return Err(KernelError::BracketMiss {
                r_lo: lo,
                r_hi: hi,
                detail: format!("tangent ball at vertex {i} of component {c} already hits at r_lo"),
            });
        }
        while hi - lo > spec.bisection_tolerance {
            let mid = 0.5 * (lo + hi);
            if self.hits(c, i, w, mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// Smallest radius at which some sampled tangent ball hits the curve, by
/// bisection on the bracket.
pub fn rolling_ball_oracle(curve: &DiscreteCurve, spec: &NormalSampleSpec) -> Result<f64, KernelError> {
    spec.validate()?;
    let probe = BallProbe::new(curve);
    let samples = probe.samples(spec.normal_directions_per_vertex);
    let any_hit = |r: f64| samples.par_iter().any(|(c, i, w)| probe.hits(*c, *i, w, r));
    let [mut lo, mut hi] = spec.radius_bracket;
    if any_hit(lo) {
        return Err(KernelError::BracketMiss {
            r_lo: lo,
            r_hi: hi,
            detail: "some tangent ball already hits at r_lo".into(),
        });
    }
    if !any_hit(hi) {
        return Err(KernelError::BracketMiss {
            r_lo: lo,
            r_hi: hi,
            detail: "no tangent ball hits at r_hi".into(),
        });
    }
    while hi - lo > spec.bisection_tolerance {
        let mid = 0.5 * (lo + hi);
        if any_hit(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Minimum over all samples of the per-direction normal cut value.
///
/// Samples are processed in fixed-size chunks. A sample whose ball still
/// misses at the running minimum cannot lower it and is skipped; every other
/// sample is bisected on the full bracket. Chunks are fixed, so the result
/// does not depend on the thread count.
pub fn cut_value_oracle(curve: &DiscreteCurve, spec: &NormalSampleSpec) -> Result<f64, KernelError> {
    spec.validate()?;
    let probe = BallProbe::new(curve);
    let samples = probe.samples(spec.normal_directions_per_vertex);
    let mut best = spec.radius_bracket[1];
    for chunk in samples.chunks(CUT_CHUNK) {
        let values: Vec<Result<Option<f64>, KernelError>> = chunk
            .par_iter()
            .map(|(c, i, w)| {
                if !probe.hits(*c, *i, w, best) {
                    return Ok(None);
                }
                probe.cut_value(*c, *i, w, spec).map(Some)
            })
            .collect();
        for v in values {
            if let Some(v) = v? {
                best = best.min(v);
            }
        }
    }
    Ok(best)
}

const CUT_CHUNK: usize = 256;
