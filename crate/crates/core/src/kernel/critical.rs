use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::curvature::focal_distance;
use super::KernelError;
use crate::curve::{ArcCoordinate, DiscreteCurve, Ring, TangentField};
use crate::geom;
use crate::length::Length;

/// Default perpendicularity tolerance, radians.
pub const DEFAULT_PERP_TOL: f64 = 1e-3;

// Slack added to the turning-angle prefilter, radians.
const PREFILTER_SLACK: f64 = 0.01;
const NEWTON_ITERS: usize = 8;

/// A chord meeting the curve perpendicularly at both ends.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoubleCriticalPair {
    pub coord_p: ArcCoordinate,
    pub coord_q: ArcCoordinate,
    pub chord_length: f64,
    /// Deviation of the chord from perpendicular at each end.
    pub residual_angles: [f64; 2],
}

/// `max(4 * longest segment, 0.1 * focal distance)`.
pub fn default_adjacency_window(curve: &DiscreteCurve) -> f64 {
    let h = curve.rings().iter().map(Ring::max_segment_length).fold(0.0, f64::max);
    match focal_distance(curve) {
        Length::Finite(f) => (4.0 * h).max(0.1 * f),
        Length::Unbounded => 4.0 * h,
    }
}

struct Sample {
    point: Vec<f64>,
    dir: Vec<f64>,
    tangent: Vec<f64>,
    dtangent: Vec<f64>,
}

fn sample(ring: &Ring, tf: &TangentField, component: usize, s: f64) -> Sample {
    let (seg, t) = ring.locate(s);
    let len = ring.segment_length(seg);
    let a = ring.vertex(seg);
    let b = ring.vertex(seg + 1);
    let point = geom::lerp(a, b, t);
    let dir = geom::scale(&geom::sub(b, a), 1.0 / len);
    let ta = tf.at_vertex(component, seg);
    let tb = tf.at_vertex(component, seg + 1);
    let m = geom::lerp(ta, tb, t);
    let mn = geom::norm(&m);
    let tangent = geom::scale(&m, 1.0 / mn);
    // d/ds of m/|m| = (I - T T^T) m' / |m|
    let dm = geom::scale(&geom::sub(tb, ta), 1.0 / len);
    let proj = geom::dot(&tangent, &dm);
    let dtangent = geom::axpy(&dm, -proj, &tangent).iter().map(|x| x / mn).collect();
    Sample {
        point,
        dir,
        tangent,
        dtangent,
    }
}

fn residual_angles(p: &Sample, q: &Sample) -> Option<(f64, [f64; 2])> {
    let chord = geom::sub(&q.point, &p.point);
    let len = geom::norm(&chord);
    if len == 0.0 {
        return None;
    }
    let u = geom::scale(&chord, 1.0 / len);
    let a = geom::dot(&u, &p.tangent).abs().min(1.0).asin();
    let b = geom::dot(&u, &q.tangent).abs().min(1.0).asin();
    Some((len, [a, b]))
}

/// Clamped closest points of two segments; for (near-)parallel segments the
/// midpoint of the overlap of their projections.
fn initial_params(a0: &[f64], a1: &[f64], b0: &[f64], b1: &[f64]) -> (f64, f64) {
    let (mut aa, mut ee, mut bb) = (0.0, 0.0, 0.0);
    for k in 0..a0.len() {
        let d1 = a1[k] - a0[k];
        let d2 = b1[k] - b0[k];
        aa += d1 * d1;
        ee += d2 * d2;
        bb += d1 * d2;
    }
    if aa * ee - bb * bb <= 1e-12 * aa * ee {
        let (mut u0, mut u1) = (0.0, 0.0);
        for k in 0..a0.len() {
            let d1 = a1[k] - a0[k];
            u0 += (b0[k] - a0[k]) * d1;
            u1 += (b1[k] - a0[k]) * d1;
        }
        let (u0, u1) = (u0 / aa, u1 / aa);
        let lo = u0.min(u1).max(0.0);
        let hi = u0.max(u1).min(1.0);
        if lo <= hi {
            let s = 0.5 * (lo + hi);
            let p = geom::lerp(a0, a1, s);
            let (t, _) = geom::point_segment(&p, b0, b1);
            return (s, t);
        }
    }
    let (s, t, _) = geom::segment_segment(a0, a1, b0, b1);
    (s, t)
}

/// Sines of the angles between the chord `A(s) -> B(t)` and the two segment
/// directions, without allocating.
fn chord_sines(a0: &[f64], a1: &[f64], b0: &[f64], b1: &[f64], s: f64, t: f64) -> (f64, f64) {
    let (mut cc, mut ca, mut cb, mut aa, mut bb) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for k in 0..a0.len() {
        let da = a1[k] - a0[k];
        let db = b1[k] - b0[k];
        let c = (b0[k] + t * db) - (a0[k] + s * da);
        cc += c * c;
        ca += c * da;
        cb += c * db;
        aa += da * da;
        bb += db * db;
    }
    ((ca / (cc * aa).sqrt()).abs(), (cb / (cc * bb).sqrt()).abs())
}

/// Newton iteration on `((P - Q) . T_p, (P - Q) . T_q)` in the two arclength
/// parameters; returns the refined arclengths.
fn refine(curve: &DiscreteCurve, tf: &TangentField, cp: usize, cq: usize, mut sp: f64, mut sq: f64) -> (f64, f64) {
    let rp = curve.ring(cp);
    let rq = curve.ring(cq);
    let max_step = 2.0 * rp.max_segment_length().max(rq.max_segment_length());
    for _ in 0..NEWTON_ITERS {
        let p = sample(rp, tf, cp, sp);
        let q = sample(rq, tf, cq, sq);
        let d = geom::sub(&p.point, &q.point);
        let g1 = geom::dot(&d, &p.tangent);
        let g2 = geom::dot(&d, &q.tangent);
        let j11 = geom::dot(&p.dir, &p.tangent) + geom::dot(&d, &p.dtangent);
        let j12 = -geom::dot(&q.dir, &p.tangent);
        let j21 = geom::dot(&p.dir, &q.tangent);
        let j22 = -geom::dot(&q.dir, &q.tangent) + geom::dot(&d, &q.dtangent);
        let det = j11 * j22 - j12 * j21;
        if det.abs() < 1e-300 || !det.is_finite() {
            break;
        }
        let mut ds = -(j22 * g1 - j12 * g2) / det;
        let mut dt = -(-j21 * g1 + j11 * g2) / det;
        let big = ds.abs().max(dt.abs());
        if big > max_step {
            ds *= max_step / big;
            dt *= max_step / big;
        }
        sp = (sp + ds).rem_euclid(rp.length());
        sq = (sq + dt).rem_euclid(rq.length());
        if big < 1e-14 * (rp.length() + rq.length()) {
            break;
        }
    }
    (sp, sq)
}

/// Thresholds shared by the full and the incremental search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchParams {
    pub perp_tol: f64,
    pub adjacency_window: f64,
    /// Loose angle a seed must pass before Newton refinement.
    pub prefilter: f64,
    coarse: f64,
}

impl SearchParams {
    pub fn new(curve: &DiscreteCurve, perp_tol: f64, adjacency_window: f64) -> SearchParams {
        // At a true critical pair the clamped closest points are perpendicular
        // to both segments, and segment directions differ from vertex
        // tangents by at most a turning angle.
        let max_turn = curve
            .rings()
            .iter()
            .flat_map(|r| {
                (0..r.len()).map(move |i| {
                    geom::angle_between(
                        &geom::sub(r.vertex(i), r.vertex_offset(i, -1)),
                        &geom::sub(r.vertex(i + 1), r.vertex(i)),
                    )
                })
            })
            .fold(0.0, f64::max);
        let prefilter = (2.0 * max_turn + PREFILTER_SLACK).max(perp_tol);
        SearchParams {
            perp_tol,
            adjacency_window,
            prefilter,
            coarse: prefilter.min(std::f64::consts::FRAC_PI_2).sin(),
        }
    }

    /// Default tolerance and window for `curve`.
    pub fn default_for(curve: &DiscreteCurve) -> SearchParams {
        SearchParams::new(curve, DEFAULT_PERP_TOL, default_adjacency_window(curve))
    }
}

fn candidate(
    curve: &DiscreteCurve,
    tangents: &TangentField,
    params: &SearchParams,
    (ca, ia): (usize, usize),
    (cb, ib): (usize, usize),
) -> Option<DoubleCriticalPair> {
    let ra = curve.ring(ca);
    let rb = curve.ring(cb);
    let window = params.adjacency_window;
    let (s, t) = initial_params(ra.vertex(ia), ra.vertex(ia + 1), rb.vertex(ib), rb.vertex(ib + 1));
    let sp = ra.arclength_at(ia) + s * ra.segment_length(ia);
    let sq = rb.arclength_at(ib) + t * rb.segment_length(ib);
    if ca == cb && ra.arc_separation(sp, sq) <= window {
        return None;
    }
    let (sa, sb) = chord_sines(ra.vertex(ia), ra.vertex(ia + 1), rb.vertex(ib), rb.vertex(ib + 1), s, t);
    if !(sa.max(sb) <= params.coarse) {
        return None;
    }
    let (_, ang) = residual_angles(&sample(ra, tangents, ca, sp), &sample(rb, tangents, cb, sq))?;
    if ang[0].max(ang[1]) > params.prefilter {
        return None;
    }
    let (sp, sq) = refine(curve, tangents, ca, cb, sp, sq);
    if ca == cb && ra.arc_separation(sp, sq) <= window {
        return None;
    }
    let (len, ang) = residual_angles(&sample(ra, tangents, ca, sp), &sample(rb, tangents, cb, sq))?;
    if ang[0].max(ang[1]) > params.perp_tol {
        return None;
    }
    let (mut p, mut q) = (coord(curve, ca, sp), coord(curve, cb, sq));
    let mut angles = ang;
    if (q.component, q.s) < (p.component, p.s) {
        std::mem::swap(&mut p, &mut q);
        angles.swap(0, 1);
    }
    Some(DoubleCriticalPair {
        coord_p: p,
        coord_q: q,
        chord_length: len,
        residual_angles: angles,
    })
}

/// All double-critical chords between nonadjacent parts of the curve.
///
/// Every unordered pair of segments is seeded with its clamped closest points,
/// kept when both ends are within a loose angle of perpendicular, refined by
/// Newton steps and accepted at `perp_tol`. Within a component the two ends
/// must be more than `adjacency_window` apart in arclength. Pairs closer than
/// one segment in both coordinates are merged, keeping the shorter chord.
/// Results are ordered by `(component, arclength)` of the first endpoint.
pub fn find_double_critical_pairs(
    curve: &DiscreteCurve,
    tangents: &TangentField,
    perp_tol: f64,
    adjacency_window: f64,
) -> Result<Vec<DoubleCriticalPair>, KernelError> {
    search(
        curve,
        tangents,
        &SearchParams::new(curve, perp_tol, adjacency_window),
        None,
    )
}

/// Like [`find_double_critical_pairs`], restricted to segment pairs where at
/// least one side is flagged in `touched` (indexed like `curve.segments()`).
pub fn find_double_critical_pairs_touching(
    curve: &DiscreteCurve,
    tangents: &TangentField,
    params: &SearchParams,
    touched: &[bool],
) -> Result<Vec<DoubleCriticalPair>, KernelError> {
    search(curve, tangents, params, Some(touched))
}

fn search(
    curve: &DiscreteCurve,
    tangents: &TangentField,
    params: &SearchParams,
    touched: Option<&[bool]>,
) -> Result<Vec<DoubleCriticalPair>, KernelError> {
    if !tangents.covers(curve) {
        return Err(KernelError::NoTangents);
    }
    let segs: Vec<(usize, usize)> = curve.segments().collect();
    let found: Vec<DoubleCriticalPair> = match touched {
        None => (0..segs.len())
            .into_par_iter()
            .flat_map_iter(|x| {
                let segs = &segs;
                (x + 1..segs.len()).filter_map(move |y| candidate(curve, tangents, params, segs[x], segs[y]))
            })
            .collect(),
        Some(flags) => (0..segs.len())
            .into_par_iter()
            .filter(|&x| flags[x])
            .flat_map_iter(|x| {
                let segs = &segs;
                // a pair with both sides touched is visited from its lower index
                (0..segs.len())
                    .filter(move |&y| y != x && !(flags[y] && y < x))
                    .filter_map(move |y| candidate(curve, tangents, params, segs[x], segs[y]))
            })
            .collect(),
    };
    Ok(merge_pairs(curve, found))
}

/// Merge pairs closer than one segment in both endpoints, keeping the
/// shorter chord; output ordered by component, then endpoint arclengths.
pub fn merge_pairs(curve: &DiscreteCurve, mut found: Vec<DoubleCriticalPair>) -> Vec<DoubleCriticalPair> {
    found.sort_by(|a, b| {
        a.chord_length
            .partial_cmp(&b.chord_length)
            .unwrap()
            .then(a.coord_p.component.cmp(&b.coord_p.component))
            .then(a.coord_p.s.partial_cmp(&b.coord_p.s).unwrap())
            .then(a.coord_q.component.cmp(&b.coord_q.component))
            .then(a.coord_q.s.partial_cmp(&b.coord_q.s).unwrap())
    });
    let cell = |c: &ArcCoordinate| -> (i64, i64) {
        let r = curve.ring(c.component);
        let h = r.max_segment_length();
        ((c.s / h).floor() as i64, (r.length() / h).ceil() as i64)
    };
    let mut grid: HashMap<(usize, i64, usize, i64), Vec<usize>> = HashMap::new();
    let mut kept: Vec<DoubleCriticalPair> = Vec::new();
    for pair in found {
        let (kp, np) = cell(&pair.coord_p);
        let (kq, nq) = cell(&pair.coord_q);
        let (cp, cq) = (pair.coord_p.component, pair.coord_q.component);
        let mut duplicate = false;
        'scan: for dp in -1..=1 {
            for dq in -1..=1 {
                let key = (cp, (kp + dp).rem_euclid(np), cq, (kq + dq).rem_euclid(nq));
                if let Some(ids) = grid.get(&key) {
                    if ids.iter().any(|&k| same_pair(curve, &kept[k], &pair)) {
                        duplicate = true;
                        break 'scan;
                    }
                }
            }
        }
        if duplicate {
            continue;
        }
        grid.entry((cp, kp.rem_euclid(np), cq, kq.rem_euclid(nq)))
            .or_default()
            .push(kept.len());
        grid.entry((cq, kq.rem_euclid(nq), cp, kp.rem_euclid(np)))
            .or_default()
            .push(kept.len());
        kept.push(pair);
    }
    kept.sort_by(|a, b| {
        (a.coord_p.component, a.coord_q.component)
            .cmp(&(b.coord_p.component, b.coord_q.component))
            .then(a.coord_p.s.partial_cmp(&b.coord_p.s).unwrap())
            .then(a.coord_q.s.partial_cmp(&b.coord_q.s).unwrap())
    });
    kept
}

// Both endpoints within one segment of each other, in either orientation.
fn same_pair(curve: &DiscreteCurve, k: &DoubleCriticalPair, pair: &DoubleCriticalPair) -> bool {
    let near = |a: &ArcCoordinate, b: &ArcCoordinate| {
        a.component == b.component && {
            let r = curve.ring(a.component);
            r.arc_separation(a.s, b.s) < r.max_segment_length()
        }
    };
    (near(&k.coord_p, &pair.coord_p) && near(&k.coord_q, &pair.coord_q))
        || (near(&k.coord_p, &pair.coord_q) && near(&k.coord_q, &pair.coord_p))
}

fn coord(curve: &DiscreteCurve, c: usize, s: f64) -> ArcCoordinate {
    let (segment, t) = curve.ring(c).locate(s);
    ArcCoordinate {
        component: c,
        segment,
        t,
        s: curve.ring(c).arclength_at(segment) + t * curve.ring(c).segment_length(segment),
    }
}

/// Shortest double-critical chord, with the default tolerance and window.
pub fn mdc(
    curve: &DiscreteCurve,
    tangents: &TangentField,
) -> Result<(Length, Option<DoubleCriticalPair>), KernelError> {
    let pairs = find_double_critical_pairs(curve, tangents, DEFAULT_PERP_TOL, default_adjacency_window(curve))?;
    let best = pairs
        .into_iter()
        .min_by(|a, b| a.chord_length.partial_cmp(&b.chord_length).unwrap());
    Ok(match best {
        Some(p) => (Length::Finite(p.chord_length), Some(p)),
        None => (Length::Unbounded, None),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::estimate_tangents;
    use crate::fixtures;
    use std::f64::consts::TAU;

    fn pairs_of(curve: &DiscreteCurve) -> Vec<DoubleCriticalPair> {
        let tf = estimate_tangents(curve);
        find_double_critical_pairs(curve, &tf, DEFAULT_PERP_TOL, default_adjacency_window(curve)).unwrap()
    }

    #[test]
    fn circle_pairs_are_diameters() {
        let c = fixtures::circle(1000, 1.0);
        let pairs = pairs_of(&c);
        assert!(pairs.len() >= 100, "{}", pairs.len());
        for p in &pairs {
            assert!((p.chord_length - 2.0).abs() < 1e-4, "{}", p.chord_length);
            assert!(c.ring(0).arc_separation(p.coord_p.s, p.coord_q.s) > 3.0);
        }
    }

    /// Doubly-perpendicular chord lengths of `(a cos t, b sin t)` found by a
    /// dense scan over parameter pairs of the smooth curve.
    fn ellipse_critical_lengths_brute(a: f64, b: f64) -> Vec<f64> {
        let m = 720;
        let pt = |t: f64| [a * t.cos(), b * t.sin()];
        let tan = |t: f64| {
            let v = [-a * t.sin(), b * t.cos()];
            let n = v[0].hypot(v[1]);
            [v[0] / n, v[1] / n]
        };
        let resid = |s: f64, t: f64| {
            let (p, q) = (pt(s), pt(t));
            let d = [q[0] - p[0], q[1] - p[1]];
            let l = d[0].hypot(d[1]);
            let (ts, tt) = (tan(s), tan(t));
            ((d[0] * ts[0] + d[1] * ts[1]) / l).abs() + ((d[0] * tt[0] + d[1] * tt[1]) / l).abs()
        };
        let mut out: Vec<f64> = Vec::new();
        for i in 0..m {
            for j in 0..m {
                let (s, t) = (TAU * i as f64 / m as f64, TAU * j as f64 / m as f64);
                let sep = (s - t).rem_euclid(TAU).min((t - s).rem_euclid(TAU));
                if sep < 0.5 || resid(s, t) > 1e-9 {
                    continue;
                }
                let (p, q) = (pt(s), pt(t));
                let l = (q[0] - p[0]).hypot(q[1] - p[1]);
                if !out.iter().any(|x| (x - l).abs() < 1e-6) {
                    out.push(l);
                }
            }
        }
        out.sort_by(|x, y| x.partial_cmp(y).unwrap());
        out
    }

    #[test]
    fn ellipse_has_two_critical_lengths() {
        let brute = ellipse_critical_lengths_brute(2.0, 1.0);
        assert_eq!(brute.len(), 2);
        let pairs = pairs_of(&fixtures::ellipse(2.0, 1.0, 4000));
        let mut lengths: Vec<f64> = Vec::new();
        for p in &pairs {
            if !lengths.iter().any(|x| (x - p.chord_length).abs() < 1e-3) {
                lengths.push(p.chord_length);
            }
        }
        lengths.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert_eq!(lengths.len(), 2, "{lengths:?}");
        for (got, want) in lengths.iter().zip(&brute) {
            assert!((got - want).abs() < 1e-3, "{got} vs {want}");
        }
    }

    #[test]
    fn concentric_circles_radial_chords() {
        let c = fixtures::concentric(1.0, 3.0, 500, 1500);
        let pairs = pairs_of(&c);
        let cross: Vec<f64> = pairs
            .iter()
            .filter(|p| p.coord_p.component != p.coord_q.component)
            .map(|p| p.chord_length)
            .collect();
        let inner: Vec<f64> = pairs
            .iter()
            .filter(|p| p.coord_p.component == 0 && p.coord_q.component == 0)
            .map(|p| p.chord_length)
            .collect();
        let outer: Vec<f64> = pairs
            .iter()
            .filter(|p| p.coord_p.component == 1 && p.coord_q.component == 1)
            .map(|p| p.chord_length)
            .collect();
        assert!(!cross.is_empty() && !inner.is_empty() && !outer.is_empty());
        // radial chords between the rings have length 2 (same side) or 4 (through the center)
        assert!(cross.iter().all(|l| (l - 2.0).abs() < 1e-3 || (l - 4.0).abs() < 1e-3));
        assert!(cross.iter().any(|l| (l - 2.0).abs() < 1e-3));
        assert!(inner.iter().all(|l| (l - 2.0).abs() < 1e-3));
        assert!(outer.iter().all(|l| (l - 6.0).abs() < 1e-3));
        let tf = estimate_tangents(&c);
        let (m, _) = mdc(&c, &tf).unwrap();
        assert!((m.finite().unwrap() - 2.0).abs() < 1e-3);
    }

    #[test]
    fn missing_tangents() {
        let a = fixtures::circle(100, 1.0);
        let b = fixtures::circle(120, 1.0);
        let tf = estimate_tangents(&b);
        assert_eq!(
            find_double_critical_pairs(&a, &tf, 1e-3, 0.1).unwrap_err(),
            KernelError::NoTangents
        );
    }
}
