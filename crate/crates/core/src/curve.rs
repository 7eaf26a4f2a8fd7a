//! Closed polylines in R^n standing in for embedded C^{1,1} curves.
//!
//! A [`DiscreteCurve`] is a set of vertex rings (one per component). Every
//! ring is closed, has at least four vertices, no zero-length edges, and no
//! two segments of the whole curve come closer than a small fraction of the
//! bounding-box diagonal. Construction validates all of this; afterwards the
//! curve is immutable.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom;

/// Minimum nonadjacent segment distance, relative to the bounding-box diagonal.
pub const SELF_INTERSECTION_TOL: f64 = 1e-9;
/// A vertex triple is collinear when its circumradius exceeds this multiple of
/// the local edge length.
pub const COLLINEAR_RADIUS_FACTOR: f64 = 1e12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurveError {
    #[error("dimension must be at least 2, got {0}")]
    InvalidDimension(usize),
    #[error("curve has no components")]
    Empty,
    #[error("component {component} has {count} vertices, need at least 4")]
    TooFewVertices { component: usize, count: usize },
    #[error("vertex {vertex} of component {component} has {found} coordinates, expected {expected}")]
    DimensionMismatch {
        component: usize,
        vertex: usize,
        expected: usize,
        found: usize,
    },
    #[error("non-finite coordinate at vertex {vertex} of component {component}")]
    NonFinite { component: usize, vertex: usize },
    #[error("zero-length edge {segment} in component {component}")]
    DegenerateSegment { component: usize, segment: usize },
    #[error("segments {first:?} and {second:?} (component, segment) are {distance:.3e} apart: curve is not embedded")]
    SelfIntersection {
        first: (usize, usize),
        second: (usize, usize),
        distance: f64,
    },
    #[error("arc coordinate out of range: {0}")]
    OutOfRange(String),
}

/// One closed component: vertex coordinates (flat, `dim` stride) plus the
/// cumulative arclength table.
#[derive(Clone, Debug, PartialEq)]
pub struct Ring {
    dim: usize,
    coords: Vec<f64>,
    cum: Vec<f64>,
}

impl Ring {
    fn new(dim: usize, coords: Vec<f64>) -> Ring {
        let n = coords.len() / dim;
        let mut cum = Vec::with_capacity(n + 1);
        cum.push(0.0);
        let mut acc = 0.0;
        for i in 0..n {
            let j = (i + 1) % n;
            acc += geom::dist(&coords[i * dim..(i + 1) * dim], &coords[j * dim..(j + 1) * dim]);
            cum.push(acc);
        }
        Ring { dim, coords, cum }
    }

    /// Number of vertices (= number of segments).
    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Vertex `i`, indices taken modulo the ring size.
    #[inline]
    pub fn vertex(&self, i: usize) -> &[f64] {
        let i = i % self.len();
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    /// Vertex at a signed offset from `i`, wrapping.
    #[inline]
    pub fn vertex_offset(&self, i: usize, offset: isize) -> &[f64] {
        let n = self.len() as isize;
        self.vertex((i as isize + offset).rem_euclid(n) as usize)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn segment_length(&self, i: usize) -> f64 {
        self.cum[i + 1] - self.cum[i]
    }

    /// Arclength at vertex `i` (`i == len()` gives the total length).
    pub fn arclength_at(&self, i: usize) -> f64 {
        self.cum[i]
    }

    pub fn length(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    /// Shorter way round between two arclength positions.
    pub fn arc_separation(&self, s1: f64, s2: f64) -> f64 {
        let l = self.length();
        let d = (s1 - s2).rem_euclid(l);
        d.min(l - d)
    }

    pub fn max_segment_length(&self) -> f64 {
        (0..self.len()).map(|i| self.segment_length(i)).fold(0.0, f64::max)
    }

    pub fn mean_segment_length(&self) -> f64 {
        self.length() / self.len() as f64
    }

    /// Segment index and parameter at arclength `s` (taken modulo the length).
    pub fn locate(&self, s: f64) -> (usize, f64) {
        let l = self.length();
        let s = s.rem_euclid(l);
        let seg = match self.cum.binary_search_by(|c| c.partial_cmp(&s).unwrap()) {
            Ok(i) => i.min(self.len() - 1),
            Err(i) => i - 1,
        };
        let t = ((s - self.cum[seg]) / self.segment_length(seg)).clamp(0.0, 1.0);
        (seg, t)
    }

    /// Point on segment `seg` at parameter `t`.
    pub fn point_on_segment(&self, seg: usize, t: f64) -> Vec<f64> {
        geom::lerp(self.vertex(seg), self.vertex(seg + 1), t)
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        self.coords.chunks(self.dim).map(|c| c.to_vec()).collect()
    }
}

/// A validated closed polyline, possibly with several components.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteCurve {
    dim: usize,
    rings: Vec<Ring>,
    diagonal: f64,
}

/// Validate vertex rings and build a [`DiscreteCurve`].
pub fn build_curve(points: Vec<Vec<Vec<f64>>>, dim: usize) -> Result<DiscreteCurve, CurveError> {
    if dim < 2 {
        return Err(CurveError::InvalidDimension(dim));
    }
    let mut flat = Vec::with_capacity(points.len());
    for (c, ring) in points.iter().enumerate() {
        let mut coords = Vec::with_capacity(ring.len() * dim);
        for (v, p) in ring.iter().enumerate() {
            if p.len() != dim {
                return Err(CurveError::DimensionMismatch {
                    component: c,
                    vertex: v,
                    expected: dim,
                    found: p.len(),
                });
            }
            coords.extend_from_slice(p);
        }
        flat.push(coords);
    }
    DiscreteCurve::from_flat(dim, flat)
}

impl DiscreteCurve {
    /// Build from flat coordinate buffers, one per component.
    pub fn from_flat(dim: usize, rings: Vec<Vec<f64>>) -> Result<DiscreteCurve, CurveError> {
        if dim < 2 {
            return Err(CurveError::InvalidDimension(dim));
        }
        if rings.is_empty() {
            return Err(CurveError::Empty);
        }
        for (c, coords) in rings.iter().enumerate() {
            if coords.len() % dim != 0 {
                return Err(CurveError::DimensionMismatch {
                    component: c,
                    vertex: coords.len() / dim,
                    expected: dim,
                    found: coords.len() % dim,
                });
            }
            let n = coords.len() / dim;
            if n < 4 {
                return Err(CurveError::TooFewVertices { component: c, count: n });
            }
            if let Some(pos) = coords.iter().position(|x| !x.is_finite()) {
                return Err(CurveError::NonFinite {
                    component: c,
                    vertex: pos / dim,
                });
            }
        }
        let rings: Vec<Ring> = rings.into_iter().map(|c| Ring::new(dim, c)).collect();
        let diagonal = bbox_diagonal(dim, &rings);
        let curve = DiscreteCurve { dim, rings, diagonal };
        curve.validate()?;
        Ok(curve)
    }

    fn validate(&self) -> Result<(), CurveError> {
        let zero = 1e-14 * self.diagonal;
        for (c, ring) in self.rings.iter().enumerate() {
            for i in 0..ring.len() {
                if ring.segment_length(i) <= zero {
                    return Err(CurveError::DegenerateSegment {
                        component: c,
                        segment: i,
                    });
                }
            }
            // consecutive edges folding back onto each other overlap
            for i in 0..ring.len() {
                let a = ring.vertex_offset(i, -1);
                let b = ring.vertex(i);
                let c2 = ring.vertex(i + 1);
                let u = geom::sub(b, a);
                let w = geom::sub(c2, b);
                if geom::angle_between(&u, &w) > std::f64::consts::PI - 1e-9 {
                    return Err(CurveError::SelfIntersection {
                        first: (c, (i + ring.len() - 1) % ring.len()),
                        second: (c, i),
                        distance: 0.0,
                    });
                }
            }
        }
        if let Some((first, second, distance)) = self.closest_nonadjacent_within(SELF_INTERSECTION_TOL * self.diagonal)
        {
            return Err(CurveError::SelfIntersection {
                first,
                second,
                distance,
            });
        }
        Ok(())
    }

    /// First pair of nonadjacent segments (in sweep order) closer than `tol`.
    ///
    /// Sweep-and-prune on the first coordinate, then inflated AABB overlap,
    /// then the exact segment-segment distance.
    fn closest_nonadjacent_within(&self, tol: f64) -> Option<((usize, usize), (usize, usize), f64)> {
        let dim = self.dim;
        let segs: Vec<(usize, usize)> = self.segments().collect();
        let mut lo = vec![0.0; segs.len() * dim];
        let mut hi = vec![0.0; segs.len() * dim];
        for (k, &(c, i)) in segs.iter().enumerate() {
            let a = self.rings[c].vertex(i);
            let b = self.rings[c].vertex(i + 1);
            for d in 0..dim {
                lo[k * dim + d] = a[d].min(b[d]) - tol;
                hi[k * dim + d] = a[d].max(b[d]) + tol;
            }
        }
        let mut order: Vec<usize> = (0..segs.len()).collect();
        order.sort_by(|&x, &y| lo[x * dim].partial_cmp(&lo[y * dim]).unwrap().then(x.cmp(&y)));
        for (oi, &x) in order.iter().enumerate() {
            for &y in &order[oi + 1..] {
                if lo[y * dim] > hi[x * dim] {
                    break;
                }
                if (1..dim).any(|d| lo[y * dim + d] > hi[x * dim + d] || lo[x * dim + d] > hi[y * dim + d]) {
                    continue;
                }
                let (sx, sy) = (segs[x], segs[y]);
                if self.segments_adjacent(sx, sy) {
                    continue;
                }
                let rx = &self.rings[sx.0];
                let ry = &self.rings[sy.0];
                let (_, _, d2) = geom::segment_segment(
                    rx.vertex(sx.1),
                    rx.vertex(sx.1 + 1),
                    ry.vertex(sy.1),
                    ry.vertex(sy.1 + 1),
                );
                if d2.sqrt() <= tol {
                    let (a, b) = if sx <= sy { (sx, sy) } else { (sy, sx) };
                    return Some((a, b, d2.sqrt()));
                }
            }
        }
        None
    }

    /// Segments sharing a vertex.
    pub fn segments_adjacent(&self, a: (usize, usize), b: (usize, usize)) -> bool {
        if a.0 != b.0 {
            return false;
        }
        let n = self.rings[a.0].len();
        a.1 == b.1 || (a.1 + 1) % n == b.1 || (b.1 + 1) % n == a.1
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_components(&self) -> usize {
        self.rings.len()
    }

    pub fn rings(&self) -> &[Ring] {
        &self.rings
    }

    pub fn ring(&self, c: usize) -> &Ring {
        &self.rings[c]
    }

    pub fn num_vertices(&self) -> usize {
        self.rings.iter().map(Ring::len).sum()
    }

    pub fn total_length(&self) -> f64 {
        self.rings.iter().map(Ring::length).sum()
    }

    pub fn bbox_diagonal(&self) -> f64 {
        self.diagonal
    }

    /// All `(component, segment)` pairs in index order.
    pub fn segments(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rings
            .iter()
            .enumerate()
            .flat_map(|(c, r)| (0..r.len()).map(move |i| (c, i)))
    }

    /// Vertex rings as nested vectors (the JSON layout).
    pub fn components(&self) -> Vec<Vec<Vec<f64>>> {
        self.rings.iter().map(Ring::points).collect()
    }

    /// Apply a point map to every vertex and re-validate.
    pub fn map_points<F: Fn(&[f64]) -> Vec<f64>>(&self, f: F) -> Result<DiscreteCurve, CurveError> {
        let rings = self
            .rings
            .iter()
            .map(|r| r.coords.chunks(self.dim).flat_map(|p| f(p)).collect())
            .collect();
        DiscreteCurve::from_flat(self.dim, rings)
    }

    /// Uniform scaling about the origin.
    pub fn scaled(&self, factor: f64) -> DiscreteCurve {
        let rings: Vec<Ring> = self
            .rings
            .iter()
            .map(|r| Ring::new(self.dim, r.coords.iter().map(|x| x * factor).collect()))
            .collect();
        DiscreteCurve {
            dim: self.dim,
            diagonal: bbox_diagonal(self.dim, &rings),
            rings,
        }
    }

    /// Centroid of all vertices.
    pub fn centroid(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.dim];
        for r in &self.rings {
            for p in r.coords.chunks(self.dim) {
                for d in 0..self.dim {
                    c[d] += p[d];
                }
            }
        }
        let n = self.num_vertices() as f64;
        c.iter_mut().for_each(|x| *x /= n);
        c
    }

    /// Arc coordinate of arclength `s` on component `component`.
    pub fn coord_at_arclength(&self, component: usize, s: f64) -> Result<ArcCoordinate, CurveError> {
        let ring = self
            .rings
            .get(component)
            .ok_or_else(|| CurveError::OutOfRange(format!("component {component}")))?;
        if !s.is_finite() || s < 0.0 || s > ring.length() {
            return Err(CurveError::OutOfRange(format!(
                "arclength {s} outside [0, {}]",
                ring.length()
            )));
        }
        let (segment, t) = ring.locate(s);
        Ok(ArcCoordinate {
            component,
            segment,
            t,
            s,
        })
    }

    /// Arc coordinate of parameter `t` on a segment.
    pub fn coord_at(&self, component: usize, segment: usize, t: f64) -> Result<ArcCoordinate, CurveError> {
        let ring = self
            .rings
            .get(component)
            .ok_or_else(|| CurveError::OutOfRange(format!("component {component}")))?;
        if segment >= ring.len() || !(0.0..=1.0).contains(&t) {
            return Err(CurveError::OutOfRange(format!("segment {segment}, t = {t}")));
        }
        let s = ring.cum[segment] + t * ring.segment_length(segment);
        Ok(ArcCoordinate {
            component,
            segment,
            t,
            s,
        })
    }
}

fn bbox_diagonal(dim: usize, rings: &[Ring]) -> f64 {
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for r in rings {
        for p in r.coords.chunks(dim) {
            for d in 0..dim {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
    }
    geom::dist(&lo, &hi)
}

/// Position on a curve: component, segment, barycentric parameter and arclength.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcCoordinate {
    pub component: usize,
    pub segment: usize,
    pub t: f64,
    pub s: f64,
}

/// Linear interpolation on the indexed segment.
pub fn point_at(curve: &DiscreteCurve, coord: &ArcCoordinate) -> Result<Vec<f64>, CurveError> {
    let ring = curve
        .rings
        .get(coord.component)
        .ok_or_else(|| CurveError::OutOfRange(format!("component {}", coord.component)))?;
    if coord.segment >= ring.len() || !(0.0..=1.0).contains(&coord.t) {
        return Err(CurveError::OutOfRange(format!(
            "segment {}, t = {}",
            coord.segment, coord.t
        )));
    }
    Ok(ring.point_on_segment(coord.segment, coord.t))
}

/// Inverse circumradius of the triangle `(a, b, c)`; zero for collinear triples.
///
/// `2 sin(turning angle at b) / |c - a|`, with the turning angle computed
/// from unit edge vectors via `atan2` for stability at small angles.
pub fn circumcircle_curvature(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    let u = geom::sub(b, a);
    let w = geom::sub(c, b);
    let phi = geom::angle_between(&u, &w);
    let chord = geom::dist(a, c);
    let kappa = 2.0 * phi.sin() / chord;
    let edge = geom::norm(&u).max(geom::norm(&w));
    if kappa * COLLINEAR_RADIUS_FACTOR * edge < 1.0 {
        0.0
    } else {
        kappa
    }
}

/// Discrete curvature at every vertex of every ring.
pub fn vertex_curvatures(curve: &DiscreteCurve) -> Vec<Vec<f64>> {
    curve
        .rings
        .iter()
        .map(|r| {
            (0..r.len())
                .map(|i| circumcircle_curvature(r.vertex_offset(i, -1), r.vertex(i), r.vertex(i + 1)))
                .collect()
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TangentMethod {
    /// Tangent of the circle through `(v[i-1], v[i], v[i+1])`, chord
    /// direction for collinear triples.
    Circumcircle,
}

/// Unit tangent per vertex, per component.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentField {
    pub method: TangentMethod,
    dim: usize,
    tangents: Vec<Vec<f64>>,
    /// Vertices that used the collinear fallback.
    pub fallback_count: usize,
}

impl TangentField {
    #[inline]
    pub fn at_vertex(&self, component: usize, i: usize) -> &[f64] {
        let t = &self.tangents[component];
        let n = t.len() / self.dim;
        let i = i % n;
        &t[i * self.dim..(i + 1) * self.dim]
    }

    /// Normalized linear blend of the endpoint tangents of a segment.
    pub fn interpolated(&self, component: usize, segment: usize, t: f64) -> Vec<f64> {
        let m = geom::lerp(
            self.at_vertex(component, segment),
            self.at_vertex(component, segment + 1),
            t,
        );
        geom::normalized(&m).unwrap_or_else(|| self.at_vertex(component, segment).to_vec())
    }

    pub fn at(&self, coord: &ArcCoordinate) -> Vec<f64> {
        self.interpolated(coord.component, coord.segment, coord.t)
    }

    /// Whether this field has one tangent per vertex of `curve`.
    pub fn covers(&self, curve: &DiscreteCurve) -> bool {
        self.dim == curve.dim
            && self.tangents.len() == curve.num_components()
            && self
                .tangents
                .iter()
                .zip(curve.rings())
                .all(|(t, r)| t.len() == r.len() * self.dim)
    }
}

/// Circumcircle tangent at every vertex.
///
/// For a circle through `a, b, c` the tangent at `b` is parallel to
/// `u/|u|^2 + w/|w|^2` with `u = b - a`, `w = c - b`; the normal components
/// of the two terms cancel exactly. Nearly collinear triples fall back to the
/// chord `c - a`.
pub fn estimate_tangents(curve: &DiscreteCurve) -> TangentField {
    let dim = curve.dim;
    let mut fallback_count = 0;
    let tangents = curve
        .rings
        .iter()
        .map(|r| {
            let mut out = Vec::with_capacity(r.len() * dim);
            for i in 0..r.len() {
                let a = r.vertex_offset(i, -1);
                let b = r.vertex(i);
                let c = r.vertex(i + 1);
                let u = geom::sub(b, a);
                let w = geom::sub(c, b);
                let t = if circumcircle_curvature(a, b, c) == 0.0 {
                    fallback_count += 1;
                    geom::normalized(&geom::sub(c, a))
                } else {
                    let uu = geom::dot(&u, &u);
                    let ww = geom::dot(&w, &w);
                    let m: Vec<f64> = u.iter().zip(&w).map(|(x, y)| x / uu + y / ww).collect();
                    geom::normalized(&m)
                };
                out.extend(t.unwrap_or_else(|| geom::normalized(&w).expect("nonzero edge")));
            }
            out
        })
        .collect();
    TangentField {
        method: TangentMethod::Circumcircle,
        dim,
        tangents,
        fallback_count,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use std::f64::consts::PI;

    #[test]
    fn inscribed_polygon_perimeter() {
        let c = fixtures::circle(1000, 1.0);
        let expected = 2000.0 * (PI / 1000.0).sin();
        assert!((c.total_length() - expected).abs() < 1e-12);
    }

    #[test]
    fn repeated_vertex_is_degenerate() {
        let sq = vec![vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
        ]];
        assert!(matches!(
            build_curve(sq, 2),
            Err(CurveError::DegenerateSegment {
                component: 0,
                segment: 1
            })
        ));
    }

    #[test]
    fn figure_eight_is_rejected() {
        let eight = vec![vec![
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            vec![1.0, -1.0],
            vec![-1.0, 1.0],
            vec![-1.0, -1.0],
        ]];
        assert!(matches!(
            build_curve(eight, 2),
            Err(CurveError::SelfIntersection { .. })
        ));
    }

    #[test]
    fn too_few_vertices() {
        let tri = vec![vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]];
        assert!(matches!(
            build_curve(tri, 2),
            Err(CurveError::TooFewVertices { count: 3, .. })
        ));
    }

    #[test]
    fn mixed_dimension_rejected() {
        let bad = vec![vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0, 0.0],
            vec![0.0, 1.0],
        ]];
        assert!(matches!(
            build_curve(bad, 2),
            Err(CurveError::DimensionMismatch { vertex: 2, .. })
        ));
    }

    #[test]
    fn polygon_tangents_are_circle_tangents() {
        for n in [50usize, 200, 800] {
            let c = fixtures::circle(n, 1.0);
            let tf = estimate_tangents(&c);
            let mut worst: f64 = 0.0;
            for i in 0..n {
                let p = c.ring(0).vertex(i);
                worst = worst.max(geom::dot(tf.at_vertex(0, i), p).abs());
            }
            // vertices lie on the circle, so the circumcircle is the circle itself
            assert!(worst < 1e-12, "n = {n}: {worst}");
        }
    }

    #[test]
    fn collinear_triple_uses_edge_direction() {
        let c = fixtures::stadium(1.0, 4.0, 400);
        let tf = estimate_tangents(&c);
        assert!(tf.fallback_count > 0);
        let r = c.ring(0);
        for i in 0..r.len() {
            let a = r.vertex_offset(i, -1);
            let b = r.vertex(i);
            let d = r.vertex(i + 1);
            if a[1] == b[1] && b[1] == d[1] {
                let t = tf.at_vertex(0, i);
                assert_eq!(t[1], 0.0);
                assert!((t[0].abs() - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn ellipse_tangents_match_derivative() {
        let (a, b) = (2.0, 1.0);
        let n = 2000;
        let c = fixtures::ellipse(a, b, n);
        let tf = estimate_tangents(&c);
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let th = 2.0 * PI * i as f64 / n as f64;
            let exact = [-a * th.sin(), b * th.cos()];
            worst = worst.max(geom::angle_between(tf.at_vertex(0, i), &exact));
        }
        assert!(worst <= 1e-5, "max angle error {worst}");
    }

    #[test]
    fn polygon_tangent_error_is_second_order() {
        // vertices off the circle by a fixed radial jitter pattern are no
        // longer concyclic; compare against the smooth parametrization instead
        let err = |n: usize| {
            let pts: Vec<Vec<f64>> = (0..n)
                .map(|i| {
                    let th = 2.0 * PI * i as f64 / n as f64;
                    let r = 1.0 + 0.1 * (3.0 * th).cos();
                    vec![r * th.cos(), r * th.sin()]
                })
                .collect();
            let c = build_curve(vec![pts], 2).unwrap();
            let tf = estimate_tangents(&c);
            (0..n)
                .map(|i| {
                    let th = 2.0 * PI * i as f64 / n as f64;
                    let r = 1.0 + 0.1 * (3.0 * th).cos();
                    let dr = -0.3 * (3.0 * th).sin();
                    let exact = [dr * th.cos() - r * th.sin(), dr * th.sin() + r * th.cos()];
                    geom::angle_between(tf.at_vertex(0, i), &exact)
                })
                .fold(0.0, f64::max)
        };
        let ratio = err(200) / err(400);
        assert!(
            ratio > 3.5,
            "halving the spacing should quarter the error, ratio {ratio}"
        );
    }

    #[test]
    fn point_at_endpoints_and_midpoint() {
        let sq = build_curve(
            vec![vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]]],
            2,
        )
        .unwrap();
        let c0 = sq.coord_at(0, 2, 0.0).unwrap();
        assert_eq!(point_at(&sq, &c0).unwrap(), vec![1.0, 1.0]);
        let mid = sq.coord_at(0, 0, 0.5).unwrap();
        assert_eq!(point_at(&sq, &mid).unwrap(), vec![0.5, 0.0]);
        let bad = ArcCoordinate {
            component: 0,
            segment: 9,
            t: 0.0,
            s: 0.0,
        };
        assert!(matches!(point_at(&sq, &bad), Err(CurveError::OutOfRange(_))));
        assert!(sq.coord_at_arclength(1, 0.0).is_err());
    }

    #[test]
    fn half_length_is_antipodal() {
        for n in [100usize, 1000] {
            let c = fixtures::circle(n, 1.0);
            let l = c.ring(0).length();
            let coord = c.coord_at_arclength(0, l / 2.0).unwrap();
            let p = point_at(&c, &coord).unwrap();
            let err = geom::dist(&p, &[-1.0, 0.0]);
            // the midpoint of the antipodal edge sits one sagitta inside the circle
            assert!(err <= 5.0 / (n * n) as f64, "n = {n}: {err}");
        }
    }

    #[test]
    fn perimeter_converges_quadratically() {
        let gap = |n: usize| 2.0 * PI * 3.0 - fixtures::circle(n, 3.0).total_length();
        let r = gap(100) / gap(200);
        assert!((r - 4.0).abs() < 0.05, "{r}");
    }
}
