//! Normal-projection isotopy check between nearby curves.
//!
//! Every vertex of `L` is projected to its nearest point on `K`; if the
//! projection is unique, stays within `ρ` and winds once around each
//! component monotonically, the straight-line homotopy from the projected
//! polygon to `L` is swept and every frame is validated for embeddedness.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bvh::SegmentBvh;
use crate::curve::{build_curve, DiscreteCurve};
use crate::geom;
use crate::length::Length;

/// Frames of the straight-line homotopy, endpoints included.
pub const DEFAULT_FRAMES: usize = 8;

/// Default projection radius as a fraction of the thickness.
pub const RHO_FRACTION: f64 = 1.0 / 8.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IsotopyError {
    #[error("curves have {k} and {l} components")]
    ComponentMismatch { k: usize, l: usize },
    #[error("curves live in R^{k} and R^{l}")]
    DimensionMismatch { k: usize, l: usize },
    #[error("rho must be positive and finite, got {0}")]
    InvalidRho(f64),
    #[error("thickness must be positive and finite, got {0:?}")]
    NonpositiveThickness(Length),
}

/// Foot of the nearest-point projection of one `L` vertex on `K`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Foot {
    pub component: usize,
    pub segment: usize,
    pub t: f64,
    /// Arclength of the foot on its component of `K`.
    pub s: f64,
    pub distance: f64,
    /// Distance to `K` once an arc neighborhood of the foot is removed.
    pub second_distance: f64,
    pub unique: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check")]
pub enum FailedCheck {
    OutsideNeighborhood {
        component: usize,
        vertex: usize,
        distance: f64,
    },
    FiberNotUnique {
        component: usize,
        vertex: usize,
        second_distance: f64,
    },
    ComponentMap {
        component: usize,
    },
    NotMonotone {
        component: usize,
        vertex: usize,
    },
    WrongDegree {
        component: usize,
        turns: f64,
    },
    FrameNotEmbedded {
        t: f64,
        reason: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict")]
pub enum IsotopyVerdict {
    Isotopic,
    Inconclusive { failed: FailedCheck },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsotopyCheck {
    pub rho_used: f64,
    pub verdict: IsotopyVerdict,
    /// Per component of `L`, per vertex.
    pub projection: Vec<Vec<Foot>>,
    pub frames: usize,
}

impl IsotopyCheck {
    pub fn is_isotopic(&self) -> bool {
        self.verdict == IsotopyVerdict::Isotopic
    }
}

/// Isotopy radius for a curve of the given thickness: one eighth of it.
pub fn suggested_rho(thickness: Length) -> Result<f64, IsotopyError> {
    match thickness {
        Length::Finite(t) if t > 0.0 && t.is_finite() => Ok(t * RHO_FRACTION),
        other => Err(IsotopyError::NonpositiveThickness(other)),
    }
}

/// Symmetric Hausdorff distance between the polylines, measured from each
/// vertex set to the other polyline.
pub fn hausdorff_distance(a: &DiscreteCurve, b: &DiscreteCurve) -> f64 {
    let one_way = |x: &DiscreteCurve, y: &DiscreteCurve| {
        let bvh = SegmentBvh::new(y);
        x.rings()
            .par_iter()
            .map(|r| {
                (0..r.len())
                    .map(|i| {
                        bvh.nearest(r.vertex(i), |_, _| true)
                            .map_or(f64::INFINITY, |n| n.distance)
                    })
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

/// The straight-line homotopy from the projected polygon (`t = 0`) to `L`
/// (`t = 1`).
pub fn homotopy_frame(k: &DiscreteCurve, l: &DiscreteCurve, projection: &[Vec<Foot>], t: f64) -> Vec<Vec<Vec<f64>>> {
    l.rings()
        .iter()
        .zip(projection)
        .map(|(ring, feet)| {
            (0..ring.len())
                .map(|i| {
                    let f = &feet[i];
                    let foot = k.ring(f.component).point_on_segment(f.segment, f.t);
                    geom::lerp(&foot, ring.vertex(i), t)
                })
                .collect()
        })
        .collect()
}

/// Check that `L` is isotopic to `K` through the normal projection onto `K`
/// with radius `rho`, sweeping [`DEFAULT_FRAMES`] homotopy frames.
pub fn isotopy_check(k: &DiscreteCurve, l: &DiscreteCurve, rho: f64) -> Result<IsotopyCheck, IsotopyError> {
    isotopy_check_with_frames(k, l, rho, DEFAULT_FRAMES)
}

pub fn isotopy_check_with_frames(
    k: &DiscreteCurve,
    l: &DiscreteCurve,
    rho: f64,
    frames: usize,
) -> Result<IsotopyCheck, IsotopyError> {
    if k.num_components() != l.num_components() {
        return Err(IsotopyError::ComponentMismatch {
            k: k.num_components(),
            l: l.num_components(),
        });
    }
    if k.dim() != l.dim() {
        return Err(IsotopyError::DimensionMismatch { k: k.dim(), l: l.dim() });
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(IsotopyError::InvalidRho(rho));
    }
    let frames = frames.max(1);
    let bvh = SegmentBvh::new(k);
    let projection: Vec<Vec<Foot>> = l
        .rings()
        .iter()
        .map(|ring| {
            (0..ring.len())
                .into_par_iter()
                .map(|i| project(k, &bvh, ring.vertex(i), rho))
                .collect()
        })
        .collect();
    let done = |verdict| IsotopyCheck {
        rho_used: rho,
        verdict,
        projection: projection.clone(),
        frames,
    };
    let fail = |failed| done(IsotopyVerdict::Inconclusive { failed });

    // neighborhood and fiber uniqueness, at vertices and segment midpoints
    for (c, ring) in l.rings().iter().enumerate() {
        for (i, f) in projection[c].iter().enumerate() {
            if f.distance >= rho {
                return Ok(fail(FailedCheck::OutsideNeighborhood {
                    component: c,
                    vertex: i,
                    distance: f.distance,
                }));
            }
            if !f.unique {
                return Ok(fail(FailedCheck::FiberNotUnique {
                    component: c,
                    vertex: i,
                    second_distance: f.second_distance,
                }));
            }
            let mid = geom::lerp(ring.vertex(i), ring.vertex(i + 1), 0.5);
            let fm = project(k, &bvh, &mid, rho);
            if fm.distance >= rho {
                return Ok(fail(FailedCheck::OutsideNeighborhood {
                    component: c,
                    vertex: i,
                    distance: fm.distance,
                }));
            }
        }
    }

    // each component of L lands on one component of K, bijectively
    let mut target = vec![usize::MAX; l.num_components()];
    let mut used = vec![false; k.num_components()];
    for (c, feet) in projection.iter().enumerate() {
        let kc = feet[0].component;
        if feet.iter().any(|f| f.component != kc) || used[kc] {
            return Ok(fail(FailedCheck::ComponentMap { component: c }));
        }
        used[kc] = true;
        target[c] = kc;
    }

    // monotone, winding once
    for (c, feet) in projection.iter().enumerate() {
        let len = k.ring(target[c]).length();
        let mut total = 0.0;
        let mut sign = 0.0;
        for i in 0..feet.len() {
            let a = feet[i].s;
            let b = feet[(i + 1) % feet.len()].s;
            let mut d = (b - a).rem_euclid(len);
            if d > len / 2.0 {
                d -= len;
            }
            if d == 0.0 || (sign != 0.0 && d.signum() != sign) {
                return Ok(fail(FailedCheck::NotMonotone {
                    component: c,
                    vertex: i,
                }));
            }
            sign = d.signum();
            total += d;
        }
        let turns = total / len;
        if (turns.abs() - 1.0).abs() > 1e-6 {
            return Ok(fail(FailedCheck::WrongDegree { component: c, turns }));
        }
    }

    // sweep the homotopy; t = 1 is L itself
    let dim = l.dim();
    let bad = (0..frames)
        .into_par_iter()
        .map(|j| {
            let t = j as f64 / frames as f64;
            build_curve(homotopy_frame(k, l, &projection, t), dim)
                .err()
                .map(|e| (t, e.to_string()))
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .next();
    if let Some((t, reason)) = bad {
        return Ok(fail(FailedCheck::FrameNotEmbedded { t, reason }));
    }
    Ok(done(IsotopyVerdict::Isotopic))
}

fn project(k: &DiscreteCurve, bvh: &SegmentBvh, q: &[f64], rho: f64) -> Foot {
    let Some(n) = bvh.nearest(q, |_, _| true) else {
        unreachable!("curves have segments")
    };
    let ring = k.ring(n.component);
    let s = ring.arclength_at(n.segment) + n.t * ring.segment_length(n.segment);
    let window = 4.0 * rho + ring.max_segment_length();
    let (c0, len) = (n.component, ring.length());
    let second = bvh
        .nearest(q, |c, i| {
            if c != c0 {
                return true;
            }
            // keep segments entirely outside the arc window around the foot
            let a = ring.arclength_at(i);
            let b = a + ring.segment_length(i);
            let sep = |x: f64| {
                let d = (x - s).rem_euclid(len);
                d.min(len - d)
            };
            let straddles = {
                let d = (s - a).rem_euclid(len);
                d <= b - a
            };
            !straddles && sep(a) > window && sep(b) > window
        })
        .map_or(f64::INFINITY, |m| m.distance);
    Foot {
        component: n.component,
        segment: n.segment,
        t: n.t,
        s: s.rem_euclid(len),
        distance: n.distance,
        second_distance: second,
        unique: second > rho,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::kernel::thickness;

    #[test]
    fn circle_examples() {
        let k = fixtures::circle(400, 1.0);
        let moved = k.map_points(|p| vec![p[0] + 0.01, p[1]]).unwrap();
        assert!(isotopy_check(&k, &moved, 0.1).unwrap().is_isotopic());
        let bigger = fixtures::circle(400, 1.05);
        assert!(isotopy_check(&k, &bigger, 0.1).unwrap().is_isotopic());
        let far = k.map_points(|p| vec![p[0] + 5.0, p[1]]).unwrap();
        let r = isotopy_check(&k, &far, 0.1).unwrap();
        assert!(matches!(
            r.verdict,
            IsotopyVerdict::Inconclusive {
                failed: FailedCheck::OutsideNeighborhood { .. }
            }
        ));
    }

    #[test]
    fn identity_is_isotopic() {
        for (name, k) in fixtures::standard_set() {
            let t = thickness(&k).unwrap().thickness;
            let rho = suggested_rho(t).unwrap();
            assert!(isotopy_check(&k, &k, rho).unwrap().is_isotopic(), "{name}");
        }
    }

    #[test]
    fn reversed_orientation_has_degree_minus_one() {
        let k = fixtures::ellipse(2.0, 1.0, 300);
        let mut pts = k.components();
        pts[0].reverse();
        let l = build_curve(pts, 2).unwrap();
        assert!(isotopy_check(&k, &l, 0.05).unwrap().is_isotopic());
    }

    #[test]
    fn doubled_cover_is_rejected() {
        // a curve winding twice near the unit circle projects with degree 2
        let ring: Vec<Vec<f64>> = (0..800)
            .map(|i| {
                let th = std::f64::consts::TAU * 2.0 * i as f64 / 800.0;
                let r = 1.0 + 0.02 * (th / 2.0).sin();
                vec![r * th.cos(), r * th.sin(), 0.01 * (th / 2.0).cos()]
            })
            .collect();
        let l = build_curve(vec![ring], 3).unwrap();
        let k = fixtures::circle_in(3, 400, 1.0);
        let r = isotopy_check(&k, &l, 0.1).unwrap();
        assert!(!r.is_isotopic());
    }

    #[test]
    fn component_mismatch() {
        let k = fixtures::concentric(1.0, 3.0, 100, 300);
        let l = fixtures::circle(100, 1.0);
        assert!(matches!(
            isotopy_check(&k, &l, 0.1),
            Err(IsotopyError::ComponentMismatch { .. })
        ));
    }

    #[test]
    fn suggested_rho_values() {
        assert_eq!(suggested_rho(Length::Finite(1.0)).unwrap(), 0.125);
        assert_eq!(suggested_rho(Length::Finite(2.0)).unwrap(), 0.25);
        assert!(suggested_rho(Length::Finite(0.0)).is_err());
    }

    #[test]
    fn hausdorff_of_concentric_circles() {
        let a = fixtures::circle(1000, 1.0);
        let b = fixtures::circle(1000, 1.1);
        assert!((hausdorff_distance(&a, &b) - 0.1).abs() < 1e-5);
    }
}
