use crate::curve::{vertex_curvatures, ArcCoordinate, DiscreteCurve};
use crate::length::Length;

/// Largest discrete circumcircle curvature over all vertex triples.
pub fn sup_curvature(curve: &DiscreteCurve) -> f64 {
    max_curvature_location(curve).map_or(0.0, |(_, k)| k)
}

/// Vertex of largest curvature (first in index order on ties).
pub fn max_curvature_location(curve: &DiscreteCurve) -> Option<(ArcCoordinate, f64)> {
    let mut best: Option<(usize, usize, f64)> = None;
    for (c, ks) in vertex_curvatures(curve).iter().enumerate() {
        for (i, &k) in ks.iter().enumerate() {
            if best.is_none_or(|(_, _, b)| k > b) {
                best = Some((c, i, k));
            }
        }
    }
    best.map(|(c, i, k)| (curve.coord_at(c, i, 0.0).expect("vertex in range"), k))
}

/// `1 / sup_curvature`, unbounded when every triple is collinear.
pub fn focal_distance(curve: &DiscreteCurve) -> Length {
    Length::reciprocal_of(sup_curvature(curve))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn unit_circle_curvature() {
        let k = sup_curvature(&fixtures::circle(1000, 1.0));
        assert!((k - 1.0).abs() < 1e-5, "{k}");
    }

    #[test]
    fn ellipse_curvature_at_major_vertex() {
        // analytic curvature of (a cos t, b sin t) peaks at t = 0 with value a / b^2
        let (a, b) = (2.0, 1.0);
        let oracle = a / (b * b);
        let (loc, k) = max_curvature_location(&fixtures::ellipse(a, b, 4000)).unwrap();
        assert!((k - oracle).abs() < 1e-3, "{k}");
        assert!(loc.segment == 0 || loc.segment == 2000);
        assert_eq!(
            focal_distance(&fixtures::ellipse(a, b, 4000))
                .finite()
                .map(|f| (f - 0.5).abs() < 1e-3),
            Some(true)
        );
    }

    #[test]
    fn stadium_flats_contribute_nothing() {
        let s = fixtures::stadium(1.0, 4.0, 2000);
        let k = sup_curvature(&s);
        assert!((k - 1.0).abs() < 1e-4, "{k}");
        let ks = vertex_curvatures(&s);
        assert!(ks[0].iter().any(|&x| x == 0.0));
    }

    #[test]
    fn circle_radius_three() {
        let f = focal_distance(&fixtures::circle(1000, 3.0)).finite().unwrap();
        assert!((f - 3.0).abs() < 1e-4);
    }
}
