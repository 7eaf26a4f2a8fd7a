//! Curve generators with known thickness: circles, ellipses, stadiums,
//! rounded squares, concentric pairs, the trefoil and seeded random
//! trigonometric curves.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::curve::{build_curve, DiscreteCurve};

fn ring_from<F: Fn(f64) -> Vec<f64>>(n: usize, f: F) -> Vec<Vec<f64>> {
    (0..n).map(|i| f(TAU * i as f64 / n as f64)).collect()
}

/// Regular `n`-gon inscribed in the circle of radius `radius` in R².
pub fn circle(n: usize, radius: f64) -> DiscreteCurve {
    circle_in(2, n, radius)
}

/// Regular `n`-gon on the circle of radius `radius` in the first coordinate
/// plane of R^dim.
pub fn circle_in(dim: usize, n: usize, radius: f64) -> DiscreteCurve {
    let ring = ring_from(n, |th| {
        let mut p = vec![0.0; dim];
        p[0] = radius * th.cos();
        p[1] = radius * th.sin();
        p
    });
    build_curve(vec![ring], dim).expect("circle fixture")
}

/// `(a cos θ, b sin θ)` at `n` equally spaced parameters.
pub fn ellipse(a: f64, b: f64, n: usize) -> DiscreteCurve {
    build_curve(vec![ring_from(n, |th| vec![a * th.cos(), b * th.sin()])], 2).expect("ellipse fixture")
}

/// Rectangle with straight sides of lengths `fx`, `fy` joined by quarter
/// circles of radius `r`, sampled at `n` points equally spaced in arclength.
/// Points on the flats have exactly constant coordinates.
pub fn rounded_rectangle(fx: f64, fy: f64, r: f64, n: usize) -> DiscreteCurve {
    let (hx, hy) = (fx / 2.0, fy / 2.0);
    let arc = PI * r / 2.0;
    let perimeter = 2.0 * fx + 2.0 * fy + 4.0 * arc;
    // pieces in order: bottom flat, corner, right flat, corner, top flat, corner, left flat, corner
    let point = |s: f64| -> Vec<f64> {
        let mut s = s;
        if s < fx {
            return vec![-hx + s, -hy - r];
        }
        s -= fx;
        if s < arc {
            let a = -PI / 2.0 + s / r;
            return vec![hx + r * a.cos(), -hy + r * a.sin()];
        }
        s -= arc;
        if s < fy {
            return vec![hx + r, -hy + s];
        }
        s -= fy;
        if s < arc {
            let a = s / r;
            return vec![hx + r * a.cos(), hy + r * a.sin()];
        }
        s -= arc;
        if s < fx {
            return vec![hx - s, hy + r];
        }
        s -= fx;
        if s < arc {
            let a = PI / 2.0 + s / r;
            return vec![-hx + r * a.cos(), hy + r * a.sin()];
        }
        s -= arc;
        if s < fy {
            return vec![-hx - r, hy - s];
        }
        s -= fy;
        let a = PI + s / r;
        vec![-hx + r * a.cos(), -hy + r * a.sin()]
    };
    let ring = (0..n).map(|i| point(perimeter * i as f64 / n as f64)).collect();
    build_curve(vec![ring], 2).expect("rounded rectangle fixture")
}

/// Two semicircles of radius `r` joined by flats of length `flat`.
pub fn stadium(r: f64, flat: f64, n: usize) -> DiscreteCurve {
    rounded_rectangle(flat, 0.0, r, n)
}

/// Square with flats of length `flat` and corner radius `r`.
pub fn rounded_square(flat: f64, r: f64, n: usize) -> DiscreteCurve {
    rounded_rectangle(flat, flat, r, n)
}

/// Two coplanar concentric circles.
pub fn concentric(r1: f64, r2: f64, n1: usize, n2: usize) -> DiscreteCurve {
    let inner = ring_from(n1, |th| vec![r1 * th.cos(), r1 * th.sin()]);
    let outer = ring_from(n2, |th| vec![r2 * th.cos(), r2 * th.sin()]);
    build_curve(vec![inner, outer], 2).expect("concentric fixture")
}

/// The (2,3) torus knot `(sin t + 2 sin 2t, cos t − 2 cos 2t, −sin 3t)`.
pub fn trefoil(n: usize) -> DiscreteCurve {
    let ring = ring_from(n, |t| {
        vec![
            t.sin() + 2.0 * (2.0 * t).sin(),
            t.cos() - 2.0 * (2.0 * t).cos(),
            -(3.0 * t).sin(),
        ]
    });
    build_curve(vec![ring], 3).expect("trefoil fixture")
}

/// Fourier coefficients of a random star-shaped curve.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigCurve {
    /// `(cos, sin)` coefficients of the radius for frequencies `1..=degree`.
    pub radial: Vec<(f64, f64)>,
    /// Out-of-plane coefficients (empty in R²).
    pub lift: Vec<(f64, f64)>,
}

impl TrigCurve {
    /// Coefficients drawn from `seed`; frequency `k` gets amplitude at most
    /// `0.12 / k`, so the radius stays above 0.45.
    pub fn random(seed: u64, degree: usize, dim: usize) -> TrigCurve {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |k: usize, amp: f64| {
            let s = amp / k as f64;
            (rng.gen_range(-s..s), rng.gen_range(-s..s))
        };
        let radial = (1..=degree).map(|k| draw(k, 0.12)).collect();
        let lift = if dim >= 3 {
            (1..=degree).map(|k| draw(k, 0.1)).collect()
        } else {
            Vec::new()
        };
        TrigCurve { radial, lift }
    }

    pub fn radius(&self, th: f64) -> f64 {
        1.0 + fourier(&self.radial, th)
    }

    pub fn sample(&self, n: usize, dim: usize) -> DiscreteCurve {
        let ring = ring_from(n, |th| {
            let r = self.radius(th);
            let mut p = vec![0.0; dim];
            p[0] = r * th.cos();
            p[1] = r * th.sin();
            if dim >= 3 {
                p[2] = fourier(&self.lift, th);
            }
            p
        });
        build_curve(vec![ring], dim).expect("star-shaped curves are embedded")
    }
}

fn fourier(coeffs: &[(f64, f64)], th: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .map(|(j, (a, b))| {
            let k = (j + 1) as f64;
            a * (k * th).cos() + b * (k * th).sin()
        })
        .sum()
}

/// Seeded random star curve of the given degree.
pub fn random_trig_curve(seed: u64, degree: usize, n: usize, dim: usize) -> DiscreteCurve {
    TrigCurve::random(seed, degree, dim).sample(n, dim)
}

/// Unit circle with smooth radial noise: frequencies 2 through 5 with random
/// phases, scaled so the largest radial deviation equals `noise`.
pub fn perturbed_circle(seed: u64, n: usize, noise: f64) -> DiscreteCurve {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms: Vec<(f64, f64, f64)> = (2..=5)
        .map(|k| (k as f64, rng.gen_range(0.5..1.0) / k as f64, rng.gen_range(0.0..TAU)))
        .collect();
    let bump = |th: f64| terms.iter().map(|(k, a, ph)| a * (k * th + ph).cos()).sum::<f64>();
    let peak = (0..4096)
        .map(|i| bump(TAU * i as f64 / 4096.0).abs())
        .fold(0.0, f64::max);
    let scale = noise / peak;
    let ring = ring_from(n, |th| {
        let r = 1.0 + scale * bump(th);
        vec![r * th.cos(), r * th.sin()]
    });
    build_curve(vec![ring], 2).expect("perturbed circle fixture")
}

/// The named fixtures used by the agreement suites, with their resolutions.
pub fn standard_set() -> Vec<(&'static str, DiscreteCurve)> {
    vec![
        ("circle", circle(1000, 1.0)),
        ("ellipse", ellipse(2.0, 1.0, 4000)),
        ("stadium", stadium(1.0, 4.0, 2000)),
        ("rounded_square", rounded_square(1.0, 0.5, 2000)),
        ("concentric", concentric(1.0, 3.0, 1000, 3000)),
        ("trefoil", trefoil(600)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stadium_perimeter() {
        let s = stadium(1.0, 4.0, 2000);
        // the arcs lose h²/24 per unit length to their chords
        let h = s.ring(0).mean_segment_length();
        assert!((s.total_length() - (8.0 + TAU)).abs() < TAU * h * h / 24.0 * 1.01);
    }

    #[test]
    fn stadium_spacing_is_uniform_in_arclength() {
        let s = stadium(1.0, 4.0, 1000);
        let r = s.ring(0);
        let h = r.mean_segment_length();
        for i in 0..r.len() {
            // chords across a corner are slightly shorter than the arc step
            assert!((r.segment_length(i) - h).abs() < 1e-4 * h, "{i}");
        }
    }

    #[test]
    fn random_curves_are_seed_stable() {
        let a = random_trig_curve(3, 5, 200, 2);
        let b = random_trig_curve(3, 5, 200, 2);
        assert_eq!(a, b);
        assert_ne!(a, random_trig_curve(4, 5, 200, 2));
    }

    #[test]
    fn perturbed_circle_noise_level() {
        let c = perturbed_circle(7, 400, 0.05);
        let dev = c
            .ring(0)
            .points()
            .iter()
            .map(|p| (p[0].hypot(p[1]) - 1.0).abs())
            .fold(0.0, f64::max);
        assert!(dev <= 0.05 + 1e-12 && dev > 0.045);
    }
}
