//! Shrinking-perturbation experiments: along a sequence `K_j -> K` the
//! thickness may only drop in the limit and the minimal doubly-critical chord
//! may only grow.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::{build_curve, estimate_tangents, CurveError, DiscreteCurve, TangentField};
use crate::geom;
use crate::isotopy::hausdorff_distance;
use crate::kernel::{thickness, KernelError};

#[derive(Debug, Error)]
pub enum SemicontinuityError {
    #[error("amplitude schedule must be finite, non-negative and non-increasing (term {index} = {value})")]
    ScheduleViolation { index: usize, value: f64 },
    #[error("perturbed curve {index} is not embedded: {source}")]
    Perturbation { index: usize, source: CurveError },
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("tail_fraction must lie in (0, 1]")]
    InvalidTail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum PerturbationFamily {
    /// Normal displacement `a t sin(frequency 2π s / L)`.
    RadialBumps {
        frequency: u32,
    },
    /// The same geometric curve sampled at shifted arclengths `s + a t ψ(s)`,
    /// with `ψ` a seeded low-frequency trigonometric function of unit sup norm.
    TangentialNoise {
        seed: u64,
    },
    Mixed {
        frequency: u32,
        seed: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub family: PerturbationFamily,
    /// Amplitude of term `j` (1-based) as a fraction of the base thickness.
    pub amplitudes: Vec<f64>,
    /// The tail is the last `tail_fraction` of the terms.
    pub tail_fraction: f64,
    /// Relative part of the tolerance band.
    pub band_rel: f64,
}

impl PerturbationSpec {
    /// Amplitudes `coefficient / j` for `j = 1..=terms`.
    pub fn harmonic(family: PerturbationFamily, coefficient: f64, terms: usize) -> PerturbationSpec {
        PerturbationSpec {
            family,
            amplitudes: (1..=terms).map(|j| coefficient / j as f64).collect(),
            tail_fraction: 0.5,
            band_rel: 1e-6,
        }
    }

    pub fn validate(&self) -> Result<(), SemicontinuityError> {
        if !(self.tail_fraction > 0.0 && self.tail_fraction <= 1.0) {
            return Err(SemicontinuityError::InvalidTail);
        }
        let mut prev = f64::INFINITY;
        for (i, &a) in self.amplitudes.iter().enumerate() {
            if !(a.is_finite() && a >= 0.0 && a <= prev) {
                return Err(SemicontinuityError::ScheduleViolation { index: i + 1, value: a });
            }
            prev = a;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceTerm {
    pub j: usize,
    pub amplitude: f64,
    pub thickness: f64,
    pub mdc: Option<f64>,
    pub hausdorff: f64,
}

/// Tail statistic against its bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailVerdict {
    pub pass: bool,
    /// Max thickness (upper) or min MDC (lower) over the tail.
    pub tail_extreme: f64,
    /// Smallest margin to the per-term bound over the tail; negative on failure.
    pub worst_margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemicontinuityExperiment {
    pub spec: PerturbationSpec,
    pub base_thickness: f64,
    pub base_mdc: Option<f64>,
    pub terms: Vec<SequenceTerm>,
    pub tail_start: usize,
    /// `thickness(K_j) <= thickness(K) + band_j` over the tail.
    pub upper_thickness: TailVerdict,
    /// `mdc(K_j) >= mdc(K) - band_j` over the tail.
    pub lower_mdc: TailVerdict,
}

impl SemicontinuityExperiment {
    pub fn passed(&self) -> bool {
        self.upper_thickness.pass && self.lower_mdc.pass
    }
}

/// The `j`-th term of the family with amplitude `amp` times `scale`.
pub fn perturb(
    curve: &DiscreteCurve,
    family: &PerturbationFamily,
    amp: f64,
    scale: f64,
) -> Result<DiscreteCurve, CurveError> {
    let tf = estimate_tangents(curve);
    let (freq, seed) = match *family {
        PerturbationFamily::RadialBumps { frequency } => (Some(frequency), None),
        PerturbationFamily::TangentialNoise { seed } => (None, Some(seed)),
        PerturbationFamily::Mixed { frequency, seed } => (Some(frequency), Some(seed)),
    };
    let mut comps = Vec::with_capacity(curve.num_components());
    for (c, ring) in curve.rings().iter().enumerate() {
        let l = ring.length();
        let shift = seed.map(|s| smooth_noise(s.wrapping_add(c as u64)));
        let pts = (0..ring.len())
            .map(|i| {
                let s = ring.arclength_at(i);
                let (mut p, t) = match &shift {
                    Some(psi) => hermite_point(curve, &tf, c, s + amp * scale * psi(TAU * s / l)),
                    None => (ring.vertex(i).to_vec(), tf.at_vertex(c, i).to_vec()),
                };
                if let Some(k) = freq {
                    let n = principal_normal(ring, i, &t);
                    p = geom::axpy(&p, amp * scale * (k as f64 * TAU * s / l).sin(), &n);
                }
                p
            })
            .collect();
        comps.push(pts);
    }
    build_curve(comps, curve.dim())
}

// unit normal toward the neighbours' midpoint, or a fixed normal on straight runs
fn principal_normal(ring: &crate::curve::Ring, i: usize, t: &[f64]) -> Vec<f64> {
    let mid = geom::lerp(ring.vertex_offset(i, -1), ring.vertex(i + 1), 0.5);
    let d = geom::sub(&mid, ring.vertex(i));
    let d = geom::axpy(&d, -geom::dot(&d, t), t);
    geom::normalized(&d).unwrap_or_else(|| geom::normal_basis(t)[0].clone())
}

fn smooth_noise(seed: u64) -> impl Fn(f64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms: Vec<(f64, f64, f64)> = (1..=4)
        .map(|k| (k as f64, rng.gen_range(-1.0..1.0) / k as f64, rng.gen_range(0.0..TAU)))
        .collect();
    let raw = move |th: f64| terms.iter().map(|(k, a, ph)| a * (k * th + ph).sin()).sum::<f64>();
    let peak = (0..2048)
        .map(|i| raw(TAU * i as f64 / 2048.0).abs())
        .fold(0.0, f64::max);
    move |th| if peak > 0.0 { raw(th) / peak } else { 0.0 }
}

/// Point and unit tangent at arclength `s` on the cubic Hermite curve through
/// the vertices with the estimated tangents.
pub fn hermite_point(curve: &DiscreteCurve, tf: &TangentField, c: usize, s: f64) -> (Vec<f64>, Vec<f64>) {
    let ring = curve.ring(c);
    let n = ring.len();
    let s = s.rem_euclid(ring.length());
    let i = (0..n).rposition(|k| ring.arclength_at(k) <= s).unwrap_or(0);
    let h = ring.segment_length(i);
    let u = ((s - ring.arclength_at(i)) / h).clamp(0.0, 1.0);
    let (p0, p1) = (ring.vertex(i), ring.vertex(i + 1));
    let (m0, m1) = (
        geom::scale(tf.at_vertex(c, i), h),
        geom::scale(tf.at_vertex(c, (i + 1) % n), h),
    );
    let (u2, u3) = (u * u, u * u * u);
    let p: Vec<f64> = (0..curve.dim())
        .map(|d| {
            (2.0 * u3 - 3.0 * u2 + 1.0) * p0[d]
                + (u3 - 2.0 * u2 + u) * m0[d]
                + (-2.0 * u3 + 3.0 * u2) * p1[d]
                + (u3 - u2) * m1[d]
        })
        .collect();
    let dp: Vec<f64> = (0..curve.dim())
        .map(|d| {
            (6.0 * u2 - 6.0 * u) * p0[d]
                + (3.0 * u2 - 4.0 * u + 1.0) * m0[d]
                + (-6.0 * u2 + 6.0 * u) * p1[d]
                + (3.0 * u2 - 2.0 * u) * m1[d]
        })
        .collect();
    let t = geom::normalized(&dp).unwrap_or_else(|| tf.at_vertex(c, i).to_vec());
    (p, t)
}

/// Evaluates the sequence and both tail verdicts. The band for term `j` is
/// `band_rel * value + 2 hausdorff(K_j, K)`.
pub fn run_experiment(
    base: &DiscreteCurve,
    spec: &PerturbationSpec,
) -> Result<SemicontinuityExperiment, SemicontinuityError> {
    spec.validate()?;
    let r0 = thickness(base)?;
    let t0 = r0.thickness.finite().expect("closed curves have finite thickness");
    let m0 = r0.mdc.finite();
    let mut terms = Vec::with_capacity(spec.amplitudes.len());
    for (k, &amp) in spec.amplitudes.iter().enumerate() {
        let kj = perturb(base, &spec.family, amp, t0)
            .map_err(|source| SemicontinuityError::Perturbation { index: k + 1, source })?;
        let r = thickness(&kj)?;
        terms.push(SequenceTerm {
            j: k + 1,
            amplitude: amp,
            thickness: r.thickness.finite().expect("finite"),
            mdc: r.mdc.finite(),
            hausdorff: hausdorff_distance(&kj, base),
        });
    }
    let n = terms.len();
    let tail_start = n - ((n as f64 * spec.tail_fraction).ceil() as usize).min(n);
    let tail = &terms[tail_start..];
    let mut upper = TailVerdict {
        pass: true,
        tail_extreme: f64::NEG_INFINITY,
        worst_margin: f64::INFINITY,
    };
    let mut lower = TailVerdict {
        pass: true,
        tail_extreme: f64::INFINITY,
        worst_margin: f64::INFINITY,
    };
    for term in tail {
        let margin = t0 + spec.band_rel * t0 + 2.0 * term.hausdorff - term.thickness;
        upper.tail_extreme = upper.tail_extreme.max(term.thickness);
        upper.worst_margin = upper.worst_margin.min(margin);
        if let Some(m0) = m0 {
            // an unbounded MDC never violates the lower bound
            if let Some(m) = term.mdc {
                let margin = m - (m0 - spec.band_rel * m0 - 2.0 * term.hausdorff);
                lower.tail_extreme = lower.tail_extreme.min(m);
                lower.worst_margin = lower.worst_margin.min(margin);
            }
        }
    }
    upper.pass = upper.worst_margin >= 0.0;
    lower.pass = lower.worst_margin >= 0.0;
    Ok(SemicontinuityExperiment {
        spec: spec.clone(),
        base_thickness: t0,
        base_mdc: m0,
        terms,
        tail_start,
        upper_thickness: upper,
        lower_mdc: lower,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn zero_perturbation_is_constant() {
        let c = fixtures::circle(300, 1.0);
        let spec = PerturbationSpec {
            amplitudes: vec![0.0; 8],
            ..PerturbationSpec::harmonic(PerturbationFamily::RadialBumps { frequency: 8 }, 0.0, 8)
        };
        let e = run_experiment(&c, &spec).unwrap();
        assert!(e.passed());
        for t in &e.terms {
            assert_eq!(t.thickness, e.base_thickness);
            assert_eq!(t.mdc, e.base_mdc);
        }
    }

    #[test]
    fn growing_schedule_rejected() {
        let c = fixtures::circle(100, 1.0);
        let mut spec = PerturbationSpec::harmonic(PerturbationFamily::RadialBumps { frequency: 8 }, 0.05, 4);
        spec.amplitudes.reverse();
        assert!(matches!(
            run_experiment(&c, &spec),
            Err(SemicontinuityError::ScheduleViolation { index: 2, .. })
        ));
    }

    #[test]
    fn radial_bumps_on_circle_pass() {
        let c = fixtures::circle(400, 1.0);
        let spec = PerturbationSpec::harmonic(PerturbationFamily::RadialBumps { frequency: 8 }, 0.05, 32);
        let e = run_experiment(&c, &spec).unwrap();
        assert!(e.passed(), "{:?} {:?}", e.upper_thickness, e.lower_mdc);
        // bumps raise the curvature, so every term is thinner than the circle
        assert!(e.terms.iter().all(|t| t.thickness < e.base_thickness));
    }

    #[test]
    fn all_families_pass_on_circle() {
        let c = fixtures::circle(400, 1.0);
        for family in [
            PerturbationFamily::TangentialNoise { seed: 11 },
            PerturbationFamily::Mixed { frequency: 8, seed: 11 },
        ] {
            let e = run_experiment(&c, &PerturbationSpec::harmonic(family, 0.05, 32)).unwrap();
            assert!(e.passed(), "{:?} {:?}", e.upper_thickness, e.lower_mdc);
        }
    }

    #[test]
    fn tangential_noise_keeps_the_trace() {
        let c = fixtures::circle(400, 1.0);
        let k = perturb(&c, &PerturbationFamily::TangentialNoise { seed: 3 }, 0.05, 1.0).unwrap();
        for p in k.ring(0).points() {
            assert!((geom::norm(&p) - 1.0).abs() < 1e-8);
        }
        assert!(geom::dist(k.ring(0).vertex(0), c.ring(0).vertex(0)) > 1e-3);
    }

    #[test]
    fn hermite_interpolates_vertices() {
        let e = fixtures::ellipse(2.0, 1.0, 200);
        let tf = estimate_tangents(&e);
        let r = e.ring(0);
        for i in [0usize, 17, 199] {
            let (p, _) = hermite_point(&e, &tf, 0, r.arclength_at(i));
            assert!(geom::dist(&p, r.vertex(i)) < 1e-12);
        }
    }
}
