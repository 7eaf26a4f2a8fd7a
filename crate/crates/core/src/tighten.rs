//! Ropelength descent within an isotopy class.
//!
//! Random moves (single vertices in their normal plane, and every
//! `bump_every`-th move a smooth bump over an arc) are proposed around either
//! a random vertex or the feature attaining the thickness. A move is kept when
//! the renormalized curve is embedded, its ropelength `length / thickness`
//! drops (or the Metropolis test passes at the current temperature) and it is
//! isotopic to its predecessor through the normal projection.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::{build_curve, estimate_tangents, vertex_curvatures, DiscreteCurve};
use crate::geom;
use crate::isotopy::{isotopy_check, suggested_rho};
use crate::kernel::{
    find_double_critical_pairs, find_double_critical_pairs_touching, merge_pairs, DoubleCriticalPair, KernelError,
    SearchParams,
};
use crate::length::Length;

#[derive(Debug, Error)]
pub enum TightenError {
    #[error("start curve has no positive thickness")]
    ZeroThicknessStart,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LengthConstraint {
    RenormalizeEachStep,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TightenConfig {
    pub seed: u64,
    pub steps: usize,
    /// Initial move size, as a fraction of the largest curvature change a
    /// move may cause relative to `1 / thickness`.
    pub step_scale: f64,
    /// Factor applied to the step size (and temperature) after a batch with
    /// few acceptances.
    pub cooling: f64,
    pub batch: usize,
    /// Metropolis temperature on the ropelength; zero gives pure descent.
    pub temperature: f64,
    /// One move in this many is an arc bump.
    pub bump_every: usize,
    /// Accepted moves between full recomputations of the critical pairs.
    pub full_recompute_every: usize,
    pub length_constraint: LengthConstraint,
}

impl Default for TightenConfig {
    fn default() -> TightenConfig {
        TightenConfig {
            seed: 7,
            steps: 20_000,
            step_scale: 0.05,
            cooling: 0.8,
            batch: 250,
            temperature: 0.0,
            bump_every: 16,
            full_recompute_every: 256,
            length_constraint: LengthConstraint::RenormalizeEachStep,
        }
    }
}

impl TightenConfig {
    pub fn validate(&self) -> Result<(), TightenError> {
        let bad = |m: &str| Err(TightenError::InvalidConfig(m.into()));
        if self.steps < 1 {
            return bad("steps must be at least 1");
        }
        if !(self.cooling > 0.0 && self.cooling < 1.0) {
            return bad("cooling must lie in (0, 1)");
        }
        if !(self.step_scale > 0.0 && self.step_scale.is_finite()) {
            return bad("step_scale must be positive");
        }
        if !(self.temperature >= 0.0) || self.batch == 0 || self.bump_every == 0 || self.full_recompute_every == 0 {
            return bad("temperature must be >= 0 and batch, bump_every, full_recompute_every >= 1");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MoveKind {
    Vertex,
    Bump,
}

/// One line of the trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub kind: MoveKind,
    pub accepted: bool,
    /// Ropelength of the current curve after this step.
    pub objective: f64,
    pub thickness: f64,
    pub attaining_feature: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TightenTrace {
    pub config: TightenConfig,
    pub initial_objective: f64,
    /// Ropelength of the final curve with all critical pairs recomputed.
    pub final_objective: f64,
    pub accepted: usize,
    pub records: Vec<StepRecord>,
    #[serde(skip)]
    pub final_curve: Option<DiscreteCurve>,
}

impl TightenTrace {
    pub fn final_curve(&self) -> &DiscreteCurve {
        self.final_curve.as_ref().expect("trace carries its final curve")
    }

    /// One JSON object per step.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Accepted move, passed to the observer of [`tighten_with`].
pub struct Accepted<'a> {
    pub step: usize,
    pub before: &'a DiscreteCurve,
    pub after: &'a DiscreteCurve,
    pub rho: f64,
}

// Thickness of a curve with its critical-pair cache.
#[derive(Clone)]
struct State {
    curve: DiscreteCurve,
    kappas: Vec<Vec<f64>>,
    pairs: Vec<DoubleCriticalPair>,
    thickness: f64,
    focal: bool,
    hot: (usize, usize),
    objective: f64,
}

fn evaluate(curve: DiscreteCurve, pairs: Vec<DoubleCriticalPair>, length: f64) -> State {
    let kappas = vertex_curvatures(&curve);
    let mut hot = (0, 0);
    let mut kmax = 0.0;
    for (c, ks) in kappas.iter().enumerate() {
        for (i, &k) in ks.iter().enumerate() {
            if k > kmax {
                kmax = k;
                hot = (c, i);
            }
        }
    }
    let focal = Length::reciprocal_of(kmax);
    let best = pairs
        .iter()
        .min_by(|a, b| a.chord_length.partial_cmp(&b.chord_length).unwrap());
    let (thickness, is_focal) = match best {
        Some(p) if Length::Finite(p.chord_length / 2.0) <= focal => {
            hot = (p.coord_p.component, p.coord_p.segment);
            (p.chord_length / 2.0, false)
        }
        _ => (focal.or(f64::INFINITY), true),
    };
    State {
        curve,
        kappas,
        pairs,
        thickness,
        focal: is_focal,
        hot,
        objective: length / thickness,
    }
}

fn full_pairs(curve: &DiscreteCurve) -> Result<Vec<DoubleCriticalPair>, KernelError> {
    let p = SearchParams::default_for(curve);
    find_double_critical_pairs(curve, &estimate_tangents(curve), p.perp_tol, p.adjacency_window)
}

/// Rescale about the centroid to total length `target`.
fn renormalize(curve: &DiscreteCurve, target: f64) -> DiscreteCurve {
    let lambda = target / curve.total_length();
    let c = curve.centroid();
    curve
        .map_points(|p| p.iter().zip(&c).map(|(x, o)| o + lambda * (x - o)).collect())
        .expect("scaling keeps a curve embedded")
}

pub fn tighten(start: &DiscreteCurve, config: &TightenConfig) -> Result<TightenTrace, TightenError> {
    tighten_with(start, config, |_| {})
}

/// [`tighten`], calling `observer` on every accepted move.
pub fn tighten_with<F: FnMut(&Accepted)>(
    start: &DiscreteCurve,
    config: &TightenConfig,
    mut observer: F,
) -> Result<TightenTrace, TightenError> {
    config.validate()?;
    let length = start.total_length();
    let mut state = evaluate(start.clone(), full_pairs(start)?, length);
    if !(state.thickness > 0.0 && state.thickness.is_finite()) {
        return Err(TightenError::ZeroThicknessStart);
    }
    let initial_objective = state.objective;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut step_scale = config.step_scale;
    let mut temperature = config.temperature;
    let mut records = Vec::with_capacity(config.steps);
    let mut accepted = 0usize;
    let mut batch_accepted = 0usize;
    for step in 0..config.steps {
        let kind = if step % config.bump_every == config.bump_every - 1 {
            MoveKind::Bump
        } else {
            MoveKind::Vertex
        };
        let proposal = propose(&state, kind, step_scale, &mut rng);
        let mut ok = false;
        if let Some((cand, moved)) = proposal {
            let cand = renormalize(&cand, length);
            let next = if (accepted + 1) % config.full_recompute_every == 0 {
                full_pairs(&cand).map(|p| evaluate(cand, p, length))
            } else {
                incremental(&state, cand, &moved, length)
            }?;
            let delta = next.objective - state.objective;
            let u: f64 = rng.gen();
            let pass = delta < 0.0 || (temperature > 0.0 && u < (-delta / (temperature * state.objective)).exp());
            if pass && next.thickness > 0.0 {
                let rho = suggested_rho(Length::Finite(state.thickness)).expect("positive thickness");
                let iso = isotopy_check(&state.curve, &next.curve, rho)
                    .map(|c| c.is_isotopic())
                    .unwrap_or(false);
                if iso {
                    observer(&Accepted {
                        step,
                        before: &state.curve,
                        after: &next.curve,
                        rho,
                    });
                    state = next;
                    ok = true;
                    accepted += 1;
                    batch_accepted += 1;
                }
            }
        }
        records.push(StepRecord {
            step,
            kind,
            accepted: ok,
            objective: state.objective,
            thickness: state.thickness,
            attaining_feature: if state.focal { "Focal" } else { "DoublyCritical" }.to_string(),
        });
        if (step + 1) % config.batch == 0 {
            if (batch_accepted as f64) < 0.1 * config.batch as f64 {
                step_scale *= config.cooling;
            } else if (batch_accepted as f64) > 0.4 * config.batch as f64 {
                step_scale = (step_scale / config.cooling).min(config.step_scale);
            }
            temperature *= config.cooling;
            batch_accepted = 0;
        }
    }
    let final_state = evaluate(state.curve.clone(), full_pairs(&state.curve)?, length);
    Ok(TightenTrace {
        config: config.clone(),
        initial_objective,
        final_objective: final_state.objective,
        accepted,
        records,
        final_curve: Some(state.curve),
    })
}

/// Thickness of `cand` reusing cached pairs away from the moved vertices.
fn incremental(prev: &State, cand: DiscreteCurve, moved: &[(usize, usize)], length: f64) -> Result<State, KernelError> {
    let offsets: Vec<usize> = cand
        .rings()
        .iter()
        .scan(0, |acc, r| {
            let o = *acc;
            *acc += r.len();
            Some(o)
        })
        .collect();
    let total: usize = cand.rings().iter().map(|r| r.len()).sum();
    let mut touched = vec![false; total];
    // segments whose endpoints or endpoint tangents changed, plus a margin
    for &(c, v) in moved {
        let n = cand.ring(c).len();
        for d in -3i64..=2 {
            let s = (v as i64 + d).rem_euclid(n as i64) as usize;
            touched[offsets[c] + s] = true;
        }
    }
    let tf = estimate_tangents(&cand);
    let params = SearchParams::default_for(&cand);
    let mut pairs = find_double_critical_pairs_touching(&cand, &tf, &params, &touched)?;
    for p in &prev.pairs {
        let (a, b) = (&p.coord_p, &p.coord_q);
        if touched[offsets[a.component] + a.segment] || touched[offsets[b.component] + b.segment] {
            continue;
        }
        let ra = cand.ring(a.component);
        let rb = cand.ring(b.component);
        let pa = ra.point_on_segment(a.segment, a.t);
        let pb = rb.point_on_segment(b.segment, b.t);
        let mut q = p.clone();
        q.coord_p.s = ra.arclength_at(a.segment) + a.t * ra.segment_length(a.segment);
        q.coord_q.s = rb.arclength_at(b.segment) + b.t * rb.segment_length(b.segment);
        q.chord_length = geom::dist(&pa, &pb);
        if a.component == b.component && ra.arc_separation(q.coord_p.s, q.coord_q.s) <= params.adjacency_window {
            continue;
        }
        pairs.push(q);
    }
    Ok(evaluate(cand.clone(), merge_pairs(&cand, pairs), length))
}

fn kappas(state: &State, c: usize) -> &[f64] {
    &state.kappas[c]
}

/// Position of vertex `i` on the bisector of its neighbours' chord whose
/// circumcircle curvature is the mean of the neighbouring curvatures.
fn equalizing_position(ring: &crate::curve::Ring, i: usize, kappa: &[f64]) -> Option<Vec<f64>> {
    let n = ring.len();
    let prev = ring.vertex((i + n - 1) % n);
    let next = ring.vertex(i + 1);
    let mid = geom::lerp(prev, next, 0.5);
    let half = 0.5 * geom::dist(prev, next);
    let target_k = 0.5 * (kappa[(i + n - 1) % n] + kappa[(i + 1) % n]);
    let off = geom::sub(ring.vertex(i), &mid);
    let chord = geom::normalized(&geom::sub(next, prev))?;
    let off = geom::axpy(&off, -geom::dot(&off, &chord), &chord);
    let up = geom::normalized(&off)?;
    let disc = 1.0 - target_k * target_k * half * half;
    if !(target_k > 0.0) || disc < 0.0 {
        return None;
    }
    let y = half * half * target_k / (1.0 + disc.sqrt());
    Some(geom::axpy(&mid, y, &up))
}

fn random_normal(t: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
    let basis = geom::normal_basis(t);
    let coeffs: Vec<f64> = basis.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut v = vec![0.0; t.len()];
    for (b, c) in basis.iter().zip(&coeffs) {
        v = geom::axpy(&v, *c, b);
    }
    geom::normalized(&v).unwrap_or_else(|| basis[0].clone())
}

/// Proposed curve and the moved vertices, or `None` if it fails validation.
fn propose(
    state: &State,
    kind: MoveKind,
    step_scale: f64,
    rng: &mut ChaCha8Rng,
) -> Option<(DiscreteCurve, Vec<(usize, usize)>)> {
    let curve = &state.curve;
    let (c, center) = if rng.gen_bool(0.5) {
        let (c, i) = state.hot;
        let n = curve.ring(c).len() as i64;
        (c, (i as i64 + rng.gen_range(-2..=2)).rem_euclid(n) as usize)
    } else {
        let c = rng.gen_range(0..curve.num_components());
        (c, rng.gen_range(0..curve.ring(c).len()))
    };
    let ring = curve.ring(c);
    let n = ring.len();
    let kref = 1.0 / state.thickness;
    let tf = estimate_tangents(curve);
    // signed amplitude, log-uniform over three decades
    let u: f64 = if rng.gen_bool(0.5) { 1.0 } else { -1.0 } * 10f64.powf(-3.0 * rng.gen::<f64>());
    let mut comps = curve.components();
    let mut moved = Vec::new();
    match kind {
        MoveKind::Vertex => {
            let h = 0.5 * (ring.segment_length(center) + ring.segment_length((center + n - 1) % n));
            let a = step_scale * u * h * h * kref;
            let dir = random_normal(tf.at_vertex(c, center), rng);
            let pull = rng.gen_range(0.0..1.0);
            let p = ring.vertex(center);
            let target = equalizing_position(ring, center, kappas(state, c));
            let mut q = geom::axpy(p, a, &dir);
            if let Some(target) = target {
                q = geom::axpy(&q, pull, &geom::sub(&target, p));
            }
            comps[c][center] = q;
            moved.push((c, center));
        }
        MoveKind::Bump if rng.gen_bool(0.5) => {
            // smoothed curvature-flow step with the mean curvature removed
            let kap = kappas(state, c);
            let mean = kap.iter().sum::<f64>() / n as f64;
            let vel: Vec<Vec<f64>> = (0..n)
                .map(|i| {
                    let p = ring.vertex(i);
                    let mid = geom::lerp(ring.vertex_offset(i, -1), ring.vertex(i + 1), 0.5);
                    let t = tf.at_vertex(c, i);
                    let inward = geom::sub(&mid, p);
                    let inward = geom::axpy(&inward, -geom::dot(&inward, t), t);
                    match geom::normalized(&inward) {
                        Some(dir) => geom::scale(&dir, kap[i] - mean),
                        None => vec![0.0; curve.dim()],
                    }
                })
                .collect();
            let width = 2f64.powf(rng.gen_range(0.0..(n as f64 / 8.0).log2().max(1.0)));
            let reach = (3.0 * width).ceil() as i64;
            let weights: Vec<f64> = (-reach..=reach)
                .map(|d| (-0.5 * (d as f64 / width).powi(2)).exp())
                .collect();
            let total: f64 = weights.iter().sum();
            let smooth: Vec<Vec<f64>> = (0..n)
                .map(|i| {
                    let mut v = vec![0.0; curve.dim()];
                    for (d, w) in (-reach..=reach).zip(&weights) {
                        let j = (i as i64 + d).rem_euclid(n as i64) as usize;
                        v = geom::axpy(&v, w / total, &vel[j]);
                    }
                    v
                })
                .collect();
            let peak = smooth.iter().map(|v| geom::norm(v)).fold(0.0, f64::max);
            if !(peak > 0.0) {
                return None;
            }
            let span = width.max(1.0) * ring.mean_segment_length();
            let a = step_scale * u.abs() * span * span * kref / peak;
            for i in 0..n {
                comps[c][i] = geom::axpy(ring.vertex(i), a, &smooth[i]);
                moved.push((c, i));
            }
        }
        MoveKind::Bump if rng.gen_bool(1.0 / 3.0) => {
            // pull an arc toward equal neighbouring curvatures
            let w = rng.gen_range(3..=(n / 2).max(4)) as i64;
            let pull = rng.gen_range(0.0..1.0);
            for d in -w..=w {
                let i = (center as i64 + d).rem_euclid(n as i64) as usize;
                if let Some(target) = equalizing_position(ring, i, kappas(state, c)) {
                    comps[c][i] = geom::lerp(ring.vertex(i), &target, pull);
                    moved.push((c, i));
                }
            }
            if moved.is_empty() {
                return None;
            }
        }
        MoveKind::Bump if rng.gen_bool(0.5) => {
            // low-frequency normal mode over the whole component
            let k = rng.gen_range(2..=8) as f64;
            let l = ring.length();
            let phase = -k * std::f64::consts::TAU * ring.arclength_at(center) / l;
            let a = step_scale * u * state.thickness / (k * k - 1.0);
            let e = random_normal(tf.at_vertex(c, center), rng);
            for i in 0..n {
                let t = tf.at_vertex(c, i);
                let normal = if curve.dim() == 2 {
                    vec![-t[1], t[0]]
                } else {
                    geom::axpy(&e, -geom::dot(&e, t), t)
                };
                let th = std::f64::consts::TAU * ring.arclength_at(i) / l;
                comps[c][i] = geom::axpy(ring.vertex(i), a * (k * th + phase).cos(), &normal);
                moved.push((c, i));
            }
        }
        MoveKind::Bump => {
            let w = rng.gen_range(3..=(n / 4).max(4));
            let arc = w as f64 * ring.mean_segment_length();
            let a = step_scale * u * 2.0 * arc * arc * kref / (std::f64::consts::PI * std::f64::consts::PI);
            let dir = random_normal(tf.at_vertex(c, center), rng);
            for d in -(w as i64)..=(w as i64) {
                let i = (center as i64 + d).rem_euclid(n as i64) as usize;
                let profile = (std::f64::consts::FRAC_PI_2 * d as f64 / w as f64).cos().powi(2);
                let t = tf.at_vertex(c, i);
                // the bump direction, made normal at each vertex
                let normal = geom::axpy(&dir, -geom::dot(&dir, t), t);
                comps[c][i] = geom::axpy(ring.vertex(i), a * profile, &normal);
                moved.push((c, i));
            }
        }
    }
    let cand = build_curve(comps, curve.dim()).ok()?;
    Some((cand, moved))
}
