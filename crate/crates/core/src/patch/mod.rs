//! Sampled graphs `f: R^k -> R^m` on uniform grids, with first-derivative
//! samples; second-derivative certificates, mollification and the curve
//! smoothing ladder built on them.

mod angular;
mod certificate;
mod eta;
mod ladder;
mod mollify;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::CurveError;

pub use angular::{angular_profile_surface, jacobian_derivative, Profile};
pub use certificate::{
    directional_second_difference, focal_certificate, focal_radius_bound, CertificateResult, Verdict, Witness,
};
pub use eta::{gauss_legendre, Eta, MollifierSpec};
pub use ladder::{d_c1, smoothing_ladder, LadderConfig, SmoothingResult, WindowStep, DEFAULT_MAX_HALVINGS};
pub use mollify::{mollify, smoothed_abs_patch, Mollified, MollifyReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PatchError {
    #[error("grid point {0:?} has no second-difference stencil in the grid")]
    BoundaryPoint(Vec<i64>),
    #[error("direction {0:?} is not a lattice direction of the grid")]
    NotLatticeDirection(Vec<f64>),
    #[error("grid does not contain the mollification support: {0}")]
    DomainTooSmall(String),
    #[error("malformed patch: {0}")]
    Malformed(String),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("window {window} is not a graph over its tangent line")]
    NotAGraph { window: usize },
    #[error(
        "smoothing ladder exhausted at window {window}: achieved d_C1 {achieved_d_c1:.3e}, sup curvature {achieved_sup_curvature:.6}"
    )]
    LadderExhausted {
        window: usize,
        achieved_d_c1: f64,
        achieved_sup_curvature: f64,
    },
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// `f` and `f'` sampled on a uniform grid over a box in R^k.
///
/// Nodes are stored in row-major order (last axis fastest). `values` holds
/// `m` numbers per node, `jacobian` an `m x k` row-major block per node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphPatch {
    pub k: usize,
    pub m: usize,
    pub origin: Vec<f64>,
    pub spacing: f64,
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
    pub jacobian: Vec<f64>,
    /// Bound on the operator norm of `f'`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derivative_bound_a: Option<f64>,
    /// Lipschitz constant of `f'`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz_b: Option<f64>,
}

impl GraphPatch {
    /// Sample `f` (returning value and row-major jacobian) at every node.
    pub fn sample<F>(
        k: usize,
        m: usize,
        origin: Vec<f64>,
        spacing: f64,
        shape: Vec<usize>,
        f: F,
    ) -> Result<GraphPatch, PatchError>
    where
        F: Fn(&[f64]) -> (Vec<f64>, Vec<f64>),
    {
        if k == 0
            || m == 0
            || origin.len() != k
            || shape.len() != k
            || !(spacing > 0.0)
            || shape.iter().any(|&s| s == 0)
        {
            return Err(PatchError::Malformed(format!(
                "k = {k}, m = {m}, origin {origin:?}, shape {shape:?}, spacing {spacing}"
            )));
        }
        let mut patch = GraphPatch {
            k,
            m,
            origin,
            spacing,
            shape,
            values: Vec::new(),
            jacobian: Vec::new(),
            derivative_bound_a: None,
            lipschitz_b: None,
        };
        let n = patch.node_count();
        patch.values.reserve(n * m);
        patch.jacobian.reserve(n * m * k);
        for idx in 0..n {
            let x = patch.point(idx);
            let (v, j) = f(&x);
            if v.len() != m || j.len() != m * k {
                return Err(PatchError::Malformed("sampler returned wrong sizes".into()));
            }
            patch.values.extend(v);
            patch.jacobian.extend(j);
        }
        Ok(patch)
    }

    /// Grid symmetric about the origin with `nodes` (odd) points per axis.
    pub fn centered<F>(k: usize, m: usize, half_width: f64, nodes: usize, f: F) -> Result<GraphPatch, PatchError>
    where
        F: Fn(&[f64]) -> (Vec<f64>, Vec<f64>),
    {
        if nodes < 3 || nodes % 2 == 0 {
            return Err(PatchError::Malformed(format!(
                "need an odd node count >= 3, got {nodes}"
            )));
        }
        let spacing = 2.0 * half_width / (nodes - 1) as f64;
        GraphPatch::sample(k, m, vec![-half_width; k], spacing, vec![nodes; k], f)
    }

    pub fn with_bounds(mut self, a: f64, b: f64) -> GraphPatch {
        self.derivative_bound_a = Some(a);
        self.lipschitz_b = Some(b);
        self
    }

    /// Check sizes and finiteness, e.g. after deserializing.
    pub fn validate(&self) -> Result<(), PatchError> {
        let n: usize = self.shape.iter().product();
        if self.origin.len() != self.k || self.shape.len() != self.k {
            return Err(PatchError::Malformed("origin/shape length differs from k".into()));
        }
        if self.values.len() != n * self.m || self.jacobian.len() != n * self.m * self.k {
            return Err(PatchError::Malformed(format!(
                "expected {} values and {} jacobian entries, got {} and {}",
                n * self.m,
                n * self.m * self.k,
                self.values.len(),
                self.jacobian.len()
            )));
        }
        if !(self.spacing > 0.0) || self.values.iter().chain(&self.jacobian).any(|x| !x.is_finite()) {
            return Err(PatchError::Malformed("non-finite sample or nonpositive spacing".into()));
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn multi_index(&self, idx: usize) -> Vec<i64> {
        let mut out = vec![0i64; self.k];
        let mut rest = idx;
        for d in (0..self.k).rev() {
            out[d] = (rest % self.shape[d]) as i64;
            rest /= self.shape[d];
        }
        out
    }

    pub fn index_of(&self, multi: &[i64]) -> Option<usize> {
        let mut idx = 0usize;
        for d in 0..self.k {
            if multi[d] < 0 || multi[d] as usize >= self.shape[d] {
                return None;
            }
            idx = idx * self.shape[d] + multi[d] as usize;
        }
        Some(idx)
    }

    /// Node `idx` shifted by an integer offset, if still in the grid.
    pub fn offset(&self, idx: usize, by: &[i64]) -> Option<usize> {
        let mut m = self.multi_index(idx);
        for d in 0..self.k {
            m[d] += by[d];
        }
        self.index_of(&m)
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        self.multi_index(idx)
            .iter()
            .zip(&self.origin)
            .map(|(&i, o)| o + i as f64 * self.spacing)
            .collect()
    }

    /// Node closest to `x`.
    pub fn nearest_node(&self, x: &[f64]) -> Option<usize> {
        let m: Vec<i64> = (0..self.k)
            .map(|d| ((x[d] - self.origin[d]) / self.spacing).round() as i64)
            .collect();
        self.index_of(&m)
    }

    pub fn value(&self, idx: usize) -> &[f64] {
        &self.values[idx * self.m..(idx + 1) * self.m]
    }

    /// `m x k` row-major jacobian block.
    pub fn jac(&self, idx: usize) -> &[f64] {
        let s = self.m * self.k;
        &self.jacobian[idx * s..(idx + 1) * s]
    }

    /// Largest operator norm of the sampled jacobians.
    pub fn measured_derivative_bound(&self) -> f64 {
        (0..self.node_count())
            .map(|i| operator_norm(self.jac(i), self.m, self.k))
            .fold(0.0, f64::max)
    }

    /// Largest `||f'(x) - f'(y)|| / |x - y|` over neighboring node pairs
    /// (all offsets in `{-1, 0, 1}^k`).
    pub fn measured_lipschitz(&self) -> f64 {
        lipschitz_over_neighbors(self, &self.jacobian)
    }

    /// Recorded bound if present, else measured.
    pub fn a(&self) -> f64 {
        self.derivative_bound_a
            .unwrap_or_else(|| self.measured_derivative_bound())
    }

    pub fn b(&self) -> f64 {
        self.lipschitz_b.unwrap_or_else(|| self.measured_lipschitz())
    }

    /// Largest violation of `|(f(x + h e) - f(x)) / h - f'(x) e| <= B h / 2`
    /// over nodes and axes, as a ratio to the right-hand side (<= 1 when the
    /// samples are consistent with `B`).
    pub fn consistency_ratio(&self) -> f64 {
        let b = self.b();
        let h = self.spacing;
        let mut worst: f64 = 0.0;
        for idx in 0..self.node_count() {
            for d in 0..self.k {
                let mut e = vec![0i64; self.k];
                e[d] = 1;
                let Some(next) = self.offset(idx, &e) else { continue };
                let j = self.jac(idx);
                let err = (0..self.m)
                    .map(|r| {
                        let fd = (self.value(next)[r] - self.value(idx)[r]) / h;
                        (fd - j[r * self.k + d]).powi(2)
                    })
                    .sum::<f64>()
                    .sqrt();
                worst = worst.max(err / (0.5 * b * h).max(f64::MIN_POSITIVE));
            }
        }
        worst
    }
}

/// Neighbor offsets in `{-1, 0, 1}^k` with the first nonzero entry positive.
pub(crate) fn half_neighborhood(k: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let total = 3usize.pow(k as u32);
    for code in 0..total {
        let mut c = code;
        let o: Vec<i64> = (0..k)
            .map(|_| {
                let v = (c % 3) as i64 - 1;
                c /= 3;
                v
            })
            .collect();
        if let Some(first) = o.iter().find(|&&v| v != 0) {
            if *first > 0 {
                out.push(o);
            }
        }
    }
    out
}

pub(crate) fn lipschitz_over_neighbors(patch: &GraphPatch, jac: &[f64]) -> f64 {
    let s = patch.m * patch.k;
    let offsets = half_neighborhood(patch.k);
    let mut worst: f64 = 0.0;
    let mut diff = vec![0.0; s];
    for idx in 0..patch.node_count() {
        for o in &offsets {
            let Some(j) = patch.offset(idx, o) else { continue };
            for t in 0..s {
                diff[t] = jac[j * s + t] - jac[idx * s + t];
            }
            let dist = patch.spacing * (o.iter().map(|v| (v * v) as f64).sum::<f64>()).sqrt();
            worst = worst.max(operator_norm(&diff, patch.m, patch.k) / dist);
        }
    }
    worst
}

/// Spectral norm of an `m x k` row-major matrix (power iteration on `J^T J`).
pub fn operator_norm(j: &[f64], m: usize, k: usize) -> f64 {
    if m == 1 || k == 1 {
        return j.iter().map(|x| x * x).sum::<f64>().sqrt();
    }
    let mut jtj = vec![0.0; k * k];
    for a in 0..k {
        for b in 0..k {
            jtj[a * k + b] = (0..m).map(|r| j[r * k + a] * j[r * k + b]).sum();
        }
    }
    let mut v = vec![1.0; k];
    for _ in 0..200 {
        let w: Vec<f64> = (0..k).map(|a| (0..k).map(|b| jtj[a * k + b] * v[b]).sum()).collect();
        let n = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n == 0.0 {
            return 0.0;
        }
        let next: Vec<f64> = w.iter().map(|x| x / n).collect();
        let converged = next.iter().zip(&v).all(|(a, b)| (a - b).abs() < 1e-15);
        v = next;
        if converged {
            break;
        }
    }
    // Rayleigh quotient on the converged vector
    let w: Vec<f64> = (0..k).map(|a| (0..k).map(|b| jtj[a * k + b] * v[b]).sum()).collect();
    let rq: f64 = w.iter().zip(&v).map(|(a, b)| a * b).sum();
    rq.max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic() -> GraphPatch {
        GraphPatch::centered(2, 1, 1.0, 41, |x| {
            (vec![0.5 * (x[0] * x[0] + 3.0 * x[1] * x[1])], vec![x[0], 3.0 * x[1]])
        })
        .unwrap()
    }

    #[test]
    fn indexing_round_trip() {
        let p = quadratic();
        for idx in [0, 17, 840, p.node_count() - 1] {
            assert_eq!(p.index_of(&p.multi_index(idx)), Some(idx));
        }
        let c = p.nearest_node(&[0.0, 0.0]).unwrap();
        assert_eq!(p.point(c), vec![0.0, 0.0]);
    }

    #[test]
    fn measured_constants() {
        let p = quadratic();
        assert!((p.measured_lipschitz() - 3.0).abs() < 1e-12);
        assert!((p.measured_derivative_bound() - 10f64.sqrt()).abs() < 1e-12);
        assert!(p.consistency_ratio() <= 1.0 + 1e-9);
    }

    #[test]
    fn operator_norm_of_rank_one() {
        // u v^T has norm |u||v|
        let j = [1.0 * 3.0, 1.0 * 4.0, 2.0 * 3.0, 2.0 * 4.0];
        assert!((operator_norm(&j, 2, 2) - 5f64.sqrt() * 5.0).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let p = quadratic().with_bounds(4.0, 3.0);
        let s = serde_json::to_string(&p).unwrap();
        let back: GraphPatch = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        back.validate().unwrap();
    }
}
