use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{GraphPatch, PatchError};

/// Angular profile `h(θ)` of period π with `|h| <= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Profile {
    Constant {
        value: f64,
    },
    /// `sin(n θ)` with `n` even.
    Spike {
        n: u32,
    },
}

impl Profile {
    pub fn validate(&self) -> Result<(), PatchError> {
        match *self {
            Profile::Constant { value } if value.abs() <= 1.0 => Ok(()),
            Profile::Spike { n } if n > 0 && n % 2 == 0 => Ok(()),
            p => Err(PatchError::InvalidParameters(format!(
                "{p:?} is not π-periodic with |h| <= 1"
            ))),
        }
    }

    pub fn value(&self, th: f64) -> f64 {
        match *self {
            Profile::Constant { value } => value,
            Profile::Spike { n } => (n as f64 * th).sin(),
        }
    }

    pub fn derivative(&self, th: f64) -> f64 {
        match *self {
            Profile::Constant { .. } => 0.0,
            Profile::Spike { n } => n as f64 * (n as f64 * th).cos(),
        }
    }
}

/// `f(r, θ) = r² h(θ) / 2` on `[-half, half]²` with `nodes` (odd) per axis,
/// so the origin is a node. Directional second derivatives of `f` at the
/// origin are `h(θ)`, bounded by 1, while the mixed partial of `f'` there is
/// `h'(0) / 2`.
pub fn angular_profile_surface(profile: Profile, half: f64, nodes: usize) -> Result<GraphPatch, PatchError> {
    profile.validate()?;
    GraphPatch::centered(2, 1, half, nodes, |x| {
        let (u, v) = (x[0], x[1]);
        let r2 = u * u + v * v;
        if r2 == 0.0 {
            return (vec![0.0], vec![0.0, 0.0]);
        }
        let th = v.atan2(u).rem_euclid(PI);
        let (h, dh) = (profile.value(th), profile.derivative(th));
        // ∂r/∂x = x/r, ∂θ/∂x = -y/r²
        let fx = u * h - 0.5 * v * dh;
        let fy = v * h + 0.5 * u * dh;
        (vec![0.5 * r2 * h], vec![fx, fy])
    })
}

/// `∂/∂x_axis` of jacobian column `column` at node `idx`, by central
/// differences of the sampled jacobian.
pub fn jacobian_derivative(patch: &GraphPatch, idx: usize, axis: usize, column: usize) -> Result<f64, PatchError> {
    let mut o = vec![0i64; patch.k];
    o[axis] = 1;
    let back: Vec<i64> = o.iter().map(|x| -x).collect();
    let (Some(a), Some(b)) = (patch.offset(idx, &o), patch.offset(idx, &back)) else {
        return Err(PatchError::BoundaryPoint(patch.multi_index(idx)));
    };
    Ok((patch.jac(a)[column] - patch.jac(b)[column]) / (2.0 * patch.spacing))
}
