//! A-priori constants for counting isotopy classes of `k`-dimensional
//! submanifolds of thickness at least `ε` inside a ball of radius `r` in R^n.
//!
//! Everything is computed from logarithms; the `k >= 2` values overflow any
//! float long before they become interesting, so each constant carries its
//! natural value only when representable, plus `ln` and `ln |ln|`.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;
use std::f64::consts::{LN_2, PI};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("need n > k >= 1, got n = {n}, k = {k}")]
    InvalidDims { n: u32, k: u32 },
    #[error("need r >= epsilon > 0, got r = {r}, epsilon = {epsilon}")]
    InvalidRadius { r: f64, epsilon: f64 },
}

/// A positive number given by its logarithm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Magnitude {
    /// Natural value when it is a normal float.
    pub value: Option<f64>,
    /// `ln x`, when finite.
    pub ln: Option<f64>,
    /// `ln |ln x|`, always present unless `x == 1`.
    pub ln_abs_ln: Option<f64>,
}

impl Magnitude {
    pub fn from_ln(l: f64) -> Magnitude {
        let v = l.exp();
        Magnitude {
            value: (v.is_normal()).then_some(v),
            ln: l.is_finite().then_some(l),
            ln_abs_ln: (l != 0.0).then(|| l.abs().ln()),
        }
    }

    pub fn exact(v: f64) -> Magnitude {
        let l = v.ln();
        Magnitude {
            value: Some(v),
            ln: Some(l),
            ln_abs_ln: (l != 0.0).then(|| l.abs().ln()),
        }
    }

    /// `x` with `ln x = sign * exp(ln_abs_ln)`.
    fn from_ln_ln(sign: f64, ln_abs_ln: f64) -> Magnitude {
        let l = sign * ln_abs_ln.exp();
        let v = l.exp();
        Magnitude {
            value: (v.is_normal()).then_some(v),
            ln: l.is_finite().then_some(l),
            ln_abs_ln: Some(ln_abs_ln),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub n: u32,
    pub k: u32,
    pub r: f64,
    pub epsilon: f64,
    /// `r / ε`.
    pub big_r: f64,
    pub d0: Magnitude,
    pub v0: Magnitude,
    pub i0: Magnitude,
    pub rho: Magnitude,
    pub lambda0: Magnitude,
    /// The class count is at most `2^Λ₀`; this is `Λ₀` again.
    pub class_bound_exponent: Magnitude,
}

/// Volume of the unit `j`-sphere, as a logarithm.
pub fn ln_sphere_volume(j: u32) -> f64 {
    let h = (j as f64 + 1.0) / 2.0;
    LN_2 + h * PI.ln() - ln_gamma(h)
}

// ln(e^a + e^b)
fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Chain of constants: diameter bound `d₀ = (8R)^n / 2`, volume constant
/// `v₀`, injectivity lower bound `i₀`, isotopy radius `ρ` and
/// `Λ₀ = (16R / i₀)^n`, with `R = r / ε`.
pub fn class_count_bound(n: u32, k: u32, r: f64, epsilon: f64) -> Result<BoundsReport, BoundsError> {
    if k < 1 || n <= k {
        return Err(BoundsError::InvalidDims { n, k });
    }
    if !(epsilon > 0.0 && r.is_finite() && r >= epsilon) {
        return Err(BoundsError::InvalidRadius { r, epsilon });
    }
    let big_r = r / epsilon;
    let nf = n as f64;
    let ln_8r = (8.0 * big_r).ln();
    let ln_16r = (16.0 * big_r).ln();

    let d0 = Magnitude::from_ln(-LN_2 + nf * ln_8r);
    let ln_v0 = (nf - 1.0).ln() + ln_sphere_volume(n) - nf.ln() - ln_sphere_volume(n - k - 1) + (1.0 - nf);
    let v0 = Magnitude::from_ln(ln_v0);

    let (i0, rho, lambda0) = if k == 1 {
        let ratio = 16.0 * big_r / PI;
        let direct = ratio.powi(n as i32);
        let lambda0 = if direct.is_normal() {
            Magnitude::exact(direct)
        } else {
            Magnitude::from_ln(nf * ratio.ln())
        };
        (Magnitude::exact(PI), Magnitude::exact(0.125), lambda0)
    } else {
        // ln i0 = -(n/2)(8R)^n, kept as ln|ln i0|
        let lnln_i0 = (nf / 2.0).ln() + nf * ln_8r;
        let i0 = Magnitude::from_ln_ln(-1.0, lnln_i0);
        // ln rho = ln i0 - ln 4 = -(e^{lnln_i0} + ln 4)
        let rho = Magnitude::from_ln_ln(-1.0, log_add(lnln_i0, 4f64.ln().ln()));
        // ln Λ0 = n (ln 16R + e^{lnln_i0}), with ln 16R > 0 since R >= 1
        let lambda0 = Magnitude::from_ln_ln(1.0, nf.ln() + log_add(ln_16r.ln(), lnln_i0));
        (i0, rho, lambda0)
    };
    Ok(BoundsReport {
        n,
        k,
        r,
        epsilon,
        big_r,
        d0,
        v0,
        i0,
        rho,
        class_bound_exponent: lambda0,
        lambda0,
    })
}

impl BoundsReport {
    /// Rows for a two-column text table.
    pub fn table_rows(&self) -> Vec<(String, String)> {
        let show = |m: &Magnitude| match (m.value, m.ln, m.ln_abs_ln) {
            (Some(v), _, _) => format!("{v:.12e}"),
            (None, Some(l), _) => format!("exp({l:.6e})"),
            (None, None, Some(ll)) => format!("exp(±exp({ll:.6}))"),
            _ => "1".to_string(),
        };
        vec![
            ("n".into(), self.n.to_string()),
            ("k".into(), self.k.to_string()),
            ("R = r/epsilon".into(), format!("{}", self.big_r)),
            ("d0".into(), show(&self.d0)),
            ("v0".into(), show(&self.v0)),
            ("i0".into(), show(&self.i0)),
            ("rho".into(), show(&self.rho)),
            ("Lambda0".into(), show(&self.lambda0)),
            ("classes <= 2^".into(), show(&self.class_bound_exponent)),
        ]
    }
}
