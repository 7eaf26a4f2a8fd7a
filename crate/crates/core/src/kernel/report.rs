use serde::{Deserialize, Serialize};

use super::critical::{mdc, DoubleCriticalPair};
use super::curvature::max_curvature_location;
use super::oracle::{cut_value_oracle, rolling_ball_oracle, NormalSampleSpec};
use super::KernelError;
use crate::curve::{estimate_tangents, ArcCoordinate, DiscreteCurve};
use crate::length::Length;

/// Which term of `min(F_g, MDC/2)` attains the thickness, with its witness.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum AttainingFeature {
    Focal { location: ArcCoordinate, curvature: f64 },
    DoublyCritical { pair: DoubleCriticalPair },
}

impl AttainingFeature {
    pub fn is_focal(&self) -> bool {
        matches!(self, AttainingFeature::Focal { .. })
    }

    pub fn tag(&self) -> &'static str {
        match self {
            AttainingFeature::Focal { .. } => "Focal",
            AttainingFeature::DoublyCritical { .. } => "DoublyCritical",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleChoice {
    None,
    Ball,
    Cut,
    Both,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThicknessReport {
    pub focal_distance: Length,
    pub mdc: Length,
    pub thickness: Length,
    pub attaining_feature: AttainingFeature,
    pub oracle_rolling_ball: Option<Length>,
    pub oracle_cut_value: Option<Length>,
    /// Largest `|oracle - thickness|` over the oracles that ran; zero if none.
    pub max_discrepancy: Length,
    pub sample_spec: Option<NormalSampleSpec>,
}

/// `min(F_g, MDC/2)` with the attaining witness. Ties go to the
/// doubly-critical term.
pub fn thickness(curve: &DiscreteCurve) -> Result<ThicknessReport, KernelError> {
    let (loc, kappa) = max_curvature_location(curve).expect("curves have vertices");
    let focal = Length::reciprocal_of(kappa);
    let tangents = estimate_tangents(curve);
    let (mdc_len, pair) = mdc(curve, &tangents)?;
    let half = mdc_len.half();
    let (thickness, attaining_feature) = match pair {
        Some(pair) if half <= focal => (half, AttainingFeature::DoublyCritical { pair }),
        _ => (
            focal,
            AttainingFeature::Focal {
                location: loc,
                curvature: kappa,
            },
        ),
    };
    Ok(ThicknessReport {
        focal_distance: focal,
        mdc: mdc_len,
        thickness,
        attaining_feature,
        oracle_rolling_ball: None,
        oracle_cut_value: None,
        max_discrepancy: Length::Finite(0.0),
        sample_spec: None,
    })
}

/// [`thickness`] plus the requested oracles. Without an explicit spec the
/// bracket is seeded from the formula value.
pub fn thickness_with_oracles(
    curve: &DiscreteCurve,
    choice: OracleChoice,
    spec: Option<NormalSampleSpec>,
) -> Result<ThicknessReport, KernelError> {
    let mut report = thickness(curve)?;
    if choice == OracleChoice::None {
        return Ok(report);
    }
    let estimate = report.thickness.finite().unwrap_or_else(|| curve.bbox_diagonal());
    let spec = spec.unwrap_or_else(|| NormalSampleSpec::around(curve.dim(), estimate));
    if matches!(choice, OracleChoice::Ball | OracleChoice::Both) {
        report.oracle_rolling_ball = Some(Length::Finite(rolling_ball_oracle(curve, &spec)?));
    }
    if matches!(choice, OracleChoice::Cut | OracleChoice::Both) {
        report.oracle_cut_value = Some(Length::Finite(cut_value_oracle(curve, &spec)?));
    }
    let mut worst: f64 = 0.0;
    for v in [report.oracle_rolling_ball, report.oracle_cut_value]
        .into_iter()
        .flatten()
    {
        if let (Some(v), Some(t)) = (v.finite(), report.thickness.finite()) {
            worst = worst.max((v - t).abs());
        }
    }
    report.max_discrepancy = Length::Finite(worst);
    report.sample_spec = Some(spec);
    Ok(report)
}
