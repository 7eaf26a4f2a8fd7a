//! Thickness of a discrete curve: the focal term, the double-critical term,
//! their minimum, and two brute-force tangent-ball oracles to check it against.

mod critical;
mod curvature;
mod oracle;
mod report;

use thiserror::Error;

pub use critical::{
    default_adjacency_window, find_double_critical_pairs, find_double_critical_pairs_touching, mdc, merge_pairs,
    DoubleCriticalPair, SearchParams, DEFAULT_PERP_TOL,
};
pub use curvature::{focal_distance, max_curvature_location, sup_curvature};
pub use oracle::{
    cut_value_oracle, default_direction_count, normal_directions, rolling_ball_oracle, BallProbe, NormalSampleSpec,
};
pub use report::{thickness, thickness_with_oracles, AttainingFeature, OracleChoice, ThicknessReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("tangent field missing or does not match the curve")]
    NoTangents,
    #[error("bisection bracket [{r_lo}, {r_hi}] does not contain the transition: {detail}")]
    BracketMiss { r_lo: f64, r_hi: f64, detail: String },
    #[error("invalid normal sampling spec: {0}")]
    InvalidSpec(String),
}
