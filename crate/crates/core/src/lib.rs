//! Thickness (normal injectivity radius) of closed curves in R^n.
//!
//! The thickness of an embedded closed curve equals `min(F_g, MDC/2)`: the
//! focal distance `1 / sup κ` against half the shortest chord that meets the
//! curve perpendicularly at both ends. This crate evaluates that formula on
//! polylines, checks it against two brute-force tangent-ball oracles, and
//! builds on it: mollification of graph patches, a smoothing ladder for
//! curves, a nearest-point isotopy check, a-priori class-count bounds, and a
//! length-constrained ropelength minimizer.
//!
//! ```
//! use curve_thickness::{fixtures, kernel};
//!
//! let report = kernel::thickness(&fixtures::ellipse(2.0, 1.0, 2000)).unwrap();
//! assert!(report.attaining_feature.is_focal());
//! assert!((report.thickness.finite().unwrap() - 0.5).abs() < 1e-3);
//! ```

pub mod bounds;
pub mod bvh;
pub mod cli;
pub mod curve;
pub mod defaults;
pub mod fixtures;
pub mod geom;
pub mod io;
pub mod isotopy;
pub mod kernel;
pub mod length;
pub mod patch;
pub mod semicontinuity;
pub mod tighten;

pub use curve::{build_curve, estimate_tangents, point_at, ArcCoordinate, CurveError, DiscreteCurve, TangentField};
pub use length::Length;
