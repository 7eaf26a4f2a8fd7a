//! Every numeric default in one table. The CLI materializes these into each
//! run manifest.

use serde::{Deserialize, Serialize};

use crate::curve::SELF_INTERSECTION_TOL;
use crate::isotopy::{DEFAULT_FRAMES, RHO_FRACTION};
use crate::kernel::{default_direction_count, DEFAULT_PERP_TOL};
use crate::patch::DEFAULT_MAX_HALVINGS;
use crate::tighten::TightenConfig;

/// Oracle bracket `[t * lo, t * hi]` around the formula value `t`.
pub const ORACLE_BRACKET: [f64; 2] = [0.25, 4.0];
/// Oracle bisection tolerance relative to the formula value.
pub const ORACLE_REL_TOL: f64 = 1e-6;
pub const SEMICONTINUITY_FREQUENCY: u32 = 8;
pub const SEMICONTINUITY_COEFFICIENT: f64 = 0.05;
pub const SEMICONTINUITY_TERMS: usize = 32;
pub const SEMICONTINUITY_TAIL: f64 = 0.5;
pub const SEMICONTINUITY_BAND_REL: f64 = 1e-6;
/// Thread count used when neither `--threads` nor the environment sets one;
/// zero means one per core.
pub const THREADS: usize = 0;
pub const THREADS_ENV: &str = "THICKNESS_THREADS";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefaultEntry {
    pub name: String,
    pub value: serde_json::Value,
    pub description: String,
}

fn entry<V: Serialize>(name: &str, value: V, description: &str) -> DefaultEntry {
    DefaultEntry {
        name: name.into(),
        value: serde_json::to_value(value).expect("defaults serialize"),
        description: description.into(),
    }
}

pub fn table() -> Vec<DefaultEntry> {
    let t = TightenConfig::default();
    vec![
        entry(
            "curve.self_intersection_tol",
            SELF_INTERSECTION_TOL,
            "relative segment distance treated as contact",
        ),
        entry(
            "kernel.perp_tol",
            DEFAULT_PERP_TOL,
            "perpendicularity tolerance for critical pairs (rad)",
        ),
        entry(
            "kernel.adjacency_window",
            "max(4 h_max, 0.1 F_g)",
            "same-component arc separation excluded from the pair search",
        ),
        entry(
            "oracle.bracket",
            ORACLE_BRACKET,
            "radius bracket as multiples of the formula value",
        ),
        entry(
            "oracle.rel_tol",
            ORACLE_REL_TOL,
            "bisection tolerance relative to the formula value",
        ),
        entry(
            "oracle.directions",
            [
                default_direction_count(2),
                default_direction_count(3),
                default_direction_count(4),
            ],
            "normal directions per vertex in R^2, R^3, R^n (n >= 4)",
        ),
        entry(
            "ladder.max_halvings",
            DEFAULT_MAX_HALVINGS,
            "mollifier radius halvings per window",
        ),
        entry(
            "isotopy.rho_fraction",
            RHO_FRACTION,
            "projection radius as a fraction of thickness",
        ),
        entry(
            "isotopy.frames",
            DEFAULT_FRAMES,
            "homotopy frames checked for embeddedness",
        ),
        entry(
            "semicontinuity.frequency",
            SEMICONTINUITY_FREQUENCY,
            "radial bump frequency",
        ),
        entry(
            "semicontinuity.coefficient",
            SEMICONTINUITY_COEFFICIENT,
            "amplitude of term j is coefficient / j times thickness",
        ),
        entry("semicontinuity.terms", SEMICONTINUITY_TERMS, "sequence length"),
        entry(
            "semicontinuity.tail_fraction",
            SEMICONTINUITY_TAIL,
            "fraction of terms forming the tail",
        ),
        entry(
            "semicontinuity.band_rel",
            SEMICONTINUITY_BAND_REL,
            "relative tolerance band",
        ),
        entry("tighten.seed", t.seed, "RNG seed"),
        entry("tighten.steps", t.steps, "iterations"),
        entry("tighten.step_scale", t.step_scale, "initial move size"),
        entry("tighten.cooling", t.cooling, "step factor after a slow batch"),
        entry("tighten.batch", t.batch, "steps per cooling batch"),
        entry(
            "tighten.temperature",
            t.temperature,
            "Metropolis temperature (0 = descent)",
        ),
        entry("tighten.bump_every", t.bump_every, "one move in this many is a bump"),
        entry(
            "tighten.full_recompute_every",
            t.full_recompute_every,
            "accepted moves between full pair searches",
        ),
        entry(
            "threads",
            THREADS,
            "worker threads, 0 = one per core; overridden by THICKNESS_THREADS",
        ),
    ]
}

/// Plain-text rendering of [`table`].
pub fn render() -> String {
    let rows = table();
    let w = rows.iter().map(|e| e.name.len()).max().unwrap_or(0);
    rows.iter()
        .map(|e| format!("{:w$}  {:<24}  {}\n", e.name, e.value.to_string(), e.description))
        .collect()
}
