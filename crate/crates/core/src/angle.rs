//! Angle helpers shared by the index engines.

use std::f64::consts::{PI, TAU};

/// Margin around a branch cut inside which an increment is considered ambiguous.
pub const BRANCH_CUT_MARGIN: f64 = 1e-9;

/// Maximum distance of a winding sum from the nearest integer.
pub const ROUNDING_TOLERANCE: f64 = 1e-6;

/// Representative of `x` in `(-π, π]`.
pub fn principal(x: f64) -> f64 {
    let mut r = x.rem_euclid(TAU);
    if r > PI {
        r -= TAU;
    }
    r
}

/// Representative of `x` in `[0, 2π)`.
pub fn wrap_positive(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    // rem_euclid can return TAU itself for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// True when `x` (already principal) sits within the margin of the ±π cut.
pub fn near_cut(x: f64) -> bool {
    PI - x.abs() < BRANCH_CUT_MARGIN
}

/// Rounds a winding sum expressed in turns; returns the integer and the residual.
pub fn round_turns(turns: f64) -> (i64, f64) {
    let n = turns.round();
    (n as i64, (turns - n).abs())
}
