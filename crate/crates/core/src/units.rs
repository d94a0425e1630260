//! Unit conversions.
//!
//! The displacement model works in radians because the twisted arc length
//! is `alpha * r`; every external interface (CLI flags, CSV files, fit
//! inputs) uses output-shaft turns instead. This module is the single
//! conversion point.

use std::f64::consts::TAU;

/// Radians per full output-shaft turn.
pub const RAD_PER_TURN: f64 = TAU;

/// Newtons per kilogram-force.
pub const NEWTONS_PER_KGF: f64 = 9.80665;

pub fn turns_to_rad(turns: f64) -> f64 {
    turns * RAD_PER_TURN
}

pub fn rad_to_turns(rad: f64) -> f64 {
    rad / RAD_PER_TURN
}

pub fn kgf_to_newtons(kgf: f64) -> f64 {
    kgf * NEWTONS_PER_KGF
}

pub fn newtons_to_kgf(newtons: f64) -> f64 {
    newtons / NEWTONS_PER_KGF
}
