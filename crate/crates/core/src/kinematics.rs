//! Displacement kinematics for twisted string systems with a separator.
//!
//! The geometry is a right triangle: the twisting zone of length `L` is one
//! leg, and the twisted string wraps a chord of length `S/2 + alpha * r`
//! around it (`S` the separator hole distance, `alpha` the shaft rotation,
//! `r` the bundle radius). The linear displacement is
//!
//! ```text
//! x = sqrt(L^2 + (S/2 + alpha * r)^2) - L
//! ```
//!
//! With `S > 0` the formula has an inherent offset at `alpha = 0`; callers
//! comparing against measurements that define zero displacement at zero
//! turns can subtract [`zero_offset`].
//!
//! The constant radius model holds over the full stroke including the
//! overtwist phase. The variable radius model replaces `r` with
//! `r0 * sqrt((L + x) / L)` and is only valid in the first twist phase;
//! [`forward_variable`] solves the resulting self-consistent equation.

use crate::error::{Error, Result};
use crate::units::rad_to_turns;

/// Fixed physical parameters of one actuator build.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinematicParams {
    /// Twisting zone length `L`, mm.
    pub twist_zone_mm: f64,
    /// Distance between the separator holes `S`, mm.
    pub separator_mm: f64,
    /// Bundle radius `r` (constant-model value `r0`), mm.
    pub radius_mm: f64,
}

impl KinematicParams {
    pub fn new(twist_zone_mm: f64, separator_mm: f64, radius_mm: f64) -> Result<Self> {
        if !(twist_zone_mm > 0.0) {
            return Err(Error::invalid(format!(
                "twist zone length must be positive, got {twist_zone_mm}"
            )));
        }
        if !(separator_mm >= 0.0) {
            return Err(Error::invalid(format!(
                "separator distance must be non-negative, got {separator_mm}"
            )));
        }
        if !(radius_mm > 0.0) {
            return Err(Error::invalid(format!(
                "bundle radius must be positive, got {radius_mm}"
            )));
        }
        Ok(KinematicParams {
            twist_zone_mm,
            separator_mm,
            radius_mm,
        })
    }
}

/// Full kinematic state at one shaft angle.
#[derive(Debug, Clone, Copy)]
pub struct KinematicState {
    /// Shaft rotation, rad.
    pub shaft_angle_rad: f64,
    /// Linear displacement `x`, mm.
    pub displacement_mm: f64,
    /// String length inside the twisting zone, `X = L + x`, mm.
    pub strings_in_zone_mm: f64,
    /// Helix angle `atan((S/2 + alpha*r) / L)`, rad, in `[0, pi/2)`.
    pub helix_angle_rad: f64,
    /// Radius used for this state, mm.
    pub effective_radius_mm: f64,
}

/// Contraction bookkeeping for one build: the maximum displacement against
/// the effective string length it came from.
#[derive(Debug, Clone, Copy)]
pub struct ContractionSummary {
    pub contraction_mm: f64,
    /// Twisting zone length plus the contraction, mm.
    pub total_length_mm: f64,
    /// `100 * contraction / total_length`, always below 100.
    pub percent: f64,
}

/// Outcome of the variable-radius solve.
#[derive(Debug, Clone, Copy)]
pub struct VariableSolution {
    pub displacement_mm: f64,
    /// False when the fixed-point iteration hit its guards; the
    /// displacement then holds the last iterate.
    pub converged: bool,
}

/// Absolute tolerance of the variable-radius fixed point, mm.
pub const VARIABLE_TOL_MM: f64 = 1e-6;
/// Iteration budget of the variable-radius fixed point.
pub const VARIABLE_MAX_ITERATIONS: usize = 200;

/// Core displacement expression, evaluated as
/// `u^2 / (sqrt(L^2 + u^2) + L)` with `u = S/2 + alpha*r`, which is
/// algebraically `sqrt(L^2 + u^2) - L` without the cancellation that form
/// suffers when `u` is small against `L`.
fn displacement(twist_zone: f64, separator: f64, radius: f64, alpha: f64) -> f64 {
    let u = separator / 2.0 + alpha * radius;
    u * u / ((twist_zone * twist_zone + u * u).sqrt() + twist_zone)
}

/// Linear displacement under the constant radius model (mm).
pub fn forward_constant(params: &KinematicParams, shaft_angle_rad: f64) -> Result<f64> {
    if !(shaft_angle_rad >= 0.0) {
        return Err(Error::invalid(format!(
            "shaft angle must be non-negative, got {shaft_angle_rad} rad; untwisting below neutral is outside the model"
        )));
    }
    Ok(displacement(
        params.twist_zone_mm,
        params.separator_mm,
        params.radius_mm,
        shaft_angle_rad,
    ))
}

/// Displacement at zero turns, `sqrt(L^2 + (S/2)^2) - L` (mm). Positive
/// whenever `S > 0`.
pub fn zero_offset(params: &KinematicParams) -> f64 {
    displacement(
        params.twist_zone_mm,
        params.separator_mm,
        params.radius_mm,
        0.0,
    )
}

/// Shaft angle (rad) that produces `displacement_mm` under the constant
/// radius model: `alpha = (sqrt((x+L)^2 - L^2) - S/2) / r`, evaluated as
/// `sqrt(x * (x + 2L))` to stay accurate near the offset point.
pub fn inverse_constant(params: &KinematicParams, displacement_mm: f64) -> Result<f64> {
    let offset = zero_offset(params);
    if displacement_mm < offset - 1e-9 {
        return Err(Error::OutOfRange(format!(
            "displacement {displacement_mm} mm lies below the zero-turn offset {offset} mm"
        )));
    }
    let x = displacement_mm.max(offset);
    let chord = (x * (x + 2.0 * params.twist_zone_mm)).sqrt();
    Ok(((chord - params.separator_mm / 2.0) / params.radius_mm).max(0.0))
}

fn variable_radius(params: &KinematicParams, displacement_mm: f64) -> f64 {
    params.radius_mm * ((params.twist_zone_mm + displacement_mm) / params.twist_zone_mm).sqrt()
}

/// Displacement under the variable radius model.
///
/// With `reference_x_mm` given (typically a measured displacement), the
/// model is evaluated once with `r = r0 * sqrt((L + reference_x) / L)`.
/// Without it, the self-consistent displacement is found by fixed-point
/// iteration starting from the constant-model value, tolerance
/// [`VARIABLE_TOL_MM`], at most [`VARIABLE_MAX_ITERATIONS`] steps. Iterates
/// beyond `100 * L` or an exhausted budget end the solve with
/// `converged = false` and the last iterate.
pub fn forward_variable(
    params: &KinematicParams,
    shaft_angle_rad: f64,
    reference_x_mm: Option<f64>,
) -> Result<VariableSolution> {
    if !(shaft_angle_rad >= 0.0) {
        return Err(Error::invalid(format!(
            "shaft angle must be non-negative, got {shaft_angle_rad} rad"
        )));
    }
    let l = params.twist_zone_mm;
    let s = params.separator_mm;
    if let Some(reference) = reference_x_mm {
        if !(reference >= 0.0) {
            return Err(Error::invalid(format!(
                "reference displacement must be non-negative, got {reference}"
            )));
        }
        let r = variable_radius(params, reference);
        return Ok(VariableSolution {
            displacement_mm: displacement(l, s, r, shaft_angle_rad),
            converged: true,
        });
    }
    let mut x = displacement(l, s, params.radius_mm, shaft_angle_rad);
    for _ in 0..VARIABLE_MAX_ITERATIONS {
        let next = displacement(l, s, variable_radius(params, x), shaft_angle_rad);
        if (next - x).abs() <= VARIABLE_TOL_MM {
            return Ok(VariableSolution {
                displacement_mm: next,
                converged: true,
            });
        }
        x = next;
        if x > 100.0 * l {
            return Ok(VariableSolution {
                displacement_mm: x,
                converged: false,
            });
        }
    }
    Ok(VariableSolution {
        displacement_mm: x,
        converged: false,
    })
}

/// Builds the contraction summary for a maximum displacement reached on a
/// build with twisting zone `twist_zone_mm`.
pub fn contraction_percent(contraction_mm: f64, twist_zone_mm: f64) -> Result<ContractionSummary> {
    if !(contraction_mm >= 0.0) {
        return Err(Error::invalid(format!(
            "contraction must be non-negative, got {contraction_mm}"
        )));
    }
    if !(twist_zone_mm > 0.0) {
        return Err(Error::invalid(format!(
            "twist zone length must be positive, got {twist_zone_mm}"
        )));
    }
    let total_length_mm = twist_zone_mm + contraction_mm;
    Ok(ContractionSummary {
        contraction_mm,
        total_length_mm,
        percent: 100.0 * contraction_mm / total_length_mm,
    })
}

/// Turn count at which the overtwist phase is expected to begin: the
/// constant-model inverse of `onset_fraction * total_length_mm`.
pub fn overtwist_onset_turns(
    params: &KinematicParams,
    total_length_mm: f64,
    onset_fraction: f64,
) -> Result<f64> {
    if !(onset_fraction > 0.0 && onset_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "onset fraction must lie in (0, 1), got {onset_fraction}"
        )));
    }
    if !(total_length_mm > params.twist_zone_mm) {
        return Err(Error::invalid(format!(
            "total length {total_length_mm} mm must exceed the twisting zone {} mm",
            params.twist_zone_mm
        )));
    }
    let onset_displacement = onset_fraction * total_length_mm;
    Ok(rad_to_turns(inverse_constant(params, onset_displacement)?))
}

/// Full kinematic state under the constant radius model.
pub fn helix_state(params: &KinematicParams, shaft_angle_rad: f64) -> Result<KinematicState> {
    let x = forward_constant(params, shaft_angle_rad)?;
    let chord = params.separator_mm / 2.0 + shaft_angle_rad * params.radius_mm;
    Ok(KinematicState {
        shaft_angle_rad,
        displacement_mm: x,
        strings_in_zone_mm: params.twist_zone_mm + x,
        helix_angle_rad: (chord / params.twist_zone_mm).atan(),
        effective_radius_mm: params.radius_mm,
    })
}
