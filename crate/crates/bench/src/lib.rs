//! Shared fixtures for the benchmarks.

use twistact::calibration::{MeasurementSeries, SeriesMeta};
use twistact::kinematics::{forward_constant, KinematicParams};
use twistact::units::turns_to_rad;

/// The 6-string reference build.
pub fn reference_params() -> KinematicParams {
    KinematicParams::new(22.85, 5.0, 0.43).unwrap()
}

/// A noiseless constant-model series with `samples` points over
/// `[0, max_turns]`.
pub fn synthetic_series(params: &KinematicParams, max_turns: f64, samples: usize) -> MeasurementSeries {
    let step = max_turns / (samples - 1) as f64;
    let points: Vec<(f64, f64)> = (0..samples)
        .map(|i| {
            let t = i as f64 * step;
            (t, forward_constant(params, turns_to_rad(t)).unwrap())
        })
        .collect();
    MeasurementSeries::new(points, SeriesMeta::default()).unwrap()
}
