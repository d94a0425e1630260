//! Modeling toolkit for two-phase twisted string actuators.
//!
//! A twisted string actuator converts motor shaft rotation into linear
//! contraction by twisting a bundle of strings into a helix. This crate
//! models such systems over their full stroke, including the overtwist
//! phase in which the already-formed bundle twists around itself:
//!
//! - [`geometry`] predicts the string bundle diameter from the string
//!   count and single-string diameter, under a pair-core packing model
//!   and a single-ring reference model.
//! - [`kinematics`] maps shaft rotation to linear displacement (and back)
//!   for systems with a separator, under constant and variable bundle
//!   radius assumptions.
//! - [`calibration`] fits model parameters to measured displacement
//!   series and compares models by RMSE.
//! - [`lifecycle`] analyzes string endurance records: per-record
//!   consistency, load-life power-law fitting and current-trace failure
//!   detection.
//! - [`dataio`] parses the toolkit's text formats and emits deterministic
//!   CSV reports and SVG plots.
//!
//! All lengths are millimetres, angles are radians internally (turns at
//! the interfaces, see [`units`]), forces are newtons.

pub mod calibration;
pub mod dataio;
pub mod error;
pub mod geometry;
pub mod kinematics;
pub mod lifecycle;
pub mod units;

pub use calibration::{ComparisonReport, FitResult, MeasurementSeries, ModelKind, SeriesMeta};
pub use dataio::{ColumnFormat, PlotSeries, ReportColumn, ReportTable, StringSystemConfig};
pub use error::{Error, Result};
pub use geometry::{BundlePacking, DiameterModel, DiameterPrediction, Point};
pub use kinematics::{ContractionSummary, KinematicParams, KinematicState, VariableSolution};
pub use lifecycle::{ConsistencyReport, CycleLog, CycleSample, LifeCycleRecord, LoadLifeFit};
