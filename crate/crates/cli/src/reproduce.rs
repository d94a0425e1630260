//! Reference table regeneration.
//!
//! Each builder recomputes a published reference table from the bundled
//! data and emits the computed values next to the reference ones with
//! their deltas, so known model deviations and record inconsistencies
//! surface as data rather than failures.

use std::path::Path;

use twistact::calibration::{rmse, ModelKind};
use twistact::dataio::{
    parse_config, parse_lifecycle_csv, parse_measurement_csv, write_report, ColumnFormat,
    ReportColumn, ReportTable, StringSystemConfig,
};
use twistact::geometry::{bundle_diameter_packed, bundle_diameter_ring, pack_bundle};
use twistact::kinematics::{contraction_percent, overtwist_onset_turns};
use twistact::lifecycle::validate_record;

use crate::CliError;

/// Measured single-string diameter shared by every reference build, mm.
const STRING_DIAMETER_MM: f64 = 0.24;

const BUILD_CONFIGS: [&str; 4] = ["n2.cfg", "n4.cfg", "n6.cfg", "n8.cfg"];
const SERIES_FILES: [&str; 4] = [
    "fig3_n2_approx.csv",
    "fig3_n4_approx.csv",
    "fig3_n6_approx.csv",
    "fig3_n8_approx.csv",
];

/// Reference contraction results: string count, twisting zone (mm),
/// contraction (mm), total length (mm), contraction percent.
const REF_CONTRACTION: [(f64, f64, f64, f64, f64); 4] = [
    (2.0, 23.20, 58.40, 81.60, 72.0),
    (4.0, 23.42, 92.02, 115.44, 80.0),
    (6.0, 22.85, 95.67, 118.52, 81.0),
    (8.0, 23.30, 84.09, 107.39, 78.0),
];

/// Reference overtwist onsets: string count, contraction fraction at
/// onset, observed onset turns.
const REF_ONSET: [(f64, f64, f64); 4] = [
    (2.0, 0.19, 20.0),
    (4.0, 0.09, 11.0),
    (6.0, 0.10, 10.0),
    (8.0, 0.10, 8.0),
];

/// Reference bundle diameters: string count, measured diameter (mm),
/// reported pair-core model error, reported ring model error (mm).
const REF_DIAMETER: [(f64, f64, f64, f64); 8] = [
    (1.0, 0.24, 0.00, 0.00),
    (2.0, 0.47, 0.01, 0.01),
    (3.0, 0.61, -0.09, -0.09),
    (4.0, 0.70, -0.04, -0.12),
    (5.0, 0.84, -0.12, -0.19),
    (6.0, 0.86, 0.01, -0.14),
    (7.0, 0.93, -0.06, -0.14),
    (8.0, 0.99, -0.12, -0.13),
];

/// Reference RMSE scores per build: string count, constant radius model,
/// variable radius model (mm). The computed columns come from the
/// hand-digitized series, so only the ordering is expected to match.
const REF_RMSE: [(f64, f64, f64); 4] = [
    (2.0, 2.73, 79.29),
    (4.0, 5.86, 155.88),
    (6.0, 4.42, 219.63),
    (8.0, 3.23, 142.78),
];

pub fn table(number: u8, data_dir: &Path) -> Result<String, CliError> {
    match number {
        1 => dimensions_table(data_dir),
        2 => contraction_table(),
        3 => onset_table(data_dir),
        5 => diameter_table(),
        6 => rmse_table(data_dir),
        7 => lifecycle_table(data_dir),
        other => Err(CliError::Usage(format!(
            "no reproducible table {other}; pick one of 1, 2, 3, 5, 6, 7"
        ))),
    }
}

fn load_configs(data_dir: &Path) -> Result<Vec<StringSystemConfig>, CliError> {
    BUILD_CONFIGS
        .iter()
        .map(|name| {
            let path = data_dir.join(name);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
            Ok(parse_config(&text)?)
        })
        .collect()
}

/// System dimensions with the packed-model diameter next to the measured one.
fn dimensions_table(data_dir: &Path) -> Result<String, CliError> {
    let mut table = ReportTable::new(vec![
        ReportColumn::new("n_strings", ColumnFormat::Count),
        ReportColumn::new("twist_zone_mm", ColumnFormat::LengthMm),
        ReportColumn::new("separator_mm", ColumnFormat::LengthMm),
        ReportColumn::new("measured_diameter_mm", ColumnFormat::LengthMm),
        ReportColumn::new("packed_model_mm", ColumnFormat::LengthMm),
        ReportColumn::new("delta_mm", ColumnFormat::LengthMm),
    ]);
    for cfg in load_configs(data_dir)? {
        let measured = cfg
            .measured_bundle_diameter_mm
            .ok_or_else(|| CliError::Data(format!("config `{}` lacks a measured diameter", cfg.label)))?;
        let packed = bundle_diameter_packed(&pack_bundle(cfg.n_strings, cfg.string_diameter_mm)?)?;
        table
            .push_row(vec![
                cfg.n_strings as f64,
                cfg.twist_zone_mm,
                cfg.separator_mm,
                measured,
                packed,
                packed - measured,
            ])
            .expect("rows are rectangular");
    }
    Ok(write_report(&table))
}

/// Achieved contraction bookkeeping.
fn contraction_table() -> Result<String, CliError> {
    let mut table = ReportTable::new(vec![
        ReportColumn::new("n_strings", ColumnFormat::Count),
        ReportColumn::new("twist_zone_mm", ColumnFormat::LengthMm),
        ReportColumn::new("contraction_mm", ColumnFormat::LengthMm),
        ReportColumn::new("total_computed_mm", ColumnFormat::LengthMm),
        ReportColumn::new("total_reference_mm", ColumnFormat::LengthMm),
        ReportColumn::new("total_delta_mm", ColumnFormat::LengthMm),
        ReportColumn::new("percent_computed", ColumnFormat::Percent),
        ReportColumn::new("percent_reference", ColumnFormat::Percent),
    ]);
    for (n, zone, contraction, total_ref, percent_ref) in REF_CONTRACTION {
        let summary = contraction_percent(contraction, zone)?;
        table
            .push_row(vec![
                n,
                zone,
                contraction,
                summary.total_length_mm,
                total_ref,
                summary.total_length_mm - total_ref,
                summary.percent,
                percent_ref,
            ])
            .expect("rows are rectangular");
    }
    Ok(write_report(&table))
}

/// Overtwist onset turns from the inverse model against the observed ones.
fn onset_table(data_dir: &Path) -> Result<String, CliError> {
    let configs = load_configs(data_dir)?;
    let mut table = ReportTable::new(vec![
        ReportColumn::new("n_strings", ColumnFormat::Count),
        ReportColumn::new("total_length_mm", ColumnFormat::LengthMm),
        ReportColumn::new("onset_fraction", ColumnFormat::LengthMm),
        ReportColumn::new("computed_turns", ColumnFormat::Turns),
        ReportColumn::new("reference_turns", ColumnFormat::Count),
        ReportColumn::new("delta_turns", ColumnFormat::Turns),
    ]);
    for (cfg, ((n, fraction, observed), (_, _, _, total, _))) in
        configs.iter().zip(REF_ONSET.iter().zip(REF_CONTRACTION.iter()))
    {
        let params = cfg.kinematic_params()?;
        let turns = overtwist_onset_turns(&params, *total, *fraction)?;
        table
            .push_row(vec![*n, *total, *fraction, turns, *observed, turns - observed])
            .expect("rows are rectangular");
    }
    Ok(write_report(&table))
}

/// Bundle diameters under both models against the measured values.
fn diameter_table() -> Result<String, CliError> {
    let mut table = ReportTable::new(vec![
        ReportColumn::new("n_strings", ColumnFormat::Count),
        ReportColumn::new("measured_mm", ColumnFormat::LengthMm),
        ReportColumn::new("packed_mm", ColumnFormat::LengthMm),
        ReportColumn::new("packed_error_mm", ColumnFormat::LengthMm),
        ReportColumn::new("packed_error_reference_mm", ColumnFormat::LengthMm),
        ReportColumn::new("ring_mm", ColumnFormat::LengthMm),
        ReportColumn::new("ring_error_mm", ColumnFormat::LengthMm),
        ReportColumn::new("ring_error_reference_mm", ColumnFormat::LengthMm),
    ]);
    for (n, measured, packed_err_ref, ring_err_ref) in REF_DIAMETER {
        let count = n as usize;
        let packed = bundle_diameter_packed(&pack_bundle(count, STRING_DIAMETER_MM)?)?;
        let ring = bundle_diameter_ring(count, STRING_DIAMETER_MM)?;
        table
            .push_row(vec![
                n,
                measured,
                packed,
                packed - measured,
                packed_err_ref,
                ring,
                ring - measured,
                ring_err_ref,
            ])
            .expect("rows are rectangular");
    }
    Ok(write_report(&table))
}

/// Constant vs variable radius RMSE over the bundled digitized series.
fn rmse_table(data_dir: &Path) -> Result<String, CliError> {
    let configs = load_configs(data_dir)?;
    let mut table = ReportTable::new(vec![
        ReportColumn::new("n_strings", ColumnFormat::Count),
        ReportColumn::new("rmse_constant_computed_mm", ColumnFormat::Rmse),
        ReportColumn::new("rmse_constant_reference_mm", ColumnFormat::Rmse),
        ReportColumn::new("rmse_variable_computed_mm", ColumnFormat::Rmse),
        ReportColumn::new("rmse_variable_reference_mm", ColumnFormat::Rmse),
    ]);
    for (cfg, (series_file, (n, ref_constant, ref_variable))) in configs
        .iter()
        .zip(SERIES_FILES.iter().zip(REF_RMSE.iter()))
    {
        let path = data_dir.join(series_file);
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
        let series = parse_measurement_csv(&text)?;
        let params = cfg.kinematic_params()?;
        let constant = rmse(&params, ModelKind::ConstantRadius, &series)?;
        let variable = rmse(&params, ModelKind::VariableRadius, &series)?;
        table
            .push_row(vec![*n, constant, *ref_constant, variable, *ref_variable])
            .expect("rows are rectangular");
    }
    Ok(write_report(&table))
}

/// Endurance records with their arithmetic cross-check.
fn lifecycle_table(data_dir: &Path) -> Result<String, CliError> {
    let path = data_dir.join("table7_lifecycle.csv");
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    let records = parse_lifecycle_csv(&text)?;
    let mut table = ReportTable::new(vec![
        ReportColumn::new("load_kgf", ColumnFormat::Count),
        ReportColumn::new("turns_per_cycle", ColumnFormat::Count),
        ReportColumn::new("cycles_endured", ColumnFormat::Count),
        ReportColumn::new("contraction_per_cycle_mm", ColumnFormat::LengthMm),
        ReportColumn::new("computed_total_mm", ColumnFormat::LengthMm),
        ReportColumn::new("recorded_total_mm", ColumnFormat::Count),
        ReportColumn::new("delta_mm", ColumnFormat::LengthMm),
        ReportColumn::new("consistent", ColumnFormat::Count),
    ]);
    for record in &records {
        let check = validate_record(record);
        table
            .push_row(vec![
                record.load_kgf(),
                record.turns_per_cycle,
                record.cycles_endured as f64,
                record.contraction_per_cycle_mm,
                check.computed_total_mm,
                check.recorded_total_mm,
                check.deviation_mm,
                if check.consistent { 1.0 } else { 0.0 },
            ])
            .expect("rows are rectangular");
    }
    Ok(write_report(&table))
}
