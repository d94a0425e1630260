//! Command line front end: thin adapters over the library, plus the
//! `reproduce` subcommand that regenerates the reference tables from the
//! bundled data.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or parse error, 3 model
//! divergence. All angle flags take output-shaft turns.

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use twistact::calibration::{compare_models, fit_bundle_radius};
use twistact::dataio::{
    parse_config, parse_lifecycle_csv, parse_measurement_csv, write_report, ColumnFormat,
    ReportColumn, ReportTable,
};
use twistact::geometry::{bundle_diameter_packed, bundle_diameter_ring, pack_bundle};
use twistact::kinematics::{
    forward_constant, forward_variable, inverse_constant, overtwist_onset_turns, zero_offset,
};
use twistact::lifecycle::{fit_load_life, predict_endurance, validate_record};
use twistact::units::{kgf_to_newtons, rad_to_turns, turns_to_rad, NEWTONS_PER_KGF};

mod reproduce;

#[derive(Parser)]
#[command(
    name = "twistact",
    version,
    about = "Two-phase twisted string actuator modeling toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DisplacementModel {
    Constant,
    Variable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BundleModel {
    Packed,
    Ring,
}

#[derive(Subcommand)]
enum Command {
    /// Predict the linear displacement at a turn count
    Predict {
        /// Build config file
        #[arg(long)]
        config: PathBuf,
        /// Output-shaft turns
        #[arg(long, allow_negative_numbers = true)]
        turns: f64,
        /// Radius model to evaluate
        #[arg(long, value_enum, default_value_t = DisplacementModel::Constant)]
        model: DisplacementModel,
        /// Report x(turns) - x(0) instead of the raw model value
        #[arg(long)]
        zero_offset: bool,
    },
    /// Turn count that produces a displacement
    Inverse {
        #[arg(long)]
        config: PathBuf,
        /// Linear displacement, mm
        #[arg(long, allow_negative_numbers = true)]
        displacement: f64,
    },
    /// Bundle diameter prediction, with packing coordinates
    Bundle {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = BundleModel::Packed)]
        model: BundleModel,
    },
    /// Fit the bundle radius to a measurement series
    Calibrate {
        #[arg(long)]
        config: PathBuf,
        /// Measurement CSV (turns,displacement_mm)
        #[arg(long)]
        data: PathBuf,
    },
    /// Score the constant against the variable radius model on a series
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        data: PathBuf,
    },
    /// Turn count at which overtwist is expected to begin
    Onset {
        #[arg(long)]
        config: PathBuf,
        /// Effective string length (twisting zone + contraction), mm
        #[arg(long, allow_negative_numbers = true)]
        total_length: f64,
        /// Contraction fraction at onset, in (0, 1)
        #[arg(long, allow_negative_numbers = true)]
        fraction: f64,
    },
    /// Endurance record analytics
    Lifecycle {
        /// Endurance records CSV
        #[arg(long)]
        records: PathBuf,
        /// Fit the load-life power law over the records
        #[arg(long)]
        fit: bool,
        /// Predict endurable cycles: load (kgf) and per-cycle contraction (mm)
        #[arg(long, num_args = 2, value_names = ["LOAD_KGF", "PER_CYCLE_MM"], allow_negative_numbers = true)]
        predict: Option<Vec<f64>>,
    },
    /// Regenerate a reference table from the bundled data
    Reproduce {
        /// Table number: 1, 2, 3, 5, 6 or 7
        #[arg(long)]
        table: u8,
        /// Directory holding the bundled data files
        #[arg(long, default_value = "data")]
        data_dir: PathBuf,
    },
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(String),
    Divergence(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Divergence(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Divergence(m) => m,
        }
    }
}

impl From<twistact::Error> for CliError {
    fn from(e: twistact::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    ExitCode::SUCCESS
                }
                _ => {
                    eprint!("{e}");
                    ExitCode::from(1)
                }
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))
}

fn load_config(path: &Path) -> Result<twistact::StringSystemConfig, CliError> {
    Ok(parse_config(&read_file(path)?)?)
}

fn load_series(path: &Path) -> Result<twistact::MeasurementSeries, CliError> {
    let mut series = parse_measurement_csv(&read_file(path)?)?;
    series.meta.source = path.display().to_string();
    Ok(series)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Predict {
            config,
            turns,
            model,
            zero_offset: zeroed,
        } => {
            if !(turns >= 0.0) {
                return Err(CliError::Usage(format!(
                    "--turns must be non-negative, got {turns}"
                )));
            }
            let params = load_config(&config)?.kinematic_params()?;
            let alpha = turns_to_rad(turns);
            let mut x = match model {
                DisplacementModel::Constant => forward_constant(&params, alpha)?,
                DisplacementModel::Variable => {
                    let solution = forward_variable(&params, alpha, None)?;
                    if !solution.converged {
                        return Err(CliError::Divergence(format!(
                            "variable radius model did not converge at {turns} turns \
                             (last iterate {:.2} mm)",
                            solution.displacement_mm
                        )));
                    }
                    solution.displacement_mm
                }
            };
            if zeroed {
                x -= zero_offset(&params);
            }
            println!("{x:.2}");
        }
        Command::Inverse {
            config,
            displacement,
        } => {
            if !(displacement >= 0.0) {
                return Err(CliError::Usage(format!(
                    "--displacement must be non-negative, got {displacement}"
                )));
            }
            let params = load_config(&config)?.kinematic_params()?;
            let alpha = inverse_constant(&params, displacement)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            println!("{:.2}", rad_to_turns(alpha));
        }
        Command::Bundle { config, model } => {
            let cfg = load_config(&config)?;
            match model {
                BundleModel::Packed => {
                    let packing = pack_bundle(cfg.n_strings, cfg.string_diameter_mm)?;
                    println!("model = packed");
                    println!("n_strings = {}", cfg.n_strings);
                    println!("diameter_mm = {:.2}", bundle_diameter_packed(&packing)?);
                    println!("circle,x_mm,y_mm");
                    for (i, c) in packing.centers.iter().enumerate() {
                        // negated zeros from antipodal placement print as 0
                        println!("{},{:.4},{:.4}", i + 1, c.x + 0.0, c.y + 0.0);
                    }
                }
                BundleModel::Ring => {
                    println!("model = ring");
                    println!("n_strings = {}", cfg.n_strings);
                    println!(
                        "diameter_mm = {:.2}",
                        bundle_diameter_ring(cfg.n_strings, cfg.string_diameter_mm)?
                    );
                }
            }
        }
        Command::Calibrate { config, data } => {
            let cfg = load_config(&config)?;
            let series = load_series(&data)?;
            let fit = fit_bundle_radius(&series, cfg.twist_zone_mm, cfg.separator_mm)?;
            println!("radius_mm = {:.4}", fit.radius_mm);
            println!("rmse_mm = {:.2}", fit.rmse_mm);
            println!("iterations = {}", fit.iterations);
            println!("converged = {}", fit.converged);
        }
        Command::Compare { config, data } => {
            let cfg = load_config(&config)?;
            let params = cfg.kinematic_params()?;
            let series = load_series(&data)?;
            let report = compare_models(&params, &series)?;
            println!("rmse_constant_mm = {:.2}", report.rmse_constant_mm);
            println!("rmse_variable_mm = {:.2}", report.rmse_variable_mm);
            println!("winner = {}", report.winner);
            let mut table = ReportTable::new(vec![
                ReportColumn::new("turns", ColumnFormat::Turns),
                ReportColumn::new("measured_mm", ColumnFormat::LengthMm),
                ReportColumn::new("residual_constant_mm", ColumnFormat::LengthMm),
                ReportColumn::new("residual_variable_mm", ColumnFormat::LengthMm),
            ]);
            for (i, &(turns, measured)) in series.samples().iter().enumerate() {
                table
                    .push_row(vec![
                        turns,
                        measured,
                        report.residuals_constant_mm[i],
                        report.residuals_variable_mm[i],
                    ])
                    .expect("residual rows are rectangular");
            }
            print!("{}", write_report(&table));
        }
        Command::Onset {
            config,
            total_length,
            fraction,
        } => {
            if !(fraction > 0.0 && fraction < 1.0) {
                return Err(CliError::Usage(format!(
                    "--fraction must lie in (0, 1), got {fraction}"
                )));
            }
            if !(total_length > 0.0) {
                return Err(CliError::Usage(format!(
                    "--total-length must be positive, got {total_length}"
                )));
            }
            let params = load_config(&config)?.kinematic_params()?;
            let turns = overtwist_onset_turns(&params, total_length, fraction)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            println!("{turns:.2}");
        }
        Command::Lifecycle {
            records,
            fit,
            predict,
        } => {
            let parsed = parse_lifecycle_csv(&read_file(&records)?)?;
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
            for record in &parsed {
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
                    .expect("record rows are rectangular");
            }
            print!("{}", write_report(&table));
            if fit || predict.is_some() {
                let law = fit_load_life(&parsed)?;
                // records carry newtons; report the scale in the kgf basis
                // the records file uses
                let scale_kgf = law.scale * NEWTONS_PER_KGF.powf(law.exponent);
                println!(
                    "fit: exponent = {:.4}, scale_kgf = {:.2}, residual_rms_log = {:.4}",
                    law.exponent, scale_kgf, law.residual_rms
                );
                if let Some(args) = predict {
                    let (load_kgf, per_cycle) = (args[0], args[1]);
                    if !(load_kgf > 0.0) || !(per_cycle > 0.0) {
                        return Err(CliError::Usage(format!(
                            "--predict needs a positive load and per-cycle contraction, \
                             got {load_kgf} and {per_cycle}"
                        )));
                    }
                    let cycles = predict_endurance(&law, kgf_to_newtons(load_kgf), per_cycle)?;
                    println!("predicted_cycles = {cycles}");
                }
            }
        }
        Command::Reproduce { table, data_dir } => {
            let csv = reproduce::table(table, &data_dir)?;
            print!("{csv}");
        }
    }
    Ok(())
}
