//! String endurance analysis.
//!
//! An endurance experiment cycles a build between zero turns and a fixed
//! turn count under a constant load until the strings break. Each
//! [`LifeCycleRecord`] captures one such experiment; the contraction
//! endured counts one direction per cycle. [`fit_load_life`] relates the
//! total contraction endured to the applied load with a power law
//! `C = a * F^b` — a toolkit extrapolation over the recorded data, fitted
//! in log-log space. [`detect_failure`] finds the breaking moment in a
//! motor current trace.

use crate::error::{Error, Result};
use crate::units::kgf_to_newtons;

/// One endurance experiment: fixed load and turns per cycle, run to string
/// failure. Loads are stored in newtons.
#[derive(Debug, Clone, Copy)]
pub struct LifeCycleRecord {
    /// Applied load, N.
    pub load_n: f64,
    pub turns_per_cycle: f64,
    pub cycles_endured: u64,
    /// Contraction achieved on each cycle, mm.
    pub contraction_per_cycle_mm: f64,
    /// Total contraction endured as recorded, mm.
    pub total_contraction_mm: f64,
}

impl LifeCycleRecord {
    pub fn new(
        load_n: f64,
        turns_per_cycle: f64,
        cycles_endured: u64,
        contraction_per_cycle_mm: f64,
        total_contraction_mm: f64,
    ) -> Result<Self> {
        for (name, value) in [
            ("load", load_n),
            ("turns per cycle", turns_per_cycle),
            ("contraction per cycle", contraction_per_cycle_mm),
            ("total contraction", total_contraction_mm),
        ] {
            if !(value > 0.0) {
                return Err(Error::invalid(format!("{name} must be positive, got {value}")));
            }
        }
        if cycles_endured == 0 {
            return Err(Error::invalid("cycles endured must be positive"));
        }
        Ok(LifeCycleRecord {
            load_n,
            turns_per_cycle,
            cycles_endured,
            contraction_per_cycle_mm,
            total_contraction_mm,
        })
    }

    /// Builds a record from a load given in kilogram-force.
    pub fn from_kgf(
        load_kgf: f64,
        turns_per_cycle: f64,
        cycles_endured: u64,
        contraction_per_cycle_mm: f64,
        total_contraction_mm: f64,
    ) -> Result<Self> {
        LifeCycleRecord::new(
            kgf_to_newtons(load_kgf),
            turns_per_cycle,
            cycles_endured,
            contraction_per_cycle_mm,
            total_contraction_mm,
        )
    }

    pub fn load_kgf(&self) -> f64 {
        crate::units::newtons_to_kgf(self.load_n)
    }
}

/// Contraction a record's strings endured: cycles times per-cycle
/// contraction (mm).
pub fn total_contraction(record: &LifeCycleRecord) -> f64 {
    record.cycles_endured as f64 * record.contraction_per_cycle_mm
}

/// Records whose recorded total deviates from `cycles * per-cycle` by more
/// than this are flagged inconsistent (mm).
pub const CONSISTENCY_TOLERANCE_MM: f64 = 1.0;

/// Cross-check of a record's internal arithmetic.
#[derive(Debug, Clone, Copy)]
pub struct ConsistencyReport {
    pub computed_total_mm: f64,
    pub recorded_total_mm: f64,
    /// Computed minus recorded, mm.
    pub deviation_mm: f64,
    pub consistent: bool,
}

/// Flags records whose recorded total disagrees with their own cycle
/// arithmetic. The toolkit reports such discrepancies without guessing
/// which of the three figures is wrong.
pub fn validate_record(record: &LifeCycleRecord) -> ConsistencyReport {
    let computed_total_mm = total_contraction(record);
    let deviation_mm = computed_total_mm - record.total_contraction_mm;
    ConsistencyReport {
        computed_total_mm,
        recorded_total_mm: record.total_contraction_mm,
        deviation_mm,
        consistent: deviation_mm.abs() <= CONSISTENCY_TOLERANCE_MM,
    }
}

/// Power law `C = a * F^b` relating applied load to the total contraction
/// endured, fitted by least squares in log-log space.
#[derive(Debug, Clone, Copy)]
pub struct LoadLifeFit {
    /// Scale `a`, mm at unit load (in the units the loads were given in).
    pub scale: f64,
    /// Exponent `b`, dimensionless and independent of the load unit.
    pub exponent: f64,
    /// RMS of log-space residuals.
    pub residual_rms: f64,
}

impl LoadLifeFit {
    /// Expected total contraction at a load (mm).
    pub fn endured_contraction_mm(&self, load_n: f64) -> f64 {
        self.scale * load_n.powf(self.exponent)
    }
}

/// Fits the load-life power law over a set of records.
///
/// Records sharing a load are aggregated to their mean recorded total
/// first, then ordinary least squares runs on `(ln F, ln C_mean)`. Needs
/// at least two distinct loads.
pub fn fit_load_life(records: &[LifeCycleRecord]) -> Result<LoadLifeFit> {
    let mut by_load: Vec<(f64, f64)> = records
        .iter()
        .map(|r| (r.load_n, r.total_contraction_mm))
        .collect();
    by_load.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut groups: Vec<(f64, f64)> = Vec::new(); // (load, mean total)
    let mut i = 0;
    while i < by_load.len() {
        let load = by_load[i].0;
        let mut sum = 0.0;
        let mut count = 0usize;
        while i < by_load.len() && (by_load[i].0 - load).abs() <= 1e-9 * load.abs().max(1.0) {
            sum += by_load[i].1;
            count += 1;
            i += 1;
        }
        groups.push((load, sum / count as f64));
    }
    if groups.len() < 2 {
        return Err(Error::IllPosed(format!(
            "load-life fitting needs at least two distinct loads, got {}",
            groups.len()
        )));
    }
    let n = groups.len() as f64;
    let logs: Vec<(f64, f64)> = groups.iter().map(|&(f, c)| (f.ln(), c.ln())).collect();
    let mean_x = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mean_x) * (p.0 - mean_x)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let exponent = sxy / sxx;
    let intercept = mean_y - exponent * mean_x;
    let residual_rms = (logs
        .iter()
        .map(|p| {
            let r = p.1 - (intercept + exponent * p.0);
            r * r
        })
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(LoadLifeFit {
        scale: intercept.exp(),
        exponent,
        residual_rms,
    })
}

/// Whole cycles a build is expected to survive at a load:
/// `floor(a * F^b / per_cycle_contraction)`.
pub fn predict_endurance(
    fit: &LoadLifeFit,
    load_n: f64,
    per_cycle_contraction_mm: f64,
) -> Result<u64> {
    if !(load_n > 0.0) {
        return Err(Error::invalid(format!("load must be positive, got {load_n}")));
    }
    if !(per_cycle_contraction_mm > 0.0) {
        return Err(Error::invalid(format!(
            "per-cycle contraction must be positive, got {per_cycle_contraction_mm}"
        )));
    }
    let cycles = fit.endured_contraction_mm(load_n) / per_cycle_contraction_mm;
    Ok(cycles.floor().max(0.0) as u64)
}

/// One sample of a cycle log: elapsed time, shaft turns and motor current.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleSample {
    pub t_ms: f64,
    pub turns: f64,
    pub current_ma: f64,
}

/// Logged trace of an endurance run. The motor current identifies the
/// moment the strings break.
#[derive(Debug, Clone)]
pub struct CycleLog {
    pub samples: Vec<CycleSample>,
    pub failure_index: Option<usize>,
}

impl CycleLog {
    pub fn new(samples: Vec<CycleSample>) -> Result<Self> {
        for pair in samples.windows(2) {
            if pair[1].t_ms <= pair[0].t_ms {
                return Err(Error::invalid(format!(
                    "cycle log times must strictly increase, got {} after {}",
                    pair[1].t_ms, pair[0].t_ms
                )));
            }
        }
        if let Some(s) = samples.iter().find(|s| !(s.current_ma >= 0.0)) {
            return Err(Error::invalid(format!(
                "currents must be non-negative, got {}",
                s.current_ma
            )));
        }
        Ok(CycleLog {
            samples,
            failure_index: None,
        })
    }
}

/// Finds the first index where the current stays at or above `threshold_ma`
/// for `hold` consecutive samples. `hold` debounces single-sample spikes.
pub fn detect_failure(log: &CycleLog, threshold_ma: f64, hold: usize) -> Result<Option<usize>> {
    if hold == 0 {
        return Err(Error::invalid("hold must be at least 1 sample"));
    }
    let mut run = 0usize;
    for (i, sample) in log.samples.iter().enumerate() {
        if sample.current_ma >= threshold_ma {
            run += 1;
            if run == hold {
                return Ok(Some(i + 1 - hold));
            }
        } else {
            run = 0;
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // The twelve reference endurance experiments on the 2-string build:
    // (load kgf, turns/cycle, cycles endured, per-cycle mm, recorded total mm).
    pub(crate) const REFERENCE_RECORDS: [(f64, f64, u64, f64, f64); 12] = [
        (2.0, 20.0, 1512, 16.06, 24283.0),
        (2.0, 30.0, 936, 27.76, 25983.0),
        (2.0, 40.0, 550, 40.22, 22121.0),
        (2.0, 55.0, 411, 59.02, 24257.0),
        (3.0, 20.0, 581, 15.43, 8965.0),
        (3.0, 30.0, 396, 26.79, 10609.0),
        (3.0, 40.0, 240, 37.64, 9132.0),
        (3.0, 55.0, 170, 56.36, 9581.0),
        (5.0, 20.0, 130, 14.60, 1898.0),
        (5.0, 30.0, 50, 25.44, 1272.0),
        (5.0, 40.0, 28, 36.08, 1010.0),
        (5.0, 55.0, 13, 54.97, 751.0),
    ];

    fn reference_records() -> Vec<LifeCycleRecord> {
        REFERENCE_RECORDS
            .iter()
            .map(|&(kgf, t, c, per, tot)| LifeCycleRecord::from_kgf(kgf, t, c, per, tot).unwrap())
            .collect()
    }

    #[test]
    fn totals_are_exact_products() {
        let rec = LifeCycleRecord::from_kgf(2.0, 55.0, 411, 59.02, 24257.0).unwrap();
        assert_relative_eq!(total_contraction(&rec), 24257.22, epsilon = 1e-9);
        let one = LifeCycleRecord::from_kgf(1.0, 10.0, 1, 10.0, 10.0).unwrap();
        assert_eq!(total_contraction(&one), 10.0);
        let rec = LifeCycleRecord::from_kgf(2.0, 20.0, 1512, 16.06, 24283.0).unwrap();
        assert_relative_eq!(total_contraction(&rec), 24282.72, epsilon = 1e-9);
    }

    #[test]
    fn validator_flags_exactly_the_two_inconsistent_records() {
        let flagged: Vec<(f64, f64)> = reference_records()
            .iter()
            .filter(|r| !validate_record(r).consistent)
            .map(|r| (r.load_kgf(), r.turns_per_cycle))
            .collect();
        assert_eq!(flagged, vec![(3.0, 40.0), (5.0, 55.0)]);

        let bad = validate_record(&LifeCycleRecord::from_kgf(3.0, 40.0, 240, 37.64, 9132.0).unwrap());
        assert_relative_eq!(bad.deviation_mm, -98.4, epsilon = 1e-9);
        let bad = validate_record(&LifeCycleRecord::from_kgf(5.0, 55.0, 13, 54.97, 751.0).unwrap());
        assert_relative_eq!(bad.deviation_mm, -36.39, epsilon = 1e-9);
        let good = validate_record(&LifeCycleRecord::from_kgf(2.0, 40.0, 550, 40.22, 22121.0).unwrap());
        assert!(good.consistent);
        assert_eq!(good.computed_total_mm, 22121.0);
    }

    #[test]
    fn load_life_fit_matches_the_frozen_least_squares_solution() {
        // frozen from an independent log-log least-squares evaluation of the
        // per-load mean totals 24161, 9571.75 and 1232.75 mm at 2, 3, 5 kgf
        let records: Vec<LifeCycleRecord> = REFERENCE_RECORDS
            .iter()
            .map(|&(kgf, t, c, per, tot)| LifeCycleRecord::new(kgf, t, c, per, tot).unwrap())
            .collect();
        let fit = fit_load_life(&records).unwrap();
        assert_relative_eq!(fit.exponent, -3.279870464997299, epsilon = 1e-9);
        assert_relative_eq!(fit.scale, 271174.72809142363, max_relative = 1e-9);
        assert_relative_eq!(fit.residual_rms, 0.18379797218091787, epsilon = 1e-9);
    }

    #[test]
    fn exponent_is_invariant_under_load_unit_changes() {
        let kgf_records: Vec<LifeCycleRecord> = REFERENCE_RECORDS
            .iter()
            .map(|&(kgf, t, c, per, tot)| LifeCycleRecord::new(kgf, t, c, per, tot).unwrap())
            .collect();
        let newton_records = reference_records();
        let fit_kgf = fit_load_life(&kgf_records).unwrap();
        let fit_n = fit_load_life(&newton_records).unwrap();
        assert!((fit_kgf.exponent - fit_n.exponent).abs() < 1e-9);
        assert!(fit_kgf.scale != fit_n.scale);
    }

    #[test]
    fn exact_power_laws_fit_with_zero_residual() {
        let mk = |f: f64, c: f64| LifeCycleRecord::new(f, 10.0, 1, 1.0, c).unwrap();
        let inverse = [mk(1.0, 1.0), mk(2.0, 0.5), mk(4.0, 0.25)];
        let fit = fit_load_life(&inverse).unwrap();
        assert_relative_eq!(fit.exponent, -1.0, epsilon = 1e-12);
        assert!(fit.residual_rms < 1e-12);
        let flat = [mk(1.0, 7.0), mk(3.0, 7.0)];
        let fit = fit_load_life(&flat).unwrap();
        assert_relative_eq!(fit.exponent, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn single_load_is_ill_posed() {
        let records = [
            LifeCycleRecord::new(2.0, 20.0, 10, 5.0, 50.0).unwrap(),
            LifeCycleRecord::new(2.0, 30.0, 20, 5.0, 100.0).unwrap(),
        ];
        assert!(matches!(
            fit_load_life(&records).unwrap_err(),
            Error::IllPosed(_)
        ));
    }

    #[test]
    fn prediction_floors_the_expected_cycles() {
        // fit over the reference records in kgf units, predictions at the
        // recorded per-cycle contractions; frozen expected counts 1738 and 25
        let records: Vec<LifeCycleRecord> = REFERENCE_RECORDS
            .iter()
            .map(|&(kgf, t, c, per, tot)| LifeCycleRecord::new(kgf, t, c, per, tot).unwrap())
            .collect();
        let fit = fit_load_life(&records).unwrap();
        assert_eq!(predict_endurance(&fit, 2.0, 16.06).unwrap(), 1738);
        assert_eq!(predict_endurance(&fit, 5.0, 54.97).unwrap(), 25);
        let flat = LoadLifeFit {
            scale: 100.0,
            exponent: 0.0,
            residual_rms: 0.0,
        };
        assert_eq!(predict_endurance(&flat, 7.0, 10.0).unwrap(), 10);
        assert!(predict_endurance(&flat, 7.0, 0.0).is_err());
        assert!(predict_endurance(&flat, 0.0, 1.0).is_err());
    }

    #[test]
    fn prediction_is_monotone() {
        let fit = LoadLifeFit {
            scale: 1e5,
            exponent: -2.5,
            residual_rms: 0.0,
        };
        let a = predict_endurance(&fit, 10.0, 5.0).unwrap();
        let b = predict_endurance(&fit, 20.0, 5.0).unwrap();
        assert!(b < a);
        let c = predict_endurance(&fit, 10.0, 10.0).unwrap();
        assert!(c < a);
    }

    fn flat_log(n: usize, current: f64) -> CycleLog {
        CycleLog::new(
            (0..n)
                .map(|i| CycleSample {
                    t_ms: i as f64 * 10.0,
                    turns: 0.0,
                    current_ma: current,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn quiet_traces_report_no_failure() {
        let log = flat_log(100, 100.0);
        assert_eq!(detect_failure(&log, 500.0, 3).unwrap(), None);
    }

    #[test]
    fn sustained_overcurrent_is_located() {
        let mut samples: Vec<CycleSample> = (0..80)
            .map(|i| CycleSample {
                t_ms: i as f64,
                turns: 0.0,
                current_ma: 100.0,
            })
            .collect();
        for s in samples.iter_mut().skip(42) {
            s.current_ma = 900.0;
        }
        let log = CycleLog::new(samples).unwrap();
        assert_eq!(detect_failure(&log, 500.0, 3).unwrap(), Some(42));
    }

    #[test]
    fn single_sample_spikes_are_debounced() {
        let mut samples = flat_log(50, 100.0).samples;
        samples[20].current_ma = 2000.0;
        let log = CycleLog::new(samples).unwrap();
        assert_eq!(detect_failure(&log, 500.0, 3).unwrap(), None);
        assert!(detect_failure(&log, 500.0, 0).is_err());
    }

    #[test]
    fn prepending_quiet_samples_shifts_the_index() {
        let mut samples: Vec<CycleSample> = (0..10)
            .map(|i| CycleSample {
                t_ms: i as f64,
                turns: 0.0,
                current_ma: if i >= 4 { 900.0 } else { 100.0 },
            })
            .collect();
        let base = detect_failure(&CycleLog::new(samples.clone()).unwrap(), 500.0, 2)
            .unwrap()
            .unwrap();
        let mut shifted: Vec<CycleSample> = (0..5)
            .map(|i| CycleSample {
                t_ms: i as f64 - 5.0,
                turns: 0.0,
                current_ma: 50.0,
            })
            .collect();
        shifted.append(&mut samples);
        let log = CycleLog::new(shifted).unwrap();
        assert_eq!(detect_failure(&log, 500.0, 2).unwrap(), Some(base + 5));
    }

    #[test]
    fn cycle_log_validation() {
        let bad_time = vec![
            CycleSample { t_ms: 0.0, turns: 0.0, current_ma: 1.0 },
            CycleSample { t_ms: 0.0, turns: 1.0, current_ma: 1.0 },
        ];
        assert!(CycleLog::new(bad_time).is_err());
        let bad_current = vec![CycleSample { t_ms: 0.0, turns: 0.0, current_ma: -1.0 }];
        assert!(CycleLog::new(bad_current).is_err());
        assert!(CycleLog::new(Vec::new()).is_ok());
    }
}
