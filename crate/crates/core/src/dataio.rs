//! Text formats: configuration files, measurement and cycle-log CSVs,
//! report tables and SVG plots.
//!
//! Parsers reject malformed input instead of coercing it, and name the
//! offending line. Emitters produce byte-identical output for identical
//! input; report numbers are formatted at fixed precision (lengths two
//! decimals, percentages none, RMSE two) so regenerated tables diff
//! cleanly against their references.

use crate::calibration::{MeasurementSeries, SeriesMeta};
use crate::error::{Error, Result};
use crate::geometry::{bundle_diameter_packed, pack_bundle};
use crate::kinematics::KinematicParams;
use crate::lifecycle::{CycleLog, CycleSample, LifeCycleRecord};

/// Physical description of one actuator build, as read from a config file.
#[derive(Debug, Clone, PartialEq)]
pub struct StringSystemConfig {
    pub n_strings: usize,
    pub string_diameter_mm: f64,
    pub twist_zone_mm: f64,
    pub separator_mm: f64,
    /// Measured bundle diameter; when absent the packing model supplies it.
    pub measured_bundle_diameter_mm: Option<f64>,
    /// Turn count beyond which untwisting becomes unreliable, if known.
    pub max_safe_turns: Option<f64>,
    pub label: String,
}

impl StringSystemConfig {
    /// Bundle diameter to model with: the measured value when present,
    /// otherwise the packed prediction.
    pub fn bundle_diameter_mm(&self) -> Result<f64> {
        match self.measured_bundle_diameter_mm {
            Some(d) => Ok(d),
            None => bundle_diameter_packed(&pack_bundle(self.n_strings, self.string_diameter_mm)?),
        }
    }

    /// Kinematic parameters of this build (radius from
    /// [`bundle_diameter_mm`](Self::bundle_diameter_mm)).
    pub fn kinematic_params(&self) -> Result<KinematicParams> {
        KinematicParams::new(
            self.twist_zone_mm,
            self.separator_mm,
            self.bundle_diameter_mm()? / 2.0,
        )
    }
}

/// Parses a `key = value` config file. `#` starts a comment. Recognized
/// keys: `n_strings`, `string_diameter_mm`, `twist_zone_mm`, `separator_mm`
/// (required), `bundle_diameter_mm`, `max_safe_turns`, `label` (optional).
/// Unknown keys, duplicates, malformed numbers and missing required keys
/// are errors naming the line and key.
pub fn parse_config(text: &str) -> Result<StringSystemConfig> {
    let mut n_strings: Option<(usize, usize)> = None; // (line, value)
    let mut string_diameter: Option<(usize, f64)> = None;
    let mut twist_zone: Option<(usize, f64)> = None;
    let mut separator: Option<(usize, f64)> = None;
    let mut bundle_diameter: Option<(usize, f64)> = None;
    let mut max_safe_turns: Option<(usize, f64)> = None;
    let mut label: Option<(usize, String)> = None;
    let mut line_count = 0usize;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        line_count = line_no;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(Error::parse(line_no, format!("expected `key = value`, got `{content}`")));
        };
        let key = key.trim();
        let value = value.trim();
        match key {
            "n_strings" => {
                check_once(line_no, key, n_strings.is_some())?;
                let v: i64 = value.parse().map_err(|_| bad_number(line_no, key, value))?;
                if v < 1 {
                    return Err(Error::parse(line_no, format!("n_strings must be at least 1, got {v}")));
                }
                n_strings = Some((line_no, v as usize));
            }
            "string_diameter_mm" => {
                check_once(line_no, key, string_diameter.is_some())?;
                string_diameter = Some((line_no, positive_number(line_no, key, value)?));
            }
            "twist_zone_mm" => {
                check_once(line_no, key, twist_zone.is_some())?;
                twist_zone = Some((line_no, positive_number(line_no, key, value)?));
            }
            "separator_mm" => {
                check_once(line_no, key, separator.is_some())?;
                let v = finite_number(line_no, key, value)?;
                if v < 0.0 {
                    return Err(Error::parse(line_no, format!("{key} must be non-negative, got {v}")));
                }
                separator = Some((line_no, v));
            }
            "bundle_diameter_mm" => {
                check_once(line_no, key, bundle_diameter.is_some())?;
                bundle_diameter = Some((line_no, positive_number(line_no, key, value)?));
            }
            "max_safe_turns" => {
                check_once(line_no, key, max_safe_turns.is_some())?;
                max_safe_turns = Some((line_no, positive_number(line_no, key, value)?));
            }
            "label" => {
                check_once(line_no, key, label.is_some())?;
                label = Some((line_no, value.to_string()));
            }
            other => {
                return Err(Error::parse(line_no, format!("unknown key `{other}`")));
            }
        }
    }

    let end = line_count.max(1);
    let required = |opt: Option<(usize, f64)>, key: &str| {
        opt.map(|(_, v)| v)
            .ok_or_else(|| Error::parse(end, format!("missing required key `{key}`")))
    };
    Ok(StringSystemConfig {
        n_strings: n_strings
            .map(|(_, v)| v)
            .ok_or_else(|| Error::parse(end, "missing required key `n_strings`".to_string()))?,
        string_diameter_mm: required(string_diameter, "string_diameter_mm")?,
        twist_zone_mm: required(twist_zone, "twist_zone_mm")?,
        separator_mm: required(separator, "separator_mm")?,
        measured_bundle_diameter_mm: bundle_diameter.map(|(_, v)| v),
        max_safe_turns: max_safe_turns.map(|(_, v)| v),
        label: label.map(|(_, v)| v).unwrap_or_default(),
    })
}

fn check_once(line: usize, key: &str, seen: bool) -> Result<()> {
    if seen {
        return Err(Error::parse(line, format!("duplicate key `{key}`")));
    }
    Ok(())
}

fn bad_number(line: usize, key: &str, value: &str) -> Error {
    Error::parse(line, format!("key `{key}` needs a numeric value, got `{value}`"))
}

fn finite_number(line: usize, key: &str, value: &str) -> Result<f64> {
    let v: f64 = value.parse().map_err(|_| bad_number(line, key, value))?;
    if !v.is_finite() {
        return Err(bad_number(line, key, value));
    }
    Ok(v)
}

fn positive_number(line: usize, key: &str, value: &str) -> Result<f64> {
    let v = finite_number(line, key, value)?;
    if v <= 0.0 {
        return Err(Error::parse(line, format!("{key} must be positive, got {v}")));
    }
    Ok(v)
}

const MEASUREMENT_HEADER: &str = "turns,displacement_mm";

/// Parses a measurement CSV with the exact header `turns,displacement_mm`.
/// Rows are sorted by turns; duplicate turn values and malformed rows are
/// errors carrying the file line number.
pub fn parse_measurement_csv(text: &str) -> Result<MeasurementSeries> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim_end() == MEASUREMENT_HEADER => {}
        Some((_, header)) => {
            return Err(Error::parse(
                1,
                format!("bad header `{header}`, expected `{MEASUREMENT_HEADER}`"),
            ))
        }
        None => return Err(Error::parse(1, "empty input, expected a header".to_string())),
    }
    let mut rows: Vec<(usize, f64, f64)> = Vec::new();
    for (idx, raw) in lines {
        let line_no = idx + 1;
        let line = raw.trim_end();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let (Some(turns), Some(x), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(Error::parse(line_no, format!("expected 2 fields, got `{line}`")));
        };
        let turns: f64 = turns
            .trim()
            .parse()
            .map_err(|_| Error::parse(line_no, format!("bad turns value `{turns}`")))?;
        let x: f64 = x
            .trim()
            .parse()
            .map_err(|_| Error::parse(line_no, format!("bad displacement value `{x}`")))?;
        if !turns.is_finite() || turns < 0.0 {
            return Err(Error::parse(line_no, format!("turns must be non-negative, got {turns}")));
        }
        if !x.is_finite() || x < 0.0 {
            return Err(Error::parse(
                line_no,
                format!("displacement must be non-negative, got {x}"),
            ));
        }
        rows.push((line_no, turns, x));
    }
    rows.sort_by(|a, b| a.1.total_cmp(&b.1));
    for pair in rows.windows(2) {
        if pair[1].1 <= pair[0].1 {
            return Err(Error::parse(
                pair[1].0,
                format!("duplicate turns value {}", pair[1].1),
            ));
        }
    }
    MeasurementSeries::new(
        rows.into_iter().map(|(_, t, x)| (t, x)).collect(),
        SeriesMeta::default(),
    )
}

const CYCLE_LOG_HEADER: &str = "t_ms,turns,current_ma";

/// Parses a cycle log CSV with the exact header `t_ms,turns,current_ma`.
/// Times must strictly increase and currents must be non-negative; an empty
/// body is a valid empty log.
pub fn parse_cycle_log(text: &str) -> Result<CycleLog> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim_end() == CYCLE_LOG_HEADER => {}
        Some((_, header)) => {
            return Err(Error::parse(
                1,
                format!("bad header `{header}`, expected `{CYCLE_LOG_HEADER}`"),
            ))
        }
        None => return Err(Error::parse(1, "empty input, expected a header".to_string())),
    }
    let mut samples = Vec::new();
    let mut last_t: Option<f64> = None;
    for (idx, raw) in lines {
        let line_no = idx + 1;
        let line = raw.trim_end();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::parse(line_no, format!("expected 3 fields, got `{line}`")));
        }
        let parse = |name: &str, v: &str| -> Result<f64> {
            let x: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad {name} value `{v}`")))?;
            if !x.is_finite() {
                return Err(Error::parse(line_no, format!("bad {name} value `{v}`")));
            }
            Ok(x)
        };
        let t_ms = parse("t_ms", fields[0])?;
        let turns = parse("turns", fields[1])?;
        let current_ma = parse("current_ma", fields[2])?;
        if let Some(prev) = last_t {
            if t_ms <= prev {
                return Err(Error::parse(
                    line_no,
                    format!("t_ms must strictly increase, got {t_ms} after {prev}"),
                ));
            }
        }
        if current_ma < 0.0 {
            return Err(Error::parse(
                line_no,
                format!("current must be non-negative, got {current_ma}"),
            ));
        }
        last_t = Some(t_ms);
        samples.push(CycleSample { t_ms, turns, current_ma });
    }
    CycleLog::new(samples)
}

const LIFECYCLE_HEADER: &str =
    "load_kgf,turns_per_cycle,cycles_endured,contraction_per_cycle_mm,total_contraction_mm";

/// Parses endurance records from a CSV with the exact header
/// `load_kgf,turns_per_cycle,cycles_endured,contraction_per_cycle_mm,total_contraction_mm`.
/// Loads are converted to newtons on the way in.
pub fn parse_lifecycle_csv(text: &str) -> Result<Vec<LifeCycleRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim_end() == LIFECYCLE_HEADER => {}
        Some((_, header)) => {
            return Err(Error::parse(
                1,
                format!("bad header `{header}`, expected `{LIFECYCLE_HEADER}`"),
            ))
        }
        None => return Err(Error::parse(1, "empty input, expected a header".to_string())),
    }
    let mut records = Vec::new();
    for (idx, raw) in lines {
        let line_no = idx + 1;
        let line = raw.trim_end();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::parse(line_no, format!("expected 5 fields, got `{line}`")));
        }
        let num = |name: &str, v: &str| -> Result<f64> {
            v.trim()
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad {name} value `{v}`")))
        };
        let load_kgf = num("load_kgf", fields[0])?;
        let turns = num("turns_per_cycle", fields[1])?;
        let cycles: u64 = fields[2].trim().parse().map_err(|_| {
            Error::parse(line_no, format!("bad cycles_endured value `{}`", fields[2]))
        })?;
        let per_cycle = num("contraction_per_cycle_mm", fields[3])?;
        let total = num("total_contraction_mm", fields[4])?;
        let record = LifeCycleRecord::from_kgf(load_kgf, turns, cycles, per_cycle, total)
            .map_err(|e| Error::parse(line_no, e.to_string()))?;
        records.push(record);
    }
    Ok(records)
}

/// Fixed-precision formatting of a report column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnFormat {
    /// Whole number (counts, published whole-mm totals).
    Count,
    /// Length in mm, two decimals.
    LengthMm,
    /// Percentage, no decimals.
    Percent,
    /// RMSE in mm, two decimals.
    Rmse,
    /// Turn count, one decimal.
    Turns,
}

/// A labeled, format-carrying report column.
#[derive(Debug, Clone)]
pub struct ReportColumn {
    pub label: String,
    pub format: ColumnFormat,
}

impl ReportColumn {
    pub fn new(label: impl Into<String>, format: ColumnFormat) -> Self {
        ReportColumn { label: label.into(), format }
    }
}

/// A rectangular table of numeric cells with labeled columns.
#[derive(Debug, Clone)]
pub struct ReportTable {
    columns: Vec<ReportColumn>,
    rows: Vec<Vec<f64>>,
}

impl ReportTable {
    pub fn new(columns: Vec<ReportColumn>) -> Self {
        ReportTable { columns, rows: Vec::new() }
    }

    pub fn push_row(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::invalid(format!(
                "row has {} cells but the table has {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn columns(&self) -> &[ReportColumn] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }
}

/// Serializes a table as CSV: `\n` line endings, labels quoted only when
/// they need it, cells at their column's fixed precision. Output is
/// byte-identical for identical input.
pub fn write_report(table: &ReportTable) -> String {
    let mut out = String::new();
    let header: Vec<String> = table
        .columns
        .iter()
        .map(|c| quote_csv_field(&c.label))
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row
            .iter()
            .zip(&table.columns)
            .map(|(value, col)| format_cell(*value, col.format))
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn format_cell(value: f64, format: ColumnFormat) -> String {
    let s = match format {
        ColumnFormat::Count | ColumnFormat::Percent => format!("{value:.0}"),
        ColumnFormat::LengthMm | ColumnFormat::Rmse => format!("{value:.2}"),
        ColumnFormat::Turns => format!("{value:.1}"),
    };
    // a rounded-away negative sign ("-0.00") carries no information
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn quote_csv_field(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// One plotted curve: parallel x/y vectors and a legend label.
#[derive(Debug, Clone)]
pub struct PlotSeries {
    pub label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl PlotSeries {
    pub fn new(label: impl Into<String>, x: Vec<f64>, y: Vec<f64>) -> Self {
        PlotSeries { label: label.into(), x, y }
    }
}

const PLOT_WIDTH: f64 = 800.0;
const PLOT_HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 170.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

/// Renders labeled series as a self-contained SVG line plot with linear
/// axes and a legend. Deterministic: identical input yields identical
/// bytes.
pub fn render_plot(series: &[PlotSeries], x_label: &str, y_label: &str) -> Result<String> {
    if series.is_empty() {
        return Err(Error::invalid("plot needs at least one series"));
    }
    for s in series {
        if s.x.len() != s.y.len() {
            return Err(Error::invalid(format!(
                "series `{}` has {} x values but {} y values",
                s.label,
                s.x.len(),
                s.y.len()
            )));
        }
        if s.x.len() < 2 {
            return Err(Error::invalid(format!(
                "series `{}` needs at least 2 points, got {}",
                s.label,
                s.x.len()
            )));
        }
        if s.x.iter().chain(s.y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "series `{}` contains non-finite values",
                s.label
            )));
        }
    }
    let (mut x_min, mut x_max, mut y_min, mut y_max) =
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for s in series {
        for &v in &s.x {
            x_min = x_min.min(v);
            x_max = x_max.max(v);
        }
        for &v in &s.y {
            y_min = y_min.min(v);
            y_max = y_max.max(v);
        }
    }
    if x_max == x_min {
        x_min -= 1.0;
        x_max += 1.0;
    }
    if y_max == y_min {
        y_min -= 1.0;
        y_max += 1.0;
    }
    let inner_w = PLOT_WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let inner_h = PLOT_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |v: f64| MARGIN_LEFT + (v - x_min) / (x_max - x_min) * inner_w;
    let sy = |v: f64| MARGIN_TOP + inner_h - (v - y_min) / (y_max - y_min) * inner_h;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{PLOT_WIDTH}\" height=\"{PLOT_HEIGHT}\" viewBox=\"0 0 {PLOT_WIDTH} {PLOT_HEIGHT}\">\n"
    ));
    svg.push_str(&format!(
        "  <rect x=\"0\" y=\"0\" width=\"{PLOT_WIDTH}\" height=\"{PLOT_HEIGHT}\" fill=\"white\"/>\n"
    ));
    // axes
    let x0 = MARGIN_LEFT;
    let y0 = MARGIN_TOP + inner_h;
    svg.push_str(&format!(
        "  <line x1=\"{x0:.2}\" y1=\"{y0:.2}\" x2=\"{:.2}\" y2=\"{y0:.2}\" stroke=\"black\"/>\n",
        x0 + inner_w
    ));
    svg.push_str(&format!(
        "  <line x1=\"{x0:.2}\" y1=\"{y0:.2}\" x2=\"{x0:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
        MARGIN_TOP
    ));
    // ticks and labels, five per axis
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let xv = x_min + f * (x_max - x_min);
        let xp = sx(xv);
        svg.push_str(&format!(
            "  <line x1=\"{xp:.2}\" y1=\"{y0:.2}\" x2=\"{xp:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
            y0 + 5.0
        ));
        svg.push_str(&format!(
            "  <text x=\"{xp:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
            y0 + 18.0,
            format_tick(xv)
        ));
        let yv = y_min + f * (y_max - y_min);
        let yp = sy(yv);
        svg.push_str(&format!(
            "  <line x1=\"{:.2}\" y1=\"{yp:.2}\" x2=\"{x0:.2}\" y2=\"{yp:.2}\" stroke=\"black\"/>\n",
            x0 - 5.0
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
            x0 - 8.0,
            yp + 4.0,
            format_tick(yv)
        ));
    }
    // axis titles
    svg.push_str(&format!(
        "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\">{}</text>\n",
        x0 + inner_w / 2.0,
        y0 + 40.0,
        escape_xml(x_label)
    ));
    svg.push_str(&format!(
        "  <text x=\"18\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.2})\">{}</text>\n",
        MARGIN_TOP + inner_h / 2.0,
        MARGIN_TOP + inner_h / 2.0,
        escape_xml(y_label)
    ));
    // curves
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let points: Vec<String> = s
            .x
            .iter()
            .zip(&s.y)
            .map(|(&x, &y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        svg.push_str(&format!(
            "  <polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            points.join(" ")
        ));
    }
    // legend
    let legend_x = PLOT_WIDTH - MARGIN_RIGHT + 14.0;
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let ly = MARGIN_TOP + 10.0 + i as f64 * 18.0;
        svg.push_str(&format!(
            "  <line x1=\"{legend_x:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            legend_x + 22.0
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\">{}</text>\n",
            legend_x + 28.0,
            ly + 4.0,
            escape_xml(&s.label)
        ));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn format_tick(value: f64) -> String {
    let s = format!("{value:.2}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn escape_xml(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
