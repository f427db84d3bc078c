//! Pattern/report CSV files and the JSON run configuration.
//!
//! All numeric CSV output uses 9 significant digits with `.` as the decimal
//! separator, LF line endings, and a trailing newline. Magnitudes in pattern
//! files are field (voltage) decibels, `20 log10`.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::FarFieldPattern;
use crate::link::{LinkReport, LinkRow, PatternInput, SweepConfig};
use crate::switched::{DynamicPattern, PatternSource, SwitchingSchedule};

pub const PATTERN_CSV_HEADER: &str = "angle_deg,mag_s1_db,phase_s1_deg,mag_s2_db,phase_s2_deg";
pub const REPORT_CSV_HEADER: &str =
    "angle_deg,gain1_abs,gain2_abs,ratio,phase_diff_deg,mag_err_rms,phase_err_rad,evm,ber,ser";

/// Format with 9 significant digits, trimming trailing zeros; plain decimal
/// for exponents in [-4, 9), scientific otherwise. Parsing the result and
/// formatting again reproduces the same bytes.
pub fn fmt_sig9(v: f64) -> String {
    if v.is_nan() {
        return "NaN".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.8e}", v);
    let (mant, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    let neg = mant.starts_with('-');
    let digits: Vec<u8> = mant.bytes().filter(|b| b.is_ascii_digit()).collect();
    debug_assert_eq!(digits.len(), 9);
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    if !(-4..9).contains(&exp) {
        let trimmed = trim_zeros(&digits);
        out.push(trimmed[0] as char);
        if trimmed.len() > 1 {
            out.push('.');
            out.push_str(std::str::from_utf8(&trimmed[1..]).unwrap());
        }
        out.push('e');
        out.push_str(&exp.to_string());
    } else if exp >= 0 {
        let int_len = (exp + 1) as usize;
        out.push_str(std::str::from_utf8(&digits[..int_len]).unwrap());
        let frac = trim_zeros(&digits[int_len..]);
        if !frac.is_empty() {
            out.push('.');
            out.push_str(std::str::from_utf8(frac).unwrap());
        }
    } else {
        out.push_str("0.");
        for _ in 0..(-exp - 1) {
            out.push('0');
        }
        out.push_str(std::str::from_utf8(trim_zeros(&digits)).unwrap());
    }
    out
}

fn trim_zeros(digits: &[u8]) -> &[u8] {
    let end = digits.iter().rposition(|&b| b != b'0').map_or(0, |i| i + 1);
    &digits[..end]
}

/// Serialize a dynamic pattern to the pattern CSV format.
pub fn pattern_to_csv(pattern: &DynamicPattern) -> String {
    let mut out = String::from(PATTERN_CSV_HEADER);
    out.push('\n');
    for ((&angle, g1), g2) in pattern
        .angles()
        .iter()
        .zip(pattern.state1().field())
        .zip(pattern.state2().field())
    {
        out.push_str(&fmt_sig9(angle.to_degrees()));
        for g in [g1, g2] {
            out.push(',');
            out.push_str(&fmt_sig9(20.0 * g.norm().log10()));
            out.push(',');
            out.push_str(&fmt_sig9(g.arg().to_degrees()));
        }
        out.push('\n');
    }
    out
}

pub fn save_pattern_csv(pattern: &DynamicPattern, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, pattern_to_csv(pattern)).map_err(|e| Error::io(path, e))
}

fn parse_f64(path: &Path, line_no: usize, field: &str) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        line: line_no,
        reason: format!("expected a number, got '{field}'"),
    })
}

fn read_rows(path: &Path, header: &str, columns: usize) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, first)) if first.trim_end() == header => {}
        Some((_, first)) => {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: 1,
                reason: format!("expected header '{header}', got '{first}'"),
            })
        }
        None => {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: 1,
                reason: "empty file".into(),
            })
        }
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != columns {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: idx + 1,
                reason: format!("expected {columns} columns, got {}", fields.len()),
            });
        }
        let mut row = Vec::with_capacity(columns);
        for field in fields {
            row.push(parse_f64(path, idx + 1, field)?);
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Load a measured dynamic pattern. Magnitudes are converted from field dB
/// (`10^(x/20)`) and phases from degrees to radians.
pub fn load_pattern_csv(path: impl AsRef<Path>) -> Result<DynamicPattern> {
    let path = path.as_ref();
    let rows = read_rows(path, PATTERN_CSV_HEADER, 5)?;
    if rows.len() < 2 {
        return Err(Error::validation(
            "pattern_file",
            format!("need at least 2 rows, got {}", rows.len()),
        ));
    }
    let angles: Vec<f64> = rows.iter().map(|r| r[0].to_radians()).collect();
    if !angles.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::validation(
            "pattern_file",
            "angles must be strictly increasing",
        ));
    }
    let gain = |db: f64, deg: f64| Complex64::from_polar(10f64.powf(db / 20.0), deg.to_radians());
    let raw1: Vec<Complex64> = rows.iter().map(|r| gain(r[1], r[2])).collect();
    let raw2: Vec<Complex64> = rows.iter().map(|r| gain(r[3], r[4])).collect();
    let state1 = FarFieldPattern::from_raw(angles.clone(), raw1, 1.0)?;
    let state2 = FarFieldPattern::from_raw(angles, raw2, 1.0)?;
    DynamicPattern::new(
        state1,
        state2,
        PatternSource::Measured {
            path: path.display().to_string(),
        },
    )
}

/// Serialize a link report to the report CSV format.
pub fn report_to_csv(report: &LinkReport) -> String {
    let mut out = String::from(REPORT_CSV_HEADER);
    out.push('\n');
    for row in &report.rows {
        let cells = [
            row.angle_deg,
            row.gain1_abs,
            row.gain2_abs,
            row.ratio,
            row.phase_diff_deg,
            row.mag_err_rms,
            row.phase_err_rad,
            row.evm,
            row.ber,
            row.ser,
        ];
        let line: Vec<String> = cells.iter().map(|&v| fmt_sig9(v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn save_report_csv(report: &LinkReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, report_to_csv(report)).map_err(|e| Error::io(path, e))
}

pub fn load_report_csv(path: impl AsRef<Path>) -> Result<LinkReport> {
    let path = path.as_ref();
    let rows = read_rows(path, REPORT_CSV_HEADER, 10)?;
    let rows = rows
        .into_iter()
        .map(|r| LinkRow {
            angle_deg: r[0],
            gain1_abs: r[1],
            gain2_abs: r[2],
            ratio: r[3],
            phase_diff_deg: r[4],
            mag_err_rms: r[5],
            phase_err_rad: r[6],
            evm: r[7],
            ber: r[8],
            ser: r[9],
        })
        .collect();
    Ok(LinkReport { rows })
}

fn default_angle_start() -> f64 {
    52.0
}
fn default_angle_stop() -> f64 {
    128.0
}
fn default_angle_step() -> f64 {
    2.0
}
fn default_order() -> usize {
    256
}
fn default_n_bits() -> usize {
    72_000
}
fn default_imbalance() -> f64 {
    45.0
}
fn default_calibration() -> f64 {
    90.0
}
fn default_schedule() -> String {
    "uniform".into()
}

/// Flat JSON run configuration. Unknown keys are rejected; missing keys
/// take the documented defaults. `pattern_file`, when set, overrides the
/// analytic imbalance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_angle_start")]
    pub angle_start_deg: f64,
    #[serde(default = "default_angle_stop")]
    pub angle_stop_deg: f64,
    #[serde(default = "default_angle_step")]
    pub angle_step_deg: f64,
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default = "default_n_bits")]
    pub n_bits: usize,
    #[serde(default = "default_imbalance")]
    pub imbalance_deg: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern_file: Option<String>,
    #[serde(default = "default_calibration")]
    pub calibration_angle_deg: f64,
    #[serde(default = "default_schedule")]
    pub schedule: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults are valid")
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_sweep_config(&self) -> Result<SweepConfig> {
        let pattern = match &self.pattern_file {
            Some(file) => PatternInput::Measured(load_pattern_csv(file)?),
            None => PatternInput::Analytic {
                imbalance_rad: self.imbalance_deg.to_radians(),
            },
        };
        Ok(SweepConfig {
            angle_start_deg: self.angle_start_deg,
            angle_stop_deg: self.angle_stop_deg,
            angle_step_deg: self.angle_step_deg,
            constellation_order: self.order,
            n_bits: self.n_bits,
            schedule: parse_schedule(&self.schedule)?,
            pattern,
            calibration_angle_deg: self.calibration_angle_deg,
            snr_db: self.snr_db,
            master_seed: self.seed,
            ..SweepConfig::default()
        })
    }
}

/// Parse a schedule key: `uniform` or `block:N`.
pub fn parse_schedule(text: &str) -> Result<SwitchingSchedule> {
    if text == "uniform" {
        return Ok(SwitchingSchedule::uniform());
    }
    if let Some(n) = text.strip_prefix("block:") {
        let n: usize = n
            .parse()
            .map_err(|_| Error::Config(format!("bad block length in schedule '{text}'")))?;
        return SwitchingSchedule::block(n);
    }
    Err(Error::Config(format!(
        "unknown schedule '{text}' (expected 'uniform' or 'block:N')"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::DipoleSpec;
    use crate::switched::mirrored_states;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn fmt_sig9_shapes() {
        assert_eq!(fmt_sig9(0.0), "0");
        assert_eq!(fmt_sig9(-0.0), "0");
        assert_eq!(fmt_sig9(52.0), "52");
        assert_eq!(fmt_sig9(0.5), "0.5");
        assert_eq!(fmt_sig9(-6.0206), "-6.0206");
        assert_eq!(fmt_sig9(1.0 / 7.0), "0.142857143");
        assert_eq!(fmt_sig9(8.0 / 7.0), "1.14285714");
        assert_eq!(fmt_sig9(1e-7), "1e-7");
        assert_eq!(fmt_sig9(-1.23456789e12), "-1.23456789e12");
        assert_eq!(fmt_sig9(0.0001), "0.0001");
        assert_eq!(fmt_sig9(f64::INFINITY), "inf");
        assert_eq!(fmt_sig9(f64::NEG_INFINITY), "-inf");
        assert_eq!(fmt_sig9(123456789.0), "123456789");
        assert_eq!(fmt_sig9(1234567890.0), "1.23456789e9");
    }

    #[test]
    fn fmt_sig9_reparse_fixpoint() {
        for &v in &[
            52.0,
            -6.020599913279624,
            1.0 / 3.0,
            0.8164965809277259,
            9.301384339e-13,
            f64::INFINITY,
        ] {
            let s = fmt_sig9(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(fmt_sig9(back), s, "value {v}");
        }
    }

    #[test]
    fn pattern_round_trip_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pattern.csv");
        fs::write(
            &path,
            format!("{PATTERN_CSV_HEADER}\n60,-6.0206,0,0,0\n90,0,0,0,0\n"),
        )
        .unwrap();
        let pat = load_pattern_csv(&path).unwrap();
        assert_eq!(pat.angles().len(), 2);
        assert_relative_eq!(pat.angles()[1], PI / 2.0, epsilon = 1e-12);
        // -6.0206 dB is 0.5 in amplitude
        assert_relative_eq!(pat.state1().field()[0].norm(), 0.5, epsilon = 1e-7);
        assert_relative_eq!(pat.state1().field()[1].re, 1.0, epsilon = 1e-15);
        assert_relative_eq!(pat.state1().field()[1].im, 0.0, epsilon = 1e-15);

        // save -> load -> save is byte-stable
        let first = pattern_to_csv(&pat);
        let path2 = dir.path().join("second.csv");
        fs::write(&path2, &first).unwrap();
        let again = load_pattern_csv(&path2).unwrap();
        assert_eq!(pattern_to_csv(&again), first);
    }

    #[test]
    fn pattern_save_load_analytic() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("analytic.csv");
        let spec = DipoleSpec::half_wave(crate::fields::DEFAULT_FREQUENCY_HZ).unwrap();
        let grid: Vec<f64> = crate::fields::angle_grid_deg(40.0, 140.0, 1.0)
            .into_iter()
            .map(f64::to_radians)
            .collect();
        let pat = mirrored_states(&spec, PI / 4.0, &grid).unwrap();
        save_pattern_csv(&pat, &path).unwrap();
        let loaded = load_pattern_csv(&path).unwrap();
        assert_eq!(loaded.angles().len(), pat.angles().len());
        for (a, b) in pat.state1().field().iter().zip(loaded.state1().field()) {
            assert_relative_eq!(a.norm(), b.norm(), max_relative = 1e-8);
        }
        // second save identical
        let path2 = dir.path().join("analytic2.csv");
        save_pattern_csv(&loaded, &path2).unwrap();
        assert_eq!(fs::read(&path).unwrap(), fs::read(&path2).unwrap());
    }

    #[test]
    fn pattern_nulls_round_trip_as_neg_inf_db() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nulls.csv");
        fs::write(
            &path,
            format!("{PATTERN_CSV_HEADER}\n60,-inf,0,0,0\n90,0,0,0,0\n"),
        )
        .unwrap();
        let pat = load_pattern_csv(&path).unwrap();
        assert_eq!(pat.state1().field()[0].norm(), 0.0);
        let first = pattern_to_csv(&pat);
        let path2 = dir.path().join("nulls2.csv");
        fs::write(&path2, &first).unwrap();
        assert_eq!(pattern_to_csv(&load_pattern_csv(&path2).unwrap()), first);
    }

    #[test]
    fn pattern_parse_errors_carry_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        fs::write(
            &path,
            format!("{PATTERN_CSV_HEADER}\n60,0,0,0,0\n70,zero,0,0,0\n"),
        )
        .unwrap();
        match load_pattern_csv(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }

        fs::write(&path, "not,a,header\n60,0,0,0,0\n").unwrap();
        match load_pattern_csv(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected header error, got {other:?}"),
        }

        fs::write(
            &path,
            format!("{PATTERN_CSV_HEADER}\n70,0,0,0,0\n60,0,0,0,0\n"),
        )
        .unwrap();
        assert!(matches!(
            load_pattern_csv(&path),
            Err(Error::Validation { .. })
        ));
    }

    #[test]
    fn report_csv_round_trip() {
        let report = LinkReport {
            rows: vec![LinkRow {
                angle_deg: 52.0,
                gain1_abs: 0.600243,
                gain2_abs: 0.814501,
                ratio: 1.356956,
                phase_diff_deg: 0.0,
                mag_err_rms: 0.123456789,
                phase_err_rad: 1e-12,
                evm: 0.2,
                ber: 0.015625,
                ser: 0.117,
            }],
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.csv");
        save_report_csv(&report, &path).unwrap();
        let loaded = load_report_csv(&path).unwrap();
        assert_eq!(loaded.rows.len(), 1);
        assert_eq!(loaded.rows[0].angle_deg, 52.0);
        assert_eq!(loaded.rows[0].ber, 0.015625);
        let path2 = dir.path().join("report2.csv");
        save_report_csv(&loaded, &path2).unwrap();
        assert_eq!(fs::read(&path).unwrap(), fs::read(&path2).unwrap());
    }

    #[test]
    fn empty_report_is_header_only() {
        let report = LinkReport::default();
        assert_eq!(report_to_csv(&report), format!("{REPORT_CSV_HEADER}\n"));
    }

    #[test]
    fn config_defaults_and_unknown_keys() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.angle_start_deg, 52.0);
        assert_eq!(cfg.angle_stop_deg, 128.0);
        assert_eq!(cfg.angle_step_deg, 2.0);
        assert_eq!(cfg.order, 256);
        assert_eq!(cfg.n_bits, 72_000);
        assert_eq!(cfg.imbalance_deg, 45.0);
        assert_eq!(cfg.calibration_angle_deg, 90.0);
        assert_eq!(cfg.schedule, "uniform");
        assert_eq!(cfg.snr_db, None);
        assert_eq!(cfg.seed, 0);

        assert!(RunConfig::from_json(r#"{"order": 16}"#).is_ok());
        assert!(matches!(
            RunConfig::from_json(r#"{"orderr": 16}"#),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn schedule_parsing() {
        assert_eq!(
            parse_schedule("uniform").unwrap(),
            SwitchingSchedule::uniform()
        );
        assert_eq!(
            parse_schedule("block:167").unwrap(),
            SwitchingSchedule::block(167).unwrap()
        );
        assert!(parse_schedule("block:0").is_err());
        assert!(parse_schedule("block:x").is_err());
        assert!(parse_schedule("duty").is_err());
    }

    #[test]
    fn missing_config_file_is_io_error() {
        let err = RunConfig::from_path("/nonexistent/config.json").unwrap_err();
        assert!(err.is_io());
    }
}
