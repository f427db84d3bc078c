//! Per-angle link experiment: state-dependent gains applied to a QAM
//! stream, blind mean-gain equalization, error metrics versus angle, and
//! extraction of the information beam.
//!
//! The receiver model is a blind equalizer that locks to the time-averaged
//! constellation it observes, so each angle is calibrated by the arithmetic
//! mean of the two state gains there. Under uniform switching that leaves
//! the effective state gains `2ρ/(1+ρ)` and `2/(1+ρ)`, which is what makes
//! the amplitude ratio ρ the security margin: data is recoverable exactly
//! where ρ stays below the constellation's crossing threshold.

use std::fmt;

use num_complex::Complex64;
use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{angle_grid_deg, default_angle_grid, wrap_phase, DipoleSpec};
use crate::modem::{
    awgn, error_metrics, make_constellation, prbs, QamConstellation, SymbolStream, PRBS_DEGREE,
    PRBS_SEED_ALL_ONES,
};
use crate::switched::{
    assign_states, gain_at, mirrored_states, AntennaState, DynamicPattern, SwitchingSchedule,
};

/// Channel applied after the antenna gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Channel {
    Noiseless,
    /// Additive white Gaussian noise at `snr_db` relative to the mean
    /// received symbol energy, drawn from a generator seeded with `seed`.
    Awgn {
        snr_db: f64,
        seed: u64,
    },
}

/// Apply the per-symbol state gain at `angle_rad` to a stream:
/// `y_i = g_{s_i}(θ) · x_i`, with states from the switching schedule.
pub fn transmit_at_angle(
    stream: &SymbolStream,
    pattern: &DynamicPattern,
    schedule: &SwitchingSchedule,
    angle_rad: f64,
    channel: &Channel,
) -> Result<Vec<Complex64>> {
    let g1 = gain_at(pattern.state1(), angle_rad)?;
    let g2 = gain_at(pattern.state2(), angle_rad)?;
    let states = assign_states(schedule, stream.n_symbols());
    let mut out: Vec<Complex64> = stream
        .symbols
        .iter()
        .zip(&states)
        .map(|(x, s)| match s {
            AntennaState::State1 => g1 * x,
            AntennaState::State2 => g2 * x,
        })
        .collect();
    if let Channel::Awgn { snr_db, seed } = channel {
        let mut rng = ChaCha8Rng::seed_from_u64(*seed);
        out = awgn(&out, *snr_db, &mut rng);
    }
    Ok(out)
}

/// Complex constant a blind receiver at `angle_rad` locks to: the mean of
/// the two state gains there. Receivers divide by it before demodulation.
pub fn calibrate_central(pattern: &DynamicPattern, angle_rad: f64) -> Result<Complex64> {
    let g1 = gain_at(pattern.state1(), angle_rad)?;
    let g2 = gain_at(pattern.state2(), angle_rad)?;
    let c = (g1 + g2) / 2.0;
    if c.norm() < 1e-12 {
        return Err(Error::DegenerateCalibration {
            angle_deg: angle_rad.to_degrees(),
            magnitude: c.norm(),
        });
    }
    Ok(c)
}

/// Per-angle amplitude ratio ρ(θ) = max(|g1|,|g2|) / min(|g1|,|g2|) over
/// the pattern grid. Angles where a state vanishes report `f64::INFINITY`.
pub fn amplitude_ratio(pattern: &DynamicPattern) -> Vec<f64> {
    pattern
        .state1()
        .field()
        .iter()
        .zip(pattern.state2().field())
        .map(|(a, b)| ratio_of(a.norm(), b.norm()))
        .collect()
}

fn ratio_of(m1: f64, m2: f64) -> f64 {
    let (lo, hi) = if m1 <= m2 { (m1, m2) } else { (m2, m1) };
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Smallest amplitude ratio at which a mean-calibrated constellation takes
/// a hard-decision error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatioThreshold {
    Finite(Ratio<i64>),
    /// No amplitude decision boundary exists (quadrant-only decisions),
    /// so no ratio alone can force an error.
    Unbounded,
}

impl RatioThreshold {
    pub fn value(&self) -> f64 {
        match self {
            RatioThreshold::Finite(r) => *r.numer() as f64 / *r.denom() as f64,
            RatioThreshold::Unbounded => f64::INFINITY,
        }
    }
}

impl fmt::Display for RatioThreshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RatioThreshold::Finite(r) => write!(f, "{r}"),
            RatioThreshold::Unbounded => write!(f, "inf"),
        }
    }
}

/// Exhaustive search for the crossing threshold ρ* of an M-QAM grid.
///
/// With mean-gain calibration the state gains are `a(ρ) = 2ρ/(1+ρ)` and
/// `b(ρ) = 2/(1+ρ)`. For every constellation point, every axis coordinate
/// `v` (odd integer units) and every decision boundary `β` (even integer
/// units), the ρ solving `a·v = β` or `b·v = β` is a candidate; the minimum
/// over all valid candidates is the first ratio at which some point leaves
/// its decision region. Candidates are exact rationals.
pub fn ratio_threshold(order: usize) -> Result<RatioThreshold> {
    let constellation = make_constellation(order)?;
    let side = constellation.side() as i64;
    let mut best: Option<Ratio<i64>> = None;
    let mut consider = |candidate: Ratio<i64>| {
        if candidate > Ratio::from_integer(1) && best.is_none_or(|b| candidate < b) {
            best = Some(candidate);
        }
    };
    for point in 0..order {
        let i_idx = (point / constellation.side()) as i64;
        let q_idx = (point % constellation.side()) as i64;
        for coord in [2 * i_idx - (side - 1), 2 * q_idx - (side - 1)] {
            let v = coord.abs();
            // boundaries sit at the even integers between adjacent levels
            for j in 0..side - 1 {
                let beta = (2 * j + 1 - (side - 1)).abs();
                if beta == 0 {
                    // the sign boundary; positive gains never cross it
                    continue;
                }
                if beta > v && 2 * v - beta > 0 {
                    // amplified state crosses outward: 2ρv/(1+ρ) = β
                    consider(Ratio::new(beta, 2 * v - beta));
                }
                if beta < v {
                    // attenuated state crosses inward: 2v/(1+ρ) = β
                    consider(Ratio::new(2 * v - beta, beta));
                }
            }
        }
    }
    Ok(match best {
        Some(r) => RatioThreshold::Finite(r),
        None => RatioThreshold::Unbounded,
    })
}

/// Mean-calibrated state gains for a given amplitude ratio.
pub fn calibrated_state_gains(rho: f64) -> (f64, f64) {
    (2.0 * rho / (1.0 + rho), 2.0 / (1.0 + rho))
}

/// Count symbol errors when every constellation point is sent once through
/// each mean-calibrated state gain; the brute-force check of
/// [`ratio_threshold`].
pub fn constellation_sweep_errors(constellation: &QamConstellation, rho: f64) -> usize {
    let (a, b) = calibrated_state_gains(rho);
    let mut errors = 0;
    for &p in constellation.points() {
        for gain in [a, b] {
            let decided = crate::modem::demodulate_hard(&[p * gain], constellation);
            let reference = crate::modem::demodulate_hard(&[p], constellation);
            if decided != reference {
                errors += 1;
            }
        }
    }
    errors
}

/// What feeds the sweep's dynamic pattern.
#[derive(Debug, Clone)]
pub enum PatternInput {
    /// Mirrored states computed from the dipole model at this imbalance,
    /// evaluated over the default half-degree grid.
    Analytic { imbalance_rad: f64 },
    /// A pattern supplied externally, e.g. loaded from a measured file.
    Measured(DynamicPattern),
}

/// Full configuration of a per-angle sweep.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub angle_start_deg: f64,
    pub angle_stop_deg: f64,
    pub angle_step_deg: f64,
    pub constellation_order: usize,
    pub n_bits: usize,
    pub schedule: SwitchingSchedule,
    pub pattern: PatternInput,
    pub calibration_angle_deg: f64,
    /// `None` models the noise-free channel.
    pub snr_db: Option<f64>,
    pub master_seed: u64,
    pub dipole: DipoleSpec,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            angle_start_deg: 52.0,
            angle_stop_deg: 128.0,
            angle_step_deg: 2.0,
            constellation_order: 256,
            n_bits: 72_000,
            schedule: SwitchingSchedule::uniform(),
            pattern: PatternInput::Analytic {
                imbalance_rad: 45f64.to_radians(),
            },
            calibration_angle_deg: 90.0,
            snr_db: None,
            master_seed: 0,
            dipole: DipoleSpec::half_wave(crate::fields::DEFAULT_FREQUENCY_HZ)
                .expect("default dipole is valid"),
        }
    }
}

impl SweepConfig {
    fn validate(&self, constellation: &QamConstellation) -> Result<()> {
        if !self.angle_start_deg.is_finite()
            || !self.angle_stop_deg.is_finite()
            || self.angle_start_deg >= self.angle_stop_deg
        {
            return Err(Error::validation(
                "angle_start_deg",
                format!(
                    "start {} must be below stop {}",
                    self.angle_start_deg, self.angle_stop_deg
                ),
            ));
        }
        if !self.angle_step_deg.is_finite() || self.angle_step_deg <= 0.0 {
            return Err(Error::validation(
                "angle_step_deg",
                format!("must be positive, got {}", self.angle_step_deg),
            ));
        }
        let m = constellation.bits_per_symbol();
        if self.n_bits == 0 || !self.n_bits.is_multiple_of(m) {
            return Err(Error::validation(
                "n_bits",
                format!(
                    "{} is not a positive multiple of log2(M) = {m}",
                    self.n_bits
                ),
            ));
        }
        if !self.calibration_angle_deg.is_finite() {
            return Err(Error::validation("calibration_angle_deg", "must be finite"));
        }
        Ok(())
    }

    /// The sweep's row angles, degrees.
    pub fn angles_deg(&self) -> Vec<f64> {
        angle_grid_deg(
            self.angle_start_deg,
            self.angle_stop_deg,
            self.angle_step_deg,
        )
    }

    /// Resolve the configured pattern input to a concrete pattern.
    pub fn build_pattern(&self) -> Result<DynamicPattern> {
        match &self.pattern {
            PatternInput::Analytic { imbalance_rad } => {
                mirrored_states(&self.dipole, *imbalance_rad, &default_angle_grid())
            }
            PatternInput::Measured(pattern) => Ok(pattern.clone()),
        }
    }
}

/// One sweep row; fields mirror the report CSV columns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkRow {
    pub angle_deg: f64,
    pub gain1_abs: f64,
    pub gain2_abs: f64,
    pub ratio: f64,
    pub phase_diff_deg: f64,
    pub mag_err_rms: f64,
    pub phase_err_rad: f64,
    pub evm: f64,
    pub ber: f64,
    pub ser: f64,
}

/// Sweep result: one row per grid angle, sorted by angle.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinkReport {
    pub rows: Vec<LinkRow>,
}

impl LinkReport {
    pub fn row_at(&self, angle_deg: f64) -> Option<&LinkRow> {
        self.rows
            .iter()
            .find(|r| (r.angle_deg - angle_deg).abs() < 1e-9)
    }
}

/// PRBS register for a sweep row: the low 11 bits of
/// `master_seed XOR row_index`, substituting all-ones for zero.
pub fn row_prbs_seed(master_seed: u64, row_index: usize) -> u16 {
    let reg = ((master_seed ^ row_index as u64) & 0x7FF) as u16;
    if reg == 0 {
        PRBS_SEED_ALL_ONES
    } else {
        reg
    }
}

/// Run the full per-angle experiment. Rows are independent and evaluated in
/// parallel, then merged in angle order; a fixed config yields a
/// bit-identical report regardless of thread scheduling.
pub fn angle_sweep(config: &SweepConfig) -> Result<LinkReport> {
    let constellation = make_constellation(config.constellation_order)?;
    config.validate(&constellation)?;
    let pattern = config.build_pattern()?;
    let angles = config.angles_deg();
    let rows = angles
        .par_iter()
        .enumerate()
        .map(|(idx, &angle_deg)| {
            sweep_row(config, &constellation, &pattern, idx, angle_deg)
                .map_err(|e| Error::at_angle(angle_deg, e))
        })
        .collect::<Result<Vec<LinkRow>>>()?;
    Ok(LinkReport { rows })
}

fn sweep_row(
    config: &SweepConfig,
    constellation: &QamConstellation,
    pattern: &DynamicPattern,
    idx: usize,
    angle_deg: f64,
) -> Result<LinkRow> {
    let angle = angle_deg.to_radians();
    let g1 = gain_at(pattern.state1(), angle)?;
    let g2 = gain_at(pattern.state2(), angle)?;

    let bits = prbs(
        PRBS_DEGREE,
        config.n_bits,
        row_prbs_seed(config.master_seed, idx),
    )?;
    let stream = SymbolStream::from_bits(bits, constellation)?;
    let channel = match config.snr_db {
        None => Channel::Noiseless,
        Some(snr_db) => Channel::Awgn {
            snr_db,
            seed: config.master_seed ^ idx as u64,
        },
    };
    let received = transmit_at_angle(&stream, pattern, &config.schedule, angle, &channel)?;
    let c = calibrate_central(pattern, angle)?;
    let calibrated: Vec<Complex64> = received.iter().map(|y| y / c).collect();
    let metrics = error_metrics(&calibrated, &stream.symbols, &stream.bits, constellation)?;

    Ok(LinkRow {
        angle_deg,
        gain1_abs: g1.norm(),
        gain2_abs: g2.norm(),
        ratio: ratio_of(g1.norm(), g2.norm()),
        phase_diff_deg: wrap_phase(g1.arg() - g2.arg()).to_degrees(),
        mag_err_rms: metrics.magnitude_error_rms,
        phase_err_rad: metrics.phase_error_mean,
        evm: metrics.evm_rms,
        ber: metrics.ber,
        ser: metrics.ser,
    })
}

/// Pass/fail rule for beam extraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BeamCriterion {
    BerBelow(f64),
    RatioBelow(f64),
}

impl BeamCriterion {
    fn passes(&self, row: &LinkRow) -> bool {
        match self {
            BeamCriterion::BerBelow(tau) => row.ber < *tau,
            // infinite-ratio rows fail every ratio criterion
            BeamCriterion::RatioBelow(rho) => row.ratio < *rho,
        }
    }
}

/// The angular window around the anchor angle in which the criterion holds.
///
/// Edges are midpoints between the last passing and first failing rows
/// (clamped to the sweep ends). When the pass set is not one contiguous
/// run, `contiguous` is false and the window still describes the run
/// containing the anchor; `passing_angles_deg` always lists the full pass
/// set. An empty pass set (or a failing anchor row) collapses the window
/// to zero width at the anchor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InformationBeam {
    pub criterion: BeamCriterion,
    pub lower_edge_deg: f64,
    pub upper_edge_deg: f64,
    pub width_deg: f64,
    pub contiguous: bool,
    pub passing_angles_deg: Vec<f64>,
}

impl InformationBeam {
    pub fn is_empty(&self) -> bool {
        self.width_deg == 0.0
    }

    pub fn contains(&self, angle_deg: f64) -> bool {
        angle_deg >= self.lower_edge_deg && angle_deg <= self.upper_edge_deg
    }
}

pub fn information_beam(
    report: &LinkReport,
    criterion: BeamCriterion,
    anchor_angle_deg: f64,
) -> InformationBeam {
    let rows = &report.rows;
    let pass: Vec<bool> = rows.iter().map(|r| criterion.passes(r)).collect();
    let passing_angles_deg: Vec<f64> = rows
        .iter()
        .zip(&pass)
        .filter(|(_, p)| **p)
        .map(|(r, _)| r.angle_deg)
        .collect();

    let contiguous = match (pass.iter().position(|p| *p), pass.iter().rposition(|p| *p)) {
        (Some(first), Some(last)) => pass[first..=last].iter().all(|p| *p),
        _ => true,
    };

    let empty = InformationBeam {
        criterion,
        lower_edge_deg: anchor_angle_deg,
        upper_edge_deg: anchor_angle_deg,
        width_deg: 0.0,
        contiguous,
        passing_angles_deg: passing_angles_deg.clone(),
    };
    if rows.is_empty() {
        return empty;
    }

    // row nearest the anchor
    let anchor_idx = rows
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| {
            (a.angle_deg - anchor_angle_deg)
                .abs()
                .total_cmp(&(b.angle_deg - anchor_angle_deg).abs())
        })
        .map(|(i, _)| i)
        .unwrap();
    if !pass[anchor_idx] {
        return empty;
    }

    let mut lo = anchor_idx;
    while lo > 0 && pass[lo - 1] {
        lo -= 1;
    }
    let mut hi = anchor_idx;
    while hi + 1 < rows.len() && pass[hi + 1] {
        hi += 1;
    }
    let lower_edge_deg = if lo == 0 {
        rows[0].angle_deg
    } else {
        (rows[lo - 1].angle_deg + rows[lo].angle_deg) / 2.0
    };
    let upper_edge_deg = if hi + 1 == rows.len() {
        rows[hi].angle_deg
    } else {
        (rows[hi].angle_deg + rows[hi + 1].angle_deg) / 2.0
    };

    InformationBeam {
        criterion,
        lower_edge_deg,
        upper_edge_deg,
        width_deg: upper_edge_deg - lower_edge_deg,
        contiguous,
        passing_angles_deg,
    }
}
