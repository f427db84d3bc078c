//! Mirrored two-state dynamic patterns and symbol-rate state switching.
//!
//! Swapping which arm leads in phase mirrors the skewed amplitude pattern
//! about broadside, so the two states agree only at the mirror angle. Both
//! states are scaled by one shared constant so the inter-state ratio stays
//! physical; normalizing each state on its own would erase the amplitude
//! dynamics that carry the security effect.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fields::{
    excite_arms, far_field_unnormalized, wrap_phase, ArmExcitation, DipoleSpec, FarFieldPattern,
};

/// Where a dynamic pattern came from.
#[derive(Debug, Clone, PartialEq)]
pub enum PatternSource {
    /// Built from the dipole model with the given arm-phase imbalance.
    Analytic { imbalance_rad: f64 },
    /// Loaded from a measured pattern file.
    Measured { path: String },
}

/// The two mirrored far-field states sharing one angle grid and one
/// normalization constant.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicPattern {
    state1: FarFieldPattern,
    state2: FarFieldPattern,
    source: PatternSource,
}

impl DynamicPattern {
    pub fn new(
        state1: FarFieldPattern,
        state2: FarFieldPattern,
        source: PatternSource,
    ) -> Result<Self> {
        if state1.angles() != state2.angles() {
            return Err(Error::validation(
                "state2",
                "both states must share an identical angle grid",
            ));
        }
        Ok(Self {
            state1,
            state2,
            source,
        })
    }

    pub fn state1(&self) -> &FarFieldPattern {
        &self.state1
    }

    pub fn state2(&self) -> &FarFieldPattern {
        &self.state2
    }

    pub fn source(&self) -> &PatternSource {
        &self.source
    }

    pub fn angles(&self) -> &[f64] {
        self.state1.angles()
    }

    /// Rotate state 2 by a constant phase, modeling a differential phase
    /// bias between the two switch paths. The default pipeline assumes the
    /// bias has been calibrated out (bias 0).
    pub fn with_phase_bias(mut self, bias_rad: f64) -> Self {
        if bias_rad != 0.0 {
            let rot = Complex64::from_polar(1.0, bias_rad);
            let field: Vec<Complex64> = self.state2.field().iter().map(|&v| v * rot).collect();
            let angles = self.state2.angles().to_vec();
            let peak = self.state2.peak_magnitude();
            self.state2 = FarFieldPattern::from_raw(
                angles,
                field.into_iter().map(|v| v * peak).collect(),
                peak,
            )
            .expect("rotating a valid pattern keeps it valid");
        }
        self
    }
}

/// Build the mirrored state pair for an arm-phase imbalance `φ`:
/// state 1 drives the right arm `φ` ahead, state 2 the left arm. Both
/// states are divided by the shared pre-normalization peak magnitude.
pub fn mirrored_states(
    spec: &DipoleSpec,
    imbalance_rad: f64,
    angles: &[f64],
) -> Result<DynamicPattern> {
    if !imbalance_rad.is_finite() || !(0.0..std::f64::consts::PI).contains(&imbalance_rad) {
        return Err(Error::Domain(format!(
            "imbalance must lie in [0, pi), got {imbalance_rad}"
        )));
    }
    let exc1 = ArmExcitation::new(0.0, imbalance_rad)?;
    let exc2 = ArmExcitation::new(imbalance_rad, 0.0)?;
    let raw1 = far_field_unnormalized(&excite_arms(spec, &exc1), angles)?;
    let raw2 = far_field_unnormalized(&excite_arms(spec, &exc2), angles)?;
    let peak = raw1
        .iter()
        .chain(&raw2)
        .map(|v| v.norm())
        .fold(0.0_f64, f64::max);
    let state1 = FarFieldPattern::from_raw(angles.to_vec(), raw1, peak)?;
    let state2 = FarFieldPattern::from_raw(angles.to_vec(), raw2, peak)?;
    DynamicPattern::new(state1, state2, PatternSource::Analytic { imbalance_rad })
}

/// Complex gain of a pattern at an arbitrary angle inside the grid span.
/// Magnitude interpolates linearly between the bracketing samples; phase
/// interpolates linearly after unwrapping across the pair.
pub fn gain_at(pattern: &FarFieldPattern, angle: f64) -> Result<Complex64> {
    let angles = pattern.angles();
    let first = angles[0];
    let last = angles[angles.len() - 1];
    if !(angle >= first && angle <= last) {
        return Err(Error::Domain(format!(
            "angle {angle} outside pattern span [{first}, {last}]"
        )));
    }
    let hi = angles.partition_point(|&a| a < angle);
    if hi < angles.len() && angles[hi] == angle {
        return Ok(pattern.field()[hi]);
    }
    let lo = hi - 1;
    let t = (angle - angles[lo]) / (angles[hi] - angles[lo]);
    let f0 = pattern.field()[lo];
    let f1 = pattern.field()[hi];
    let mag = f0.norm() + t * (f1.norm() - f0.norm());
    let p0 = f0.arg();
    let dp = wrap_phase(f1.arg() - p0);
    Ok(Complex64::from_polar(mag, p0 + t * dp))
}

/// Which of the two mirrored states the antenna is in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AntennaState {
    State1,
    State2,
}

impl AntennaState {
    pub fn other(self) -> Self {
        match self {
            AntennaState::State1 => AntennaState::State2,
            AntennaState::State2 => AntennaState::State1,
        }
    }

    /// 1-based label as printed in reports.
    pub fn label(self) -> u8 {
        match self {
            AntennaState::State1 => 1,
            AntennaState::State2 => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum ScheduleMode {
    /// Alternate every symbol; equivalent to `Block(1)`.
    Uniform,
    /// Hold each state for a fixed number of symbols.
    Block(usize),
    /// Within each period, the leading fraction of symbols carries the
    /// start state and the remainder the other.
    Duty { fraction: f64, period: usize },
}

/// Assigns an antenna state to every transmitted symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchingSchedule {
    mode: ScheduleMode,
    start_state: AntennaState,
}

impl SwitchingSchedule {
    pub fn uniform() -> Self {
        Self {
            mode: ScheduleMode::Uniform,
            start_state: AntennaState::State1,
        }
    }

    pub fn block(block_length: usize) -> Result<Self> {
        if block_length < 1 {
            return Err(Error::validation("block_length", "must be >= 1"));
        }
        Ok(Self {
            mode: ScheduleMode::Block(block_length),
            start_state: AntennaState::State1,
        })
    }

    pub fn duty(fraction: f64, period: usize) -> Result<Self> {
        if !(fraction > 0.0 && fraction < 1.0) {
            return Err(Error::validation(
                "fraction",
                format!("must lie in (0, 1), got {fraction}"),
            ));
        }
        if period < 1 {
            return Err(Error::validation("period", "must be >= 1"));
        }
        Ok(Self {
            mode: ScheduleMode::Duty { fraction, period },
            start_state: AntennaState::State1,
        })
    }

    /// Block schedule matching a square-wave switch clock:
    /// `block_length = round(symbol_rate / (2 · switch_rate))`.
    pub fn from_rates(symbol_rate_hz: f64, switch_rate_hz: f64) -> Result<Self> {
        if !(symbol_rate_hz > 0.0 && switch_rate_hz > 0.0) {
            return Err(Error::validation(
                "switch_rate",
                "symbol and switch rates must be positive",
            ));
        }
        let block = (symbol_rate_hz / (2.0 * switch_rate_hz)).round() as usize;
        Self::block(block.max(1))
    }

    pub fn with_start_state(mut self, start_state: AntennaState) -> Self {
        self.start_state = start_state;
        self
    }

    pub fn start_state(&self) -> AntennaState {
        self.start_state
    }
}

/// State label per symbol under the given schedule.
pub fn assign_states(schedule: &SwitchingSchedule, n_symbols: usize) -> Vec<AntennaState> {
    let start = schedule.start_state;
    let pick = |first: bool| if first { start } else { start.other() };
    match schedule.mode {
        ScheduleMode::Uniform => (0..n_symbols).map(|i| pick(i % 2 == 0)).collect(),
        ScheduleMode::Block(b) => (0..n_symbols).map(|i| pick((i / b) % 2 == 0)).collect(),
        ScheduleMode::Duty { fraction, period } => {
            let lead = (fraction * period as f64).round() as usize;
            (0..n_symbols).map(|i| pick(i % period < lead)).collect()
        }
    }
}
