//! Dipole current models and far-field radiation patterns.
//!
//! A center-fed dipole carries a sinusoidal standing-wave current that
//! vanishes at the wire ends. Driving the two arms with unequal phases
//! superposes a common-mode component on the usual differential-mode
//! current, which skews the far-field amplitude pattern to one side while
//! leaving the phase pattern flat. The operations here sample that current,
//! apply per-arm complex weights, and evaluate the radiation integral
//!
//! ```text
//! field(θ) ∝ sin θ · ∫ I(z') e^{j k z' cos θ} dz'
//! ```
//!
//! by composite Simpson quadrature over each arm. The common range-dependent
//! prefactor is dropped: patterns are range-free and peak-normalized, since
//! only relative per-angle gains matter downstream.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Operating frequency of the reference design, hertz.
pub const DEFAULT_FREQUENCY_HZ: f64 = 1.86e9;

/// Default polar-angle grid: 0.5 degree steps over (0, 180) exclusive.
pub fn default_angle_grid() -> Vec<f64> {
    angle_grid_deg(0.5, 179.5, 0.5)
        .into_iter()
        .map(f64::to_radians)
        .collect()
}

/// Inclusive degree grid `start, start+step, ..` up to `stop` (within 1e-9).
pub fn angle_grid_deg(start_deg: f64, stop_deg: f64, step_deg: f64) -> Vec<f64> {
    let n = ((stop_deg - start_deg) / step_deg + 1e-9).floor() as usize + 1;
    (0..n).map(|i| start_deg + i as f64 * step_deg).collect()
}

/// Wrap a phase into (−π, π].
pub fn wrap_phase(x: f64) -> f64 {
    let w = x.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// Geometry and excitation scale of a center-fed dipole.
///
/// `arm_samples` is the number of quadrature points per arm (feed and arm
/// end included). It must be odd so each arm has an even number of Simpson
/// subintervals, and at least 257 so the quadrature meets its accuracy
/// budget against the half-wave closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct DipoleSpec {
    length_m: f64,
    frequency_hz: f64,
    current_peak: f64,
    arm_samples: usize,
}

impl DipoleSpec {
    pub const DEFAULT_ARM_SAMPLES: usize = 1025;
    pub const MIN_ARM_SAMPLES: usize = 257;

    pub fn new(length_m: f64, frequency_hz: f64) -> Result<Self> {
        Self::with_options(length_m, frequency_hz, 1.0, Self::DEFAULT_ARM_SAMPLES)
    }

    /// Half-wavelength dipole at the given frequency.
    pub fn half_wave(frequency_hz: f64) -> Result<Self> {
        if !frequency_hz.is_finite() || frequency_hz <= 0.0 {
            return Err(Error::validation(
                "frequency",
                format!("must be finite and positive, got {frequency_hz}"),
            ));
        }
        Self::new(SPEED_OF_LIGHT / frequency_hz / 2.0, frequency_hz)
    }

    pub fn with_options(
        length_m: f64,
        frequency_hz: f64,
        current_peak: f64,
        arm_samples: usize,
    ) -> Result<Self> {
        if !length_m.is_finite() || length_m <= 0.0 {
            return Err(Error::validation(
                "length",
                format!("must be finite and positive, got {length_m}"),
            ));
        }
        if !frequency_hz.is_finite() || frequency_hz <= 0.0 {
            return Err(Error::validation(
                "frequency",
                format!("must be finite and positive, got {frequency_hz}"),
            ));
        }
        if !current_peak.is_finite() || current_peak <= 0.0 {
            return Err(Error::validation(
                "current_peak",
                format!("must be finite and positive, got {current_peak}"),
            ));
        }
        if arm_samples.is_multiple_of(2) || arm_samples < Self::MIN_ARM_SAMPLES {
            return Err(Error::validation(
                "arm_samples",
                format!(
                    "must be odd and >= {}, got {arm_samples}",
                    Self::MIN_ARM_SAMPLES
                ),
            ));
        }
        let spec = Self {
            length_m,
            frequency_hz,
            current_peak,
            arm_samples,
        };
        debug_assert!(spec.wavelength().is_finite() && spec.wavelength() > 0.0);
        debug_assert!(spec.wavenumber().is_finite() && spec.wavenumber() > 0.0);
        Ok(spec)
    }

    pub fn length(&self) -> f64 {
        self.length_m
    }

    pub fn frequency(&self) -> f64 {
        self.frequency_hz
    }

    pub fn current_peak(&self) -> f64 {
        self.current_peak
    }

    pub fn arm_samples(&self) -> usize {
        self.arm_samples
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.frequency_hz
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength()
    }
}

/// The pair of arm phases (radians) driving the dipole, stored wrapped to
/// (−π, π]. Equal phases reproduce the ordinary differential feed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmExcitation {
    phase_left: f64,
    phase_right: f64,
}

impl ArmExcitation {
    pub fn new(phase_left: f64, phase_right: f64) -> Result<Self> {
        if !phase_left.is_finite() {
            return Err(Error::validation("phase_left", "must be finite"));
        }
        if !phase_right.is_finite() {
            return Err(Error::validation("phase_right", "must be finite"));
        }
        Ok(Self {
            phase_left: wrap_phase(phase_left),
            phase_right: wrap_phase(phase_right),
        })
    }

    pub fn symmetric() -> Self {
        Self {
            phase_left: 0.0,
            phase_right: 0.0,
        }
    }

    pub fn phase_left(&self) -> f64 {
        self.phase_left
    }

    pub fn phase_right(&self) -> f64 {
        self.phase_right
    }

    pub fn is_symmetric(&self) -> bool {
        self.phase_left == self.phase_right
    }

    pub fn weight_left(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.phase_left)
    }

    pub fn weight_right(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.phase_right)
    }
}

/// Symmetric/anti-symmetric split of the arm weights.
///
/// `differential` is the part shared by both arms and `common` the part that
/// runs in opposite directions on them; `differential ± common` recovers the
/// left/right weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSplit {
    pub differential: Complex64,
    pub common: Complex64,
}

pub fn mode_decompose(exc: &ArmExcitation) -> ModeSplit {
    let wl = exc.weight_left();
    let wr = exc.weight_right();
    ModeSplit {
        differential: (wl + wr) / 2.0,
        common: (wl - wr) / 2.0,
    }
}

/// Complex current samples along the dipole axis, spanning [−L/2, L/2] with
/// a sample at the feed (z = 0). Carries the wavenumber so the radiation
/// integral can be evaluated without the originating [`DipoleSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct CurrentDistribution {
    positions: Vec<f64>,
    values: Vec<Complex64>,
    wavenumber: f64,
}

/// Largest current magnitude tolerated at the arm ends.
const ENDPOINT_NULL_TOL: f64 = 1e-12;

impl CurrentDistribution {
    pub fn new(positions: Vec<f64>, values: Vec<Complex64>, wavenumber: f64) -> Result<Self> {
        if positions.len() != values.len() {
            return Err(Error::validation(
                "positions",
                format!(
                    "length {} does not match values length {}",
                    positions.len(),
                    values.len()
                ),
            ));
        }
        if positions.len() < 3 {
            return Err(Error::validation("positions", "need at least 3 samples"));
        }
        if !positions.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::validation(
                "positions",
                "must be strictly increasing",
            ));
        }
        if !wavenumber.is_finite() || wavenumber <= 0.0 {
            return Err(Error::validation(
                "wavenumber",
                format!("must be finite and positive, got {wavenumber}"),
            ));
        }
        let first = values.first().unwrap().norm();
        let last = values.last().unwrap().norm();
        if first > ENDPOINT_NULL_TOL || last > ENDPOINT_NULL_TOL {
            return Err(Error::validation(
                "values",
                format!("current must vanish at the arm ends, got |I| = {first:e}, {last:e}"),
            ));
        }
        Ok(Self {
            positions,
            values,
            wavenumber,
        })
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn wavenumber(&self) -> f64 {
        self.wavenumber
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Index of the feed sample, or an error if the grid has no center
    /// sample or an arm is too short for Simpson quadrature.
    fn feed_index(&self) -> Result<usize> {
        if self.len().is_multiple_of(2) {
            return Err(Error::Quadrature(
                "current grid must have an odd sample count with a feed sample at z = 0".into(),
            ));
        }
        let mid = self.len() / 2;
        let span = self.positions.last().unwrap() - self.positions.first().unwrap();
        if self.positions[mid].abs() > 1e-9 * span {
            return Err(Error::Quadrature(format!(
                "center sample must sit at z = 0, got z = {}",
                self.positions[mid]
            )));
        }
        // each arm needs an even, nonzero number of subintervals
        if mid < 2 || !mid.is_multiple_of(2) {
            return Err(Error::Quadrature(format!(
                "need an odd number >= 3 of samples per arm, got {}",
                mid + 1
            )));
        }
        Ok(mid)
    }
}

/// Standing-wave current of a center-fed dipole:
/// `I(z) = I_m sin(k (L/2 − |z|))`, sampled at `2·arm_samples − 1`
/// points placed symmetrically about the feed.
pub fn sinusoidal_current(spec: &DipoleSpec) -> CurrentDistribution {
    let n = spec.arm_samples();
    let half = spec.length() / 2.0;
    let k = spec.wavenumber();
    let mut positions = Vec::with_capacity(2 * n - 1);
    // right-arm offsets hit 0 and L/2 exactly; mirror them for the left arm
    for i in (1..n).rev() {
        positions.push(-(half * (i as f64 / (n - 1) as f64)));
    }
    for i in 0..n {
        positions.push(half * (i as f64 / (n - 1) as f64));
    }
    let values = positions
        .iter()
        .map(|&z| Complex64::new(spec.current_peak() * (k * (half - z.abs())).sin(), 0.0))
        .collect();
    CurrentDistribution {
        positions,
        values,
        wavenumber: k,
    }
}

/// Sinusoidal dipole current with per-arm phase weights applied: left-arm
/// samples (z < 0) carry `e^{jθ_L}`, right-arm samples `e^{jθ_R}`, and the
/// shared feed sample the average of the two weights.
pub fn excite_arms(spec: &DipoleSpec, exc: &ArmExcitation) -> CurrentDistribution {
    let base = sinusoidal_current(spec);
    let wl = exc.weight_left();
    let wr = exc.weight_right();
    let wc = (wl + wr) / 2.0;
    let values = base
        .positions
        .iter()
        .zip(&base.values)
        .map(|(&z, &v)| {
            let w = if z < 0.0 {
                wl
            } else if z > 0.0 {
                wr
            } else {
                wc
            };
            v * w
        })
        .collect();
    CurrentDistribution {
        positions: base.positions,
        values,
        wavenumber: base.wavenumber,
    }
}

/// Composite Simpson over uniformly spaced complex samples.
fn simpson(positions: &[f64], values: &[Complex64]) -> Complex64 {
    let n = positions.len() - 1;
    debug_assert!(n >= 2 && n.is_multiple_of(2));
    let h = (positions[n] - positions[0]) / n as f64;
    let mut sum = values[0] + values[n];
    for (i, v) in values.iter().enumerate().take(n).skip(1) {
        sum += *v * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    sum * (h / 3.0)
}

fn validate_angles(angles: &[f64]) -> Result<()> {
    for &a in angles {
        if !(a > 0.0 && a < PI) {
            return Err(Error::Domain(format!(
                "polar angle must lie in (0, pi), got {a}"
            )));
        }
    }
    if !angles.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::Domain(
            "angle grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Raw (un-normalized) radiation integral per angle:
/// `sin θ · ∫ I(z') e^{j k z' cos θ} dz'`, Simpson per arm.
pub fn far_field_unnormalized(
    current: &CurrentDistribution,
    angles: &[f64],
) -> Result<Vec<Complex64>> {
    if angles.is_empty() {
        return Err(Error::Domain("angle grid must not be empty".into()));
    }
    validate_angles(angles)?;
    let mid = current.feed_index()?;
    let k = current.wavenumber();
    let field = angles
        .iter()
        .map(|&theta| {
            let kcos = k * theta.cos();
            let weighted: Vec<Complex64> = current
                .positions
                .iter()
                .zip(&current.values)
                .map(|(&z, &v)| v * Complex64::from_polar(1.0, kcos * z))
                .collect();
            let left = simpson(&current.positions[..=mid], &weighted[..=mid]);
            let right = simpson(&current.positions[mid..], &weighted[mid..]);
            (left + right) * theta.sin()
        })
        .collect();
    Ok(field)
}

/// Complex far-field pattern over an angle grid, normalized to unit peak
/// magnitude. Normalization divides by a positive real constant, so every
/// sample keeps the phase of the raw integral.
#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldPattern {
    angles: Vec<f64>,
    field: Vec<Complex64>,
    peak_magnitude: f64,
}

impl FarFieldPattern {
    /// Build from raw field values, dividing by `peak_magnitude`.
    pub(crate) fn from_raw(
        angles: Vec<f64>,
        raw: Vec<Complex64>,
        peak_magnitude: f64,
    ) -> Result<Self> {
        if angles.len() != raw.len() || angles.len() < 2 {
            return Err(Error::validation(
                "angles",
                "grid and field must have equal length >= 2",
            ));
        }
        if !(peak_magnitude.is_finite() && peak_magnitude > 0.0) {
            return Err(Error::validation(
                "field",
                format!("peak magnitude must be positive, got {peak_magnitude:e}"),
            ));
        }
        let field = raw.into_iter().map(|v| v / peak_magnitude).collect();
        Ok(Self {
            angles,
            field,
            peak_magnitude,
        })
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn field(&self) -> &[Complex64] {
        &self.field
    }

    /// The positive real constant the raw integral was divided by.
    pub fn peak_magnitude(&self) -> f64 {
        self.peak_magnitude
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }
}

/// Far-field pattern of the given current, peak-normalized over the grid.
pub fn far_field(current: &CurrentDistribution, angles: &[f64]) -> Result<FarFieldPattern> {
    let raw = far_field_unnormalized(current, angles)?;
    let peak = raw.iter().map(|v| v.norm()).fold(0.0_f64, f64::max);
    FarFieldPattern::from_raw(angles.to_vec(), raw, peak)
}

/// Closed-form amplitude pattern of an ideal half-wave dipole,
/// `cos((π/2) cos θ) / sin θ`; the quadrature oracle for the symmetric case.
pub fn halfwave_closed_form(angle: f64) -> Result<f64> {
    if !(angle > 0.0 && angle < PI) {
        return Err(Error::Domain(format!(
            "polar angle must lie in (0, pi), got {angle}"
        )));
    }
    Ok((PI / 2.0 * angle.cos()).cos() / angle.sin())
}
