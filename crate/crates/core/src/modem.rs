//! Gray-coded square QAM, PRBS payload generation, hard-decision
//! demodulation, and link error metrics.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::fields::wrap_phase;

/// PRBS register width. Output convention, normative for reproducible
/// streams: register `s[1..11]`, output bit `s[11]`, feedback
/// `s[11] XOR s[9]` shifted into `s[1]` (polynomial x^11 + x^9 + 1).
/// In the packed representation below, bit `i-1` of the word holds `s[i]`.
pub const PRBS_DEGREE: u32 = 11;

/// Default all-ones register.
pub const PRBS_SEED_ALL_ONES: u16 = 0x7FF;

const PRBS_MASK: u16 = 0x7FF;

/// Maximal-length PRBS bits (0/1). Only degree 11 is supported; the
/// sequence repeats with period 2^11 − 1 = 2047.
pub fn prbs(degree: u32, length: usize, seed: u16) -> Result<Vec<u8>> {
    if degree != PRBS_DEGREE {
        return Err(Error::validation(
            "degree",
            format!("only degree {PRBS_DEGREE} is supported, got {degree}"),
        ));
    }
    let mut state = seed & PRBS_MASK;
    if state == 0 {
        return Err(Error::validation("seed", "register must be nonzero"));
    }
    let mut bits = Vec::with_capacity(length);
    for _ in 0..length {
        let out = ((state >> 10) & 1) as u8; // s[11]
        let fb = out ^ ((state >> 8) & 1) as u8; // s[11] xor s[9]
        state = ((state << 1) | u16::from(fb)) & PRBS_MASK;
        bits.push(out);
    }
    Ok(bits)
}

/// Square M-QAM with unit average symbol energy and independent
/// binary-reflected gray labels per axis.
///
/// Point indices run I-major: `index = i_idx * side + q_idx`, where level
/// index 0 is the most negative amplitude on an axis. The bit group of a
/// symbol is `gray(i_idx)` followed by `gray(q_idx)`, MSB first.
#[derive(Debug, Clone, PartialEq)]
pub struct QamConstellation {
    order: usize,
    side: usize,
    bits_per_symbol: usize,
    scale: f64,
    points: Vec<Complex64>,
}

fn gray(x: usize) -> usize {
    x ^ (x >> 1)
}

fn gray_inverse(mut g: usize) -> usize {
    let mut x = g;
    while g > 0 {
        g >>= 1;
        x ^= g;
    }
    x
}

impl QamConstellation {
    pub fn new(order: usize) -> Result<Self> {
        if !(4..=1024).contains(&order) {
            return Err(Error::validation(
                "order",
                format!("must lie in [4, 1024], got {order}"),
            ));
        }
        let side = (order as f64).sqrt().round() as usize;
        if side * side != order || !side.is_power_of_two() {
            return Err(Error::validation(
                "order",
                format!("must be an even power of two (square grid), got {order}"),
            ));
        }
        // mean of the squared odd levels 1, 3, .., side-1 is (side^2 - 1)/3
        // per axis; two axes give the total energy before scaling.
        let energy = 2.0 * ((side * side - 1) as f64) / 3.0;
        let scale = 1.0 / energy.sqrt();
        let level = |idx: usize| (2.0 * idx as f64 - (side - 1) as f64) * scale;
        let mut points = Vec::with_capacity(order);
        for i_idx in 0..side {
            for q_idx in 0..side {
                points.push(Complex64::new(level(i_idx), level(q_idx)));
            }
        }
        Ok(Self {
            order,
            side,
            bits_per_symbol: order.trailing_zeros() as usize,
            scale,
            points,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of amplitude levels per axis.
    pub fn side(&self) -> usize {
        self.side
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    /// Amplitude step scale: levels are odd multiples of this value.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// All constellation points, I-major.
    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    fn level(&self, idx: usize) -> f64 {
        (2.0 * idx as f64 - (self.side - 1) as f64) * self.scale
    }

    /// Gray bit label of a point index, packed MSB-first.
    pub fn label(&self, point_index: usize) -> usize {
        let i_idx = point_index / self.side;
        let q_idx = point_index % self.side;
        (gray(i_idx) << (self.bits_per_symbol / 2)) | gray(q_idx)
    }

    /// Nearest level index along one axis, ties toward the smaller level.
    fn nearest_level(&self, x: f64) -> usize {
        let u = (x / self.scale + (self.side - 1) as f64) / 2.0;
        let lo = (u.floor() as isize).clamp(0, self.side as isize - 2) as usize;
        let d_lo = (x - self.level(lo)).abs();
        let d_hi = (x - self.level(lo + 1)).abs();
        if d_hi < d_lo {
            lo + 1
        } else {
            lo
        }
    }
}

pub fn make_constellation(order: usize) -> Result<QamConstellation> {
    QamConstellation::new(order)
}

/// A payload: bits plus the symbols they map to.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolStream {
    pub bits: Vec<u8>,
    pub symbols: Vec<Complex64>,
    pub constellation_order: usize,
}

impl SymbolStream {
    pub fn from_bits(bits: Vec<u8>, constellation: &QamConstellation) -> Result<Self> {
        let symbols = modulate(&bits, constellation)?;
        Ok(Self {
            bits,
            symbols,
            constellation_order: constellation.order(),
        })
    }

    pub fn n_symbols(&self) -> usize {
        self.symbols.len()
    }
}

/// Map bits (0/1, MSB first per symbol) onto constellation points.
pub fn modulate(bits: &[u8], constellation: &QamConstellation) -> Result<Vec<Complex64>> {
    let m = constellation.bits_per_symbol();
    if !bits.len().is_multiple_of(m) {
        return Err(Error::validation(
            "bits",
            format!("bit count {} not divisible by log2(M) = {m}", bits.len()),
        ));
    }
    let half = m / 2;
    let symbols = bits
        .chunks_exact(m)
        .map(|group| {
            let value = group.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
            let i_idx = gray_inverse(value >> half);
            let q_idx = gray_inverse(value & ((1 << half) - 1));
            Complex64::new(constellation.level(i_idx), constellation.level(q_idx))
        })
        .collect();
    Ok(symbols)
}

/// Hard-decision demodulation: each received sample maps to the bits of the
/// Euclidean-nearest point. Exact ties break toward the smaller in-phase
/// level, then the smaller quadrature level, which the per-axis tie rule
/// realizes since the grid decision is separable.
pub fn demodulate_hard(received: &[Complex64], constellation: &QamConstellation) -> Vec<u8> {
    let m = constellation.bits_per_symbol();
    let half = m / 2;
    let mut bits = Vec::with_capacity(received.len() * m);
    for y in received {
        let i_idx = constellation.nearest_level(y.re);
        let q_idx = constellation.nearest_level(y.im);
        let label = (gray(i_idx) << half) | gray(q_idx);
        for shift in (0..m).rev() {
            bits.push(((label >> shift) & 1) as u8);
        }
    }
    bits
}

/// Link quality metrics of a received sequence against its reference.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ErrorMetrics {
    /// rms amplitude deviation, relative to the rms reference amplitude.
    pub magnitude_error_rms: f64,
    /// Mean absolute wrapped phase deviation, radians.
    pub phase_error_mean: f64,
    /// rms error vector magnitude, relative to the rms reference amplitude.
    pub evm_rms: f64,
    pub ber: f64,
    pub ser: f64,
}

pub fn error_metrics(
    received: &[Complex64],
    reference_symbols: &[Complex64],
    reference_bits: &[u8],
    constellation: &QamConstellation,
) -> Result<ErrorMetrics> {
    if received.is_empty() {
        return Err(Error::validation("received", "must not be empty"));
    }
    if received.len() != reference_symbols.len() {
        return Err(Error::validation(
            "received",
            format!(
                "length {} does not match reference length {}",
                received.len(),
                reference_symbols.len()
            ),
        ));
    }
    let m = constellation.bits_per_symbol();
    if reference_bits.len() != reference_symbols.len() * m {
        return Err(Error::validation(
            "reference_bits",
            format!(
                "expected {} bits for {} symbols",
                reference_symbols.len() * m,
                reference_symbols.len()
            ),
        ));
    }

    let n = received.len() as f64;
    let ref_power: f64 = reference_symbols.iter().map(|x| x.norm_sqr()).sum::<f64>() / n;
    let ref_rms = ref_power.sqrt();

    let mut mag_sq = 0.0;
    let mut phase_abs = 0.0;
    let mut evm_sq = 0.0;
    for (y, x) in received.iter().zip(reference_symbols) {
        let dm = y.norm() - x.norm();
        mag_sq += dm * dm;
        phase_abs += wrap_phase(y.arg() - x.arg()).abs();
        evm_sq += (*y - *x).norm_sqr();
    }

    let decided = demodulate_hard(received, constellation);
    let bit_errors = decided
        .iter()
        .zip(reference_bits)
        .filter(|(a, b)| a != b)
        .count();
    let symbol_errors = decided
        .chunks_exact(m)
        .zip(reference_bits.chunks_exact(m))
        .filter(|(a, b)| a != b)
        .count();

    Ok(ErrorMetrics {
        magnitude_error_rms: (mag_sq / n).sqrt() / ref_rms,
        phase_error_mean: phase_abs / n,
        evm_rms: (evm_sq / n).sqrt() / ref_rms,
        ber: bit_errors as f64 / reference_bits.len() as f64,
        ser: symbol_errors as f64 / received.len() as f64,
    })
}

/// Add circular complex Gaussian noise at the given SNR relative to the
/// mean symbol energy. An infinite `snr_db` disables the noise. The samples
/// come from Box-Muller pairs drawn off the supplied generator, so a given
/// stream yields one fixed output.
pub fn awgn<R: Rng>(symbols: &[Complex64], snr_db: f64, rng: &mut R) -> Vec<Complex64> {
    if snr_db.is_infinite() && snr_db > 0.0 {
        return symbols.to_vec();
    }
    let mean_energy =
        symbols.iter().map(|x| x.norm_sqr()).sum::<f64>() / symbols.len().max(1) as f64;
    let noise_power = mean_energy * 10f64.powf(-snr_db / 10.0);
    let sigma = (noise_power / 2.0).sqrt();
    symbols
        .iter()
        .map(|x| {
            let u1: f64 = 1.0 - rng.gen::<f64>(); // (0, 1]
            let u2: f64 = rng.gen();
            let r = (-2.0 * u1.ln()).sqrt();
            let theta = 2.0 * std::f64::consts::PI * u2;
            x + Complex64::new(sigma * r * theta.cos(), sigma * r * theta.sin())
        })
        .collect()
}
