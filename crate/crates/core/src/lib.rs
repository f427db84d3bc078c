//! Simulator for amplitude-based directional modulation with a single
//! switched dipole antenna.
//!
//! A dipole fed with a small phase imbalance between its arms radiates an
//! asymmetric amplitude pattern; swapping which arm leads mirrors that
//! pattern about broadside. Rapidly switching between the two mirrored
//! states superposes two scaled copies of the transmitted constellation at
//! every angle except where the states agree, scrambling high-order QAM for
//! any receiver outside a narrow angular window (the information beam)
//! while leaving the intended direction untouched.
//!
//! The crate is organized along the processing chain:
//!
//! * [`fields`] — dipole currents under asymmetric arm excitation and the
//!   far-field radiation integral (composite Simpson quadrature).
//! * [`switched`] — mirrored two-state patterns, gain interpolation, and
//!   symbol-rate switching schedules.
//! * [`modem`] — gray-coded square QAM, PRBS payloads, hard-decision
//!   demodulation, and error metrics.
//! * [`link`] — the per-angle experiment: state-dependent gains, blind
//!   mean-gain equalization, BER/EVM versus angle, amplitude-ratio
//!   thresholds, and information-beam extraction.
//! * [`io`] — pattern/report CSV files and the JSON run configuration.
//!
//! ```
//! use dirmod::link::{angle_sweep, information_beam, BeamCriterion, SweepConfig};
//!
//! let config = SweepConfig {
//!     n_bits: 8_000,
//!     ..SweepConfig::default()
//! };
//! let report = angle_sweep(&config).unwrap();
//! let beam = information_beam(&report, BeamCriterion::BerBelow(1e-3), 90.0);
//! assert!(beam.contains(90.0));
//! ```

pub mod error;
pub mod fields;
pub mod io;
pub mod link;
pub mod modem;
pub mod switched;

pub use error::{Error, Result};
pub use fields::{
    excite_arms, far_field, far_field_unnormalized, halfwave_closed_form, mode_decompose,
    sinusoidal_current, ArmExcitation, CurrentDistribution, DipoleSpec, FarFieldPattern, ModeSplit,
};
pub use link::{
    amplitude_ratio, angle_sweep, calibrate_central, information_beam, ratio_threshold,
    transmit_at_angle, BeamCriterion, Channel, InformationBeam, LinkReport, LinkRow, PatternInput,
    RatioThreshold, SweepConfig,
};
pub use modem::{
    awgn, demodulate_hard, error_metrics, make_constellation, modulate, prbs, ErrorMetrics,
    QamConstellation, SymbolStream,
};
pub use switched::{
    assign_states, gain_at, mirrored_states, AntennaState, DynamicPattern, PatternSource,
    SwitchingSchedule,
};
