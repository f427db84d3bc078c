//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (run with `--nocapture` to see them all).

use std::f64::consts::PI;
use std::panic::UnwindSafe;
use std::time::Instant;

use dirmod::fields::{
    default_angle_grid, excite_arms, far_field, far_field_unnormalized, halfwave_closed_form,
    sinusoidal_current, ArmExcitation, DipoleSpec, DEFAULT_FREQUENCY_HZ,
};
use dirmod::io::report_to_csv;
use dirmod::link::{
    angle_sweep, constellation_sweep_errors, information_beam, ratio_threshold, BeamCriterion,
    RatioThreshold, SweepConfig,
};
use dirmod::modem::{demodulate_hard, make_constellation, modulate, prbs, PRBS_SEED_ALL_ONES};
use dirmod::switched::mirrored_states;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn criterion<F: FnOnce() + UnwindSafe>(name: &str, f: F) {
    let outcome = std::panic::catch_unwind(f);
    let status = if outcome.is_ok() { "PASS" } else { "FAIL" };
    println!("[acceptance] {name}: {status}");
    if let Err(payload) = outcome {
        std::panic::resume_unwind(payload);
    }
}

fn half_wave() -> DipoleSpec {
    DipoleSpec::half_wave(DEFAULT_FREQUENCY_HZ).unwrap()
}

#[test]
fn criterion_1_closed_form_oracle() {
    criterion(
        "1 closed-form oracle (half-wave pattern, 1e-6 rel, <1s)",
        || {
            let start = Instant::now();
            let grid = default_angle_grid();
            let pattern = far_field(&sinusoidal_current(&half_wave()), &grid).unwrap();

            let reference: Vec<f64> = grid
                .iter()
                .map(|&a| halfwave_closed_form(a).unwrap())
                .collect();
            let ref_peak = reference.iter().cloned().fold(0.0_f64, f64::max);

            for ((&angle, field), &cf) in grid.iter().zip(pattern.field()).zip(&reference) {
                let expected = cf / ref_peak;
                let rel = (field.norm() - expected).abs() / expected;
                assert!(
                    rel <= 1e-6,
                    "relative error {rel:e} at {} deg",
                    angle.to_degrees()
                );
            }
            assert!(
                start.elapsed().as_secs_f64() < 1.0,
                "took {:?}",
                start.elapsed()
            );
        },
    );
}

#[test]
fn criterion_2_phase_jump_law() {
    criterion(
        "2 phase jump equals half the arm imbalance (1e-6 rad)",
        || {
            let spec = half_wave();
            let grid = default_angle_grid();
            for phi_deg in [15.0_f64, 45.0, 90.0] {
                let phi = phi_deg.to_radians();
                let exc = ArmExcitation::new(0.0, phi).unwrap();
                let raw = far_field_unnormalized(&excite_arms(&spec, &exc), &grid).unwrap();
                for (&angle, value) in grid.iter().zip(&raw) {
                    if value.norm() <= 1e-6 {
                        continue;
                    }
                    let dev = (value.arg() - phi / 2.0).rem_euclid(PI);
                    let dev = dev.min(PI - dev);
                    assert!(
                        dev <= 1e-6,
                        "phase deviation {dev:e} at {} deg for phi = {phi_deg} deg",
                        angle.to_degrees()
                    );
                }
            }
        },
    );
}

#[test]
fn criterion_3_mirror_and_broadside_identities() {
    criterion("3 mirrored states and unit broadside ratio (1e-9)", || {
        let spec = half_wave();
        let grid = default_angle_grid();
        let n = grid.len();
        let broadside = grid
            .iter()
            .position(|&a| (a - PI / 2.0).abs() < 1e-12)
            .unwrap();
        for phi_deg in [15.0_f64, 45.0, 90.0] {
            let pattern = mirrored_states(&spec, phi_deg.to_radians(), &grid).unwrap();
            let s1 = pattern.state1().field();
            let s2 = pattern.state2().field();
            for i in 0..n {
                let diff = (s1[i].norm() - s2[n - 1 - i].norm()).abs();
                assert!(
                    diff <= 1e-9,
                    "mirror mismatch {diff:e} at index {i} for phi = {phi_deg} deg"
                );
            }
            let rho = s1[broadside].norm() / s2[broadside].norm();
            assert!(
                (rho - 1.0).abs() <= 1e-9,
                "broadside ratio {rho} for phi = {phi_deg} deg"
            );
        }
    });
}

#[test]
fn criterion_4_asymmetry_power_trade() {
    criterion("4 asymmetry grows while the shared peak shrinks", || {
        let spec = half_wave();
        let grid = default_angle_grid();
        let mut asyms = Vec::new();
        let mut peaks = Vec::new();
        for phi_deg in [0.0_f64, 45.0, 90.0] {
            let pattern = mirrored_states(&spec, phi_deg.to_radians(), &grid).unwrap();
            let asym = pattern
                .state1()
                .field()
                .iter()
                .zip(pattern.state2().field())
                .map(|(a, b)| (a.norm() - b.norm()).abs())
                .fold(0.0_f64, f64::max);
            asyms.push(asym);
            peaks.push(pattern.state1().peak_magnitude());
        }
        assert_eq!(asyms[0], 0.0, "asym(0) must vanish");
        assert!(asyms[0] < asyms[1] && asyms[1] < asyms[2], "asym {asyms:?}");
        assert!(
            peaks[0] > peaks[1] && peaks[1] > peaks[2],
            "peaks {peaks:?}"
        );
    });
}

#[test]
fn criterion_5_threshold_reproduction() {
    criterion(
        "5 ratio threshold 8/7 with brute-force confirmation (<1s)",
        || {
            let start = Instant::now();
            let threshold = ratio_threshold(256).unwrap();
            assert_eq!(threshold, RatioThreshold::Finite(Ratio::new(8, 7)));
            assert!(
                (threshold.value() - 1.14).abs() <= 0.003,
                "threshold {} vs reported 1.14",
                threshold.value()
            );
            let constellation = make_constellation(256).unwrap();
            assert_eq!(constellation_sweep_errors(&constellation, 1.14), 0);
            assert!(constellation_sweep_errors(&constellation, 1.15) >= 1);
            assert!(
                start.elapsed().as_secs_f64() < 1.0,
                "took {:?}",
                start.elapsed()
            );
        },
    );
}

#[test]
fn criterion_6_end_to_end_security_profile() {
    criterion(
        "6 noise-free sweep: clean at 90 deg, errors wherever rho > 8/7 (<10s)",
        || {
            let start = Instant::now();
            let config = SweepConfig::default();
            let report = angle_sweep(&config).unwrap();
            assert_eq!(report.rows.len(), 39);

            let row_90 = report.row_at(90.0).expect("90 deg row");
            assert_eq!(row_90.ber, 0.0, "BER at broadside");

            let rho_star = 8.0 / 7.0;
            for row in &report.rows {
                if row.ratio > rho_star {
                    assert!(
                        row.ber > 1e-3,
                        "BER {} at {} deg despite ratio {}",
                        row.ber,
                        row.angle_deg,
                        row.ratio
                    );
                }
            }

            let beam = information_beam(&report, BeamCriterion::BerBelow(1e-3), 90.0);
            assert!(!beam.passing_angles_deg.is_empty());
            assert!(beam.contiguous, "passing set must be one window");
            assert!(beam.contains(90.0), "window must contain broadside");
            assert!(
                start.elapsed().as_secs_f64() < 10.0,
                "took {:?}",
                start.elapsed()
            );
        },
    );
}

#[test]
fn criterion_7_modem_suite() {
    criterion(
        "7 gray adjacency, unit energy, PRBS-11, modem round trip",
        || {
            for order in [4usize, 16, 64, 256] {
                let c = make_constellation(order).unwrap();
                let side = c.side();
                for i in 0..side {
                    for q in 0..side {
                        let here = c.label(i * side + q);
                        if i + 1 < side {
                            assert_eq!((here ^ c.label((i + 1) * side + q)).count_ones(), 1);
                        }
                        if q + 1 < side {
                            assert_eq!((here ^ c.label(i * side + q + 1)).count_ones(), 1);
                        }
                    }
                }
                let mean: f64 = c.points().iter().map(|p| p.norm_sqr()).sum::<f64>() / order as f64;
                assert!((mean - 1.0).abs() <= 1e-12, "order {order} energy {mean}");
            }

            let bits = prbs(11, 2 * 2047, PRBS_SEED_ALL_ONES).unwrap();
            assert_eq!(&bits[..2047], &bits[2047..]);
            for p in [1usize, 23, 89] {
                assert!((0..2047 - p).any(|i| bits[i] != bits[i + p]));
            }
            let ones: usize = bits[..2047].iter().map(|&b| b as usize).sum();
            assert_eq!(ones, 1024);

            let mut rng = ChaCha8Rng::seed_from_u64(0xD1A6);
            let random_bits: Vec<u8> = (0..100_000).map(|_| rng.gen_range(0..=1u8)).collect();
            for order in [4usize, 16, 64, 256, 1024] {
                let c = make_constellation(order).unwrap();
                let m = c.bits_per_symbol();
                let usable = random_bits.len() / m * m;
                let payload = &random_bits[..usable];
                let symbols = modulate(payload, &c).unwrap();
                assert_eq!(demodulate_hard(&symbols, &c), payload, "order {order}");
            }
        },
    );
}

#[test]
fn criterion_8_sweep_determinism() {
    criterion("8 byte-identical reports from identical configs", || {
        let config = SweepConfig {
            n_bits: 16_000,
            snr_db: Some(30.0),
            master_seed: 99,
            ..SweepConfig::default()
        };
        let csv_a = report_to_csv(&angle_sweep(&config).unwrap());
        let csv_b = report_to_csv(&angle_sweep(&config).unwrap());
        assert_eq!(csv_a.as_bytes(), csv_b.as_bytes());

        // the noise-free default path as well
        let config = SweepConfig {
            n_bits: 8_000,
            ..SweepConfig::default()
        };
        let csv_a = report_to_csv(&angle_sweep(&config).unwrap());
        let csv_b = report_to_csv(&angle_sweep(&config).unwrap());
        assert_eq!(csv_a.as_bytes(), csv_b.as_bytes());
    });
}
