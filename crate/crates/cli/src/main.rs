//! Command-line front end: emits pattern, ratio, sweep, constellation, and
//! information-beam data as plot-ready CSV/JSON.
//!
//! Exit codes: 0 on success, 1 on validation/usage errors, 2 on I/O errors.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dirmod::fields::{angle_grid_deg, DipoleSpec, DEFAULT_FREQUENCY_HZ, SPEED_OF_LIGHT};
use dirmod::io::{fmt_sig9, pattern_to_csv, report_to_csv, save_report_csv, RunConfig};
use dirmod::link::{
    amplitude_ratio, angle_sweep, calibrate_central, information_beam, ratio_threshold,
    row_prbs_seed, transmit_at_angle, BeamCriterion, Channel, RatioThreshold,
};
use dirmod::modem::{make_constellation, prbs, SymbolStream, PRBS_DEGREE};
use dirmod::switched::{mirrored_states, DynamicPattern};
use dirmod::{Error, Result};

#[derive(Parser)]
#[command(
    name = "dirmod",
    version,
    about = "Directional-modulation simulator for a switched asymmetric dipole"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit the two mirrored state patterns for an arm-phase imbalance
    Pattern(PatternArgs),
    /// Emit the per-angle amplitude ratio of the two states
    Ratio(PatternArgs),
    /// Run the per-angle link sweep from a JSON config and emit the report
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Report CSV path; stdout when omitted
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Emit calibrated received I/Q samples at one angle
    Constellation {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        angle_deg: f64,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Extract the information beam from a sweep
    Beam {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = CriterionKind::Ber)]
        criterion: CriterionKind,
        /// BER threshold for the `ber` criterion
        #[arg(long, default_value_t = 1e-3)]
        tau: f64,
        /// Ratio threshold for the `ratio` criterion; defaults to the
        /// constellation's crossing threshold
        #[arg(long)]
        rho_star: Option<f64>,
    },
    /// Print the amplitude-ratio error threshold for a QAM order
    Threshold {
        #[arg(long)]
        order: usize,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CriterionKind {
    Ber,
    Ratio,
}

#[derive(Args)]
struct PatternArgs {
    /// Arm-phase imbalance in degrees
    #[arg(long, default_value_t = 45.0)]
    imbalance_deg: f64,
    #[arg(long, default_value_t = DEFAULT_FREQUENCY_HZ)]
    frequency_hz: f64,
    /// Dipole length in meters; defaults to a half wavelength
    #[arg(long)]
    length_m: Option<f64>,
    /// Quadrature samples per arm (odd, >= 257)
    #[arg(long, default_value_t = DipoleSpec::DEFAULT_ARM_SAMPLES)]
    arm_samples: usize,
    #[arg(long, default_value_t = 0.5)]
    angle_start_deg: f64,
    #[arg(long, default_value_t = 179.5)]
    angle_stop_deg: f64,
    #[arg(long, default_value_t = 0.5)]
    angle_step_deg: f64,
    /// Constant phase offset applied to state 2, degrees
    #[arg(long, default_value_t = 0.0)]
    phase_bias_deg: f64,
    /// Output CSV path; stdout when omitted
    #[arg(long, short)]
    output: Option<PathBuf>,
}

impl PatternArgs {
    fn build_pattern(&self) -> Result<DynamicPattern> {
        let length = self
            .length_m
            .unwrap_or(SPEED_OF_LIGHT / self.frequency_hz / 2.0);
        let spec = DipoleSpec::with_options(length, self.frequency_hz, 1.0, self.arm_samples)?;
        let grid: Vec<f64> = angle_grid_deg(
            self.angle_start_deg,
            self.angle_stop_deg,
            self.angle_step_deg,
        )
        .into_iter()
        .map(f64::to_radians)
        .collect();
        Ok(
            mirrored_states(&spec, self.imbalance_deg.to_radians(), &grid)?
                .with_phase_bias(self.phase_bias_deg.to_radians()),
        )
    }
}

fn emit(output: &Option<PathBuf>, text: &str) -> Result<()> {
    match output {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| Error::io(path.clone(), e))?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| Error::io("<stdout>", e))?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Pattern(args) => {
            let pattern = args.build_pattern()?;
            emit(&args.output, &pattern_to_csv(&pattern))
        }
        Command::Ratio(args) => {
            let pattern = args.build_pattern()?;
            let mut text = String::from("angle_deg,ratio\n");
            for (&angle, rho) in pattern.angles().iter().zip(amplitude_ratio(&pattern)) {
                text.push_str(&fmt_sig9(angle.to_degrees()));
                text.push(',');
                text.push_str(&fmt_sig9(rho));
                text.push('\n');
            }
            emit(&args.output, &text)
        }
        Command::Sweep { config, output } => {
            let run_config = RunConfig::from_path(&config)?;
            let report = angle_sweep(&run_config.to_sweep_config()?)?;
            match output {
                Some(path) => save_report_csv(&report, path),
                None => emit(&None, &report_to_csv(&report)),
            }
        }
        Command::Constellation {
            config,
            angle_deg,
            output,
        } => {
            let run_config = RunConfig::from_path(&config)?;
            let sweep = run_config.to_sweep_config()?;
            let constellation = make_constellation(sweep.constellation_order)?;
            let pattern = sweep.build_pattern()?;

            // seed exactly as the sweep row nearest this angle would
            let angles = sweep.angles_deg();
            let row_idx = angles
                .iter()
                .enumerate()
                .min_by(|(_, a), (_, b)| (*a - angle_deg).abs().total_cmp(&(*b - angle_deg).abs()))
                .map(|(i, _)| i)
                .unwrap_or(0);
            let bits = prbs(
                PRBS_DEGREE,
                sweep.n_bits,
                row_prbs_seed(sweep.master_seed, row_idx),
            )?;
            let stream = SymbolStream::from_bits(bits, &constellation)?;
            let channel = match sweep.snr_db {
                None => Channel::Noiseless,
                Some(snr_db) => Channel::Awgn {
                    snr_db,
                    seed: sweep.master_seed ^ row_idx as u64,
                },
            };
            let angle = angle_deg.to_radians();
            let received = transmit_at_angle(&stream, &pattern, &sweep.schedule, angle, &channel)?;
            let cal = calibrate_central(&pattern, angle)?;
            let mut text = String::from("i,q\n");
            for y in received {
                let y = y / cal;
                text.push_str(&fmt_sig9(y.re));
                text.push(',');
                text.push_str(&fmt_sig9(y.im));
                text.push('\n');
            }
            emit(&output, &text)
        }
        Command::Beam {
            config,
            criterion,
            tau,
            rho_star,
        } => {
            let run_config = RunConfig::from_path(&config)?;
            let sweep = run_config.to_sweep_config()?;
            let criterion = match criterion {
                CriterionKind::Ber => BeamCriterion::BerBelow(tau),
                CriterionKind::Ratio => {
                    let rho = match rho_star {
                        Some(r) => r,
                        None => ratio_threshold(sweep.constellation_order)?.value(),
                    };
                    BeamCriterion::RatioBelow(rho)
                }
            };
            let report = angle_sweep(&sweep)?;
            let beam = information_beam(&report, criterion, sweep.calibration_angle_deg);
            let json =
                serde_json::to_string_pretty(&beam).map_err(|e| Error::Config(e.to_string()))?;
            println!("{json}");
            Ok(())
        }
        Command::Threshold { order } => {
            let threshold = ratio_threshold(order)?;
            match threshold {
                RatioThreshold::Finite(_) => {
                    println!("{threshold} \u{2248} {:.6}", threshold.value());
                }
                RatioThreshold::Unbounded => println!("{threshold}"),
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            if matches!(
                err.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            ) {
                print!("{err}");
                return ExitCode::SUCCESS;
            }
            eprint!("{err}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(if err.is_io() { 2 } else { 1 })
        }
    }
}
