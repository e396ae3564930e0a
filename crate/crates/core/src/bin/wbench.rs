//! Command-line front end to the benchmark pipeline.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};

use wbench::analysis::{
    bitflip_timeline, detect_constant, detect_outliers, error_correlation_table, exclude_constant,
    fit_sinusoid, histogram, outcome_table, time_energy_density,
};
use wbench::hamiltonian::w_state_circuit;
use wbench::harness::{ExecContext, ExecutionBackend, IdealBackend, MitigationMode, TimeSeries};
use wbench::io::{export, read_series, run_to_directory, write_series, JobConfig};
use wbench::mitigation::{
    estimate_bitflip_p, estimate_calibration_matrix, mitigate_timeseries, MitigationOptions, DEFAULT_MAX_CONDITION,
};
use wbench::noise::{EmulatedBackend, TemporalScenario};
use wbench::Result;

/// Exit status for command-line usage errors.
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "wbench", version, about = "W-state energy benchmark on emulated noisy devices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Ideal,
    Emulated,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Static,
    Dynamic,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a job and stream packet records.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measure a calibration matrix and print it as JSON.
    Calibrate {
        #[arg(long, value_enum)]
        backend: BackendArg,
        /// Scenario file for the emulated backend.
        #[arg(long, required_if_eq("backend", "emulated"))]
        scenario: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        qubits: usize,
        #[arg(long, default_value_t = 1024)]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Minutes since job start at which to calibrate.
        #[arg(long, default_value_t = 0.0)]
        time_min: f64,
    },
    /// Mitigate a stored series offline from its histograms.
    Mitigate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long)]
        out: PathBuf,
        /// Scenario used to measure calibrations the series lacks.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_MAX_CONDITION)]
        max_condition: f64,
    },
    /// Emit analysis tables as CSV.
    #[command(group(ArgGroup::new("table").required(true).args(["hist", "summary", "correlate", "density", "bitflip"])))]
    Analyze {
        #[arg(long = "in", num_args = 1.., required = true)]
        input: Vec<PathBuf>,
        /// Energy histogram of all realizations.
        #[arg(long)]
        hist: bool,
        /// Energy statistics per series.
        #[arg(long)]
        summary: bool,
        /// Energy against reported error totals per realization.
        #[arg(long)]
        correlate: bool,
        /// Packet-resolved energy density.
        #[arg(long)]
        density: bool,
        /// Estimated bit-flip probability per stored calibration.
        #[arg(long)]
        bitflip: bool,
        /// Bin width in units of t.
        #[arg(long, default_value_t = 0.01)]
        bin_width: f64,
    },
    /// Fit a sinusoid to the packet means.
    Fit {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        with_slope: bool,
        /// Drop a detected constant run before fitting.
        #[arg(long)]
        exclude_constant: bool,
    },
    /// Flag outlier packets or a constant run.
    #[command(group(ArgGroup::new("detector").required(true).args(["outliers", "constant"])))]
    Detect {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        outliers: bool,
        #[arg(long)]
        constant: bool,
        /// Robust z-score threshold.
        #[arg(long, default_value_t = 5.0)]
        k: f64,
    },
    /// Per-bit-string frequency table with exact values and the energy.
    Table1 {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load_scenario_backend(path: &Path) -> Result<EmulatedBackend> {
    EmulatedBackend::new(TemporalScenario::load(path)?)
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Run { config, out } => {
            let config = JobConfig::load(&config)?;
            let summary = run_to_directory(&config, out.as_deref())?;
            for (path, series) in summary.raw.iter().zip(&summary.series) {
                println!("{} ({} packets)", path.display(), series.packets.len());
            }
            for path in &summary.mitigated {
                println!("{}", path.display());
            }
            for d in &summary.discarded {
                eprintln!("discarded packet {} of register {:?}: {}", d.packet_index, d.register, d.reason);
            }
            Ok(())
        }
        Command::Calibrate {
            backend,
            scenario,
            qubits,
            shots,
            seed,
            time_min,
        } => {
            let emulated;
            let ideal;
            let backend: &dyn ExecutionBackend = match backend {
                BackendArg::Ideal => {
                    ideal = IdealBackend::new(qubits);
                    &ideal
                }
                BackendArg::Emulated => {
                    let path = scenario.expect("clap enforces a scenario for emulated backends");
                    emulated = load_scenario_backend(&path)?;
                    &emulated
                }
            };
            let register: Vec<u32> = (1..=qubits as u32).collect();
            let ctx = ExecContext {
                time: time_min,
                packet_index: 0,
                register: &register,
            };
            let cal = estimate_calibration_matrix(backend, qubits, shots, &ctx, seed)?;
            let out = serde_json::json!({
                "calibration": cal.to_record(),
                "estimated_flip": estimate_bitflip_p(&cal),
                "condition_number": cal.condition_number(),
            });
            println!("{out}");
            Ok(())
        }
        Command::Mitigate {
            input,
            mode,
            out,
            scenario,
            seed,
            max_condition,
        } => {
            let series = read_series(&input)?;
            let backend = scenario.as_deref().map(load_scenario_backend).transpose()?;
            let mode = match mode {
                ModeArg::Static => MitigationMode::Static,
                ModeArg::Dynamic => MitigationMode::Dynamic,
            };
            let options = MitigationOptions {
                max_condition,
                seed,
                ..MitigationOptions::default()
            };
            let dyn_backend = backend.as_ref().map(|b| b as &dyn ExecutionBackend);
            let mitigated = mitigate_timeseries(&series, mode, dyn_backend, &options)?;
            write_series(&out, &mitigated)
        }
        Command::Analyze {
            input,
            hist,
            summary,
            correlate,
            density,
            bitflip,
            bin_width,
        } => {
            let all = input.iter().map(|p| read_series(p)).collect::<Result<Vec<_>>>()?;
            if hist {
                let energies: Vec<f64> = all.iter().flat_map(TimeSeries::energies).collect();
                print!("{}", export::histogram_csv(&histogram(&energies, bin_width)?));
            } else if summary {
                let hists = all
                    .iter()
                    .map(|s| histogram(&s.energies(), bin_width))
                    .collect::<Result<Vec<_>>>()?;
                let modes: Vec<String> = all.iter().map(|s| s.mitigation_mode.to_string()).collect();
                print!(
                    "{}",
                    export::summary_csv(
                        all.iter()
                            .zip(&hists)
                            .zip(&modes)
                            .map(|((s, h), m)| (s.job_id.as_str(), s.register.as_slice(), m.as_str(), h))
                    )
                );
            } else if correlate {
                print!("{}", export::correlation_csv(&error_correlation_table(&all, &w_state_circuit())?));
            } else if density {
                for s in &all {
                    print!("{}", export::density_csv(&time_energy_density(s, bin_width)?));
                }
            } else if bitflip {
                for s in &all {
                    print!("{}", export::bitflip_csv(&bitflip_timeline(s)));
                }
            }
            Ok(())
        }
        Command::Fit {
            input,
            with_slope,
            exclude_constant: drop_constant,
        } => {
            let mut series = read_series(&input)?;
            if drop_constant {
                series = exclude_constant(&series)?;
            }
            let fit = fit_sinusoid(&series.packet_times(), &series.packet_means(), with_slope)?;
            print!("{}", export::fit_report(&fit));
            Ok(())
        }
        Command::Detect {
            input,
            outliers,
            constant,
            k,
        } => {
            let series = read_series(&input)?;
            let times = series.packet_times();
            if outliers {
                let report = detect_outliers(&series, k)?;
                print!("{}", export::outliers_csv(&times, &series.packet_means(), &report));
            } else if constant {
                print!("{}", export::constant_report(detect_constant(&series)?, &times));
            }
            Ok(())
        }
        Command::Table1 { input } => {
            let series = read_series(&input)?;
            print!("{}", export::render_outcome_table(&outcome_table(&series, &w_state_circuit())?));
            Ok(())
        }
    }
}
