//! Command-line interface: hybrid-mode reports, backaction sweeps,
//! evasion search, spectrum synthesis, fits, and the full pipeline.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 runtime
//! failure (singular systems, unfittable data, IO trouble).

use std::f64::consts::TAU;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use magnomech::config::{linspace, ConfigError, RunConfig};
use magnomech::io::{
    read_dataset_csv, read_spectrum, read_spectrum_table, sidecar_path, write_spectrum,
    write_sweep_csv, IoError, SweepRow,
};
use magnomech::manifest::write_manifest;
use magnomech::pipeline::{self, window_seed, PipelineError, PowerFitRecord};
use magnomech_core::{
    add_noise, find_evasion_detuning, fit_global, fit_power_series, fit_window, gamma_mag,
    hybridize, mmit_spectrum, normal_mode_spectrum, DriveConfig, GlobalPoint, Spectrum,
    SpectrumKind, SpectrumMeta, SystemParams,
};

#[derive(Parser)]
#[command(
    name = "magnomech",
    version,
    about = "Cavity magnomechanics: hybrid modes, backaction rates, synthetic spectra, inverse fits"
)]
struct Cli {
    /// Run configuration (JSON, linear Hz and watts).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Noise seed; overrides `noise.seed` from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the hybrid normal-mode report as JSON.
    Hybridize,
    /// Tabulate backaction rates along one drive axis as CSV.
    ///
    /// A detuning sweep uses the first power in the grid; a power sweep
    /// uses the first detuning. Output goes to stdout unless an output
    /// directory is set.
    Sweep {
        #[arg(long, value_enum, default_value_t = Axis::Detuning)]
        axis: Axis,
    },
    /// Locate the drive detuning where magnomechanical backaction
    /// vanishes; prints JSON. Uses the first power in the grid.
    FindEvasion,
    /// Synthesize the normal-mode spectrum and the full grid of
    /// transparency windows into the output directory.
    Synth,
    /// Fit a single artifact: a spectrum window, a power series, or the
    /// global coupling model.
    Fit {
        #[arg(long, value_enum)]
        kind: FitKind,
        /// Spectrum CSV (window) or rate dataset CSV (power, global).
        #[arg(long, value_name = "FILE")]
        input: PathBuf,
        /// Initial window center in Hz; defaults to the phonon frequency
        /// from the spectrum's sidecar.
        #[arg(long, value_name = "HZ")]
        center_hz: Option<f64>,
    },
    /// Run the full inverse pipeline: synthesis, window fits, power
    /// series, global fit, report.
    Pipeline,
}

#[derive(Clone, Copy, ValueEnum)]
enum Axis {
    Detuning,
    Power,
}

#[derive(Clone, Copy, ValueEnum)]
enum FitKind {
    Window,
    Power,
    Global,
}

struct Failure {
    code: i32,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

fn runtime(message: impl std::fmt::Display) -> Failure {
    Failure { code: 3, message: message.to_string() }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Failure {
        Failure { code: 2, message: e.to_string() }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Failure {
        runtime(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Failure {
        runtime(e)
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Failure {
        runtime(e)
    }
}

/// Writes one line to stdout. A closed pipe (`magnomech sweep | head`)
/// ends the run quietly instead of panicking; any other stdout failure
/// is a runtime error.
fn emit_line(args: std::fmt::Arguments<'_>) {
    use std::io::Write as _;
    let mut out = std::io::stdout().lock();
    let result = out.write_fmt(args).and_then(|()| out.write_all(b"\n"));
    if let Err(err) = result {
        if err.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: cannot write to stdout: {err}");
        std::process::exit(3);
    }
}

macro_rules! emit {
    ($($arg:tt)*) => { emit_line(format_args!($($arg)*)) };
}

fn main() {
    let cli = Cli::parse();
    if let Err(f) = dispatch(cli) {
        eprintln!("error: {}", f.message);
        std::process::exit(f.code);
    }
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Hybridize => cmd_hybridize(&load_config(&cli)?),
        Command::Sweep { axis } => cmd_sweep(&load_config(&cli)?, axis, out_dir(&cli)),
        Command::FindEvasion => cmd_find_evasion(&load_config(&cli)?),
        Command::Synth => {
            let config = load_config(&cli)?;
            let out = require_out(&cli, &config)?;
            cmd_synth(&config, &out)
        }
        Command::Fit { kind, ref input, center_hz } => cmd_fit(&cli, kind, input, center_hz),
        Command::Pipeline => {
            let config = load_config(&cli)?;
            let out = require_out(&cli, &config)?;
            cmd_pipeline(&config, &out)
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, Failure> {
    let path = cli.config.as_ref().ok_or_else(|| usage("--config is required for this command"))?;
    Ok(RunConfig::load_with_seed(path, cli.seed)?)
}

fn out_dir(cli: &Cli) -> Option<PathBuf> {
    cli.out.clone()
}

fn require_out(cli: &Cli, config: &RunConfig) -> Result<PathBuf, Failure> {
    cli.out
        .clone()
        .or_else(|| config.output_dir.as_ref().map(PathBuf::from))
        .ok_or_else(|| usage("an output directory is required: pass --out or set output_dir"))
}

fn print_json(value: &serde_json::Value) {
    emit!("{}", serde_json::to_string_pretty(value).expect("report serializes"));
}

/// Wraps a bare table in a [`Spectrum`] for the window fit, which only
/// reads the grid and response. The placeholder metadata is never used.
fn bare_spectrum(freq: Vec<f64>, response: Vec<magnomech_core::Complex64>) -> Spectrum {
    Spectrum {
        freq,
        response,
        meta: SpectrumMeta {
            params: SystemParams {
                omega_a: 0.0,
                omega_m: 0.0,
                kappa: 0.0,
                kappa_ext: 0.0,
                gamma_m: 0.0,
                omega_b: 0.0,
                gamma_b: 0.0,
                g_am: 0.0,
                g_mb0: 0.0,
                alpha: 0.0,
                delta_kerr: 0.0,
            },
            drive: None,
            kind: SpectrumKind::Mmit,
            noise_sigma: 0.0,
            noise_seed: None,
        },
    }
}

fn cmd_hybridize(config: &RunConfig) -> Result<(), Failure> {
    let params = config.system_params();
    let modes = hybridize(&params);
    let (w_plus, w_minus) = modes.magnon_weights();
    print_json(&serde_json::json!({
        "omega_plus_hz": modes.omega_plus / TAU,
        "omega_minus_hz": modes.omega_minus / TAU,
        "kappa_plus_hz": modes.kappa_plus / TAU,
        "kappa_minus_hz": modes.kappa_minus / TAU,
        "splitting_hz": modes.splitting / TAU,
        "theta_rad": modes.theta,
        "magnon_weight_plus": w_plus,
        "magnon_weight_minus": w_minus,
    }));
    Ok(())
}

fn cmd_sweep(config: &RunConfig, axis: Axis, out: Option<PathBuf>) -> Result<(), Failure> {
    let params = config.system_params();
    let modes = hybridize(&params);

    // (x value, detuning from the upper mode in Hz, power in W) triples.
    let points: Vec<(f64, f64, f64)> = match axis {
        Axis::Detuning => {
            let power = config.drive.powers_w[0];
            config.drive.detunings_hz.iter().map(|&d| (d, d, power)).collect()
        }
        Axis::Power => {
            let det = config.drive.detunings_hz[0];
            config.drive.powers_w.iter().map(|&p| (p, det, p)).collect()
        }
    };

    let mut rows = Vec::with_capacity(points.len());
    for (x, det_hz, power) in points {
        let drive = DriveConfig { omega_d: modes.omega_plus + TAU * det_hz, power };
        let r = gamma_mag(&params, &drive).map_err(runtime)?;
        rows.push(SweepRow {
            x,
            gamma_plus: r.gamma_plus / TAU,
            gamma_minus: r.gamma_minus / TAU,
            gamma_mag_approx: r.gamma_mag_approx / TAU,
            gamma_mag_exact: r.gamma_mag_exact / TAU,
            gamma_mag_corrected: r.gamma_mag_corrected / TAU,
            gamma_tot: r.gamma_tot / TAU,
            spring_shift: r.spring_shift / TAU,
        });
    }

    match out {
        Some(dir) => {
            std::fs::create_dir_all(&dir)?;
            let name = match axis {
                Axis::Detuning => "sweep_detuning.csv",
                Axis::Power => "sweep_power.csv",
            };
            let path = dir.join(name);
            write_sweep_csv(&path, &rows)?;
            write_manifest(&dir, None, std::slice::from_ref(&path))?;
            emit!("wrote {}", path.display());
        }
        None => {
            emit!("{}", magnomech::io::SWEEP_HEADER);
            for r in &rows {
                emit!(
                    "{},{},{},{},{},{},{},{}",
                    r.x,
                    r.gamma_plus,
                    r.gamma_minus,
                    r.gamma_mag_approx,
                    r.gamma_mag_exact,
                    r.gamma_mag_corrected,
                    r.gamma_tot,
                    r.spring_shift
                );
            }
        }
    }
    Ok(())
}

fn cmd_find_evasion(config: &RunConfig) -> Result<(), Failure> {
    let params = config.system_params();
    let modes = hybridize(&params);
    let power = config.drive.powers_w[0];
    let root = find_evasion_detuning(&params, power).map_err(runtime)?;
    print_json(&serde_json::json!({
        "omega_d_hz": root.omega_d / TAU,
        "detuning_from_upper_hz": (root.omega_d - modes.omega_plus) / TAU,
        "gamma_residual_hz": root.gamma_residual / TAU,
        "roots_found": root.roots_found,
        "power_w": power,
    }));
    Ok(())
}

fn cmd_synth(config: &RunConfig, out: &std::path::Path) -> Result<(), Failure> {
    let params = config.system_params();
    let modes = hybridize(&params);
    std::fs::create_dir_all(out)?;
    let windows_dir = out.join("windows");
    std::fs::create_dir_all(&windows_dir)?;

    let mut written = Vec::new();
    let noise_base = config.noise.seed.unwrap_or(0);
    let n_powers = config.drive.powers_w.len();

    // Transparency windows over the drive grid, indexed exactly like the
    // pipeline so the two commands produce byte-identical spectra.
    let center = config.mmit_center_hz();
    let half_span = 0.5 * config.spectrum.mmit_span_hz;
    let grid = linspace(center - half_span, center + half_span, config.spectrum.mmit_points);
    for (i, &det_hz) in config.drive.detunings_hz.iter().enumerate() {
        for (j, &power) in config.drive.powers_w.iter().enumerate() {
            let drive = DriveConfig { omega_d: modes.omega_plus + TAU * det_hz, power };
            let clean = mmit_spectrum(&params, &drive, &grid).map_err(runtime)?;
            let index = (i * n_powers + j) as u64;
            let noisy = add_noise(&clean, config.noise.sigma, window_seed(noise_base, index));
            let csv = windows_dir.join(format!("mmit_d{i}_p{j}.csv"));
            write_spectrum(&csv, &noisy)?;
            written.push(csv.clone());
            written.push(sidecar_path(&csv));
        }
    }

    // Undriven normal-mode scan, centered between the hybrid modes. Its
    // noise stream follows the window block.
    let mid_hz = 0.5 * (modes.omega_plus + modes.omega_minus) / TAU;
    let half_normal = 0.5 * config.spectrum.normal_span_hz;
    let normal_grid =
        linspace(mid_hz - half_normal, mid_hz + half_normal, config.spectrum.normal_points);
    let clean = normal_mode_spectrum(&params, &normal_grid).map_err(runtime)?;
    let index = (config.drive.detunings_hz.len() * n_powers) as u64;
    let noisy = add_noise(&clean, config.noise.sigma, window_seed(noise_base, index));
    let csv = out.join("normal_mode.csv");
    write_spectrum(&csv, &noisy)?;
    written.push(csv.clone());
    written.push(sidecar_path(&csv));

    write_manifest(out, None, &written)?;
    emit!("wrote {} artifacts to {}", written.len(), out.display());
    Ok(())
}

fn cmd_fit(
    cli: &Cli,
    kind: FitKind,
    input: &std::path::Path,
    center_hz: Option<f64>,
) -> Result<(), Failure> {
    match kind {
        FitKind::Window => {
            // Prefer the sidecar for grid metadata; fall back to a bare
            // table when the caller supplies the center hint themselves.
            let (spectrum, sidecar_center) = match read_spectrum(input) {
                Ok(s) => {
                    let center = s.meta.params.omega_b / TAU;
                    (s, Some(center))
                }
                Err(IoError::Io(_, _)) if center_hz.is_some() => {
                    let (freq, response) = read_spectrum_table(input)?;
                    (bare_spectrum(freq, response), None)
                }
                Err(e) => return Err(e.into()),
            };
            let center = center_hz
                .or(sidecar_center)
                .ok_or_else(|| usage("--center-hz is required when the sidecar is missing"))?;
            let w = fit_window(&spectrum, center).map_err(runtime)?;
            print_json(&serde_json::json!({
                "center_hz": w.center,
                "fwhm_hz": w.fwhm,
                "amplitude": { "re": w.amplitude.re, "im": w.amplitude.im },
                "background": [
                    { "re": w.background[0].re, "im": w.background[0].im },
                    { "re": w.background[1].re, "im": w.background[1].im },
                ],
                "residual_rms": w.residual_rms,
                "converged": w.converged,
                "iterations": w.iterations,
            }));
            Ok(())
        }
        FitKind::Power => {
            let rows = read_dataset_csv(input)?;
            // Group by detuning, preserving first-appearance order.
            let mut keys: Vec<u64> = Vec::new();
            for r in &rows {
                if !keys.contains(&r.detuning_hz.to_bits()) {
                    keys.push(r.detuning_hz.to_bits());
                }
            }
            let mut records = Vec::new();
            for key in keys {
                let det_hz = f64::from_bits(key);
                let points: Vec<(f64, f64)> = rows
                    .iter()
                    .filter(|r| r.detuning_hz.to_bits() == key)
                    .map(|r| (r.power_w, r.gamma_hz))
                    .collect();
                let fit = fit_power_series(&points)
                    .map_err(|e| runtime(format!("detuning {det_hz} Hz: {e}")))?;
                records.push(PowerFitRecord {
                    detuning_hz: det_hz,
                    gamma_b_hz: fit.intercept,
                    slope_hz_per_w: fit.slope,
                    var_gamma_b: fit.covariance[0][0],
                    var_slope: fit.covariance[1][1],
                    n_points: points.len(),
                });
            }
            print_json(&serde_json::to_value(&records).expect("records serialize"));
            Ok(())
        }
        FitKind::Global => {
            let config = load_config(cli)?;
            let rows = read_dataset_csv(input)?;
            let dataset: Vec<GlobalPoint> = rows
                .iter()
                .map(|r| GlobalPoint {
                    detuning_hz: r.detuning_hz,
                    power_w: r.power_w,
                    gamma_mag_hz: r.gamma_hz,
                    weight: 1.0,
                })
                .collect();
            let g = fit_global(&dataset, &config.system_params()).map_err(runtime)?;
            print_json(&serde_json::json!({
                "g_mb0_hz": g.g_mb0,
                "alpha_hz": g.alpha,
                "covariance_hz2": g.covariance,
                "chi_square_hz2": g.chi_square,
                "dof": g.dof,
            }));
            Ok(())
        }
    }
}

fn cmd_pipeline(config: &RunConfig, out: &std::path::Path) -> Result<(), Failure> {
    std::fs::create_dir_all(out)?;
    let report = pipeline::run(config, out)?;
    emit!(
        "windows: {} fitted, {} converged, {} used",
        report.windows.total,
        report.windows.converged,
        report.windows.used
    );
    emit!(
        "gamma_b_hz: truth {} recovered {}",
        report.truth.gamma_b_hz,
        report.recovered.gamma_b_hz
    );
    emit!("g_mb0_hz: truth {} recovered {}", report.truth.g_mb0_hz, report.recovered.g_mb0_hz);
    emit!("alpha_hz: truth {} recovered {}", report.truth.alpha_hz, report.recovered.alpha_hz);
    emit!("report: {}", out.join("report.json").display());
    Ok(())
}
