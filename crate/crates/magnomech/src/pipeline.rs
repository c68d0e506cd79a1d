//! The inverse pipeline: synthesize transparency windows over a drive
//! grid, fit each window, extract the intrinsic phonon linewidth from the
//! power dependence, then fit the coupling parameters globally.
//!
//! Every run writes its artifacts plus a `manifest.json` inventory into
//! the output directory. A stage failure still writes the manifest, with
//! `status: "failed"` and the stage name, so partial runs are auditable.

use std::f64::consts::TAU;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use magnomech_core::{
    add_noise, fit_global, fit_power_series, fit_window, hybridize, mmit_spectrum, DriveConfig,
    GlobalPoint,
};
use serde::{Deserialize, Serialize};

use crate::config::{linspace, RunConfig};
use crate::io::{write_dataset_csv, write_spectrum, DatasetRow};
use crate::manifest::write_manifest;

/// Mixes a window index into the base noise seed so each spectrum gets an
/// independent, reproducible stream.
pub fn window_seed(base: u64, index: u64) -> u64 {
    base.wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

#[derive(Debug)]
pub struct PipelineError {
    pub stage: &'static str,
    pub message: String,
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "pipeline stage {:?} failed: {}", self.stage, self.message)
    }
}

impl std::error::Error for PipelineError {}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TruthBlock {
    pub g_mb0_hz: f64,
    pub alpha_hz: f64,
    pub gamma_b_hz: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecoveredBlock {
    pub gamma_b_hz: f64,
    pub g_mb0_hz: f64,
    pub alpha_hz: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    #[serde(default)]
    pub gamma_b_rel_err: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    #[serde(default)]
    pub g_mb0_rel_err: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    #[serde(default)]
    pub alpha_rel_err: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GlobalFitBlock {
    pub chi_square_hz2: f64,
    pub dof: usize,
    pub g_mb0_sigma_hz: f64,
    pub alpha_sigma_hz: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WindowBlock {
    pub total: usize,
    pub converged: usize,
    /// Windows that entered the linear fits (converged and below the
    /// power cutoff).
    pub used: usize,
}

/// Contents of `report.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineReport {
    pub truth: TruthBlock,
    pub recovered: RecoveredBlock,
    pub fit: GlobalFitBlock,
    pub windows: WindowBlock,
}

/// Per-detuning intercept/slope record, serialized to `power_fits.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PowerFitRecord {
    pub detuning_hz: f64,
    pub gamma_b_hz: f64,
    pub slope_hz_per_w: f64,
    pub var_gamma_b: f64,
    pub var_slope: f64,
    pub n_points: usize,
}

struct FittedWindow {
    detuning_hz: f64,
    power_w: f64,
    gamma_tot_hz: f64,
    converged: bool,
}

fn rel_err(recovered: f64, truth: f64) -> Option<f64> {
    if truth == 0.0 {
        None
    } else {
        Some(((recovered - truth) / truth).abs())
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).expect("median input is finite"));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Runs the full pipeline into `out_dir`, which must already exist and is
/// assumed writable. Returns the report on success; on failure the
/// manifest names the failed stage and the error is returned.
pub fn run(config: &RunConfig, out_dir: &Path) -> Result<PipelineReport, PipelineError> {
    let mut written: Vec<PathBuf> = Vec::new();
    let result = run_stages(config, out_dir, &mut written);

    let failed_stage = result.as_ref().err().map(|e| e.stage);
    if let Err(e) = write_manifest(out_dir, failed_stage, &written) {
        // A manifest write failure outranks the stage result: without the
        // inventory the run is unusable either way.
        return Err(PipelineError { stage: "manifest", message: e.to_string() });
    }
    result
}

fn run_stages(
    config: &RunConfig,
    out_dir: &Path,
    written: &mut Vec<PathBuf>,
) -> Result<PipelineReport, PipelineError> {
    let params = config.system_params();
    let modes = hybridize(&params);

    let stage_io = |stage: &'static str| {
        move |e: std::io::Error| PipelineError { stage, message: e.to_string() }
    };

    // Synthesis: one transparency window per (detuning, power) pair.
    let windows_dir = out_dir.join("windows");
    fs::create_dir_all(&windows_dir).map_err(stage_io("synthesis"))?;

    let center = config.mmit_center_hz();
    let half_span = 0.5 * config.spectrum.mmit_span_hz;
    let grid = linspace(center - half_span, center + half_span, config.spectrum.mmit_points);
    let noise_base = config.noise.seed.unwrap_or(0);
    let n_powers = config.drive.powers_w.len();

    let mut spectra = Vec::new();
    for (i, &det_hz) in config.drive.detunings_hz.iter().enumerate() {
        for (j, &power) in config.drive.powers_w.iter().enumerate() {
            let drive = DriveConfig { omega_d: modes.omega_plus + TAU * det_hz, power };
            let clean = mmit_spectrum(&params, &drive, &grid).map_err(|e| PipelineError {
                stage: "synthesis",
                message: format!("detuning {det_hz} Hz, power {power} W: {e}"),
            })?;
            let index = (i * n_powers + j) as u64;
            let noisy = add_noise(&clean, config.noise.sigma, window_seed(noise_base, index));

            let csv = windows_dir.join(format!("mmit_d{i}_p{j}.csv"));
            write_spectrum(&csv, &noisy).map_err(stage_io("synthesis"))?;
            written.push(csv.clone());
            written.push(crate::io::sidecar_path(&csv));
            spectra.push((det_hz, power, noisy));
        }
    }

    // Window fits: one total phonon linewidth per spectrum.
    let mut fitted = Vec::with_capacity(spectra.len());
    for (det_hz, power, spectrum) in &spectra {
        let fit = fit_window(spectrum, center).map_err(|e| PipelineError {
            stage: "window_fit",
            message: format!("detuning {det_hz} Hz, power {power} W: {e}"),
        })?;
        fitted.push(FittedWindow {
            detuning_hz: *det_hz,
            power_w: *power,
            gamma_tot_hz: fit.fwhm,
            converged: fit.converged,
        });
    }

    let gamma_tot_rows: Vec<DatasetRow> = fitted
        .iter()
        .filter(|w| w.converged)
        .map(|w| DatasetRow {
            detuning_hz: w.detuning_hz,
            power_w: w.power_w,
            gamma_hz: w.gamma_tot_hz,
        })
        .collect();
    let gamma_tot_path = out_dir.join("gamma_tot.csv");
    write_dataset_csv(&gamma_tot_path, &gamma_tot_rows).map_err(stage_io("window_fit"))?;
    written.push(gamma_tot_path);

    // Power-series fits: extrapolate each detuning to zero power. The
    // intercept estimates the intrinsic linewidth independently of the
    // coupling model; the median across detunings is robust to a bad row.
    let cutoff = config.power_cutoff_w;
    let mut records = Vec::new();
    for &det_hz in &config.drive.detunings_hz {
        let points: Vec<(f64, f64)> = fitted
            .iter()
            .filter(|w| w.converged && w.detuning_hz == det_hz && w.power_w <= cutoff)
            .map(|w| (w.power_w, w.gamma_tot_hz))
            .collect();
        if points.len() < 3 {
            return Err(PipelineError {
                stage: "series_fit",
                message: format!(
                    "detuning {det_hz} Hz has {} usable windows below the power cutoff; \
                     need at least 3",
                    points.len()
                ),
            });
        }
        let fit = fit_power_series(&points).map_err(|e| PipelineError {
            stage: "series_fit",
            message: format!("detuning {det_hz} Hz: {e}"),
        })?;
        records.push(PowerFitRecord {
            detuning_hz: det_hz,
            gamma_b_hz: fit.intercept,
            slope_hz_per_w: fit.slope,
            var_gamma_b: fit.covariance[0][0],
            var_slope: fit.covariance[1][1],
            n_points: points.len(),
        });
    }
    let power_fits_path = out_dir.join("power_fits.json");
    let mut text = serde_json::to_string_pretty(&records).expect("records serialize");
    text.push('\n');
    fs::write(&power_fits_path, text).map_err(stage_io("series_fit"))?;
    written.push(power_fits_path);

    let mut intercepts: Vec<f64> = records.iter().map(|r| r.gamma_b_hz).collect();
    let gamma_b_est = median(&mut intercepts);

    // Global fit: subtract the estimated intrinsic linewidth and fit the
    // two coupling parameters across the whole grid.
    let dataset: Vec<GlobalPoint> = fitted
        .iter()
        .filter(|w| w.converged && w.power_w <= cutoff)
        .map(|w| GlobalPoint {
            detuning_hz: w.detuning_hz,
            power_w: w.power_w,
            gamma_mag_hz: w.gamma_tot_hz - gamma_b_est,
            weight: 1.0,
        })
        .collect();

    let gamma_mag_rows: Vec<DatasetRow> = dataset
        .iter()
        .map(|p| DatasetRow {
            detuning_hz: p.detuning_hz,
            power_w: p.power_w,
            gamma_hz: p.gamma_mag_hz,
        })
        .collect();
    let gamma_mag_path = out_dir.join("gamma_mag.csv");
    write_dataset_csv(&gamma_mag_path, &gamma_mag_rows).map_err(stage_io("global_fit"))?;
    written.push(gamma_mag_path);

    let global = fit_global(&dataset, &params)
        .map_err(|e| PipelineError { stage: "global_fit", message: e.to_string() })?;
    let global_path = out_dir.join("global_fit.json");
    let mut text = serde_json::to_string_pretty(&serde_json::json!({
        "g_mb0_hz": global.g_mb0,
        "alpha_hz": global.alpha,
        "covariance_hz2": global.covariance,
        "chi_square_hz2": global.chi_square,
        "dof": global.dof,
        "gamma_b_hz_estimate": gamma_b_est,
    }))
    .expect("fit block serializes");
    text.push('\n');
    fs::write(&global_path, text).map_err(stage_io("global_fit"))?;
    written.push(global_path);

    // Report: truth versus recovery. Truth comes straight from the config,
    // which is what generated the data in the first place.
    let truth = TruthBlock {
        g_mb0_hz: config.system.g_mb0_hz,
        alpha_hz: config.system.alpha_hz,
        gamma_b_hz: config.system.gamma_b_hz,
    };
    let converged = fitted.iter().filter(|w| w.converged).count();
    let report = PipelineReport {
        recovered: RecoveredBlock {
            gamma_b_hz: gamma_b_est,
            g_mb0_hz: global.g_mb0,
            alpha_hz: global.alpha,
            gamma_b_rel_err: rel_err(gamma_b_est, truth.gamma_b_hz),
            g_mb0_rel_err: rel_err(global.g_mb0, truth.g_mb0_hz),
            alpha_rel_err: rel_err(global.alpha, truth.alpha_hz),
        },
        truth,
        fit: GlobalFitBlock {
            chi_square_hz2: global.chi_square,
            dof: global.dof,
            g_mb0_sigma_hz: global.covariance[0][0].max(0.0).sqrt(),
            alpha_sigma_hz: global.covariance[1][1].max(0.0).sqrt(),
        },
        windows: WindowBlock { total: fitted.len(), converged, used: dataset.len() },
    };
    let report_path = out_dir.join("report.json");
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    fs::write(&report_path, text).map_err(stage_io("report"))?;
    written.push(report_path);

    Ok(report)
}
