//! File formats: CSV artifacts and their JSON sidecars.
//!
//! All floats are written with Rust's shortest round-trip formatting, so
//! reading a file back reproduces the exact binary values. CSV headers are
//! part of the format contract and are matched literally on read.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use magnomech_core::{Complex64, Spectrum, SpectrumKind, SpectrumMeta, SystemParams};
use serde::{Deserialize, Serialize};

use crate::config::SystemConfig;

/// Header of the backaction sweep table. The first column is the sweep
/// axis (detuning in Hz or power in W); every rate column is in Hz.
pub const SWEEP_HEADER: &str =
    "x,gamma_plus,gamma_minus,gamma_mag_approx,gamma_mag_exact,gamma_mag_corrected,gamma_tot,spring_shift";

/// Header of a complex spectrum table.
pub const SPECTRUM_HEADER: &str = "freq_hz,re_s,im_s";

/// Header of a rate dataset table.
pub const DATASET_HEADER: &str = "detuning_hz,power_w,gamma_hz";

/// One row of the backaction sweep, all rates converted to Hz.
#[derive(Debug, Clone, Copy)]
pub struct SweepRow {
    pub x: f64,
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    pub gamma_mag_approx: f64,
    pub gamma_mag_exact: f64,
    pub gamma_mag_corrected: f64,
    pub gamma_tot: f64,
    pub spring_shift: f64,
}

/// One row of a rate dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetRow {
    pub detuning_hz: f64,
    pub power_w: f64,
    pub gamma_hz: f64,
}

/// Read-side failures, with enough context to name the offending file.
#[derive(Debug)]
pub enum IoError {
    Io(PathBuf, io::Error),
    Format(PathBuf, String),
}

impl std::fmt::Display for IoError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            IoError::Io(p, e) => write!(f, "{}: {e}", p.display()),
            IoError::Format(p, msg) => write!(f, "{}: {msg}", p.display()),
        }
    }
}

impl std::error::Error for IoError {}

fn read_error(path: &Path) -> impl FnOnce(io::Error) -> IoError + '_ {
    move |e| IoError::Io(path.to_path_buf(), e)
}

fn format_error(path: &Path, msg: impl Into<String>) -> IoError {
    IoError::Format(path.to_path_buf(), msg.into())
}

pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> io::Result<()> {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.x,
            r.gamma_plus,
            r.gamma_minus,
            r.gamma_mag_approx,
            r.gamma_mag_exact,
            r.gamma_mag_corrected,
            r.gamma_tot,
            r.spring_shift
        )
        .expect("writing to a String cannot fail");
    }
    fs::write(path, out)
}

/// Synthesis parameters stored next to each spectrum CSV. Everything a
/// reader needs to reproduce or fit the file, in the config's linear units.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSidecar {
    /// "normal_mode" or "mmit".
    pub kind: String,
    pub system: SystemConfig,
    /// Present for MMIT spectra; absent for the undriven normal-mode scan.
    #[serde(default)]
    pub drive: Option<DriveSidecar>,
    pub noise_sigma: f64,
    #[serde(default)]
    pub noise_seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSidecar {
    pub omega_d_hz: f64,
    pub power_w: f64,
}

/// Sidecar path convention: `windows/a.csv` -> `windows/a.meta.json`.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("meta.json")
}

fn system_to_config(p: &SystemParams) -> SystemConfig {
    SystemConfig {
        omega_a_hz: p.omega_a / TAU,
        omega_m_hz: p.omega_m / TAU,
        kappa_hz: p.kappa / TAU,
        kappa_ext_hz: p.kappa_ext / TAU,
        gamma_m_hz: p.gamma_m / TAU,
        omega_b_hz: p.omega_b / TAU,
        gamma_b_hz: p.gamma_b / TAU,
        g_am_hz: p.g_am / TAU,
        g_mb0_hz: p.g_mb0 / TAU,
        alpha_hz: p.alpha / TAU,
        delta_kerr_hz: p.delta_kerr / TAU,
    }
}

/// Writes a spectrum CSV plus its JSON sidecar.
pub fn write_spectrum(csv_path: &Path, spectrum: &Spectrum) -> io::Result<()> {
    let mut out = String::with_capacity(48 * (spectrum.freq.len() + 1));
    out.push_str(SPECTRUM_HEADER);
    out.push('\n');
    for (f, s) in spectrum.freq.iter().zip(&spectrum.response) {
        writeln!(out, "{},{},{}", f, s.re, s.im).expect("writing to a String cannot fail");
    }
    fs::write(csv_path, out)?;

    let meta = &spectrum.meta;
    let sidecar = SpectrumSidecar {
        kind: match meta.kind {
            SpectrumKind::NormalMode => "normal_mode".into(),
            SpectrumKind::Mmit => "mmit".into(),
        },
        system: system_to_config(&meta.params),
        drive: meta.drive.map(|d| DriveSidecar { omega_d_hz: d.omega_d / TAU, power_w: d.power }),
        noise_sigma: meta.noise_sigma,
        noise_seed: meta.noise_seed,
    };
    let mut text = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
    text.push('\n');
    fs::write(sidecar_path(csv_path), text)
}

/// Reads just the grid and response columns of a spectrum CSV.
pub fn read_spectrum_table(csv_path: &Path) -> Result<(Vec<f64>, Vec<Complex64>), IoError> {
    let text = fs::read_to_string(csv_path).map_err(read_error(csv_path))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == SPECTRUM_HEADER => {}
        other => {
            return Err(format_error(
                csv_path,
                format!("expected header {SPECTRUM_HEADER:?}, found {other:?}"),
            ))
        }
    }
    let mut freq = Vec::new();
    let mut response = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields = parse_floats(csv_path, i + 2, line, 3)?;
        freq.push(fields[0]);
        response.push(Complex64::new(fields[1], fields[2]));
    }
    if freq.is_empty() {
        return Err(format_error(csv_path, "spectrum file has no data rows"));
    }
    Ok((freq, response))
}

/// Reads a spectrum CSV and its sidecar back into a [`Spectrum`].
pub fn read_spectrum(csv_path: &Path) -> Result<Spectrum, IoError> {
    let meta_path = sidecar_path(csv_path);
    let meta_text = fs::read_to_string(&meta_path).map_err(read_error(&meta_path))?;
    let sidecar: SpectrumSidecar =
        serde_json::from_str(&meta_text).map_err(|e| format_error(&meta_path, e.to_string()))?;

    let kind = match sidecar.kind.as_str() {
        "normal_mode" => SpectrumKind::NormalMode,
        "mmit" => SpectrumKind::Mmit,
        other => return Err(format_error(&meta_path, format!("unknown spectrum kind {other:?}"))),
    };
    let system = sidecar.system.to_params();
    let drive = sidecar
        .drive
        .as_ref()
        .map(|d| magnomech_core::DriveConfig { omega_d: TAU * d.omega_d_hz, power: d.power_w });

    let (freq, response) = read_spectrum_table(csv_path)?;
    Ok(Spectrum {
        freq,
        response,
        meta: SpectrumMeta {
            params: system,
            drive,
            kind,
            noise_sigma: sidecar.noise_sigma,
            noise_seed: sidecar.noise_seed,
        },
    })
}

pub fn write_dataset_csv(path: &Path, rows: &[DatasetRow]) -> io::Result<()> {
    let mut out = String::with_capacity(48 * (rows.len() + 1));
    out.push_str(DATASET_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(out, "{},{},{}", r.detuning_hz, r.power_w, r.gamma_hz)
            .expect("writing to a String cannot fail");
    }
    fs::write(path, out)
}

pub fn read_dataset_csv(path: &Path) -> Result<Vec<DatasetRow>, IoError> {
    let text = fs::read_to_string(path).map_err(read_error(path))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == DATASET_HEADER => {}
        other => {
            return Err(format_error(
                path,
                format!("expected header {DATASET_HEADER:?}, found {other:?}"),
            ))
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields = parse_floats(path, i + 2, line, 3)?;
        rows.push(DatasetRow { detuning_hz: fields[0], power_w: fields[1], gamma_hz: fields[2] });
    }
    if rows.is_empty() {
        return Err(format_error(path, "dataset has no rows"));
    }
    Ok(rows)
}

fn parse_floats(path: &Path, line_no: usize, line: &str, want: usize) -> Result<Vec<f64>, IoError> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != want {
        return Err(format_error(
            path,
            format!("line {line_no}: expected {want} fields, found {}", fields.len()),
        ));
    }
    fields
        .iter()
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| format_error(path, format!("line {line_no}: bad float {s:?}")))
        })
        .collect()
}
