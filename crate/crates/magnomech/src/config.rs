//! Run configuration: the JSON schema the CLI speaks.
//!
//! Configuration files use linear frequency (Hz) and watts throughout;
//! conversion to the angular units of `magnomech_core` happens in
//! [`RunConfig::system_params`] and nowhere else.

use std::f64::consts::TAU;
use std::fmt;
use std::path::Path;

use magnomech_core::SystemParams;
use serde::{Deserialize, Serialize};

/// Physical system block, linear Hz.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub omega_a_hz: f64,
    pub omega_m_hz: f64,
    pub kappa_hz: f64,
    pub kappa_ext_hz: f64,
    pub gamma_m_hz: f64,
    pub omega_b_hz: f64,
    pub gamma_b_hz: f64,
    pub g_am_hz: f64,
    pub g_mb0_hz: f64,
    pub alpha_hz: f64,
    #[serde(default)]
    pub delta_kerr_hz: f64,
}

impl SystemConfig {
    /// Angular-unit parameters for the core crate.
    pub fn to_params(&self) -> SystemParams {
        SystemParams {
            omega_a: TAU * self.omega_a_hz,
            omega_m: TAU * self.omega_m_hz,
            kappa: TAU * self.kappa_hz,
            kappa_ext: TAU * self.kappa_ext_hz,
            gamma_m: TAU * self.gamma_m_hz,
            omega_b: TAU * self.omega_b_hz,
            gamma_b: TAU * self.gamma_b_hz,
            g_am: TAU * self.g_am_hz,
            g_mb0: TAU * self.g_mb0_hz,
            alpha: TAU * self.alpha_hz,
            delta_kerr: TAU * self.delta_kerr_hz,
        }
    }
}

/// Drive grid: detunings are Δ₊/2π, offsets of the drive from the upper
/// hybrid mode.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveGridConfig {
    pub detunings_hz: Vec<f64>,
    pub powers_w: Vec<f64>,
}

fn default_mmit_points() -> usize {
    801
}

fn default_normal_points() -> usize {
    2001
}

/// Probe spectrum grids.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumGridConfig {
    /// Center of the MMIT window grid (probe offset from the drive, Hz).
    /// Defaults to the phonon frequency.
    #[serde(default)]
    pub mmit_center_hz: Option<f64>,
    /// Full span of the MMIT window grid (Hz).
    pub mmit_span_hz: f64,
    #[serde(default = "default_mmit_points")]
    pub mmit_points: usize,
    /// Full span of the normal-mode spectrum, centered between the
    /// hybrid modes (Hz).
    pub normal_span_hz: f64,
    #[serde(default = "default_normal_points")]
    pub normal_points: usize,
}

/// Additive complex noise on synthesized spectra.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    /// Per-quadrature standard deviation (same units as the reflection
    /// coefficient). Zero disables noise.
    #[serde(default)]
    pub sigma: f64,
    /// RNG seed; required whenever sigma > 0 so runs are reproducible.
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_power_cutoff() -> f64 {
    0.022
}

/// Top-level run configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemConfig,
    pub drive: DriveGridConfig,
    pub spectrum: SpectrumGridConfig,
    #[serde(default)]
    pub noise: NoiseConfig,
    /// Highest drive power admitted into the inverse fits (W). Points
    /// above it are synthesized but excluded from the linear fits.
    #[serde(default = "default_power_cutoff")]
    pub power_cutoff_w: f64,
    /// Default output directory; `--out` overrides it.
    #[serde(default)]
    pub output_dir: Option<String>,
}

/// Everything that can go wrong between a path and a validated config.
#[derive(Debug)]
pub enum ConfigError {
    Io(std::io::Error),
    /// JSON syntax or schema violation; the message carries serde_json's
    /// line/column anchor.
    Parse(serde_json::Error),
    /// Parsed fine but physically or structurally invalid.
    Invalid(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io(e) => write!(f, "cannot read config: {e}"),
            ConfigError::Parse(e) => write!(f, "config parse error: {e}"),
            ConfigError::Invalid(msg) => write!(f, "invalid config: {msg}"),
        }
    }
}

impl std::error::Error for ConfigError {}

impl RunConfig {
    /// Loads and validates a configuration file.
    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        RunConfig::load_with_seed(path, None)
    }

    /// Loads a configuration, overriding the noise seed before validation
    /// so a command-line seed can satisfy the sigma-requires-seed rule.
    pub fn load_with_seed(path: &Path, seed: Option<u64>) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(ConfigError::Io)?;
        let mut config: RunConfig = serde_json::from_str(&text).map_err(ConfigError::Parse)?;
        if seed.is_some() {
            config.noise.seed = seed;
        }
        config.validate()?;
        Ok(config)
    }

    /// Structural and physical validity checks beyond the JSON schema.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.system_params()
            .validate()
            .map_err(|msg| ConfigError::Invalid(format!("system: {msg}")))?;

        if self.drive.detunings_hz.is_empty() {
            return Err(ConfigError::Invalid("drive.detunings_hz is empty".into()));
        }
        if self.drive.powers_w.is_empty() {
            return Err(ConfigError::Invalid("drive.powers_w is empty".into()));
        }
        if self.drive.detunings_hz.iter().any(|d| !d.is_finite()) {
            return Err(ConfigError::Invalid("drive.detunings_hz has non-finite entries".into()));
        }
        if self.drive.powers_w.iter().any(|p| !p.is_finite() || *p <= 0.0) {
            return Err(ConfigError::Invalid(
                "drive.powers_w entries must be positive and finite".into(),
            ));
        }

        let spec = &self.spectrum;
        if !spec.mmit_span_hz.is_finite()
            || spec.mmit_span_hz <= 0.0
            || !spec.normal_span_hz.is_finite()
            || spec.normal_span_hz <= 0.0
        {
            return Err(ConfigError::Invalid("spectrum spans must be positive and finite".into()));
        }
        if spec.mmit_points < 16 {
            return Err(ConfigError::Invalid(
                "spectrum.mmit_points must be at least 16 for the window fit".into(),
            ));
        }
        if spec.normal_points < 2 {
            return Err(ConfigError::Invalid("spectrum.normal_points must be at least 2".into()));
        }
        if let Some(c) = spec.mmit_center_hz {
            if !c.is_finite() {
                return Err(ConfigError::Invalid("spectrum.mmit_center_hz must be finite".into()));
            }
        }

        if !self.noise.sigma.is_finite() || self.noise.sigma < 0.0 {
            return Err(ConfigError::Invalid("noise.sigma must be nonnegative and finite".into()));
        }
        if self.noise.sigma > 0.0 && self.noise.seed.is_none() {
            return Err(ConfigError::Invalid(
                "noise.seed is required when noise.sigma > 0 (runs must be reproducible)".into(),
            ));
        }
        if !self.power_cutoff_w.is_finite() || self.power_cutoff_w <= 0.0 {
            return Err(ConfigError::Invalid("power_cutoff_w must be positive and finite".into()));
        }
        Ok(())
    }

    /// Angular-unit system parameters for the core crate.
    pub fn system_params(&self) -> SystemParams {
        self.system.to_params()
    }

    /// MMIT window grid center (Hz), defaulting to the phonon frequency.
    pub fn mmit_center_hz(&self) -> f64 {
        self.spectrum.mmit_center_hz.unwrap_or(self.system.omega_b_hz)
    }
}

/// Evenly spaced grid, inclusive of both ends.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "linspace needs at least two points");
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| if i == n - 1 { hi } else { lo + step * i as f64 }).collect()
}
