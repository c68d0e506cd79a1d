//! Synthetic probe spectra.
//!
//! Reflection off the drive port, S[probe] = 1 − κ_ext·Λ[probe], where Λ
//! is the cavity response including whatever the cavity hybridizes with.
//! Two flavors:
//!
//! * [`normal_mode_spectrum`]: weak probe, no drive. The magnon dresses
//!   the cavity and the reflection shows the two hybrid dips. Frequencies
//!   are absolute probe frequencies.
//! * [`mmit_spectrum`]: probe in the presence of a strong drive. The
//!   phonon dresses the magnon response through the drive-enhanced
//!   coupling and a narrow transparency (drive below a hybrid mode) or
//!   absorption (drive above) window opens at probe offset δ ≈ Ω_b from
//!   the drive. Frequencies are offsets from the drive tone.
//!
//! Grids and responses are stored in linear Hz because that is what the
//! file formats and the fitting layer speak; the conversion to angular
//! units happens inside the evaluators and nowhere else in the crate.
//!
//! The dressed magnon denominator is χ_m⁻¹[δ] − i·Σ_b[δ] with
//! Σ_b[δ] = i·|g_mb|²·(χ_b[δ] − χ_b*[−δ]): eliminating the phonon from
//! the linearized probe equations produces exactly this term, and the
//! resulting window pole reproduces the dressed phonon linewidth
//! Γ_b + 2·Im Σ[Ω_b] that the backaction module predicts (the fit layer
//! and the acceptance suite check the two against each other).

#[cfg(not(feature = "std"))]
use num_traits::Float as _;

use alloc::vec::Vec;
use core::f64::consts::TAU;
use core::fmt;

use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::params::{DriveConfig, SystemParams};
use crate::steady::steady_state;

/// What a [`Spectrum`]'s frequency axis means.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumKind {
    /// Absolute probe frequency (Hz).
    NormalMode,
    /// Probe offset from the drive tone (Hz).
    Mmit,
}

/// Provenance a spectrum carries along for fitting and file round-trips.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumMeta {
    /// Parameters the spectrum was synthesized from.
    pub params: SystemParams,
    /// Drive tone, present for MMIT spectra only.
    pub drive: Option<DriveConfig>,
    /// Axis convention.
    pub kind: SpectrumKind,
    /// Standard deviation of the additive complex noise (0 = noiseless).
    pub noise_sigma: f64,
    /// Seed of the last noise pass, if any.
    pub noise_seed: Option<u64>,
}

/// A complex reflection spectrum on a frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Frequency axis (Hz); meaning depends on `meta.kind`.
    pub freq: Vec<f64>,
    /// Complex reflection coefficient at each grid point.
    pub response: Vec<Complex64>,
    pub meta: SpectrumMeta,
}

/// Failure modes of the spectrum synthesizers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumError {
    /// The frequency grid is empty.
    EmptyGrid,
    /// The frequency grid contains a non-finite value.
    NonFiniteGrid,
    /// The driven steady state is singular (see
    /// [`crate::steady::SteadyStateError`]).
    Singular,
}

impl fmt::Display for SpectrumError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectrumError::EmptyGrid => write!(f, "frequency grid is empty"),
            SpectrumError::NonFiniteGrid => write!(f, "frequency grid contains non-finite values"),
            SpectrumError::Singular => write!(f, "driven steady state is singular"),
        }
    }
}

impl core::error::Error for SpectrumError {}

fn check_grid(freq_hz: &[f64]) -> Result<(), SpectrumError> {
    if freq_hz.is_empty() {
        return Err(SpectrumError::EmptyGrid);
    }
    if freq_hz.iter().any(|f| !f.is_finite()) {
        return Err(SpectrumError::NonFiniteGrid);
    }
    Ok(())
}

/// Undriven reflection spectrum showing the hybrid normal modes.
///
/// `freq_hz` holds absolute probe frequencies in Hz.
pub fn normal_mode_spectrum(
    params: &SystemParams,
    freq_hz: &[f64],
) -> Result<Spectrum, SpectrumError> {
    check_grid(freq_hz)?;
    let g_sq = params.g_am * params.g_am;
    let response = freq_hz
        .iter()
        .map(|&f| {
            let omega_p = TAU * f;
            let chi_a_inv = Complex64::new(0.5 * params.kappa, -(omega_p - params.omega_a));
            let chi_m_inv = Complex64::new(0.5 * params.gamma_m, -(omega_p - params.omega_m));
            let lambda = (chi_a_inv + g_sq / chi_m_inv).inv();
            Complex64::new(1.0, 0.0) - params.kappa_ext * lambda
        })
        .collect();
    Ok(Spectrum {
        freq: freq_hz.to_vec(),
        response,
        meta: SpectrumMeta {
            params: *params,
            drive: None,
            kind: SpectrumKind::NormalMode,
            noise_sigma: 0.0,
            noise_seed: None,
        },
    })
}

/// Driven reflection spectrum with the magnomechanical window.
///
/// `offset_hz` holds probe offsets δ/2π from the drive tone in Hz; the
/// window appears near +Ω_b/2π (transparency or absorption depending on
/// the drive detuning sign relative to the hybrid modes).
pub fn mmit_spectrum(
    params: &SystemParams,
    drive: &DriveConfig,
    offset_hz: &[f64],
) -> Result<Spectrum, SpectrumError> {
    check_grid(offset_hz)?;
    let ss = steady_state(params, drive).map_err(|_| SpectrumError::Singular)?;
    let population = ss.magnon_population;
    let g_mb_sq = params.g_mb0 * params.g_mb0 * population;
    let omega_eff = params.omega_b + params.delta_kerr * population;
    let delta_a = drive.omega_d - params.omega_a;
    let delta_m = drive.omega_d - params.omega_m;
    let g_sq = params.g_am * params.g_am;

    let chi_b = |delta: f64| -> Complex64 {
        Complex64::new(0.5 * params.gamma_b, -(delta - omega_eff)).inv()
    };

    let response = offset_hz
        .iter()
        .map(|&f| {
            let delta = TAU * f;
            // Phonon dressing of the magnon line: the resonant and
            // anti-resonant phonon propagators enter with opposite sign.
            let phonon = g_mb_sq * (chi_b(delta) - chi_b(-delta).conj());
            let chi_m_eff_inv = Complex64::new(0.5 * params.gamma_m, -(delta_m + delta)) + phonon;
            let chi_a_inv = Complex64::new(0.5 * params.kappa, -(delta_a + delta));
            let lambda = (chi_a_inv + g_sq / chi_m_eff_inv).inv();
            Complex64::new(1.0, 0.0) - params.kappa_ext * lambda
        })
        .collect();
    Ok(Spectrum {
        freq: offset_hz.to_vec(),
        response,
        meta: SpectrumMeta {
            params: *params,
            drive: Some(*drive),
            kind: SpectrumKind::Mmit,
            noise_sigma: 0.0,
            noise_seed: None,
        },
    })
}

/// Adds seeded complex Gaussian noise to a spectrum, returning a new one.
///
/// Both quadratures get independent N(0, sigma²) samples from a ChaCha8
/// stream, so a (spectrum, sigma, seed) triple is reproducible bit for
/// bit. `sigma = 0` returns the input unchanged apart from the recorded
/// seed.
pub fn add_noise(spectrum: &Spectrum, sigma: f64, seed: u64) -> Spectrum {
    let mut out = spectrum.clone();
    out.meta.noise_sigma = sigma;
    out.meta.noise_seed = Some(seed);
    if sigma == 0.0 {
        return out;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for value in out.response.iter_mut() {
        let (dre, dim) = gauss_pair(&mut rng);
        *value += Complex64::new(sigma * dre, sigma * dim);
    }
    out
}

/// One Box–Muller draw: two independent standard normal samples.
fn gauss_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    // 53-bit mantissas; u1 is shifted into (0, 1] so the log is finite.
    let u1 = ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / 9_007_199_254_740_992.0);
    let u2 = (rng.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0);
    let r = (-2.0 * u1.ln()).sqrt();
    let (s, c) = (TAU * u2).sin_cos();
    (r * c, r * s)
}
