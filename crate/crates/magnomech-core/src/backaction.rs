//! Phonon self-energy and magnomechanical damping, by two routes.
//!
//! The exact route dresses the magnon susceptibility with the cavity,
//!
//!   Ξ[ω] = 1 / (χ_m⁻¹[ω] + g_am²·χ_a[ω]),
//!   Σ[ω] = i·|g_mb|²·(Ξ[ω] − Ξ*[−ω]),   |g_mb|² = (g⁰_mb)²·|⟨m̂⟩|²,
//!
//! and reads the damping off the dressed phonon pole: Γ_mag = 2·Im Σ[Ω_b],
//! frequency pull Ω_b − Re Σ[Ω_b]. The scattering route views the same
//! physics as Stokes/anti-Stokes scattering into the two hybrid modes,
//!
//!   Γ± = 4|g±|²κ± / (4(Δ± ± Ω_b)² + κ±²),   Γ_mag ≈ Γ₊ − Γ₋,
//!
//! which is quantitative in the resolved-sideband, weak-coupling regime.
//! The two routes are computed independently and their agreement is the
//! main correctness oracle for the whole model (see tests/oracle.rs and
//! the acceptance suite).
//!
//! Sign conventions: detunings are Δ_x = ω_d − ω_x; positive Γ_mag damps
//! the phonon (drive on the lower sideband of a hybrid mode), negative
//! anti-damps. `spring_shift` is the additive frequency pull, so the
//! dressed phonon sits at Ω_b + spring_shift.

#[cfg(not(feature = "std"))]
use num_traits::Float as _;

use num_complex::Complex64;

use crate::hybrid::{hybridize, HybridModes};
use crate::params::{DriveConfig, SystemParams};
use crate::steady::{steady_state, SteadyStateError};

/// Bare magnon susceptibility χ_m[ω] = 1/(−i(Δ_m + ω) + γ_m/2) in the
/// drive frame, evaluated at sideband offset ω from the drive.
pub fn chi_m(omega: f64, params: &SystemParams, drive: &DriveConfig) -> Complex64 {
    let delta_m = drive.omega_d - params.omega_m;
    Complex64::new(0.5 * params.gamma_m, -(delta_m + omega)).inv()
}

/// Bare cavity susceptibility χ_a[ω] = 1/(−i(Δ_a + ω) + κ/2).
pub fn chi_a(omega: f64, params: &SystemParams, drive: &DriveConfig) -> Complex64 {
    let delta_a = drive.omega_d - params.omega_a;
    Complex64::new(0.5 * params.kappa, -(delta_a + omega)).inv()
}

/// Cavity-dressed magnon response Ξ[ω] = 1/(χ_m⁻¹[ω] + g_am²·χ_a[ω]).
///
/// Its poles are the hybrid modes; its real part is the absorptive
/// response sampled by the Stokes and anti-Stokes sidebands.
pub fn dressed_magnon_response(
    omega: f64,
    params: &SystemParams,
    drive: &DriveConfig,
) -> Complex64 {
    let delta_m = drive.omega_d - params.omega_m;
    let chi_m_inv = Complex64::new(0.5 * params.gamma_m, -(delta_m + omega));
    (chi_m_inv + params.g_am * params.g_am * chi_a(omega, params, drive)).inv()
}

fn self_energy_with_population(
    omega: f64,
    params: &SystemParams,
    drive: &DriveConfig,
    population: f64,
) -> Complex64 {
    let g_mb_sq = params.g_mb0 * params.g_mb0 * population;
    let xi_up = dressed_magnon_response(omega, params, drive);
    let xi_down = dressed_magnon_response(-omega, params, drive);
    Complex64::i() * g_mb_sq * (xi_up - xi_down.conj())
}

/// Phonon self-energy Σ[ω] = i·|g_mb|²·(Ξ[ω] − Ξ*[−ω]) at sideband
/// frequency ω, with |g_mb|² taken from the driven steady state.
pub fn self_energy(
    omega: f64,
    params: &SystemParams,
    drive: &DriveConfig,
) -> Result<Complex64, SteadyStateError> {
    let ss = steady_state(params, drive)?;
    Ok(self_energy_with_population(omega, params, drive, ss.magnon_population))
}

fn rates_from(
    modes: &HybridModes,
    params: &SystemParams,
    drive: &DriveConfig,
    population: f64,
    omega_eval: f64,
) -> (f64, f64) {
    let (w_plus, w_minus) = modes.magnon_weights();
    // |g±|² via the closed-form population keeps the rates exactly linear
    // in drive power (the amplitude route would reintroduce √P rounding).
    let g_mb_sq = params.g_mb0 * params.g_mb0 * population;
    let g_plus_sq = g_mb_sq * (w_plus * w_plus);
    let g_minus_sq = g_mb_sq * (w_minus * w_minus);
    let delta_plus = drive.omega_d - modes.omega_plus;
    let delta_minus = drive.omega_d - modes.omega_minus;
    let s_plus = delta_plus + omega_eval;
    let s_minus = delta_minus - omega_eval;
    let kp = modes.kappa_plus;
    let km = modes.kappa_minus;
    let gamma_plus = 4.0 * g_plus_sq * kp / (4.0 * s_plus * s_plus + kp * kp);
    let gamma_minus = 4.0 * g_minus_sq * km / (4.0 * s_minus * s_minus + km * km);
    (gamma_plus, gamma_minus)
}

/// Stokes/anti-Stokes scattering rates (Γ₊, Γ₋) into the upper and lower
/// hybrid modes. Γ₊ damps the phonon, Γ₋ anti-damps it.
pub fn scattering_rates(
    params: &SystemParams,
    drive: &DriveConfig,
) -> Result<(f64, f64), SteadyStateError> {
    let modes = hybridize(params);
    let ss = steady_state(params, drive)?;
    let omega_eval = params.omega_b + params.delta_kerr * ss.magnon_population;
    Ok(rates_from(&modes, params, drive, ss.magnon_population, omega_eval))
}

/// Everything the backaction does to the phonon at one drive point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackactionResult {
    /// Phonon self-energy Σ[Ω_b] (rad/s).
    pub sigma: Complex64,
    /// Exact-route damping 2·Im Σ[Ω_b] (rad/s).
    pub gamma_mag_exact: f64,
    /// Upper-sideband scattering rate Γ₊ (rad/s).
    pub gamma_plus: f64,
    /// Lower-sideband scattering rate Γ₋ (rad/s).
    pub gamma_minus: f64,
    /// Scattering-route damping Γ₊ − Γ₋ (rad/s).
    pub gamma_mag_approx: f64,
    /// Exact-route damping plus the phenomenological α·|⟨m̂⟩|² term (rad/s).
    pub gamma_mag_corrected: f64,
    /// Additive phonon frequency pull −Re Σ[Ω_b] (rad/s); the dressed
    /// resonance sits at Ω_b + spring_shift.
    pub spring_shift: f64,
    /// Total phonon linewidth Γ_b + gamma_mag_corrected (rad/s).
    pub gamma_tot: f64,
    /// False when gamma_tot < 0, i.e. the anti-damping overwhelms the
    /// intrinsic linewidth and the linearized phonon goes unstable.
    pub stable: bool,
    /// True while |g±| < κ±/10 for both modes, the regime where the
    /// linearized weak-coupling treatment is trustworthy.
    pub weak_coupling: bool,
}

/// Evaluates both backaction routes plus the corrected totals at one
/// drive point. The evaluation frequency is Ω_b + delta_kerr·|⟨m̂⟩|²,
/// which reduces to the bare Ω_b for the default delta_kerr = 0.
pub fn gamma_mag(
    params: &SystemParams,
    drive: &DriveConfig,
) -> Result<BackactionResult, SteadyStateError> {
    let ss = steady_state(params, drive)?;
    let modes = hybridize(params);
    let population = ss.magnon_population;
    let omega_eval = params.omega_b + params.delta_kerr * population;

    let sigma = self_energy_with_population(omega_eval, params, drive, population);
    let gamma_mag_exact = 2.0 * sigma.im;
    let (gamma_plus, gamma_minus) = rates_from(&modes, params, drive, population, omega_eval);
    let gamma_mag_approx = gamma_plus - gamma_minus;
    let gamma_mag_corrected = gamma_mag_exact + params.alpha * population;
    let gamma_tot = params.gamma_b + gamma_mag_corrected;

    let g_mb = params.g_mb0 * population.sqrt();
    let (w_plus, w_minus) = modes.magnon_weights();
    let weak_coupling =
        g_mb * w_plus < 0.1 * modes.kappa_plus && g_mb * w_minus < 0.1 * modes.kappa_minus;

    Ok(BackactionResult {
        sigma,
        gamma_mag_exact,
        gamma_plus,
        gamma_minus,
        gamma_mag_approx,
        gamma_mag_corrected,
        spring_shift: -sigma.re,
        gamma_tot,
        stable: gamma_tot >= 0.0,
        weak_coupling,
    })
}
