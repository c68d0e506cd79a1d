//! Joint recovery of g⁰_mb and α from rate data across the whole
//! (detuning, power) grid.
//!
//! With everything else known, the corrected backaction rate is linear
//! in the two unknowns once they are packaged as u = (g⁰_mb)² and
//! v = α:
//!
//!   Γ_mag(Δ, P) = u·F₁(Δ, P) + v·F₂(Δ, P),
//!
//! where F₁ is the exact-route rate evaluated at unit coupling and F₂ is
//! the magnon population. Both basis functions come from the forward
//! model, so the fit is a 2-parameter weighted linear least squares — no
//! iteration, no starting guess, and a closed-form covariance that is
//! mapped back to (g⁰_mb, α) by the delta method.

#[cfg(not(feature = "std"))]
use num_traits::Float as _;

use alloc::vec::Vec;
use core::f64::consts::TAU;

use super::linalg::invert_2x2_sym;
use super::FitError;
use crate::backaction::gamma_mag;
use crate::hybrid::hybridize;
use crate::params::{DriveConfig, SystemParams};
use crate::steady::steady_state;

/// One measured rate point. Interface-level units: the detuning is
/// Δ₊/2π, the drive offset from the upper hybrid mode in Hz, and the
/// rate is in Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalPoint {
    /// Drive detuning from the upper hybrid mode, (ω_d − ω₊)/2π (Hz).
    pub detuning_hz: f64,
    /// Drive power (W).
    pub power_w: f64,
    /// Measured magnomechanical rate Γ_mag/2π (Hz).
    pub gamma_mag_hz: f64,
    /// Least-squares weight; 1.0 everywhere for the unweighted default.
    pub weight: f64,
}

/// Result of [`fit_global`], in linear units (Hz).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalFit {
    /// Recovered single-magnon coupling g⁰_mb/2π (Hz).
    pub g_mb0: f64,
    /// Recovered damping correction α/2π (Hz per magnon).
    pub alpha: f64,
    /// Covariance of (g_mb0, alpha), Hz².
    pub covariance: [[f64; 2]; 2],
    /// Weighted residual sum of squares (Hz²).
    pub chi_square: f64,
    /// Degrees of freedom, n − 2.
    pub dof: usize,
}

/// Fits (g⁰_mb, α) to a rate dataset. `params_known` supplies every
/// other parameter; its own `g_mb0` and `alpha` fields are ignored.
pub fn fit_global(
    dataset: &[GlobalPoint],
    params_known: &SystemParams,
) -> Result<GlobalFit, FitError> {
    let n = dataset.len();
    if n < 3 {
        return Err(FitError::DegenerateDesign);
    }
    if dataset.iter().any(|p| {
        !p.detuning_hz.is_finite()
            || !p.power_w.is_finite()
            || !p.gamma_mag_hz.is_finite()
            || p.weight.is_nan()
            || p.weight < 0.0
    }) {
        return Err(FitError::DegenerateDesign);
    }

    // Basis parameter set: unit coupling (1 Hz linear), no alpha term.
    let mut basis = *params_known;
    basis.g_mb0 = TAU;
    basis.alpha = 0.0;
    let modes = hybridize(&basis);

    let mut f1 = Vec::with_capacity(n);
    let mut f2 = Vec::with_capacity(n);
    for point in dataset {
        let drive = DriveConfig {
            omega_d: modes.omega_plus + TAU * point.detuning_hz,
            power: point.power_w,
        };
        let rate = gamma_mag(&basis, &drive).map_err(|_| FitError::Singular)?;
        let ss = steady_state(&basis, &drive).map_err(|_| FitError::Singular)?;
        // Hz contribution per (g⁰_mb/2π)² in Hz².
        f1.push(rate.gamma_mag_exact / TAU);
        // Hz contribution per α/2π in Hz.
        f2.push(ss.magnon_population);
    }

    // Column scaling keeps the 2×2 normal matrix well conditioned even
    // though F₁ and F₂ live on wildly different magnitudes.
    let s1 = f1.iter().map(|v| v.abs()).fold(0.0f64, f64::max);
    let s2 = f2.iter().map(|v| v.abs()).fold(0.0f64, f64::max);
    if s1 == 0.0 || s2 == 0.0 {
        return Err(FitError::DegenerateDesign);
    }

    let mut m = [[0.0f64; 2]; 2];
    let mut rhs = [0.0f64; 2];
    for i in 0..n {
        let w = dataset[i].weight;
        let x1 = f1[i] / s1;
        let x2 = f2[i] / s2;
        let y = dataset[i].gamma_mag_hz;
        m[0][0] += w * x1 * x1;
        m[0][1] += w * x1 * x2;
        m[1][1] += w * x2 * x2;
        rhs[0] += w * x1 * y;
        rhs[1] += w * x2 * y;
    }
    m[1][0] = m[0][1];
    let minv = invert_2x2_sym(m).ok_or(FitError::DegenerateDesign)?;
    let u_scaled = minv[0][0] * rhs[0] + minv[0][1] * rhs[1];
    let v_scaled = minv[1][0] * rhs[0] + minv[1][1] * rhs[1];
    let u = u_scaled / s1; // (g⁰_mb/2π)², Hz²
    let v = v_scaled / s2; // α/2π, Hz

    if u < 0.0 {
        return Err(FitError::NegativeCouplingSquare);
    }

    let mut chi_square = 0.0;
    for i in 0..n {
        let r = dataset[i].gamma_mag_hz - (u * f1[i] + v * f2[i]);
        chi_square += dataset[i].weight * r * r;
    }
    let dof = n - 2;
    let sigma_sq = chi_square / dof as f64;

    // Covariance of the scaled (u, v), rescaled, then pushed through
    // g = √u by the delta method: var(g) = var(u)/(4u).
    let var_u = sigma_sq * minv[0][0] / (s1 * s1);
    let var_v = sigma_sq * minv[1][1] / (s2 * s2);
    let cov_uv = sigma_sq * minv[0][1] / (s1 * s2);
    let g = u.sqrt();
    let (var_g, cov_ga) = if u > 0.0 {
        (var_u / (4.0 * u), cov_uv / (2.0 * g))
    } else {
        (f64::INFINITY, f64::INFINITY)
    };

    Ok(GlobalFit {
        g_mb0: g,
        alpha: v,
        covariance: [[var_g, cov_ga], [cov_ga, var_v]],
        chi_square,
        dof,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{hz, reference_params};
    use approx::assert_relative_eq;
    use rand_chacha::rand_core::{RngCore, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gauss(rng: &mut ChaCha8Rng) -> f64 {
        let u1 = ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / 9_007_199_254_740_992.0);
        let u2 = (rng.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0);
        (-2.0 * u1.ln()).sqrt() * (core::f64::consts::TAU * u2).cos()
    }

    fn synthetic_dataset(params: &SystemParams, sigma_hz: f64, seed: u64) -> Vec<GlobalPoint> {
        let modes = hybridize(params);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let detunings_hz = [-13.5e6, -12.45e6, -11.2e6, -10.0e6, -8.55e6];
        let powers_w = [0.02, 0.04, 0.08, 0.12, 0.16];
        let mut out = Vec::new();
        for &d in &detunings_hz {
            for &p in &powers_w {
                let drive = DriveConfig { omega_d: modes.omega_plus + hz(d), power: p };
                let rate = gamma_mag(params, &drive).unwrap();
                out.push(GlobalPoint {
                    detuning_hz: d,
                    power_w: p,
                    gamma_mag_hz: rate.gamma_mag_corrected / TAU + sigma_hz * gauss(&mut rng),
                    weight: 1.0,
                });
            }
        }
        out
    }

    #[test]
    fn noiseless_dataset_recovers_both_parameters_to_numerical_precision() {
        let params = reference_params();
        let dataset = synthetic_dataset(&params, 0.0, 0);
        let fit = fit_global(&dataset, &params).unwrap();
        assert_relative_eq!(fit.g_mb0, params.g_mb0 / TAU, max_relative = 1e-8);
        assert_relative_eq!(fit.alpha, params.alpha / TAU, max_relative = 1e-8);
        assert_eq!(fit.dof, dataset.len() - 2);
        assert!(fit.chi_square < 1e-12);
    }

    #[test]
    fn recovery_error_shrinks_with_the_noise() {
        // Median over seeds of the α recovery error must decrease
        // monotonically across noise levels 4%, 2%, 1%, 0.5% of the
        // largest rate in the dataset.
        let params = reference_params();
        let clean = synthetic_dataset(&params, 0.0, 0);
        let scale = clean.iter().map(|p| p.gamma_mag_hz.abs()).fold(0.0f64, f64::max);
        let mut medians = Vec::new();
        for &frac in &[0.04, 0.02, 0.01, 0.005] {
            let mut errors: Vec<f64> = (0..10)
                .map(|seed| {
                    let data = synthetic_dataset(&params, frac * scale, 1000 + seed);
                    let fit = fit_global(&data, &params).unwrap();
                    ((fit.alpha - params.alpha / TAU) / (params.alpha / TAU)).abs()
                })
                .collect();
            errors.sort_by(|a, b| a.partial_cmp(b).unwrap());
            medians.push(0.5 * (errors[4] + errors[5]));
        }
        for pair in medians.windows(2) {
            assert!(pair[1] < pair[0], "median alpha error did not shrink: {medians:?}");
        }
    }

    #[test]
    fn covariance_tracks_the_actual_scatter() {
        let params = reference_params();
        let clean = synthetic_dataset(&params, 0.0, 0);
        let scale = clean.iter().map(|p| p.gamma_mag_hz.abs()).fold(0.0f64, f64::max);
        let sigma = 0.02 * scale;
        let mut pulls = Vec::new();
        for seed in 0..40 {
            let data = synthetic_dataset(&params, sigma, 7000 + seed);
            let fit = fit_global(&data, &params).unwrap();
            let err = fit.alpha - params.alpha / TAU;
            pulls.push(err / fit.covariance[1][1].sqrt());
        }
        let mean = pulls.iter().sum::<f64>() / pulls.len() as f64;
        let var =
            pulls.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / (pulls.len() - 1) as f64;
        // Pull distribution should be roughly standard normal.
        assert!(mean.abs() < 0.7, "pull mean {mean}");
        assert!(var > 0.3 && var < 3.0, "pull variance {var}");
    }

    #[test]
    fn inconsistent_sign_data_reports_negative_coupling_square() {
        let params = reference_params();
        let mut dataset = synthetic_dataset(&params, 0.0, 0);
        for p in dataset.iter_mut() {
            p.gamma_mag_hz = -p.gamma_mag_hz;
        }
        // alpha alone cannot absorb a sign flip of the F1-dominated
        // signal, so u must come out negative.
        assert_eq!(fit_global(&dataset, &params), Err(FitError::NegativeCouplingSquare));
    }

    #[test]
    fn degenerate_datasets_are_rejected() {
        let params = reference_params();
        let dataset = synthetic_dataset(&params, 0.0, 0);
        assert_eq!(fit_global(&dataset[..2], &params), Err(FitError::DegenerateDesign));
        // Identical rows give a rank-one design.
        let row = dataset[0];
        let clones = [row, row, row, row];
        assert_eq!(fit_global(&clones, &params), Err(FitError::DegenerateDesign));
    }

    #[test]
    fn weights_are_honored() {
        // Corrupt one point but zero its weight: the fit must not move.
        let params = reference_params();
        let clean = synthetic_dataset(&params, 0.0, 0);
        let fit_clean = fit_global(&clean, &params).unwrap();
        let mut tainted = clean.clone();
        tainted[7].gamma_mag_hz += 1e4;
        tainted[7].weight = 0.0;
        let fit_tainted = fit_global(&tainted, &params).unwrap();
        assert_relative_eq!(fit_clean.g_mb0, fit_tainted.g_mb0, max_relative = 1e-10);
        assert_relative_eq!(fit_clean.alpha, fit_tainted.alpha, max_relative = 1e-10);
    }
}
