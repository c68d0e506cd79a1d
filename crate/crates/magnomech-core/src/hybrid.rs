//! Magnon–photon hybridization.
//!
//! The beam-splitter coupling g_am mixes the bare cavity and magnon modes
//! into an upper/lower normal-mode pair. Everything downstream (steady
//! state, scattering rates, spectra) is phrased in terms of these modes, so
//! the rotation convention is fixed here, once: the upper mode is the
//! eigenvector of the bare-frequency matrix with eigenvalue ω₊,
//!
//!   Â₊ = cos φ · â + sin φ · m̂,   Â₋ = −sin φ · â + cos φ · m̂,
//!
//! with φ = ½·atan2(2·g_am, Δ_am) ∈ [0, π/2] and Δ_am = ω_a − ω_m. As
//! g_am → 0 the upper mode continuously becomes whichever bare mode sits
//! higher. The reported mixing angle θ follows the folded branch convention
//! (|θ| ≤ π/4, θ → 0 as g_am → 0, jump at Δ_am = 0); θ and φ carry the
//! same information on complementary branches.

#[cfg(not(feature = "std"))]
use num_traits::Float as _;

use num_complex::Complex64;

use crate::params::SystemParams;

/// Hybridized normal-mode pair produced by [`hybridize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HybridModes {
    /// Upper normal-mode frequency ω₊ (rad/s).
    pub omega_plus: f64,
    /// Lower normal-mode frequency ω₋ (rad/s).
    pub omega_minus: f64,
    /// Upper-mode decay rate κ₊ = κ·cos²φ + γ_m·sin²φ (rad/s).
    pub kappa_plus: f64,
    /// Lower-mode decay rate κ₋ = κ·sin²φ + γ_m·cos²φ (rad/s).
    pub kappa_minus: f64,
    /// Folded mixing angle θ ∈ [−π/4, π/4] (rad).
    pub theta: f64,
    /// Normal-mode splitting ω₊ − ω₋ = √(Δ_am² + 4g_am²) (rad/s).
    pub splitting: f64,
    sin_phi: f64,
    cos_phi: f64,
}

impl HybridModes {
    /// Magnon amplitude weights (w₊, w₋) = (sin φ, cos φ) of the upper and
    /// lower modes. Their squares are the magnon fractions; w₊² + w₋² = 1.
    pub fn magnon_weights(&self) -> (f64, f64) {
        (self.sin_phi, self.cos_phi)
    }

    /// Rotates bare-mode amplitudes (⟨â⟩, ⟨m̂⟩) into normal-mode
    /// amplitudes (⟨Â₊⟩, ⟨Â₋⟩).
    pub fn rotate(&self, a: Complex64, m: Complex64) -> (Complex64, Complex64) {
        (self.cos_phi * a + self.sin_phi * m, self.cos_phi * m - self.sin_phi * a)
    }

    /// Inverse of [`HybridModes::rotate`].
    pub fn rotate_back(&self, a_plus: Complex64, a_minus: Complex64) -> (Complex64, Complex64) {
        (
            self.cos_phi * a_plus - self.sin_phi * a_minus,
            self.sin_phi * a_plus + self.cos_phi * a_minus,
        )
    }
}

/// Diagonalizes the magnon–photon block of the Hamiltonian.
pub fn hybridize(params: &SystemParams) -> HybridModes {
    let delta_am = params.delta_am();
    let g2 = 2.0 * params.g_am;
    let splitting = (delta_am * delta_am + g2 * g2).sqrt();
    let mid = 0.5 * (params.omega_a + params.omega_m);

    let phi = 0.5 * f64::atan2(g2, delta_am);
    let (sin_phi, cos_phi) = phi.sin_cos();

    // Folded branch of the conventional mixing angle. The principal value
    // of ½·atan2(−2g, Δ) lives in (−π/2, 0] for g ≥ 0; folding by π/2
    // keeps |θ| ≤ π/4 and sends θ → 0 on both sides of the anticrossing.
    let mut theta = 0.5 * f64::atan2(-g2, delta_am);
    if theta < -core::f64::consts::FRAC_PI_4 {
        theta += core::f64::consts::FRAC_PI_2;
    } else if theta > core::f64::consts::FRAC_PI_4 {
        theta -= core::f64::consts::FRAC_PI_2;
    }

    HybridModes {
        omega_plus: mid + 0.5 * splitting,
        omega_minus: mid - 0.5 * splitting,
        kappa_plus: params.kappa * cos_phi * cos_phi + params.gamma_m * sin_phi * sin_phi,
        kappa_minus: params.kappa * sin_phi * sin_phi + params.gamma_m * cos_phi * cos_phi,
        theta,
        splitting,
        sin_phi,
        cos_phi,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{hz, reference_params};
    use approx::{assert_relative_eq, assert_ulps_eq};
    use proptest::prelude::*;

    #[test]
    fn reference_splitting_is_21_mhz() {
        // The reference detuning 9.594665 MHz is the inversion of a
        // 21.0 MHz splitting at g_am = 9.34 MHz; check the forward map.
        let modes = hybridize(&reference_params());
        assert_relative_eq!(modes.splitting, hz(21.0e6), max_relative = 1e-8);
        assert!(modes.omega_plus > modes.omega_minus);
        assert_relative_eq!(
            modes.omega_plus - modes.omega_minus,
            modes.splitting,
            max_relative = 1e-12
        );
    }

    #[test]
    fn degenerate_point_splits_by_twice_the_coupling() {
        let mut p = reference_params();
        p.omega_m = p.omega_a;
        let modes = hybridize(&p);
        assert_ulps_eq!(modes.splitting, 2.0 * p.g_am, max_ulps = 2);
        assert_relative_eq!(modes.splitting, hz(18.68e6), max_relative = 1e-12);
        // Equal mixing: both decay rates collapse to the mean and the
        // folded angle sits at its -π/4 edge.
        assert_relative_eq!(modes.kappa_plus, 0.5 * (p.kappa + p.gamma_m), max_relative = 1e-12);
        assert_relative_eq!(modes.kappa_minus, 0.5 * (p.kappa + p.gamma_m), max_relative = 1e-12);
        assert_relative_eq!(modes.theta.abs(), core::f64::consts::FRAC_PI_4, max_relative = 1e-12);
        let (wp, wm) = modes.magnon_weights();
        assert_relative_eq!(wp, core::f64::consts::FRAC_1_SQRT_2, max_relative = 1e-12);
        assert_relative_eq!(wm, core::f64::consts::FRAC_1_SQRT_2, max_relative = 1e-12);
    }

    #[test]
    fn decoupled_limit_recovers_bare_modes() {
        // Magnon above the cavity: the upper mode must become the magnon.
        let mut p = reference_params();
        p.g_am = 0.0;
        let modes = hybridize(&p);
        assert_ulps_eq!(modes.omega_plus, p.omega_m, max_ulps = 2);
        assert_ulps_eq!(modes.omega_minus, p.omega_a, max_ulps = 2);
        assert_ulps_eq!(modes.kappa_plus, p.gamma_m, max_ulps = 2);
        assert_ulps_eq!(modes.kappa_minus, p.kappa, max_ulps = 2);
        assert_eq!(modes.theta, 0.0);
        let (wp, wm) = modes.magnon_weights();
        assert_relative_eq!(wp, 1.0, max_relative = 1e-12);
        assert!(wm.abs() < 1e-12);

        // Cavity above the magnon: the labels must swap.
        p.omega_m = p.omega_a - hz(9.594_665_18e6);
        let modes = hybridize(&p);
        assert_ulps_eq!(modes.omega_plus, p.omega_a, max_ulps = 2);
        assert_ulps_eq!(modes.kappa_plus, p.kappa, max_ulps = 2);
        assert_eq!(modes.theta, 0.0);
        let (wp, wm) = modes.magnon_weights();
        assert!(wp.abs() < 1e-12);
        assert_relative_eq!(wm, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn rotation_is_unitary_and_invertible() {
        let modes = hybridize(&reference_params());
        let a = Complex64::new(0.3, -1.7);
        let m = Complex64::new(-2.1, 0.4);
        let (ap, am) = modes.rotate(a, m);
        assert_relative_eq!(
            ap.norm_sqr() + am.norm_sqr(),
            a.norm_sqr() + m.norm_sqr(),
            max_relative = 1e-12
        );
        let (a2, m2) = modes.rotate_back(ap, am);
        assert_relative_eq!(a2.re, a.re, max_relative = 1e-12);
        assert_relative_eq!(a2.im, a.im, max_relative = 1e-12);
        assert_relative_eq!(m2.re, m.re, max_relative = 1e-12);
        assert_relative_eq!(m2.im, m.im, max_relative = 1e-12);
    }

    #[test]
    fn branches_are_continuous_through_the_anticrossing() {
        // ω±, κ± and the splitting must not jump as Δ_am crosses zero
        // (θ does, by construction of the fold). Keep the bare-mode
        // midpoint fixed so only the detuning sign flips.
        let mut p = reference_params();
        let center = p.omega_a;
        // κ± depends on the detuning at first order through the mixing
        // angle (dφ/dΔ = −1/4g at the crossing), so the step must be small
        // enough that ε·(κ−γ_m)/(4g) is far below the tolerance.
        let eps = 1e-3; // rad/s, vanishing on the MHz scale of the gap
        p.omega_a = center - 0.5 * eps;
        p.omega_m = center + 0.5 * eps;
        let below = hybridize(&p);
        p.omega_a = center + 0.5 * eps;
        p.omega_m = center - 0.5 * eps;
        let above = hybridize(&p);
        assert_relative_eq!(below.omega_plus, above.omega_plus, max_relative = 1e-12);
        assert_relative_eq!(below.omega_minus, above.omega_minus, max_relative = 1e-12);
        assert_relative_eq!(below.kappa_plus, above.kappa_plus, max_relative = 1e-9);
        assert_relative_eq!(below.splitting, above.splitting, max_relative = 1e-9);
    }

    #[test]
    fn theta_matches_the_documented_relation_to_phi() {
        // θ = −φ for Δ_am > 0 and θ = π/2 − φ for Δ_am < 0.
        let mut p = reference_params();
        let modes = hybridize(&p); // reference has Δ_am < 0
        let phi = f64::atan2(modes.magnon_weights().0, modes.magnon_weights().1);
        assert_relative_eq!(modes.theta, core::f64::consts::FRAC_PI_2 - phi, max_relative = 1e-12);

        p.omega_m = p.omega_a - hz(5.0e6);
        let modes = hybridize(&p);
        let phi = f64::atan2(modes.magnon_weights().0, modes.magnon_weights().1);
        assert_relative_eq!(modes.theta, -phi, max_relative = 1e-12);
    }

    proptest! {
        #[test]
        fn splitting_never_below_twice_the_coupling(
            delta_mhz in -40.0f64..40.0,
            g_mhz in 0.01f64..20.0,
        ) {
            let mut p = reference_params();
            p.omega_m = p.omega_a - hz(delta_mhz * 1e6);
            p.g_am = hz(g_mhz * 1e6);
            let modes = hybridize(&p);
            prop_assert!(modes.splitting >= 2.0 * p.g_am * (1.0 - 1e-12));
            prop_assert!(modes.omega_plus >= modes.omega_minus);
        }

        #[test]
        fn decay_rates_stay_inside_the_bare_range_and_preserve_the_trace(
            delta_mhz in -40.0f64..40.0,
            g_mhz in 0.01f64..20.0,
            kappa_mhz in 0.1f64..5.0,
            gamma_mhz in 0.1f64..5.0,
        ) {
            let mut p = reference_params();
            p.omega_m = p.omega_a - hz(delta_mhz * 1e6);
            p.g_am = hz(g_mhz * 1e6);
            p.kappa = hz(kappa_mhz * 1e6);
            p.kappa_ext = 0.5 * p.kappa;
            p.gamma_m = hz(gamma_mhz * 1e6);
            let modes = hybridize(&p);
            let lo = p.kappa.min(p.gamma_m) * (1.0 - 1e-12);
            let hi = p.kappa.max(p.gamma_m) * (1.0 + 1e-12);
            prop_assert!(modes.kappa_plus >= lo && modes.kappa_plus <= hi);
            prop_assert!(modes.kappa_minus >= lo && modes.kappa_minus <= hi);
            let trace = modes.kappa_plus + modes.kappa_minus;
            prop_assert!((trace - (p.kappa + p.gamma_m)).abs() <= 1e-12 * trace);
        }

        #[test]
        fn rotation_preserves_total_population(
            re_a in -10.0f64..10.0, im_a in -10.0f64..10.0,
            re_m in -10.0f64..10.0, im_m in -10.0f64..10.0,
            delta_mhz in -40.0f64..40.0,
            g_mhz in 0.01f64..20.0,
        ) {
            let mut p = reference_params();
            p.omega_m = p.omega_a - hz(delta_mhz * 1e6);
            p.g_am = hz(g_mhz * 1e6);
            let modes = hybridize(&p);
            let a = Complex64::new(re_a, im_a);
            let m = Complex64::new(re_m, im_m);
            let (ap, am) = modes.rotate(a, m);
            let before = a.norm_sqr() + m.norm_sqr();
            let after = ap.norm_sqr() + am.norm_sqr();
            prop_assert!((before - after).abs() <= 1e-12 * before.max(1e-300));
        }
    }
}
