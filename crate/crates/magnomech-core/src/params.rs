//! System parameters and drive configuration shared by every other module.
//!
//! All fields are angular frequencies or rates in rad/s. Configuration
//! files speak linear Hz and watts; the companion CLI crate converts at the
//! boundary so the model code never mixes conventions.

/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054571817e-34;

/// Fixed parameters of the cavity–magnon–phonon system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Cavity resonance ω_a (rad/s).
    pub omega_a: f64,
    /// Kittel-mode magnon resonance ω_m (rad/s).
    pub omega_m: f64,
    /// Total cavity energy decay rate κ (rad/s).
    pub kappa: f64,
    /// External (port) contribution to κ (rad/s), κ_ext ≤ κ.
    pub kappa_ext: f64,
    /// Magnon decay rate γ_m (rad/s).
    pub gamma_m: f64,
    /// Phonon resonance Ω_b (rad/s).
    pub omega_b: f64,
    /// Intrinsic phonon linewidth Γ_b (rad/s).
    pub gamma_b: f64,
    /// Magnon–photon coupling g_am (rad/s), taken ≥ 0.
    pub g_am: f64,
    /// Single-magnon magnomechanical coupling g⁰_mb (rad/s), taken ≥ 0.
    pub g_mb0: f64,
    /// Phonon damping correction per unit magnon population (rad/s).
    /// Negative values eat into the intrinsic linewidth at high drive.
    pub alpha: f64,
    /// Static phonon frequency pull per unit magnon population (rad/s).
    /// Zero evaluates all backaction quantities at the bare Ω_b.
    pub delta_kerr: f64,
}

impl SystemParams {
    /// Cavity–magnon detuning Δ_am = ω_a − ω_m (rad/s).
    pub fn delta_am(&self) -> f64 {
        self.omega_a - self.omega_m
    }

    /// Resolved-sideband test: Ω_b > 5·max(κ, γ_m). The scattering-rate
    /// picture of the backaction is only quantitative in this regime.
    pub fn is_resolved(&self) -> bool {
        self.omega_b > 5.0 * self.kappa.max(self.gamma_m)
    }

    /// Checks the invariants every operation in this crate assumes.
    ///
    /// Mode frequencies must be positive, decay rates nonnegative with
    /// κ_ext ≤ κ, couplings nonnegative (their sign is a gauge choice),
    /// and everything finite. `alpha` and `delta_kerr` may take either
    /// sign.
    pub fn validate(&self) -> Result<(), &'static str> {
        let fields = [
            self.omega_a,
            self.omega_m,
            self.kappa,
            self.kappa_ext,
            self.gamma_m,
            self.omega_b,
            self.gamma_b,
            self.g_am,
            self.g_mb0,
            self.alpha,
            self.delta_kerr,
        ];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err("system parameters must be finite");
        }
        if self.omega_a <= 0.0 {
            return Err("omega_a must be positive");
        }
        if self.omega_m <= 0.0 {
            return Err("omega_m must be positive");
        }
        if self.omega_b <= 0.0 {
            return Err("omega_b must be positive");
        }
        if self.kappa < 0.0 {
            return Err("kappa must be nonnegative");
        }
        if self.kappa_ext < 0.0 {
            return Err("kappa_ext must be nonnegative");
        }
        if self.kappa_ext > self.kappa {
            return Err("kappa_ext must not exceed kappa");
        }
        if self.gamma_m < 0.0 {
            return Err("gamma_m must be nonnegative");
        }
        if self.gamma_b < 0.0 {
            return Err("gamma_b must be nonnegative");
        }
        if self.g_am < 0.0 {
            return Err("g_am must be nonnegative");
        }
        if self.g_mb0 < 0.0 {
            return Err("g_mb0 must be nonnegative");
        }
        Ok(())
    }
}

/// A single microwave drive tone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveConfig {
    /// Drive frequency ω_d (rad/s).
    pub omega_d: f64,
    /// Drive power at the input port (W).
    pub power: f64,
}

impl DriveConfig {
    /// Checks that the drive is physical: positive finite frequency,
    /// nonnegative finite power.
    pub fn validate(&self) -> Result<(), &'static str> {
        if !self.omega_d.is_finite() || self.omega_d <= 0.0 {
            return Err("omega_d must be positive and finite");
        }
        if !self.power.is_finite() || self.power < 0.0 {
            return Err("power must be nonnegative and finite");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::reference_params;

    #[test]
    fn reference_set_is_valid_and_resolved() {
        let p = reference_params();
        p.validate().unwrap();
        assert!(p.is_resolved());
        assert!(p.delta_am() < 0.0);
    }

    #[test]
    fn resolved_sideband_boundary() {
        let mut p = reference_params();
        // Ω_b exactly 5·max(κ, γ_m) does not count as resolved.
        p.omega_b = 5.0 * p.kappa.max(p.gamma_m);
        assert!(!p.is_resolved());
        p.omega_b *= 1.0 + 1e-12;
        assert!(p.is_resolved());
    }

    #[test]
    fn validation_rejects_bad_fields() {
        let good = reference_params();

        let mut p = good;
        p.kappa_ext = p.kappa * 1.5;
        assert!(p.validate().is_err());

        let mut p = good;
        p.gamma_m = -1.0;
        assert!(p.validate().is_err());

        let mut p = good;
        p.omega_a = f64::NAN;
        assert!(p.validate().is_err());

        let mut p = good;
        p.g_am = -1.0;
        assert!(p.validate().is_err());

        // alpha and delta_kerr may be negative.
        let mut p = good;
        p.alpha = -1.0;
        p.delta_kerr = -2.0;
        p.validate().unwrap();
    }

    #[test]
    fn drive_validation() {
        DriveConfig { omega_d: 1.0, power: 0.0 }.validate().unwrap();
        assert!(DriveConfig { omega_d: 0.0, power: 1.0 }.validate().is_err());
        assert!(DriveConfig { omega_d: 1.0, power: -1.0 }.validate().is_err());
        assert!(DriveConfig { omega_d: 1.0, power: f64::INFINITY }.validate().is_err());
    }
}
