//! Shared fixtures for the unit tests.

use crate::params::{DriveConfig, SystemParams};

pub const TAU: f64 = core::f64::consts::TAU;

/// Linear frequency in Hz to angular rad/s.
pub fn hz(f: f64) -> f64 {
    TAU * f
}

/// The documented reference parameter set (same numbers as
/// configs/reference.json in the workspace root). Magnon above the cavity,
/// hybrid splitting 21.0 MHz.
pub fn reference_params() -> SystemParams {
    SystemParams {
        omega_a: hz(7.1e9),
        omega_m: hz(7.1e9 + 9.594_665_18e6),
        kappa: hz(2.0e6),
        kappa_ext: hz(1.0e6),
        gamma_m: hz(1.5e6),
        omega_b: hz(12.45e6),
        gamma_b: hz(3745.0),
        g_am: hz(9.34e6),
        g_mb0: hz(4.56e-3),
        alpha: hz(-1.24e-12),
        delta_kerr: 0.0,
    }
}

/// A drive red-detuned to the upper-mode lower sideband (Δ₊ = −Ω_b) at a
/// power that keeps the linearized model deep in the weak-coupling regime.
pub fn reference_drive(params: &SystemParams) -> DriveConfig {
    let modes = crate::hybrid::hybridize(params);
    DriveConfig { omega_d: modes.omega_plus - params.omega_b, power: 0.016 }
}
