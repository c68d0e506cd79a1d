//! Dynamical backaction in cavity magnomechanics.
//!
//! A driven microwave cavity mode hybridizes with the Kittel magnon mode of
//! a ferrimagnetic sphere; magnetostriction couples the magnons to a phonon
//! mode. Driving near one of the two hybrid-mode sidebands damps or
//! anti-damps the phonon. This crate computes the hybrid normal modes, the
//! driven steady state, the phonon self-energy (magnomechanical damping and
//! spring shift) by two independent routes, the backaction-evasion drive
//! condition, synthetic probe spectra (normal-mode and magnomechanically
//! induced transparency/absorption windows), and the inverse fits that
//! recover the coupling parameters from such spectra.
//!
//! Every frequency and rate in this crate is angular (rad/s) unless a unit
//! suffix says otherwise; the fit-result types carry linear Hz because they
//! mirror what an instrument reports. File formats and the CLI live in the
//! companion `magnomech` crate.
//!
//! The crate builds without `std` (using `alloc` and `libm`-backed float
//! math) when the default `std` feature is disabled.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod backaction;
pub mod evasion;
pub mod fit;
pub mod hybrid;
pub mod params;
pub mod spectra;
pub mod steady;

#[cfg(test)]
pub(crate) mod testutil;

pub use num_complex::Complex64;

pub use backaction::{
    chi_a, chi_m, dressed_magnon_response, gamma_mag, scattering_rates, self_energy,
    BackactionResult,
};
pub use evasion::{evasion_cutoff_splitting, find_evasion_detuning, EvasionError, EvasionRoot};
pub use fit::{
    fit_global, fit_power_series, fit_window, FitError, GlobalFit, GlobalPoint, PowerSeriesFit,
    WindowFit,
};
pub use hybrid::{hybridize, HybridModes};
pub use params::{DriveConfig, SystemParams, HBAR};
pub use spectra::{
    add_noise, mmit_spectrum, normal_mode_spectrum, Spectrum, SpectrumKind, SpectrumMeta,
};
pub use steady::{drive_amplitude, steady_state, SteadyState, SteadyStateError};
