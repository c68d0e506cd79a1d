//! Inverse problems: recovering parameters from spectra and rate data.
//!
//! Three layers, each feeding the next in the pipeline:
//!
//! * [`fit_window`]: complex Lorentzian plus linear background on one
//!   transparency/absorption window; yields center and FWHM in Hz.
//! * [`fit_power_series`]: straight line through Γ_tot(P) at fixed
//!   detuning; the intercept estimates the intrinsic Γ_b.
//! * [`fit_global`]: two-parameter linear model across every
//!   (detuning, power) point jointly, recovering g⁰_mb and α.
//!
//! These fitters speak linear Hz (they consume instrument-facing data);
//! the forward model underneath stays in rad/s.

mod global;
mod levmar;
mod linalg;
mod series;
mod window;

use core::fmt;

pub use global::{fit_global, GlobalFit, GlobalPoint};
pub use levmar::{levmar, LmConfig, LmResult};
pub use series::{fit_power_series, PowerSeriesFit};
pub use window::{fit_window, WindowFit};

/// Failure modes shared by the fitters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitError {
    /// The window data cannot support a fit: initial center outside the
    /// grid, non-finite or non-ascending grid, or too few points.
    BadWindow,
    /// The design matrix is rank deficient (all powers equal, duplicate
    /// degenerate rows, or fewer points than parameters).
    DegenerateDesign,
    /// The global fit drove (g⁰_mb)² negative; the dataset is
    /// inconsistent with the forward model.
    NegativeCouplingSquare,
    /// The forward model hit a singular steady state while building the
    /// fit basis.
    Singular,
}

impl fmt::Display for FitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FitError::BadWindow => write!(f, "window data cannot support a fit"),
            FitError::DegenerateDesign => write!(f, "design matrix is rank deficient"),
            FitError::NegativeCouplingSquare => {
                write!(f, "fit drove the squared coupling negative")
            }
            FitError::Singular => write!(f, "forward model hit a singular steady state"),
        }
    }
}

impl core::error::Error for FitError {}
