//! Backaction-evasion drive condition.
//!
//! Between the two hybrid modes the corrected magnomechanical rate
//! Γ_mag(ω_d) changes sign: Stokes scattering off one mode balances
//! anti-Stokes scattering off the other and the drive neither damps nor
//! anti-damps the phonon. [`find_evasion_detuning`] locates that drive
//! frequency by a dense sign-change scan over the open bracket (ω₋, ω₊)
//! followed by Brent refinement of each crossing; when several crossings
//! exist (up to three between well-split modes) the one nearest the
//! bracket midpoint is reported, which is the deliberate evasion point
//! rather than the trivial balance right next to either mode.
//!
//! [`evasion_cutoff_splitting`] inverts the question: it bisects over the
//! normal-mode splitting for the largest value at which an evasion root
//! still exists, holding ω_a, the sign of Δ_am, and everything else fixed.

#[cfg(not(feature = "std"))]
use num_traits::Float as _;

use alloc::vec::Vec;
use core::fmt;

use crate::backaction::gamma_mag;
use crate::hybrid::hybridize;
use crate::params::{DriveConfig, SystemParams};

/// Number of samples in the bracket scan. Odd, so the exact midpoint of
/// the bracket is itself a grid point (a symmetric configuration then
/// lands its root with zero residual).
const SCAN_POINTS: usize = 2001;

/// Absolute x tolerance handed to Brent (rad/s). Far below any physical
/// linewidth; the residual check in the tests is what actually matters.
const X_TOL: f64 = 1e-6;

/// An evasion drive point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvasionRoot {
    /// Drive frequency at which Γ_mag,corrected crosses zero (rad/s).
    pub omega_d: f64,
    /// Corrected rate re-evaluated at `omega_d` (rad/s); measures how
    /// cleanly the root was pinned down.
    pub gamma_residual: f64,
    /// Number of distinct sign changes found in the bracket.
    pub roots_found: usize,
}

/// Failure modes of the evasion search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvasionError {
    /// Γ_mag,corrected has one sign across the whole bracket; the
    /// splitting is beyond the evasion cutoff for this parameter set.
    NoRoot,
    /// The steady state was singular somewhere in the bracket (only
    /// reachable for undamped parameter sets).
    Singular,
}

impl fmt::Display for EvasionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvasionError::NoRoot => write!(f, "no evasion root between the hybrid modes"),
            EvasionError::Singular => write!(f, "steady state singular inside the search bracket"),
        }
    }
}

impl core::error::Error for EvasionError {}

/// Finds the drive frequency between the hybrid modes at which the
/// corrected backaction rate vanishes.
pub fn find_evasion_detuning(
    params: &SystemParams,
    power: f64,
) -> Result<EvasionRoot, EvasionError> {
    let modes = hybridize(params);
    let lo = modes.omega_minus;
    let hi = modes.omega_plus;
    let step = (hi - lo) / (SCAN_POINTS - 1) as f64;

    let mut f = |omega_d: f64| -> f64 {
        match gamma_mag(params, &DriveConfig { omega_d, power }) {
            Ok(r) => r.gamma_mag_corrected,
            Err(_) => f64::NAN,
        }
    };

    // Dense scan: exact zeros count as roots outright, sign changes get
    // refined. NaN anywhere aborts; it cannot be bracketed.
    let mut roots: Vec<f64> = Vec::new();
    let mut prev_x = lo;
    let mut prev_f = f(lo);
    if prev_f.is_nan() {
        return Err(EvasionError::Singular);
    }
    if prev_f == 0.0 {
        roots.push(prev_x);
    }
    for i in 1..SCAN_POINTS {
        let x = if i == SCAN_POINTS - 1 { hi } else { lo + step * i as f64 };
        let fx = f(x);
        if fx.is_nan() {
            return Err(EvasionError::Singular);
        }
        if fx == 0.0 {
            roots.push(x);
        } else if prev_f != 0.0 && (prev_f < 0.0) != (fx < 0.0) {
            let (root, _residual) = brent(&mut f, prev_x, x, prev_f, fx, X_TOL);
            roots.push(root);
        }
        prev_x = x;
        prev_f = fx;
    }

    if roots.is_empty() {
        return Err(EvasionError::NoRoot);
    }
    let mid = 0.5 * (lo + hi);
    let mut best = roots[0];
    for &r in &roots[1..] {
        if (r - mid).abs() < (best - mid).abs() {
            best = r;
        }
    }
    Ok(EvasionRoot { omega_d: best, gamma_residual: f(best), roots_found: roots.len() })
}

/// Largest normal-mode splitting (rad/s) at which backaction evasion
/// still succeeds, holding ω_a and the sign of Δ_am fixed and bisecting
/// |Δ_am| to a 2π·1 kHz tolerance on the splitting.
///
/// Returns the 2·g_am lower bound if evasion already fails at the
/// anticrossing, and saturates at 4096·max(2g_am, Ω_b) if no failing
/// splitting exists below that cap.
pub fn evasion_cutoff_splitting(params: &SystemParams, power: f64) -> f64 {
    let two_g = 2.0 * params.g_am;
    // Degenerate Δ_am keeps the reference orientation (magnon above).
    let sign = if params.delta_am() > 0.0 { 1.0 } else { -1.0 };
    let succeeds = |splitting: f64| -> bool {
        let excess = splitting * splitting - two_g * two_g;
        let d_am = excess.max(0.0).sqrt();
        let mut p = *params;
        p.omega_m = p.omega_a - sign * d_am;
        find_evasion_detuning(&p, power).is_ok()
    };

    if !succeeds(two_g) {
        return two_g;
    }
    let cap = 4096.0 * two_g.max(params.omega_b);
    let mut lo = two_g;
    let mut hi = two_g;
    loop {
        hi = (2.0 * hi).min(cap);
        if !succeeds(hi) {
            break;
        }
        if hi >= cap {
            return cap;
        }
        lo = hi;
    }
    let tol = core::f64::consts::TAU * 1.0e3;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if succeeds(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Brent's method on a bracketed sign change: inverse quadratic
/// interpolation with secant and bisection safeguards. Returns the
/// refined abscissa and the last function value there.
fn brent<F: FnMut(f64) -> f64>(
    f: &mut F,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut fb: f64,
    x_tol: f64,
) -> (f64, f64) {
    const MAX_ITER: usize = 100;
    let eps = f64::EPSILON;

    let mut c = b;
    let mut fc = fb;
    let mut d = b - a;
    let mut e = d;

    for _ in 0..MAX_ITER {
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * eps * b.abs() + 0.5 * x_tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return (b, fb);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            // Attempt inverse quadratic interpolation (secant when only
            // two points are distinct).
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                (2.0 * xm * s, 1.0 - s)
            } else {
                let q0 = fa / fc;
                let r = fb / fc;
                (
                    s * (2.0 * xm * q0 * (q0 - r) - (b - a) * (r - 1.0)),
                    (q0 - 1.0) * (r - 1.0) * (s - 1.0),
                )
            };
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
    }
    (b, fb)
}
