//! Levenberg–Marquardt with a finite-difference Jacobian.
//!
//! One deliberately boring implementation shared by every nonlinear fit
//! in the crate, with the damping schedule frozen: λ starts at 1e-3,
//! decreases tenfold on an accepted step, increases tenfold on a
//! rejected one, and the loop stops when the relative parameter step of
//! a proposal drops below 1e-8, whether or not that proposal lowered the
//! cost (or the iteration budget runs
//! out, which callers surface as a "not converged" flag rather than an
//! error).

#[cfg(not(feature = "std"))]
use num_traits::Float as _;

use alloc::vec;
use alloc::vec::Vec;

use super::linalg::solve_in_place;

/// Tuning knobs, preloaded with the frozen schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmConfig {
    /// Initial damping λ.
    pub lambda_init: f64,
    /// Factor applied to λ on a rejected step.
    pub lambda_up: f64,
    /// Factor dividing λ on an accepted step.
    pub lambda_down: f64,
    /// Convergence threshold on the relative parameter step.
    pub step_tol: f64,
    /// Budget of solve attempts (accepted and rejected combined).
    pub max_iter: usize,
}

impl Default for LmConfig {
    fn default() -> Self {
        LmConfig {
            lambda_init: 1e-3,
            lambda_up: 10.0,
            lambda_down: 10.0,
            step_tol: 1e-8,
            max_iter: 200,
        }
    }
}

/// Outcome of [`levmar`].
#[derive(Debug, Clone, PartialEq)]
pub struct LmResult {
    /// Best parameter vector found.
    pub params: Vec<f64>,
    /// Sum of squared residuals at `params`.
    pub cost: f64,
    /// Solve attempts consumed.
    pub iterations: usize,
    /// True when the step-tolerance criterion fired.
    pub converged: bool,
    /// Cost after every accepted step, in order; strictly decreasing by
    /// construction.
    pub accepted_costs: Vec<f64>,
}

/// Minimizes ‖r(x)‖² from `x0`. `eval` writes the residual vector for a
/// parameter vector; `scales` sets the magnitude floor per parameter for
/// both the finite-difference step and the relative-step convergence
/// test.
pub fn levmar<F>(
    mut eval: F,
    x0: &[f64],
    scales: &[f64],
    n_residuals: usize,
    cfg: &LmConfig,
) -> LmResult
where
    F: FnMut(&[f64], &mut [f64]),
{
    let m = x0.len();
    debug_assert_eq!(scales.len(), m);
    let mut x = x0.to_vec();
    let mut residual = vec![0.0; n_residuals];
    let mut trial_residual = vec![0.0; n_residuals];
    eval(&x, &mut residual);
    let mut cost: f64 = residual.iter().map(|r| r * r).sum();

    let mut jacobian = vec![0.0; n_residuals * m];
    let mut jtj = vec![0.0; m * m];
    let mut jtr = vec![0.0; m];
    let mut jac_fresh = false;

    let mut lambda = cfg.lambda_init;
    let mut iterations = 0;
    let mut converged = false;
    let mut accepted_costs = Vec::new();
    let fd_step = f64::EPSILON.sqrt();

    while iterations < cfg.max_iter {
        iterations += 1;

        if !jac_fresh {
            // Forward differences, one column per parameter.
            let mut perturbed = vec![0.0; n_residuals];
            for j in 0..m {
                let h = fd_step * x[j].abs().max(scales[j]);
                let saved = x[j];
                x[j] = saved + h;
                eval(&x, &mut perturbed);
                x[j] = saved;
                let inv_h = 1.0 / h;
                for i in 0..n_residuals {
                    jacobian[i * m + j] = (perturbed[i] - residual[i]) * inv_h;
                }
            }
            for a in 0..m {
                for b in a..m {
                    let mut sum = 0.0;
                    for i in 0..n_residuals {
                        sum += jacobian[i * m + a] * jacobian[i * m + b];
                    }
                    jtj[a * m + b] = sum;
                    jtj[b * m + a] = sum;
                }
                let mut sum = 0.0;
                for i in 0..n_residuals {
                    sum += jacobian[i * m + a] * residual[i];
                }
                jtr[a] = sum;
            }
            jac_fresh = true;
        }

        // (JᵀJ + λ·diag(JᵀJ))·δ = −Jᵀr, with a floor on the damping
        // diagonal so parameters the data does not constrain cannot zero
        // a pivot.
        let mean_diag = (0..m).map(|a| jtj[a * m + a]).sum::<f64>() / m as f64;
        let mut lhs = jtj.clone();
        let mut delta = vec![0.0; m];
        for a in 0..m {
            let d = jtj[a * m + a];
            lhs[a * m + a] =
                d + lambda * if d > 0.0 { d } else { mean_diag.max(f64::MIN_POSITIVE) };
            delta[a] = -jtr[a];
        }
        if !solve_in_place(&mut lhs, &mut delta, m) {
            lambda *= cfg.lambda_up;
            continue;
        }

        let trial: Vec<f64> = x.iter().zip(&delta).map(|(xi, di)| xi + di).collect();
        eval(&trial, &mut trial_residual);
        let trial_cost: f64 = trial_residual.iter().map(|r| r * r).sum();

        let rel_step = delta
            .iter()
            .zip(&x)
            .zip(scales)
            .map(|((d, xi), s)| d.abs() / xi.abs().max(*s))
            .fold(0.0f64, f64::max);

        if trial_cost.is_finite() && trial_cost < cost {
            x = trial;
            core::mem::swap(&mut residual, &mut trial_residual);
            cost = trial_cost;
            accepted_costs.push(cost);
            lambda /= cfg.lambda_down;
            jac_fresh = false;
            if rel_step < cfg.step_tol || cost == 0.0 {
                converged = true;
                break;
            }
        } else {
            // A sub-tolerance proposal that still fails to lower the cost
            // means the fit is already at the bottom (typically restarted
            // there): growing λ only shrinks proposals further, so this
            // counts as convergence, not as a budget problem.
            if rel_step < cfg.step_tol {
                converged = true;
                break;
            }
            lambda *= cfg.lambda_up;
            if lambda > 1e14 {
                break;
            }
        }
    }

    LmResult { params: x, cost, iterations, converged, accepted_costs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// y = a·exp(−b·t) sampled on a small grid.
    fn exp_residuals(p: &[f64], t: &[f64], y: &[f64], out: &mut [f64]) {
        for i in 0..t.len() {
            out[i] = p[0] * (-p[1] * t[i]).exp() - y[i];
        }
    }

    #[test]
    fn recovers_exponential_parameters() {
        let t: Vec<f64> = (0..40).map(|i| i as f64 * 0.1).collect();
        let truth = [2.5, 0.8];
        let y: Vec<f64> = t.iter().map(|&ti| truth[0] * (-truth[1] * ti).exp()).collect();
        let result = levmar(
            |p, out| exp_residuals(p, &t, &y, out),
            &[1.0, 0.3],
            &[1.0, 1.0],
            t.len(),
            &LmConfig::default(),
        );
        assert!(result.converged, "iterations = {}", result.iterations);
        assert_relative_eq!(result.params[0], truth[0], max_relative = 1e-7);
        assert_relative_eq!(result.params[1], truth[1], max_relative = 1e-7);
        assert!(result.cost < 1e-16);
    }

    #[test]
    fn accepted_costs_decrease_monotonically() {
        let t: Vec<f64> = (0..40).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = t.iter().map(|&ti| 2.5 * (-0.8 * ti).exp() + 0.01 * ti.sin()).collect();
        let result = levmar(
            |p, out| exp_residuals(p, &t, &y, out),
            &[0.5, 2.0],
            &[1.0, 1.0],
            t.len(),
            &LmConfig::default(),
        );
        assert!(!result.accepted_costs.is_empty());
        for pair in result.accepted_costs.windows(2) {
            assert!(pair[1] < pair[0], "cost went up: {pair:?}");
        }
    }

    #[test]
    fn iteration_budget_caps_and_reports() {
        let t: Vec<f64> = (0..40).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = t.iter().map(|&ti| 2.5 * (-0.8 * ti).exp()).collect();
        let cfg = LmConfig { max_iter: 2, ..LmConfig::default() };
        let result =
            levmar(|p, out| exp_residuals(p, &t, &y, out), &[0.1, 5.0], &[1.0, 1.0], t.len(), &cfg);
        assert!(!result.converged);
        assert!(result.iterations <= 2);
    }

    #[test]
    fn handles_an_exactly_linear_problem_in_one_accepted_step() {
        // Residuals linear in p: LM must land on the normal-equation
        // solution immediately (small λ bias aside).
        let t: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = t.iter().map(|&ti| 3.0 + 2.0 * ti).collect();
        let result = levmar(
            |p, out| {
                for i in 0..t.len() {
                    out[i] = p[0] + p[1] * t[i] - y[i];
                }
            },
            &[0.0, 0.0],
            &[1.0, 1.0],
            t.len(),
            &LmConfig::default(),
        );
        assert!(result.converged);
        assert_relative_eq!(result.params[0], 3.0, max_relative = 1e-6);
        assert_relative_eq!(result.params[1], 2.0, max_relative = 1e-6);
    }
}
