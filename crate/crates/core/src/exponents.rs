//! The exponent bookkeeping behind the vanishing-residual argument:
//! vacuum-integrability thresholds, the seven-inequality scaling system in
//! `(kappa_exp, nu)`, its five-inequality reduction for `alpha >= beta`,
//! and the explicit feasible windows.
//!
//! Naming: the pressure constant and the regularization scaling exponent
//! collide in the usual notation; the scaling exponent is `kappa_exp`
//! everywhere in this crate.
//!
//! The divisor in the two `-kappa_exp/q~` inequalities is the
//! regularization exponent `q~ = [4*gamma/((gamma-1)*theta) - 1]^(-1)`,
//! not the Besov integrability exponent: the explicit window bounds
//! `kappa_exp < q~ * (2*beta - 1)` (resp. `gamma*beta - 1`) are exactly
//! those inequalities rearranged.

use serde::{Deserialize, Serialize};

use crate::eos::d2h_sigma_exponent;
use crate::error::{Error, Result};

/// Threshold the vacuum-integrability exponent `theta` must strictly
/// exceed, as a function of `(gamma, beta)`.
pub fn theta_threshold(gamma: f64, beta: f64) -> Result<f64> {
    if !(gamma > 1.0) {
        return Err(Error::InvalidParameter {
            name: "gamma",
            message: format!("must exceed 1, got {gamma}"),
        });
    }
    let floor = 1.0 / gamma.min(2.0);
    if !(beta > floor && beta <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "beta",
            message: format!(
                "admissible range is alpha >= beta > 1/min(2,gamma) = {floor} (and beta <= 1), got {beta}"
            ),
        });
    }
    if gamma < 2.0 {
        let g1 = gamma - 1.0;
        Ok(4.0 * gamma * gamma * (1.0 - beta) / (g1 * (g1 * g1 * beta + 1.0 - beta)))
    } else {
        Ok(4.0 * gamma / (gamma - 1.0) * (1.0 - beta) / beta)
    }
}

/// `p = (gamma-1)*theta/(4*gamma)`.
pub fn p_exponent(gamma: f64, theta: f64) -> f64 {
    (gamma - 1.0) * theta / (4.0 * gamma)
}

/// `q~ = [4*gamma/((gamma-1)*theta) - 1]^(-1)`; `None` at or beyond the
/// pole `theta >= 4*gamma/(gamma-1)`.
pub fn q_tilde(gamma: f64, theta: f64) -> Option<f64> {
    let denom = 4.0 * gamma / ((gamma - 1.0) * theta) - 1.0;
    if denom > 0.0 {
        Some(1.0 / denom)
    } else {
        None
    }
}

/// Feasible region for the scaling exponents `delta = eps^kappa_exp`,
/// `sigma = eps^nu`. `nu_hi` is `f64::INFINITY` when unbounded; the same
/// convention marks the degenerate `kappa` window past the `q~` pole.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExponentWindow {
    pub gamma: f64,
    pub alpha: f64,
    pub beta: f64,
    pub theta: f64,
    pub q: f64,
    pub kappa_lo: f64,
    pub kappa_hi: f64,
    pub nu_lo: f64,
    pub nu_hi: f64,
    pub p_exp: f64,
    /// `None` marks the degenerate regime `theta >= 4*gamma/(gamma-1)`.
    pub q_tilde: Option<f64>,
    pub feasible: bool,
}

/// One evaluated inequality of the scaling system.
#[derive(Debug, Clone, Serialize)]
pub struct SlackEntry {
    pub label: &'static str,
    pub slack: f64,
    pub pass: bool,
}

/// Report of the full seven-inequality system at a concrete
/// `(kappa_exp, nu)`.
#[derive(Debug, Clone, Serialize)]
pub struct SystemReport {
    pub entries: Vec<SlackEntry>,
    pub pass: bool,
}

/// Solves the explicit window for `(kappa_exp, nu)` given admissible
/// inputs. Every returned feasible window is re-validated against the full
/// system by sampling.
pub fn solve_window(gamma: f64, alpha: f64, beta: f64, theta: f64, q: f64) -> Result<ExponentWindow> {
    let floor = 1.0 / gamma.min(2.0);
    if !(alpha >= beta && beta > floor) {
        return Err(Error::InvalidParameter {
            name: "beta",
            message: format!(
                "need alpha >= beta > 1/min(2,gamma) = {floor}; got alpha = {alpha}, beta = {beta}"
            ),
        });
    }
    let threshold = theta_threshold(gamma, beta)?;
    let qt = q_tilde(gamma, theta);
    let p_exp = p_exponent(gamma, theta);
    let mut window = ExponentWindow {
        gamma,
        alpha,
        beta,
        theta,
        q,
        kappa_lo: 0.0,
        kappa_hi: 0.0,
        nu_lo: 0.0,
        nu_hi: 0.0,
        p_exp,
        q_tilde: qt,
        feasible: false,
    };
    if theta <= threshold {
        return Err(Error::InvalidParameter {
            name: "theta",
            message: format!("theta = {theta} does not exceed the threshold {threshold}"),
        });
    }
    if gamma < 2.0 {
        window.kappa_lo = gamma / (gamma - 1.0) * (1.0 - beta);
        window.kappa_hi = match qt {
            Some(qt) => qt * (gamma * beta - 1.0),
            None => f64::INFINITY,
        };
        window.nu_lo = 1.0 - beta;
        window.nu_hi = ((gamma - 1.0) / (2.0 - gamma) * (2.0 * beta - 1.0))
            .min((1.0 - beta) / (2.0 - gamma));
    } else {
        window.kappa_lo = 1.0 - beta;
        window.kappa_hi = match qt {
            Some(qt) => qt * (2.0 * beta - 1.0),
            None => f64::INFINITY,
        };
        window.nu_lo = 1.0 - beta;
        window.nu_hi = f64::INFINITY;
    }
    window.feasible = window.kappa_lo < window.kappa_hi && window.nu_lo < window.nu_hi;
    if window.feasible {
        // spot-check the full system on an interior sample grid
        for (ka, nu) in sample_interior(&window, 5) {
            let report = verify_full_system(&window, ka, nu);
            if !report.pass {
                return Err(Error::Other(format!(
                    "window validation failed at kappa_exp = {ka}, nu = {nu}"
                )));
            }
        }
    }
    Ok(window)
}

/// Interior sample grid of the window (unbounded edges capped one unit past
/// the lower bound).
pub fn sample_interior(w: &ExponentWindow, n: usize) -> Vec<(f64, f64)> {
    let cap = |lo: f64, hi: f64| if hi.is_finite() { hi } else { lo + 1.0 };
    let k_hi = cap(w.kappa_lo, w.kappa_hi);
    let n_hi = cap(w.nu_lo, w.nu_hi);
    let mut pts = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let fi = (i as f64 + 1.0) / (n as f64 + 1.0);
            let fj = (j as f64 + 1.0) / (n as f64 + 1.0);
            pts.push((
                w.kappa_lo + fi * (k_hi - w.kappa_lo),
                w.nu_lo + fj * (n_hi - w.nu_lo),
            ));
        }
    }
    pts
}

/// Evaluates the full seven-inequality system with its slacks.
pub fn verify_full_system(w: &ExponentWindow, kappa_exp: f64, nu: f64) -> SystemReport {
    let c = d2h_sigma_exponent(w.gamma); // (gamma-2)/(min(gamma,2)-1)
    let min_g2 = w.gamma.min(2.0);
    // beyond the q~ pole the delta-power inequalities are vacuous
    let inv_qt = w.q_tilde.map(|qt| 1.0 / qt).unwrap_or(0.0);
    let entries = vec![
        entry("kappa + alpha - 1", kappa_exp + w.alpha - 1.0),
        entry(
            "kappa + c*nu + beta - 1",
            kappa_exp + c * nu + w.beta - 1.0,
        ),
        entry("nu + beta - 1", nu + w.beta - 1.0),
        entry(
            "-kappa/q~ + 2*alpha - 1",
            -kappa_exp * inv_qt + 2.0 * w.alpha - 1.0,
        ),
        entry(
            "-kappa/q~ + min(gamma,2)*beta - 1",
            -kappa_exp * inv_qt + min_g2 * w.beta - 1.0,
        ),
        entry("c*nu + 2*alpha - 1", c * nu + 2.0 * w.alpha - 1.0),
        entry("c*nu + 2*beta - 1", c * nu + 2.0 * w.beta - 1.0),
    ];
    let pass = entries.iter().all(|e| e.pass);
    SystemReport { entries, pass }
}

/// The reduced five-inequality system, sufficient for `alpha >= beta`.
pub fn verify_reduced_system(w: &ExponentWindow, kappa_exp: f64, nu: f64) -> SystemReport {
    let c = d2h_sigma_exponent(w.gamma);
    let min_g2 = w.gamma.min(2.0);
    let inv_qt = w.q_tilde.map(|qt| 1.0 / qt).unwrap_or(0.0);
    let entries = vec![
        entry("kappa + beta - 1", kappa_exp + w.beta - 1.0),
        entry(
            "kappa + c*nu + beta - 1",
            kappa_exp + c * nu + w.beta - 1.0,
        ),
        entry("nu + beta - 1", nu + w.beta - 1.0),
        entry(
            "-kappa/q~ + min(gamma,2)*beta - 1",
            -kappa_exp * inv_qt + min_g2 * w.beta - 1.0,
        ),
        entry("c*nu + 2*beta - 1", c * nu + 2.0 * w.beta - 1.0),
    ];
    let pass = entries.iter().all(|e| e.pass);
    SystemReport { entries, pass }
}

fn entry(label: &'static str, slack: f64) -> SlackEntry {
    SlackEntry {
        label,
        slack,
        pass: slack > 0.0,
    }
}
