//! Empirical Besov seminorm estimation and mollification-rate verification.
//!
//! Besov membership is used operationally, through exactly two inequalities:
//! `||u_eps - u||_Lq <= eps^alpha |u|` and `||grad u_eps||_Lq <=
//! eps^(alpha-1) |u|`. The seminorm estimator is the finite-difference sup
//! `max_h ||D_h u||_Lq / h^alpha` over a supplied shift set; the rate
//! verifier fits log-log slopes of the two mollification norms over a
//! dyadic epsilon sweep.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mollify::{convolve, discretize, Deriv, Lattice, MollifierKernel};
use crate::numerics::{loglog_slope, pairwise_sum_by};

/// A finite-difference shift, in whole cells along one lattice axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shift {
    Space(usize),
    Time(usize),
}

/// Result of the finite-difference seminorm estimator. `samples` records the
/// raw `(h, ||D_h u||_Lq)` pairs; no monotonicity is imposed on them.
#[derive(Debug, Clone, Serialize)]
pub struct BesovEstimate {
    pub alpha: f64,
    pub q: f64,
    pub seminorm: f64,
    pub shift_range: (f64, f64),
    pub samples: Vec<(f64, f64)>,
}

/// Default dyadic shift set: cell shifts `2^k` spanning roughly two decades,
/// capped at a quarter of the lattice.
pub fn dyadic_shifts(lat: &Lattice) -> Vec<Shift> {
    let mut shifts = Vec::new();
    let mut s = 1usize;
    while s <= lat.n_x / 4 && shifts.len() < 8 {
        shifts.push(Shift::Space(s));
        s *= 2;
    }
    if lat.n_t > 1 {
        let mut s = 1usize;
        while s <= lat.n_t / 4 && shifts.len() < 14 {
            shifts.push(Shift::Time(s));
            s *= 2;
        }
    }
    shifts
}

/// `||D_h u||_Lq` over the overlap region (no extension values enter).
fn shifted_difference_norm(lat: &Lattice, shift: Shift, q: f64) -> Result<(f64, f64)> {
    let (dt_cells, dx_cells) = match shift {
        Shift::Space(c) => (0usize, c),
        Shift::Time(c) => (c, 0usize),
    };
    if dx_cells >= lat.n_x || dt_cells >= lat.n_t {
        return Err(Error::InvalidParameter {
            name: "shift",
            message: format!("shift {shift:?} exceeds the lattice interior"),
        });
    }
    let h = dt_cells as f64 * lat.dt + dx_cells as f64 * lat.dx;
    let nt = lat.n_t - dt_cells;
    let nx = lat.n_x - dx_cells;
    let w = lat.dx * if lat.n_t > 1 { lat.dt } else { 1.0 };
    let total = pairwise_sum_by(nt * nx, |k| {
        let i = k / nx;
        let j = k % nx;
        let d = lat.data[(i + dt_cells) * lat.n_x + (j + dx_cells)] - lat.data[i * lat.n_x + j];
        d.abs().powf(q)
    });
    Ok((h, (total * w).powf(1.0 / q)))
}

/// Finite-difference seminorm estimate: sup over the shift set of
/// `||D_h u||_Lq / h^alpha`.
pub fn estimate_seminorm(
    lat: &Lattice,
    alpha: f64,
    q: f64,
    shifts: &[Shift],
) -> Result<BesovEstimate> {
    if shifts.is_empty() {
        return Err(Error::InvalidParameter {
            name: "shifts",
            message: "empty shift set".into(),
        });
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            message: format!("need alpha in (0,1), got {alpha}"),
        });
    }
    if !(q >= 1.0) {
        return Err(Error::InvalidParameter {
            name: "q",
            message: format!("need q >= 1, got {q}"),
        });
    }
    let mut samples = Vec::with_capacity(shifts.len());
    let mut seminorm = 0.0f64;
    let mut h_min = f64::INFINITY;
    let mut h_max = 0.0f64;
    for &s in shifts {
        let (h, norm) = shifted_difference_norm(lat, s, q)?;
        seminorm = seminorm.max(norm / h.powf(alpha));
        h_min = h_min.min(h);
        h_max = h_max.max(h);
        samples.push((h, norm));
    }
    Ok(BesovEstimate {
        alpha,
        q,
        seminorm,
        shift_range: (h_min, h_max),
        samples,
    })
}

/// Rate verification report. `s1` is the fitted slope of `||u_eps - u||_Lq`
/// against `eps`, `s2` of `||grad u_eps||_Lq`. A slope is `None` when the
/// corresponding norms vanish identically (the fit is skipped and passes
/// trivially).
#[derive(Debug, Clone, Serialize)]
pub struct MollificationRateReport {
    pub alpha: f64,
    pub q: f64,
    pub tol: f64,
    pub eps: Vec<f64>,
    pub diff_norms: Vec<f64>,
    pub grad_norms: Vec<f64>,
    pub s1: Option<f64>,
    pub s2: Option<f64>,
    /// `s1 >= alpha - tol` (or no fit possible).
    pub pass_diff: bool,
    /// `s2 >= alpha - 1 - tol` (or no fit possible).
    pub pass_grad: bool,
    pub pass: bool,
}

/// Measures the two mollification rates over a dyadic epsilon sweep. Norms
/// are taken on the common interior window of the largest epsilon, so every
/// sweep point sees the same cells.
pub fn verify_mollification_rates(
    lat: &Lattice,
    kernel: &MollifierKernel,
    alpha: f64,
    q: f64,
    eps_seq: &[f64],
) -> Result<MollificationRateReport> {
    if eps_seq.len() < 3 {
        return Err(Error::InvalidParameter {
            name: "eps_seq",
            message: format!("need at least 3 epsilons, got {}", eps_seq.len()),
        });
    }
    let tol = 0.05;
    let eps_max = eps_seq.iter().cloned().fold(0.0f64, f64::max);
    let dk = discretize(kernel, eps_max, lat.dt, lat.dx, lat.n_t > 1, Deriv::None)?;
    let (pad_t_lo, pad_t_hi, pad_x) = dk.padding();
    let (pad_x, pad_t_lo, pad_t_hi) = (pad_x + 1, pad_t_lo + 1, pad_t_hi + 1);
    if 2 * pad_x >= lat.n_x || (lat.n_t > 1 && pad_t_lo + pad_t_hi >= lat.n_t) {
        return Err(Error::InvalidParameter {
            name: "eps_seq",
            message: "largest epsilon leaves no interior window".into(),
        });
    }
    let interior_norm = |data: &[f64]| -> f64 {
        let (t_lo, t_hi) = if lat.n_t > 1 {
            (pad_t_lo, lat.n_t - pad_t_hi)
        } else {
            (0, 1)
        };
        let nx = lat.n_x - 2 * pad_x;
        let w = lat.dx * if lat.n_t > 1 { lat.dt } else { 1.0 };
        let total = pairwise_sum_by((t_hi - t_lo) * nx, |k| {
            let i = t_lo + k / nx;
            let j = pad_x + k % nx;
            data[i * lat.n_x + j].abs().powf(q)
        });
        (total * w).powf(1.0 / q)
    };
    let mut diff_norms = Vec::with_capacity(eps_seq.len());
    let mut grad_norms = Vec::with_capacity(eps_seq.len());
    for &eps in eps_seq {
        let smoothed = convolve(lat, kernel, eps, Deriv::None)?;
        let diff: Vec<f64> = smoothed
            .data
            .iter()
            .zip(&lat.data)
            .map(|(a, b)| a - b)
            .collect();
        diff_norms.push(interior_norm(&diff));
        let grad = convolve(lat, kernel, eps, Deriv::Space)?;
        grad_norms.push(interior_norm(&grad.data));
    }
    let s1 = loglog_slope(eps_seq, &diff_norms);
    let s2 = loglog_slope(eps_seq, &grad_norms);
    let pass_diff = match s1 {
        Some(s) => s >= alpha - tol,
        None => true,
    };
    let pass_grad = match s2 {
        Some(s) => s >= alpha - 1.0 - tol,
        None => true,
    };
    Ok(MollificationRateReport {
        alpha,
        q,
        tol,
        eps: eps_seq.to_vec(),
        diff_norms,
        grad_norms,
        s1,
        s2,
        pass_diff,
        pass_grad,
        pass: pass_diff && pass_grad,
    })
}
