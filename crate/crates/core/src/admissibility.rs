//! Certify a discrete flow field: weak-form residuals against a compactly
//! supported test-function family, the total-energy inequality, the
//! one-sided Lipschitz modulus, the vacuum-region velocity equation, and
//! the uniform vacuum-integrability sweep.
//!
//! Test functions are separable polynomial bumps with corrected sample
//! arrays: the discrete time rule integrates `T'` to exactly `T(t2)-T(t1)`
//! and the space rule integrates `X'` to exactly zero, so time-constant
//! states produce residuals at rounding level rather than quadrature level.

use serde::Serialize;

use crate::eos::{pressure, EosParams};
use crate::error::{Error, Result};
use crate::grid::{FlowField, Geometry};
use crate::mollify::{mollify_field, vacuum_mask, MollifierKernel};
use crate::numerics::{pairwise_sum, pairwise_sum_by};

/// Separable space-time bump `T(t) * X(x)`, with `B(s) = (1 - s^2)^4`.
#[derive(Debug, Clone, Serialize)]
pub struct TestFunction {
    pub name: String,
    pub center_t: f64,
    pub width_t: f64,
    pub center_x: f64,
    pub width_x: f64,
}

fn bump4(s: f64) -> f64 {
    let t = 1.0 - s * s;
    if t <= 0.0 {
        0.0
    } else {
        t * t * t * t
    }
}

fn dbump4(s: f64) -> f64 {
    let t = 1.0 - s * s;
    if t <= 0.0 {
        0.0
    } else {
        -8.0 * s * t * t * t
    }
}

impl TestFunction {
    pub fn new(name: impl Into<String>, center_t: f64, width_t: f64, center_x: f64, width_x: f64) -> Self {
        TestFunction {
            name: name.into(),
            center_t,
            width_t,
            center_x,
            width_x,
        }
    }

    pub fn t_val(&self, t: f64) -> f64 {
        bump4((t - self.center_t) / self.width_t)
    }

    pub fn t_deriv(&self, t: f64) -> f64 {
        dbump4((t - self.center_t) / self.width_t) / self.width_t
    }

    pub fn x_val(&self, x: f64) -> f64 {
        bump4((x - self.center_x) / self.width_x)
    }

    pub fn x_deriv(&self, x: f64) -> f64 {
        dbump4((x - self.center_x) / self.width_x) / self.width_x
    }
}

/// Default family: bumps at three scales covering the interior of the grid.
pub fn default_test_family(field: &FlowField) -> Vec<TestFunction> {
    let g = &field.grid;
    let span_x = g.x_max - g.x_min;
    let span_t = g.t_end - g.t_start;
    let mut tests = Vec::new();
    for (k, frac) in [(0usize, 0.45), (1, 0.3), (2, 0.18)] {
        let wx = span_x * frac;
        let wt = span_t * 0.6;
        tests.push(TestFunction::new(
            format!("bump{k}"),
            g.t_start + 0.5 * span_t,
            wt,
            g.x_min + 0.5 * span_x,
            wx,
        ));
        tests.push(TestFunction::new(
            format!("bump{k}-off"),
            g.t_start + 0.5 * span_t,
            wt,
            g.x_min + 0.35 * span_x,
            wx * 0.7,
        ));
    }
    tests
}

/// Signed weak-form defects of the mass and momentum identities for one
/// test function on one window.
#[derive(Debug, Clone, Serialize)]
pub struct WeakFormDefect {
    pub test_name: String,
    pub t1: f64,
    pub t2: f64,
    pub mass: f64,
    pub momentum: f64,
}

/// Evaluates the weak-form defects for every test function and window.
/// Windows must start and end on stored frames.
pub fn weak_form_residual(
    field: &FlowField,
    params: &EosParams,
    tests: &[TestFunction],
    windows: &[(f64, f64)],
) -> Result<Vec<WeakFormDefect>> {
    let g = &field.grid;
    if g.geometry != Geometry::Planar1d {
        return Err(Error::InvalidParameter {
            name: "geometry",
            message: "weak-form residuals are implemented for planar grids".into(),
        });
    }
    for tf in tests {
        if tf.center_x - tf.width_x < g.x_min - 1e-12 || tf.center_x + tf.width_x > g.x_max + 1e-12
        {
            return Err(Error::InvalidParameter {
                name: "tests",
                message: format!("test {} support exceeds the grid", tf.name),
            });
        }
    }
    let dx = g.dx();
    let n = g.n_cells;
    let xs: Vec<f64> = (0..n).map(|j| g.cell_center(j)).collect();
    let mut out = Vec::new();
    for &(t1, t2) in windows {
        let i1 = g.frame_at(t1)?;
        let i2 = g.frame_at(t2)?;
        if i2 <= i1 {
            return Err(Error::EmptyWindow { t1, t2 });
        }
        let dt = g.dt();
        // trapezoid weights over the window frames
        let frames: Vec<usize> = (i1..=i2).collect();
        let wt: Vec<f64> = frames
            .iter()
            .map(|&i| {
                if i == i1 || i == i2 {
                    0.5 * dt
                } else {
                    dt
                }
            })
            .collect();
        for tf in tests {
            // corrected T' samples: discrete rule integrates them to the
            // exact endpoint difference
            let raw_td: Vec<f64> = frames.iter().map(|&i| tf.t_deriv(g.frame_time(i))).collect();
            let w_total = pairwise_sum(&wt);
            let defect_t = (tf.t_val(t2) - tf.t_val(t1))
                - pairwise_sum_by(frames.len(), |k| wt[k] * raw_td[k]);
            let td: Vec<f64> = raw_td.iter().map(|v| v + defect_t / w_total).collect();
            // corrected X' samples: midpoint rule integrates them to zero
            let raw_xd: Vec<f64> = xs.iter().map(|&x| tf.x_deriv(x)).collect();
            let defect_x = -pairwise_sum_by(n, |j| dx * raw_xd[j]);
            let xd: Vec<f64> = raw_xd.iter().map(|v| v + defect_x / (n as f64 * dx)).collect();
            let xv: Vec<f64> = xs.iter().map(|&x| tf.x_val(x)).collect();

            let mut mass_lhs_terms = Vec::with_capacity(frames.len());
            let mut mom_lhs_terms = Vec::with_capacity(frames.len());
            for (k, &i) in frames.iter().enumerate() {
                let tvi = tf.t_val(g.frame_time(i));
                let row_mass = pairwise_sum_by(n, |j| {
                    let rho = field.rho_at(i, j);
                    let mom = field.mom_at(i, j);
                    (rho * td[k] * xv[j] + mom * tvi * xd[j]) * dx
                });
                let row_mom = pairwise_sum_by(n, |j| {
                    let rho = field.rho_at(i, j);
                    let mom = field.mom_at(i, j);
                    let flux = if rho > 0.0 { mom * mom / rho } else { 0.0 };
                    let p = pressure(params, rho).unwrap_or(f64::NAN);
                    (mom * td[k] * xv[j] + (flux + p) * tvi * xd[j]) * dx
                });
                mass_lhs_terms.push(wt[k] * row_mass);
                mom_lhs_terms.push(wt[k] * row_mom);
            }
            let boundary = |i: usize, t: f64, data: &dyn Fn(usize, usize) -> f64| -> f64 {
                let tv = tf.t_val(t);
                pairwise_sum_by(n, |j| data(i, j) * tv * xv[j] * dx)
            };
            let mass_rhs = boundary(i2, t2, &|i, j| field.rho_at(i, j))
                - boundary(i1, t1, &|i, j| field.rho_at(i, j));
            let mom_rhs = boundary(i2, t2, &|i, j| field.mom_at(i, j))
                - boundary(i1, t1, &|i, j| field.mom_at(i, j));
            out.push(WeakFormDefect {
                test_name: tf.name.clone(),
                t1,
                t2,
                mass: pairwise_sum(&mass_lhs_terms) - mass_rhs,
                momentum: pairwise_sum(&mom_lhs_terms) - mom_rhs,
            });
        }
    }
    Ok(out)
}

/// Per-frame total energy and the admissibility margin.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyReport {
    pub energies: Vec<f64>,
    /// `min_tau [E(0) - E(tau)]`; admissible when this is not materially
    /// negative.
    pub margin: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Total-energy admissibility: every frame's energy must not exceed the
/// initial one, up to `1e-8 * E(0)` plus the explicit discretization
/// allowance.
pub fn check_energy_admissibility(
    field: &FlowField,
    params: &EosParams,
    allowance: f64,
) -> Result<EnergyReport> {
    let g = &field.grid;
    if g.n_frames < 2 {
        return Err(Error::InvalidGrid("need at least 2 frames".into()));
    }
    let mut energies = Vec::with_capacity(g.n_frames);
    for i in 0..g.n_frames {
        let e = pairwise_sum_by(g.n_cells, |j| {
            let rho = field.rho_at(i, j);
            let mom = field.mom_at(i, j);
            let kinetic = if rho > 0.0 { 0.5 * mom * mom / rho } else { 0.0 };
            let h = params.kappa / (params.gamma - 1.0) * rho.powf(params.gamma);
            (kinetic + h) * g.cell_measure(j)
        });
        if !e.is_finite() {
            return Err(Error::NonFinite { cell: i });
        }
        energies.push(e);
    }
    let e0 = energies[0];
    let margin = energies
        .iter()
        .map(|e| e0 - e)
        .fold(f64::INFINITY, f64::min);
    let tolerance = 1e-8 * e0.abs() + allowance;
    Ok(EnergyReport {
        pass: margin >= -tolerance,
        energies,
        margin,
        tolerance,
    })
}

/// Estimate of the one-sided Lipschitz modulus at a frame: the largest
/// bump-smoothed expansion rate `[-int v X' dx] / [int X dx]`, clamped at
/// zero. A finite bump family only probes finitely many directions, so this
/// is a lower bound for the true modulus.
pub fn estimate_lambda(field: &FlowField, t: f64) -> Result<f64> {
    let g = &field.grid;
    let frame = g.frame_at(t)?;
    if (0..g.n_cells).all(|j| field.rho_at(frame, j) == 0.0) && field.exterior_velocity.is_none() {
        return Ok(0.0);
    }
    match g.geometry {
        Geometry::Planar1d => {
            let dx = g.dx();
            let n = g.n_cells;
            let span = g.x_max - g.x_min;
            let mut best = 0.0f64;
            for scale in [span / 8.0, span / 16.0, span / 32.0] {
                if scale < 3.0 * dx {
                    continue;
                }
                let step = (scale / 2.0).max(dx);
                let mut c = g.x_min + scale;
                while c + scale <= g.x_max + 1e-12 {
                    let tf = TestFunction::new("probe", 0.0, 1.0, c, scale);
                    let raw_xd: Vec<f64> = (0..n).map(|j| tf.x_deriv(g.cell_center(j))).collect();
                    let supp: Vec<usize> = (0..n)
                        .filter(|&j| (g.cell_center(j) - c).abs() < scale)
                        .collect();
                    if supp.is_empty() {
                        c += step;
                        continue;
                    }
                    // zero-sum correction on the support cells only, so a
                    // constant velocity contributes exactly nothing
                    let defect = -pairwise_sum_by(n, |j| dx * raw_xd[j]);
                    let corr = defect / (supp.len() as f64 * dx);
                    let phi_mass = pairwise_sum_by(n, |j| tf.x_val(g.cell_center(j)) * dx);
                    if phi_mass > 1e-12 {
                        let num = -pairwise_sum_by(supp.len(), |k| {
                            let j = supp[k];
                            field.velocity_at(frame, j) * (raw_xd[j] + corr) * dx
                        });
                        best = best.max(num / phi_mass);
                    }
                    c += step;
                }
            }
            Ok(best.max(0.0))
        }
        Geometry::Radial2d => {
            // radial expansion rate: max over support of (du/dr, u/r)
            let dx = g.dx();
            let mut best = 0.0f64;
            for j in 0..g.n_cells {
                if field.rho_at(frame, j) == 0.0 {
                    continue;
                }
                let u = field.velocity_at(frame, j);
                let r = g.cell_center(j);
                best = best.max(u / r);
                if j + 1 < g.n_cells && field.rho_at(frame, j + 1) > 0.0 {
                    let du = (field.velocity_at(frame, j + 1) - u) / dx;
                    best = best.max(du);
                }
            }
            Ok(best.max(0.0))
        }
    }
}

/// Max-norm of the transport residual `du/dt + u du/dx` on vacuum cells,
/// evaluated on the field's exterior-velocity closure with small-step
/// central differences.
pub fn vacuum_velocity_residual(field: &FlowField) -> Result<f64> {
    let closure = field
        .exterior_velocity
        .as_ref()
        .ok_or(Error::MissingExteriorVelocity)?;
    let g = &field.grid;
    let h = 1e-4;
    let mut worst = 0.0f64;
    for i in 0..g.n_frames {
        let t = g.frame_time(i);
        for j in 0..g.n_cells {
            if field.rho_at(i, j) > 0.0 {
                continue;
            }
            let x = g.cell_center(j);
            let u = closure(t, x);
            let du_dt = (closure(t + h, x) - closure(t - h, x)) / (2.0 * h);
            let du_dx = (closure(t, x + h) - closure(t, x - h)) / (2.0 * h);
            worst = worst.max((du_dt + u * du_dx).abs());
        }
    }
    Ok(worst)
}

/// One sweep entry of the vacuum-integrability check.
#[derive(Debug, Clone, Serialize)]
pub struct VacuumIntegrabilityReport {
    pub theta: f64,
    /// `(eps, integral of rho_eps^-theta over the positivity mask)`.
    pub entries: Vec<(f64, f64)>,
    pub uniformity_factor: f64,
    pub pass: bool,
}

/// Sweeps a dyadic epsilon sequence, masking `{rho_eps > 0}` inside the
/// window and summing `rho_eps^-theta`. A boundedness trend check: pass
/// when the max entry stays within `uniformity_factor` of the min (over
/// nonempty masks). Uniformity in eps cannot be certified from finitely
/// many epsilons; this is the desk-scale analogue.
#[allow(clippy::too_many_arguments)]
pub fn vacuum_integrability(
    field: &FlowField,
    kernel: &MollifierKernel,
    theta: f64,
    eps_seq: &[f64],
    t1: f64,
    t2: f64,
    uniformity_factor: f64,
) -> Result<VacuumIntegrabilityReport> {
    if !(theta > 0.0) {
        return Err(Error::InvalidParameter {
            name: "theta",
            message: format!("must be positive, got {theta}"),
        });
    }
    let g = &field.grid;
    let dt = g.dt();
    let mut entries = Vec::with_capacity(eps_seq.len());
    for &eps in eps_seq {
        let mask = vacuum_mask(field, kernel, eps, t1, t2)?;
        let smoothed = mollify_field(field, kernel, eps)?;
        let (lo, hi) = mask.frame_range;
        let mut terms = Vec::new();
        for i in lo..=hi {
            // trapezoid time weight over the covered frame range
            let wt = if i == lo || i == hi { 0.5 * dt } else { dt };
            for j in 0..g.n_cells {
                if mask.mask[i * g.n_cells + j] {
                    let r = smoothed.rho_at(i, j);
                    terms.push(r.powf(-theta) * g.cell_measure(j) * wt);
                }
            }
        }
        entries.push((eps, pairwise_sum(&terms)));
    }
    let nonzero: Vec<f64> = entries.iter().map(|(_, v)| *v).filter(|v| *v > 0.0).collect();
    let pass = if nonzero.is_empty() {
        true
    } else {
        let max = nonzero.iter().cloned().fold(0.0f64, f64::max);
        let min = nonzero.iter().cloned().fold(f64::INFINITY, f64::min);
        max <= min * uniformity_factor
    };
    Ok(VacuumIntegrabilityReport {
        theta,
        entries,
        uniformity_factor,
        pass,
    })
}

/// Refinement study of a raw inverse-power integral `int rho^-theta` over
/// the positivity set of a spatial profile: divergent behavior shows up as
/// the discrete integral growing under grid refinement.
#[derive(Debug, Clone, Serialize)]
pub struct RefinementStudy {
    pub coarse: f64,
    pub fine: f64,
    pub ratio: f64,
    pub threshold: f64,
    pub divergent: bool,
}

pub fn inverse_power_refinement(
    rho: impl Fn(f64) -> f64,
    domain: (f64, f64),
    theta: f64,
    n: usize,
    radial: bool,
    threshold: f64,
) -> RefinementStudy {
    let integral = |cells: usize| -> f64 {
        let h = (domain.1 - domain.0) / cells as f64;
        pairwise_sum_by(cells, |j| {
            let x = domain.0 + (j as f64 + 0.5) * h;
            let r = rho(x);
            if r > 0.0 {
                let w = if radial {
                    2.0 * std::f64::consts::PI * x * h
                } else {
                    h
                };
                r.powf(-theta) * w
            } else {
                0.0
            }
        })
    };
    let coarse = integral(n);
    let fine = integral(2 * n);
    let ratio = fine / coarse;
    RefinementStudy {
        coarse,
        fine,
        ratio,
        threshold,
        divergent: ratio > threshold,
    }
}

/// Aggregate report for the certification front door.
#[derive(Debug, Clone, Serialize)]
pub struct AdmissibilityReport {
    pub weak_defects: Vec<WeakFormDefect>,
    pub energy: EnergyReport,
    pub lambda: Vec<(f64, f64)>,
    pub vacuum: Option<VacuumIntegrabilityReport>,
    pub energy_pass: bool,
    pub weak_max_defect: f64,
    pub weak_tolerance: f64,
    pub weak_pass: bool,
}

/// Runs the energy check, weak-form defects on the default family over the
/// full window, and the per-frame Lipschitz estimate.
pub fn full_report(
    field: &FlowField,
    params: &EosParams,
    weak_tolerance: f64,
    energy_allowance: f64,
) -> Result<AdmissibilityReport> {
    let g = &field.grid;
    let energy = check_energy_admissibility(field, params, energy_allowance)?;
    let weak_defects = if g.geometry == Geometry::Planar1d {
        weak_form_residual(
            field,
            params,
            &default_test_family(field),
            &[(g.t_start, g.t_end)],
        )?
    } else {
        Vec::new()
    };
    let mut lambda = Vec::with_capacity(g.n_frames);
    for i in 0..g.n_frames {
        let t = g.frame_time(i);
        lambda.push((t, estimate_lambda(field, t)?));
    }
    let weak_max_defect = weak_defects
        .iter()
        .map(|d| d.mass.abs().max(d.momentum.abs()))
        .fold(0.0f64, f64::max);
    Ok(AdmissibilityReport {
        energy_pass: energy.pass,
        weak_pass: weak_max_defect <= weak_tolerance,
        weak_max_defect,
        weak_tolerance,
        weak_defects,
        energy,
        lambda,
        vacuum: None,
    })
}
