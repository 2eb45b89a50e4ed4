//! Positivity-preserving finite-volume solver for 1D and radially
//! symmetric isentropic Euler with vacuum, plus exact strong-solution
//! generators (constant states, rarefaction fans, expanding-vacuum data).
//!
//! Rusanov flux and forward Euler by default: maximal dissipation keeps the
//! discrete energy inequality robust, which is exactly what the
//! admissibility checks downstream must certify. The radial update works on
//! the r-weighted conservative form `d_t(r U) + d_r(r F) = (0, p)`, so mass
//! is conserved to rounding and constant states are exactly stationary.

use serde::{Deserialize, Serialize};

use crate::eos::{pressure_potential, EosParams};
use crate::error::{Error, Result};
use crate::grid::{FieldRole, FlowField, Geometry, Grid, SpatialExtension};
use crate::numerics::pairwise_sum_by;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FluxKind {
    Rusanov,
    Hll,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Limiter {
    None,
    Minmod,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub flux: FluxKind,
    pub cfl: f64,
    /// Velocity-reconstruction floor; tie it to the grid (`dx^2`).
    pub eps_vel: f64,
    pub limiter: Limiter,
    pub geometry: Geometry,
}

impl SchemeConfig {
    pub fn new(flux: FluxKind, cfl: f64, eps_vel: f64, limiter: Limiter, geometry: Geometry) -> Result<Self> {
        if !(cfl > 0.0 && cfl <= 0.9) {
            return Err(Error::InvalidParameter {
                name: "cfl",
                message: format!("need 0 < cfl <= 0.9, got {cfl}"),
            });
        }
        if !(eps_vel > 0.0) {
            return Err(Error::InvalidParameter {
                name: "eps_vel",
                message: format!("must be positive, got {eps_vel}"),
            });
        }
        Ok(SchemeConfig {
            flux,
            cfl,
            eps_vel,
            limiter,
            geometry,
        })
    }

    /// Rusanov, CFL 0.45, floor `dx^2`, no limiter.
    pub fn default_for(geometry: Geometry, dx: f64) -> Self {
        SchemeConfig {
            flux: FluxKind::Rusanov,
            cfl: 0.45,
            eps_vel: dx * dx,
            limiter: Limiter::None,
            geometry,
        }
    }
}

/// Riemann data for the rarefaction generators.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RiemannSetup {
    pub rho_l: f64,
    pub u_l: f64,
    pub rho_r: f64,
    pub u_r: f64,
    pub params: EosParams,
}

impl RiemannSetup {
    pub fn validate(&self) -> Result<()> {
        if self.rho_l < 0.0 || self.rho_r < 0.0 {
            return Err(Error::NegativeDensity {
                cell: 0,
                value: self.rho_l.min(self.rho_r),
            });
        }
        Ok(())
    }
}

/// Desingularized velocity `rho*m/(rho^2 + eps_vel^2)`.
#[inline]
fn velocity(rho: f64, mom: f64, eps_vel: f64) -> f64 {
    rho * mom / (rho * rho + eps_vel * eps_vel)
}

#[inline]
fn phys_flux(rho: f64, mom: f64, params: &EosParams, eps_vel: f64) -> (f64, f64) {
    let u = velocity(rho, mom, eps_vel);
    (mom, mom * u + params.kappa * rho.powf(params.gamma))
}

fn interface_flux(
    left: (f64, f64),
    right: (f64, f64),
    config: &SchemeConfig,
    params: &EosParams,
) -> (f64, f64) {
    let (rl, ml) = left;
    let (rr, mr) = right;
    if rl == 0.0 && rr == 0.0 {
        // zero flux from vacuum
        return (0.0, 0.0);
    }
    let ul = velocity(rl, ml, config.eps_vel);
    let ur = velocity(rr, mr, config.eps_vel);
    let cl = params.sound_speed(rl);
    let cr = params.sound_speed(rr);
    let fl = phys_flux(rl, ml, params, config.eps_vel);
    let fr = phys_flux(rr, mr, params, config.eps_vel);
    match config.flux {
        FluxKind::Rusanov => {
            let a = (ul.abs() + cl).max(ur.abs() + cr);
            (
                0.5 * (fl.0 + fr.0) - 0.5 * a * (rr - rl),
                0.5 * (fl.1 + fr.1) - 0.5 * a * (mr - ml),
            )
        }
        FluxKind::Hll => {
            // vacuum-aware wave speeds: a dry side opens at the front speed
            // u -/+ 2c/(gamma-1) of the wet side
            let front = 2.0 / (params.gamma - 1.0);
            let (sl, sr) = if rl == 0.0 {
                (ur - front * cr, ur + cr)
            } else if rr == 0.0 {
                (ul - cl, ul + front * cl)
            } else {
                ((ul - cl).min(ur - cr), (ul + cl).max(ur + cr))
            };
            if sl >= 0.0 {
                fl
            } else if sr <= 0.0 {
                fr
            } else {
                let inv = 1.0 / (sr - sl);
                (
                    inv * (sr * fl.0 - sl * fr.0 + sl * sr * (rr - rl)),
                    inv * (sr * fl.1 - sl * fr.1 + sl * sr * (mr - ml)),
                )
            }
        }
    }
}

fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

/// Largest `|u| + c` over a frame.
pub fn max_wave_speed(rho: &[f64], mom: &[f64], config: &SchemeConfig, params: &EosParams) -> f64 {
    let mut a = 0.0f64;
    for (r, m) in rho.iter().zip(mom) {
        let u = velocity(*r, *m, config.eps_vel);
        a = a.max(u.abs() + params.sound_speed(*r));
    }
    a
}

/// Ghost-cell state just outside index range, per the boundary extension.
fn ghost(rho: &[f64], mom: &[f64], i: isize, ext: SpatialExtension, reflect_left: bool) -> (f64, f64) {
    let n = rho.len() as isize;
    if i >= 0 && i < n {
        return (rho[i as usize], mom[i as usize]);
    }
    if reflect_left && i < 0 {
        // mirror across r = 0: density even, momentum odd
        let j = (-i - 1).clamp(0, n - 1) as usize;
        return (rho[j], -mom[j]);
    }
    match ext {
        SpatialExtension::Zero => (0.0, 0.0),
        SpatialExtension::Constant => {
            let j = i.clamp(0, n - 1) as usize;
            (rho[j], mom[j])
        }
    }
}

/// One conservative forward-Euler step on a frame. Errors on CFL violation
/// and aborts (never clamps) if positivity is lost.
#[allow(clippy::too_many_arguments)]
pub fn advance(
    rho: &[f64],
    mom: &[f64],
    config: &SchemeConfig,
    params: &EosParams,
    dx: f64,
    dt: f64,
    x_min: f64,
    ext: SpatialExtension,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = rho.len();
    let a_max = max_wave_speed(rho, mom, config, params);
    if a_max > 0.0 {
        let limit = config.cfl * dx / a_max;
        if dt > limit * (1.0 + 1e-12) {
            return Err(Error::CflViolation { dt, limit });
        }
    }
    let radial = config.geometry == Geometry::Radial2d;
    let reflect_left = radial && x_min.abs() < 1e-14;

    // reconstructed interface states (first order unless minmod)
    let state = |i: isize| ghost(rho, mom, i, ext, reflect_left);
    let recon = |i: isize| -> ((f64, f64), (f64, f64)) {
        let (r, m) = state(i);
        match config.limiter {
            Limiter::None => ((r, m), (r, m)),
            Limiter::Minmod => {
                let (rm, mm) = state(i - 1);
                let (rp, mp) = state(i + 1);
                let sr = 0.5 * minmod(r - rm, rp - r);
                let sm = 0.5 * minmod(m - mm, mp - m);
                // keep reconstructed density nonnegative
                let sr = if r - sr.abs() < 0.0 { 0.0 } else { sr };
                ((r - sr, m - sm), (r + sr, m + sm))
            }
        }
    };

    // interface fluxes F_{i+1/2} for i in -1..n-1
    let mut flux = Vec::with_capacity(n + 1);
    for i in -1..(n as isize) {
        let (_, left_plus) = recon(i);
        let (right_minus, _) = recon(i + 1);
        flux.push(interface_flux(left_plus, right_minus, config, params));
    }

    let mut rho_next = vec![0.0; n];
    let mut mom_next = vec![0.0; n];
    if !radial {
        for i in 0..n {
            let fl = flux[i];
            let fr = flux[i + 1];
            rho_next[i] = rho[i] - dt / dx * (fr.0 - fl.0);
            mom_next[i] = mom[i] - dt / dx * (fr.1 - fl.1);
        }
    } else {
        // d_t(r U) + d_r(r F) = (0, p): face radii weight the fluxes, and the
        // pressure source keeps constant states exactly stationary
        for i in 0..n {
            let r_c = x_min + (i as f64 + 0.5) * dx;
            let r_l = x_min + i as f64 * dx;
            let r_r = x_min + (i + 1) as f64 * dx;
            let fl = flux[i];
            let fr = flux[i + 1];
            let p_i = params.kappa * rho[i].powf(params.gamma);
            rho_next[i] = rho[i] - dt / (r_c * dx) * (r_r * fr.0 - r_l * fl.0);
            mom_next[i] = mom[i] - dt / (r_c * dx) * (r_r * fr.1 - r_l * fl.1) + dt * p_i / r_c;
        }
    }
    for (i, r) in rho_next.iter().enumerate() {
        if *r < 0.0 {
            return Err(Error::PositivityLoss { cell: i });
        }
        if !r.is_finite() || !mom_next[i].is_finite() {
            return Err(Error::NonFinite { cell: i });
        }
    }
    // vacuum cells carry no momentum
    for (r, m) in rho_next.iter().zip(mom_next.iter_mut()) {
        if *r == 0.0 {
            *m = 0.0;
        }
    }
    Ok((rho_next, mom_next))
}

/// Discrete total energy `sum (m^2/(2 rho) + H(rho)) * measure` of a frame.
pub fn frame_energy(
    rho: &[f64],
    mom: &[f64],
    params: &EosParams,
    grid: &Grid,
) -> f64 {
    pairwise_sum_by(rho.len(), |i| {
        let kinetic = if rho[i] > 0.0 {
            0.5 * mom[i] * mom[i] / rho[i]
        } else {
            0.0
        };
        (kinetic + pressure_potential(params, rho[i]).unwrap_or(f64::NAN)) * grid.cell_measure(i)
    })
}

/// Integrates initial data over the grid's time span, recording every frame
/// time exactly. The returned field carries the weak role.
pub fn run_initial_value(
    grid: Grid,
    rho0: impl Fn(f64) -> f64,
    u0: impl Fn(f64) -> f64,
    config: &SchemeConfig,
    params: &EosParams,
    ext: SpatialExtension,
) -> Result<FlowField> {
    if (config.geometry == Geometry::Radial2d) != (grid.geometry == Geometry::Radial2d) {
        return Err(Error::GridMismatch(
            "scheme geometry does not match grid geometry".into(),
        ));
    }
    let n = grid.n_cells;
    let dx = grid.dx();
    let mut rho: Vec<f64> = (0..n).map(|j| rho0(grid.cell_center(j))).collect();
    let mut mom: Vec<f64> = (0..n)
        .map(|j| {
            let r = rho0(grid.cell_center(j));
            if r > 0.0 {
                r * u0(grid.cell_center(j))
            } else {
                0.0
            }
        })
        .collect();
    for (j, r) in rho.iter().enumerate() {
        if *r < 0.0 {
            return Err(Error::NegativeDensity { cell: j, value: *r });
        }
    }
    let mut out_rho = Vec::with_capacity(n * grid.n_frames);
    let mut out_mom = Vec::with_capacity(n * grid.n_frames);
    out_rho.extend_from_slice(&rho);
    out_mom.extend_from_slice(&mom);
    let mut t = grid.t_start;
    for frame in 1..grid.n_frames {
        let target = grid.frame_time(frame);
        while t < target - 1e-14 {
            let a = max_wave_speed(&rho, &mom, config, params);
            let dt_cfl = if a > 0.0 {
                config.cfl * dx / a
            } else {
                target - t
            };
            let dt = dt_cfl.min(target - t);
            let (r2, m2) = advance(&rho, &mom, config, params, dx, dt, grid.x_min, ext)?;
            rho = r2;
            mom = m2;
            t += dt;
        }
        t = target;
        out_rho.extend_from_slice(&rho);
        out_mom.extend_from_slice(&mom);
    }
    Ok(FlowField {
        grid,
        rho: out_rho,
        mom: out_mom,
        role: FieldRole::Weak,
        extension: ext,
        exterior_velocity: None,
    })
}

// ---------------------------------------------------------------------------
// Exact rarefaction fans

/// Middle-state data of a two-rarefaction Riemann solution.
#[derive(Debug, Clone, Copy)]
pub struct FanStructure {
    pub u_star: f64,
    pub c_star: f64,
    /// Vacuum opens between the fans when the Riemann invariants cross.
    pub vacuum: bool,
}

pub fn fan_structure(setup: &RiemannSetup) -> Result<FanStructure> {
    setup.validate()?;
    let p = &setup.params;
    let g1 = p.gamma - 1.0;
    let cl = p.sound_speed(setup.rho_l);
    let cr = p.sound_speed(setup.rho_r);
    let w_l = setup.u_l + 2.0 * cl / g1;
    let w_r = setup.u_r - 2.0 * cr / g1;
    let u_star = 0.5 * (w_l + w_r);
    let c_star = 0.25 * g1 * (w_l - w_r);
    if c_star > cl + 1e-14 || c_star > cr + 1e-14 {
        return Err(Error::NotRarefaction(format!(
            "middle sound speed {c_star} exceeds a side speed (cl = {cl}, cr = {cr}); \
             the data require a shock"
        )));
    }
    Ok(FanStructure {
        u_star,
        c_star: c_star.max(0.0),
        vacuum: c_star < 0.0,
    })
}

/// Exact self-similar state `(rho, u)` of the two-rarefaction solution at
/// `(t, x)`, fan centered at the origin. Requires `t > 0`.
pub fn exact_rarefaction(setup: &RiemannSetup, t: f64, x: f64) -> Result<(f64, f64)> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter {
            name: "t",
            message: format!("fan evaluation needs t > 0, got {t}"),
        });
    }
    let fan = fan_structure(setup)?;
    let p = &setup.params;
    let g = p.gamma;
    let g1 = g - 1.0;
    let cl = p.sound_speed(setup.rho_l);
    let cr = p.sound_speed(setup.rho_r);
    let xi = x / t;
    let rho_of_c = |c: f64| (c * c / (p.kappa * g)).powf(1.0 / g1);

    let (left_tail, right_tail) = if fan.vacuum {
        (setup.u_l + 2.0 * cl / g1, setup.u_r - 2.0 * cr / g1)
    } else {
        (fan.u_star - fan.c_star, fan.u_star + fan.c_star)
    };
    if xi <= setup.u_l - cl {
        Ok((setup.rho_l, setup.u_l))
    } else if xi < left_tail {
        // inside the left fan: u - c = xi along 1-characteristics
        let u = (g1 * setup.u_l + 2.0 * (xi + cl)) / (g + 1.0);
        let c = u - xi;
        Ok((rho_of_c(c), u))
    } else if xi <= right_tail {
        if fan.vacuum {
            Ok((0.0, 0.0))
        } else {
            Ok((rho_of_c(fan.c_star), fan.u_star))
        }
    } else if xi < setup.u_r + cr {
        let u = (g1 * setup.u_r + 2.0 * (xi - cr)) / (g + 1.0);
        let c = xi - u;
        Ok((rho_of_c(c), u))
    } else {
        Ok((setup.rho_r, setup.u_r))
    }
}

/// Space derivative `(d rho/dx, d u/dx)` of the exact fan at `(t, x)`
/// (one-sided values at the kinks).
pub fn exact_rarefaction_dx(setup: &RiemannSetup, t: f64, x: f64) -> Result<(f64, f64)> {
    let p = &setup.params;
    let g = p.gamma;
    let g1 = g - 1.0;
    let fan = fan_structure(setup)?;
    let cl = p.sound_speed(setup.rho_l);
    let cr = p.sound_speed(setup.rho_r);
    let xi = x / t;
    let (left_tail, right_tail) = if fan.vacuum {
        (setup.u_l + 2.0 * cl / g1, setup.u_r - 2.0 * cr / g1)
    } else {
        (fan.u_star - fan.c_star, fan.u_star + fan.c_star)
    };
    let (rho, _) = exact_rarefaction(setup, t, x)?;
    if xi > setup.u_l - cl && xi < left_tail {
        let du = 2.0 / ((g + 1.0) * t);
        let dc = du - 1.0 / t;
        let drho = if rho > 0.0 {
            let c = velocity_free_c(setup, t, x)?;
            2.0 * rho / (g1 * c) * dc
        } else {
            0.0
        };
        Ok((drho, du))
    } else if xi > right_tail && xi < setup.u_r + cr {
        let du = 2.0 / ((g + 1.0) * t);
        let dc = 1.0 / t - du;
        let drho = if rho > 0.0 {
            let c = velocity_free_c(setup, t, x)?;
            2.0 * rho / (g1 * c) * dc
        } else {
            0.0
        };
        Ok((drho, du))
    } else {
        Ok((0.0, 0.0))
    }
}

/// Time derivative `(d rho/dt, d u/dt)`; the fan is self-similar so
/// `d_t = -(x/t) d_x` pointwise off the kinks.
pub fn exact_rarefaction_dt(setup: &RiemannSetup, t: f64, x: f64) -> Result<(f64, f64)> {
    let (dr, du) = exact_rarefaction_dx(setup, t, x)?;
    Ok((-(x / t) * dr, -(x / t) * du))
}

fn velocity_free_c(setup: &RiemannSetup, t: f64, x: f64) -> Result<f64> {
    let (rho, _) = exact_rarefaction(setup, t, x)?;
    Ok(setup.params.sound_speed(rho))
}

/// Samples the exact fan (with origin shift `t0`) onto a grid as a
/// strong-role field. The fan must be open at every stored frame.
pub fn sample_rarefaction(setup: &RiemannSetup, grid: Grid, t0: f64) -> Result<FlowField> {
    let mut rho = Vec::with_capacity(grid.n_cells * grid.n_frames);
    let mut mom = Vec::with_capacity(rho.capacity());
    for i in 0..grid.n_frames {
        let t = grid.frame_time(i) + t0;
        for j in 0..grid.n_cells {
            let (r, u) = exact_rarefaction(setup, t, grid.cell_center(j))?;
            rho.push(r);
            mom.push(r * u);
        }
    }
    Ok(FlowField {
        grid,
        rho,
        mom,
        role: FieldRole::Strong,
        extension: SpatialExtension::Constant,
        exterior_velocity: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::lq_norm;

    fn params2() -> EosParams {
        EosParams::new(1.0, 2.0, 4.0).unwrap()
    }

    fn planar_config(dx: f64) -> SchemeConfig {
        SchemeConfig::default_for(Geometry::Planar1d, dx)
    }

    // 4th-order central difference
    fn diff4(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
    }

    #[test]
    fn constant_state_is_fixed_point() {
        let n = 64;
        let dx = 1.0 / n as f64;
        let rho = vec![1.3; n];
        let mom = vec![0.65; n];
        let cfg = planar_config(dx);
        let (r2, m2) = advance(
            &rho,
            &mom,
            &cfg,
            &params2(),
            dx,
            1e-3,
            0.0,
            SpatialExtension::Constant,
        )
        .unwrap();
        assert_eq!(r2, rho);
        assert_eq!(m2, mom);
    }

    #[test]
    fn cfl_violation_rejected() {
        let n = 32;
        let dx = 1.0 / n as f64;
        let rho = vec![1.0; n];
        let mom = vec![1.0; n];
        let cfg = planar_config(dx);
        let err = advance(
            &rho,
            &mom,
            &cfg,
            &params2(),
            dx,
            1.0,
            0.0,
            SpatialExtension::Constant,
        )
        .unwrap_err();
        assert!(matches!(err, Error::CflViolation { .. }));
    }

    #[test]
    fn vacuum_forming_double_rarefaction_stays_nonnegative() {
        let grid = Grid::new(Geometry::Planar1d, -4.0, 4.0, 512, 0.0, 0.8, 9).unwrap();
        let cfg = planar_config(grid.dx());
        let field = run_initial_value(
            grid,
            |x| if x.abs() < 10.0 { 1.0 } else { 1.0 },
            |x| if x < 0.0 { -2.0 } else { 2.0 },
            &cfg,
            &params2(),
            SpatialExtension::Constant,
        )
        .unwrap();
        let g = &field.grid;
        let last = g.n_frames - 1;
        let mut min_center = f64::INFINITY;
        for j in 0..g.n_cells {
            let r = field.rho_at(last, j);
            assert!(r >= 0.0);
            if g.cell_center(j).abs() < 0.5 {
                min_center = min_center.min(r);
            }
        }
        // density dips toward vacuum between the fans
        assert!(min_center < 0.2, "center density {min_center}");
    }

    #[test]
    fn mass_conserved_on_compact_support() {
        let grid = Grid::new(Geometry::Planar1d, -3.0, 3.0, 256, 0.0, 0.5, 6).unwrap();
        let cfg = planar_config(grid.dx());
        let field = run_initial_value(
            grid,
            |x| (1.0 - x * x).max(0.0),
            |x| 0.5 * x,
            &cfg,
            &params2(),
            SpatialExtension::Zero,
        )
        .unwrap();
        let m0 = field.frame_mass(0);
        for i in 1..field.grid.n_frames {
            assert!((field.frame_mass(i) - m0).abs() <= 1e-12 * m0.max(1.0));
        }
    }

    #[test]
    fn energy_nonincreasing_for_rusanov() {
        let grid = Grid::new(Geometry::Planar1d, -4.0, 4.0, 256, 0.0, 0.6, 13).unwrap();
        let cfg = planar_config(grid.dx());
        let p = params2();
        let field = run_initial_value(
            grid,
            |_| 1.0,
            |x| if x < 0.0 { -1.5 } else { 1.5 },
            &cfg,
            &p,
            SpatialExtension::Constant,
        )
        .unwrap();
        let g = &field.grid;
        let mut prev = f64::INFINITY;
        for i in 0..g.n_frames {
            let lo = i * g.n_cells;
            let e = frame_energy(&field.rho[lo..lo + g.n_cells], &field.mom[lo..lo + g.n_cells], &p, g);
            assert!(e <= prev * (1.0 + 1e-12), "frame {i}: {e} vs {prev}");
            prev = e;
        }
    }

    #[test]
    fn fan_structure_and_errors() {
        let p = params2();
        // expansion: fine
        let s = RiemannSetup {
            rho_l: 1.0,
            u_l: -2.0,
            rho_r: 1.0,
            u_r: 2.0,
            params: p,
        };
        let fan = fan_structure(&s).unwrap();
        assert!(!fan.vacuum);
        assert!((fan.u_star - 0.0).abs() < 1e-14);
        // compression: needs a shock
        let bad = RiemannSetup {
            u_l: 1.0,
            u_r: -1.0,
            ..s
        };
        assert!(matches!(
            fan_structure(&bad),
            Err(Error::NotRarefaction(_))
        ));
        // strong expansion opens vacuum
        let vac = RiemannSetup {
            u_l: -4.0,
            u_r: 4.0,
            ..s
        };
        assert!(fan_structure(&vac).unwrap().vacuum);
    }

    #[test]
    fn fan_left_of_head_is_left_state() {
        let s = RiemannSetup {
            rho_l: 1.0,
            u_l: -1.0,
            rho_r: 0.8,
            u_r: 1.0,
            params: params2(),
        };
        let (r, u) = exact_rarefaction(&s, 0.5, -10.0).unwrap();
        assert_eq!((r, u), (1.0, -1.0));
    }

    #[test]
    fn fan_interior_invariant_gamma_2() {
        // characteristics: u - x/t = +c in the left fan, -c in the right
        let s = RiemannSetup {
            rho_l: 1.0,
            u_l: -2.0,
            rho_r: 1.0,
            u_r: 2.0,
            params: params2(),
        };
        let t = 0.7;
        let fan = fan_structure(&s).unwrap();
        let cl = s.params.sound_speed(s.rho_l);
        let head = (s.u_l - cl) * t;
        let tail = (fan.u_star - fan.c_star) * t;
        for k in 1..10 {
            let x = head + (tail - head) * k as f64 / 10.0;
            let (rho, u) = exact_rarefaction(&s, t, x).unwrap();
            let c = s.params.sound_speed(rho);
            assert!((u - x / t - c).abs() < 1e-12);
            // mirrored point sits in the right fan
            let (rho_m, u_m) = exact_rarefaction(&s, t, -x).unwrap();
            let c_m = s.params.sound_speed(rho_m);
            assert!((u_m + x / t + c_m).abs() < 1e-12);
        }
    }

    #[test]
    fn fan_satisfies_pde_numerically() {
        // residuals of mass and momentum equations by 4th-order differences
        // off the kinks
        let s = RiemannSetup {
            rho_l: 1.0,
            u_l: -2.0,
            rho_r: 1.0,
            u_r: 2.0,
            params: params2(),
        };
        let p = s.params;
        let rho_f = |t: f64, x: f64| exact_rarefaction(&s, t, x).unwrap().0;
        let mom_f = |t: f64, x: f64| {
            let (r, u) = exact_rarefaction(&s, t, x).unwrap();
            r * u
        };
        let h = 0.002;
        // probe well inside the left fan at t = 1
        for x in [-2.8, -2.2, -1.6] {
            let t = 1.0;
            let d_rho_dt = diff4(|tt| rho_f(tt, x), t, h);
            let d_mom_dx = diff4(|xx| mom_f(t, xx), x, h);
            assert!((d_rho_dt + d_mom_dx).abs() < 1e-8, "x = {x}");
            let d_mom_dt = diff4(|tt| mom_f(tt, x), t, h);
            let flux = |xx: f64| {
                let (r, u) = exact_rarefaction(&s, t, xx).unwrap();
                r * u * u + p.kappa * r.powf(p.gamma)
            };
            let d_flux_dx = diff4(flux, x, h);
            assert!((d_mom_dt + d_flux_dx).abs() < 1e-8, "x = {x}");
        }
    }

    #[test]
    fn fan_derivative_closures_match_differences() {
        let s = RiemannSetup {
            rho_l: 1.0,
            u_l: -2.0,
            rho_r: 1.0,
            u_r: 2.0,
            params: params2(),
        };
        let t = 0.9;
        for x in [-2.5, -1.8, 1.8, 2.5] {
            let (drho_dx, du_dx) = exact_rarefaction_dx(&s, t, x).unwrap();
            let (drho_dt, du_dt) = exact_rarefaction_dt(&s, t, x).unwrap();
            let fd_rx = diff4(|xx| exact_rarefaction(&s, t, xx).unwrap().0, x, 0.005);
            let fd_ux = diff4(|xx| exact_rarefaction(&s, t, xx).unwrap().1, x, 0.005);
            let fd_rt = diff4(|tt| exact_rarefaction(&s, tt, x).unwrap().0, t, 0.005);
            let fd_ut = diff4(|tt| exact_rarefaction(&s, tt, x).unwrap().1, t, 0.005);
            // time differences of the self-similar profile carry O(h^4 x/t^6)
            // truncation, so the tolerance is looser than for exact-linear x cuts
            assert!((drho_dx - fd_rx).abs() < 1e-7, "x = {x}");
            assert!((du_dx - fd_ux).abs() < 1e-7);
            assert!((drho_dt - fd_rt).abs() < 1e-7);
            assert!((du_dt - fd_ut).abs() < 1e-7);
        }
    }

    #[test]
    fn symmetric_fan_parities() {
        let s = RiemannSetup {
            rho_l: 1.0,
            u_l: -2.0,
            rho_r: 1.0,
            u_r: 2.0,
            params: params2(),
        };
        for x in [0.3, 1.1, 2.4, 3.3] {
            let (rp, up) = exact_rarefaction(&s, 1.0, x).unwrap();
            let (rm, um) = exact_rarefaction(&s, 1.0, -x).unwrap();
            assert!((rp - rm).abs() < 1e-14);
            assert!((up + um).abs() < 1e-14);
        }
    }

    #[test]
    fn fv_converges_to_exact_fan() {
        let s = RiemannSetup {
            rho_l: 1.0,
            u_l: -1.0,
            rho_r: 1.0,
            u_r: 1.0,
            params: params2(),
        };
        let t0 = 0.2;
        let t_end = 0.6;
        let mut errors = Vec::new();
        for n in [256usize, 512, 1024] {
            let grid = Grid::new(Geometry::Planar1d, -4.0, 4.0, n, 0.0, t_end, 4).unwrap();
            let cfg = planar_config(grid.dx());
            let field = run_initial_value(
                grid.clone(),
                |x| exact_rarefaction(&s, t0, x).unwrap().0,
                |x| exact_rarefaction(&s, t0, x).unwrap().1,
                &cfg,
                &s.params,
                SpatialExtension::Constant,
            )
            .unwrap();
            let last = grid.n_frames - 1;
            let t = grid.frame_time(last) + t0;
            let diffs: Vec<f64> = (0..n)
                .map(|j| {
                    let x = grid.cell_center(j);
                    field.rho_at(last, j) - exact_rarefaction(&s, t, x).unwrap().0
                })
                .collect();
            errors.push(lq_norm(&diffs, 1.0, grid.dx()));
        }
        let order1 = (errors[0] / errors[1]).log2();
        let order2 = (errors[1] / errors[2]).log2();
        assert!(
            order1 >= 0.8 && order2 >= 0.8,
            "orders {order1}, {order2}, errors {errors:?}"
        );
    }

    #[test]
    fn radial_constant_state_is_stationary() {
        let n = 64;
        let grid = Grid::new(Geometry::Radial2d, 0.0, 2.0, n, 0.0, 0.1, 2).unwrap();
        let dx = grid.dx();
        let cfg = SchemeConfig::default_for(Geometry::Radial2d, dx);
        let rho = vec![1.5; n];
        let mom = vec![0.0; n];
        let (r2, m2) = advance(
            &rho,
            &mom,
            &cfg,
            &params2(),
            dx,
            1e-3,
            0.0,
            SpatialExtension::Constant,
        )
        .unwrap();
        for i in 0..n {
            assert!((r2[i] - 1.5).abs() < 1e-15, "cell {i}");
            assert!(m2[i].abs() < 1e-13, "cell {i}: {}", m2[i]);
        }
    }

    #[test]
    fn radial_mass_conserved() {
        let grid = Grid::new(Geometry::Radial2d, 0.0, 2.5, 256, 0.0, 0.5, 6).unwrap();
        let cfg = SchemeConfig::default_for(Geometry::Radial2d, grid.dx());
        let field = run_initial_value(
            grid,
            |r| (1.0 - r).max(0.0).powi(2),
            |r| r,
            &cfg,
            &params2(),
            SpatialExtension::Zero,
        )
        .unwrap();
        let m0 = field.frame_mass(0);
        for i in 1..field.grid.n_frames {
            assert!(
                (field.frame_mass(i) - m0).abs() <= 1e-10 * m0.max(1.0),
                "frame {i}: {} vs {m0}",
                field.frame_mass(i)
            );
        }
    }

    #[test]
    fn minmod_reduces_fan_error() {
        let s = RiemannSetup {
            rho_l: 1.0,
            u_l: -1.0,
            rho_r: 1.0,
            u_r: 1.0,
            params: params2(),
        };
        let t0 = 0.2;
        let grid = Grid::new(Geometry::Planar1d, -3.0, 3.0, 512, 0.0, 0.4, 3).unwrap();
        let mut err = Vec::new();
        for limiter in [Limiter::None, Limiter::Minmod] {
            let cfg = SchemeConfig {
                limiter,
                ..planar_config(grid.dx())
            };
            let field = run_initial_value(
                grid.clone(),
                |x| exact_rarefaction(&s, t0, x).unwrap().0,
                |x| exact_rarefaction(&s, t0, x).unwrap().1,
                &cfg,
                &s.params,
                SpatialExtension::Constant,
            )
            .unwrap();
            let last = grid.n_frames - 1;
            let t = grid.frame_time(last) + t0;
            let diffs: Vec<f64> = (0..grid.n_cells)
                .map(|j| field.rho_at(last, j) - exact_rarefaction(&s, t, grid.cell_center(j)).unwrap().0)
                .collect();
            err.push(lq_norm(&diffs, 1.0, grid.dx()));
        }
        assert!(err[1] < err[0], "minmod {} vs none {}", err[1], err[0]);
    }
}
