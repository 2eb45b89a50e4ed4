//! C ABI for the toolkit: opaque field handles, plain-old-data windows, and
//! status codes. The generated header lands in `include/euvac.h`.
//!
//! Conventions: every fallible call returns [`EuvacStatus`] and writes its
//! result through out-pointers; handles are created and destroyed by
//! matching `_create`/`_free` pairs. Passing a null pointer yields
//! `NullPointer`, never a crash.

use std::os::raw::c_char;

use euvac::admissibility;
use euvac::eos::{self, EosParams};
use euvac::exponents;
use euvac::grid::{FlowField, Geometry, Grid, SpatialExtension};
use euvac::mollify::{self, Lattice, MollifierKernel};
use euvac::relative_energy;
use euvac::solver::{run_initial_value, SchemeConfig};

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EuvacStatus {
    Ok = 0,
    InvalidArgument = 1,
    NumericalError = 2,
    NullPointer = 3,
}

/// Opaque discrete flow field (density and momentum on a uniform
/// space-time grid).
pub struct EuvacField {
    inner: FlowField,
}

/// Feasible scaling-exponent window. `kappa_hi`/`nu_hi` are `INFINITY`
/// when unbounded; `q_tilde` is meaningful only when `q_tilde_defined` is
/// nonzero.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct EuvacExponentWindow {
    pub kappa_lo: f64,
    pub kappa_hi: f64,
    pub nu_lo: f64,
    pub nu_hi: f64,
    pub p_exp: f64,
    pub q_tilde: f64,
    pub q_tilde_defined: i32,
    pub feasible: i32,
}

fn write_out<T>(out: *mut T, value: T) -> EuvacStatus {
    if out.is_null() {
        return EuvacStatus::NullPointer;
    }
    unsafe { *out = value };
    EuvacStatus::Ok
}

/// Toolkit version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn euvac_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Pressure `kappa * rho^gamma`.
#[no_mangle]
pub extern "C" fn euvac_pressure(kappa: f64, gamma: f64, rho: f64, out: *mut f64) -> EuvacStatus {
    let params = match EosParams::new(kappa, gamma, rho.abs().max(1.0)) {
        Ok(p) => p,
        Err(_) => return EuvacStatus::InvalidArgument,
    };
    match eos::pressure(&params, rho) {
        Ok(v) => write_out(out, v),
        Err(_) => EuvacStatus::InvalidArgument,
    }
}

/// Pressure potential `kappa/(gamma-1) * rho^gamma`.
#[no_mangle]
pub extern "C" fn euvac_pressure_potential(
    kappa: f64,
    gamma: f64,
    rho: f64,
    out: *mut f64,
) -> EuvacStatus {
    let params = match EosParams::new(kappa, gamma, rho.abs().max(1.0)) {
        Ok(p) => p,
        Err(_) => return EuvacStatus::InvalidArgument,
    };
    match eos::pressure_potential(&params, rho) {
        Ok(v) => write_out(out, v),
        Err(_) => EuvacStatus::InvalidArgument,
    }
}

/// Sound speed `sqrt(p'(rho))`.
#[no_mangle]
pub extern "C" fn euvac_sound_speed(kappa: f64, gamma: f64, rho: f64, out: *mut f64) -> EuvacStatus {
    if rho < 0.0 {
        return EuvacStatus::InvalidArgument;
    }
    let params = match EosParams::new(kappa, gamma, rho.max(1.0)) {
        Ok(p) => p,
        Err(_) => return EuvacStatus::InvalidArgument,
    };
    write_out(out, params.sound_speed(rho))
}

/// Threshold the vacuum-integrability exponent must exceed for the given
/// `(gamma, beta)`.
#[no_mangle]
pub extern "C" fn euvac_theta_threshold(gamma: f64, beta: f64, out: *mut f64) -> EuvacStatus {
    match exponents::theta_threshold(gamma, beta) {
        Ok(v) => write_out(out, v),
        Err(_) => EuvacStatus::InvalidArgument,
    }
}

/// Solves the explicit feasible window for the scaling exponents.
#[no_mangle]
pub extern "C" fn euvac_solve_window(
    gamma: f64,
    alpha: f64,
    beta: f64,
    theta: f64,
    q: f64,
    out: *mut EuvacExponentWindow,
) -> EuvacStatus {
    let w = match exponents::solve_window(gamma, alpha, beta, theta, q) {
        Ok(w) => w,
        Err(_) => return EuvacStatus::InvalidArgument,
    };
    write_out(
        out,
        EuvacExponentWindow {
            kappa_lo: w.kappa_lo,
            kappa_hi: w.kappa_hi,
            nu_lo: w.nu_lo,
            nu_hi: w.nu_hi,
            p_exp: w.p_exp,
            q_tilde: w.q_tilde.unwrap_or(f64::NAN),
            q_tilde_defined: w.q_tilde.is_some() as i32,
            feasible: w.feasible as i32,
        },
    )
}

/// Evaluates the seven scaling inequalities at `(kappa_exp, nu)`. Writes
/// the seven slacks into `slacks_out` (length at least 7) and the overall
/// verdict into `pass_out`.
///
/// # Safety
/// `slacks_out` must point to at least 7 writable doubles.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn euvac_verify_full_system(
    gamma: f64,
    alpha: f64,
    beta: f64,
    theta: f64,
    q: f64,
    kappa_exp: f64,
    nu: f64,
    slacks_out: *mut f64,
    pass_out: *mut i32,
) -> EuvacStatus {
    if slacks_out.is_null() || pass_out.is_null() {
        return EuvacStatus::NullPointer;
    }
    let w = match exponents::solve_window(gamma, alpha, beta, theta, q) {
        Ok(w) => w,
        Err(_) => return EuvacStatus::InvalidArgument,
    };
    let rep = exponents::verify_full_system(&w, kappa_exp, nu);
    for (i, e) in rep.entries.iter().enumerate() {
        *slacks_out.add(i) = e.slack;
    }
    *pass_out = rep.pass as i32;
    EuvacStatus::Ok
}

/// Creates a field from caller-owned buffers (`n_frames * n_cells` entries
/// each, frame-major). `geometry`: 0 planar, 1 radial. Returns null on
/// invalid input.
///
/// # Safety
/// `rho` and `mom` must point to `n_frames * n_cells` readable doubles.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn euvac_field_create(
    geometry: i32,
    x_min: f64,
    x_max: f64,
    n_cells: usize,
    t_start: f64,
    t_end: f64,
    n_frames: usize,
    rho: *const f64,
    mom: *const f64,
) -> *mut EuvacField {
    if rho.is_null() || mom.is_null() {
        return std::ptr::null_mut();
    }
    let geom = match geometry {
        0 => Geometry::Planar1d,
        1 => Geometry::Radial2d,
        _ => return std::ptr::null_mut(),
    };
    let grid = match Grid::new(geom, x_min, x_max, n_cells, t_start, t_end, n_frames) {
        Ok(g) => g,
        Err(_) => return std::ptr::null_mut(),
    };
    let len = n_cells * n_frames;
    let rho = std::slice::from_raw_parts(rho, len).to_vec();
    let mom = std::slice::from_raw_parts(mom, len).to_vec();
    let field = FlowField {
        grid,
        rho,
        mom,
        role: euvac::grid::FieldRole::Weak,
        extension: SpatialExtension::Constant,
        exterior_velocity: None,
    };
    if field.validate().is_err() {
        return std::ptr::null_mut();
    }
    Box::into_raw(Box::new(EuvacField { inner: field }))
}

/// Destroys a field handle.
///
/// # Safety
/// `field` must be a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn euvac_field_free(field: *mut EuvacField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Total mass of one frame (radial measure included).
///
/// # Safety
/// `field` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn euvac_field_frame_mass(
    field: *const EuvacField,
    frame: usize,
    out: *mut f64,
) -> EuvacStatus {
    let Some(f) = field.as_ref() else {
        return EuvacStatus::NullPointer;
    };
    if frame >= f.inner.grid.n_frames {
        return EuvacStatus::InvalidArgument;
    }
    write_out(out, f.inner.frame_mass(frame))
}

/// Total-energy admissibility margin `min_tau [E(0) - E(tau)]`.
///
/// # Safety
/// `field` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn euvac_energy_margin(
    field: *const EuvacField,
    kappa: f64,
    gamma: f64,
    rho_max: f64,
    out: *mut f64,
) -> EuvacStatus {
    let Some(f) = field.as_ref() else {
        return EuvacStatus::NullPointer;
    };
    let params = match EosParams::new(kappa, gamma, rho_max) {
        Ok(p) => p,
        Err(_) => return EuvacStatus::InvalidArgument,
    };
    match admissibility::check_energy_admissibility(&f.inner, &params, 0.0) {
        Ok(rep) => write_out(out, rep.margin),
        Err(_) => EuvacStatus::NumericalError,
    }
}

/// Relative energy between two fields on the same grid at frame time `t`.
///
/// # Safety
/// Both handles must be live.
#[no_mangle]
pub unsafe extern "C" fn euvac_relative_energy(
    weak: *const EuvacField,
    strong: *const EuvacField,
    kappa: f64,
    gamma: f64,
    rho_max: f64,
    t: f64,
    out: *mut f64,
) -> EuvacStatus {
    let (Some(w), Some(s)) = (weak.as_ref(), strong.as_ref()) else {
        return EuvacStatus::NullPointer;
    };
    let params = match EosParams::new(kappa, gamma, rho_max) {
        Ok(p) => p,
        Err(_) => return EuvacStatus::InvalidArgument,
    };
    match relative_energy::relative_energy(&w.inner, &s.inner, &params, t) {
        Ok(v) => write_out(out, v),
        Err(_) => EuvacStatus::InvalidArgument,
    }
}

/// Mollifies a field with the space-time bump kernel at radius `eps`,
/// returning a new handle through `out`.
///
/// # Safety
/// `field` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn euvac_mollify(
    field: *const EuvacField,
    eps: f64,
    out: *mut *mut EuvacField,
) -> EuvacStatus {
    let Some(f) = field.as_ref() else {
        return EuvacStatus::NullPointer;
    };
    if out.is_null() {
        return EuvacStatus::NullPointer;
    }
    let kernel = MollifierKernel::bump_space_time();
    match mollify::mollify_field(&f.inner, &kernel, eps) {
        Ok(m) => {
            *out = Box::into_raw(Box::new(EuvacField { inner: m }));
            EuvacStatus::Ok
        }
        Err(_) => EuvacStatus::InvalidArgument,
    }
}

/// Finite-difference Besov seminorm of one component over the default
/// dyadic shift set. `component`: 0 density, 1 momentum, 2 velocity.
///
/// # Safety
/// `field` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn euvac_besov_seminorm(
    field: *const EuvacField,
    component: i32,
    alpha: f64,
    q: f64,
    out: *mut f64,
) -> EuvacStatus {
    let Some(f) = field.as_ref() else {
        return EuvacStatus::NullPointer;
    };
    let g = &f.inner.grid;
    let data: Vec<f64> = match component {
        0 => f.inner.rho.clone(),
        1 => f.inner.mom.clone(),
        2 => (0..g.n_frames * g.n_cells)
            .map(|k| f.inner.velocity_at(k / g.n_cells, k % g.n_cells))
            .collect(),
        _ => return EuvacStatus::InvalidArgument,
    };
    let lat = Lattice {
        n_t: g.n_frames,
        n_x: g.n_cells,
        dt: g.dt(),
        dx: g.dx(),
        data,
        extension: f.inner.extension,
    };
    let shifts = euvac::besov::dyadic_shifts(&lat);
    match euvac::besov::estimate_seminorm(&lat, alpha, q, &shifts) {
        Ok(est) => write_out(out, est.seminorm),
        Err(_) => EuvacStatus::InvalidArgument,
    }
}

/// One-sided Lipschitz (expansion-rate) estimate at frame time `t`.
///
/// # Safety
/// `field` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn euvac_estimate_lambda(
    field: *const EuvacField,
    t: f64,
    out: *mut f64,
) -> EuvacStatus {
    let Some(f) = field.as_ref() else {
        return EuvacStatus::NullPointer;
    };
    match admissibility::estimate_lambda(&f.inner, t) {
        Ok(v) => write_out(out, v),
        Err(_) => EuvacStatus::InvalidArgument,
    }
}

/// Runs the finite-volume solver on Riemann data and returns the field
/// handle through `out` (planar grid, Rusanov flux, CFL 0.45).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn euvac_simulate_riemann(
    kappa: f64,
    gamma: f64,
    rho_max: f64,
    rho_l: f64,
    u_l: f64,
    rho_r: f64,
    u_r: f64,
    x_min: f64,
    x_max: f64,
    n_cells: usize,
    t_end: f64,
    n_frames: usize,
    out: *mut *mut EuvacField,
) -> EuvacStatus {
    if out.is_null() {
        return EuvacStatus::NullPointer;
    }
    let params = match EosParams::new(kappa, gamma, rho_max) {
        Ok(p) => p,
        Err(_) => return EuvacStatus::InvalidArgument,
    };
    let grid = match Grid::new(
        Geometry::Planar1d,
        x_min,
        x_max,
        n_cells,
        0.0,
        t_end,
        n_frames,
    ) {
        Ok(g) => g,
        Err(_) => return EuvacStatus::InvalidArgument,
    };
    let scheme = SchemeConfig::default_for(Geometry::Planar1d, grid.dx());
    match run_initial_value(
        grid,
        move |x| if x < 0.0 { rho_l } else { rho_r },
        move |x| if x < 0.0 { u_l } else { u_r },
        &scheme,
        &params,
        SpatialExtension::Constant,
    ) {
        Ok(field) => {
            *out = Box::into_raw(Box::new(EuvacField { inner: field }));
            EuvacStatus::Ok
        }
        Err(_) => EuvacStatus::NumericalError,
    }
}
