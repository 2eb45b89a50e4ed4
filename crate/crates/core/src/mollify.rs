//! Space-time mollification with compactly supported C1 kernels.
//!
//! Discrete convolution uses cell-centered midpoint quadrature with the
//! weights renormalized so constants are preserved exactly; derivative
//! kernels are corrected to annihilate constants and reproduce unit slopes,
//! so those structural identities hold to rounding instead of quadrature
//! accuracy. Fields are extended by zero in time; in space either by zero
//! (compact support) or by the boundary value (constant far field), per the
//! field's metadata. Convolution is direct summation: grids are desk scale
//! and fixed-order pairwise sums keep results independent of thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{FlowField, SpatialExtension, VacuumNeighborhood};
use crate::numerics::{gauss_legendre, pairwise_sum};

/// Kernel profile. `Bump` is the separable default `(1-s^2)^3` per
/// coordinate (C2). `OneSided { m }` is the causal space-time variant
/// supported on `[0,1] x B(0,1)`, `(s(1-s))^m (1-|y|^2)^m`, with `m > 1`
/// (C1) chosen so that `m * theta < 1` keeps `1/eta^theta` integrable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum KernelProfile {
    Bump,
    OneSided { m: f64 },
}

/// Compactly supported mollifier with its scaling law. `support_radius` is
/// the per-axis half-width `l` of the unscaled kernel; the scaled kernel
/// `eta_eps` reaches `l * eps` along each axis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MollifierKernel {
    pub profile: KernelProfile,
    pub support_radius: f64,
    /// Whether the kernel extends over the time axis.
    pub time_axis: bool,
    /// Spatial dimension of the kernel (1 for lattice convolutions, 2 for
    /// the radial ball integrals of the expanding-vacuum example).
    pub space_dim: usize,
    /// Stored check value of the integral of the normalized kernel.
    pub normalization: f64,
    norm_const: f64,
}

impl MollifierKernel {
    /// Spatial-only bump kernel in one dimension.
    pub fn bump_space() -> Self {
        Self::build(KernelProfile::Bump, false, 1)
    }

    /// Space-time bump kernel (symmetric in time), one space dimension.
    pub fn bump_space_time() -> Self {
        Self::build(KernelProfile::Bump, true, 1)
    }

    /// The causal space-time kernel with profile exponent `m`, supported on
    /// `[0,1] x B(0,1)`.
    pub fn one_sided(m: f64, space_dim: usize) -> Result<Self> {
        if !(m > 1.0) {
            return Err(Error::InvalidParameter {
                name: "m",
                message: format!("profile exponent must exceed 1 for a C1 kernel, got {m}"),
            });
        }
        Ok(Self::build(KernelProfile::OneSided { m }, true, space_dim))
    }

    fn build(profile: KernelProfile, time_axis: bool, space_dim: usize) -> Self {
        let norm_const = unnormalized_integral(profile, time_axis, space_dim);
        let mut k = MollifierKernel {
            profile,
            support_radius: 1.0,
            time_axis,
            space_dim,
            normalization: 0.0,
            norm_const,
        };
        // re-integrate the normalized kernel as the stored check value
        k.normalization = unnormalized_integral(profile, time_axis, space_dim) / k.norm_const;
        k
    }

    /// Time profile on the reference scale (argument in kernel units).
    pub fn time_profile(&self, s: f64) -> f64 {
        if !self.time_axis {
            return 1.0;
        }
        match self.profile {
            KernelProfile::Bump => bump3(s),
            KernelProfile::OneSided { m } => {
                if s <= 0.0 || s >= 1.0 {
                    0.0
                } else {
                    (s * (1.0 - s)).powf(m)
                }
            }
        }
    }

    fn dtime_profile(&self, s: f64) -> f64 {
        match self.profile {
            KernelProfile::Bump => dbump3(s),
            KernelProfile::OneSided { m } => {
                if s <= 0.0 || s >= 1.0 {
                    0.0
                } else {
                    m * (s * (1.0 - s)).powf(m - 1.0) * (1.0 - 2.0 * s)
                }
            }
        }
    }

    /// Spatial profile as a function of `|y|^2` in kernel units.
    pub fn space_profile_r2(&self, r2: f64) -> f64 {
        match self.profile {
            KernelProfile::Bump => bump3_r2(r2),
            KernelProfile::OneSided { m } => {
                if r2 >= 1.0 {
                    0.0
                } else {
                    (1.0 - r2).powf(m)
                }
            }
        }
    }

    fn dspace_profile_1d(&self, y: f64) -> f64 {
        match self.profile {
            KernelProfile::Bump => dbump3(y),
            KernelProfile::OneSided { m } => {
                if y.abs() >= 1.0 {
                    0.0
                } else {
                    -2.0 * m * y * (1.0 - y * y).powf(m - 1.0)
                }
            }
        }
    }

    /// Normalized kernel value at `(s, y)` in kernel units (1D space).
    pub fn eval(&self, s: f64, y: f64) -> f64 {
        self.time_profile(s) * self.space_profile_r2(y * y) / self.norm_const
    }

    /// Normalized value at `(s, y1, y2)` for the 2D-space variant.
    pub fn eval2(&self, s: f64, y1: f64, y2: f64) -> f64 {
        self.time_profile(s) * self.space_profile_r2(y1 * y1 + y2 * y2) / self.norm_const
    }

    /// Whether `int 1/eta^theta` over the kernel support is finite.
    pub fn inv_theta_integrable(&self, theta: f64) -> bool {
        match self.profile {
            KernelProfile::Bump => false, // C2 bump vanishes quadratically too slowly in time corners
            KernelProfile::OneSided { m } => m * theta < 1.0,
        }
    }

    /// `int (eta + delta)^(-theta)` over the reference support, by
    /// quadrature (graded enough for the mild endpoint behavior).
    pub fn inv_theta_integral(&self, theta: f64, delta: f64) -> f64 {
        let (nodes, weights) = gauss_legendre(8);
        let panels = 96;
        let mut time_vals = Vec::new();
        let (t_lo, t_hi) = if matches!(self.profile, KernelProfile::OneSided { .. }) {
            (0.0, 1.0)
        } else {
            (-1.0, 1.0)
        };
        for p in 0..panels {
            let a = t_lo + (t_hi - t_lo) * p as f64 / panels as f64;
            let b = t_lo + (t_hi - t_lo) * (p + 1) as f64 / panels as f64;
            for (xi, wi) in nodes.iter().zip(&weights) {
                let s = 0.5 * (a + b) + 0.5 * (b - a) * xi;
                time_vals.push((s, 0.5 * (b - a) * wi));
            }
        }
        let mut total = Vec::new();
        match self.space_dim {
            1 => {
                for p in 0..panels {
                    let a = -1.0 + 2.0 * p as f64 / panels as f64;
                    let b = -1.0 + 2.0 * (p + 1) as f64 / panels as f64;
                    for (xi, wi) in nodes.iter().zip(&weights) {
                        let y = 0.5 * (a + b) + 0.5 * (b - a) * xi;
                        let wy = 0.5 * (b - a) * wi;
                        for &(s, ws) in &time_vals {
                            let eta = self.eval(s, y);
                            total.push(ws * wy * (eta + delta).powf(-theta));
                        }
                    }
                }
            }
            2 => {
                // radial: int_B f(|y|) dy = 2*pi * int_0^1 f(r) r dr
                for p in 0..panels {
                    let a = p as f64 / panels as f64;
                    let b = (p + 1) as f64 / panels as f64;
                    for (xi, wi) in nodes.iter().zip(&weights) {
                        let r = 0.5 * (a + b) + 0.5 * (b - a) * xi;
                        let wr = 0.5 * (b - a) * wi * 2.0 * std::f64::consts::PI * r;
                        for &(s, ws) in &time_vals {
                            let eta =
                                self.time_profile(s) * self.space_profile_r2(r * r) / self.norm_const;
                            total.push(ws * wr * (eta + delta).powf(-theta));
                        }
                    }
                }
            }
            d => panic!("unsupported kernel space dimension {d}"),
        }
        pairwise_sum(&total)
    }
}

fn bump3(s: f64) -> f64 {
    let t = 1.0 - s * s;
    if t <= 0.0 {
        0.0
    } else {
        t * t * t
    }
}

fn bump3_r2(r2: f64) -> f64 {
    let t = 1.0 - r2;
    if t <= 0.0 {
        0.0
    } else {
        t * t * t
    }
}

fn dbump3(s: f64) -> f64 {
    let t = 1.0 - s * s;
    if t <= 0.0 {
        0.0
    } else {
        -6.0 * s * t * t
    }
}

/// Integral of the unnormalized profile over its reference support.
fn unnormalized_integral(profile: KernelProfile, time_axis: bool, space_dim: usize) -> f64 {
    let axis = |f: &dyn Fn(f64) -> f64, lo: f64, hi: f64| -> f64 {
        let (nodes, weights) = gauss_legendre(8);
        let panels = 256;
        let mut acc = Vec::with_capacity(panels * nodes.len());
        for p in 0..panels {
            let a = lo + (hi - lo) * p as f64 / panels as f64;
            let b = lo + (hi - lo) * (p + 1) as f64 / panels as f64;
            for (xi, wi) in nodes.iter().zip(&weights) {
                let s = 0.5 * (a + b) + 0.5 * (b - a) * xi;
                acc.push(0.5 * (b - a) * wi * f(s));
            }
        }
        pairwise_sum(&acc)
    };
    match profile {
        KernelProfile::Bump => {
            let one_axis = axis(&|s| bump3(s), -1.0, 1.0);
            let t_part = if time_axis { one_axis } else { 1.0 };
            t_part * one_axis.powi(space_dim as i32)
        }
        KernelProfile::OneSided { m } => {
            let t_part = if time_axis {
                axis(&|s| (s.max(0.0) * (1.0 - s).max(0.0)).powf(m), 0.0, 1.0)
            } else {
                1.0
            };
            let s_part = match space_dim {
                1 => axis(&|y| (1.0 - y * y).max(0.0).powf(m), -1.0, 1.0),
                // closed form: int_B (1-|y|^2)^m dy = pi/(m+1)
                2 => std::f64::consts::PI / (m + 1.0),
                d => panic!("unsupported kernel space dimension {d}"),
            };
            t_part * s_part
        }
    }
}

/// Scalar samples on a uniform lattice: one row per frame (a single row for
/// purely spatial data). The common currency of mollification, seminorm
/// estimation, and the commutator harness.
#[derive(Debug, Clone)]
pub struct Lattice {
    pub n_t: usize,
    pub n_x: usize,
    pub dt: f64,
    pub dx: f64,
    pub data: Vec<f64>,
    pub extension: SpatialExtension,
}

impl Lattice {
    pub fn spatial(dx: f64, data: Vec<f64>, extension: SpatialExtension) -> Self {
        Lattice {
            n_t: 1,
            n_x: data.len(),
            dt: 1.0,
            dx,
            data,
            extension,
        }
    }

    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.n_x + j
    }

    /// Extension-aware sample: zero outside the time range, zero or clamped
    /// outside the space range.
    pub fn at(&self, i: isize, j: isize) -> f64 {
        if i < 0 || i >= self.n_t as isize {
            return 0.0;
        }
        let j = if j < 0 || j >= self.n_x as isize {
            match self.extension {
                SpatialExtension::Zero => return 0.0,
                SpatialExtension::Constant => j.clamp(0, self.n_x as isize - 1),
            }
        } else {
            j
        };
        self.data[i as usize * self.n_x + j as usize]
    }
}

/// Which derivative of the mollified field a convolution computes. The
/// derivative always falls on the kernel, never on the data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Deriv {
    None,
    Space,
    Time,
}

/// Sampled kernel weights for a concrete `(kernel, eps, dt, dx)`.
#[derive(Debug, Clone)]
pub struct DiscreteKernel {
    /// Frame offsets, applied as `t - offset` (past offsets are positive for
    /// the causal kernel).
    pub t_off: Vec<isize>,
    pub x_off: Vec<isize>,
    /// Row-major `[t][x]` weights.
    pub w: Vec<f64>,
}

impl DiscreteKernel {
    /// Padding (frames before, frames after, cells) a window must keep from
    /// the data boundary for the convolution to see no extension values.
    pub fn padding(&self) -> (usize, usize, usize) {
        let t_before = self.t_off.iter().copied().max().unwrap_or(0).max(0) as usize;
        let t_after = (-self.t_off.iter().copied().min().unwrap_or(0)).max(0) as usize;
        let x_pad = self.x_off.iter().map(|b| b.abs()).max().unwrap_or(0) as usize;
        (t_before, t_after, x_pad)
    }
}

/// Samples and corrects the kernel weights.
pub fn discretize(
    kernel: &MollifierKernel,
    eps: f64,
    dt: f64,
    dx: f64,
    has_time: bool,
    deriv: Deriv,
) -> Result<DiscreteKernel> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            message: format!("must be positive, got {eps}"),
        });
    }
    let reach = kernel.support_radius * eps;
    if reach < dx {
        return Err(Error::UnderResolvedKernel { epsilon: eps, dx });
    }
    let bx = (reach / dx).floor() as isize;
    let x_off: Vec<isize> = (-bx..=bx).collect();
    let causal = matches!(kernel.profile, KernelProfile::OneSided { .. });
    let t_off: Vec<isize> = if kernel.time_axis && has_time {
        let bt = (reach / dt).floor() as isize;
        if causal {
            (0..=bt).collect()
        } else {
            (-bt..=bt).collect()
        }
    } else {
        vec![0]
    };

    // raw separable samples in kernel units
    let tv: Vec<f64> = t_off
        .iter()
        .map(|&a| {
            let s = a as f64 * dt / eps;
            if kernel.time_axis && has_time {
                kernel.time_profile(s)
            } else {
                1.0
            }
        })
        .collect();
    let dtv: Vec<f64> = t_off
        .iter()
        .map(|&a| kernel.dtime_profile(a as f64 * dt / eps))
        .collect();
    let xv: Vec<f64> = x_off
        .iter()
        .map(|&b| kernel.space_profile_r2((b as f64 * dx / eps).powi(2)))
        .collect();
    let dxv: Vec<f64> = x_off
        .iter()
        .map(|&b| kernel.dspace_profile_1d(b as f64 * dx / eps))
        .collect();

    let normalize = |v: &[f64]| -> Result<Vec<f64>> {
        let s = pairwise_sum(v);
        if s <= 0.0 {
            return Err(Error::UnderResolvedKernel { epsilon: eps, dx });
        }
        Ok(v.iter().map(|x| x / s).collect())
    };
    // Derivative samples get two corrections: zero sum (constants map to
    // exactly zero) and unit slope response (linear data maps to its slope).
    let correct_deriv = |v: &[f64], offsets: &[isize], h: f64| -> Result<Vec<f64>> {
        let n = v.len() as f64;
        let mean = pairwise_sum(v) / n;
        let centered: Vec<f64> = v.iter().map(|x| x - mean).collect();
        let response = -pairwise_sum(
            &centered
                .iter()
                .zip(offsets)
                .map(|(w, &o)| w * o as f64 * h)
                .collect::<Vec<_>>(),
        );
        if response.abs() < 1e-300 {
            return Err(Error::UnderResolvedKernel { epsilon: eps, dx });
        }
        Ok(centered.iter().map(|x| x / response).collect())
    };

    let (tw, xw) = match deriv {
        Deriv::None => (normalize(&tv)?, normalize(&xv)?),
        Deriv::Space => (normalize(&tv)?, correct_deriv(&dxv, &x_off, dx)?),
        Deriv::Time => {
            if !(kernel.time_axis && has_time) {
                return Err(Error::InvalidParameter {
                    name: "deriv",
                    message: "time derivative needs a space-time kernel on space-time data".into(),
                });
            }
            (correct_deriv(&dtv, &t_off, dt)?, normalize(&xv)?)
        }
    };

    let mut w = Vec::with_capacity(tw.len() * xw.len());
    for a in &tw {
        for b in &xw {
            w.push(a * b);
        }
    }
    Ok(DiscreteKernel { t_off, x_off, w })
}

/// Discrete convolution of a lattice with the scaled kernel. Output lives on
/// the same lattice; data are extended per the lattice metadata.
pub fn convolve(lat: &Lattice, kernel: &MollifierKernel, eps: f64, deriv: Deriv) -> Result<Lattice> {
    let dk = discretize(kernel, eps, lat.dt, lat.dx, lat.n_t > 1, deriv)?;
    let mut out = vec![0.0; lat.data.len()];
    out.par_chunks_mut(lat.n_x)
        .enumerate()
        .for_each(|(i, row)| {
            let i = i as isize;
            let mut terms = vec![0.0; dk.w.len()];
            for (j, slot) in row.iter_mut().enumerate() {
                let j = j as isize;
                let mut k = 0;
                for &a in &dk.t_off {
                    for &b in &dk.x_off {
                        terms[k] = dk.w[k] * lat.at(i - a, j - b);
                        k += 1;
                    }
                }
                *slot = pairwise_sum(&terms);
            }
        });
    Ok(Lattice {
        data: out,
        ..lat.clone()
    })
}

/// Mollifies density and momentum of a field with the scaled kernel,
/// returning a field on the same grid.
pub fn mollify_field(field: &FlowField, kernel: &MollifierKernel, eps: f64) -> Result<FlowField> {
    let rho = convolve(&field_lattice(field, &field.rho), kernel, eps, Deriv::None)?;
    let mom = convolve(&field_lattice(field, &field.mom), kernel, eps, Deriv::None)?;
    Ok(FlowField {
        grid: field.grid.clone(),
        rho: rho.data,
        mom: mom.data,
        role: field.role,
        extension: field.extension,
        exterior_velocity: field.exterior_velocity.clone(),
    })
}

/// Gradient of the mollified data, computed by differentiating the kernel.
pub fn gradient_mollified(lat: &Lattice, kernel: &MollifierKernel, eps: f64) -> Result<Lattice> {
    convolve(lat, kernel, eps, Deriv::Space)
}

pub fn field_lattice(field: &FlowField, data: &[f64]) -> Lattice {
    Lattice {
        n_t: field.grid.n_frames,
        n_x: field.grid.n_cells,
        dt: field.grid.dt(),
        dx: field.grid.dx(),
        data: data.to_vec(),
        extension: field.extension,
    }
}

/// Marks where the mollified density is positive inside `[t1, t2]`, the
/// window shrunk by the kernel's time reach so zero time-extension never
/// contaminates the mask.
pub fn vacuum_mask(
    field: &FlowField,
    kernel: &MollifierKernel,
    eps: f64,
    t1: f64,
    t2: f64,
) -> Result<VacuumNeighborhood> {
    let g = &field.grid;
    if !(t1 < t2) {
        return Err(Error::EmptyWindow { t1, t2 });
    }
    if t1 < g.t_start - 1e-12 || t2 > g.t_end + 1e-12 {
        return Err(Error::WindowOutOfRange {
            t1,
            t2,
            lo: g.t_start,
            hi: g.t_end,
        });
    }
    let rho_eps = convolve(&field_lattice(field, &field.rho), kernel, eps, Deriv::None)?;
    let dk = discretize(kernel, eps, g.dt(), g.dx(), true, Deriv::None)?;
    let (t_before, t_after, _) = dk.padding();
    let dt = g.dt();
    let lo_t = t1 + t_before as f64 * dt;
    let hi_t = t2 - t_after as f64 * dt;
    let first = ((lo_t - g.t_start) / dt - 1e-9).ceil().max(0.0) as usize;
    let last = (((hi_t - g.t_start) / dt + 1e-9).floor().max(0.0) as usize).min(g.n_frames - 1);
    if last < first {
        return Err(Error::EmptyWindow { t1: lo_t, t2: hi_t });
    }
    let mut mask = vec![false; field.rho.len()];
    for i in first..=last {
        for j in 0..g.n_cells {
            mask[i * g.n_cells + j] = rho_eps.data[i * g.n_cells + j] > 0.0;
        }
    }
    Ok(VacuumNeighborhood {
        epsilon: eps,
        grid: g.clone(),
        mask,
        frame_range: (first, last),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_field, Geometry, Grid};
    use crate::numerics::lq_norm;

    fn spatial(nx: usize, f: impl Fn(f64) -> f64, ext: SpatialExtension) -> Lattice {
        let dx = 1.0 / nx as f64;
        let data = (0..nx).map(|j| f((j as f64 + 0.5) * dx)).collect();
        Lattice::spatial(dx, data, ext)
    }

    #[test]
    fn kernels_are_normalized() {
        for k in [
            MollifierKernel::bump_space(),
            MollifierKernel::bump_space_time(),
            MollifierKernel::one_sided(2.0, 1).unwrap(),
            MollifierKernel::one_sided(2.0, 2).unwrap(),
            MollifierKernel::one_sided(1.2, 2).unwrap(),
        ] {
            assert!(
                (k.normalization - 1.0).abs() <= 1e-10,
                "{:?}: {}",
                k.profile,
                k.normalization
            );
        }
    }

    #[test]
    fn one_sided_kernel_needs_m_above_one() {
        assert!(MollifierKernel::one_sided(1.0, 1).is_err());
        assert!(MollifierKernel::one_sided(0.5, 2).is_err());
    }

    #[test]
    fn constant_field_is_preserved() {
        let lat = spatial(256, |_| 3.25, SpatialExtension::Constant);
        let k = MollifierKernel::bump_space();
        let out = convolve(&lat, &k, 0.05, Deriv::None).unwrap();
        for v in &out.data {
            assert!((v - 3.25).abs() < 1e-13);
        }
    }

    #[test]
    fn support_grows_by_at_most_l_eps() {
        let nx = 512;
        let lat = spatial(
            nx,
            |x| if (x - 0.5).abs() < 0.1 { 1.0 } else { 0.0 },
            SpatialExtension::Zero,
        );
        let k = MollifierKernel::bump_space();
        let eps = 0.04;
        let out = convolve(&lat, &k, eps, Deriv::None).unwrap();
        let dx = lat.dx;
        for (j, v) in out.data.iter().enumerate() {
            let x = (j as f64 + 0.5) * dx;
            if (x - 0.5).abs() > 0.1 + k.support_radius * eps + dx {
                assert_eq!(*v, 0.0, "leakage at x = {x}");
            }
        }
    }

    #[test]
    fn linear_field_fixed_by_symmetric_kernel() {
        let lat = spatial(512, |x| x, SpatialExtension::Constant);
        let k = MollifierKernel::bump_space();
        let out = convolve(&lat, &k, 0.03, Deriv::None).unwrap();
        let pad = (k.support_radius * 0.03 / lat.dx).ceil() as usize + 1;
        for j in pad..512 - pad {
            let x = (j as f64 + 0.5) * lat.dx;
            assert!((out.data[j] - x).abs() < 1e-8, "x = {x}: {}", out.data[j]);
        }
    }

    #[test]
    fn gradient_of_constant_vanishes() {
        let lat = spatial(256, |_| 7.0, SpatialExtension::Constant);
        let k = MollifierKernel::bump_space();
        let g = gradient_mollified(&lat, &k, 0.05).unwrap();
        for v in &g.data {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_of_linear_is_slope() {
        let lat = spatial(512, |x| 2.5 * x + 1.0, SpatialExtension::Constant);
        let k = MollifierKernel::bump_space();
        let g = gradient_mollified(&lat, &k, 0.04).unwrap();
        let pad = (k.support_radius * 0.04 / lat.dx).ceil() as usize + 1;
        for j in pad..512 - pad {
            assert!((g.data[j] - 2.5).abs() < 1e-6);
        }
    }

    #[test]
    fn bv_gradient_norm_stays_bounded() {
        // step data: the mollified gradient L1 norm approaches the jump size
        let nx = 2048;
        let lat = spatial(
            nx,
            |x| if x < 0.5 { 0.0 } else { 1.0 },
            SpatialExtension::Constant,
        );
        let k = MollifierKernel::bump_space();
        for kexp in 3..=7 {
            let eps = 2.0f64.powi(-kexp);
            let g = gradient_mollified(&lat, &k, eps).unwrap();
            let l1 = lq_norm(&g.data, 1.0, lat.dx);
            assert!(l1 < 1.1, "eps = {eps}: L1 gradient {l1}");
            assert!(l1 > 0.9, "eps = {eps}: L1 gradient {l1}");
        }
    }

    #[test]
    fn linearity_to_machine_precision() {
        let f = spatial(256, |x| (6.0 * x).sin(), SpatialExtension::Constant);
        let g = spatial(256, |x| x * x, SpatialExtension::Constant);
        let k = MollifierKernel::bump_space();
        let (a, b) = (2.0, -0.7);
        let combo = Lattice::spatial(
            f.dx,
            f.data
                .iter()
                .zip(&g.data)
                .map(|(u, v)| a * u + b * v)
                .collect(),
            SpatialExtension::Constant,
        );
        let m_combo = convolve(&combo, &k, 0.05, Deriv::None).unwrap();
        let mf = convolve(&f, &k, 0.05, Deriv::None).unwrap();
        let mg = convolve(&g, &k, 0.05, Deriv::None).unwrap();
        for j in 0..256 {
            let lin = a * mf.data[j] + b * mg.data[j];
            assert!((m_combo.data[j] - lin).abs() < 1e-12);
        }
    }

    #[test]
    fn commutes_with_translation_on_interior() {
        let nx = 512;
        let f = |x: f64| (5.0 * x).sin() + x;
        let lat = spatial(nx, f, SpatialExtension::Constant);
        let shift = 8usize;
        let shifted = Lattice::spatial(
            lat.dx,
            (0..nx)
                .map(|j| f(((j + shift) as f64 + 0.5) * lat.dx))
                .collect(),
            SpatialExtension::Constant,
        );
        let k = MollifierKernel::bump_space();
        let a = convolve(&lat, &k, 0.03, Deriv::None).unwrap();
        let b = convolve(&shifted, &k, 0.03, Deriv::None).unwrap();
        let pad = (0.03 / lat.dx).ceil() as usize + shift + 1;
        for j in pad..nx - pad {
            assert!((b.data[j] - a.data[j + shift]).abs() < 1e-12);
        }
    }

    #[test]
    fn youngs_inequality_discrete() {
        let nx = 1024;
        let lat = spatial(nx, |x| (9.0 * x).sin().max(0.0) * x, SpatialExtension::Zero);
        let k = MollifierKernel::bump_space();
        let out = convolve(&lat, &k, 0.02, Deriv::None).unwrap();
        for q in [1.0, 2.0, 4.0] {
            let pad = (0.02 / lat.dx).ceil() as usize + 1;
            let interior = &out.data[pad..nx - pad];
            assert!(lq_norm(interior, q, lat.dx) <= lq_norm(&lat.data, q, lat.dx) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn under_resolved_kernel_rejected() {
        let lat = spatial(64, |x| x, SpatialExtension::Zero);
        let k = MollifierKernel::bump_space();
        let err = convolve(&lat, &k, 1e-4, Deriv::None).unwrap_err();
        assert!(matches!(err, Error::UnderResolvedKernel { .. }));
    }

    #[test]
    fn mask_everything_for_positive_density() {
        let grid = Grid::new(Geometry::Planar1d, 0.0, 1.0, 64, 0.0, 1.0, 17).unwrap();
        let mut f = build_field(grid, |_, _| 1.0, |_, _| 0.0).unwrap();
        f.extension = SpatialExtension::Constant;
        let k = MollifierKernel::bump_space_time();
        let mask = vacuum_mask(&f, &k, 0.1, 0.0, 1.0).unwrap();
        let (lo, hi) = mask.frame_range;
        for i in lo..=hi {
            for j in 0..64 {
                assert!(mask.mask[i * 64 + j]);
            }
        }
        assert!(mask.covered_cells() > 0);
    }

    #[test]
    fn mask_empty_for_vacuum() {
        let grid = Grid::new(Geometry::Planar1d, 0.0, 1.0, 64, 0.0, 1.0, 17).unwrap();
        let f = build_field(grid, |_, _| 0.0, |_, _| 0.0).unwrap();
        let k = MollifierKernel::bump_space_time();
        let mask = vacuum_mask(&f, &k, 0.1, 0.0, 1.0).unwrap();
        assert_eq!(mask.covered_cells(), 0);
    }

    #[test]
    fn mask_tracks_expanding_support() {
        // profile family with the expanding-ball support law: at frame time t
        // the support is |x| <= (1+t)R, so the mask edge sits within one cell
        // plus the kernel reach of it
        let r0 = 0.4;
        let grid = Grid::new(Geometry::Planar1d, -2.0, 2.0, 256, 0.0, 1.0, 33).unwrap();
        let f = build_field(
            grid,
            |t, x| {
                let edge = (1.0 + t) * r0;
                ((edge - x.abs()).max(0.0) / edge).powi(2)
            },
            |_, _| 0.0,
        )
        .unwrap();
        let k = MollifierKernel::bump_space_time();
        let eps = 0.05;
        let mask = vacuum_mask(&f, &k, eps, 0.0, 1.0).unwrap();
        let g = &f.grid;
        let (lo, hi) = mask.frame_range;
        for i in lo..=hi {
            let t = g.frame_time(i);
            let expect = (1.0 + t) * r0 + k.support_radius * eps;
            let mut edge: f64 = 0.0;
            for j in 0..g.n_cells {
                if mask.mask[i * g.n_cells + j] {
                    edge = edge.max(g.cell_center(j).abs());
                }
            }
            assert!(
                (edge - expect).abs() <= 1.5 * g.dx(),
                "frame {i}: edge {edge} vs {expect}"
            );
        }
    }

    #[test]
    fn mask_monotone_in_eps() {
        let grid = Grid::new(Geometry::Planar1d, -2.0, 2.0, 128, 0.0, 1.0, 17).unwrap();
        let f = build_field(
            grid,
            |_, x| (0.5 - x.abs()).max(0.0),
            |_, _| 0.0,
        )
        .unwrap();
        let k = MollifierKernel::bump_space_time();
        let small = vacuum_mask(&f, &k, 0.05, 0.2, 0.8).unwrap();
        let large = vacuum_mask(&f, &k, 0.1, 0.2, 0.8).unwrap();
        let (lo, hi) = (
            small.frame_range.0.max(large.frame_range.0),
            small.frame_range.1.min(large.frame_range.1),
        );
        for i in lo..=hi {
            for j in 0..128 {
                if small.mask[i * 128 + j] {
                    assert!(large.mask[i * 128 + j], "frame {i} cell {j}");
                }
            }
        }
    }

    #[test]
    fn inv_theta_integrability_flags() {
        let k2 = MollifierKernel::one_sided(2.0, 2).unwrap();
        assert!(k2.inv_theta_integrable(0.25));
        assert!(!k2.inv_theta_integrable(0.75));
        let k12 = MollifierKernel::one_sided(1.2, 2).unwrap();
        assert!(k12.inv_theta_integrable(0.75));
        let finite = k2.inv_theta_integral(0.25, 0.0);
        assert!(finite.is_finite() && finite > 0.0);
    }
}
