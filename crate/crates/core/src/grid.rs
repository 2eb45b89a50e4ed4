//! Grids, discrete flow fields, and the certificates shared by every other
//! module.
//!
//! A [`FlowField`] stores density and momentum on a uniform space-time grid;
//! velocity is never divided out here, so vacuum cells (exact zeros) stay
//! well-defined. 2D enters only through the radially symmetric reduction,
//! where the cell measure carries the `2*pi*r` factor.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents;
use crate::numerics::{pairwise_sum_by, trapezoid};

/// Spatial geometry of a grid. Radial grids represent 2D radially symmetric
/// flow as 1D in `r` with the geometric measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Geometry {
    Planar1d,
    Radial2d,
}

/// Uniform space-time grid: `n_cells` cells on `[x_min, x_max]` and
/// `n_frames` output frames on `[t_start, t_end]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub geometry: Geometry,
    pub x_min: f64,
    pub x_max: f64,
    pub n_cells: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub n_frames: usize,
}

impl Grid {
    pub fn new(
        geometry: Geometry,
        x_min: f64,
        x_max: f64,
        n_cells: usize,
        t_start: f64,
        t_end: f64,
        n_frames: usize,
    ) -> Result<Self> {
        if !(x_min < x_max) {
            return Err(Error::InvalidGrid(format!(
                "x_min = {x_min} must be below x_max = {x_max}"
            )));
        }
        if !(t_start < t_end) {
            return Err(Error::InvalidGrid(format!(
                "t_start = {t_start} must be below t_end = {t_end}"
            )));
        }
        if n_cells < 8 {
            return Err(Error::InvalidGrid(format!("n_cells = {n_cells} < 8")));
        }
        if n_frames < 2 {
            return Err(Error::InvalidGrid(format!("n_frames = {n_frames} < 2")));
        }
        if geometry == Geometry::Radial2d && x_min < 0.0 {
            return Err(Error::InvalidGrid("radial grid needs x_min >= 0".into()));
        }
        Ok(Grid {
            geometry,
            x_min,
            x_max,
            n_cells,
            t_start,
            t_end,
            n_frames,
        })
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n_cells as f64
    }

    /// Spacing between stored frames.
    pub fn dt(&self) -> f64 {
        (self.t_end - self.t_start) / (self.n_frames - 1) as f64
    }

    pub fn cell_center(&self, j: usize) -> f64 {
        self.x_min + (j as f64 + 0.5) * self.dx()
    }

    pub fn frame_time(&self, i: usize) -> f64 {
        self.t_start + i as f64 * self.dt()
    }

    /// Frame index whose time matches `t` (within half a frame spacing).
    pub fn frame_at(&self, t: f64) -> Result<usize> {
        let pos = (t - self.t_start) / self.dt();
        let i = pos.round();
        if i < 0.0 || i as usize >= self.n_frames || (pos - i).abs() > 1e-8 {
            return Err(Error::InvalidParameter {
                name: "t",
                message: format!("time {t} is not on a stored frame"),
            });
        }
        Ok(i as usize)
    }

    /// Cell measure: `dx` planar, `2*pi*r*dr` radial.
    pub fn cell_measure(&self, j: usize) -> f64 {
        match self.geometry {
            Geometry::Planar1d => self.dx(),
            Geometry::Radial2d => 2.0 * std::f64::consts::PI * self.cell_center(j) * self.dx(),
        }
    }
}

/// Whether a field plays the weak or the strong role in a comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldRole {
    Weak,
    Strong,
}

/// How a field continues past the spatial domain boundary when mollified.
/// Compactly supported data uses `Zero`; Riemann far fields use `Constant`
/// (each edge continues at its boundary cell value). Time extension is
/// always by zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpatialExtension {
    Zero,
    Constant,
}

/// Optional analytic velocity closure `(t, x) -> u` used on vacuum cells,
/// where momentum carries no information.
pub type VelocityClosure = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Discrete space-time density/momentum field on a [`Grid`]. Stored
/// frame-major: index `frame * n_cells + cell`.
#[derive(Clone)]
pub struct FlowField {
    pub grid: Grid,
    pub rho: Vec<f64>,
    pub mom: Vec<f64>,
    pub role: FieldRole,
    pub extension: SpatialExtension,
    pub exterior_velocity: Option<VelocityClosure>,
}

impl std::fmt::Debug for FlowField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FlowField")
            .field("grid", &self.grid)
            .field("role", &self.role)
            .field("extension", &self.extension)
            .field("has_exterior_velocity", &self.exterior_velocity.is_some())
            .finish()
    }
}

impl FlowField {
    pub fn idx(&self, frame: usize, cell: usize) -> usize {
        frame * self.grid.n_cells + cell
    }

    pub fn rho_at(&self, frame: usize, cell: usize) -> f64 {
        self.rho[self.idx(frame, cell)]
    }

    pub fn mom_at(&self, frame: usize, cell: usize) -> f64 {
        self.mom[self.idx(frame, cell)]
    }

    /// Velocity at a cell: `mom/rho` on positive density, the exterior
    /// closure on vacuum when present, zero otherwise.
    pub fn velocity_at(&self, frame: usize, cell: usize) -> f64 {
        let r = self.rho_at(frame, cell);
        if r > 0.0 {
            self.mom_at(frame, cell) / r
        } else if let Some(v) = &self.exterior_velocity {
            v(self.grid.frame_time(frame), self.grid.cell_center(cell))
        } else {
            0.0
        }
    }

    /// Total mass of one frame (radial measure included).
    pub fn frame_mass(&self, frame: usize) -> f64 {
        let g = &self.grid;
        pairwise_sum_by(g.n_cells, |j| self.rho_at(frame, j) * g.cell_measure(j))
    }

    /// Checks the structural invariants: nonnegative density, zero momentum
    /// on vacuum, all entries finite.
    pub fn validate(&self) -> Result<()> {
        let n = self.grid.n_cells * self.grid.n_frames;
        if self.rho.len() != n || self.mom.len() != n {
            return Err(Error::GridMismatch(format!(
                "field storage {} does not match grid ({} frames x {} cells)",
                self.rho.len(),
                self.grid.n_frames,
                self.grid.n_cells
            )));
        }
        for (k, (&r, &m)) in self.rho.iter().zip(&self.mom).enumerate() {
            if !r.is_finite() || !m.is_finite() {
                return Err(Error::NonFinite { cell: k });
            }
            if r < 0.0 {
                return Err(Error::NegativeDensity { cell: k, value: r });
            }
            if r == 0.0 && m != 0.0 {
                return Err(Error::Other(format!(
                    "momentum {m} on vacuum cell {k} (must vanish)"
                )));
            }
        }
        Ok(())
    }
}

/// Samples initial data at cell centers into a single-frame-per-time field.
/// `rho_init` and `u_init` are evaluated at `(t, x)` for every stored frame,
/// so time-constant initializers simply ignore `t`. Vacuum cells get zero
/// momentum; a negative density sample is rejected with its cell index.
pub fn build_field(
    grid: Grid,
    rho_init: impl Fn(f64, f64) -> f64,
    u_init: impl Fn(f64, f64) -> f64,
) -> Result<FlowField> {
    let n = grid.n_cells * grid.n_frames;
    let mut rho = vec![0.0; n];
    let mut mom = vec![0.0; n];
    for i in 0..grid.n_frames {
        let t = grid.frame_time(i);
        for j in 0..grid.n_cells {
            let x = grid.cell_center(j);
            let r = rho_init(t, x);
            if r < 0.0 {
                return Err(Error::NegativeDensity { cell: j, value: r });
            }
            if !r.is_finite() {
                return Err(Error::NonFinite { cell: j });
            }
            let k = i * grid.n_cells + j;
            rho[k] = r;
            mom[k] = if r > 0.0 { r * u_init(t, x) } else { 0.0 };
            if !mom[k].is_finite() {
                return Err(Error::NonFinite { cell: j });
            }
        }
    }
    Ok(FlowField {
        grid,
        rho,
        mom,
        role: FieldRole::Weak,
        extension: SpatialExtension::Zero,
        exterior_velocity: None,
    })
}

/// Restricts a field to the frames inside `[t1, t2]` (grid metadata updated).
pub fn restrict_window(field: &FlowField, t1: f64, t2: f64) -> Result<FlowField> {
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
    let dt = g.dt();
    let first = ((t1 - g.t_start) / dt - 1e-9).ceil().max(0.0) as usize;
    let last = (((t2 - g.t_start) / dt + 1e-9).floor() as usize).min(g.n_frames - 1);
    if last < first + 1 {
        return Err(Error::EmptyWindow { t1, t2 });
    }
    let n_frames = last - first + 1;
    let grid = Grid {
        t_start: g.frame_time(first),
        t_end: g.frame_time(last),
        n_frames,
        ..g.clone()
    };
    let lo = first * g.n_cells;
    let hi = (last + 1) * g.n_cells;
    Ok(FlowField {
        grid,
        rho: field.rho[lo..hi].to_vec(),
        mom: field.mom[lo..hi].to_vec(),
        role: field.role,
        extension: field.extension,
        exterior_velocity: field.exterior_velocity.clone(),
    })
}

/// Everything the strong-solution definition demands of a field: Besov
/// exponents, vacuum integrability exponent with its uniform constant, and
/// the sampled one-sided Lipschitz modulus.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegularityCertificate {
    pub alpha: f64,
    pub beta: f64,
    pub q: f64,
    pub theta: f64,
    pub c1: f64,
    /// Samples of `t -> Lambda(t)` at uniform spacing over `[0, T]`.
    pub lambda: Vec<f64>,
    pub t_end: f64,
}

impl RegularityCertificate {
    /// Validates the exponent constraints against the adiabatic exponent.
    pub fn validate(&self, gamma: f64) -> Result<()> {
        let floor = 1.0 / gamma.min(2.0);
        if !(self.alpha >= self.beta && self.beta > floor) {
            return Err(Error::InvalidParameter {
                name: "beta",
                message: format!(
                    "need alpha >= beta > 1/min(2,gamma) = {floor}, got alpha = {}, beta = {}",
                    self.alpha, self.beta
                ),
            });
        }
        let q_floor = 2.0 * gamma / (gamma - 1.0);
        if self.q < q_floor {
            return Err(Error::InvalidParameter {
                name: "q",
                message: format!("need q >= 2*gamma/(gamma-1) = {q_floor}, got {}", self.q),
            });
        }
        let threshold = exponents::theta_threshold(gamma, self.beta)?;
        if self.theta <= threshold {
            return Err(Error::InvalidParameter {
                name: "theta",
                message: format!(
                    "theta = {} must exceed threshold {threshold}",
                    self.theta
                ),
            });
        }
        if self.lambda.iter().any(|l| *l < 0.0 || !l.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "lambda",
                message: "Lambda samples must be finite and nonnegative".into(),
            });
        }
        if self.lambda.len() < 2 {
            return Err(Error::InvalidParameter {
                name: "lambda",
                message: "need at least two Lambda samples".into(),
            });
        }
        Ok(())
    }

    /// Trapezoid value of `int_0^T Lambda`.
    pub fn lambda_integral(&self) -> f64 {
        let h = self.t_end / (self.lambda.len() - 1) as f64;
        trapezoid(&self.lambda, h)
    }
}

/// Boolean space-time mask marking where a mollified density is positive.
#[derive(Debug, Clone)]
pub struct VacuumNeighborhood {
    pub epsilon: f64,
    pub grid: Grid,
    /// Frame-major mask, aligned with the field the mask was built from.
    pub mask: Vec<bool>,
    /// Frames actually covered by the window (inclusive range).
    pub frame_range: (usize, usize),
}

impl VacuumNeighborhood {
    pub fn covered_cells(&self) -> usize {
        self.mask.iter().filter(|m| **m).count()
    }
}

// ---------------------------------------------------------------------------
// Serialization: CSV rows (t, x, rho, mom) plus a JSON grid sidecar.
// 17 significant digits round-trip f64 exactly.

fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes the field as CSV: one row per cell per frame.
pub fn field_to_csv(field: &FlowField) -> String {
    let g = &field.grid;
    let mut out = String::with_capacity(g.n_cells * g.n_frames * 64);
    out.push_str("t,x,rho,mom\n");
    for i in 0..g.n_frames {
        let t = g.frame_time(i);
        for j in 0..g.n_cells {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                fmt17(t),
                fmt17(g.cell_center(j)),
                fmt17(field.rho_at(i, j)),
                fmt17(field.mom_at(i, j)),
            );
        }
    }
    out
}

/// Grid metadata sidecar, JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldSidecar {
    pub grid: Grid,
    pub role: FieldRole,
    pub extension: SpatialExtension,
}

pub fn field_sidecar(field: &FlowField) -> FieldSidecar {
    FieldSidecar {
        grid: field.grid.clone(),
        role: field.role,
        extension: field.extension,
    }
}

/// Reads a field back from its CSV body and sidecar. Inverse of
/// [`field_to_csv`] bit-for-bit.
pub fn field_from_csv(csv: &str, sidecar: &FieldSidecar) -> Result<FlowField> {
    let g = sidecar.grid.clone();
    let n = g.n_cells * g.n_frames;
    let mut rho = Vec::with_capacity(n);
    let mut mom = Vec::with_capacity(n);
    for (lineno, line) in csv.lines().enumerate() {
        if lineno == 0 {
            if line.trim() != "t,x,rho,mom" {
                return Err(Error::Other(format!("bad CSV header: {line}")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 4 {
            return Err(Error::Other(format!("bad CSV row {lineno}: {line}")));
        }
        let parse = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Other(format!("row {lineno}: {e}")))
        };
        rho.push(parse(cols[2])?);
        mom.push(parse(cols[3])?);
    }
    if rho.len() != n {
        return Err(Error::Other(format!(
            "CSV carries {} rows, grid expects {n}",
            rho.len()
        )));
    }
    let field = FlowField {
        grid: g,
        rho,
        mom,
        role: sidecar.role,
        extension: sidecar.extension,
        exterior_velocity: None,
    };
    field.validate()?;
    Ok(field)
}
