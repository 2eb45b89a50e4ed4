//! Desk-scale verification toolkit for isentropic compressible Euler flows
//! with vacuum regions.
//!
//! The crate provides the computable side of a weak-strong stability analysis:
//! discrete flow fields and their admissibility certificates, the pressure
//! potential and its smoothed variants, space-time mollification, empirical
//! Besov seminorms and mollification-rate measurement, commutator decay
//! harnesses, the relative-energy functional and its residual bookkeeping,
//! exponent-window feasibility, a positivity-preserving finite-volume solver
//! (planar and radially symmetric), and an end-to-end expanding-vacuum
//! example with boundary tracking and uniform-integrability monitors.
//!
//! Everything is deterministic: convolutions and norms use fixed-order
//! pairwise summation, so results are independent of thread count.

pub mod admissibility;
pub mod besov;
pub mod commutator;
pub mod config;
pub mod eos;
pub mod error;
pub mod exponents;
pub mod grid;
pub mod mollify;
pub mod numerics;
pub mod relative_energy;
pub mod report;
pub mod solver;
pub mod testfields;
pub mod vacuum_example;

pub use error::{Error, Result};
pub use grid::{build_field, restrict_window, FieldRole, FlowField, Geometry, Grid};
