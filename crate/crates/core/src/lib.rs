//! Numerical laboratory for the normalized Ricci flow on rotationally
//! symmetric Kähler metrics on the 2-sphere.
//!
//! The crate provides the discrete geometry (curvature, Laplacians, Poisson
//! solves, covariant-derivative stacks), an explicit RK4 flow engine with
//! per-step diagnostics, the scalar observables driving the convergence
//! analysis (gradient energy Y, Mabuchi energy, Futaki pairing), the
//! del-bar operator on vector fields with its sector-by-sector spectrum, a
//! pointwise curvature-operator algebra in complex dimension 2, and
//! metric/complex-structure compatibility validators.

pub mod compat;
pub mod curvop2;
pub mod error;
pub mod field;
pub mod flow;
pub mod functionals;
pub mod geometry;
pub mod grid;
pub mod metric;
pub mod spectral;
pub mod transforms;

pub use error::{CoreError, Result};
pub use field::ScalarField;
pub use grid::LatitudeGrid;
pub use metric::ConformalMetric;
