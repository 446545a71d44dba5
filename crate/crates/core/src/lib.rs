//! Numerical toolkit for isothermal charts of small geodesic discs.
//!
//! Given a conformal metric `λ₀|dζ|²` with |K| ≤ κ on a geodesic disc of radius δ,
//! the crate builds a conformal map of the disc onto the flat disc of radius δ
//! from the Dirichlet Green's function, measures the resulting conformal factor φ,
//! and checks it against closed-form bounds that depend only on δ²κ.
//!
//! * [`bounds`]: closed-form bound functions of (δ, κ).
//! * [`metric`]: metrics behind the [`metric::ConformalMetric`] trait and a name registry.
//! * [`geodesic`]: geodesic shooting, Jacobi fields, and a point-to-point distance solver.
//! * [`uniformize`]: Green's function, harmonic conjugate, and the assembled chart.
//! * [`distortion`]: measurements on a chart and verification reports.

pub mod bounds;
pub mod distortion;
pub mod error;
pub mod geodesic;
pub mod metric;
pub mod report;
pub mod uniformize;

pub use error::{Error, Result};
