//! Isothermal charts of a geodesic disc from its Green's function.
//!
//! The disc B = {d(p₀, ·) < δ} is meshed on the background grid, the Green's function
//! G with pole p₀ is solved with the logarithm subtracted, H is its harmonic conjugate,
//! and z = δ·exp(−G + iH) maps B onto the flat disc of radius δ.

mod chart;
mod conjugate;
mod export;
mod green;
mod linear;
mod mesh;

pub use chart::{assemble_chart, uniformize, IsothermalChart};
pub use conjugate::{harmonic_conjugate, ConjugateDiagnostics, ConjugateField, MIN_EXACTNESS_LOOPS};
pub use export::{read_binary, ChartExport, BINARY_FIELDS, BINARY_MAGIC, CHART_FORMAT_VERSION};
pub use green::{
    regular_gradient, solve_green, solve_green_with_pole, three_point_derivative, GreenField,
    SOLVER_MAX_ITERATIONS, SOLVER_TOLERANCE,
};
pub use linear::{bicgstab, SolveStats, StencilMatrix};
pub use mesh::{build_disc_mesh, Arm, DiscMesh, NodeKind, DIRECTIONS, MIN_BOUNDARY_NODES, NEAR_BOUNDARY_FRACTION};
