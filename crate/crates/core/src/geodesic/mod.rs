//! Geodesics of a conformal metric: shooting, distances, normal polar coordinates,
//! and the comparison inequalities that follow from |K| ≤ κ.

mod distance;
mod integrator;
mod polar;
mod triangle;

pub use distance::{distance, heading_gap, DistanceSolver, GeodesicSolution, DEFAULT_STEPS_PER_DELTA};
pub use integrator::{rk4_step, shoot_geodesic, GeodesicPath, GeodesicState};
pub use polar::{build_polar_grid, check_comparisons, PolarGrid};
pub use triangle::{model_hinge_side, triangle_comparison, TriangleComparison};
