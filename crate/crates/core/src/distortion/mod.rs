//! Measurements on an assembled chart and the reports that certify the bounds.
//!
//! Every check produces a [`VerificationRecord`](crate::report::VerificationRecord)
//! whose tolerance is `1e-9 + TOLERANCE_SLOPE · h`, so a failure can only be blamed
//! on discretization once it exceeds that allowance.

mod barriers;
mod pairs;
mod sweep;
mod theorem;

use crate::bounds::CurvatureBudget;
use crate::error::Result;
use crate::metric::{ConformalMetric, Point};
use crate::report::{resolution_tolerance, ReportMeta};
use crate::uniformize::IsothermalChart;

pub use barriers::{verify_barriers, BarrierGaps, BarrierOutcome};
pub use pairs::{
    bilipschitz_ratio, milnor_distortion, pair_ratios, sample_interior_pairs, verify_pairs, PairRatios,
    LOCAL_PAIR_RANGE, MIN_PAIR_SEPARATION,
};
pub use sweep::{extrapolate_to_zero, log_factor_series, sharpness_sweep, SweepRow, SweepTable, DISTORTION_FLOOR_SLACK};
pub use theorem::{verify_chart, verify_theorem, verify_theorem_on_chart, VerifyOptions};

/// Discretization slope c in the tolerance 1e-9 + c·h, calibrated on the model metrics.
pub const TOLERANCE_SLOPE: f64 = 0.01;

/// Curvature bound used for the flat metric, whose bounds degenerate at κ = 0.
pub const FLAT_KAPPA: f64 = 1e-6;

/// Budget (δ, κ) for a metric from its declared curvature bound, with κ floored at
/// [`FLAT_KAPPA`].
pub fn budget_for(metric: &dyn ConformalMetric) -> Result<CurvatureBudget> {
    CurvatureBudget::new(metric.delta(), metric.declared_kappa().max(FLAT_KAPPA))
}

pub fn tolerance(h: f64) -> f64 {
    resolution_tolerance(TOLERANCE_SLOPE, h)
}

pub fn report_meta(metric: &dyn ConformalMetric, budget: &CurvatureBudget, h: f64, seed: u64) -> ReportMeta {
    ReportMeta {
        budget: *budget,
        h,
        seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        tolerance_slope: TOLERANCE_SLOPE,
        metric: metric.kind().to_string(),
        near_degenerate: budget.near_degenerate(),
        timestamp: None,
    }
}

/// Largest |log φ| over the chart nodes, with where it occurs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogFactorExtreme {
    pub value: f64,
    pub node: usize,
    pub position: Point,
}

pub fn sup_log_factor(chart: &IsothermalChart) -> LogFactorExtreme {
    let (node, value) = chart
        .factor_phi
        .iter()
        .map(|p| p.ln().abs())
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (k, v)| if v > best.1 { (k, v) } else { best });
    LogFactorExtreme { value, node, position: chart.mesh.positions[node] }
}

/// Largest |log φ| over the boundary loop.
pub fn boundary_sup_log_factor(chart: &IsothermalChart) -> f64 {
    chart.boundary_factors().map(|p| p.ln().abs()).fold(0.0, f64::max)
}
