use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{boundary_sup_log_factor, report_meta, sup_log_factor, tolerance, verify_barriers, verify_pairs};
use crate::bounds::{
    boundary_factor_bounds, bracket_term, center_factor_bounds, corollary_bound, max_principle_estimate,
    theorem_bound, CurvatureBudget,
};
use crate::error::{Error, Result};
use crate::geodesic::build_polar_grid;
use crate::metric::{ConformalMetric, MetricKind, Point};
use crate::report::{VerificationRecord, VerificationReport};
use crate::uniformize::{uniformize, IsothermalChart};

/// Sample sizes and resolution for a full verification run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub h: f64,
    pub seed: u64,
    /// Interior pairs for the distance-ratio checks.
    pub pairs: usize,
    /// Boundary pairs for the barrier checks.
    pub boundary_pairs: usize,
    /// Interior points for the Green's function sandwich.
    pub interior_samples: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { h: 0.01, seed: 0, pairs: 1000, boundary_pairs: 1000, interior_samples: 400 }
    }
}

fn check_hypotheses(metric: &dyn ConformalMetric, budget: &CurvatureBudget) -> Result<()> {
    let delta = metric.delta();
    if (budget.delta() - delta).abs() > 1e-12 * delta {
        return Err(Error::Hypothesis(format!(
            "budget delta {} differs from the metric's disc radius {delta}",
            budget.delta()
        )));
    }
    if metric.declared_kappa() > budget.kappa() * (1.0 + 1e-12) {
        return Err(Error::Hypothesis(format!(
            "the metric's curvature bound {} exceeds the budget kappa {}",
            metric.declared_kappa(),
            budget.kappa()
        )));
    }
    if metric.kind() == MetricKind::Custom {
        injectivity_proxy(metric)?;
    }
    Ok(())
}

/// Geodesics of length 2δ from the centre must stay in the background domain with a
/// positive polar Jacobian; this rules out conjugate points before the disc is charted.
fn injectivity_proxy(metric: &dyn ConformalMetric) -> Result<()> {
    let radius = 2.0 * metric.delta();
    match build_polar_grid(metric, Point::new(0.0, 0.0), radius, 16, 64) {
        Ok(_) => Ok(()),
        Err(Error::PathExitsDomain { arc_length }) => Err(Error::Hypothesis(format!(
            "a geodesic from the centre leaves the background domain after length {arc_length:.4} < 2 delta"
        ))),
        Err(Error::FocalPoint { rho, theta }) => Err(Error::Hypothesis(format!(
            "polar Jacobian from the centre vanishes at rho = {rho:.4}, theta = {theta:.4}"
        ))),
        Err(e) => Err(e),
    }
}

/// Checks on the conformal factor of an assembled chart: the main bound, the boundary
/// bound, the maximum-principle step with sup|Kφ| measured from the fields, the
/// factor bounds at the centre and on the boundary, and the linear-regime bound.
pub fn verify_theorem_on_chart(
    chart: &IsothermalChart,
    metric: &dyn ConformalMetric,
    budget: &CurvatureBudget,
) -> Result<Vec<VerificationRecord>> {
    check_hypotheses(metric, budget)?;
    let tol = tolerance(chart.h());
    let t = budget.product();
    let delta = chart.delta;
    let sup = sup_log_factor(chart).value;
    let sup_boundary = boundary_sup_log_factor(chart);
    let sup_k_phi = (0..chart.len())
        .into_par_iter()
        .map(|k| (metric.curvature(chart.mesh.positions[k]) * chart.factor_phi[k]).abs())
        .reduce(|| 0.0, f64::max);
    // Δ log φ = −2Kφ in the z chart.
    let interior_estimate = max_principle_estimate(sup_boundary, 2.0 * sup_k_phi, delta);
    // Cap on φ from the interior distance-ratio bounds.
    let phi_cap = bracket_term(t);
    let lambda_center = delta * delta * chart.center_factor();
    let (lam_lo, lam_hi) = chart
        .boundary_factors()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p), hi.max(p)));
    let center = center_factor_bounds(budget);
    let edge = boundary_factor_bounds(budget);
    let d2 = delta * delta;

    let mut out = vec![
        VerificationRecord::upper("sup_log_factor", sup, theorem_bound(budget), tol, "sup|log phi| <= (t/2)[1 + (pi^2/4)(sinh(x) tan(x)/t)^2]"),
        VerificationRecord::upper("boundary_log_factor", sup_boundary, 0.5 * t, tol, "sup over the boundary of |log phi| <= t/2"),
        VerificationRecord::upper("interior_max_principle", sup, interior_estimate, tol, "sup|log phi| <= sup_boundary|log phi| + (delta^2/2) sup|K phi|"),
        VerificationRecord::upper("curvature_factor_product", sup_k_phi, budget.kappa() * phi_cap, tol, "sup|K phi| <= kappa (pi^2/4)(sinh(x) tan(x)/t)^2"),
        VerificationRecord::lower("center_factor_lower", lambda_center, center.lower, tol, "lambda(p0) >= (4/k) tanh^2(x/2)"),
        VerificationRecord::upper("center_factor_upper", lambda_center, center.upper, tol, "lambda(p0) <= (4/k) tan^2(x/2)"),
        VerificationRecord::lower("boundary_factor_lower", d2 * lam_lo, edge.lower, tol, "lambda on the boundary >= sin^2(x)/k"),
        VerificationRecord::upper("boundary_factor_upper", d2 * lam_hi, edge.upper, tol, "lambda on the boundary <= sinh^2(x)/k"),
    ];
    if let Ok((linear, _)) = corollary_bound(budget) {
        out.push(VerificationRecord::upper("sup_log_factor_linear", sup, linear, tol, "sup|log phi| <= 8t when t < pi^2/8"));
    }
    Ok(out)
}

/// Meshes the disc, assembles the chart and checks the conformal-factor bounds.
pub fn verify_theorem(
    metric: Arc<dyn ConformalMetric>,
    budget: &CurvatureBudget,
    h: f64,
    seed: u64,
) -> Result<VerificationReport> {
    check_hypotheses(metric.as_ref(), budget)?;
    let chart = uniformize(metric.clone(), h, seed)?;
    let mut report = VerificationReport::new(report_meta(metric.as_ref(), budget, h, seed));
    report.extend(verify_theorem_on_chart(&chart, metric.as_ref(), budget)?);
    Ok(report)
}

/// The full suite on one chart: factor bounds, barrier checks and pairwise ratios.
pub fn verify_chart(
    metric: Arc<dyn ConformalMetric>,
    budget: &CurvatureBudget,
    options: &VerifyOptions,
) -> Result<(VerificationReport, IsothermalChart)> {
    check_hypotheses(metric.as_ref(), budget)?;
    let chart = uniformize(metric.clone(), options.h, options.seed)?;
    let mut report = VerificationReport::new(report_meta(metric.as_ref(), budget, options.h, options.seed));
    report.extend(verify_theorem_on_chart(&chart, metric.as_ref(), budget)?);
    let barriers = verify_barriers(
        &chart,
        metric.clone(),
        budget,
        options.boundary_pairs,
        options.interior_samples,
        options.seed,
    )?;
    report.extend(barriers.records);
    let ratios = super::pair_ratios(&chart, metric, options.pairs, options.seed)?;
    report.extend(verify_pairs(&chart, &ratios, budget)?);
    Ok((report, chart))
}
