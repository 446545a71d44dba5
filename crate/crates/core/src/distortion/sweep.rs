use serde::{Deserialize, Serialize};

use super::{milnor_distortion, sup_log_factor, verify_theorem_on_chart};
use crate::bounds::{theorem_bound, CurvatureBudget, LINEAR_REGIME_PRODUCT};
use crate::error::{Error, Result};
use crate::metric::{model_metric, ModelKind};
use crate::uniformize::uniformize;

/// Slack below 1/6 allowed for distortion/t.
pub const DISTORTION_FLOOR_SLACK: f64 = 0.02;
const DISTORTION_CEILING: f64 = 8.0;

/// One curvature level of the sweep; the model has δ = 1 and κ = t.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub t: f64,
    pub sup_log_factor: f64,
    pub theorem_bound: f64,
    pub linear_bound: f64,
    pub distortion: f64,
    pub distortion_ratio: f64,
    pub log_factor_ratio: f64,
    /// Three-term series of sup|log φ| for the model.
    pub series: f64,
    pub theorem_passed: bool,
    pub distortion_in_range: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub kind: ModelKind,
    pub rows: Vec<SweepRow>,
    /// theorem_bound/t extrapolated to t = 0 through all rows.
    pub theorem_ratio_limit: Option<f64>,
}

impl SweepTable {
    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(|r| r.theorem_passed && r.distortion_in_range)
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "t",
            "sup_log_factor",
            "theorem_bound",
            "linear_bound",
            "distortion",
            "distortion_over_t",
            "sup_log_factor_over_t",
            "sup_log_factor_series",
            "passed",
        ])?;
        for r in &self.rows {
            let mut fields: Vec<String> = [
                r.t,
                r.sup_log_factor,
                r.theorem_bound,
                r.linear_bound,
                r.distortion,
                r.distortion_ratio,
                r.log_factor_ratio,
                r.series,
            ]
            .iter()
            .map(|v| format!("{v:.12e}"))
            .collect();
            fields.push((r.theorem_passed && r.distortion_in_range).to_string());
            w.write_record(&fields)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// sup|log φ| for the sphere or hyperbolic model as a series in t: the boundary value
/// |log(sin²x/x²)| or log(sinh²x/x²) with x² = t.
pub fn log_factor_series(kind: ModelKind, t: f64) -> f64 {
    let s = match kind {
        ModelKind::Sphere => 1.0,
        ModelKind::Hyperbolic => -1.0,
        ModelKind::Flat => return 0.0,
    };
    t / 3.0 + s * t * t / 90.0 + 2.0 * t * t * t / 2835.0
}

/// Value at 0 of the polynomial through the points (Neville's scheme).
pub fn extrapolate_to_zero(points: &[(f64, f64)]) -> Option<f64> {
    if points.is_empty() {
        return None;
    }
    let x: Vec<f64> = points.iter().map(|p| p.0).collect();
    let mut p: Vec<f64> = points.iter().map(|p| p.1).collect();
    let n = p.len();
    for level in 1..n {
        for i in 0..n - level {
            let j = i + level;
            p[i] = (x[j] * p[i] - x[i] * p[i + 1]) / (x[j] - x[i]);
        }
    }
    Some(p[0])
}

/// Runs the factor bounds and the pairwise distortion on models of curvature t.
pub fn sharpness_sweep(kind: ModelKind, t_values: &[f64], h: f64, n_pairs: usize, seed: u64) -> Result<SweepTable> {
    if kind == ModelKind::Flat {
        return Err(Error::Domain("the sweep needs a curved model".into()));
    }
    let mut rows = Vec::with_capacity(t_values.len());
    for &t in t_values {
        if !(t > 0.0 && t < LINEAR_REGIME_PRODUCT) {
            return Err(Error::Hypothesis(format!("t = {t} must lie in (0, pi^2/8)")));
        }
        let metric = model_metric(kind, t, 1.0)?;
        let budget = CurvatureBudget::new(1.0, t)?;
        let chart = uniformize(metric.clone(), h, seed)?;
        let records = verify_theorem_on_chart(&chart, metric.as_ref(), &budget)?;
        let sup = sup_log_factor(&chart).value;
        let distortion = milnor_distortion(&chart, metric, n_pairs, seed)?;
        let ratio = distortion / t;
        rows.push(SweepRow {
            t,
            sup_log_factor: sup,
            theorem_bound: theorem_bound(&budget),
            linear_bound: 8.0 * t,
            distortion,
            distortion_ratio: ratio,
            log_factor_ratio: sup / t,
            series: log_factor_series(kind, t),
            theorem_passed: records.iter().all(|r| r.passed),
            distortion_in_range: (1.0 / 6.0 - DISTORTION_FLOOR_SLACK..=DISTORTION_CEILING).contains(&ratio),
        });
    }
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.t, r.theorem_bound / r.t)).collect();
    Ok(SweepTable { kind, rows, theorem_ratio_limit: extrapolate_to_zero(&pts) })
}
