//! Runs the full verification suite on the model metrics with zero tolerance and
//! prints, per check, the worst excess over the bound divided by the mesh spacing.
//! The largest of these sets the discretization slope of the tolerance.

use std::collections::BTreeMap;
use std::sync::Arc;

use isoflat::distortion::{budget_for, verify_chart, VerifyOptions};
use isoflat::metric::{model_metric, ConformalMetric, ModelKind, RecentredModel};
use num_complex::Complex64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut metrics: Vec<(String, Arc<dyn ConformalMetric>)> = Vec::new();
    for kind in [ModelKind::Flat, ModelKind::Sphere, ModelKind::Hyperbolic] {
        let kappa = if kind == ModelKind::Flat { 0.0 } else { 1.0 };
        metrics.push((format!("{kind:?}"), model_metric(kind, kappa, 1.0)?));
    }
    for kind in [ModelKind::Sphere, ModelKind::Hyperbolic] {
        let m = RecentredModel::new(kind, 1.0, 1.0, Complex64::new(0.06, 0.08))?;
        metrics.push((format!("Recentred{kind:?}"), Arc::new(m)));
    }
    let mut worst: BTreeMap<String, f64> = BTreeMap::new();
    for (label, metric) in &metrics {
        let budget = budget_for(metric.as_ref())?;
        for h in [0.04, 0.02] {
            let options = VerifyOptions { h, seed: 0, pairs: 300, boundary_pairs: 300, interior_samples: 200 };
            let (report, _) = verify_chart(metric.clone(), &budget, &options)?;
            for r in &report.records {
                let excess = (r.tolerance - r.slack()) / h;
                let e = worst.entry(r.name.clone()).or_insert(f64::NEG_INFINITY);
                if excess > *e {
                    *e = excess;
                }
                if excess > 0.0 {
                    println!("{label:<22} h={h:<5} {:<36} excess/h = {excess:.3e}", r.name);
                }
            }
        }
    }
    println!();
    for (name, e) in &worst {
        println!("{name:<36} {e:+.3e}");
    }
    let slope = worst.values().copied().fold(0.0, f64::max);
    println!("\nlargest excess/h: {slope:.3e}");
    Ok(())
}
