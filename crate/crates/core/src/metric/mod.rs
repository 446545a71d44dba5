//! Riemannian metrics presented conformally on a planar background chart.
//!
//! A metric is `g = λ₀(ζ)·|dζ|²` on a disc of the background chart. Every
//! variant (the constant-curvature models and the perturbed test metrics)
//! implements [`ConformalMetric`] and is registered by name in a
//! [`MetricRegistry`], so callers pick one at runtime from a [`MetricSpec`].

mod models;
mod perturbed;
mod registry;

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use models::{model_metric, FlatModel, HyperbolicModel, ModelKind, RecentredModel, SphereModel};
pub use perturbed::{
    make_perturbed, BumpProfile, BumpRegistry, CosineBump, GaussianBump, PerturbedMetric,
    KAPPA_INFLATION, PERTURBED_DOMAIN_RADIUS,
};
pub use registry::{MetricFactory, MetricRegistry, MetricSpec};

/// A point of the background chart; `re` is x and `im` is y.
pub type Point = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MetricKind {
    Flat,
    Sphere { kappa: f64 },
    Hyperbolic { kappa: f64 },
    Custom,
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricKind::Flat => write!(f, "flat"),
            MetricKind::Sphere { kappa } => write!(f, "sphere(kappa={kappa})"),
            MetricKind::Hyperbolic { kappa } => write!(f, "hyperbolic(kappa={kappa})"),
            MetricKind::Custom => write!(f, "custom"),
        }
    }
}

/// λ₀ together with the first two derivatives of log λ₀ at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalGeometry {
    pub factor: f64,
    pub grad_log: [f64; 2],
    pub laplacian_log: f64,
}

impl LocalGeometry {
    /// Gauss curvature from Liouville's equation, K = −Δ(log λ)/(2λ).
    pub fn curvature(&self) -> f64 {
        -self.laplacian_log / (2.0 * self.factor)
    }
}

/// Relative stencil step used when a metric has no analytic derivatives.
pub const STENCIL_STEP_FRACTION: f64 = 1e-3;

pub trait ConformalMetric: Send + Sync + fmt::Debug {
    fn kind(&self) -> MetricKind;

    /// Background conformal factor λ₀(ζ) > 0.
    fn factor(&self, p: Point) -> f64;

    /// Radius of the background disc on which λ₀ is defined.
    fn domain_radius(&self) -> f64;

    /// Riemannian radius δ of the disc this metric is meant to be studied on.
    fn delta(&self) -> f64;

    /// Declared curvature bound κ (|K| ≤ κ on the domain); zero for the flat metric.
    fn declared_kappa(&self) -> f64;

    /// Closed-form derivatives of log λ₀, when the metric has them.
    fn analytic_geometry(&self, _p: Point) -> Option<LocalGeometry> {
        None
    }

    fn contains(&self, p: Point) -> bool {
        p.norm() < self.domain_radius()
    }

    /// λ₀ and derivatives of log λ₀, analytic if available, otherwise by stencil.
    fn local_geometry(&self, p: Point) -> LocalGeometry {
        self.analytic_geometry(p).unwrap_or_else(|| {
            stencil_geometry(self, p, STENCIL_STEP_FRACTION * self.domain_radius())
        })
    }

    fn curvature(&self, p: Point) -> f64 {
        self.local_geometry(p).curvature()
    }
}

/// Derivatives of log λ₀ from 5-point central stencils with step `h`.
pub fn stencil_geometry<M: ConformalMetric + ?Sized>(metric: &M, p: Point, h: f64) -> LocalGeometry {
    let l = |dx: f64, dy: f64| metric.factor(p + Complex64::new(dx, dy)).ln();
    let c = l(0.0, 0.0);
    let (e, w, n, s) = (l(h, 0.0), l(-h, 0.0), l(0.0, h), l(0.0, -h));
    LocalGeometry {
        factor: c.exp(),
        grad_log: [(e - w) / (2.0 * h), (n - s) / (2.0 * h)],
        laplacian_log: (e + w + n + s - 4.0 * c) / (h * h),
    }
}

/// Gauss curvature at `p`, rejecting points within two stencil steps of the domain edge.
pub fn curvature_at(metric: &dyn ConformalMetric, p: Point) -> Result<f64> {
    let margin = 2.0 * STENCIL_STEP_FRACTION * metric.domain_radius();
    if !(p.norm() + margin < metric.domain_radius()) {
        return Err(Error::OutOfDomain { x: p.re, y: p.im });
    }
    Ok(metric.curvature(p))
}

/// Applies the Laplace–Beltrami operator to `u` through the metric: Δ_M u = λ₀⁻¹·Δu,
/// with Δ evaluated by a 5-point stencil of step `h`.
pub fn laplace_beltrami<F: Fn(Point) -> f64>(
    metric: &dyn ConformalMetric,
    u: F,
    p: Point,
    h: f64,
) -> f64 {
    let lap = (u(p + h) + u(p - h) + u(p + Complex64::new(0.0, h)) + u(p - Complex64::new(0.0, h))
        - 4.0 * u(p))
        / (h * h);
    lap / metric.factor(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curvature_at_rejects_points_outside() {
        let m = model_metric(ModelKind::Flat, 0.0, 1.0).unwrap();
        assert!(curvature_at(m.as_ref(), Complex64::new(5.0, 0.0)).is_err());
        assert_eq!(curvature_at(m.as_ref(), Complex64::new(0.3, -0.2)).unwrap(), 0.0);
    }

    #[test]
    fn conformal_invariance_of_laplacian() {
        let m = model_metric(ModelKind::Sphere, 1.0, 1.0).unwrap();
        let u = |p: Point| p.re * p.re * p.im + 0.3 * p.im;
        let p = Complex64::new(0.2, 0.4);
        let h = 1e-3;
        let lb = laplace_beltrami(m.as_ref(), u, p, h);
        // Δ(x²y + 0.3y) = 2y
        assert!((lb * m.factor(p) - 2.0 * p.im).abs() < 1e-5);
    }
}
