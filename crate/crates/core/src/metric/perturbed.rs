use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use super::{model_metric, ConformalMetric, LocalGeometry, MetricKind, ModelKind, Point};
use crate::bounds::CRITICAL_PRODUCT;
use crate::error::{Error, Result};

/// Declared κ is the measured sup |K| times this factor.
pub const KAPPA_INFLATION: f64 = 1.05;

/// Background radius of perturbed metrics; leaves room for geodesics of length 2δ.
pub const PERTURBED_DOMAIN_RADIUS: f64 = 2.5;

/// Samples per axis of the grid on which sup |K| is measured.
const CURVATURE_GRID: usize = 401;

/// A smooth dimensionless profile `b(ζ)` with analytic first and second derivatives.
pub trait BumpProfile: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;
    fn value(&self, p: Point) -> f64;
    fn gradient(&self, p: Point) -> [f64; 2];
    fn laplacian(&self, p: Point) -> f64;
}

/// b(ζ) = exp(−|ζ|²)
#[derive(Debug, Clone, Copy, Default)]
pub struct GaussianBump;

impl BumpProfile for GaussianBump {
    fn name(&self) -> &'static str {
        "gaussian"
    }

    fn value(&self, p: Point) -> f64 {
        (-p.norm_sqr()).exp()
    }

    fn gradient(&self, p: Point) -> [f64; 2] {
        let b = self.value(p);
        [-2.0 * p.re * b, -2.0 * p.im * b]
    }

    fn laplacian(&self, p: Point) -> f64 {
        let r2 = p.norm_sqr();
        (4.0 * r2 - 4.0) * (-r2).exp()
    }
}

/// b(ζ) = cos x · cos y. Not rotationally symmetric, so the geodesic disc is not round.
#[derive(Debug, Clone, Copy, Default)]
pub struct CosineBump;

impl BumpProfile for CosineBump {
    fn name(&self) -> &'static str {
        "cosine"
    }

    fn value(&self, p: Point) -> f64 {
        p.re.cos() * p.im.cos()
    }

    fn gradient(&self, p: Point) -> [f64; 2] {
        [-p.re.sin() * p.im.cos(), -p.re.cos() * p.im.sin()]
    }

    fn laplacian(&self, p: Point) -> f64 {
        -2.0 * self.value(p)
    }
}

/// Bump profiles registered by name.
#[derive(Debug, Clone)]
pub struct BumpRegistry {
    entries: BTreeMap<&'static str, Arc<dyn BumpProfile>>,
}

impl Default for BumpRegistry {
    fn default() -> Self {
        let mut r = Self { entries: BTreeMap::new() };
        r.register(Arc::new(GaussianBump));
        r.register(Arc::new(CosineBump));
        r
    }
}

impl BumpRegistry {
    pub fn register(&mut self, profile: Arc<dyn BumpProfile>) {
        self.entries.insert(profile.name(), profile);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn BumpProfile>> {
        self.entries.get(name).cloned().ok_or_else(|| Error::Unknown {
            what: "bump profile",
            name: name.to_string(),
        })
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }
}

/// λ₀ = δ²·exp(ε·b(ζ)) on the background disc of radius [`PERTURBED_DOMAIN_RADIUS`].
#[derive(Debug, Clone)]
pub struct PerturbedMetric {
    delta: f64,
    epsilon: f64,
    bump: Arc<dyn BumpProfile>,
    kappa: f64,
    measured_sup_curvature: f64,
}

impl PerturbedMetric {
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn bump(&self) -> &dyn BumpProfile {
        self.bump.as_ref()
    }

    /// sup |K| over the measurement grid, before inflation.
    pub fn measured_sup_curvature(&self) -> f64 {
        self.measured_sup_curvature
    }

    fn curvature_raw(delta: f64, epsilon: f64, bump: &dyn BumpProfile, p: Point) -> f64 {
        let factor = delta * delta * (epsilon * bump.value(p)).exp();
        -epsilon * bump.laplacian(p) / (2.0 * factor)
    }
}

impl ConformalMetric for PerturbedMetric {
    fn kind(&self) -> MetricKind {
        MetricKind::Custom
    }

    fn factor(&self, p: Point) -> f64 {
        self.delta * self.delta * (self.epsilon * self.bump.value(p)).exp()
    }

    fn domain_radius(&self) -> f64 {
        PERTURBED_DOMAIN_RADIUS
    }

    fn delta(&self) -> f64 {
        self.delta
    }

    fn declared_kappa(&self) -> f64 {
        self.kappa
    }

    fn analytic_geometry(&self, p: Point) -> Option<LocalGeometry> {
        let g = self.bump.gradient(p);
        Some(LocalGeometry {
            factor: self.factor(p),
            grad_log: [self.epsilon * g[0], self.epsilon * g[1]],
            laplacian_log: self.epsilon * self.bump.laplacian(p),
        })
    }
}

/// Builds δ²·exp(ε·bump) and declares κ as the inflated sup |K| over a dense grid.
///
/// `ε = 0` returns the flat model. The metric is rejected when κ·(2δ)² ≥ π²/4.
pub fn make_perturbed(
    delta: f64,
    epsilon: f64,
    bump: Arc<dyn BumpProfile>,
) -> Result<Arc<dyn ConformalMetric>> {
    if !epsilon.is_finite() {
        return Err(Error::Domain(format!("epsilon must be finite, got {epsilon}")));
    }
    if epsilon == 0.0 {
        return model_metric(ModelKind::Flat, 0.0, delta);
    }
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::Domain(format!("delta must be positive, got {delta}")));
    }
    let r = PERTURBED_DOMAIN_RADIUS;
    let step = 2.0 * r / (CURVATURE_GRID - 1) as f64;
    let mut sup = 0.0f64;
    for i in 0..CURVATURE_GRID {
        for j in 0..CURVATURE_GRID {
            let p = Point::new(-r + i as f64 * step, -r + j as f64 * step);
            if p.norm() <= r {
                sup = sup.max(PerturbedMetric::curvature_raw(delta, epsilon, bump.as_ref(), p).abs());
            }
        }
    }
    let kappa = KAPPA_INFLATION * sup;
    let reach = kappa * 4.0 * delta * delta;
    if reach >= CRITICAL_PRODUCT {
        return Err(Error::Hypothesis(format!(
            "epsilon = {epsilon} gives kappa = {kappa:.6}; kappa * (2 delta)^2 = {reach:.6} must be below pi^2/4 = {:.6}",
            PI * PI / 4.0
        )));
    }
    Ok(Arc::new(PerturbedMetric {
        delta,
        epsilon,
        bump,
        kappa,
        measured_sup_curvature: sup,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::stencil_geometry;

    #[test]
    fn zero_epsilon_is_flat() {
        let m = make_perturbed(1.0, 0.0, Arc::new(GaussianBump)).unwrap();
        assert_eq!(m.kind(), MetricKind::Flat);
        assert_eq!(m.factor(Point::new(0.3, 0.1)), 1.0);
    }

    #[test]
    fn gaussian_perturbation_declares_inflated_kappa() {
        let m = make_perturbed(1.0, 0.1, Arc::new(GaussianBump)).unwrap();
        // K peaks at the origin: 2ε/(δ² e^ε).
        let peak = 0.2 / 0.1f64.exp();
        assert!((m.declared_kappa() - KAPPA_INFLATION * peak).abs() < 1e-9);
        assert!((m.curvature(Point::new(0.0, 0.0)) - peak).abs() < 1e-12);
    }

    #[test]
    fn analytic_and_stencil_curvature_agree() {
        let bumps: [Arc<dyn BumpProfile>; 2] = [Arc::new(GaussianBump), Arc::new(CosineBump)];
        for bump in bumps {
            let m = make_perturbed(1.0, 0.1, bump).unwrap();
            for p in [Point::new(0.0, 0.0), Point::new(0.7, -0.4), Point::new(-1.2, 0.9)] {
                let a = m.curvature(p);
                let s = stencil_geometry(m.as_ref(), p, 1e-3 * m.domain_radius()).curvature();
                assert!((a - s).abs() < 1e-4, "{a} vs {s}");
            }
        }
    }

    #[test]
    fn large_epsilon_is_rejected() {
        for eps in [10.0, -3.0] {
            let err = make_perturbed(1.0, eps, Arc::new(GaussianBump)).unwrap_err();
            assert!(matches!(err, Error::Hypothesis(_)), "{eps}: {err}");
        }
    }

    #[test]
    fn registry_lookup() {
        let r = BumpRegistry::default();
        assert_eq!(r.get("cosine").unwrap().name(), "cosine");
        assert!(r.get("square").is_err());
        assert_eq!(r.names().collect::<Vec<_>>(), vec!["cosine", "gaussian"]);
    }
}
