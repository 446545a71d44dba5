use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{ConformalMetric, LocalGeometry, MetricKind, Point};
use crate::bounds::CurvatureBudget;
use crate::error::{Error, Result};

/// The three constant-curvature model surfaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Flat,
    Sphere,
    Hyperbolic,
}

/// How far past 2δ the model domains reach, as a fraction of δ.
const REACH: f64 = 2.1;

/// Exact isothermal presentation of the geodesic δ-disc on the unit background disc.
///
/// `kappa` is ignored for [`ModelKind::Flat`].
pub fn model_metric(kind: ModelKind, kappa: f64, delta: f64) -> Result<Arc<dyn ConformalMetric>> {
    match kind {
        ModelKind::Flat => Ok(Arc::new(FlatModel::new(delta)?)),
        ModelKind::Sphere => Ok(Arc::new(SphereModel::new(kappa, delta)?)),
        ModelKind::Hyperbolic => Ok(Arc::new(HyperbolicModel::new(kappa, delta)?)),
    }
}

/// λ ≡ δ²: the Euclidean disc of radius δ drawn at unit size.
#[derive(Debug, Clone)]
pub struct FlatModel {
    delta: f64,
}

impl FlatModel {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::Domain(format!("delta must be positive, got {delta}")));
        }
        Ok(Self { delta })
    }

    pub fn closed_form_distance(&self, p: Point, q: Point) -> f64 {
        self.delta * (p - q).norm()
    }

    /// Chart radius of the geodesic circle of radius `d` about the origin.
    pub fn radius_at_distance(&self, d: f64) -> f64 {
        d / self.delta
    }
}

impl ConformalMetric for FlatModel {
    fn kind(&self) -> MetricKind {
        MetricKind::Flat
    }

    fn factor(&self, _p: Point) -> f64 {
        self.delta * self.delta
    }

    fn domain_radius(&self) -> f64 {
        REACH
    }

    fn delta(&self) -> f64 {
        self.delta
    }

    fn declared_kappa(&self) -> f64 {
        0.0
    }

    fn analytic_geometry(&self, _p: Point) -> Option<LocalGeometry> {
        Some(LocalGeometry {
            factor: self.delta * self.delta,
            grad_log: [0.0, 0.0],
            laplacian_log: 0.0,
        })
    }
}

/// Stereographic chart of the sphere of curvature κ, scaled so the geodesic δ-disc
/// around the pole fills the unit disc: λ(w) = 4t²/(κ(1 + t²|w|²)²), t = tan(δ√κ/2).
#[derive(Debug, Clone)]
pub struct SphereModel {
    kappa: f64,
    delta: f64,
    scale: f64,
    radius: f64,
}

impl SphereModel {
    pub fn new(kappa: f64, delta: f64) -> Result<Self> {
        let budget = CurvatureBudget::new(delta, kappa)?;
        let x = budget.angle();
        let scale = (0.5 * x).tan();
        // Reach 2.1δ, but stay short of the antipode.
        let reach = (REACH * x).min(0.5 * (PI + 2.0 * x));
        let radius = (0.5 * reach).tan() / scale;
        Ok(Self { kappa, delta, scale, radius })
    }

    /// t = tan(δ√κ/2), the factor between the model chart and the stereographic one.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Great-circle distance between two chart points.
    pub fn closed_form_distance(&self, p: Point, q: Point) -> f64 {
        let (u, v) = (p * self.scale, q * self.scale);
        let s = (u - v).norm() / ((1.0 + u.norm_sqr()) * (1.0 + v.norm_sqr())).sqrt();
        2.0 * s.min(1.0).asin() / self.kappa.sqrt()
    }

    pub fn radius_at_distance(&self, d: f64) -> f64 {
        (0.5 * d * self.kappa.sqrt()).tan() / self.scale
    }

    /// Chart point of the sphere embedded with radius 1/√κ (pole at w = 0 maps to +e₃).
    pub fn embed(&self, w: Point) -> [f64; 3] {
        let u = w * self.scale;
        let n = 1.0 + u.norm_sqr();
        let r = 1.0 / self.kappa.sqrt();
        [r * 2.0 * u.re / n, r * 2.0 * u.im / n, r * (1.0 - u.norm_sqr()) / n]
    }

    /// Inverse of [`SphereModel::embed`].
    pub fn project(&self, x: [f64; 3]) -> Point {
        let r = 1.0 / self.kappa.sqrt();
        let u = Point::new(x[0], x[1]) / (r + x[2]);
        u / self.scale
    }
}

impl ConformalMetric for SphereModel {
    fn kind(&self) -> MetricKind {
        MetricKind::Sphere { kappa: self.kappa }
    }

    fn factor(&self, p: Point) -> f64 {
        let t2 = self.scale * self.scale;
        let d = 1.0 + t2 * p.norm_sqr();
        4.0 * t2 / (self.kappa * d * d)
    }

    fn domain_radius(&self) -> f64 {
        self.radius
    }

    fn delta(&self) -> f64 {
        self.delta
    }

    fn declared_kappa(&self) -> f64 {
        self.kappa
    }

    fn analytic_geometry(&self, p: Point) -> Option<LocalGeometry> {
        let t2 = self.scale * self.scale;
        let d = 1.0 + t2 * p.norm_sqr();
        let g = -4.0 * t2 / d;
        Some(LocalGeometry {
            factor: 4.0 * t2 / (self.kappa * d * d),
            grad_log: [g * p.re, g * p.im],
            laplacian_log: -8.0 * t2 / (d * d),
        })
    }
}

/// Poincaré chart of the hyperbolic plane of curvature −κ, scaled so the geodesic
/// δ-disc fills the unit disc: λ(w) = 4t²/(κ(1 − t²|w|²)²), t = tanh(δ√κ/2).
#[derive(Debug, Clone)]
pub struct HyperbolicModel {
    kappa: f64,
    delta: f64,
    scale: f64,
    radius: f64,
}

impl HyperbolicModel {
    pub fn new(kappa: f64, delta: f64) -> Result<Self> {
        let budget = CurvatureBudget::new(delta, kappa)?;
        let x = budget.angle();
        let scale = (0.5 * x).tanh();
        let radius = (0.5 * REACH * x).tanh() / scale;
        Ok(Self { kappa, delta, scale, radius })
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn closed_form_distance(&self, p: Point, q: Point) -> f64 {
        let (u, v) = (p * self.scale, q * self.scale);
        let s = (u - v).norm() / ((1.0 - u.norm_sqr()) * (1.0 - v.norm_sqr())).sqrt();
        2.0 * s.asinh() / self.kappa.sqrt()
    }

    pub fn radius_at_distance(&self, d: f64) -> f64 {
        (0.5 * d * self.kappa.sqrt()).tanh() / self.scale
    }
}

#[derive(Debug, Clone)]
enum Model {
    Flat(FlatModel),
    Sphere(SphereModel),
    Hyperbolic(HyperbolicModel),
}

impl Model {
    fn metric(&self) -> &dyn ConformalMetric {
        match self {
            Model::Flat(m) => m,
            Model::Sphere(m) => m,
            Model::Hyperbolic(m) => m,
        }
    }

    fn distance(&self, p: Point, q: Point) -> f64 {
        match self {
            Model::Flat(m) => m.closed_form_distance(p, q),
            Model::Sphere(m) => m.closed_form_distance(p, q),
            Model::Hyperbolic(m) => m.closed_form_distance(p, q),
        }
    }

    fn radius_at_distance(&self, d: f64) -> f64 {
        match self {
            Model::Flat(m) => m.radius_at_distance(d),
            Model::Sphere(m) => m.radius_at_distance(d),
            Model::Hyperbolic(m) => m.radius_at_distance(d),
        }
    }
}

/// A model surface pulled back by the disc automorphism M(ζ) = (ζ + a)/(1 + āζ), so the
/// background origin sits at the model point a.
///
/// The geodesic δ-disc about the origin is then an off-centre circle of the background
/// chart and its Green's function is no longer −log|ζ|, while the exact chart is still
/// known: by symmetry φ and G depend only on the distance from the origin.
#[derive(Debug, Clone)]
pub struct RecentredModel {
    base: Model,
    shift: Point,
    radius: f64,
}

impl RecentredModel {
    pub fn new(kind: ModelKind, kappa: f64, delta: f64, shift: Point) -> Result<Self> {
        let base = match kind {
            ModelKind::Flat => Model::Flat(FlatModel::new(delta)?),
            ModelKind::Sphere => Model::Sphere(SphereModel::new(kappa, delta)?),
            ModelKind::Hyperbolic => Model::Hyperbolic(HyperbolicModel::new(kappa, delta)?),
        };
        let a = shift.norm();
        let reach = base.metric().domain_radius();
        if !(a < 1.0 && a < reach) {
            return Err(Error::Domain(format!("shift {shift} must lie inside the unit disc")));
        }
        // Largest R with M(D_R) inside the model domain: (R + a)/(1 − aR) = reach.
        let radius = (reach - a) / (1.0 + a * reach);
        Ok(Self { base, shift, radius })
    }

    pub fn shift(&self) -> Point {
        self.shift
    }

    fn mobius(&self, p: Point) -> (Point, Point) {
        let den = 1.0 + self.shift.conj() * p;
        let w = (p + self.shift) / den;
        let dw = (1.0 - self.shift.norm_sqr()) / (den * den);
        (w, dw)
    }

    pub fn closed_form_distance(&self, p: Point, q: Point) -> f64 {
        self.base.distance(self.mobius(p).0, self.mobius(q).0)
    }

    /// Modulus of the exact isothermal chart w = z/δ at `p`.
    pub fn exact_chart_radius(&self, p: Point) -> f64 {
        let d = self.base.distance(self.shift, self.mobius(p).0);
        self.base.radius_at_distance(d)
    }

    /// Exact Green's function −log|w| with pole at the origin.
    pub fn exact_green(&self, p: Point) -> f64 {
        -self.exact_chart_radius(p).ln()
    }

    /// Exact conformal factor φ of the chart z = δw.
    pub fn exact_chart_factor(&self, p: Point) -> f64 {
        let m = self.base.metric();
        let r = self.exact_chart_radius(p);
        m.factor(Point::new(r, 0.0)) / (m.delta() * m.delta())
    }
}

impl ConformalMetric for RecentredModel {
    fn kind(&self) -> MetricKind {
        self.base.metric().kind()
    }

    fn factor(&self, p: Point) -> f64 {
        let (w, dw) = self.mobius(p);
        self.base.metric().factor(w) * dw.norm_sqr()
    }

    fn domain_radius(&self) -> f64 {
        self.radius
    }

    fn delta(&self) -> f64 {
        self.base.metric().delta()
    }

    fn declared_kappa(&self) -> f64 {
        self.base.metric().declared_kappa()
    }

    fn analytic_geometry(&self, p: Point) -> Option<LocalGeometry> {
        let (w, dw) = self.mobius(p);
        let g = self.base.metric().analytic_geometry(w)?;
        // ∇(u∘M) = conj(M')·(∇u)∘M, and log|M'| = log(1 − |a|²) − 2 log|1 + āζ|.
        let chain = dw.conj() * Point::new(g.grad_log[0], g.grad_log[1]);
        let jac = -4.0 * (self.shift.conj() / (1.0 + self.shift.conj() * p)).conj();
        let grad = chain + jac;
        Some(LocalGeometry {
            factor: g.factor * dw.norm_sqr(),
            grad_log: [grad.re, grad.im],
            laplacian_log: g.laplacian_log * dw.norm_sqr(),
        })
    }
}

impl ConformalMetric for HyperbolicModel {
    fn kind(&self) -> MetricKind {
        MetricKind::Hyperbolic { kappa: self.kappa }
    }

    fn factor(&self, p: Point) -> f64 {
        let t2 = self.scale * self.scale;
        let d = 1.0 - t2 * p.norm_sqr();
        4.0 * t2 / (self.kappa * d * d)
    }

    fn domain_radius(&self) -> f64 {
        self.radius
    }

    fn delta(&self) -> f64 {
        self.delta
    }

    fn declared_kappa(&self) -> f64 {
        self.kappa
    }

    fn analytic_geometry(&self, p: Point) -> Option<LocalGeometry> {
        let t2 = self.scale * self.scale;
        let d = 1.0 - t2 * p.norm_sqr();
        let g = 4.0 * t2 / d;
        Some(LocalGeometry {
            factor: 4.0 * t2 / (self.kappa * d * d),
            grad_log: [g * p.re, g * p.im],
            laplacian_log: 8.0 * t2 / (d * d),
        })
    }
}
