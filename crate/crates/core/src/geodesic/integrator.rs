use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::metric::{ConformalMetric, Point};

/// Position, chart heading, and a normal Jacobi field along a unit-speed geodesic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicState {
    pub position: Point,
    /// Angle of the chart velocity against the x-axis.
    pub heading: f64,
    pub jacobi: f64,
    pub jacobi_rate: f64,
}

impl GeodesicState {
    pub fn new(position: Point, heading: f64) -> Self {
        Self { position, heading, jacobi: 0.0, jacobi_rate: 1.0 }
    }

    /// Unit chart tangent.
    pub fn tangent(&self) -> Point {
        Complex64::new(self.heading.cos(), self.heading.sin())
    }

    fn to_array(self) -> [f64; 5] {
        [self.position.re, self.position.im, self.heading, self.jacobi, self.jacobi_rate]
    }

    fn from_array(a: [f64; 5]) -> Self {
        Self {
            position: Complex64::new(a[0], a[1]),
            heading: a[2],
            jacobi: a[3],
            jacobi_rate: a[4],
        }
    }
}

/// With σ = ½ log λ₀ and arc length s:
/// x' = e^{−σ} cos θ, y' = e^{−σ} sin θ, θ' = e^{−σ}(σ_y cos θ − σ_x sin θ), J'' = −K J.
fn derivative(metric: &dyn ConformalMetric, y: &[f64; 5]) -> [f64; 5] {
    let g = metric.local_geometry(Complex64::new(y[0], y[1]));
    let inv_speed = g.factor.sqrt().recip();
    let (s, c) = y[2].sin_cos();
    let (sx, sy) = (0.5 * g.grad_log[0], 0.5 * g.grad_log[1]);
    [
        inv_speed * c,
        inv_speed * s,
        inv_speed * (sy * c - sx * s),
        y[4],
        -g.curvature() * y[3],
    ]
}

fn axpy(a: &[f64; 5], k: f64, b: &[f64; 5]) -> [f64; 5] {
    std::array::from_fn(|i| a[i] + k * b[i])
}

/// One classical Runge–Kutta step of arc length `h`.
pub fn rk4_step(metric: &dyn ConformalMetric, state: &GeodesicState, h: f64) -> GeodesicState {
    let y = state.to_array();
    let k1 = derivative(metric, &y);
    let k2 = derivative(metric, &axpy(&y, 0.5 * h, &k1));
    let k3 = derivative(metric, &axpy(&y, 0.5 * h, &k2));
    let k4 = derivative(metric, &axpy(&y, h, &k3));
    GeodesicState::from_array(std::array::from_fn(|i| {
        y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicPath {
    /// Chart points paired with their arc-length parameter, starting at 0.
    pub samples: Vec<(Point, f64)>,
    pub total_length: f64,
    /// State at the final sample, including the Jacobi field.
    pub end: GeodesicState,
}

impl GeodesicPath {
    pub fn endpoint(&self) -> Point {
        self.end.position
    }

    /// Metric length of the polyline through the samples (midpoint rule).
    pub fn polyline_length(&self, metric: &dyn ConformalMetric) -> f64 {
        self.samples
            .windows(2)
            .map(|w| metric.factor(0.5 * (w[0].0 + w[1].0)).sqrt() * (w[1].0 - w[0].0).norm())
            .sum()
    }
}

/// Number of equal steps no longer than `step` that cover `length`.
pub(crate) fn step_count(length: f64, step: f64) -> usize {
    ((length / step).ceil() as usize).max(1)
}

/// Integrates the unit-speed geodesic leaving `start` with chart heading `direction`.
pub fn shoot_geodesic(
    metric: &dyn ConformalMetric,
    start: Point,
    direction: f64,
    length: f64,
    step: f64,
) -> Result<GeodesicPath> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Domain(format!("step must be positive, got {step}")));
    }
    if !(length >= 0.0 && length.is_finite()) {
        return Err(Error::Domain(format!("length must be non-negative, got {length}")));
    }
    if !metric.contains(start) {
        return Err(Error::OutOfDomain { x: start.re, y: start.im });
    }
    let n = step_count(length, step);
    let h = length / n as f64;
    let mut state = GeodesicState::new(start, direction);
    let mut samples = Vec::with_capacity(n + 1);
    samples.push((start, 0.0));
    if length == 0.0 {
        return Ok(GeodesicPath { samples, total_length: 0.0, end: state });
    }
    for k in 1..=n {
        state = rk4_step(metric, &state, h);
        let s = k as f64 * h;
        if !metric.contains(state.position) || !state.position.re.is_finite() {
            return Err(Error::PathExitsDomain { arc_length: s });
        }
        samples.push((state.position, s));
    }
    Ok(GeodesicPath { samples, total_length: length, end: state })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{model_metric, ModelKind, SphereModel};
    use std::f64::consts::PI;

    #[test]
    fn flat_geodesics_are_straight() {
        let m = model_metric(ModelKind::Flat, 0.0, 0.5).unwrap();
        let p = Complex64::new(0.1, -0.2);
        let path = shoot_geodesic(m.as_ref(), p, 0.7, 0.5, 1e-2).unwrap();
        let expected = p + Complex64::from_polar(0.5 / 0.5, 0.7);
        assert!((path.endpoint() - expected).norm() < 1e-10);
        assert!((path.end.jacobi - 0.5).abs() < 1e-12);
    }

    /// Endpoint of the great circle through `p` with chart heading `a`, via the embedding.
    fn great_circle_endpoint(m: &SphereModel, p: Point, a: f64, s: f64) -> Point {
        let k = m.declared_kappa();
        let x = m.embed(p);
        let eps = 1e-5;
        let y = m.embed(p + Complex64::from_polar(eps, a));
        let z = m.embed(p - Complex64::from_polar(eps, a));
        let mut v = [y[0] - z[0], y[1] - z[1], y[2] - z[2]];
        let r2 = 1.0 / k;
        let dot = (v[0] * x[0] + v[1] * x[1] + v[2] * x[2]) / r2;
        for i in 0..3 {
            v[i] -= dot * x[i];
        }
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let w = s * k.sqrt();
        let r = r2.sqrt();
        let e = std::array::from_fn(|i| x[i] * w.cos() + r * v[i] / n * w.sin());
        m.project(e)
    }

    #[test]
    fn sphere_geodesics_follow_great_circles() {
        let m = SphereModel::new(1.0, 1.0).unwrap();
        for (p, a) in [(Complex64::new(0.0, 0.0), 0.3), (Complex64::new(0.3, -0.4), 2.0)] {
            let path = shoot_geodesic(&m, p, a, 1.5, 1e-3).unwrap();
            let e = great_circle_endpoint(&m, p, a, 1.5);
            assert!((path.endpoint() - e).norm() < 1e-8, "{}", (path.endpoint() - e).norm());
            let d = m.closed_form_distance(p, path.endpoint());
            assert!((d - 1.5).abs() < 1e-9);
        }
    }

    #[test]
    fn sphere_jacobi_field_matches_sine() {
        let m = SphereModel::new(1.0, 1.0).unwrap();
        let path = shoot_geodesic(&m, Complex64::new(0.0, 0.0), 1.0, 1.2, 1e-3).unwrap();
        assert!((path.end.jacobi - 1.2f64.sin()).abs() < 1e-10);
    }

    #[test]
    fn reversal_returns_to_start() {
        let m = model_metric(ModelKind::Hyperbolic, 1.0, 1.0).unwrap();
        let p = Complex64::new(0.2, 0.1);
        let fwd = shoot_geodesic(m.as_ref(), p, 0.4, 1.7, 1e-3).unwrap();
        let back = shoot_geodesic(m.as_ref(), fwd.endpoint(), fwd.end.heading + PI, 1.7, 1e-3).unwrap();
        assert!((back.endpoint() - p).norm() < 1e-9);
    }

    #[test]
    fn halving_the_step_is_fourth_order() {
        let m = SphereModel::new(1.0, 1.0).unwrap();
        let p = Complex64::new(0.05, 0.02);
        let exact = great_circle_endpoint(&m, p, 1.1, 1.8);
        let err = |h: f64| (shoot_geodesic(&m, p, 1.1, 1.8, h).unwrap().endpoint() - exact).norm();
        let (e1, e2) = (err(0.1), err(0.05));
        assert!(e1 / e2 >= 8.0, "{e1} {e2}");
    }

    #[test]
    fn samples_are_unit_speed() {
        let m = model_metric(ModelKind::Sphere, 1.0, 1.0).unwrap();
        let path = shoot_geodesic(m.as_ref(), Complex64::new(0.1, 0.0), 0.2, 1.0, 1e-3).unwrap();
        for w in path.samples.windows(2) {
            let ds = w[1].1 - w[0].1;
            assert!(ds > 0.0);
            let len = m.factor(0.5 * (w[0].0 + w[1].0)).sqrt() * (w[1].0 - w[0].0).norm();
            assert!((len - ds).abs() < 1e-9);
        }
    }

    #[test]
    fn leaving_the_domain_is_an_error() {
        let m = model_metric(ModelKind::Flat, 0.0, 1.0).unwrap();
        let err = shoot_geodesic(m.as_ref(), Complex64::new(0.0, 0.0), 0.0, 3.0, 1e-2).unwrap_err();
        assert!(matches!(err, Error::PathExitsDomain { .. }));
    }
}
