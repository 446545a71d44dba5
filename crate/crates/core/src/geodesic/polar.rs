use std::f64::consts::PI;

use rayon::prelude::*;

use super::distance::DEFAULT_STEPS_PER_DELTA;
use super::integrator::{rk4_step, step_count, GeodesicState};
use crate::error::{Error, Result};
use crate::metric::{ConformalMetric, Point};
use crate::report::VerificationRecord;

/// Normal polar coordinates around `center`, sampled on a (θ, ρ) grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarGrid {
    pub center: Point,
    pub rho: Vec<f64>,
    pub theta: Vec<f64>,
    /// Arc-length step used along each ray.
    pub step: f64,
    /// Chart position of each node, `theta`-major.
    pub positions: Vec<Point>,
    /// Polar Jacobian φ(ρ, θ), `theta`-major.
    pub jacobian: Vec<f64>,
    /// Δ_M r = φ'/φ, `theta`-major.
    pub laplacian_r: Vec<f64>,
}

impl PolarGrid {
    pub fn index(&self, i_theta: usize, i_rho: usize) -> usize {
        i_theta * self.rho.len() + i_rho
    }

    /// Endpoints of all rays (the outermost ring).
    pub fn outer_ring(&self) -> Vec<Point> {
        let n = self.rho.len();
        (0..self.theta.len()).map(|j| self.positions[j * n + n - 1]).collect()
    }
}

/// Integrates geodesic rays from `center` together with the Jacobi field
/// φ'' + Kφ = 0, φ(0) = 0, φ'(0) = 1, sampling at ρ_k = k·radius/n_rho.
pub fn build_polar_grid(
    metric: &dyn ConformalMetric,
    center: Point,
    radius: f64,
    n_rho: usize,
    n_theta: usize,
) -> Result<PolarGrid> {
    let delta = metric.delta();
    if !(radius > 0.0 && radius <= 2.0 * delta * (1.0 + 1e-12)) {
        return Err(Error::Domain(format!("polar radius {radius} must lie in (0, 2 delta]")));
    }
    if n_rho == 0 || n_theta == 0 {
        return Err(Error::Domain("polar grid needs at least one ring and one ray".into()));
    }
    if !metric.contains(center) {
        return Err(Error::OutOfDomain { x: center.re, y: center.im });
    }
    let ring = radius / n_rho as f64;
    let sub = step_count(ring, delta / DEFAULT_STEPS_PER_DELTA);
    let h = ring / sub as f64;
    let rho: Vec<f64> = (1..=n_rho).map(|k| k as f64 * ring).collect();
    let theta: Vec<f64> = (0..n_theta).map(|j| 2.0 * PI * j as f64 / n_theta as f64).collect();

    let rays: Vec<Vec<GeodesicState>> = theta
        .par_iter()
        .map(|&th| -> Result<Vec<GeodesicState>> {
            let mut state = GeodesicState::new(center, th);
            let mut out = Vec::with_capacity(n_rho);
            for k in 0..n_rho {
                for i in 0..sub {
                    state = rk4_step(metric, &state, h);
                    let s = k as f64 * ring + (i + 1) as f64 * h;
                    if !metric.contains(state.position) {
                        return Err(Error::PathExitsDomain { arc_length: s });
                    }
                    if state.jacobi <= 0.0 {
                        return Err(Error::FocalPoint { rho: s, theta: th });
                    }
                }
                out.push(state);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let states = rays.into_iter().flatten();
    let (mut positions, mut jacobian, mut laplacian_r) = (Vec::new(), Vec::new(), Vec::new());
    for s in states {
        positions.push(s.position);
        jacobian.push(s.jacobi);
        laplacian_r.push(s.jacobi_rate / s.jacobi);
    }
    Ok(PolarGrid { center, rho, theta, step: h, positions, jacobian, laplacian_r })
}

/// Checks sin(ρ√κ)/√κ ≤ φ ≤ sinh(ρ√κ)/√κ and √κ·cot(ρ√κ) ≤ Δ_M r ≤ √κ·coth(ρ√κ)
/// at every node. Each record carries the worst signed excess over all nodes.
pub fn check_comparisons(grid: &PolarGrid, kappa: f64) -> Result<Vec<VerificationRecord>> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::Domain(format!("kappa must be positive, got {kappa}")));
    }
    let sk = kappa.sqrt();
    let tol = 1e-6 + 10.0 * grid.step * grid.step;
    let n = grid.rho.len();
    let mut jac_low = f64::INFINITY;
    let mut jac_high = f64::NEG_INFINITY;
    let mut lap_low = f64::INFINITY;
    let mut lap_high = f64::NEG_INFINITY;
    for (k, (&phi, &lap)) in grid.jacobian.iter().zip(&grid.laplacian_r).enumerate() {
        let x = grid.rho[k % n] * sk;
        jac_low = jac_low.min(phi - x.sin() / sk);
        jac_high = jac_high.max(phi - x.sinh() / sk);
        lap_low = lap_low.min(lap - sk / x.tan());
        lap_high = lap_high.max(lap - sk / x.tanh());
    }
    Ok(vec![
        VerificationRecord::lower("jacobian above sin envelope", jac_low, 0.0, tol, "phi >= sin(rho sqrt k)/sqrt k"),
        VerificationRecord::upper("jacobian below sinh envelope", jac_high, 0.0, tol, "phi <= sinh(rho sqrt k)/sqrt k"),
        VerificationRecord::lower("distance laplacian above cot", lap_low, 0.0, tol, "lap r >= sqrt k cot(rho sqrt k)"),
        VerificationRecord::upper("distance laplacian below coth", lap_high, 0.0, tol, "lap r <= sqrt k coth(rho sqrt k)"),
    ])
}
