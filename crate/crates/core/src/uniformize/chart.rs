use std::sync::Arc;

use num_complex::Complex64;

use super::conjugate::{harmonic_conjugate, ConjugateField};
use super::green::{solve_green, GreenField};
use super::mesh::{build_disc_mesh, DiscMesh};
use crate::error::{Error, Result};
use crate::metric::{ConformalMetric, MetricKind};

/// The conformal map z: B → δD with z(p₀) = 0, and its conformal factor φ.
#[derive(Debug, Clone)]
pub struct IsothermalChart {
    pub mesh: DiscMesh,
    pub delta: f64,
    pub declared_kappa: f64,
    pub metric: MetricKind,
    pub green: GreenField,
    pub conjugate: ConjugateField,
    /// z = δ·exp(−G + iH) per node.
    pub map_z: Vec<Complex64>,
    /// φ with g = φ|dz|² per node.
    pub factor_phi: Vec<f64>,
}

impl IsothermalChart {
    pub fn h(&self) -> f64 {
        self.mesh.h
    }

    pub fn len(&self) -> usize {
        self.mesh.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mesh.is_empty()
    }

    /// φ at the pole p₀.
    pub fn center_factor(&self) -> f64 {
        self.factor_phi[self.green.pole]
    }

    pub fn boundary_factors(&self) -> impl Iterator<Item = f64> + '_ {
        self.mesh.boundary_loop.iter().map(|&b| self.factor_phi[b])
    }
}

/// Combines the Green's function and its conjugate into z and φ.
///
/// φ = δ⁻²·λ₀·e^{2G}/|∇G|², evaluated as δ⁻²·λ₀·e^{2h}/|−ê + r∇h|² with r = |ζ − ζ₀|,
/// ê the unit radial vector and h the regular part, which stays finite at the pole.
pub fn assemble_chart(
    mesh: DiscMesh,
    metric: &dyn ConformalMetric,
    green: GreenField,
    conjugate: ConjugateField,
    delta: f64,
) -> Result<IsothermalChart> {
    let zp = mesh.positions[green.pole];
    let n = mesh.len();
    let mut map_z = Vec::with_capacity(n);
    let mut factor_phi = Vec::with_capacity(n);
    for k in 0..n {
        let p = mesh.positions[k];
        let v = p - zp;
        let r = v.norm();
        let h = green.regular[k];
        let lambda = metric.factor(p);
        if k == green.pole {
            map_z.push(Complex64::new(0.0, 0.0));
            factor_phi.push(lambda * (2.0 * h).exp() / (delta * delta));
            continue;
        }
        let e = v / r;
        let gh = green.gradient_regular[k];
        let w = Complex64::new(-e.re + r * gh[0], -e.im + r * gh[1]);
        if w.norm() / r < 1e-12 {
            return Err(Error::DegenerateGradient { x: p.re, y: p.im });
        }
        map_z.push(Complex64::from_polar(delta * r * (-h).exp(), conjugate.values[k]));
        factor_phi.push(lambda * (2.0 * h).exp() / (delta * delta * w.norm_sqr()));
    }
    Ok(IsothermalChart {
        delta,
        declared_kappa: metric.declared_kappa(),
        metric: metric.kind(),
        mesh,
        green,
        conjugate,
        map_z,
        factor_phi,
    })
}

/// Mesh, Green's function, conjugate, and chart in one call.
pub fn uniformize(metric: Arc<dyn ConformalMetric>, h: f64, seed: u64) -> Result<IsothermalChart> {
    let delta = metric.delta();
    let mesh = build_disc_mesh(metric.clone(), delta, h)?;
    let green = solve_green(&mesh)?;
    let conjugate = harmonic_conjugate(&mesh, &green, seed)?;
    assemble_chart(mesh, metric.as_ref(), green, conjugate, delta)
}
