use std::f64::consts::PI;

use super::distance::{heading_gap, DistanceSolver};
use crate::error::{Error, Result};
use crate::metric::Point;
use crate::report::VerificationRecord;

/// A geodesic triangle pqr compared with the hinge of the same sides and angle in S_κ.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleComparison {
    /// d(p, q), d(p, r), d(q, r)
    pub sides: [f64; 3],
    /// Angle at p between the geodesics towards q and r.
    pub angle: f64,
    /// Third side of the model hinge.
    pub model_side: f64,
    /// d(q, r) − model side.
    pub margin: f64,
    pub record: VerificationRecord,
}

/// Side opposite the angle `gamma` in the sphere of curvature κ with adjacent sides a, b.
///
/// Uses sin²(c√κ/2) = sin²((a − b)√κ/2) + sin(a√κ)·sin(b√κ)·sin²(γ/2), which stays
/// accurate for thin triangles where the law of cosines cancels.
pub fn model_hinge_side(a: f64, b: f64, gamma: f64, kappa: f64) -> f64 {
    let sk = kappa.sqrt();
    let d = (0.5 * (a - b) * sk).sin();
    let g = (0.5 * gamma).sin();
    let s2 = d * d + (a * sk).sin() * (b * sk).sin() * g * g;
    2.0 * s2.clamp(0.0, 1.0).sqrt().asin() / sk
}

/// Checks d(q, r) ≥ the model hinge side, with tolerance 1e-6 + 10·step².
pub fn triangle_comparison(
    solver: &DistanceSolver,
    p: Point,
    q: Point,
    r: Point,
    kappa: f64,
) -> Result<TriangleComparison> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::Domain(format!("kappa must be positive, got {kappa}")));
    }
    let min = 10.0 * solver.step();
    let pq = solver.solve(p, q)?;
    let pr = solver.solve(p, r)?;
    let c = solver.distance(q, r)?;
    let sides = [pq.length, pr.length, c];
    if let Some(&side) = sides.iter().find(|&&s| s < min) {
        return Err(Error::DegenerateTriangle { side, min });
    }
    let perimeter: f64 = sides.iter().sum();
    if perimeter >= 2.0 * PI / kappa.sqrt() {
        return Err(Error::Hypothesis(format!(
            "triangle perimeter {perimeter:.6} is not below 2 pi / sqrt(kappa)"
        )));
    }
    // Conformal metric: the Riemannian angle equals the chart angle.
    let angle = heading_gap(pq.initial_heading, pr.initial_heading);
    let model_side = model_hinge_side(pq.length, pr.length, angle, kappa);
    let tol = 1e-6 + 10.0 * solver.step() * solver.step();
    let record = VerificationRecord::lower(
        "triangle side vs model hinge",
        c,
        model_side,
        tol,
        "d(q,r) >= model side with equal hinge",
    );
    Ok(TriangleComparison { sides, angle, model_side, margin: c - model_side, record })
}
