use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{tolerance, MIN_PAIR_SEPARATION};
use crate::bounds::{
    angle_distance_bound, arc_ratio_bounds, barrier_constants, barrier_hyperbolic, barrier_spherical,
    boundary_distance_ratio_bounds, CurvatureBudget,
};
use crate::error::{Error, Result};
use crate::geodesic::{heading_gap, DistanceSolver};
use crate::metric::ConformalMetric;
use crate::report::VerificationRecord;
use crate::uniformize::{IsothermalChart, NodeKind};

/// Signed gaps of the Green's function sandwich at the sampled interior points.
///
/// `lower` is G minus the hyperbolic barrier (≥ 0), `upper` is the spherical barrier
/// minus G (≥ 0). On the sphere `upper` vanishes, on the hyperbolic plane `lower` does.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierGaps {
    pub lower_min: f64,
    pub lower_max: f64,
    pub upper_min: f64,
    pub upper_max: f64,
    pub interior_samples: usize,
    pub boundary_pairs: usize,
    /// Boundary pairs dropped because the distance solver failed.
    pub skipped_pairs: usize,
}

impl BarrierGaps {
    /// Largest deviation from equality on the spherical side.
    pub fn spherical_defect(&self) -> f64 {
        self.upper_min.abs().max(self.upper_max.abs())
    }

    pub fn hyperbolic_defect(&self) -> f64 {
        self.lower_min.abs().max(self.lower_max.abs())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarrierOutcome {
    pub records: Vec<VerificationRecord>,
    pub gaps: BarrierGaps,
}

struct BoundaryPair {
    distance: f64,
    chord: f64,
    circle_arc: f64,
    boundary_arc: f64,
    angle: f64,
    hyperbolic: f64,
    spherical: f64,
}

fn extremes(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Barrier and boundary-ratio checks on sampled points of an assembled chart.
///
/// Interior points test H + log tanh(x/2) ≤ G ≤ S + log tan(x/2) with barriers
/// centred at p₀. Boundary pairs test the chord barriers with constants C_h, C_s, the
/// boundary distance ratio, the angle-to-distance ratio, and the arc-length ratios.
pub fn verify_barriers(
    chart: &IsothermalChart,
    metric: Arc<dyn ConformalMetric>,
    budget: &CurvatureBudget,
    n_boundary: usize,
    n_interior: usize,
    seed: u64,
) -> Result<BarrierOutcome> {
    let mesh = &chart.mesh;
    let delta = chart.delta;
    let kappa = budget.kappa();
    let x = budget.angle();
    let tol = tolerance(chart.h());
    let solver = DistanceSolver::new(metric.clone());
    let center = mesh.positions[chart.green.pole];
    let w = |k: usize| chart.map_z[k] / delta;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6261_7272_6965_7273);

    // Green's function sandwich at interior points.
    let interior: Vec<usize> = (0..mesh.len())
        .filter(|&k| mesh.kinds[k] == NodeKind::Interior && k != chart.green.pole)
        .collect();
    let samples: Vec<usize> = (0..n_interior.min(interior.len()))
        .map(|_| interior[rng.gen_range(0..interior.len())])
        .collect();
    let shift_h = (0.5 * x).tanh().ln();
    let shift_s = (0.5 * x).tan().ln();
    let gaps: Vec<(f64, f64)> = samples
        .par_iter()
        .map(|&k| {
            let p = mesh.positions[k];
            let r = solver.solve_from_heading(center, p, (p - center).arg())?.length;
            let g = chart.green.values[k];
            Ok((g - barrier_hyperbolic(r, kappa)? - shift_h, barrier_spherical(r, kappa)? + shift_s - g))
        })
        .collect::<Result<_>>()?;
    let (lower_min, lower_max) = extremes(gaps.iter().map(|g| g.0));
    let (upper_min, upper_max) = extremes(gaps.iter().map(|g| g.1));

    // Boundary pairs.
    let n_loop = mesh.boundary_loop.len();
    let (cum, total) = mesh.boundary_arc_lengths(metric.as_ref());
    let min_sep = MIN_PAIR_SEPARATION * chart.h();
    let mut pairs = Vec::with_capacity(n_boundary);
    let mut attempts = 0;
    while pairs.len() < n_boundary {
        attempts += 1;
        if attempts > 1000 * n_boundary.max(1) {
            return Err(Error::ResolutionTooCoarse("too few well-separated boundary pairs".into()));
        }
        let (i, j) = (rng.gen_range(0..n_loop), rng.gen_range(0..n_loop));
        let (a, b) = (mesh.boundary_loop[i], mesh.boundary_loop[j]);
        if (mesh.positions[a] - mesh.positions[b]).norm() >= min_sep {
            pairs.push((i, j));
        }
    }
    let mut used: Vec<usize> = pairs.iter().flat_map(|&(i, j)| [i, j]).collect();
    used.sort_unstable();
    used.dedup();
    let mut headings = vec![f64::NAN; n_loop];
    let solved: Vec<(usize, f64)> = used
        .par_iter()
        .map(|&i| {
            let q = mesh.positions[mesh.boundary_loop[i]];
            Ok((i, solver.solve_from_heading(center, q, (q - center).arg())?.initial_heading))
        })
        .collect::<Result<_>>()?;
    for (i, hd) in solved {
        headings[i] = hd;
    }
    let consts = barrier_constants(budget);
    let measured: Vec<Option<BoundaryPair>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (a, b) = (mesh.boundary_loop[i], mesh.boundary_loop[j]);
            let distance = solver.distance(mesh.positions[a], mesh.positions[b]).ok()?;
            let (wa, wb) = (w(a), w(b));
            let along = (cum[i] - cum[j]).abs();
            Some(BoundaryPair {
                distance,
                chord: (wa - wb).norm(),
                circle_arc: (wb / wa).arg().abs(),
                boundary_arc: along.min(total - along),
                angle: heading_gap(headings[i], headings[j]),
                hyperbolic: barrier_hyperbolic(distance, kappa).ok()?,
                spherical: barrier_spherical(distance, kappa).ok()?,
            })
        })
        .collect();
    let skipped_pairs = measured.iter().filter(|m| m.is_none()).count();
    let ok: Vec<&BoundaryPair> = measured.iter().flatten().collect();
    if ok.is_empty() {
        return Err(Error::Solver("every boundary pair failed".into()));
    }

    // −log|Δw| − H − C_h ≥ 0 and S + C_s + log|Δw| ≥ 0.
    let (chord_h, _) = extremes(ok.iter().map(|p| -p.chord.ln() - p.hyperbolic - consts.c_h));
    let (chord_s, _) = extremes(ok.iter().map(|p| p.spherical + consts.c_s + p.chord.ln()));
    let (ratio_lo, ratio_hi) = extremes(ok.iter().map(|p| p.distance / p.chord));
    let (_, angle_ratio) = extremes(ok.iter().map(|p| p.angle / p.distance));
    let (circle_lo, circle_hi) = extremes(ok.iter().map(|p| p.boundary_arc / p.circle_arc));
    let (angle_lo, angle_hi) = extremes(ok.iter().map(|p| p.boundary_arc / p.angle));
    let (chordal_lo, chordal_hi) = extremes(ok.iter().map(|p| p.circle_arc / p.chord));
    let ratio = boundary_distance_ratio_bounds(budget);
    let arc = arc_ratio_bounds(budget);

    let records = vec![
        VerificationRecord::lower("green_above_hyperbolic_barrier", lower_min, 0.0, tol, "G >= H_p0 + log tanh(x/2)"),
        VerificationRecord::upper("green_below_spherical_barrier", -upper_min, 0.0, tol, "G <= S_p0 + log tan(x/2)"),
        VerificationRecord::lower("chord_above_hyperbolic_barrier", chord_h, 0.0, tol, "-log|w(q)-w(q0)| >= H_q0(q) + C_h on the boundary"),
        VerificationRecord::lower("chord_below_spherical_barrier", chord_s, 0.0, tol, "-log|w(q)-w(q0)| <= S_q0(q) + C_s on the boundary"),
        VerificationRecord::lower("boundary_distance_ratio_lower", ratio_lo, ratio.lower, tol, "d_M/|dw| >= 2 delta sin(x)/(pi sinh(x)) on the boundary"),
        VerificationRecord::upper("boundary_distance_ratio_upper", ratio_hi, ratio.upper, tol, "d_M/|dw| <= pi sinh(x)/(2 sqrt(k)) on the boundary"),
        VerificationRecord::upper("angle_distance_ratio", angle_ratio, angle_distance_bound(delta)?, tol, "angle at p0 over d_M <= pi/(2 delta)"),
        VerificationRecord::lower("boundary_arc_circle_ratio_lower", circle_lo, arc.lower, tol, "boundary arc over circle arc >= sin(x)/sqrt(k)"),
        VerificationRecord::upper("boundary_arc_circle_ratio_upper", circle_hi, arc.upper, tol, "boundary arc over circle arc <= sinh(x)/sqrt(k)"),
        VerificationRecord::lower("boundary_arc_angle_ratio_lower", angle_lo, arc.lower, tol, "boundary arc over angle at p0 >= sin(x)/sqrt(k)"),
        VerificationRecord::upper("boundary_arc_angle_ratio_upper", angle_hi, arc.upper, tol, "boundary arc over angle at p0 <= sinh(x)/sqrt(k)"),
        VerificationRecord::lower("circle_arc_chord_ratio_lower", chordal_lo, 1.0, tol, "circle arc over chord >= 1"),
        VerificationRecord::upper("circle_arc_chord_ratio_upper", chordal_hi, FRAC_PI_2, tol, "circle arc over chord <= pi/2"),
    ];
    debug_assert!(ok.iter().all(|p| p.circle_arc <= PI + 1e-12));
    Ok(BarrierOutcome {
        records,
        gaps: BarrierGaps {
            lower_min,
            lower_max,
            upper_min,
            upper_max,
            interior_samples: samples.len(),
            boundary_pairs: ok.len(),
            skipped_pairs,
        },
    })
}
