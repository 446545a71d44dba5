use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{sup_log_factor, tolerance};
use crate::bounds::{corollary_bound, distance_ratio_bounds, CurvatureBudget, RatioBounds};
use crate::error::{Error, Result};
use crate::geodesic::DistanceSolver;
use crate::metric::ConformalMetric;
use crate::report::VerificationRecord;
use crate::uniformize::{DiscMesh, IsothermalChart, NodeKind};

/// Pairs closer than this many mesh spacings are rejected.
pub const MIN_PAIR_SEPARATION: f64 = 5.0;
/// Chart separation of the local pairs, in mesh spacings.
pub const LOCAL_PAIR_RANGE: (f64, f64) = (5.0, 10.0);

/// Seeded pairs of interior nodes, alternating between uniformly drawn pairs and local
/// pairs a few cells apart. The sequence for `n` pairs is a prefix of the one for
/// any larger `n` with the same seed.
pub fn sample_interior_pairs(mesh: &DiscMesh, n_pairs: usize, seed: u64) -> Result<Vec<(usize, usize)>> {
    let interior: Vec<usize> = (0..mesh.len()).filter(|&k| mesh.kinds[k] == NodeKind::Interior).collect();
    if interior.len() < 2 {
        return Err(Error::ResolutionTooCoarse("fewer than two interior nodes".into()));
    }
    let min_sep = MIN_PAIR_SEPARATION * mesh.h;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n_pairs);
    let mut attempts = 0usize;
    while out.len() < n_pairs {
        attempts += 1;
        if attempts > 1000 * n_pairs.max(1) {
            return Err(Error::ResolutionTooCoarse(format!(
                "could not draw {n_pairs} pairs at least {min_sep} apart"
            )));
        }
        let a = interior[rng.gen_range(0..interior.len())];
        let b = if out.len() % 2 == 0 {
            interior[rng.gen_range(0..interior.len())]
        } else {
            let r = rng.gen_range(LOCAL_PAIR_RANGE.0..=LOCAL_PAIR_RANGE.1) * mesh.h;
            let theta = rng.gen_range(0.0..2.0 * PI);
            match mesh.nearest_interior(mesh.positions[a] + Complex64::from_polar(r, theta)) {
                Some(b) => b,
                None => continue,
            }
        };
        if (mesh.positions[a] - mesh.positions[b]).norm() >= min_sep {
            out.push((a, b));
        }
    }
    Ok(out)
}

/// Distance ratios d_M(p, q)/|z(p) − z(q)| over sampled pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct PairRatios {
    pub pairs: Vec<(usize, usize)>,
    /// One entry per pair; `None` where the distance solver failed.
    pub ratios: Vec<Option<f64>>,
}

impl PairRatios {
    pub fn valid(&self) -> impl Iterator<Item = f64> + '_ {
        self.ratios.iter().flatten().copied()
    }

    pub fn skipped(&self) -> usize {
        self.ratios.iter().filter(|r| r.is_none()).count()
    }

    /// Extremes over the first `n` pairs.
    pub fn extremes(&self, n: usize) -> Option<RatioBounds> {
        let (lo, hi) = self.ratios[..n.min(self.ratios.len())]
            .iter()
            .flatten()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| (lo.min(r), hi.max(r)));
        (lo <= hi).then(|| RatioBounds::new(lo, hi))
    }
}

pub fn pair_ratios(
    chart: &IsothermalChart,
    metric: Arc<dyn ConformalMetric>,
    n_pairs: usize,
    seed: u64,
) -> Result<PairRatios> {
    if n_pairs == 0 {
        return Err(Error::Domain("at least one pair is needed".into()));
    }
    let pairs = sample_interior_pairs(&chart.mesh, n_pairs, seed)?;
    let solver = DistanceSolver::new(metric);
    let pos = &chart.mesh.positions;
    let ratios = pairs
        .par_iter()
        .map(|&(a, b)| {
            let d = solver.distance(pos[a], pos[b]).ok()?;
            Some(d / (chart.map_z[a] - chart.map_z[b]).norm())
        })
        .collect();
    Ok(PairRatios { pairs, ratios })
}

/// Smallest and largest d_M/|Δz| over `n_pairs` seeded interior pairs.
pub fn bilipschitz_ratio(
    chart: &IsothermalChart,
    metric: Arc<dyn ConformalMetric>,
    n_pairs: usize,
    seed: u64,
) -> Result<RatioBounds> {
    let r = pair_ratios(chart, metric, n_pairs, seed)?;
    r.extremes(n_pairs).ok_or_else(|| Error::Solver("every sampled pair failed".into()))
}

/// log of the largest over the smallest pairwise scale |Δz|/d_M.
pub fn milnor_distortion(
    chart: &IsothermalChart,
    metric: Arc<dyn ConformalMetric>,
    n_pairs: usize,
    seed: u64,
) -> Result<f64> {
    let b = bilipschitz_ratio(chart, metric, n_pairs, seed)?;
    Ok((b.upper / b.lower).ln())
}

fn distortion_of(b: &RatioBounds) -> f64 {
    (b.upper / b.lower).ln()
}

/// Pairwise checks: ratio extremes against √φ, the interior distance-ratio bounds for
/// w = z/δ, the simplified exponential bounds when δ²κ < π²/8, and the distortion
/// against the factor range.
pub fn verify_pairs(
    chart: &IsothermalChart,
    ratios: &PairRatios,
    budget: &CurvatureBudget,
) -> Result<Vec<VerificationRecord>> {
    let tol = tolerance(chart.h());
    let b = ratios
        .extremes(ratios.ratios.len())
        .ok_or_else(|| Error::Solver("every sampled pair failed".into()))?;
    let (phi_lo, phi_hi) = chart
        .factor_phi
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &p| (lo.min(p), hi.max(p)));
    let delta = chart.delta;
    let w_bounds = distance_ratio_bounds(budget);
    let mut out = vec![
        VerificationRecord::lower("pair_ratio_vs_factor_min", b.lower, phi_lo.sqrt(), tol, "ratio extremes lie in [sqrt(min phi), sqrt(max phi)]"),
        VerificationRecord::upper("pair_ratio_vs_factor_max", b.upper, phi_hi.sqrt(), tol, "ratio extremes lie in [sqrt(min phi), sqrt(max phi)]"),
        VerificationRecord::lower("interior_distance_ratio_lower", b.lower * delta, w_bounds.lower, tol, "d_M(p,q)/|w(p)-w(q)| >= 2 sin(x)/(pi sqrt(k) cosh(x))"),
        VerificationRecord::upper("interior_distance_ratio_upper", b.upper * delta, w_bounds.upper, tol, "d_M(p,q)/|w(p)-w(q)| <= pi sinh(x) tan(x)/(2 delta k)"),
    ];
    if let Ok((_, exp_bounds)) = corollary_bound(budget) {
        out.push(VerificationRecord::lower("pair_ratio_exponential_lower", b.lower, exp_bounds.lower, tol, "d_M/|dz| >= exp(-4 delta^2 k)"));
        out.push(VerificationRecord::upper("pair_ratio_exponential_upper", b.upper, exp_bounds.upper, tol, "d_M/|dz| <= exp(4 delta^2 k)"));
    }
    out.push(VerificationRecord::upper(
        "distortion_vs_log_factor",
        distortion_of(&b),
        2.0 * sup_log_factor(chart).value,
        tol,
        "pairwise distortion <= 2 sup|log phi|",
    ));
    Ok(out)
}
