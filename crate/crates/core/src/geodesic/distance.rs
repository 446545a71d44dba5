use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;

use super::integrator::{rk4_step, GeodesicState};
use crate::error::{Error, Result};
use crate::metric::{ConformalMetric, Point};

/// Lattice cells per domain radius for the seed graph.
const SEED_CELLS: usize = 40;
/// Steps per δ used when no step is given.
pub const DEFAULT_STEPS_PER_DELTA: f64 = 256.0;
const MAX_ITERATIONS: usize = 200;

/// Minimizing geodesic between two points, as found by shooting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicSolution {
    pub length: f64,
    pub initial_heading: f64,
    pub final_heading: f64,
    pub iterations: usize,
}

/// Where a shot ray passes `q`: arc length at the foot point and signed cross-track offset.
#[derive(Debug, Clone, Copy)]
struct Approach {
    arc_length: f64,
    offset: f64,
    heading: f64,
}

#[derive(Debug)]
struct SeedLattice {
    spacing: f64,
    half: i64,
    nodes: Vec<Option<Point>>,
}

#[derive(Clone, Copy, PartialEq)]
struct Queued(f64, usize);

impl Eq for Queued {}

impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl SeedLattice {
    fn new(metric: &dyn ConformalMetric) -> Self {
        let r = 0.98 * metric.domain_radius();
        let spacing = metric.domain_radius() / SEED_CELLS as f64;
        let half = SEED_CELLS as i64;
        let side = 2 * half + 1;
        let mut nodes = Vec::with_capacity((side * side) as usize);
        for j in -half..=half {
            for i in -half..=half {
                let p = Complex64::new(i as f64 * spacing, j as f64 * spacing);
                nodes.push((p.norm() < r).then_some(p));
            }
        }
        Self { spacing, half, nodes }
    }

    fn index(&self, i: i64, j: i64) -> Option<usize> {
        if i.abs() > self.half || j.abs() > self.half {
            return None;
        }
        let side = 2 * self.half + 1;
        let k = ((j + self.half) * side + (i + self.half)) as usize;
        self.nodes[k].map(|_| k)
    }

    fn coords(&self, k: usize) -> (i64, i64) {
        let side = 2 * self.half + 1;
        ((k as i64 % side) - self.half, (k as i64 / side) - self.half)
    }

    fn nearest(&self, p: Point) -> Option<usize> {
        let i = (p.re / self.spacing).round() as i64;
        let j = (p.im / self.spacing).round() as i64;
        self.index(i, j)
    }

    /// Chart points along the cheapest 8-connected lattice path from `a` to `b`.
    fn path(&self, metric: &dyn ConformalMetric, a: usize, b: usize) -> Option<Vec<Point>> {
        let mut dist = vec![f64::INFINITY; self.nodes.len()];
        let mut prev = vec![usize::MAX; self.nodes.len()];
        let mut heap = BinaryHeap::new();
        dist[a] = 0.0;
        heap.push(Queued(0.0, a));
        while let Some(Queued(d, k)) = heap.pop() {
            if k == b {
                break;
            }
            if d > dist[k] {
                continue;
            }
            let (i, j) = self.coords(k);
            let pk = self.nodes[k].unwrap();
            for (di, dj) in [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)] {
                let Some(n) = self.index(i + di, j + dj) else { continue };
                let pn = self.nodes[n].unwrap();
                let w = metric.factor(0.5 * (pk + pn)).sqrt() * (pn - pk).norm();
                if d + w < dist[n] {
                    dist[n] = d + w;
                    prev[n] = k;
                    heap.push(Queued(d + w, n));
                }
            }
        }
        if !dist[b].is_finite() {
            return None;
        }
        let mut out = vec![self.nodes[b].unwrap()];
        let mut k = b;
        while k != a {
            k = prev[k];
            out.push(self.nodes[k].unwrap());
        }
        out.reverse();
        Some(out)
    }
}

/// Two-point geodesic distance by shooting on the heading, seeded from a lattice path.
#[derive(Debug, Clone)]
pub struct DistanceSolver {
    metric: Arc<dyn ConformalMetric>,
    step: f64,
    lattice: Arc<OnceLock<SeedLattice>>,
}

fn wrap_angle(a: f64) -> f64 {
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

impl DistanceSolver {
    /// Solver with the default arc-length step δ/256.
    pub fn new(metric: Arc<dyn ConformalMetric>) -> Self {
        let step = metric.delta() / DEFAULT_STEPS_PER_DELTA;
        Self::with_step(metric, step)
    }

    pub fn with_step(metric: Arc<dyn ConformalMetric>, step: f64) -> Self {
        Self { metric, step, lattice: Arc::new(OnceLock::new()) }
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn metric(&self) -> &Arc<dyn ConformalMetric> {
        &self.metric
    }

    pub fn distance(&self, p: Point, q: Point) -> Result<f64> {
        Ok(self.solve(p, q)?.length)
    }

    /// Shortest geodesic from `p` to `q`, with the initial heading taken from a lattice path.
    pub fn solve(&self, p: Point, q: Point) -> Result<GeodesicSolution> {
        self.check_points(p, q)?;
        if p == q {
            return Ok(GeodesicSolution { length: 0.0, initial_heading: 0.0, final_heading: 0.0, iterations: 0 });
        }
        let chord = (q - p).arg();
        let seed = self.lattice_heading(p, q).unwrap_or(chord);
        match self.solve_from_heading(p, q, seed) {
            Ok(s) => Ok(s),
            Err(e) if seed != chord => self.solve_from_heading(p, q, chord).map_err(|_| e),
            Err(e) => Err(e),
        }
    }

    /// Shortest geodesic from `p` to `q`, starting the heading search at `seed`.
    pub fn solve_from_heading(&self, p: Point, q: Point, seed: f64) -> Result<GeodesicSolution> {
        self.check_points(p, q)?;
        if p == q {
            return Ok(GeodesicSolution { length: 0.0, initial_heading: seed, final_heading: seed, iterations: 0 });
        }
        let scale = (q - p).norm();
        let max_len = self.max_length(p, q);
        let eval = |a: f64| self.approach(p, a, q, max_len);
        let tol = 1e-13 * (1.0 + scale);
        let mut iterations = 1;
        let a0 = seed;
        let c0 = eval(a0)?.ok_or_else(|| no_conv(iterations, "seed heading never reaches the target"))?;
        if c0.offset.abs() <= tol {
            return Ok(finish(c0, a0, iterations));
        }
        // The offset decreases as the heading turns counterclockwise, so try that side
        // first, then widen in both directions until the sign flips.
        let mut bracket = None;
        let mut width = 1e-3 + (c0.offset.abs() / scale).min(0.5);
        let toward = c0.offset.signum();
        while bracket.is_none() && width < FRAC_PI_2 {
            for a in [a0 + toward * width, a0 - toward * width] {
                iterations += 1;
                if let Some(c) = eval(a)? {
                    if c.offset.abs() <= tol {
                        return Ok(finish(c, a, iterations));
                    }
                    if c.offset.signum() != c0.offset.signum() {
                        bracket = Some((a, c));
                        break;
                    }
                }
            }
            width *= 2.0;
        }
        let (a1, c1) = bracket.ok_or_else(|| no_conv(iterations, "could not bracket the initial heading"))?;
        // Illinois-accelerated regula falsi on the heading.
        let (mut lo, mut flo) = (a0, c0.offset);
        let (mut hi, mut fhi) = (a1, c1.offset);
        let mut best = if c0.offset.abs() < c1.offset.abs() { (a0, c0) } else { (a1, c1) };
        let mut side = 0i8;
        while iterations < MAX_ITERATIONS {
            let mut a = (lo * fhi - hi * flo) / (fhi - flo);
            if !(a - lo.min(hi) > 0.0 && hi.max(lo) - a > 0.0) {
                a = 0.5 * (lo + hi);
            }
            iterations += 1;
            let c = eval(a)?.ok_or_else(|| no_conv(iterations, "heading inside bracket misses target"))?;
            if c.offset.abs() < best.1.offset.abs() {
                best = (a, c);
            }
            if c.offset.abs() <= tol || (hi - lo).abs() < 1e-15 {
                return Ok(finish(best.1, best.0, iterations));
            }
            if c.offset.signum() == flo.signum() {
                lo = a;
                flo = c.offset;
                if side == -1 {
                    fhi *= 0.5;
                }
                side = -1;
            } else {
                hi = a;
                fhi = c.offset;
                if side == 1 {
                    flo *= 0.5;
                }
                side = 1;
            }
        }
        Err(no_conv(iterations, &format!("residual offset {:.3e}", best.1.offset)))
    }

    fn check_points(&self, p: Point, q: Point) -> Result<()> {
        for z in [p, q] {
            if !self.metric.contains(z) || !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::OutOfDomain { x: z.re, y: z.im });
            }
        }
        Ok(())
    }

    /// A generous cap on the arc length of any candidate ray.
    fn max_length(&self, p: Point, q: Point) -> f64 {
        let m = &self.metric;
        let samples = 16;
        let chord: f64 = (0..samples)
            .map(|k| {
                let t = (k as f64 + 0.5) / samples as f64;
                m.factor(p + (q - p) * t).sqrt()
            })
            .sum::<f64>()
            * (q - p).norm()
            / samples as f64;
        3.0 * chord + 10.0 * self.step
    }

    fn lattice_heading(&self, p: Point, q: Point) -> Option<f64> {
        let lattice = self.lattice.get_or_init(|| SeedLattice::new(self.metric.as_ref()));
        let (a, b) = (lattice.nearest(p)?, lattice.nearest(q)?);
        if a == b {
            return None;
        }
        let path = lattice.path(self.metric.as_ref(), a, b)?;
        if path.len() < 3 {
            return None;
        }
        let target = path[(path.len() / 3).max(1)];
        let v = target - p;
        (v.norm() > 0.0).then(|| v.arg())
    }

    /// Marches from `p` along heading `a` until the foot point of `q` is passed.
    fn approach(&self, p: Point, a: f64, q: Point, max_len: f64) -> Result<Option<Approach>> {
        let m = self.metric.as_ref();
        let along = |s: &GeodesicState| ((s.position - q).conj() * s.tangent()).re;
        let mut state = GeodesicState::new(p, a);
        let mut f0 = along(&state);
        if f0 >= 0.0 {
            return Ok(None);
        }
        let mut s = 0.0;
        while s < max_len {
            let next = rk4_step(m, &state, self.step);
            if !m.contains(next.position) || !next.position.re.is_finite() {
                return Ok(None);
            }
            let f1 = along(&next);
            if f1 >= 0.0 {
                let (tau, foot) = refine_crossing(|t| rk4_step(m, &state, t), along, f0, f1, self.step);
                let d = q - foot.position;
                let t = foot.tangent();
                return Ok(Some(Approach {
                    arc_length: s + tau,
                    offset: t.re * d.im - t.im * d.re,
                    heading: foot.heading,
                }));
            }
            state = next;
            f0 = f1;
            s += self.step;
        }
        Ok(None)
    }
}

/// Root of the along-track coordinate inside one step, re-integrating with partial steps.
fn refine_crossing<S, A>(step: S, along: A, f0: f64, f1: f64, h: f64) -> (f64, GeodesicState)
where
    S: Fn(f64) -> GeodesicState,
    A: Fn(&GeodesicState) -> f64,
{
    let (mut lo, mut flo, mut hi, mut fhi) = (0.0, f0, h, f1);
    let mut best = (h, step(h), f1);
    let mut side = 0i8;
    for _ in 0..60 {
        let mut t = (lo * fhi - hi * flo) / (fhi - flo);
        if !(t > lo && t < hi) {
            t = 0.5 * (lo + hi);
        }
        let st = step(t);
        let f = along(&st);
        if f.abs() < best.2.abs() {
            best = (t, st, f);
        }
        if f.abs() < 1e-16 || hi - lo < 1e-16 * h.max(1.0) {
            break;
        }
        if f < 0.0 {
            lo = t;
            flo = f;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = t;
            fhi = f;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
    }
    (best.0, best.1)
}

fn finish(c: Approach, heading: f64, iterations: usize) -> GeodesicSolution {
    GeodesicSolution {
        length: c.arc_length,
        initial_heading: wrap_angle(heading),
        final_heading: wrap_angle(c.heading),
        iterations,
    }
}

fn no_conv(iterations: usize, detail: &str) -> Error {
    Error::NoConvergence { iterations, detail: detail.to_string() }
}

/// Geodesic distance with a default solver.
pub fn distance(metric: Arc<dyn ConformalMetric>, p: Point, q: Point) -> Result<f64> {
    DistanceSolver::new(metric).distance(p, q)
}

/// Unsigned angle between two headings, in [0, π].
pub fn heading_gap(a: f64, b: f64) -> f64 {
    wrap_angle(a - b).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{make_perturbed, GaussianBump, HyperbolicModel, SphereModel};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_point(rng: &mut ChaCha8Rng, r: f64) -> Point {
        Complex64::from_polar(r * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..2.0 * PI))
    }

    #[test]
    fn flat_distance_is_scaled_euclidean() {
        let m = crate::metric::model_metric(crate::metric::ModelKind::Flat, 0.0, 0.7).unwrap();
        let s = DistanceSolver::new(m);
        let (p, q) = (Complex64::new(-0.3, 0.2), Complex64::new(0.5, -0.6));
        assert!((s.distance(p, q).unwrap() - 0.7 * (p - q).norm()).abs() < 1e-12);
        assert_eq!(s.distance(p, p).unwrap(), 0.0);
    }

    #[test]
    fn model_distances_match_closed_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let sphere = Arc::new(SphereModel::new(1.0, 1.0).unwrap());
        let hyper = Arc::new(HyperbolicModel::new(1.0, 1.0).unwrap());
        let ss = DistanceSolver::new(sphere.clone());
        let hs = DistanceSolver::new(hyper.clone());
        for _ in 0..40 {
            let (p, q) = (random_point(&mut rng, 1.0), random_point(&mut rng, 1.0));
            let d = ss.distance(p, q).unwrap();
            let e = sphere.closed_form_distance(p, q);
            assert!((d - e).abs() <= 1e-6 * e, "sphere {d} vs {e}");
            let d = hs.distance(p, q).unwrap();
            let e = hyper.closed_form_distance(p, q);
            assert!((d - e).abs() <= 1e-6 * e, "hyperbolic {d} vs {e}");
        }
    }

    #[test]
    fn symmetric_on_perturbed_metric() {
        let m = make_perturbed(1.0, 0.1, Arc::new(GaussianBump)).unwrap();
        let s = DistanceSolver::new(m);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let (p, q) = (random_point(&mut rng, 1.0), random_point(&mut rng, 1.0));
            let a = s.distance(p, q).unwrap();
            let b = s.distance(q, p).unwrap();
            assert!((a - b).abs() <= 1e-8, "{a} {b}");
        }
    }

    #[test]
    fn points_outside_are_rejected() {
        let m = crate::metric::model_metric(crate::metric::ModelKind::Flat, 0.0, 1.0).unwrap();
        let s = DistanceSolver::new(m);
        assert!(matches!(
            s.distance(Complex64::new(0.0, 0.0), Complex64::new(9.0, 0.0)),
            Err(Error::OutOfDomain { .. })
        ));
    }
}
