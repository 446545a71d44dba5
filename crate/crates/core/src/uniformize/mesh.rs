use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geodesic::{build_polar_grid, DistanceSolver};
use crate::metric::{ConformalMetric, Point};

/// Fewest boundary nodes accepted for a mesh.
pub const MIN_BOUNDARY_NODES: usize = 64;
/// Nodes this many spacings from the approximate boundary get exact distances.
const BAND_WIDTH: f64 = 3.0;
/// Grid nodes closer than this fraction of a cell to the boundary are left out, so
/// boundary arms stay longer than about this fraction of h.
pub const NEAR_BOUNDARY_FRACTION: f64 = 0.02;
/// Longest boundary arm, in cells.
const MAX_ARM: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Interior,
    Boundary,
}

/// Neighbor of an interior node along one grid direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arm {
    pub node: usize,
    /// Chart distance to `node`; equals `h` unless `node` is a boundary crossing.
    pub length: f64,
}

/// Grid directions in arm order: +x, −x, +y, −y.
pub const DIRECTIONS: [(i32, i32); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

/// Discretized geodesic disc on a square background grid with spacing `h`.
///
/// Interior nodes come first, followed by the boundary nodes, which sit where grid
/// lines cross the level set d(p₀, ·) = δ.
#[derive(Debug, Clone)]
pub struct DiscMesh {
    pub h: f64,
    pub delta: f64,
    pub center: Point,
    pub positions: Vec<Point>,
    pub kinds: Vec<NodeKind>,
    /// d(p₀, ·): exact near the boundary, fast-marching elsewhere.
    pub distance_field: Vec<f64>,
    pub exact_distance: Vec<bool>,
    /// Boundary nodes in counterclockwise order.
    pub boundary_loop: Vec<usize>,
    /// Grid coordinates of interior nodes.
    pub grid: Vec<Option<(i32, i32)>>,
    /// Four arms per interior node, see [`DIRECTIONS`].
    pub arms: Vec<Option<[Arm; 4]>>,
    /// For boundary nodes: the interior node and direction of the crossed grid edge.
    pub anchors: Vec<Option<(usize, usize)>>,
    pub center_node: usize,
    lookup: HashMap<(i32, i32), usize>,
}

impl DiscMesh {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn interior_count(&self) -> usize {
        self.kinds.iter().filter(|k| **k == NodeKind::Interior).count()
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        self.kinds[node] == NodeKind::Boundary
    }

    /// Interior node at grid coordinates (i, j), if any.
    pub fn node_at(&self, i: i32, j: i32) -> Option<usize> {
        self.lookup.get(&(i, j)).copied()
    }

    /// Interior node nearest to `p`, if `p` rounds onto one.
    pub fn nearest_interior(&self, p: Point) -> Option<usize> {
        let q = (p - self.center) / self.h;
        self.node_at(q.re.round() as i32, q.im.round() as i32)
    }

    /// Boundary nodes within `radius` of boundary node `b`, walking along the loop.
    pub fn boundary_neighbors(&self, loop_pos: usize, radius: f64) -> Vec<usize> {
        let n = self.boundary_loop.len();
        let origin = self.positions[self.boundary_loop[loop_pos]];
        let mut out = Vec::new();
        for dir in [1isize, -1] {
            for k in 1..n / 2 {
                let idx = (loop_pos as isize + dir * k as isize).rem_euclid(n as isize) as usize;
                let node = self.boundary_loop[idx];
                if (self.positions[node] - origin).norm() > radius {
                    break;
                }
                out.push(node);
            }
        }
        out
    }

    /// Metric length of the boundary polygon, midpoint rule per edge, with cumulative
    /// arc length at each loop position.
    pub fn boundary_arc_lengths(&self, metric: &dyn ConformalMetric) -> (Vec<f64>, f64) {
        let n = self.boundary_loop.len();
        let mut cum = Vec::with_capacity(n);
        let mut total = 0.0;
        for k in 0..n {
            cum.push(total);
            let a = self.positions[self.boundary_loop[k]];
            let b = self.positions[self.boundary_loop[(k + 1) % n]];
            total += metric.factor(0.5 * (a + b)).sqrt() * (b - a).norm();
        }
        (cum, total)
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Trial(f64, usize);

impl Eq for Trial {}

impl Ord for Trial {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for Trial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// First-order fast marching for |∇T| = √λ₀ on a (2n+1)² grid centred at `center`.
fn fast_marching(metric: &dyn ConformalMetric, center: Point, h: f64, n: i32) -> Vec<f64> {
    let side = (2 * n + 1) as usize;
    let idx = |i: i32, j: i32| ((j + n) as usize) * side + (i + n) as usize;
    let pos = |i: i32, j: i32| center + Complex64::new(i as f64 * h, j as f64 * h);
    let mut t = vec![f64::INFINITY; side * side];
    let mut known = vec![false; side * side];
    let mut heap = BinaryHeap::new();
    // Seed a small neighbourhood with chord integrals.
    for j in -2..=2 {
        for i in -2..=2 {
            let p = pos(i, j);
            let m = 8;
            let len: f64 = (0..m)
                .map(|k| metric.factor(center + (p - center) * ((k as f64 + 0.5) / m as f64)).sqrt())
                .sum::<f64>()
                * (p - center).norm()
                / m as f64;
            t[idx(i, j)] = len;
            heap.push(Trial(len, idx(i, j)));
        }
    }
    while let Some(Trial(v, k)) = heap.pop() {
        if known[k] || v > t[k] {
            continue;
        }
        known[k] = true;
        let (i, j) = ((k % side) as i32 - n, (k / side) as i32 - n);
        for (di, dj) in DIRECTIONS {
            let (a, b) = (i + di, j + dj);
            if a.abs() > n || b.abs() > n {
                continue;
            }
            let kk = idx(a, b);
            let p = pos(a, b);
            if known[kk] || !metric.contains(p) {
                continue;
            }
            let get = |x: i32, y: i32| {
                if x.abs() > n || y.abs() > n {
                    f64::INFINITY
                } else {
                    let q = idx(x, y);
                    if known[q] { t[q] } else { f64::INFINITY }
                }
            };
            let tx = get(a - 1, b).min(get(a + 1, b));
            let ty = get(a, b - 1).min(get(a, b + 1));
            let f = metric.factor(p).sqrt() * h;
            let cand = if tx.is_finite() && ty.is_finite() && (tx - ty).abs() < f {
                0.5 * (tx + ty + (2.0 * f * f - (tx - ty) * (tx - ty)).sqrt())
            } else {
                tx.min(ty) + f
            };
            if cand < t[kk] {
                t[kk] = cand;
                heap.push(Trial(cand, kk));
            }
        }
    }
    t
}

/// Radius of the approximate boundary as a function of the chart angle about the centre.
struct StarProfile {
    angles: Vec<f64>,
    radii: Vec<f64>,
}

impl StarProfile {
    fn new(center: Point, ring: &[Point]) -> Result<Self> {
        let mut pts: Vec<(f64, f64)> = ring
            .iter()
            .map(|p| {
                let v = p - center;
                (v.arg().rem_euclid(2.0 * PI), v.norm())
            })
            .collect();
        // Rays were shot in increasing angle; the endpoints must wind once, in order.
        let turns = ring
            .iter()
            .zip(ring.iter().cycle().skip(1))
            .map(|(a, b)| ((b - center) / (a - center)).arg())
            .collect::<Vec<_>>();
        if turns.iter().any(|&d| d <= 0.0) || (turns.iter().sum::<f64>() - 2.0 * PI).abs() > 1e-6 {
            return Err(Error::Domain(
                "geodesic disc is not star-shaped about its centre in the background chart".into(),
            ));
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self {
            angles: pts.iter().map(|p| p.0).collect(),
            radii: pts.iter().map(|p| p.1).collect(),
        })
    }

    fn radius(&self, angle: f64) -> f64 {
        let a = angle.rem_euclid(2.0 * PI);
        let n = self.angles.len();
        let k = self.angles.partition_point(|&x| x <= a);
        let (i0, i1) = if k == 0 || k == n { (n - 1, 0) } else { (k - 1, k) };
        let (a0, mut a1) = (self.angles[i0], self.angles[i1]);
        let mut x = a;
        if a1 < a0 {
            a1 += 2.0 * PI;
            if x < a0 {
                x += 2.0 * PI;
            }
        }
        let w = if a1 > a0 { (x - a0) / (a1 - a0) } else { 0.0 };
        self.radii[i0] + w * (self.radii[i1] - self.radii[i0])
    }

    fn max_radius(&self) -> f64 {
        self.radii.iter().copied().fold(0.0, f64::max)
    }
}

/// Root in (0, MAX_ARM] of the level crossing d = δ along a grid line, from values at
/// s = 0, 1 and an optional third sample at s = −1 or s = 2.
fn crossing_fraction(d0: f64, d1: f64, third: Option<(f64, f64)>, delta: f64) -> f64 {
    let linear = ((delta - d0) / (d1 - d0)).clamp(1e-9, MAX_ARM);
    let Some((s2, d2)) = third else { return linear };
    // Newton form through (0, d0), (1, d1), (s2, d2).
    let f01 = d1 - d0;
    let f12 = (d2 - d1) / (s2 - 1.0);
    let c2 = (f12 - f01) / s2;
    // d(s) = d0 + f01 s + c2 s (s − 1)
    let (a, b, c) = (c2, f01 - c2, d0 - delta);
    if a.abs() < 1e-14 * (b.abs() + c.abs()) {
        return linear;
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return linear;
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let roots = [q / a, c / q];
    roots
        .into_iter()
        .filter(|r| r.is_finite() && *r > 0.0 && *r <= MAX_ARM)
        .min_by(|x, y| (x - linear).abs().total_cmp(&(y - linear).abs()))
        .unwrap_or(linear)
}

/// Illinois iteration for the root of f from the estimate `s`, given f(0) = f0 < 0 and
/// f(1) = f1. When f1 < 0 the bracket is pushed out towards `MAX_ARM`.
fn refine_crossing(f: impl Fn(f64) -> Result<f64>, f0: f64, f1: f64, s: f64) -> Result<f64> {
    let (mut a, mut fa, mut b, mut fb): (f64, f64, f64, f64) = (0.0, f0, 1.0, f1);
    while fb < 0.0 {
        if b >= MAX_ARM {
            return Err(Error::ResolutionTooCoarse("boundary crossing beyond the longest arm".into()));
        }
        (a, fa) = (b, fb);
        b = (b + 0.1).min(MAX_ARM);
        fb = f(b)?;
    }
    let mut x = if s > a && s < b { s } else { (a * fb - b * fa) / (fb - fa) };
    let mut side = 0;
    for _ in 0..40 {
        let fx = f(x)?;
        if fx == 0.0 || b - a < 1e-13 {
            break;
        }
        if fx < 0.0 {
            (a, fa) = (x, fx);
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            (b, fb) = (x, fx);
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
        let next = (a * fb - b * fa) / (fb - fa);
        if (next - x).abs() < 1e-13 {
            x = next;
            break;
        }
        x = next;
    }
    Ok(x)
}

fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let orient = |p: Point, q: Point, r: Point| ((q - p).conj() * (r - p)).im;
    let (o1, o2) = (orient(a, b, c), orient(a, b, d));
    let (o3, o4) = (orient(c, d, a), orient(c, d, b));
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

fn is_simple_polygon(pts: &[Point]) -> bool {
    let n = pts.len();
    for i in 0..n {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            if segments_cross(a, b, pts[j], pts[(j + 1) % n]) {
                return false;
            }
        }
    }
    true
}

/// Meshes the geodesic disc of radius `delta` about the background origin.
pub fn build_disc_mesh(metric: Arc<dyn ConformalMetric>, delta: f64, h: f64) -> Result<DiscMesh> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Domain(format!("mesh spacing must be positive, got {h}")));
    }
    if !(delta > 0.0 && delta <= 2.0 * metric.delta()) {
        return Err(Error::Domain(format!("disc radius {delta} out of range for this metric")));
    }
    let center = Complex64::new(0.0, 0.0);
    let m = metric.as_ref();

    // Approximate boundary from radial geodesics; also certifies no focal points.
    let n_rays = ((4.0 * PI / h).ceil() as usize).max(256);
    let polar = build_polar_grid(m, center, delta, 8, n_rays)?;
    let profile = StarProfile::new(center, &polar.outer_ring())?;
    let r_max = profile.max_radius();
    // Grid lines cross a circle of radius r about 8r/h times.
    if 8.0 * r_max / h < MIN_BOUNDARY_NODES as f64 {
        return Err(Error::ResolutionTooCoarse(format!(
            "spacing {h} too large for a disc of chart radius {r_max:.4}"
        )));
    }
    let n = (r_max / h).ceil() as i32 + BAND_WIDTH as i32 + 2;
    if (r_max + (BAND_WIDTH + 2.0) * h) >= metric.domain_radius() {
        return Err(Error::Domain("geodesic disc reaches the edge of the metric domain".into()));
    }
    let fmm = fast_marching(m, center, h, n);
    let side = (2 * n + 1) as usize;
    let gidx = |i: i32, j: i32| ((j + n) as usize) * side + (i + n) as usize;
    let gpos = |i: i32, j: i32| center + Complex64::new(i as f64 * h, j as f64 * h);

    // Exact distances in a band around the approximate boundary.
    let mut band = Vec::new();
    for j in -n..=n {
        for i in -n..=n {
            let p = gpos(i, j);
            let v = p - center;
            if (v.norm() - profile.radius(v.arg())).abs() <= BAND_WIDTH * h {
                band.push((i, j));
            }
        }
    }
    let solver = DistanceSolver::new(metric.clone());
    let exact: Vec<f64> = band
        .par_iter()
        .map(|&(i, j)| {
            let p = gpos(i, j);
            solver.solve_from_heading(center, p, (p - center).arg()).map(|s| s.length)
        })
        .collect::<Result<_>>()?;
    let mut exact_at = vec![f64::NAN; side * side];
    for (&(i, j), &d) in band.iter().zip(&exact) {
        exact_at[gidx(i, j)] = d;
    }
    let inside = |i: i32, j: i32| -> bool {
        if i.abs() > n || j.abs() > n {
            return false;
        }
        let e = exact_at[gidx(i, j)];
        if e.is_finite() {
            // Nodes almost on the boundary would give vanishing arms.
            e < delta - NEAR_BOUNDARY_FRACTION * h * m.factor(gpos(i, j)).sqrt()
        } else {
            let v = gpos(i, j) - center;
            v.norm() < profile.radius(v.arg())
        }
    };

    // Interior nodes, row-major.
    let mut positions = Vec::new();
    let mut grid = Vec::new();
    let mut distance_field = Vec::new();
    let mut exact_flags = Vec::new();
    let mut lookup = HashMap::new();
    for j in -n..=n {
        for i in -n..=n {
            if inside(i, j) {
                lookup.insert((i, j), positions.len());
                positions.push(gpos(i, j));
                grid.push(Some((i, j)));
                let e = exact_at[gidx(i, j)];
                distance_field.push(if e.is_finite() { e } else { fmm[gidx(i, j)] });
                exact_flags.push(e.is_finite());
            }
        }
    }
    let n_interior = positions.len();
    let center_node = *lookup.get(&(0, 0)).ok_or_else(|| Error::ResolutionTooCoarse("centre is not an interior node".into()))?;

    // Boundary crossings on grid edges leaving the interior, first estimated from the
    // band samples and then refined on exact distances.
    let mut crossings = Vec::new();
    for a in 0..n_interior {
        let (i, j) = grid[a].unwrap();
        for (dir, &(di, dj)) in DIRECTIONS.iter().enumerate() {
            let (bi, bj) = (i + di, j + dj);
            if lookup.contains_key(&(bi, bj)) {
                continue;
            }
            let d0 = exact_at[gidx(i, j)];
            let d1 = if bi.abs() <= n && bj.abs() <= n { exact_at[gidx(bi, bj)] } else { f64::NAN };
            if !(d0.is_finite() && d1.is_finite()) {
                return Err(Error::ResolutionTooCoarse(format!(
                    "boundary crossing near ({:.4}, {:.4}) lies outside the exact-distance band",
                    gpos(i, j).re,
                    gpos(i, j).im
                )));
            }
            let sample = |x: i32, y: i32| {
                (x.abs() <= n && y.abs() <= n).then(|| exact_at[gidx(x, y)]).filter(|v| v.is_finite())
            };
            let third = sample(i - di, j - dj)
                .map(|v| (-1.0, v))
                .or_else(|| sample(bi + di, bj + dj).map(|v| (2.0, v)));
            crossings.push((a, dir, d0, d1, crossing_fraction(d0, d1, third, delta)));
        }
    }
    let refined: Vec<f64> = crossings
        .par_iter()
        .map(|&(a, dir, d0, d1, s)| {
            let (i, j) = grid[a].unwrap();
            let (di, dj) = DIRECTIONS[dir];
            let step = Complex64::new(di as f64, dj as f64) * h;
            let dist = |s: f64| {
                let p = gpos(i, j) + step * s;
                solver.solve_from_heading(center, p, (p - center).arg()).map(|r| r.length - delta)
            };
            refine_crossing(dist, d0 - delta, d1 - delta, s)
        })
        .collect::<Result<_>>()?;

    let mut arms: Vec<Option<[Arm; 4]>> = (0..n_interior)
        .map(|a| {
            let (i, j) = grid[a].unwrap();
            let mut node_arms = [Arm { node: 0, length: h }; 4];
            for (dir, &(di, dj)) in DIRECTIONS.iter().enumerate() {
                if let Some(&b) = lookup.get(&(i + di, j + dj)) {
                    node_arms[dir] = Arm { node: b, length: h };
                }
            }
            Some(node_arms)
        })
        .collect();
    let mut anchors = vec![None; n_interior];
    let mut kinds = vec![NodeKind::Interior; n_interior];
    for (&(a, dir, ..), &s) in crossings.iter().zip(&refined) {
        let (di, dj) = DIRECTIONS[dir];
        let node = positions.len();
        positions.push(positions[a] + Complex64::new(di as f64, dj as f64) * (s * h));
        grid.push(None);
        distance_field.push(delta);
        exact_flags.push(true);
        kinds.push(NodeKind::Boundary);
        anchors.push(Some((a, dir)));
        arms[a].as_mut().unwrap()[dir] = Arm { node, length: s * h };
    }
    arms.resize(positions.len(), None);

    let mut boundary_loop: Vec<usize> = (n_interior..positions.len()).collect();
    boundary_loop.sort_by(|&a, &b| {
        let (pa, pb) = (positions[a] - center, positions[b] - center);
        pa.arg().rem_euclid(2.0 * PI).total_cmp(&pb.arg().rem_euclid(2.0 * PI))
    });
    if boundary_loop.len() < MIN_BOUNDARY_NODES {
        return Err(Error::ResolutionTooCoarse(format!(
            "only {} boundary nodes; at least {MIN_BOUNDARY_NODES} are needed",
            boundary_loop.len()
        )));
    }
    let polygon: Vec<Point> = boundary_loop.iter().map(|&b| positions[b]).collect();
    if !is_simple_polygon(&polygon) {
        return Err(Error::ResolutionTooCoarse("extracted boundary polygon self-intersects".into()));
    }

    Ok(DiscMesh {
        h,
        delta,
        center,
        positions,
        kinds,
        distance_field,
        exact_distance: exact_flags,
        boundary_loop,
        grid,
        arms,
        anchors,
        center_node,
        lookup,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{make_perturbed, model_metric, CosineBump, ModelKind};

    #[test]
    fn quadratic_crossing_is_exact_for_quadratics() {
        let d = |s: f64| 0.9 + 0.3 * s + 0.05 * s * s;
        let delta = d(0.37);
        let s = crossing_fraction(d(0.0), d(1.0), Some((-1.0, d(-1.0))), delta);
        assert!((s - 0.37).abs() < 1e-13);
        let s = crossing_fraction(d(0.0), d(1.0), Some((2.0, d(2.0))), delta);
        assert!((s - 0.37).abs() < 1e-13);
    }

    #[test]
    fn flat_boundary_is_unit_circle() {
        let m = model_metric(ModelKind::Flat, 0.0, 1.0).unwrap();
        let mesh = build_disc_mesh(m, 1.0, 0.05).unwrap();
        for &b in &mesh.boundary_loop {
            assert!((mesh.positions[b].norm() - 1.0).abs() < 1e-9);
        }
        assert!(mesh.boundary_loop.len() >= MIN_BOUNDARY_NODES);
        assert_eq!(mesh.positions[mesh.center_node], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn grid_nodes_on_the_boundary_keep_arms_long() {
        // (0.96, 0.28) lies exactly on the unit circle.
        let m = model_metric(ModelKind::Flat, 0.0, 1.0).unwrap();
        let mesh = build_disc_mesh(m, 1.0, 0.04).unwrap();
        let shortest = mesh.arms.iter().flatten().flatten().map(|a| a.length).fold(f64::INFINITY, f64::min);
        assert!(shortest > 0.5 * NEAR_BOUNDARY_FRACTION * mesh.h, "{shortest}");
        for &b in &mesh.boundary_loop {
            assert!((mesh.positions[b].norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn sphere_boundary_is_unit_circle() {
        let m = model_metric(ModelKind::Sphere, 1.0, 1.0).unwrap();
        let mesh = build_disc_mesh(m, 1.0, 0.05).unwrap();
        let worst = mesh
            .boundary_loop
            .iter()
            .map(|&b| (mesh.positions[b].norm() - 1.0).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-3 * 0.05, "{worst}");
    }

    #[test]
    fn cosine_boundary_is_simple_and_level() {
        let m = make_perturbed(1.0, 0.1, Arc::new(CosineBump)).unwrap();
        let mesh = build_disc_mesh(m.clone(), 1.0, 0.05).unwrap();
        let solver = DistanceSolver::new(m);
        for &b in mesh.boundary_loop.iter().step_by(7) {
            let d = solver.distance(mesh.center, mesh.positions[b]).unwrap();
            assert!((d - 1.0).abs() < 1e-4, "{d}");
        }
    }

    #[test]
    fn coarse_spacing_is_rejected() {
        let m = model_metric(ModelKind::Flat, 0.0, 1.0).unwrap();
        assert!(matches!(build_disc_mesh(m, 1.0, 0.2), Err(Error::ResolutionTooCoarse(_))));
    }
}
