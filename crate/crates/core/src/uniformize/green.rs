use rayon::prelude::*;

use super::linear::{bicgstab, solve_dense, StencilMatrix};
use super::mesh::{DiscMesh, NodeKind};
use crate::error::{Error, Result};

/// Relative residual demanded from the linear solve.
pub const SOLVER_TOLERANCE: f64 = 1e-10;
pub const SOLVER_MAX_ITERATIONS: usize = 100_000;

/// Green's function with a logarithmic pole, split as G = −log|ζ − ζ_pole| + h_reg.
#[derive(Debug, Clone)]
pub struct GreenField {
    pub pole: usize,
    /// G per node; +∞ at the pole, zero on the boundary.
    pub values: Vec<f64>,
    /// Harmonic part h_reg per node; equals log|ζ − ζ_pole| on the boundary.
    pub regular: Vec<f64>,
    /// Chart gradient of h_reg per node.
    pub gradient_regular: Vec<[f64; 2]>,
    pub iterations: usize,
    pub relative_residual: f64,
}

impl GreenField {
    /// Chart gradient of G at a node other than the pole.
    pub fn gradient(&self, mesh: &DiscMesh, node: usize) -> [f64; 2] {
        let v = mesh.positions[node] - mesh.positions[self.pole];
        let r2 = v.norm_sqr();
        let g = self.gradient_regular[node];
        [g[0] - v.re / r2, g[1] - v.im / r2]
    }
}

/// Green's function of the meshed disc with its pole at the disc centre.
///
/// Harmonicity is conformally invariant, so the background Laplacian suffices.
pub fn solve_green(mesh: &DiscMesh) -> Result<GreenField> {
    solve_green_with_pole(mesh, mesh.center_node)
}

/// Green's function of the meshed disc with its pole at interior node `pole`.
///
/// Shortley–Weller 5-point differences handle the cut arms next to the boundary.
pub fn solve_green_with_pole(mesh: &DiscMesh, pole: usize) -> Result<GreenField> {
    if mesh.kinds[pole] != NodeKind::Interior {
        return Err(Error::Domain("the pole must be an interior node".into()));
    }
    let zp = mesh.positions[pole];
    let n_int = mesh.interior_count();
    let boundary_value = |node: usize| (mesh.positions[node] - zp).norm().ln();

    let mut diag = vec![0.0; n_int];
    let mut off = vec![Vec::with_capacity(4); n_int];
    let mut rhs = vec![0.0; n_int];
    for i in 0..n_int {
        let arms = mesh.arms[i].expect("interior nodes carry arms");
        for pair in [[0, 1], [2, 3]] {
            let (a, b) = (arms[pair[0]], arms[pair[1]]);
            let sum = a.length + b.length;
            for arm in [a, b] {
                let c = 2.0 / (arm.length * sum);
                diag[i] += c;
                if mesh.kinds[arm.node] == NodeKind::Boundary {
                    rhs[i] += c * boundary_value(arm.node);
                } else {
                    off[i].push((arm.node, -c));
                }
            }
        }
    }
    let matrix = StencilMatrix { diag, off };
    let (x, stats) = bicgstab(&matrix, &rhs, SOLVER_TOLERANCE, SOLVER_MAX_ITERATIONS)?;
    if !(stats.relative_residual <= 10.0 * SOLVER_TOLERANCE) {
        return Err(Error::Solver(format!(
            "relative residual {:.3e} above {SOLVER_TOLERANCE:.0e}",
            stats.relative_residual
        )));
    }

    let mut regular = x;
    regular.extend((n_int..mesh.len()).map(boundary_value));
    let values: Vec<f64> = (0..mesh.len())
        .map(|k| match mesh.kinds[k] {
            NodeKind::Boundary => 0.0,
            NodeKind::Interior if k == pole => f64::INFINITY,
            NodeKind::Interior => regular[k] - (mesh.positions[k] - zp).norm().ln(),
        })
        .collect();
    let gradient_regular = regular_gradient(mesh, &regular);
    Ok(GreenField {
        pole,
        values,
        regular,
        gradient_regular,
        iterations: stats.iterations,
        relative_residual: stats.relative_residual,
    })
}

/// Derivative at 0 of the parabola through (−h_minus, f_minus), (0, f0), (h_plus, f_plus).
pub fn three_point_derivative(f_minus: f64, f0: f64, f_plus: f64, h_minus: f64, h_plus: f64) -> f64 {
    (h_minus * h_minus * (f_plus - f0) + h_plus * h_plus * (f0 - f_minus))
        / (h_minus * h_plus * (h_minus + h_plus))
}

/// Chart gradient of a nodal field: three-point differences along the arms at
/// interior nodes, a one-sided quadratic least-squares fit at boundary nodes.
pub fn regular_gradient(mesh: &DiscMesh, u: &[f64]) -> Vec<[f64; 2]> {
    let n_int = mesh.interior_count();
    let mut out: Vec<[f64; 2]> = (0..n_int)
        .into_par_iter()
        .map(|i| {
            let a = mesh.arms[i].expect("interior nodes carry arms");
            [
                three_point_derivative(u[a[1].node], u[i], u[a[0].node], a[1].length, a[0].length),
                three_point_derivative(u[a[3].node], u[i], u[a[2].node], a[3].length, a[2].length),
            ]
        })
        .collect();
    let loop_pos: Vec<usize> = {
        let mut v = vec![0; mesh.len()];
        for (k, &b) in mesh.boundary_loop.iter().enumerate() {
            v[b] = k;
        }
        v
    };
    let boundary: Vec<[f64; 2]> = (n_int..mesh.len())
        .into_par_iter()
        .map(|b| boundary_fit_gradient(mesh, u, b, loop_pos[b]))
        .collect();
    out.extend(boundary);
    out
}

/// Fits u − u(b) ≈ c₁x + c₂y + c₃x² + c₄xy + c₅y² over nearby nodes and returns (c₁, c₂).
fn boundary_fit_gradient(mesh: &DiscMesh, u: &[f64], b: usize, loop_pos: usize) -> [f64; 2] {
    let h = mesh.h;
    let radius = 3.0 * h;
    let zb = mesh.positions[b];
    let (anchor, _) = mesh.anchors[b].expect("boundary nodes have anchors");
    let (ai, aj) = mesh.grid[anchor].expect("anchors are grid nodes");
    let mut neighbors: Vec<usize> = Vec::with_capacity(32);
    for dj in -4..=4 {
        for di in -4..=4 {
            if let Some(k) = mesh.node_at(ai + di, aj + dj) {
                if (mesh.positions[k] - zb).norm() <= radius {
                    neighbors.push(k);
                }
            }
        }
    }
    neighbors.extend(mesh.boundary_neighbors(loop_pos, radius));
    let mut ata = [[0.0; 5]; 5];
    let mut atb = [0.0; 5];
    for &k in &neighbors {
        let d = (mesh.positions[k] - zb) / h;
        let row = [d.re, d.im, d.re * d.re, d.re * d.im, d.im * d.im];
        let rhs = u[k] - u[b];
        for r in 0..5 {
            for c in 0..5 {
                ata[r][c] += row[r] * row[c];
            }
            atb[r] += row[r] * rhs;
        }
    }
    match solve_dense(ata, atb) {
        Some(c) => [c[0] / h, c[1] / h],
        None => {
            // Too few neighbours for a quadratic: fall back to the crossed edge.
            let (anchor, dir) = mesh.anchors[b].unwrap();
            let arm = mesh.arms[anchor].unwrap()[dir];
            let slope = (u[b] - u[anchor]) / arm.length;
            let (di, dj) = super::mesh::DIRECTIONS[dir];
            [slope * di as f64, slope * dj as f64]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{model_metric, ModelKind};
    use crate::uniformize::mesh::build_disc_mesh;
    use num_complex::Complex64;

    #[test]
    fn three_point_rule_is_exact_for_parabolas() {
        let f = |x: f64| 1.0 + 2.0 * x - 3.0 * x * x;
        let d = three_point_derivative(f(-0.3), f(0.0), f(0.1), 0.3, 0.1);
        assert!((d - 2.0).abs() < 1e-13);
    }

    #[test]
    fn flat_centred_green_is_minus_log() {
        let m = model_metric(ModelKind::Flat, 0.0, 1.0).unwrap();
        let mesh = build_disc_mesh(m, 1.0, 0.04).unwrap();
        let g = solve_green(&mesh).unwrap();
        assert!(g.relative_residual <= 1e-9);
        let worst = g.regular.iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert!(worst < 1e-8, "{worst}");
        for &b in &mesh.boundary_loop {
            assert_eq!(g.values[b], 0.0);
        }
        assert!(g.values.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn off_centre_pole_matches_mobius_green() {
        let m = model_metric(ModelKind::Flat, 0.0, 1.0).unwrap();
        let mut errs = Vec::new();
        for h in [0.04, 0.02] {
            let mesh = build_disc_mesh(m.clone(), 1.0, h).unwrap();
            let a = Complex64::new(0.4, -0.2);
            let pole = mesh.nearest_interior(a).unwrap();
            let a = mesh.positions[pole];
            let g = solve_green_with_pole(&mesh, pole).unwrap();
            let mut worst = 0.0f64;
            for k in 0..mesh.interior_count() {
                if k == pole {
                    continue;
                }
                let z = mesh.positions[k];
                let exact = -((z - a) / (Complex64::new(1.0, 0.0) - a.conj() * z)).norm().ln();
                worst = worst.max((g.values[k] - exact).abs());
            }
            errs.push(worst);
        }
        assert!(errs[1] < 1e-3, "{errs:?}");
        assert!(errs[0] / errs[1] > 3.0, "{errs:?}");
    }

    #[test]
    fn regular_part_has_mean_value_property() {
        let m = model_metric(ModelKind::Flat, 0.0, 1.0).unwrap();
        let mesh = build_disc_mesh(m, 1.0, 0.04).unwrap();
        let pole = mesh.nearest_interior(Complex64::new(-0.3, 0.3)).unwrap();
        let g = solve_green_with_pole(&mesh, pole).unwrap();
        for i in 0..mesh.interior_count() {
            let a = mesh.arms[i].unwrap();
            if a.iter().all(|arm| arm.length == mesh.h) {
                let mean = a.iter().map(|arm| g.regular[arm.node]).sum::<f64>() / 4.0;
                assert!((mean - g.regular[i]).abs() < 1e-2 * mesh.h * mesh.h);
            }
        }
    }
}
