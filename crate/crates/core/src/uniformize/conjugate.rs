use std::collections::VecDeque;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::green::GreenField;
use super::mesh::{DiscMesh, NodeKind};
use crate::error::{Error, Result};

/// Closed loops that must be checked for path independence.
pub const MIN_EXACTNESS_LOOPS: usize = 100;
const WINDING_LOOPS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ConjugateDiagnostics {
    /// Loops not enclosing the pole that were integrated.
    pub loops_checked: usize,
    /// Largest |∮ dH| over those loops.
    pub max_loop_discrepancy: f64,
    /// Mean increase of H around loops enclosing the pole.
    pub winding: f64,
    /// Largest deviation of a single enclosing loop from 2π.
    pub max_winding_error: f64,
}

/// H = arg(ζ − ζ_pole) + c, where c is the harmonic conjugate of −h_reg.
#[derive(Debug, Clone)]
pub struct ConjugateField {
    /// H per node, single-valued off the cut along the negative axis from the pole.
    pub values: Vec<f64>,
    /// The smooth part c per node, with the rotation gauge applied.
    pub correction: Vec<f64>,
    pub diagnostics: ConjugateDiagnostics,
}

/// Change of c along the chart segment from node a to b: dc = h_y dx − h_x dy, trapezoid rule.
fn increment(green: &GreenField, mesh: &DiscMesh, a: usize, b: usize) -> f64 {
    let d = mesh.positions[b] - mesh.positions[a];
    let (ga, gb) = (green.gradient_regular[a], green.gradient_regular[b]);
    0.5 * ((ga[1] + gb[1]) * d.re - (ga[0] + gb[0]) * d.im)
}

fn wrap(a: f64) -> f64 {
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

/// Integrates the conjugate along a breadth-first spanning tree from the pole, fixes
/// the rotation so that the boundary node nearest the positive x-axis gets H = 0,
/// and checks path independence on random rectangular loops.
pub fn harmonic_conjugate(mesh: &DiscMesh, green: &GreenField, seed: u64) -> Result<ConjugateField> {
    let n = mesh.len();
    let pole = green.pole;
    let zp = mesh.positions[pole];
    let mut c = vec![f64::NAN; n];
    c[pole] = 0.0;
    let mut queue = VecDeque::from([pole]);
    while let Some(a) = queue.pop_front() {
        let arms = mesh.arms[a].expect("only interior nodes are queued");
        for arm in arms {
            let b = arm.node;
            if c[b].is_nan() && mesh.kinds[b] == NodeKind::Interior {
                c[b] = c[a] + increment(green, mesh, a, b);
                queue.push_back(b);
            }
        }
    }
    for b in mesh.interior_count()..n {
        let (anchor, _) = mesh.anchors[b].expect("boundary nodes have anchors");
        c[b] = c[anchor] + increment(green, mesh, anchor, b);
    }
    if let Some(k) = c.iter().position(|v| v.is_nan()) {
        return Err(Error::Conjugate(format!(
            "node at ({:.4}, {:.4}) is not connected to the pole",
            mesh.positions[k].re, mesh.positions[k].im
        )));
    }

    let arg = |k: usize| if k == pole { 0.0 } else { (mesh.positions[k] - zp).arg() };
    let gauge_node = *mesh
        .boundary_loop
        .iter()
        .min_by(|&&a, &&b| {
            let fa = wrap((mesh.positions[a] - mesh.center).arg()).abs();
            let fb = wrap((mesh.positions[b] - mesh.center).arg()).abs();
            fa.total_cmp(&fb)
        })
        .expect("mesh has boundary nodes");
    let shift = arg(gauge_node) + c[gauge_node];
    for v in c.iter_mut() {
        *v -= shift;
    }
    let values: Vec<f64> = (0..n).map(|k| arg(k) + c[k]).collect();

    let diagnostics = check_loops(mesh, green, seed)?;
    if diagnostics.max_loop_discrepancy >= 10.0 * mesh.h {
        return Err(Error::Conjugate(format!(
            "loop discrepancy {:.3e} exceeds 10 h = {:.3e}",
            diagnostics.max_loop_discrepancy,
            10.0 * mesh.h
        )));
    }
    Ok(ConjugateField { values, correction: c, diagnostics })
}

/// Nodes of the counterclockwise rectangle with corners (i0, j0) and (i1, j1), if every
/// edge joins two interior grid nodes.
fn rectangle(mesh: &DiscMesh, i0: i32, j0: i32, i1: i32, j1: i32) -> Option<Vec<usize>> {
    let mut coords = Vec::new();
    coords.extend((i0..i1).map(|i| (i, j0)));
    coords.extend((j0..j1).map(|j| (i1, j)));
    coords.extend((i0 + 1..=i1).rev().map(|i| (i, j1)));
    coords.extend((j0 + 1..=j1).rev().map(|j| (i0, j)));
    let nodes: Option<Vec<usize>> = coords.iter().map(|&(i, j)| mesh.node_at(i, j)).collect();
    let nodes = nodes?;
    for k in 0..nodes.len() {
        let (a, b) = (nodes[k], nodes[(k + 1) % nodes.len()]);
        let arms = mesh.arms[a]?;
        if !arms.iter().any(|arm| arm.node == b && arm.length == mesh.h) {
            return None;
        }
    }
    Some(nodes)
}

fn check_loops(mesh: &DiscMesh, green: &GreenField, seed: u64) -> Result<ConjugateDiagnostics> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (pi, pj) = mesh.grid[green.pole].expect("pole is a grid node");
    let zp = mesh.positions[green.pole];
    let interior: Vec<(i32, i32)> = mesh.grid.iter().flatten().copied().collect();
    let mut exact_loops = 0;
    let mut max_discrepancy = 0.0f64;
    let mut windings = Vec::new();
    let mut attempts = 0;
    while (exact_loops < MIN_EXACTNESS_LOOPS || windings.len() < WINDING_LOOPS) && attempts < 200_000 {
        attempts += 1;
        let want_winding = windings.len() < WINDING_LOOPS && exact_loops >= windings.len() * 10;
        let (i0, j0, i1, j1) = if want_winding {
            let (a, b) = (rng.gen_range(1..12), rng.gen_range(1..12));
            let (c, d) = (rng.gen_range(1..12), rng.gen_range(1..12));
            (pi - a, pj - b, pi + c, pj + d)
        } else {
            let (i, j) = interior[rng.gen_range(0..interior.len())];
            (i, j, i + rng.gen_range(1..12), j + rng.gen_range(1..12))
        };
        let encloses = i0 < pi && pi < i1 && j0 < pj && pj < j1;
        let touches = (pi == i0 || pi == i1) && (j0..=j1).contains(&pj)
            || (pj == j0 || pj == j1) && (i0..=i1).contains(&pi);
        if touches || (encloses && windings.len() >= WINDING_LOOPS) || (!encloses && exact_loops >= MIN_EXACTNESS_LOOPS) {
            continue;
        }
        let Some(nodes) = rectangle(mesh, i0, j0, i1, j1) else { continue };
        let m = nodes.len();
        let dc: f64 = (0..m).map(|k| increment(green, mesh, nodes[k], nodes[(k + 1) % m])).sum();
        if encloses {
            let darg: f64 = (0..m)
                .map(|k| {
                    let a = mesh.positions[nodes[k]] - zp;
                    let b = mesh.positions[nodes[(k + 1) % m]] - zp;
                    (b / a).arg()
                })
                .sum();
            windings.push(darg + dc);
        } else {
            exact_loops += 1;
            max_discrepancy = max_discrepancy.max(dc.abs());
        }
    }
    if exact_loops < MIN_EXACTNESS_LOOPS || windings.is_empty() {
        return Err(Error::Conjugate(format!(
            "found only {exact_loops} test loops and {} winding loops",
            windings.len()
        )));
    }
    let winding = windings.iter().sum::<f64>() / windings.len() as f64;
    let max_winding_error = windings.iter().map(|w| (w - 2.0 * PI).abs()).fold(0.0, f64::max);
    Ok(ConjugateDiagnostics {
        loops_checked: exact_loops,
        max_loop_discrepancy: max_discrepancy,
        winding,
        max_winding_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{make_perturbed, model_metric, CosineBump, ModelKind};
    use crate::uniformize::green::{solve_green, three_point_derivative};
    use crate::uniformize::mesh::build_disc_mesh;
    use std::sync::Arc;

    #[test]
    fn flat_conjugate_is_argument() {
        let m = model_metric(ModelKind::Flat, 0.0, 1.0).unwrap();
        let mesh = build_disc_mesh(m, 1.0, 0.04).unwrap();
        let g = solve_green(&mesh).unwrap();
        let h = harmonic_conjugate(&mesh, &g, 1).unwrap();
        for k in 0..mesh.len() {
            if k != mesh.center_node {
                assert!((h.values[k] - mesh.positions[k].arg()).abs() < 1e-8);
            }
        }
        assert!(h.diagnostics.loops_checked >= MIN_EXACTNESS_LOOPS);
        assert!((h.diagnostics.winding - 2.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn discrete_cauchy_riemann_relations_hold() {
        let m = make_perturbed(1.0, 0.1, Arc::new(CosineBump)).unwrap();
        let mesh = build_disc_mesh(m, 1.0, 0.04).unwrap();
        let g = solve_green(&mesh).unwrap();
        let h = harmonic_conjugate(&mesh, &g, 2).unwrap();
        assert!(h.diagnostics.max_loop_discrepancy < 10.0 * mesh.h);
        assert!(h.diagnostics.max_winding_error < 1e-3);
        let c = &h.correction;
        let mut residuals: Vec<f64> = (0..mesh.interior_count())
            .map(|i| {
                let a = mesh.arms[i].unwrap();
                let cx = three_point_derivative(c[a[1].node], c[i], c[a[0].node], a[1].length, a[0].length);
                let cy = three_point_derivative(c[a[3].node], c[i], c[a[2].node], a[3].length, a[2].length);
                let gr = g.gradient_regular[i];
                (cx - gr[1]).hypot(cy + gr[0])
            })
            .collect();
        residuals.sort_by(f64::total_cmp);
        let p99 = residuals[(0.99 * residuals.len() as f64) as usize];
        assert!(p99 < mesh.h, "{p99}");
    }
}
