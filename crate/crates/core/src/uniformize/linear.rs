use rayon::prelude::*;

use crate::error::{Error, Result};

/// Square sparse matrix with a diagonal and at most four off-diagonal entries per row.
#[derive(Debug, Clone)]
pub struct StencilMatrix {
    pub diag: Vec<f64>,
    pub off: Vec<Vec<(usize, f64)>>,
}

impl StencilMatrix {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        out.par_iter_mut().enumerate().with_min_len(1024).for_each(|(i, o)| {
            let mut s = self.diag[i] * x[i];
            for &(j, a) in &self.off[i] {
                s += a * x[j];
            }
            *o = s;
        });
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Jacobi-preconditioned BiCGSTAB; stops at ‖b − Ax‖ ≤ tol·‖b‖.
pub fn bicgstab(a: &StencilMatrix, b: &[f64], tol: f64, max_iter: usize) -> Result<(Vec<f64>, SolveStats)> {
    let n = a.len();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok((vec![0.0; n], SolveStats { iterations: 0, relative_residual: 0.0 }));
    }
    let mut x = vec![0.0; n];
    let inv_diag: Vec<f64> = a.diag.iter().map(|d| 1.0 / d).collect();
    let precond = |v: &[f64], out: &mut [f64]| {
        for i in 0..v.len() {
            out[i] = inv_diag[i] * v[i];
        }
    };
    let mut r = b.to_vec();
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut restart_guard = 0;
    for it in 1..=max_iter {
        let rho_new = dot(&r_hat, &r);
        if rho_new == 0.0 || !rho_new.is_finite() {
            return Err(Error::Solver(format!("BiCGSTAB breakdown at iteration {it}")));
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        precond(&p, &mut y);
        a.apply(&y, &mut v);
        alpha = rho / dot(&r_hat, &v);
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        let snorm = norm(&s);
        if snorm <= tol * bnorm {
            for i in 0..n {
                x[i] += alpha * y[i];
            }
            let stats = true_residual(a, b, &x, bnorm, it);
            return Ok((x, stats));
        }
        precond(&s, &mut z);
        a.apply(&z, &mut t);
        omega = dot(&t, &s) / dot(&t, &t);
        for i in 0..n {
            x[i] += alpha * y[i] + omega * z[i];
            r[i] = s[i] - omega * t[i];
        }
        let rnorm = norm(&r);
        if rnorm <= tol * bnorm {
            let stats = true_residual(a, b, &x, bnorm, it);
            // Recurrence drift can fake convergence; insist on the true residual.
            if stats.relative_residual <= 10.0 * tol || restart_guard > 3 {
                return Ok((x, stats));
            }
            restart_guard += 1;
            a.apply(&x, &mut t);
            for i in 0..n {
                r[i] = b[i] - t[i];
                p[i] = 0.0;
                v[i] = 0.0;
            }
            (rho, alpha, omega) = (1.0, 1.0, 1.0);
            continue;
        }
        if !rnorm.is_finite() || omega == 0.0 {
            return Err(Error::Solver(format!("BiCGSTAB breakdown at iteration {it}")));
        }
    }
    let stats = true_residual(a, b, &x, bnorm, max_iter);
    Err(Error::Solver(format!(
        "no convergence after {max_iter} iterations (relative residual {:.3e})",
        stats.relative_residual
    )))
}

fn true_residual(a: &StencilMatrix, b: &[f64], x: &[f64], bnorm: f64, iterations: usize) -> SolveStats {
    let mut ax = vec![0.0; x.len()];
    a.apply(x, &mut ax);
    let r: f64 = ax.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt();
    SolveStats { iterations, relative_residual: r / bnorm }
}

/// Solves a small dense system by Gaussian elimination with partial pivoting.
pub fn solve_dense<const N: usize>(mut m: [[f64; N]; N], mut rhs: [f64; N]) -> Option<[f64; N]> {
    for col in 0..N {
        let piv = (col..N).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for row in col + 1..N {
            let f = m[row][col] / m[col][col];
            for k in col..N {
                m[row][k] -= f * m[col][k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = [0.0; N];
    for row in (0..N).rev() {
        let mut s = rhs[row];
        for k in row + 1..N {
            s -= m[row][k] * x[k];
        }
        x[row] = s / m[row][row];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_nonsymmetric_tridiagonal() {
        let n = 200;
        let diag = vec![2.5; n];
        let off = (0..n)
            .map(|i| {
                let mut v = Vec::new();
                if i > 0 {
                    v.push((i - 1, -1.0));
                }
                if i + 1 < n {
                    v.push((i + 1, -1.2));
                }
                v
            })
            .collect();
        let a = StencilMatrix { diag, off };
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.1).sin()).collect();
        let mut b = vec![0.0; n];
        a.apply(&x_true, &mut b);
        let (x, stats) = bicgstab(&a, &b, 1e-12, 1000).unwrap();
        assert!(stats.relative_residual <= 1e-11);
        assert!(x.iter().zip(&x_true).all(|(u, v)| (u - v).abs() < 1e-9));
    }

    #[test]
    fn dense_solve() {
        let m = [[4.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 2.0, 5.0]];
        let x = solve_dense(m, [1.0, 2.0, 3.0]).unwrap();
        for (row, b) in m.iter().zip([1.0, 2.0, 3.0]) {
            assert!((row.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() - b).abs() < 1e-14);
        }
    }
}
