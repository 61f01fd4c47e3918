//! Linear solvers behind the exact potential-theory operations: a
//! matrix-free conjugate-gradient solve of `(2d·I - A) v = b` on a
//! region, and dense Gaussian elimination for small graph systems.

use super::region::Region;
use super::PotentialError;

/// Per-site residual target on the defining mean-value relations.
pub const RESIDUAL_TARGET: f64 = 1e-11;

/// Applies `(2d·I - A) v` where `A` is interior-to-interior adjacency.
fn apply(region: &Region, v: &[f64], out: &mut [f64]) {
    let deg = 2 * region.dimension();
    let adj = region.adjacency();
    for i in 0..v.len() {
        let mut acc = deg as f64 * v[i];
        for &nb in &adj[i * deg..(i + 1) * deg] {
            if nb >= 0 {
                acc -= v[nb as usize];
            }
        }
        out[i] = acc;
    }
}

/// Solves `(2d·I - A) v = b` by conjugate gradients. The system is
/// symmetric positive definite (Dirichlet Laplacian of the region plus
/// the boundary mass). Stops when the max-norm residual of the
/// mean-value relations is below [`RESIDUAL_TARGET`].
pub fn solve_region(region: &Region, b: &[f64]) -> Result<Vec<f64>, PotentialError> {
    let n = b.len();
    debug_assert_eq!(n, region.interior().len());
    let deg = 2.0 * region.dimension() as f64;
    let tol = RESIDUAL_TARGET * deg;
    let mut v = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr: f64 = r.iter().map(|x| x * x).sum();
    let max_iters = 40 * (n as f64).sqrt() as usize + 200;
    let mut best = f64::INFINITY;
    for iter in 0..max_iters {
        let max_r = r.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        best = best.min(max_r);
        if max_r <= tol {
            return Ok(v);
        }
        apply(region, &p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            break;
        }
        let alpha = rr / pap;
        for i in 0..n {
            v[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new: f64 = r.iter().map(|x| x * x).sum();
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        // Periodically recompute the true residual to wash out drift.
        if iter % 256 == 255 {
            apply(region, &v, &mut ap);
            for i in 0..n {
                r[i] = b[i] - ap[i];
            }
            rr = r.iter().map(|x| x * x).sum();
            p.copy_from_slice(&r);
        }
    }
    Err(PotentialError::NoConvergence {
        target: RESIDUAL_TARGET,
        achieved: best / deg,
    })
}

/// Dense Gaussian elimination with partial pivoting; used for the small
/// graph Laplacian systems of the abelian harness.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>, PotentialError> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[pivot][col].abs() < 1e-14 {
            return Err(PotentialError::NoConvergence {
                target: 0.0,
                achieved: f64::INFINITY,
            });
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Ok(x)
}
