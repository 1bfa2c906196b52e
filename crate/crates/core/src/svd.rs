//! One-sided (Hestenes) Jacobi SVD for small dense matrices.

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Largest extent accepted by [`svd_small`].
pub const MAX_DIM: usize = 64;
const MAX_SWEEPS: usize = 100;
const OFF_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct SvdResult {
    /// Non-increasing, length `min(m, n)`.
    pub singular_values: Vec<f64>,
    /// `[m, k]`, orthonormal columns.
    pub left_vectors: Tensor,
    /// `[n, k]`, orthonormal columns.
    pub right_vectors: Tensor,
}

impl SvdResult {
    pub fn left(&self, i: usize) -> Vec<f64> {
        column(&self.left_vectors, i)
    }

    pub fn right(&self, i: usize) -> Vec<f64> {
        column(&self.right_vectors, i)
    }

    /// `Σ_{i<r} σ_i u_i v_iᵀ`.
    pub fn reconstruct(&self, r: usize) -> Tensor {
        let m = self.left_vectors.shape()[0];
        let n = self.right_vectors.shape()[0];
        let mut out = Tensor::zeros(&[m, n]);
        for i in 0..r.min(self.singular_values.len()) {
            let (u, v, s) = (self.left(i), self.right(i), self.singular_values[i]);
            let d = out.data_mut();
            for a in 0..m {
                for b in 0..n {
                    d[a * n + b] += s * u[a] * v[b];
                }
            }
        }
        out
    }
}

fn column(t: &Tensor, j: usize) -> Vec<f64> {
    let (rows, cols) = (t.shape()[0], t.shape()[1]);
    (0..rows).map(|i| t.data()[i * cols + j]).collect()
}

pub fn svd_small(m: &Tensor) -> Result<SvdResult> {
    if m.rank() != 2 {
        return Err(Error::Rank {
            expected: 2,
            got: m.rank(),
        });
    }
    let (rows, cols) = (m.shape()[0], m.shape()[1]);
    for e in [rows, cols] {
        if e > MAX_DIM {
            return Err(Error::MatrixTooLarge(e, MAX_DIM));
        }
    }
    if rows < cols {
        let t = svd_small(&m.transpose(&[1, 0])?)?;
        return Ok(SvdResult {
            singular_values: t.singular_values,
            left_vectors: t.right_vectors,
            right_vectors: t.left_vectors,
        });
    }
    // rows >= cols from here; work on columns of A, accumulate V.
    let (mrows, n) = (rows, cols);
    let mut a: Vec<Vec<f64>> = (0..n).map(|j| column(m, j)).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let scale = m.frobenius_norm().powi(2).max(f64::MIN_POSITIVE);
    // columns at or below this norm are reported as zero singular values, so
    // rotating them only shuffles rounding noise
    let tiny = f64::EPSILON * scale.sqrt() * (mrows.max(n) as f64);

    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut off = 0.0;
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = a[p].iter().map(|x| x * x).sum();
                let beta: f64 = a[q].iter().map(|x| x * x).sum();
                let gamma: f64 = a[p].iter().zip(&a[q]).map(|(x, y)| x * y).sum();
                off += gamma * gamma;
                if gamma == 0.0
                    || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt()
                    || alpha.min(beta) <= tiny * tiny
                {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut a, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        // every pair is orthogonal to working precision, or the normalized
        // off-diagonal mass is below tolerance
        if !rotated || off.sqrt() < OFF_TOL * scale * f64::EPSILON {
            converged = true;
        }
    }
    if !converged {
        return Err(Error::NoConvergence(MAX_SWEEPS));
    }

    let mut triples: Vec<(f64, Vec<f64>, Vec<f64>)> = a
        .into_iter()
        .zip(v)
        .map(|(col, vcol)| {
            let s = col.iter().map(|x| x * x).sum::<f64>().sqrt();
            (s, col, vcol)
        })
        .collect();
    triples.sort_by(|x, y| y.0.total_cmp(&x.0));

    let mut us: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut sigmas = Vec::with_capacity(n);
    let mut vs = Vec::with_capacity(n);
    for (s, col, vcol) in triples {
        if s > tiny {
            us.push(col.iter().map(|x| x / s).collect());
            sigmas.push(s);
        } else {
            us.push(complete_basis(&us, mrows));
            sigmas.push(0.0);
        }
        vs.push(vcol);
    }

    let k = n;
    let mut left = Tensor::zeros(&[mrows, k]);
    let mut right = Tensor::zeros(&[n, k]);
    for j in 0..k {
        for i in 0..mrows {
            left.set(&[i, j], us[j][i]);
        }
        for i in 0..n {
            right.set(&[i, j], vs[j][i]);
        }
    }
    Ok(SvdResult {
        singular_values: sigmas,
        left_vectors: left,
        right_vectors: right,
    })
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (lo, hi) = cols.split_at_mut(q);
    for (x, y) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
        let (xp, xq) = (*x, *y);
        *x = c * xp - s * xq;
        *y = s * xp + c * xq;
    }
}

/// A unit vector orthogonal to every vector in `basis` (Gram-Schmidt over
/// the standard basis).
fn complete_basis(basis: &[Vec<f64>], dim: usize) -> Vec<f64> {
    let mut best: Option<Vec<f64>> = None;
    let mut best_norm = 0.0;
    for e in 0..dim {
        let mut w = vec![0.0; dim];
        w[e] = 1.0;
        for _ in 0..2 {
            for b in basis {
                let d: f64 = w.iter().zip(b).map(|(x, y)| x * y).sum();
                for (x, y) in w.iter_mut().zip(b) {
                    *x -= d * y;
                }
            }
        }
        let nrm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nrm > best_norm {
            best_norm = nrm;
            best = Some(w);
        }
        if nrm > 0.5 {
            break;
        }
    }
    let w = best.expect("basis is not complete");
    w.iter().map(|x| x / best_norm).collect()
}
