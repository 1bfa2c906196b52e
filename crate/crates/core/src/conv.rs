//! Valid-mode cross-correlation (stride 1, no padding, no kernel flip).
//!
//! [`conv2d_valid`] and [`conv_multichannel`] are the plain reference forms.
//! [`CorrPlan`] is the N-d engine the network layers run on: it precomputes
//! the flat offsets of every kernel tap and every output row so the inner
//! loop is a contiguous axpy along the last axis.

use crate::error::{Error, Result};
use crate::tensor::{strides, Tensor};

/// `y(i,j) = Σ_l Σ_h x(i+l, j+h) K(l,h)` (0-based).
pub fn conv2d_valid(x: &Tensor, kernel: &Tensor) -> Result<Tensor> {
    for t in [x, kernel] {
        if t.rank() != 2 {
            return Err(Error::Rank {
                expected: 2,
                got: t.rank(),
            });
        }
    }
    let (n, m) = (x.shape()[0], x.shape()[1]);
    let (k1, k2) = (kernel.shape()[0], kernel.shape()[1]);
    if k1 > n || k2 > m {
        return Err(Error::KernelTooLarge {
            kernel: kernel.shape().to_vec(),
            input: x.shape().to_vec(),
        });
    }
    let (ny, my) = (n - k1 + 1, m - k2 + 1);
    let mut y = Tensor::zeros(&[ny, my]);
    for i in 0..ny {
        for j in 0..my {
            let mut acc = 0.0;
            for l in 0..k1 {
                for h in 0..k2 {
                    acc += x.get(&[i + l, j + h]) * kernel.get(&[l, h]);
                }
            }
            y.set(&[i, j], acc);
        }
    }
    Ok(y)
}

/// Multi-channel layer of the form `y[j] = σ(Σ_i x[i] ⋆ K[j])`: one kernel
/// per output channel, applied to every input channel and summed.
pub fn conv_multichannel(
    x: &Tensor,
    kernels: &Tensor,
    activation: impl Fn(f64) -> f64,
) -> Result<Tensor> {
    for t in [x, kernels] {
        if t.rank() != 3 {
            return Err(Error::Rank {
                expected: 3,
                got: t.rank(),
            });
        }
    }
    let c = x.shape()[0];
    let n_out = kernels.shape()[0];
    let mut summed = x.slice0(0);
    for i in 1..c {
        summed.add_assign(&x.slice0(i))?;
    }
    let mut maps = Vec::with_capacity(n_out);
    for j in 0..n_out {
        maps.push(conv2d_valid(&summed, &kernels.slice0(j))?.map(&activation));
    }
    Tensor::stack(&maps)
}

/// Precomputed index tables for a valid correlation of a `in_shape` array
/// with a `k_shape` kernel of the same rank.
#[derive(Debug, Clone)]
pub struct CorrPlan {
    in_shape: Vec<usize>,
    k_shape: Vec<usize>,
    out_shape: Vec<usize>,
    tap_offsets: Vec<usize>,
    row_bases: Vec<usize>,
    row_len: usize,
}

impl CorrPlan {
    pub fn new(in_shape: &[usize], k_shape: &[usize]) -> Result<Self> {
        if in_shape.len() != k_shape.len() || in_shape.is_empty() {
            return Err(Error::Shape(format!(
                "kernel {k_shape:?} and input {in_shape:?} must share a non-zero rank"
            )));
        }
        if k_shape.iter().zip(in_shape).any(|(&k, &n)| k == 0 || k > n) {
            return Err(Error::KernelTooLarge {
                kernel: k_shape.to_vec(),
                input: in_shape.to_vec(),
            });
        }
        let out_shape: Vec<usize> = in_shape
            .iter()
            .zip(k_shape)
            .map(|(&n, &k)| n - k + 1)
            .collect();
        let st = strides(in_shape);
        let tap_offsets = offsets(k_shape, &st);
        // Trailing axes with unit kernel extent are contiguous in both input
        // and output, so they fold into one long row.
        let r = in_shape.len();
        let unit = k_shape.iter().rev().take_while(|&&k| k == 1).count();
        let first_row_axis = if unit == 0 { r - 1 } else { r - unit };
        let row_len: usize = out_shape[first_row_axis..].iter().product();
        let mut row_shape = out_shape.clone();
        row_shape[first_row_axis..].iter_mut().for_each(|v| *v = 1);
        let row_bases = offsets(&row_shape, &st);
        Ok(Self {
            in_shape: in_shape.to_vec(),
            k_shape: k_shape.to_vec(),
            out_shape,
            tap_offsets,
            row_bases,
            row_len,
        })
    }

    pub fn in_shape(&self) -> &[usize] {
        &self.in_shape
    }

    pub fn kernel_shape(&self) -> &[usize] {
        &self.k_shape
    }

    pub fn out_shape(&self) -> &[usize] {
        &self.out_shape
    }

    pub fn in_len(&self) -> usize {
        self.in_shape.iter().product()
    }

    pub fn out_len(&self) -> usize {
        self.out_shape.iter().product()
    }

    /// `out += x ⋆ k`.
    pub fn forward(&self, x: &[f64], k: &[f64], out: &mut [f64]) {
        let n = self.row_len;
        for (r, &base) in self.row_bases.iter().enumerate() {
            let y = &mut out[r * n..(r + 1) * n];
            for (&w, &off) in k.iter().zip(&self.tap_offsets) {
                let src = &x[base + off..base + off + n];
                for (a, &b) in y.iter_mut().zip(src) {
                    *a += w * b;
                }
            }
        }
    }

    /// Adjoint of [`Self::forward`]: `dx += dy ⋆ᵀ k` and `dk += x ⋆ dy`.
    pub fn backward(&self, x: &[f64], k: &[f64], dy: &[f64], dx: Option<&mut [f64]>, dk: &mut [f64]) {
        let n = self.row_len;
        for (r, &base) in self.row_bases.iter().enumerate() {
            let g = &dy[r * n..(r + 1) * n];
            for (t, &off) in self.tap_offsets.iter().enumerate() {
                let src = &x[base + off..base + off + n];
                dk[t] += g.iter().zip(src).map(|(a, b)| a * b).sum::<f64>();
            }
        }
        if let Some(dx) = dx {
            for (r, &base) in self.row_bases.iter().enumerate() {
                let g = &dy[r * n..(r + 1) * n];
                for (&w, &off) in k.iter().zip(&self.tap_offsets) {
                    let dst = &mut dx[base + off..base + off + n];
                    for (a, &b) in dst.iter_mut().zip(g) {
                        *a += w * b;
                    }
                }
            }
        }
    }
}

/// Flat offsets (under `st`) of every multi-index inside `shape`, row-major.
fn offsets(shape: &[usize], st: &[usize]) -> Vec<usize> {
    let n: usize = shape.iter().product();
    let mut out = Vec::with_capacity(n);
    let mut idx = vec![0usize; shape.len()];
    for _ in 0..n {
        out.push(idx.iter().zip(st).map(|(i, s)| i * s).sum());
        for ax in (0..shape.len()).rev() {
            idx[ax] += 1;
            if idx[ax] < shape[ax] {
                break;
            }
            idx[ax] = 0;
        }
    }
    out
}
