//! Rank-r decomposition of 2-way and 3-way convolution kernels via SVD.
//!
//! A 2-way kernel `K ≈ Σ_i a_i ⊗ b_i` keeps the `r` leading singular triples,
//! with `sqrt(σ_i)` folded into both factors. A 3-way kernel is split into
//! its last-axis slices `K[:, :, l]`, each decomposed as a 2-way kernel and
//! tagged with the slice it lives in.

use crate::error::{Error, Result};
use crate::svd::svd_small;
use crate::tensor::{outer, Tensor};

#[derive(Debug, Clone, PartialEq)]
pub struct RankTerm {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    /// Position of the unit selector `I_l` on the last axis (3-way kernels).
    pub slice: Option<usize>,
}

impl RankTerm {
    pub fn slice_selector(&self, n3: usize) -> Option<Vec<f64>> {
        self.slice.map(|l| {
            let mut e = vec![0.0; n3];
            e[l] = 1.0;
            e
        })
    }

    fn magnitude(&self) -> f64 {
        norm(&self.left) * norm(&self.right)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelDecomposition {
    shape: Vec<usize>,
    terms: Vec<RankTerm>,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl KernelDecomposition {
    pub fn new(shape: Vec<usize>, terms: Vec<RankTerm>) -> Result<Self> {
        if !(shape.len() == 2 || shape.len() == 3) {
            return Err(Error::Rank {
                expected: 2,
                got: shape.len(),
            });
        }
        for t in &terms {
            let ok = t.left.len() == shape[0]
                && t.right.len() == shape[1]
                && match (shape.len(), t.slice) {
                    (2, None) => true,
                    (3, Some(l)) => l < shape[2],
                    _ => false,
                };
            if !ok {
                return Err(Error::Shape(format!(
                    "rank term does not fit kernel shape {shape:?}"
                )));
            }
        }
        Ok(Self { shape, terms })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    /// Kernel order: 2 or 3.
    pub fn order(&self) -> usize {
        self.shape.len()
    }

    pub fn terms(&self) -> &[RankTerm] {
        &self.terms
    }

    /// Terms whose outer product is not identically zero.
    pub fn effective_terms(&self) -> usize {
        self.terms.iter().filter(|t| t.magnitude() > 0.0).count()
    }

    /// Stored scalars: every factor entry; selectors are structural.
    pub fn stored_values(&self) -> usize {
        self.terms.iter().map(|t| t.left.len() + t.right.len()).sum()
    }
}

/// Leading `rank` singular triples of a 2-way kernel as balanced factor pairs.
pub fn decompose_2d(kernel: &Tensor, rank: usize) -> Result<KernelDecomposition> {
    if kernel.rank() != 2 {
        return Err(Error::Rank {
            expected: 2,
            got: kernel.rank(),
        });
    }
    let max = kernel.shape()[0].min(kernel.shape()[1]);
    if rank == 0 || rank > max {
        return Err(Error::RankTooLarge { rank, max });
    }
    let svd = svd_small(kernel)?;
    let terms = (0..rank)
        .map(|i| {
            let w = svd.singular_values[i].sqrt();
            RankTerm {
                left: svd.left(i).iter().map(|x| w * x).collect(),
                right: svd.right(i).iter().map(|x| w * x).collect(),
                slice: None,
            }
        })
        .collect();
    KernelDecomposition::new(kernel.shape().to_vec(), terms)
}

/// Slice-wise decomposition along the last axis: `n3 · rank` terms.
pub fn decompose_3d(kernel: &Tensor, rank: usize) -> Result<KernelDecomposition> {
    if kernel.rank() != 3 {
        return Err(Error::Rank {
            expected: 3,
            got: kernel.rank(),
        });
    }
    let (n1, n2, n3) = (kernel.shape()[0], kernel.shape()[1], kernel.shape()[2]);
    let max = n1.min(n2);
    if rank == 0 || rank > max {
        return Err(Error::RankTooLarge { rank, max });
    }
    let mut terms = Vec::with_capacity(n3 * rank);
    for l in 0..n3 {
        let slice = Tensor::from_fn(&[n1, n2], |i| kernel.get(&[i[0], i[1], l]));
        for mut t in decompose_2d(&slice, rank)?.terms {
            t.slice = Some(l);
            terms.push(t);
        }
    }
    KernelDecomposition::new(kernel.shape().to_vec(), terms)
}

pub fn reconstruct(d: &KernelDecomposition) -> Tensor {
    let mut out = Tensor::zeros(d.shape());
    let n2 = d.shape[1];
    let n3 = d.shape.get(2).copied().unwrap_or(1);
    let data = out.data_mut();
    for t in &d.terms {
        let l = t.slice.unwrap_or(0);
        for (i, &a) in t.left.iter().enumerate() {
            for (j, &b) in t.right.iter().enumerate() {
                data[(i * n2 + j) * n3 + l] += a * b;
            }
        }
    }
    out
}

/// `‖K − reconstruct(d)‖_F`.
pub fn residual_norm(kernel: &Tensor, d: &KernelDecomposition) -> Result<f64> {
    kernel.expect_shape(d.shape())?;
    Ok(kernel.sub(&reconstruct(d))?.frobenius_norm())
}

/// Residual kernel `K − reconstruct(d)`.
pub fn residual(kernel: &Tensor, d: &KernelDecomposition) -> Result<Tensor> {
    kernel.expect_shape(d.shape())?;
    kernel.sub(&reconstruct(d))
}

/// Rank-1 pair of a 2-way kernel, `K ≈ a ⊗ b`.
pub fn rank_one_factors(kernel: &Tensor) -> Result<(Tensor, Tensor)> {
    let d = decompose_2d(kernel, 1)?;
    let t = &d.terms[0];
    Ok((Tensor::vector(t.left.clone()), Tensor::vector(t.right.clone())))
}

/// Trainable-parameter accounting for full vs. fully separated kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ParamBudget {
    /// `n_f · Π n_k` (+ `n_f` bias) summed over layers.
    pub full_count: usize,
    /// `n_f · Σ n_k` (+ `n_f` bias) summed over layers.
    pub decomposed_count: usize,
}

impl ParamBudget {
    pub fn ratio(&self) -> f64 {
        self.full_count as f64 / self.decomposed_count.max(1) as f64
    }
}

impl std::ops::Add for ParamBudget {
    type Output = ParamBudget;

    fn add(self, o: ParamBudget) -> ParamBudget {
        ParamBudget {
            full_count: self.full_count + o.full_count,
            decomposed_count: self.decomposed_count + o.decomposed_count,
        }
    }
}

impl std::iter::Sum for ParamBudget {
    fn sum<I: Iterator<Item = ParamBudget>>(iter: I) -> Self {
        iter.fold(ParamBudget::default(), |a, b| a + b)
    }
}

/// Budget of convolution layers with `filters` kernels each; every entry of
/// `kernel_extents` is one layer's kernel shape.
pub fn param_budget(kernel_extents: &[Vec<usize>], filters: usize, bias: bool) -> ParamBudget {
    kernel_extents
        .iter()
        .map(|ext| {
            let b = if bias { filters } else { 0 };
            ParamBudget {
                full_count: filters * ext.iter().product::<usize>() + b,
                decomposed_count: filters * ext.iter().sum::<usize>() + b,
            }
        })
        .sum()
}

/// Rank-1 kernel `a ⊗ b` as a tensor.
pub fn rank_one_kernel(a: &[f64], b: &[f64]) -> Tensor {
    outer(&Tensor::vector(a.to_vec()), &Tensor::vector(b.to_vec())).expect("rank-1 inputs")
}
