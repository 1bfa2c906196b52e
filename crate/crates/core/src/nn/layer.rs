//! Layers with hand-written reverse-mode gradients.
//!
//! Every layer maps a batch tensor `[B, ...]` to a batch tensor. A
//! training-mode forward stores what the matching backward needs; backward
//! consumes that cache, accumulates parameter gradients and returns the
//! gradient with respect to the layer input.
//!
//! Convolutions follow the channel-summed form: each filter is applied to the
//! sum of all input channels, so a layer with `n_f` filters owns exactly
//! `n_f` kernels regardless of the input channel count.

use rand::Rng;

use crate::conv::CorrPlan;
use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub const BN_EPS: f64 = 1e-5;
pub const BN_MOMENTUM: f64 = 0.1;

/// Weights are drawn from `U(±√3/√fan_in)`: unit output variance for
/// unit-variance inputs.
const WEIGHT_GAIN: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Clone)]
pub struct Param {
    pub name: &'static str,
    pub value: Tensor,
    pub grad: Tensor,
}

impl Param {
    pub fn new(name: &'static str, value: Tensor) -> Self {
        let grad = Tensor::zeros(value.shape());
        Self { name, value, grad }
    }

    fn uniform(name: &'static str, shape: &[usize], bound: f64, rng: &mut impl Rng) -> Self {
        Self::new(name, Tensor::from_fn(shape, |_| rng.random_range(-bound..=bound)))
    }

    pub fn zero_grad(&mut self) {
        self.grad.data_mut().fill(0.0);
    }
}

#[derive(Debug, Clone)]
pub struct Dense {
    /// `[out, in]`.
    pub weight: Param,
    pub bias: Param,
}

#[derive(Debug, Clone)]
pub struct Conv {
    /// `[n_f, k_1, ..., k_d]`.
    pub kernel: Param,
    pub bias: Param,
}

/// Kernel `K_j = ⊗_g K_j^g` over disjoint axis groups; each group is a
/// separate convolution stage, applied in `groups` order.
#[derive(Debug, Clone)]
pub struct SeparableConv {
    pub extents: Vec<usize>,
    pub groups: Vec<Vec<usize>>,
    /// One `[n_f, extents of the group axes]` tensor per group.
    pub factors: Vec<Param>,
    pub bias: Param,
    /// tanh between stages (non-linear decomposition).
    pub stage_activation: bool,
}

#[derive(Debug, Clone)]
pub struct BatchNorm {
    pub gamma: Param,
    pub beta: Param,
    pub running_mean: Vec<f64>,
    pub running_var: Vec<f64>,
}

/// Nearest-neighbour resize of the spatial axes to `target`.
#[derive(Debug, Clone)]
pub struct Upsample {
    pub target: Vec<usize>,
}

#[derive(Debug, Clone)]
pub enum LayerKind {
    Dense(Dense),
    Conv(Conv),
    Separable(SeparableConv),
    BatchNorm(BatchNorm),
    Tanh,
    Upsample(Upsample),
    /// `[B, C, s...] -> [B, 1, s...]`. Convolutions sum their input
    /// channels anyway, so summing before an upsample is equivalent and
    /// much cheaper.
    ChannelSum,
    /// Per-sample reshape `[B, ...] -> [B, to...]`.
    Reshape(Vec<usize>),
}

#[derive(Debug, Clone)]
enum Cache {
    Input(Tensor),
    Output(Tensor),
    Summed {
        summed: Tensor,
        channels: usize,
    },
    Separable {
        summed: Tensor,
        channels: usize,
        /// `[filter][stage]` stage inputs over the whole batch; index 0 is
        /// `summed` and is not duplicated.
        stages: Vec<Vec<Vec<f64>>>,
        shapes: Vec<Vec<usize>>,
    },
    Norm {
        xhat: Tensor,
        inv_std: Vec<f64>,
    },
    Shape(Vec<usize>),
}

#[derive(Debug, Clone)]
pub struct Layer {
    pub kind: LayerKind,
    cache: Option<Cache>,
}

impl From<LayerKind> for Layer {
    fn from(kind: LayerKind) -> Self {
        Self { kind, cache: None }
    }
}

fn batch_split(x: &Tensor) -> Result<(usize, &[usize])> {
    if x.rank() < 2 {
        return Err(Error::Shape(format!(
            "layer input needs a batch axis and features, got {:?}",
            x.shape()
        )));
    }
    Ok((x.shape()[0], &x.shape()[1..]))
}

/// `[B, C, s...]` -> per-sample channel sums `[B, s...]`.
fn channel_sum(x: &Tensor) -> Result<Tensor> {
    if x.rank() < 3 {
        return Err(Error::Shape(format!(
            "convolution input must be [B, C, spatial...], got {:?}",
            x.shape()
        )));
    }
    let b = x.shape()[0];
    let c = x.shape()[1];
    let n: usize = x.shape()[2..].iter().product();
    let mut out = vec![0.0; b * n];
    for (bi, dst) in out.chunks_mut(n).enumerate() {
        for ci in 0..c {
            let src = &x.data()[(bi * c + ci) * n..(bi * c + ci + 1) * n];
            for (a, s) in dst.iter_mut().zip(src) {
                *a += s;
            }
        }
    }
    let mut shape = vec![b];
    shape.extend_from_slice(&x.shape()[2..]);
    Tensor::new(shape, out)
}

/// Broadcast `[B, s...]` gradients back over `c` channels.
fn channel_broadcast(ds: &Tensor, c: usize) -> Tensor {
    let b = ds.shape()[0];
    let n: usize = ds.shape()[1..].iter().product();
    let mut data = Vec::with_capacity(b * c * n);
    for bi in 0..b {
        let src = &ds.data()[bi * n..(bi + 1) * n];
        for _ in 0..c {
            data.extend_from_slice(src);
        }
    }
    let mut shape = vec![b, c];
    shape.extend_from_slice(&ds.shape()[1..]);
    Tensor::new(shape, data).expect("consistent shape")
}

impl Dense {
    pub fn new(inputs: usize, outputs: usize, rng: &mut impl Rng) -> Self {
        let bound = (1.0 / inputs as f64).sqrt();
        Self {
            weight: Param::uniform("weight", &[outputs, inputs], WEIGHT_GAIN * bound, rng),
            bias: Param::uniform("bias", &[outputs], bound, rng),
        }
    }

    fn dims(&self) -> (usize, usize) {
        (self.weight.value.shape()[0], self.weight.value.shape()[1])
    }

    fn forward(&self, x: &Tensor) -> Result<Tensor> {
        let (out_n, in_n) = self.dims();
        if x.rank() != 2 || x.shape()[1] != in_n {
            return Err(Error::Shape(format!(
                "dense layer expects [B, {in_n}], got {:?}",
                x.shape()
            )));
        }
        let b = x.shape()[0];
        let w = self.weight.value.data();
        let bias = self.bias.value.data();
        let mut y = Vec::with_capacity(b * out_n);
        for row in x.data().chunks(in_n) {
            for o in 0..out_n {
                let wr = &w[o * in_n..(o + 1) * in_n];
                y.push(bias[o] + wr.iter().zip(row).map(|(a, b)| a * b).sum::<f64>());
            }
        }
        Tensor::new(vec![b, out_n], y)
    }

    fn backward(&mut self, x: &Tensor, dy: &Tensor) -> Tensor {
        let (out_n, in_n) = self.dims();
        let b = x.shape()[0];
        let mut dx = vec![0.0; b * in_n];
        let w = self.weight.value.data();
        let dw = self.weight.grad.data_mut();
        let db = self.bias.grad.data_mut();
        for bi in 0..b {
            let xr = &x.data()[bi * in_n..(bi + 1) * in_n];
            let gr = &dy.data()[bi * out_n..(bi + 1) * out_n];
            let dxr = &mut dx[bi * in_n..(bi + 1) * in_n];
            for (o, &g) in gr.iter().enumerate() {
                if g == 0.0 {
                    continue;
                }
                db[o] += g;
                let dwr = &mut dw[o * in_n..(o + 1) * in_n];
                for (d, &xv) in dwr.iter_mut().zip(xr) {
                    *d += g * xv;
                }
                for (d, &wv) in dxr.iter_mut().zip(&w[o * in_n..(o + 1) * in_n]) {
                    *d += g * wv;
                }
            }
        }
        Tensor::new(vec![b, in_n], dx).expect("consistent shape")
    }
}

impl Conv {
    pub fn new(in_channels: usize, filters: usize, extents: &[usize], rng: &mut impl Rng) -> Self {
        let fan_in = in_channels * extents.iter().product::<usize>();
        let bound = (1.0 / fan_in as f64).sqrt();
        let mut shape = vec![filters];
        shape.extend_from_slice(extents);
        Self {
            kernel: Param::uniform("kernel", &shape, WEIGHT_GAIN * bound, rng),
            bias: Param::uniform("bias", &[filters], bound, rng),
        }
    }

    pub fn filters(&self) -> usize {
        self.kernel.value.shape()[0]
    }

    pub fn extents(&self) -> &[usize] {
        &self.kernel.value.shape()[1..]
    }

    /// Kernel of filter `j`.
    pub fn filter_kernel(&self, j: usize) -> Tensor {
        self.kernel.value.slice0(j)
    }

    fn plan(&self, summed: &Tensor) -> Result<CorrPlan> {
        CorrPlan::new(&summed.shape()[1..], self.extents())
    }

    fn forward(&self, x: &Tensor) -> Result<(Tensor, Tensor)> {
        let s = channel_sum(x)?;
        let plan = self.plan(&s)?;
        let nf = self.filters();
        let b = s.shape()[0];
        let (n_in, n_out) = (plan.in_len(), plan.out_len());
        let klen = self.kernel.value.len() / nf;
        let mut y = vec![0.0; b * nf * n_out];
        for bi in 0..b {
            let xs = &s.data()[bi * n_in..(bi + 1) * n_in];
            for f in 0..nf {
                let dst = &mut y[(bi * nf + f) * n_out..(bi * nf + f + 1) * n_out];
                dst.fill(self.bias.value.data()[f]);
                plan.forward(xs, &self.kernel.value.data()[f * klen..(f + 1) * klen], dst);
            }
        }
        let mut shape = vec![b, nf];
        shape.extend_from_slice(plan.out_shape());
        Ok((Tensor::new(shape, y)?, s))
    }

    fn backward(&mut self, s: &Tensor, channels: usize, dy: &Tensor) -> Result<Tensor> {
        let plan = self.plan(s)?;
        let nf = self.filters();
        let b = s.shape()[0];
        let (n_in, n_out) = (plan.in_len(), plan.out_len());
        let klen = self.kernel.value.len() / nf;
        let mut ds = vec![0.0; b * n_in];
        for bi in 0..b {
            let xs = &s.data()[bi * n_in..(bi + 1) * n_in];
            let dsb = &mut ds[bi * n_in..(bi + 1) * n_in];
            for f in 0..nf {
                let g = &dy.data()[(bi * nf + f) * n_out..(bi * nf + f + 1) * n_out];
                self.bias.grad.data_mut()[f] += g.iter().sum::<f64>();
                let k = &self.kernel.value.data()[f * klen..(f + 1) * klen];
                let dk = &mut self.kernel.grad.data_mut()[f * klen..(f + 1) * klen];
                plan.backward(xs, k, g, Some(&mut *dsb), dk);
            }
        }
        Ok(channel_broadcast(&Tensor::new(s.shape().to_vec(), ds)?, channels))
    }
}

impl SeparableConv {
    /// `groups` partitions the kernel axes `0..extents.len()`.
    pub fn new(
        in_channels: usize,
        filters: usize,
        extents: &[usize],
        groups: Vec<Vec<usize>>,
        stage_activation: bool,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        let d = extents.len();
        let mut seen = vec![false; d];
        for g in &groups {
            if g.is_empty() || g.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Config(format!(
                    "separable group {g:?} must be non-empty and ascending"
                )));
            }
            for &a in g {
                if a >= d || seen[a] {
                    return Err(Error::Config(format!(
                        "separable groups {groups:?} do not partition {d} axes"
                    )));
                }
                seen[a] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Config(format!(
                "separable groups {groups:?} do not cover {d} axes"
            )));
        }
        let full: usize = extents.iter().product();
        let bound = (1.0 / (full * in_channels) as f64).sqrt();
        // unit-variance factors for every stage but the first, which also
        // absorbs the channel fan-in, so the composed kernel has the same
        // variance as a full one
        let factors = groups
            .iter()
            .enumerate()
            .map(|(gi, g)| {
                let mut shape = vec![filters];
                shape.extend(g.iter().map(|&a| extents[a]));
                let taps: usize = g.iter().map(|&a| extents[a]).product();
                let fan = if gi == 0 { taps * in_channels } else { taps };
                Param::uniform("factor", &shape, WEIGHT_GAIN / (fan as f64).sqrt(), rng)
            })
            .collect();
        Ok(Self {
            extents: extents.to_vec(),
            groups,
            factors,
            bias: Param::uniform("bias", &[filters], bound, rng),
            stage_activation,
        })
    }

    /// Fully separated: one 1D factor per axis, last axis first.
    pub fn rank_one(
        in_channels: usize,
        filters: usize,
        extents: &[usize],
        rng: &mut impl Rng,
    ) -> Self {
        let groups = (0..extents.len()).rev().map(|a| vec![a]).collect();
        Self::new(in_channels, filters, extents, groups, false, rng).expect("valid partition")
    }

    pub fn filters(&self) -> usize {
        self.bias.value.len()
    }

    /// Stage kernel shape: the group's extents, 1 elsewhere.
    fn stage_shape(&self, g: usize) -> Vec<usize> {
        let mut shape = vec![1; self.extents.len()];
        for &a in &self.groups[g] {
            shape[a] = self.extents[a];
        }
        shape
    }

    fn factor(&self, g: usize, f: usize) -> &[f64] {
        let t = &self.factors[g].value;
        let n = t.len() / self.filters();
        &t.data()[f * n..(f + 1) * n]
    }

    /// Full kernel of filter `f`: the product of its stage factors.
    pub fn full_kernel(&self, f: usize) -> Tensor {
        Tensor::from_fn(&self.extents, |idx| {
            self.groups
                .iter()
                .enumerate()
                .map(|(g, axes)| {
                    let fac = self.factor(g, f);
                    let mut off = 0;
                    for &a in axes {
                        off = off * self.extents[a] + idx[a];
                    }
                    fac[off]
                })
                .product()
        })
    }

    fn plans(&self, spatial: &[usize]) -> Result<(Vec<CorrPlan>, Vec<Vec<usize>>)> {
        let mut shapes = vec![spatial.to_vec()];
        let mut plans = Vec::with_capacity(self.groups.len());
        for g in 0..self.groups.len() {
            let p = CorrPlan::new(shapes.last().expect("non-empty"), &self.stage_shape(g))?;
            shapes.push(p.out_shape().to_vec());
            plans.push(p);
        }
        Ok((plans, shapes))
    }

    fn forward(&self, x: &Tensor, keep: bool) -> Result<(Tensor, Option<Cache>)> {
        let s = channel_sum(x)?;
        let b = s.shape()[0];
        let (plans, shapes) = self.plans(&s.shape()[1..])?;
        let nf = self.filters();
        let last = plans.len() - 1;
        let n_in = plans[0].in_len();
        let n_out = plans[last].out_len();
        let mut y = vec![0.0; b * nf * n_out];
        let mut stages: Vec<Vec<Vec<f64>>> = vec![vec![Vec::new(); plans.len()]; nf];
        for f in 0..nf {
            for bi in 0..b {
                let mut cur: Vec<f64> = s.data()[bi * n_in..(bi + 1) * n_in].to_vec();
                for (g, plan) in plans.iter().enumerate() {
                    if keep && g > 0 {
                        stages[f][g].extend_from_slice(&cur);
                    }
                    let mut next = vec![0.0; plan.out_len()];
                    plan.forward(&cur, self.factor(g, f), &mut next);
                    if self.stage_activation && g < last {
                        next.iter_mut().for_each(|v| *v = v.tanh());
                    }
                    cur = next;
                }
                let beta = self.bias.value.data()[f];
                let dst = &mut y[(bi * nf + f) * n_out..(bi * nf + f + 1) * n_out];
                for (d, c) in dst.iter_mut().zip(&cur) {
                    *d = c + beta;
                }
            }
        }
        let mut shape = vec![b, nf];
        shape.extend_from_slice(&shapes[plans.len()]);
        let out = Tensor::new(shape, y)?;
        let cache = keep.then_some(Cache::Separable {
            summed: s,
            channels: x.shape()[1],
            stages,
            shapes,
        });
        Ok((out, cache))
    }

    fn backward(
        &mut self,
        summed: &Tensor,
        stages: &[Vec<Vec<f64>>],
        shapes: &[Vec<usize>],
        channels: usize,
        dy: &Tensor,
    ) -> Result<Tensor> {
        let b = summed.shape()[0];
        let (plans, _) = self.plans(&shapes[0])?;
        let nf = self.filters();
        let last = plans.len() - 1;
        let n_in = plans[0].in_len();
        let n_out = plans[last].out_len();
        let mut ds = vec![0.0; b * n_in];
        for f in 0..nf {
            for bi in 0..b {
                let mut g: Vec<f64> =
                    dy.data()[(bi * nf + f) * n_out..(bi * nf + f + 1) * n_out].to_vec();
                self.bias.grad.data_mut()[f] += g.iter().sum::<f64>();
                for (st, plan) in plans.iter().enumerate().rev() {
                    let len = plan.in_len();
                    let input: &[f64] = if st == 0 {
                        &summed.data()[bi * n_in..(bi + 1) * n_in]
                    } else {
                        &stages[f][st][bi * len..(bi + 1) * len]
                    };
                    let mut gin = vec![0.0; len];
                    let kl = self.factors[st].value.len() / nf;
                    let k = self.factor(st, f).to_vec();
                    let dk = &mut self.factors[st].grad.data_mut()[f * kl..(f + 1) * kl];
                    plan.backward(input, &k, &g, Some(&mut gin), dk);
                    if st > 0 && self.stage_activation {
                        // input of stage st is tanh output of stage st-1
                        for (gi, a) in gin.iter_mut().zip(input) {
                            *gi *= 1.0 - a * a;
                        }
                    }
                    g = gin;
                }
                for (d, v) in ds[bi * n_in..(bi + 1) * n_in].iter_mut().zip(&g) {
                    *d += v;
                }
            }
        }
        Ok(channel_broadcast(
            &Tensor::new(summed.shape().to_vec(), ds)?,
            channels,
        ))
    }
}

impl BatchNorm {
    pub fn new(channels: usize) -> Self {
        Self {
            gamma: Param::new("gamma", Tensor::filled(&[channels], 1.0)),
            beta: Param::new("beta", Tensor::zeros(&[channels])),
            running_mean: vec![0.0; channels],
            running_var: vec![1.0; channels],
        }
    }

    pub fn channels(&self) -> usize {
        self.gamma.value.len()
    }

    /// `(batch, channels, per-channel inner size)` of a `[B, C, ...]` input.
    fn layout(&self, x: &Tensor) -> Result<(usize, usize, usize)> {
        let (b, rest) = batch_split(x)?;
        let c = rest[0];
        if c != self.channels() {
            return Err(Error::Shape(format!(
                "batch norm over {} channels got {:?}",
                self.channels(),
                x.shape()
            )));
        }
        Ok((b, c, rest[1..].iter().product()))
    }

    fn forward(&mut self, x: &Tensor, train: bool) -> Result<(Tensor, Option<Cache>)> {
        let (b, c, inner) = self.layout(x)?;
        let n = (b * inner) as f64;
        let mut mean = vec![0.0; c];
        let mut var = vec![0.0; c];
        if train {
            for bi in 0..b {
                for ci in 0..c {
                    let off = (bi * c + ci) * inner;
                    mean[ci] += x.data()[off..off + inner].iter().sum::<f64>();
                }
            }
            mean.iter_mut().for_each(|m| *m /= n);
            for bi in 0..b {
                for ci in 0..c {
                    let off = (bi * c + ci) * inner;
                    var[ci] += x.data()[off..off + inner]
                        .iter()
                        .map(|v| (v - mean[ci]).powi(2))
                        .sum::<f64>();
                }
            }
            var.iter_mut().for_each(|v| *v /= n);
            for ci in 0..c {
                self.running_mean[ci] =
                    (1.0 - BN_MOMENTUM) * self.running_mean[ci] + BN_MOMENTUM * mean[ci];
                self.running_var[ci] =
                    (1.0 - BN_MOMENTUM) * self.running_var[ci] + BN_MOMENTUM * var[ci];
            }
        } else {
            mean.copy_from_slice(&self.running_mean);
            var.copy_from_slice(&self.running_var);
        }
        let inv_std: Vec<f64> = var.iter().map(|v| 1.0 / (v + BN_EPS).sqrt()).collect();
        let mut xhat = x.clone();
        let mut y = x.clone();
        for bi in 0..b {
            for ci in 0..c {
                let off = (bi * c + ci) * inner;
                let (g, bt) = (self.gamma.value.data()[ci], self.beta.value.data()[ci]);
                for i in off..off + inner {
                    let h = (x.data()[i] - mean[ci]) * inv_std[ci];
                    xhat.data_mut()[i] = h;
                    y.data_mut()[i] = g * h + bt;
                }
            }
        }
        let cache = train.then_some(Cache::Norm { xhat, inv_std });
        Ok((y, cache))
    }

    fn backward(&mut self, xhat: &Tensor, inv_std: &[f64], dy: &Tensor) -> Result<Tensor> {
        let (b, c, inner) = self.layout(xhat)?;
        let n = (b * inner) as f64;
        let mut sum_g = vec![0.0; c];
        let mut sum_gx = vec![0.0; c];
        for bi in 0..b {
            for ci in 0..c {
                let off = (bi * c + ci) * inner;
                for i in off..off + inner {
                    sum_g[ci] += dy.data()[i];
                    sum_gx[ci] += dy.data()[i] * xhat.data()[i];
                }
            }
        }
        for ci in 0..c {
            self.gamma.grad.data_mut()[ci] += sum_gx[ci];
            self.beta.grad.data_mut()[ci] += sum_g[ci];
        }
        let mut dx = dy.clone();
        for bi in 0..b {
            for ci in 0..c {
                let g = self.gamma.value.data()[ci];
                let k = g * inv_std[ci] / n;
                let off = (bi * c + ci) * inner;
                for i in off..off + inner {
                    dx.data_mut()[i] =
                        k * (n * dy.data()[i] - sum_g[ci] - xhat.data()[i] * sum_gx[ci]);
                }
            }
        }
        Ok(dx)
    }
}

impl Upsample {
    /// Flat source index (within one channel) of every output position.
    fn index_map(&self, src: &[usize]) -> Result<Vec<usize>> {
        if src.len() != self.target.len() {
            return Err(Error::Shape(format!(
                "upsample to {:?} got spatial shape {src:?}",
                self.target
            )));
        }
        let src_strides = crate::tensor::strides(src);
        let per_axis: Vec<Vec<usize>> = self
            .target
            .iter()
            .zip(src)
            .zip(&src_strides)
            .map(|((&t, &s), &st)| (0..t).map(|i| (i * s / t) * st).collect())
            .collect();
        let n: usize = self.target.iter().product();
        let mut out = Vec::with_capacity(n);
        let mut idx = vec![0usize; self.target.len()];
        for _ in 0..n {
            out.push(idx.iter().enumerate().map(|(a, &i)| per_axis[a][i]).sum());
            for ax in (0..idx.len()).rev() {
                idx[ax] += 1;
                if idx[ax] < self.target[ax] {
                    break;
                }
                idx[ax] = 0;
            }
        }
        Ok(out)
    }

    fn forward(&self, x: &Tensor) -> Result<Tensor> {
        if x.rank() < 3 {
            return Err(Error::Shape(format!(
                "upsample input must be [B, C, spatial...], got {:?}",
                x.shape()
            )));
        }
        let map = self.index_map(&x.shape()[2..])?;
        let lead = x.shape()[0] * x.shape()[1];
        let n_in: usize = x.shape()[2..].iter().product();
        let mut y = Vec::with_capacity(lead * map.len());
        for l in 0..lead {
            let src = &x.data()[l * n_in..(l + 1) * n_in];
            y.extend(map.iter().map(|&i| src[i]));
        }
        let mut shape = x.shape()[..2].to_vec();
        shape.extend_from_slice(&self.target);
        Tensor::new(shape, y)
    }

    fn backward(&self, in_shape: &[usize], dy: &Tensor) -> Result<Tensor> {
        let map = self.index_map(&in_shape[2..])?;
        let lead = in_shape[0] * in_shape[1];
        let n_in: usize = in_shape[2..].iter().product();
        let mut dx = vec![0.0; lead * n_in];
        for l in 0..lead {
            let g = &dy.data()[l * map.len()..(l + 1) * map.len()];
            let dst = &mut dx[l * n_in..(l + 1) * n_in];
            for (&i, &v) in map.iter().zip(g) {
                dst[i] += v;
            }
        }
        Tensor::new(in_shape.to_vec(), dx)
    }
}

impl Layer {
    pub fn dense(inputs: usize, outputs: usize, rng: &mut impl Rng) -> Self {
        LayerKind::Dense(Dense::new(inputs, outputs, rng)).into()
    }

    pub fn conv(in_channels: usize, filters: usize, extents: &[usize], rng: &mut impl Rng) -> Self {
        LayerKind::Conv(Conv::new(in_channels, filters, extents, rng)).into()
    }

    pub fn separable(conv: SeparableConv) -> Self {
        LayerKind::Separable(conv).into()
    }

    pub fn batch_norm(channels: usize) -> Self {
        LayerKind::BatchNorm(BatchNorm::new(channels)).into()
    }

    pub fn tanh() -> Self {
        LayerKind::Tanh.into()
    }

    pub fn channel_sum() -> Self {
        LayerKind::ChannelSum.into()
    }

    pub fn upsample(target: &[usize]) -> Self {
        LayerKind::Upsample(Upsample {
            target: target.to_vec(),
        })
        .into()
    }

    pub fn reshape(to: &[usize]) -> Self {
        LayerKind::Reshape(to.to_vec()).into()
    }

    pub fn name(&self) -> &'static str {
        match &self.kind {
            LayerKind::Dense(_) => "dense",
            LayerKind::Conv(c) => match c.extents().len() {
                1 => "conv1d",
                2 => "conv2d",
                3 => "conv3d",
                _ => "conv",
            },
            LayerKind::Separable(_) => "separable",
            LayerKind::BatchNorm(_) => "batchnorm",
            LayerKind::Tanh => "tanh",
            LayerKind::Upsample(_) => "upsample",
            LayerKind::ChannelSum => "channel_sum",
            LayerKind::Reshape(_) => "reshape",
        }
    }

    /// Training-mode forward: batch statistics, cache kept for backward.
    pub fn forward_train(&mut self, x: &Tensor) -> Result<Tensor> {
        let (y, cache) = match &mut self.kind {
            LayerKind::Dense(d) => (d.forward(x)?, Cache::Input(x.clone())),
            LayerKind::Conv(c) => {
                let (y, summed) = c.forward(x)?;
                let channels = x.shape()[1];
                (y, Cache::Summed { summed, channels })
            }
            LayerKind::Separable(s) => {
                let (y, c) = s.forward(x, true)?;
                (y, c.expect("cache requested"))
            }
            LayerKind::BatchNorm(bn) => {
                let (y, c) = bn.forward(x, true)?;
                (y, c.expect("cache requested"))
            }
            LayerKind::Tanh => {
                let y = x.map(f64::tanh);
                (y.clone(), Cache::Output(y))
            }
            LayerKind::Upsample(u) => (u.forward(x)?, Cache::Shape(x.shape().to_vec())),
            LayerKind::ChannelSum => (sum_keep_axis(x)?, Cache::Shape(x.shape().to_vec())),
            LayerKind::Reshape(to) => (reshape_batch(x, to)?, Cache::Shape(x.shape().to_vec())),
        };
        self.cache = Some(cache);
        Ok(y)
    }

    /// Evaluation-mode forward: running statistics, no cache, no mutation.
    pub fn infer(&self, x: &Tensor) -> Result<Tensor> {
        match &self.kind {
            LayerKind::Dense(d) => d.forward(x),
            LayerKind::Conv(c) => Ok(c.forward(x)?.0),
            LayerKind::Separable(s) => Ok(s.forward(x, false)?.0),
            LayerKind::BatchNorm(bn) => Ok(bn.clone().forward(x, false)?.0),
            LayerKind::Tanh => Ok(x.map(f64::tanh)),
            LayerKind::Upsample(u) => u.forward(x),
            LayerKind::ChannelSum => sum_keep_axis(x),
            LayerKind::Reshape(to) => reshape_batch(x, to),
        }
    }

    pub fn backward(&mut self, dy: &Tensor) -> Result<Tensor> {
        let cache = self.cache.take().ok_or(Error::NoForwardCache)?;
        match (&mut self.kind, cache) {
            (LayerKind::Dense(d), Cache::Input(x)) => Ok(d.backward(&x, dy)),
            (LayerKind::Conv(c), Cache::Summed { summed, channels }) => {
                c.backward(&summed, channels, dy)
            }
            (
                LayerKind::Separable(sep),
                Cache::Separable {
                    summed,
                    channels,
                    stages,
                    shapes,
                },
            ) => sep.backward(&summed, &stages, &shapes, channels, dy),
            (LayerKind::BatchNorm(bn), Cache::Norm { xhat, inv_std }) => {
                bn.backward(&xhat, &inv_std, dy)
            }
            (LayerKind::Tanh, Cache::Output(y)) => dy.zip_map(&y, |g, a| g * (1.0 - a * a)),
            (LayerKind::Upsample(u), Cache::Shape(shape)) => u.backward(&shape, dy),
            (LayerKind::ChannelSum, Cache::Shape(shape)) => {
                let mut flat = vec![shape[0]];
                flat.extend_from_slice(&shape[2..]);
                Ok(channel_broadcast(&dy.reshape(&flat)?, shape[1]))
            }
            (LayerKind::Reshape(_), Cache::Shape(shape)) => dy.reshape(&shape),
            _ => Err(Error::NoForwardCache),
        }
    }

    pub fn params(&self) -> Vec<&Param> {
        match &self.kind {
            LayerKind::Dense(d) => vec![&d.weight, &d.bias],
            LayerKind::Conv(c) => vec![&c.kernel, &c.bias],
            LayerKind::Separable(s) => s.factors.iter().chain([&s.bias]).collect(),
            LayerKind::BatchNorm(b) => vec![&b.gamma, &b.beta],
            _ => Vec::new(),
        }
    }

    pub fn params_mut(&mut self) -> Vec<&mut Param> {
        match &mut self.kind {
            LayerKind::Dense(d) => vec![&mut d.weight, &mut d.bias],
            LayerKind::Conv(c) => vec![&mut c.kernel, &mut c.bias],
            LayerKind::Separable(s) => s.factors.iter_mut().chain([&mut s.bias]).collect(),
            LayerKind::BatchNorm(b) => vec![&mut b.gamma, &mut b.beta],
            _ => Vec::new(),
        }
    }

    pub fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.value.len()).sum()
    }

    pub fn clear_cache(&mut self) {
        self.cache = None;
    }

    /// Per-sample output shape for a per-sample input shape.
    pub fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>> {
        let mut batch = vec![1];
        batch.extend_from_slice(input);
        let probe = Tensor::zeros(&batch);
        let y = self.infer(&probe)?;
        Ok(y.shape()[1..].to_vec())
    }
}

fn sum_keep_axis(x: &Tensor) -> Result<Tensor> {
    let s = channel_sum(x)?;
    let mut shape = vec![x.shape()[0], 1];
    shape.extend_from_slice(&x.shape()[2..]);
    s.into_reshape(&shape)
}

fn reshape_batch(x: &Tensor, to: &[usize]) -> Result<Tensor> {
    let mut shape = vec![x.shape()[0]];
    shape.extend_from_slice(to);
    x.reshape(&shape)
}
