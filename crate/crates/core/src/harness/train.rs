//! Scaling, batching and the training loop.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::harness::zoo::{input_width, Regularization, Variant};
use crate::nn::{loss_euler_scaled, loss_mse, lr_schedule, AdamState, EulerScaling, Model};
use crate::tensor::Tensor;
use crate::wave::{Dataset, GridSpec, Scaler};

/// Scalers fitted on a training split: one per source parameter, one per
/// field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scalers {
    pub params: [Scaler; 3],
    pub u: Scaler,
    pub v: Scaler,
}

impl Scalers {
    pub fn fit(train: &Dataset) -> Self {
        let p: Vec<[f64; 3]> = train.samples.iter().map(|s| s.params.to_array()).collect();
        let col = |d: usize| Scaler::fit(p.iter().map(move |r| &r[d]));
        let us: Vec<&Tensor> = train.samples.iter().map(|s| &s.u).collect();
        let vs: Vec<&Tensor> = train.samples.iter().map(|s| &s.v).collect();
        Self {
            params: [col(0), col(1), col(2)],
            u: Scaler::fit_tensors(&us),
            v: Scaler::fit_tensors(&vs),
        }
    }

    pub fn named_tensors(&self) -> Vec<(String, Tensor)> {
        let mut out = vec![
            ("scaler/u".to_string(), self.u.to_tensor()),
            ("scaler/v".to_string(), self.v.to_tensor()),
        ];
        for (i, s) in self.params.iter().enumerate() {
            out.push((format!("scaler/p{i}"), s.to_tensor()));
        }
        out
    }

    pub fn from_named(tensors: &[(String, Tensor)]) -> Result<Self> {
        let get = |name: &str| {
            tensors
                .iter()
                .find(|(n, _)| n == name)
                .and_then(|(_, t)| Scaler::from_tensor(t))
                .ok_or_else(|| Error::Format(format!("checkpoint is missing `{name}`")))
        };
        Ok(Self {
            params: [get("scaler/p0")?, get("scaler/p1")?, get("scaler/p2")?],
            u: get("scaler/u")?,
            v: get("scaler/v")?,
        })
    }

    pub fn euler(&self) -> EulerScaling {
        EulerScaling {
            u_std: self.u.std,
            v_std: self.v.std,
            v_mean: self.v.mean,
        }
    }
}

/// Network inputs and scaled targets of one split, laid out per parameter
/// sample so batches can be cut along the first axis.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub variant: Variant,
    pub samples: usize,
    pub nt: usize,
    /// `[P, 3]` or, for `(p, t)` variants, `[P·N_T, 4]`.
    pub inputs: Tensor,
    /// `[P, N_T, ...]` scaled displacement and velocity targets.
    pub u: Tensor,
    pub v: Tensor,
}

impl Prepared {
    pub fn new(v: Variant, data: &Dataset, sc: &Scalers) -> Result<Self> {
        let g = &data.grid;
        let nt = g.nt;
        let p = data.len();
        let w = input_width(v);
        let rows = if v.time_input() { p * nt } else { p };
        let mut inputs = Vec::with_capacity(rows * w);
        for s in &data.samples {
            let a = s.params.to_array();
            let scaled: Vec<f64> = (0..3).map(|d| sc.params[d].forward(a[d])).collect();
            if v.time_input() {
                for n in 0..nt {
                    inputs.extend_from_slice(&scaled);
                    inputs.push(time_feature(n, nt));
                }
            } else {
                inputs.extend_from_slice(&scaled);
            }
        }
        let stack = |f: &dyn Fn(&crate::wave::Sample) -> Tensor| -> Result<Tensor> {
            if p == 0 {
                return Err(Error::Shape("empty dataset".into()));
            }
            Tensor::stack(&data.samples.iter().map(f).collect::<Vec<_>>())
        };
        let (u, vel) = if v.boundary() {
            (
                stack(&|s| sc.u.transform(&s.boundary_u))?,
                stack(&|s| sc.v.transform(&s.boundary_v))?,
            )
        } else {
            (
                stack(&|s| sc.u.transform(&s.u))?,
                stack(&|s| sc.v.transform(&s.v))?,
            )
        };
        Ok(Self {
            variant: v,
            samples: p,
            nt,
            inputs: Tensor::new(vec![rows, w], inputs)?,
            u,
            v: vel,
        })
    }

    fn rows_per_sample(&self) -> usize {
        if self.variant.time_input() {
            self.nt
        } else {
            1
        }
    }

    /// Inputs and targets of the given samples, in order.
    pub fn batch(&self, idx: &[usize]) -> (Tensor, Tensor, Tensor) {
        let w = self.inputs.shape()[1];
        let r = self.rows_per_sample();
        let per = self.u.len() / self.samples;
        let mut x = Vec::with_capacity(idx.len() * r * w);
        let mut u = Vec::with_capacity(idx.len() * per);
        let mut v = Vec::with_capacity(idx.len() * per);
        for &i in idx {
            x.extend_from_slice(&self.inputs.data()[i * r * w..(i + 1) * r * w]);
            u.extend_from_slice(&self.u.data()[i * per..(i + 1) * per]);
            v.extend_from_slice(&self.v.data()[i * per..(i + 1) * per]);
        }
        let mut ts = self.u.shape().to_vec();
        ts[0] = idx.len();
        (
            Tensor::new(vec![idx.len() * r, w], x).expect("batch rows"),
            Tensor::new(ts.clone(), u).expect("batch targets"),
            Tensor::new(ts, v).expect("batch targets"),
        )
    }
}

/// `t` input scaled to `[-1, 1]` over the time grid.
pub fn time_feature(n: usize, nt: usize) -> f64 {
    2.0 * n as f64 / (nt - 1) as f64 - 1.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr0: f64,
    pub lr_final: f64,
    pub lr_decay: bool,
    /// Parameter samples per step; 0 means the whole split.
    pub batch_size: usize,
    pub euler_weight: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 1000,
            lr0: crate::nn::adam::DEFAULT_LR,
            lr_final: crate::nn::adam::DEFAULT_FINAL_LR,
            lr_decay: true,
            batch_size: 0,
            euler_weight: 0.1,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainReport {
    /// Mean training objective over the steps of each epoch.
    pub history: Vec<f64>,
    /// Wall-clock seconds per epoch.
    pub epoch_times: Vec<f64>,
}

impl TrainReport {
    /// Mean epoch time over epochs 2..N (the first is warm-up).
    pub fn mean_epoch_time(&self) -> f64 {
        let t = if self.epoch_times.len() > 1 {
            &self.epoch_times[1..]
        } else {
            &self.epoch_times[..]
        };
        if t.is_empty() {
            0.0
        } else {
            t.iter().sum::<f64>() / t.len() as f64
        }
    }
}

/// Objective and output gradients for one batch:
/// `MSE(u) + MSE(v) [+ λ·Euler(u, v)]`.
pub fn objective(
    outputs: &[Tensor],
    u: &Tensor,
    v: &Tensor,
    reg: Regularization,
    cfg: &TrainConfig,
    euler: EulerScaling,
    dt: f64,
) -> Result<(f64, Vec<Tensor>)> {
    let (lu, mut gu) = loss_mse(&outputs[0], u)?;
    let (lv, mut gv) = loss_mse(&outputs[1], v)?;
    let mut total = lu + lv;
    if reg.euler && cfg.euler_weight != 0.0 {
        let pu = outputs[0].reshape(u.shape())?;
        let pv = outputs[1].reshape(v.shape())?;
        let (le, du, dv) = loss_euler_scaled(&pu, &pv, dt, euler)?;
        total += cfg.euler_weight * le;
        for (g, d) in gu.data_mut().iter_mut().zip(du.data()) {
            *g += cfg.euler_weight * d;
        }
        for (g, d) in gv.data_mut().iter_mut().zip(dv.data()) {
            *g += cfg.euler_weight * d;
        }
    }
    Ok((total, vec![gu, gv]))
}

/// Full-batch or mini-batch Adam. Deterministic for a given `seed`;
/// aborts with [`Error::Diverged`] on a non-finite objective.
pub fn train(
    model: &mut Model,
    data: &Prepared,
    reg: Regularization,
    g: &GridSpec,
    sc: &Scalers,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<TrainReport> {
    reg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut adam = AdamState::new(model.params());
    let bs = if cfg.batch_size == 0 {
        data.samples
    } else {
        cfg.batch_size.min(data.samples)
    };
    let mut order: Vec<usize> = (0..data.samples).collect();
    let full = bs == data.samples;
    let fixed = full.then(|| data.batch(&order));
    let mut report = TrainReport::default();
    for epoch in 0..cfg.epochs {
        let start = Instant::now();
        let lr = lr_schedule(epoch, cfg.epochs, cfg.lr0, cfg.lr_final, cfg.lr_decay);
        if !full {
            order.shuffle(&mut rng);
        }
        let mut sum = 0.0;
        let mut steps = 0;
        for chunk in order.chunks(bs) {
            let owned;
            let (x, u, v) = match &fixed {
                Some(b) => b,
                None => {
                    owned = data.batch(chunk);
                    &owned
                }
            };
            model.zero_grad();
            let out = model.forward_train(x)?;
            let (loss, grads) = objective(&out, u, v, reg, cfg, sc.euler(), g.dt())?;
            if !loss.is_finite() {
                model.clear_cache();
                return Err(Error::Diverged(epoch));
            }
            model.backward(&grads)?;
            adam.step(&mut model.params_mut(), lr);
            sum += loss;
            steps += 1;
        }
        report.history.push(sum / steps as f64);
        report.epoch_times.push(start.elapsed().as_secs_f64());
    }
    Ok(report)
}

/// Evaluation-mode predictions in physical units, `[N_T, ...]` per sample
/// for displacement and velocity.
pub fn predict(model: &Model, data: &Prepared, sc: &Scalers) -> Result<(Vec<Tensor>, Vec<Tensor>)> {
    const CHUNK: usize = 16;
    let mut us = Vec::with_capacity(data.samples);
    let mut vs = Vec::with_capacity(data.samples);
    let idx: Vec<usize> = (0..data.samples).collect();
    let per_shape = data.u.shape()[1..].to_vec();
    for chunk in idx.chunks(CHUNK) {
        let (x, _, _) = data.batch(chunk);
        let out = model.infer(&x)?;
        let mut shape = vec![chunk.len()];
        shape.extend(&per_shape);
        let pu = out[0].reshape(&shape)?;
        let pv = out[1].reshape(&shape)?;
        for i in 0..chunk.len() {
            us.push(sc.u.inverse_transform(&pu.slice0(i)));
            vs.push(sc.v.inverse_transform(&pv.slice0(i)));
        }
    }
    Ok((us, vs))
}
