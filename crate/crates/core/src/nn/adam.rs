use crate::nn::layer::Param;
use crate::tensor::Tensor;

pub const DEFAULT_LR: f64 = 1e-3;
pub const DEFAULT_FINAL_LR: f64 = 1e-4;

#[derive(Debug, Clone)]
pub struct AdamState {
    pub first: Vec<Tensor>,
    pub second: Vec<Tensor>,
    pub step: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new<'a>(params: impl IntoIterator<Item = &'a Param>) -> Self {
        let (first, second) = params
            .into_iter()
            .map(|p| (Tensor::zeros(p.value.shape()), Tensor::zeros(p.value.shape())))
            .unzip();
        Self {
            first,
            second,
            step: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    /// One bias-corrected Adam update of every parameter from its `grad`.
    pub fn step(&mut self, params: &mut [&mut Param], lr: f64) {
        assert_eq!(params.len(), self.first.len(), "parameter list changed");
        self.step += 1;
        let c1 = 1.0 - self.beta1.powi(self.step as i32);
        let c2 = 1.0 - self.beta2.powi(self.step as i32);
        for ((p, m), v) in params.iter_mut().zip(&mut self.first).zip(&mut self.second) {
            let grad = p.grad.data();
            let value = p.value.data_mut();
            for (((w, &g), mi), vi) in value
                .iter_mut()
                .zip(grad)
                .zip(m.data_mut())
                .zip(v.data_mut())
            {
                *mi = self.beta1 * *mi + (1.0 - self.beta1) * g;
                *vi = self.beta2 * *vi + (1.0 - self.beta2) * g * g;
                let mhat = *mi / c1;
                let vhat = *vi / c2;
                *w -= lr * mhat / (vhat.sqrt() + self.eps);
            }
        }
    }
}

/// Exponential decay from `lr0` at epoch 0 to `lr_final` at the last epoch;
/// constant `lr0` when `decay` is off.
pub fn lr_schedule(epoch: usize, total_epochs: usize, lr0: f64, lr_final: f64, decay: bool) -> f64 {
    if !decay || total_epochs <= 1 {
        return lr0;
    }
    let frac = epoch as f64 / (total_epochs - 1) as f64;
    lr0 * (lr_final / lr0).powf(frac)
}
