use crate::tensor::Tensor;

/// Below this the fitted spread is treated as 1.
pub const STD_GUARD: f64 = 1e-12;

/// Affine standardization `(x − mean) / std` of one scalar field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaler {
    pub mean: f64,
    pub std: f64,
}

impl Scaler {
    pub const IDENTITY: Scaler = Scaler { mean: 0.0, std: 1.0 };

    /// Mean and population standard deviation over every value.
    pub fn fit<'a>(values: impl IntoIterator<Item = &'a f64> + Clone) -> Self {
        let (mut n, mut sum) = (0usize, 0.0);
        for v in values.clone() {
            n += 1;
            sum += v;
        }
        if n == 0 {
            return Self::IDENTITY;
        }
        let mean = sum / n as f64;
        let var = values.into_iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        let std = var.sqrt();
        Self {
            mean,
            std: if std < STD_GUARD { 1.0 } else { std },
        }
    }

    pub fn fit_tensors(ts: &[&Tensor]) -> Self {
        Self::fit(ts.iter().flat_map(|t| t.data().iter()))
    }

    pub fn forward(&self, x: f64) -> f64 {
        (x - self.mean) / self.std
    }

    pub fn inverse(&self, z: f64) -> f64 {
        z * self.std + self.mean
    }

    pub fn transform(&self, t: &Tensor) -> Tensor {
        t.map(|x| self.forward(x))
    }

    pub fn inverse_transform(&self, t: &Tensor) -> Tensor {
        t.map(|z| self.inverse(z))
    }

    pub fn to_tensor(&self) -> Tensor {
        Tensor::vector(vec![self.mean, self.std])
    }

    pub fn from_tensor(t: &Tensor) -> Option<Self> {
        (t.len() == 2).then(|| Self {
            mean: t.data()[0],
            std: t.data()[1],
        })
    }
}
