use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Mean squared error and its gradient with respect to `pred`.
pub fn loss_mse(pred: &Tensor, target: &Tensor) -> Result<(f64, Tensor)> {
    if pred.len() != target.len() {
        return Err(Error::Shape(format!(
            "prediction {:?} vs target {:?}",
            pred.shape(),
            target.shape()
        )));
    }
    let n = pred.len() as f64;
    let mut grad = pred.clone();
    let mut sum = 0.0;
    for (g, &t) in grad.data_mut().iter_mut().zip(target.data()) {
        let d = *g - t;
        sum += d * d;
        *g = 2.0 * d / n;
    }
    Ok((sum / n, grad))
}

/// Affine map from network outputs to physical fields, `phys = std·x + mean`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerScaling {
    pub u_std: f64,
    pub v_std: f64,
    pub v_mean: f64,
}

impl EulerScaling {
    pub const IDENTITY: EulerScaling = EulerScaling {
        u_std: 1.0,
        v_std: 1.0,
        v_mean: 0.0,
    };
}

/// Forward-difference time residual `(u(t+Δt) − u(t))/Δt − v(t)`, squared
/// and averaged over every collocation point (sample, time index < N_T − 1,
/// spatial node). `u` and `v` are `[P, N_T, ...]`.
pub fn loss_euler(u: &Tensor, v: &Tensor, dt: f64) -> Result<(f64, Tensor, Tensor)> {
    loss_euler_scaled(u, v, dt, EulerScaling::IDENTITY)
}

/// As [`loss_euler`] for standardized outputs: the residual is formed in
/// physical units and divided by `v_std`. The `u` mean cancels in the
/// difference.
pub fn loss_euler_scaled(
    u: &Tensor,
    v: &Tensor,
    dt: f64,
    s: EulerScaling,
) -> Result<(f64, Tensor, Tensor)> {
    u.expect_shape(v.shape())?;
    if u.rank() < 2 || u.shape()[1] < 2 {
        return Err(Error::Shape(format!(
            "Euler residual needs [P, N_T >= 2, ...], got {:?}",
            u.shape()
        )));
    }
    let p = u.shape()[0];
    let nt = u.shape()[1];
    let f: usize = u.shape()[2..].iter().product();
    let count = (p * (nt - 1) * f) as f64;
    let a = s.u_std / (dt * s.v_std);
    let mut du = Tensor::zeros(u.shape());
    let mut dv = Tensor::zeros(v.shape());
    let mut sum = 0.0;
    for pi in 0..p {
        for t in 0..nt - 1 {
            for k in 0..f {
                let i0 = (pi * nt + t) * f + k;
                let i1 = i0 + f;
                let r = a * (u.data()[i1] - u.data()[i0]) - v.data()[i0] - s.v_mean / s.v_std;
                sum += r * r;
                let g = 2.0 * r / count;
                du.data_mut()[i1] += g * a;
                du.data_mut()[i0] -= g * a;
                dv.data_mut()[i0] -= g;
            }
        }
    }
    Ok((sum / count, du, dv))
}
