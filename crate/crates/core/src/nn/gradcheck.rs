//! Central finite-difference check of model parameter gradients.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::nn::model::Model;
use crate::tensor::Tensor;

pub const FD_STEP: f64 = 1e-5;

/// Denominator floor of the relative error. Central differences at
/// `FD_STEP` carry about 1e-11 of cancellation noise on an O(1) loss, so
/// gradients far below this scale are compared in absolute terms.
pub const REL_FLOOR: f64 = 1e-4;

#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub checked: usize,
    pub max_rel_error: f64,
    /// `(param index, flat index, analytic, numeric)` of the worst coordinate.
    pub worst: Option<(usize, usize, f64, f64)>,
}

/// `L = Σ_h <weights_h, M_h(x)>`, evaluated in training mode.
fn weighted_loss(model: &mut Model, x: &Tensor, weights: &[Tensor]) -> Result<f64> {
    let outs = model.forward_train(x)?;
    model.clear_cache();
    Ok(outs
        .iter()
        .zip(weights)
        .map(|(o, w)| o.data().iter().zip(w.data()).map(|(a, b)| a * b).sum::<f64>())
        .sum())
}

/// Relative error `|a − n| / max(|a|, |n|, floor)`.
pub fn relative_error(analytic: f64, numeric: f64, floor: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor)
}

/// Compares backprop gradients with central differences on up to
/// `per_param` random coordinates of every parameter tensor.
pub fn check_gradients(
    model: &mut Model,
    x: &Tensor,
    weights: &[Tensor],
    per_param: usize,
    seed: u64,
) -> Result<GradCheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    model.zero_grad();
    model.forward_train(x)?;
    model.backward(weights)?;
    let analytic: Vec<Tensor> = model.params().iter().map(|p| p.grad.clone()).collect();

    let mut report = GradCheckReport {
        checked: 0,
        max_rel_error: 0.0,
        worst: None,
    };
    for (pi, grad) in analytic.iter().enumerate() {
        let n = grad.len();
        for idx in sample(&mut rng, n, per_param.min(n)) {
            let orig = model.params()[pi].value.data()[idx];
            let mut eval = |v: f64| -> Result<f64> {
                model.params_mut()[pi].value.data_mut()[idx] = v;
                weighted_loss(model, x, weights)
            };
            let plus = eval(orig + FD_STEP)?;
            let minus = eval(orig - FD_STEP)?;
            eval(orig)?;
            let numeric = (plus - minus) / (2.0 * FD_STEP);
            let a = grad.data()[idx];
            let err = relative_error(a, numeric, REL_FLOOR);
            report.checked += 1;
            if err > report.max_rel_error || report.worst.is_none() {
                report.max_rel_error = report.max_rel_error.max(err);
                report.worst = Some((pi, idx, a, numeric));
            }
        }
    }
    Ok(report)
}
