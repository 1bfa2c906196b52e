//! The relative error indicator and the boundary-driven zoom evaluation.

use crate::error::{Error, Result};
use crate::tensor::Tensor;
use crate::wave::{extract_boundary_zoom, submodel_solve, Dataset, GridSpec};

/// Reference slices with a smaller peak are left out of every average.
pub const DENOM_GUARD: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorIndicator {
    /// `ε(M, p, t)` as `[p][t]`; `None` where the reference slice is ~0.
    pub per_sample: Vec<Vec<Option<f64>>>,
    /// `ε(M, t)`: mean over samples with a defined value.
    pub per_time: Vec<Option<f64>>,
    /// Mean of the defined `ε(M, t)`.
    pub mean: f64,
}

/// `ε(M, p, t) = mean_x |M − U| / max_x |U|` for each sample `[N_T, ...]`.
pub fn error_indicator(pred: &[Tensor], reference: &[Tensor]) -> Result<ErrorIndicator> {
    if pred.len() != reference.len() || pred.is_empty() {
        return Err(Error::Shape(format!(
            "{} predictions for {} references",
            pred.len(),
            reference.len()
        )));
    }
    let nt = reference[0].shape().first().copied().unwrap_or(0);
    let mut per_sample = Vec::with_capacity(pred.len());
    for (m, u) in pred.iter().zip(reference) {
        m.expect_shape(u.shape())?;
        if u.shape()[0] != nt {
            return Err(Error::Shape("references differ in time steps".into()));
        }
        let n = u.len() / nt.max(1);
        let row = (0..nt)
            .map(|t| {
                let us = &u.data()[t * n..(t + 1) * n];
                let ms = &m.data()[t * n..(t + 1) * n];
                let peak = us.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                (peak >= DENOM_GUARD).then(|| {
                    let err: f64 = us.iter().zip(ms).map(|(a, b)| (a - b).abs()).sum();
                    err / n as f64 / peak
                })
            })
            .collect::<Vec<_>>();
        per_sample.push(row);
    }
    let per_time: Vec<Option<f64>> = (0..nt)
        .map(|t| {
            let vals: Vec<f64> = per_sample.iter().filter_map(|r| r[t]).collect();
            (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
        })
        .collect();
    let defined: Vec<f64> = per_time.iter().flatten().copied().collect();
    let mean = if defined.is_empty() {
        0.0
    } else {
        defined.iter().sum::<f64>() / defined.len() as f64
    };
    Ok(ErrorIndicator {
        per_sample,
        per_time,
        mean,
    })
}

/// Re-solves every sample's zoom window from `traces` (physical units,
/// `[N_T, n_b]` each) and scores the result against the reference field.
pub fn zoom_from_traces(traces: &[Tensor], data: &Dataset) -> Result<ErrorIndicator> {
    if traces.len() != data.len() {
        return Err(Error::Shape(format!(
            "{} trace sets for {} samples",
            traces.len(),
            data.len()
        )));
    }
    let fields = traces
        .iter()
        .map(|t| submodel_solve(t, &data.grid))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<Tensor> = data.samples.iter().map(|s| s.u.clone()).collect();
    error_indicator(&fields, &refs)
}

/// Ring traces of predicted zoom fields `[N_T, N′_x, N′_y]`.
pub fn traces_of_fields(fields: &[Tensor], g: &GridSpec) -> Result<Vec<Tensor>> {
    fields.iter().map(|f| extract_boundary_zoom(f, g)).collect()
}

/// Zoom evaluation of displacement predictions. Field predictions are
/// reduced to their ring first; boundary predictions are used as is.
pub fn zoom_evaluate(pred_u: &[Tensor], boundary: bool, data: &Dataset) -> Result<ErrorIndicator> {
    if boundary {
        zoom_from_traces(pred_u, data)
    } else {
        zoom_from_traces(&traces_of_fields(pred_u, &data.grid)?, data)
    }
}
