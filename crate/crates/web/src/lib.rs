//! Browser bindings: wave-field simulation, kernel rank truncation, and a
//! side-by-side full vs. separable filter.
//!
//! Each export is a thin wrapper over a plain Rust function so the logic is
//! testable natively.

use sepconv::conv::conv2d_valid;
use sepconv::decomp::{decompose_2d, reconstruct};
use sepconv::svd::svd_small;
use sepconv::wave::{solve_wave, GridSpec, WaveParams};
use sepconv::Tensor;
use wasm_bindgen::prelude::*;

#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct WaveFrames {
    n: usize,
    nt: usize,
    zoom: [usize; 4],
    dt: f64,
    data: Vec<f64>,
    peak: f64,
}

#[wasm_bindgen]
impl WaveFrames {
    /// Nodes per axis.
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn steps(&self) -> usize {
        self.nt
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Largest |u| over the whole run, for a fixed color scale.
    pub fn peak(&self) -> f64 {
        self.peak
    }

    /// `[x0, y0, nx, ny]` of the zone of interest in node indices.
    pub fn zoom(&self) -> Vec<usize> {
        self.zoom.to_vec()
    }

    /// Row-major `n × n` displacement at step `t` (clamped).
    pub fn frame(&self, t: usize) -> Vec<f64> {
        let t = t.min(self.nt - 1);
        let m = self.n * self.n;
        self.data[t * m..(t + 1) * m].to_vec()
    }
}

/// Point source `sin(ω t)` at `(xs, ys)` on `[-1, 1]²` with an `n × n` grid
/// and a centered zoom window a quarter of the width.
pub fn simulate_frames(omega: f64, xs: f64, ys: f64, n: usize, nt: usize) -> Result<WaveFrames, String> {
    if !(8..=256).contains(&n) || !(2..=2048).contains(&nt) {
        return Err(format!("grid {n}×{n} with {nt} steps is out of range"));
    }
    if xs.abs() > 1.0 || ys.abs() > 1.0 {
        return Err("source must lie inside [-1, 1]²".into());
    }
    let g = GridSpec::centered(1.0, 1.0, n, n, n / 4, n / 4, nt, 1.0).map_err(|e| e.to_string())?;
    let u = solve_wave(&WaveParams { omega, xs, ys }, &g).map_err(|e| e.to_string())?;
    Ok(WaveFrames {
        n,
        nt,
        zoom: [g.zoom_x0, g.zoom_y0, g.zoom_nx, g.zoom_ny],
        dt: g.dt(),
        peak: u.max_abs(),
        data: u.into_data(),
    })
}

#[wasm_bindgen]
pub fn simulate(omega: f64, xs: f64, ys: f64, n: usize, nt: usize) -> Result<WaveFrames, JsError> {
    simulate_frames(omega, xs, ys, n, nt).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct Truncation {
    singular_values: Vec<f64>,
    approx: Vec<f64>,
    relative_residual: f64,
    full_params: usize,
    factored_params: usize,
}

#[wasm_bindgen]
impl Truncation {
    pub fn singular_values(&self) -> Vec<f64> {
        self.singular_values.clone()
    }

    /// Row-major rank-r kernel.
    pub fn approx(&self) -> Vec<f64> {
        self.approx.clone()
    }

    /// `‖K − K_r‖ / ‖K‖`.
    pub fn relative_residual(&self) -> f64 {
        self.relative_residual
    }

    pub fn full_params(&self) -> usize {
        self.full_params
    }

    /// `r · (rows + cols)`.
    pub fn factored_params(&self) -> usize {
        self.factored_params
    }
}

fn kernel_tensor(values: &[f64], rows: usize, cols: usize) -> Result<Tensor, String> {
    if rows == 0 || cols == 0 || values.len() != rows * cols {
        return Err(format!("{} values do not fill a {rows}×{cols} kernel", values.len()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err("kernel entries must be finite".into());
    }
    Tensor::matrix(rows, cols, values.to_vec()).map_err(|e| e.to_string())
}

pub fn truncate_kernel(values: &[f64], rows: usize, cols: usize, rank: usize) -> Result<Truncation, String> {
    let k = kernel_tensor(values, rows, cols)?;
    let singular_values = svd_small(&k).map_err(|e| e.to_string())?.singular_values;
    let d = decompose_2d(&k, rank).map_err(|e| e.to_string())?;
    let approx = reconstruct(&d);
    let norm = k.frobenius_norm();
    let res = k.sub(&approx).map_err(|e| e.to_string())?.frobenius_norm();
    Ok(Truncation {
        singular_values,
        approx: approx.into_data(),
        relative_residual: if norm > 0.0 { res / norm } else { 0.0 },
        full_params: rows * cols,
        factored_params: rank * (rows + cols),
    })
}

#[wasm_bindgen]
pub fn truncate(values: &[f64], rows: usize, cols: usize, rank: usize) -> Result<Truncation, JsError> {
    truncate_kernel(values, rows, cols, rank).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct Filtered {
    rows: usize,
    cols: usize,
    full: Vec<f64>,
    separable: Vec<f64>,
    max_abs_diff: f64,
    full_macs: usize,
    separable_macs: usize,
}

#[wasm_bindgen]
impl Filtered {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn full(&self) -> Vec<f64> {
        self.full.clone()
    }

    pub fn separable(&self) -> Vec<f64> {
        self.separable.clone()
    }

    pub fn max_abs_diff(&self) -> f64 {
        self.max_abs_diff
    }

    /// Multiply-adds of the direct 2D correlation.
    pub fn full_macs(&self) -> usize {
        self.full_macs
    }

    /// Multiply-adds of the column-then-row passes over all kept terms.
    pub fn separable_macs(&self) -> usize {
        self.separable_macs
    }
}

/// Correlates a `rows × cols` field with the full kernel and with its
/// rank-`rank` truncation run as pairs of 1D passes.
pub fn filter_field(
    field: &[f64],
    rows: usize,
    cols: usize,
    kernel: &[f64],
    k_rows: usize,
    k_cols: usize,
    rank: usize,
) -> Result<Filtered, String> {
    if field.len() != rows * cols {
        return Err(format!("{} values do not fill a {rows}×{cols} field", field.len()));
    }
    let x = Tensor::matrix(rows, cols, field.to_vec()).map_err(|e| e.to_string())?;
    let k = kernel_tensor(kernel, k_rows, k_cols)?;
    let full = conv2d_valid(&x, &k).map_err(|e| e.to_string())?;
    let d = decompose_2d(&k, rank).map_err(|e| e.to_string())?;
    let mut sep = Tensor::zeros(full.shape());
    for t in d.terms() {
        let col = Tensor::matrix(k_rows, 1, t.left.clone()).map_err(|e| e.to_string())?;
        let row = Tensor::matrix(1, k_cols, t.right.clone()).map_err(|e| e.to_string())?;
        let stage = conv2d_valid(&x, &col).map_err(|e| e.to_string())?;
        let y = conv2d_valid(&stage, &row).map_err(|e| e.to_string())?;
        sep.add_assign(&y).map_err(|e| e.to_string())?;
    }
    let (or, oc) = (full.shape()[0], full.shape()[1]);
    let max_abs_diff = full.sub(&sep).map_err(|e| e.to_string())?.max_abs();
    Ok(Filtered {
        rows: or,
        cols: oc,
        full_macs: or * oc * k_rows * k_cols,
        separable_macs: rank * (or * cols * k_rows + or * oc * k_cols),
        max_abs_diff,
        full: full.into_data(),
        separable: sep.into_data(),
    })
}

#[wasm_bindgen]
pub fn filter(
    field: &[f64],
    rows: usize,
    cols: usize,
    kernel: &[f64],
    k_rows: usize,
    k_cols: usize,
    rank: usize,
) -> Result<Filtered, JsError> {
    filter_field(field, rows, cols, kernel, k_rows, k_cols, rank).map_err(|e| JsError::new(&e))
}
