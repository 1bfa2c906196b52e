//! One table cell end to end, sweeps over many cells, and post-hoc kernel
//! compression.

use std::fs;
use std::io::{BufReader, BufWriter, Write as _};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::decomp::{decompose_2d, decompose_3d, reconstruct, residual_norm};
use crate::error::{Error, Result};
use crate::harness::config::ExperimentConfig;
use crate::harness::metrics::{error_indicator, zoom_evaluate, ErrorIndicator};
use crate::harness::tables::{
    classify, to_csv, ResultRow, EPOCH_TIME, PARAMS, TEST_EPS_U, TEST_EPS_V, TRAIN_EPS_U,
    TRAIN_EPS_V, ZOOM_EPS,
};
use crate::harness::train::{predict, train, Prepared, Scalers, TrainReport};
use crate::harness::zoo::{build_model, legal_cells, Regularization, Variant};
use crate::nn::checkpoint::{read_checkpoint, save_model};
use crate::nn::{count_params, LayerKind, Model};
use crate::tensor::Tensor;
use crate::wave::Dataset;

pub const TRAIN_FILE: &str = "train.wds";
pub const TEST_FILE: &str = "test.wds";
pub const CHECKPOINT_FILE: &str = "model.ckpt";
pub const CONFIG_FILE: &str = "config.cfg";
pub const METRICS_FILE: &str = "metrics.csv";
pub const TIMING_FILE: &str = "timing.csv";
pub const HISTORY_FILE: &str = "history.csv";

/// Model seed of one cell: distinct per cell, fixed by the global seed.
pub fn cell_seed(seed: u64, v: Variant, reg: Regularization) -> u64 {
    let vi = Variant::ALL.iter().position(|&x| x == v).unwrap_or(0) as u64;
    let ri = reg.bn as u64 | (reg.euler as u64) << 1 | (reg.shared as u64) << 2;
    seed ^ (1 + vi * 8 + ri).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

/// Directory name of a cell, e.g. `Conv2.5D__BN&SL`.
pub fn cell_dir_name(v: Variant, reg: Regularization) -> String {
    format!("{}__{}", v.name(), reg.label())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub train_u: ErrorIndicator,
    pub train_v: ErrorIndicator,
    pub test_u: ErrorIndicator,
    pub test_v: ErrorIndicator,
    /// Zoom re-solve from predicted test traces.
    pub zoom: ErrorIndicator,
}

fn references(v: Variant, data: &Dataset) -> (Vec<Tensor>, Vec<Tensor>) {
    data.samples
        .iter()
        .map(|s| {
            if v.boundary() {
                (s.boundary_u.clone(), s.boundary_v.clone())
            } else {
                (s.u.clone(), s.v.clone())
            }
        })
        .unzip()
}

pub fn evaluate(model: &Model, v: Variant, train: &Dataset, test: &Dataset, sc: &Scalers) -> Result<Evaluation> {
    let split = |data: &Dataset| -> Result<(ErrorIndicator, ErrorIndicator, Vec<Tensor>)> {
        let prepared = Prepared::new(v, data, sc)?;
        let (pu, pv) = predict(model, &prepared, sc)?;
        let (ru, rv) = references(v, data);
        Ok((error_indicator(&pu, &ru)?, error_indicator(&pv, &rv)?, pu))
    };
    let (train_u, train_v, _) = split(train)?;
    let (test_u, test_v, pu) = split(test)?;
    let zoom = zoom_evaluate(&pu, v.boundary(), test)?;
    Ok(Evaluation {
        train_u,
        train_v,
        test_u,
        test_v,
        zoom,
    })
}

impl Evaluation {
    pub fn rows(&self, v: Variant, reg: Regularization, params: usize) -> Vec<ResultRow> {
        vec![
            ResultRow::new(v, reg, PARAMS, params as f64),
            ResultRow::new(v, reg, TRAIN_EPS_U, self.train_u.mean),
            ResultRow::new(v, reg, TRAIN_EPS_V, self.train_v.mean),
            ResultRow::new(v, reg, TEST_EPS_U, self.test_u.mean),
            ResultRow::new(v, reg, TEST_EPS_V, self.test_v.mean),
            ResultRow::new(v, reg, ZOOM_EPS, self.zoom.mean),
        ]
    }
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub variant: Variant,
    pub reg: Regularization,
    pub model: Model,
    pub scalers: Scalers,
    pub report: TrainReport,
    pub eval: Evaluation,
    /// Deterministic metrics (everything except timing).
    pub rows: Vec<ResultRow>,
    /// The mean epoch time, kept apart so metric files stay reproducible.
    pub timing: ResultRow,
}

/// Builds, trains and evaluates one cell. Scalers are fitted on `train`.
pub fn run_cell(
    cfg: &ExperimentConfig,
    v: Variant,
    reg: Regularization,
    train_set: &Dataset,
    test_set: &Dataset,
) -> Result<CellResult> {
    reg.validate()?;
    let g = &train_set.grid;
    let sc = Scalers::fit(train_set);
    let seed = cell_seed(cfg.seed, v, reg);
    let mut model = build_model(v, reg, g, &cfg.arch, seed)?;
    let prepared = Prepared::new(v, train_set, &sc)?;
    let report = train(&mut model, &prepared, reg, g, &sc, &cfg.train, seed)?;
    let eval = evaluate(&model, v, train_set, test_set, &sc)?;
    let rows = eval.rows(v, reg, count_params(&model));
    let timing = ResultRow::new(v, reg, EPOCH_TIME, report.mean_epoch_time());
    Ok(CellResult {
        variant: v,
        reg,
        model,
        scalers: sc,
        report,
        eval,
        rows,
        timing,
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = BufWriter::new(fs::File::create(path)?);
    f.write_all(text.as_bytes())?;
    f.flush()?;
    Ok(())
}

/// Writes a cell's checkpoint (with scalers), config, metrics, timing and
/// loss history under `dir`.
pub fn write_cell(dir: &Path, cfg: &ExperimentConfig, cell: &CellResult) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut ckpt = BufWriter::new(fs::File::create(dir.join(CHECKPOINT_FILE))?);
    save_model(&mut ckpt, &cell.model, &cell.scalers.named_tensors())?;
    ckpt.flush()?;
    let cell_cfg = ExperimentConfig {
        variant: cell.variant,
        regularization: cell.reg,
        ..cfg.clone()
    };
    write_text(&dir.join(CONFIG_FILE), &cell_cfg.to_text())?;
    write_text(&dir.join(METRICS_FILE), &to_csv(&cell.rows))?;
    write_text(&dir.join(TIMING_FILE), &to_csv(std::slice::from_ref(&cell.timing)))?;
    // wall-clock times stay out of this file so it is reproducible
    let mut hist = String::from("epoch,loss\n");
    for (i, l) in cell.report.history.iter().enumerate() {
        hist.push_str(&format!("{},{l}\n", i + 1));
    }
    write_text(&dir.join(HISTORY_FILE), &hist)
}

/// Rebuilds a trained cell from its directory: config, model and scalers.
pub fn load_cell(dir: &Path) -> Result<(ExperimentConfig, Model, Scalers)> {
    let cfg = ExperimentConfig::load(&dir.join(CONFIG_FILE))?;
    let state = read_checkpoint(&mut BufReader::new(fs::File::open(dir.join(CHECKPOINT_FILE))?))?;
    let mut model = build_model(
        cfg.variant,
        cfg.regularization,
        &cfg.grid,
        &cfg.arch,
        cell_seed(cfg.seed, cfg.variant, cfg.regularization),
    )?;
    model.load_state(&state)?;
    let sc = Scalers::from_named(&state)?;
    Ok((cfg, model, sc))
}

/// Train and test splits from `data_dir` if given, otherwise generated from
/// the config. Loaded data must match the configured grid.
pub fn load_or_generate(cfg: &ExperimentConfig, data_dir: Option<&Path>) -> Result<(Dataset, Dataset)> {
    match data_dir {
        Some(d) => {
            let train = Dataset::load(&d.join(TRAIN_FILE))?;
            let test = Dataset::load(&d.join(TEST_FILE))?;
            if train.grid != cfg.grid || test.grid != cfg.grid {
                return Err(Error::Config(format!(
                    "data in {} was generated on a different grid than the config",
                    d.display()
                )));
            }
            Ok((train, test))
        }
        None => Dataset::generate(&cfg.grid, &cfg.sampling, cfg.seed),
    }
}

pub fn save_splits(dir: &Path, train: &Dataset, test: &Dataset) -> Result<()> {
    fs::create_dir_all(dir)?;
    train.save(&dir.join(TRAIN_FILE))?;
    test.save(&dir.join(TEST_FILE))
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    /// Classified metric rows of every finished cell.
    pub rows: Vec<ResultRow>,
    pub timing: Vec<ResultRow>,
    /// Cells that failed, with the reason.
    pub failures: Vec<(Variant, Regularization, String)>,
}

/// Runs every legal cell of the configured sweep in parallel, writing each
/// cell under `out/<cell>/` and the merged `results.csv` and `timing.csv`
/// under `out`. A failing cell is reported, not fatal.
pub fn sweep(cfg: &ExperimentConfig, train_set: &Dataset, test_set: &Dataset, out: &Path) -> Result<SweepOutcome> {
    let cells = legal_cells(&cfg.sweep_variants, &cfg.sweep_regularizations);
    fs::create_dir_all(out)?;
    let results: Vec<_> = cells
        .par_iter()
        .map(|&(v, r)| {
            let res = run_cell(cfg, v, r, train_set, test_set).and_then(|cell| {
                write_cell(&out.join(cell_dir_name(v, r)), cfg, &cell)?;
                Ok((cell.rows, cell.timing))
            });
            (v, r, res)
        })
        .collect();
    let mut outcome = SweepOutcome {
        rows: Vec::new(),
        timing: Vec::new(),
        failures: Vec::new(),
    };
    for (v, r, res) in results {
        match res {
            Ok((rows, t)) => {
                outcome.rows.extend(rows);
                outcome.timing.push(t);
            }
            Err(e) => outcome.failures.push((v, r, e.to_string())),
        }
    }
    classify(&mut outcome.rows, cfg.threshold);
    classify(&mut outcome.timing, cfg.threshold);
    write_text(&out.join("results.csv"), &to_csv(&outcome.rows))?;
    write_text(&out.join(TIMING_FILE), &to_csv(&outcome.timing))?;
    Ok(outcome)
}

/// Truncation of one full convolution kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelCompression {
    pub layer: usize,
    pub filter: usize,
    pub shape: Vec<usize>,
    pub rank: usize,
    /// `‖K − K_r‖_F / ‖K‖_F`.
    pub relative_residual: f64,
}

/// Replaces every 2D and 3D full-convolution kernel by its rank-`rank`
/// reconstruction (slice-wise along the last axis for 3D). Ranks above an
/// axis limit are clamped. Other layers are left untouched.
pub fn compress_model(model: &mut Model, rank: usize) -> Result<Vec<KernelCompression>> {
    let mut out = Vec::new();
    for (li, layer) in model.layers_mut().enumerate() {
        let LayerKind::Conv(conv) = &mut layer.kind else {
            continue;
        };
        let ext = conv.extents().to_vec();
        if !(2..=3).contains(&ext.len()) {
            continue;
        }
        let r = rank.min(ext[0].min(ext[1])).max(1);
        let klen: usize = ext.iter().product();
        for f in 0..conv.filters() {
            let k = conv.filter_kernel(f);
            let d = if ext.len() == 2 {
                decompose_2d(&k, r)?
            } else {
                decompose_3d(&k, r)?
            };
            let norm = k.frobenius_norm();
            let res = residual_norm(&k, &d)?;
            conv.kernel.value.data_mut()[f * klen..(f + 1) * klen]
                .copy_from_slice(reconstruct(&d).data());
            out.push(KernelCompression {
                layer: li,
                filter: f,
                shape: ext.clone(),
                rank: r,
                relative_residual: if norm > 0.0 { res / norm } else { 0.0 },
            });
        }
    }
    Ok(out)
}

/// Output paths used by the CLI for a cell under `out`.
pub fn cell_path(out: &Path, v: Variant, reg: Regularization) -> PathBuf {
    out.join(cell_dir_name(v, reg))
}
