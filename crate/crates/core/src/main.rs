use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sepconv::harness::config::ExperimentConfig;
use sepconv::harness::run::{
    cell_path, compress_model, evaluate, load_cell, load_or_generate, run_cell, save_splits,
    sweep, write_cell,
};
use sepconv::harness::tables::{classify, merge, parse_csv, to_csv, to_text};
use sepconv::harness::zoo::{Regularization, Variant};
use sepconv::nn::count_params;
use sepconv::Error;

#[derive(Parser)]
#[command(name = "sepconv", version, about = "Separable-convolution surrogates for a parametric wave problem")]
struct Cli {
    /// Experiment config (`key = value` lines, `[section]` headers).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides `out_dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the train and test splits into the output directory.
    Generate,
    /// Train one variant × regularization cell.
    Train {
        /// Directory holding train.wds and test.wds; generated when absent.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        variant: Option<Variant>,
        #[arg(long = "reg")]
        regularization: Option<Regularization>,
    },
    /// Train every legal cell of the configured sweep.
    Sweep {
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Re-evaluate trained cells and emit tables.
    Evaluate {
        /// Cell directories written by `train` or `sweep`.
        #[arg(required = true)]
        runs: Vec<PathBuf>,
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Low-rank truncation of a trained model's full convolution kernels.
    Compress {
        run: PathBuf,
        /// Rank kept per kernel; defaults to the config value.
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Merge result CSVs into classified tables.
    Tables {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        threshold: Option<f64>,
    },
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::BatchNormWithEuler | Error::Cfl(_) => {
                Failure::Usage(e.to_string())
            }
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn runtime(e: Error) -> Failure {
    Failure::Runtime(e.to_string())
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out_dir = o.clone();
    }
    Ok(cfg)
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| runtime(e.into()))
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut cfg = load_config(&cli)?;
    let out = cfg.out_dir.clone();
    match cli.command {
        Command::Generate => {
            let (train, test) = load_or_generate(&cfg, None).map_err(runtime)?;
            save_splits(&out, &train, &test).map_err(runtime)?;
            println!(
                "wrote {} train and {} test samples to {}",
                train.len(),
                test.len(),
                out.display()
            );
        }
        Command::Train {
            data,
            variant,
            regularization,
        } => {
            if let Some(v) = variant {
                cfg.variant = v;
            }
            if let Some(r) = regularization {
                cfg.regularization = r;
            }
            cfg.validate()?;
            let (train, test) = load_or_generate(&cfg, data.as_deref())?;
            let cell = run_cell(&cfg, cfg.variant, cfg.regularization, &train, &test)
                .map_err(runtime)?;
            let dir = cell_path(&out, cell.variant, cell.reg);
            write_cell(&dir, &cfg, &cell).map_err(runtime)?;
            let mut rows = cell.rows.clone();
            rows.push(cell.timing.clone());
            classify(&mut rows, cfg.threshold);
            print!("{}", to_text(&rows));
            println!("wrote {}", dir.display());
        }
        Command::Sweep { data } => {
            let (train, test) = load_or_generate(&cfg, data.as_deref())?;
            let res = sweep(&cfg, &train, &test, &out).map_err(runtime)?;
            let all = merge([res.rows.clone(), res.timing.clone()]);
            let text = to_text(&all);
            write(&out.join("tables.txt"), &text)?;
            print!("{text}");
            for (v, r, e) in &res.failures {
                eprintln!("cell {v} / {r} failed: {e}");
            }
            if !res.failures.is_empty() {
                return Err(Failure::Runtime(format!("{} cells failed", res.failures.len())));
            }
        }
        Command::Evaluate { runs, data } => {
            let mut rows = Vec::new();
            for dir in &runs {
                let (cell_cfg, model, sc) = load_cell(dir)?;
                let (train, test) = load_or_generate(&cell_cfg, data.as_deref())?;
                let ev = evaluate(&model, cell_cfg.variant, &train, &test, &sc).map_err(runtime)?;
                rows.extend(ev.rows(cell_cfg.variant, cell_cfg.regularization, count_params(&model)));
            }
            classify(&mut rows, cfg.threshold);
            fs::create_dir_all(&out).map_err(|e| runtime(e.into()))?;
            write(&out.join("results.csv"), &to_csv(&rows))?;
            let text = to_text(&rows);
            write(&out.join("tables.txt"), &text)?;
            print!("{text}");
        }
        Command::Compress { run, rank, data } => {
            let (cell_cfg, mut model, sc) = load_cell(&run)?;
            let rank = rank.unwrap_or(cfg.compress_rank);
            if rank == 0 {
                return Err(Failure::Usage("--rank must be positive".into()));
            }
            let (train, test) = load_or_generate(&cell_cfg, data.as_deref())?;
            let v = cell_cfg.variant;
            let before = evaluate(&model, v, &train, &test, &sc).map_err(runtime)?;
            let report = compress_model(&mut model, rank).map_err(runtime)?;
            if report.is_empty() {
                println!("no full 2D/3D convolution kernels to compress in {v}");
                return Ok(());
            }
            let after = evaluate(&model, v, &train, &test, &sc).map_err(runtime)?;
            let mut csv = String::from("layer,filter,shape,rank,relative_residual\n");
            for k in &report {
                let shape: Vec<String> = k.shape.iter().map(|s| s.to_string()).collect();
                csv.push_str(&format!(
                    "{},{},{},{},{}\n",
                    k.layer,
                    k.filter,
                    shape.join("x"),
                    k.rank,
                    k.relative_residual
                ));
            }
            fs::create_dir_all(&out).map_err(|e| runtime(e.into()))?;
            write(&out.join("compress.csv"), &csv)?;
            let max = report.iter().map(|k| k.relative_residual).fold(0.0, f64::max);
            let mean = report.iter().map(|k| k.relative_residual).sum::<f64>() / report.len() as f64;
            println!("kernels compressed: {} at rank {rank}", report.len());
            println!("relative residual: mean {mean:.6e}, max {max:.6e}");
            for (name, b, a) in [
                ("train_eps_u", before.train_u.mean, after.train_u.mean),
                ("train_eps_v", before.train_v.mean, after.train_v.mean),
                ("test_eps_u", before.test_u.mean, after.test_u.mean),
                ("test_eps_v", before.test_v.mean, after.test_v.mean),
                ("zoom_eps", before.zoom.mean, after.zoom.mean),
            ] {
                println!("{name}: {b:.6e} -> {a:.6e} (drift {:+.3e})", a - b);
            }
        }
        Command::Tables { files, threshold } => {
            let parts = files
                .iter()
                .map(|f| {
                    let text = fs::read_to_string(f)
                        .map_err(|e| Failure::Runtime(format!("{}: {e}", f.display())))?;
                    parse_csv(&text).map_err(runtime)
                })
                .collect::<Result<Vec<_>, _>>()?;
            let mut rows = merge(parts);
            classify(&mut rows, threshold.unwrap_or(cfg.threshold));
            fs::create_dir_all(&out).map_err(|e| runtime(e.into()))?;
            write(&out.join("results.csv"), &to_csv(&rows))?;
            let text = to_text(&rows);
            write(&out.join("tables.txt"), &text)?;
            print!("{text}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
