//! Plain-text experiment configuration.
//!
//! ```text
//! # comment
//! seed = 7
//! [grid]
//! nx = 64
//! ```
//!
//! Keys before the first section are global. Unknown sections and keys are
//! errors, as are repeated keys.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::harness::tables::DEFAULT_THRESHOLD;
use crate::harness::train::TrainConfig;
use crate::harness::zoo::{Arch, Regularization, Variant};
use crate::wave::{GridSpec, SamplingConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub grid: GridSpec,
    pub sampling: SamplingConfig,
    pub arch: Arch,
    pub variant: Variant,
    pub regularization: Regularization,
    pub train: TrainConfig,
    pub threshold: f64,
    /// Rank kept per kernel by `compress`.
    pub compress_rank: usize,
    pub sweep_variants: Vec<Variant>,
    pub sweep_regularizations: Vec<Regularization>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            out_dir: PathBuf::from("results"),
            grid: GridSpec::desk(),
            sampling: SamplingConfig::default(),
            arch: Arch::default(),
            variant: Variant::Conv25D,
            regularization: Regularization::BASIC,
            train: TrainConfig::default(),
            threshold: DEFAULT_THRESHOLD,
            compress_rank: 1,
            sweep_variants: Variant::ALL.to_vec(),
            sweep_regularizations: Regularization::COLUMNS.to_vec(),
        }
    }
}

type Sections = BTreeMap<String, BTreeMap<String, (usize, String)>>;

fn tokenize(text: &str) -> Result<Sections> {
    let mut out: Sections = BTreeMap::new();
    out.insert(String::new(), BTreeMap::new());
    let mut section = String::new();
    for (no, raw) in text.lines().enumerate() {
        let no = no + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| Error::Config(format!("line {no}: unterminated section header")))?
                .trim()
                .to_string();
            if out.contains_key(&name) {
                return Err(Error::Config(format!("line {no}: repeated section [{name}]")));
            }
            out.insert(name.clone(), BTreeMap::new());
            section = name;
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {no}: expected `key = value`")))?;
        let k = k.trim().to_string();
        if k.is_empty() {
            return Err(Error::Config(format!("line {no}: empty key")));
        }
        let table = out.get_mut(&section).expect("section exists");
        if table.insert(k.clone(), (no, v.trim().to_string())).is_some() {
            return Err(Error::Config(format!("line {no}: repeated key `{k}`")));
        }
    }
    Ok(out)
}

/// Consumes keys of one section, so leftovers can be reported.
struct Reader<'a> {
    section: &'a str,
    keys: BTreeMap<String, (usize, String)>,
}

impl Reader<'_> {
    fn raw(&mut self, key: &str) -> Option<(usize, String)> {
        self.keys.remove(key)
    }

    fn parse<T: std::str::FromStr>(&mut self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        match self.raw(key) {
            None => Ok(default),
            Some((no, v)) => v.parse().map_err(|e| {
                Error::Config(format!("line {no}: [{}] {key} = `{v}`: {e}", self.section))
            }),
        }
    }

    fn opt<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some((no, v)) => v.parse().map(Some).map_err(|e| {
                Error::Config(format!("line {no}: [{}] {key} = `{v}`: {e}", self.section))
            }),
        }
    }

    fn finish(self) -> Result<()> {
        match self.keys.into_iter().next() {
            None => Ok(()),
            Some((k, (no, _))) => Err(Error::Config(format!(
                "line {no}: unknown key `{k}` in {}",
                if self.section.is_empty() {
                    "the global section".to_string()
                } else {
                    format!("[{}]", self.section)
                }
            ))),
        }
    }
}

fn list<T: std::str::FromStr<Err = Error>>(v: &str, all: &[T]) -> Result<Vec<T>>
where
    T: Clone,
{
    if v.trim().eq_ignore_ascii_case("all") {
        return Ok(all.to_vec());
    }
    v.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.parse())
        .collect()
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut sections = tokenize(text)?;
        let d = Self::default();
        let mut take = |name: &'static str| Reader {
            section: name,
            keys: sections.remove(name).unwrap_or_default(),
        };

        let mut global = take("");
        let seed = global.parse("seed", d.seed)?;
        let out_dir = global.parse("out_dir", d.out_dir.display().to_string())?.into();
        global.finish()?;

        let mut gr = take("grid");
        let dg = &d.grid;
        let lx = gr.parse("lx", dg.lx)?;
        let ly = gr.parse("ly", dg.ly)?;
        let nx = gr.parse("nx", dg.nx)?;
        let ny = gr.parse("ny", dg.ny)?;
        let zoom_nx = gr.parse("zoom_nx", dg.zoom_nx)?;
        let zoom_ny = gr.parse("zoom_ny", dg.zoom_ny)?;
        let nt = gr.parse("nt", dg.nt)?;
        let c = gr.parse("c", dg.c)?;
        let mut grid = GridSpec::centered(lx, ly, nx, ny, zoom_nx, zoom_ny, nt, c)?;
        if let Some(x0) = gr.opt("zoom_x0")? {
            grid.zoom_x0 = x0;
        }
        if let Some(y0) = gr.opt("zoom_y0")? {
            grid.zoom_y0 = y0;
        }
        if let Some(t) = gr.opt("t_final")? {
            grid.t_final = t;
        }
        gr.finish()?;

        let mut sa = take("sampling");
        let ds = d.sampling;
        let sampling = SamplingConfig {
            omega_min: sa.parse("omega_min", ds.omega_min)?,
            omega_max: sa.parse("omega_max", ds.omega_max)?,
            n_train: sa.parse("n_train", ds.n_train)?,
            n_test: sa.parse("n_test", ds.n_test)?,
        };
        sa.finish()?;

        let mut mo = take("model");
        let da = d.arch;
        let variant = mo.parse("variant", d.variant)?;
        let regularization = mo.parse("regularization", d.regularization)?;
        let arch = Arch {
            kernel: mo.parse("kernel", da.kernel)?,
            filters: mo.parse("filters", da.filters)?,
            blocks: mo.parse("blocks", da.blocks)?,
            lift_width: mo.parse("lift_width", da.lift_width)?,
            fc_width: mo.parse("fc_width", da.fc_width)?,
            fc_depth: mo.parse("fc_depth", da.fc_depth)?,
        };
        mo.finish()?;

        let mut tr = take("train");
        let dt = &d.train;
        let train = TrainConfig {
            epochs: tr.parse("epochs", dt.epochs)?,
            lr0: tr.parse("lr0", dt.lr0)?,
            lr_final: tr.parse("lr_final", dt.lr_final)?,
            lr_decay: tr.parse("lr_decay", dt.lr_decay)?,
            batch_size: tr.parse("batch_size", dt.batch_size)?,
            euler_weight: tr.parse("euler_weight", dt.euler_weight)?,
        };
        tr.finish()?;

        let mut ev = take("eval");
        let threshold = ev.parse("acceptable_threshold", d.threshold)?;
        let compress_rank = ev.parse("compress_rank", d.compress_rank)?;
        ev.finish()?;

        let mut sw = take("sweep");
        let sweep_variants = match sw.raw("variants") {
            None => d.sweep_variants.clone(),
            Some((no, v)) => list(&v, &Variant::ALL)
                .map_err(|e| Error::Config(format!("line {no}: [sweep] variants: {e}")))?,
        };
        let sweep_regularizations = match sw.raw("regularizations") {
            None => d.sweep_regularizations.clone(),
            Some((no, v)) => list(&v, &Regularization::COLUMNS)
                .map_err(|e| Error::Config(format!("line {no}: [sweep] regularizations: {e}")))?,
        };
        sw.finish()?;

        if let Some(name) = sections.keys().next() {
            return Err(Error::Config(format!("unknown section [{name}]")));
        }
        let cfg = Self {
            seed,
            out_dir,
            grid,
            sampling,
            arch,
            variant,
            regularization,
            train,
            threshold,
            compress_rank,
            sweep_variants,
            sweep_regularizations,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.regularization.validate()?;
        for r in &self.sweep_regularizations {
            r.validate()?;
        }
        let s = &self.sampling;
        if !(s.omega_min <= s.omega_max) || s.n_train == 0 || s.n_test == 0 {
            return Err(Error::Config(format!("invalid sampling settings {s:?}")));
        }
        let t = &self.train;
        if !(t.lr0 > 0.0 && t.lr_final > 0.0 && t.euler_weight >= 0.0) {
            return Err(Error::Config(format!("invalid training settings {t:?}")));
        }
        let a = &self.arch;
        if a.kernel == 0 || a.filters == 0 || a.lift_width == 0 || a.fc_width == 0 {
            return Err(Error::Config(format!("architecture widths must be positive: {a:?}")));
        }
        if !(self.threshold > 0.0) || self.compress_rank == 0 {
            return Err(Error::Config(
                "acceptable_threshold and compress_rank must be positive".into(),
            ));
        }
        if self.sweep_variants.is_empty() || self.sweep_regularizations.is_empty() {
            return Err(Error::Config("sweep lists must not be empty".into()));
        }
        Ok(())
    }

    /// Canonical text form; parses back to an equal config.
    pub fn to_text(&self) -> String {
        let g = &self.grid;
        let mut s = String::new();
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "out_dir = {}", self.out_dir.display());
        let _ = writeln!(s, "\n[grid]");
        let _ = writeln!(s, "lx = {}\nly = {}", g.lx, g.ly);
        let _ = writeln!(s, "nx = {}\nny = {}", g.nx, g.ny);
        let _ = writeln!(s, "zoom_nx = {}\nzoom_ny = {}", g.zoom_nx, g.zoom_ny);
        let _ = writeln!(s, "zoom_x0 = {}\nzoom_y0 = {}", g.zoom_x0, g.zoom_y0);
        let _ = writeln!(s, "nt = {}\nc = {}\nt_final = {}", g.nt, g.c, g.t_final);
        let sa = &self.sampling;
        let _ = writeln!(s, "\n[sampling]");
        let _ = writeln!(s, "omega_min = {}\nomega_max = {}", sa.omega_min, sa.omega_max);
        let _ = writeln!(s, "n_train = {}\nn_test = {}", sa.n_train, sa.n_test);
        let a = &self.arch;
        let _ = writeln!(s, "\n[model]");
        let _ = writeln!(s, "variant = {}\nregularization = {}", self.variant, self.regularization);
        let _ = writeln!(s, "kernel = {}\nfilters = {}\nblocks = {}", a.kernel, a.filters, a.blocks);
        let _ = writeln!(s, "lift_width = {}\nfc_width = {}\nfc_depth = {}", a.lift_width, a.fc_width, a.fc_depth);
        let t = &self.train;
        let _ = writeln!(s, "\n[train]");
        let _ = writeln!(s, "epochs = {}\nlr0 = {}\nlr_final = {}", t.epochs, t.lr0, t.lr_final);
        let _ = writeln!(s, "lr_decay = {}\nbatch_size = {}\neuler_weight = {}", t.lr_decay, t.batch_size, t.euler_weight);
        let _ = writeln!(s, "\n[eval]");
        let _ = writeln!(s, "acceptable_threshold = {}\ncompress_rank = {}", self.threshold, self.compress_rank);
        let join = |v: Vec<String>| v.join(", ");
        let _ = writeln!(s, "\n[sweep]");
        let _ = writeln!(s, "variants = {}", join(self.sweep_variants.iter().map(|v| v.to_string()).collect()));
        let _ = writeln!(
            s,
            "regularizations = {}",
            join(self.sweep_regularizations.iter().map(|r| r.label()).collect())
        );
        s
    }
}
