//! Sample generation and the `WDS1` dataset file.
//!
//! ```text
//! magic    b"WDS1"
//! version  u32
//! grid     lx f64, ly f64, nx u64, ny u64, zoom_x0 u64, zoom_y0 u64,
//!          zoom_nx u64, zoom_ny u64, t_final f64, nt u64, c f64
//! count    u64
//! samples  omega f64, xs f64, ys f64, then tensor records
//!          "u", "v", "boundary_u", "boundary_v"
//! ```

use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::nn::checkpoint::{
    read_f64, read_tensor, read_u32, read_u64, write_f64, write_tensor, write_u32, write_u64,
};
use crate::tensor::Tensor;
use crate::wave::grid::GridSpec;
use crate::wave::lhs::{lhs_sample, Exclusion};
use crate::wave::solver::{
    extract_boundary_zoom, restrict, solve_wave, velocity_field, WaveParams,
};

pub const DATASET_MAGIC: &[u8; 4] = b"WDS1";
pub const DATASET_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub params: WaveParams,
    /// Displacement on the zoom window, `[N_T, N′_x, N′_y]`.
    pub u: Tensor,
    /// Velocity, same shape.
    pub v: Tensor,
    /// Ring traces `[N_T, n_b]`.
    pub boundary_u: Tensor,
    pub boundary_v: Tensor,
}

impl Sample {
    pub fn simulate(params: WaveParams, g: &GridSpec) -> Result<Self> {
        let full = solve_wave(&params, g)?;
        let vel = velocity_field(&full, g.dt())?;
        let u = restrict(&full, g)?;
        let v = restrict(&vel, g)?;
        Ok(Self {
            params,
            boundary_u: extract_boundary_zoom(&u, g)?,
            boundary_v: extract_boundary_zoom(&v, g)?,
            u,
            v,
        })
    }
}

/// Source parameter ranges. Source positions range over the whole domain
/// minus the zoom footprint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingConfig {
    pub omega_min: f64,
    pub omega_max: f64,
    pub n_train: usize,
    pub n_test: usize,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            omega_min: std::f64::consts::PI,
            omega_max: 4.0 * std::f64::consts::PI,
            n_train: 100,
            n_test: 25,
        }
    }
}

/// Seed of the test split, derived from the training seed.
pub fn test_seed(seed: u64) -> u64 {
    seed ^ 0x5eed_7e57_5eed_7e57
}

/// LHS over `(ω, x_s, y_s)` avoiding the zoom footprint.
pub fn sample_params(
    n: usize,
    s: &SamplingConfig,
    g: &GridSpec,
    seed: u64,
) -> Result<Vec<WaveParams>> {
    let (x0, x1, y0, y1) = g.source_exclusion();
    let ex = Exclusion {
        dims: (1, 2),
        x: (x0, x1),
        y: (y0, y1),
    };
    let bounds = [(s.omega_min, s.omega_max), (-g.lx, g.lx), (-g.ly, g.ly)];
    Ok(lhs_sample(n, &bounds, Some(ex), seed)?
        .into_iter()
        .map(|p| WaveParams::from_slice(&p))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub grid: GridSpec,
    pub samples: Vec<Sample>,
}

impl Dataset {
    /// Solves every parameter set in parallel; output order follows `params`.
    pub fn simulate(g: &GridSpec, params: &[WaveParams]) -> Result<Self> {
        g.validate()?;
        let samples = params
            .par_iter()
            .map(|p| Sample::simulate(*p, g))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            grid: g.clone(),
            samples,
        })
    }

    /// Train and test sets from one seed.
    pub fn generate(g: &GridSpec, s: &SamplingConfig, seed: u64) -> Result<(Self, Self)> {
        let train = sample_params(s.n_train, s, g, seed)?;
        let test = sample_params(s.n_test, s, g, test_seed(seed))?;
        Ok((Self::simulate(g, &train)?, Self::simulate(g, &test)?))
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn write(&self, w: &mut impl Write) -> Result<()> {
        let g = &self.grid;
        w.write_all(DATASET_MAGIC)?;
        write_u32(w, DATASET_VERSION)?;
        write_f64(w, g.lx)?;
        write_f64(w, g.ly)?;
        for n in [g.nx, g.ny, g.zoom_x0, g.zoom_y0, g.zoom_nx, g.zoom_ny] {
            write_u64(w, n as u64)?;
        }
        write_f64(w, g.t_final)?;
        write_u64(w, g.nt as u64)?;
        write_f64(w, g.c)?;
        write_u64(w, self.samples.len() as u64)?;
        for s in &self.samples {
            for x in s.params.to_array() {
                write_f64(w, x)?;
            }
            write_tensor(w, "u", &s.u)?;
            write_tensor(w, "v", &s.v)?;
            write_tensor(w, "boundary_u", &s.boundary_u)?;
            write_tensor(w, "boundary_v", &s.boundary_v)?;
        }
        Ok(())
    }

    pub fn read(r: &mut impl Read) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != DATASET_MAGIC {
            return Err(Error::Format("not a dataset file (bad magic)".into()));
        }
        let version = read_u32(r)?;
        if version != DATASET_VERSION {
            return Err(Error::Format(format!("unsupported dataset version {version}")));
        }
        let lx = read_f64(r)?;
        let ly = read_f64(r)?;
        let mut dims = [0usize; 6];
        for d in &mut dims {
            *d = read_u64(r)? as usize;
        }
        let t_final = read_f64(r)?;
        let nt = read_u64(r)? as usize;
        let c = read_f64(r)?;
        let grid = GridSpec {
            lx,
            ly,
            nx: dims[0],
            ny: dims[1],
            zoom_x0: dims[2],
            zoom_y0: dims[3],
            zoom_nx: dims[4],
            zoom_ny: dims[5],
            t_final,
            nt,
            c,
        };
        grid.validate()?;
        let count = read_u64(r)? as usize;
        let mut samples = Vec::with_capacity(count.min(1 << 16));
        for k in 0..count {
            let params = WaveParams {
                omega: read_f64(r)?,
                xs: read_f64(r)?,
                ys: read_f64(r)?,
            };
            let mut next = |want: &str| -> Result<Tensor> {
                match read_tensor(r)? {
                    Some((name, t)) if name == want => Ok(t),
                    Some((name, _)) => Err(Error::Format(format!(
                        "sample {k}: expected tensor `{want}`, found `{name}`"
                    ))),
                    None => Err(Error::Format(format!("sample {k}: missing tensor `{want}`"))),
                }
            };
            let u = next("u")?;
            let v = next("v")?;
            let boundary_u = next("boundary_u")?;
            let boundary_v = next("boundary_v")?;
            let field = [nt, grid.zoom_nx, grid.zoom_ny];
            u.expect_shape(&field)?;
            v.expect_shape(&field)?;
            boundary_u.expect_shape(&[nt, grid.n_boundary()])?;
            boundary_v.expect_shape(&[nt, grid.n_boundary()])?;
            samples.push(Sample {
                params,
                u,
                v,
                boundary_u,
                boundary_v,
            });
        }
        Ok(Self { grid, samples })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read(&mut std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_grid() -> GridSpec {
        GridSpec::centered(1.0, 1.0, 20, 18, 6, 5, 10, 1.0).unwrap()
    }

    #[test]
    fn samples_have_documented_shapes() {
        let g = small_grid();
        let s = SamplingConfig {
            n_train: 3,
            n_test: 2,
            ..Default::default()
        };
        let (train, test) = Dataset::generate(&g, &s, 4).unwrap();
        assert_eq!((train.len(), test.len()), (3, 2));
        for smp in train.samples.iter().chain(&test.samples) {
            assert_eq!(smp.u.shape(), &[10, 6, 5]);
            assert_eq!(smp.v.shape(), &[10, 6, 5]);
            assert_eq!(smp.boundary_u.shape(), &[10, 18]);
            assert!(smp.u.data().iter().all(|v| v.is_finite()));
            assert!(smp.u.slice0(0).max_abs() == 0.0);
            let (i, j) = g.nearest_node(smp.params.xs, smp.params.ys);
            assert!(!g.in_zoom(i, j));
        }
        assert_ne!(train.samples[0].params, test.samples[0].params);
    }

    #[test]
    fn file_roundtrip_is_bit_exact() {
        let g = small_grid();
        let s = SamplingConfig {
            n_train: 2,
            n_test: 1,
            ..Default::default()
        };
        let (train, _) = Dataset::generate(&g, &s, 9).unwrap();
        let mut buf = Vec::new();
        train.write(&mut buf).unwrap();
        let back = Dataset::read(&mut buf.as_slice()).unwrap();
        assert_eq!(back, train);
        let mut again = Vec::new();
        back.write(&mut again).unwrap();
        assert_eq!(again, buf);
        assert!(Dataset::read(&mut &buf[..buf.len() - 1]).is_err());
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(Dataset::read(&mut bad.as_slice()).is_err());
    }
}
