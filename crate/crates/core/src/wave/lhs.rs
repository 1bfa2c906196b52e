//! Latin hypercube sampling with a rectangular exclusion zone.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Forbidden axis-aligned box in two of the sampled dimensions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exclusion {
    pub dims: (usize, usize),
    /// `(min, max)` along `dims.0` and `dims.1`.
    pub x: (f64, f64),
    pub y: (f64, f64),
}

impl Exclusion {
    fn contains(&self, a: f64, b: f64) -> bool {
        a >= self.x.0 && a <= self.x.1 && b >= self.y.0 && b <= self.y.1
    }

    /// Whether the closed cell `[ax0, ax1] × [by0, by1]` lies inside the box,
    /// i.e. no redraw can escape it.
    fn covers(&self, ax: (f64, f64), by: (f64, f64)) -> bool {
        ax.0 >= self.x.0 && ax.1 <= self.x.1 && by.0 >= self.y.0 && by.1 <= self.y.1
    }
}

const MAX_REDRAWS: usize = 10_000;

/// `n` points, one per stratum in every dimension. A point inside the
/// exclusion box is redrawn inside its own cell. A cell that lies entirely
/// inside the box first trades its stratum along `dims.1` with another
/// sample, chosen so that neither cell is covered afterwards.
pub fn lhs_sample(
    n: usize,
    bounds: &[(f64, f64)],
    exclusion: Option<Exclusion>,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return Err(Error::Sampling("sample count must be at least 1".into()));
    }
    for (d, &(lo, hi)) in bounds.iter().enumerate() {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::Sampling(format!("invalid bounds [{lo}, {hi}] in dimension {d}")));
        }
    }
    if let Some(ex) = exclusion {
        let (a, b) = ex.dims;
        if a == b || a >= bounds.len() || b >= bounds.len() {
            return Err(Error::Sampling(format!(
                "exclusion dimensions {:?} invalid for {} dimensions",
                ex.dims,
                bounds.len()
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut strata: Vec<Vec<usize>> = bounds
        .iter()
        .map(|_| {
            let mut p: Vec<usize> = (0..n).collect();
            p.shuffle(&mut rng);
            p
        })
        .collect();
    let cell = |d: usize, s: usize| {
        let (lo, hi) = bounds[d];
        let w = (hi - lo) / n as f64;
        (lo + s as f64 * w, lo + (s + 1) as f64 * w)
    };

    if let Some(ex) = exclusion {
        let (a, b) = ex.dims;
        let blocked = |strata: &Vec<Vec<usize>>, i: usize| {
            ex.covers(cell(a, strata[a][i]), cell(b, strata[b][i]))
        };
        for i in 0..n {
            if !blocked(&strata, i) {
                continue;
            }
            let swap = (0..n).find(|&j| {
                let mut s = strata.clone();
                s[b].swap(i, j);
                j != i && !blocked(&s, i) && !blocked(&s, j)
            });
            match swap {
                Some(j) => strata[b].swap(i, j),
                None => {
                    return Err(Error::Sampling(format!(
                        "cannot place {n} samples: every stratum pairing of sample {i} lies inside the exclusion zone"
                    )))
                }
            }
        }
    }

    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let draw = |rng: &mut ChaCha8Rng, d: usize| {
            let (lo, hi) = cell(d, strata[d][i]);
            lo + rng.random::<f64>() * (hi - lo)
        };
        let mut point: Vec<f64> = (0..bounds.len()).map(|d| draw(&mut rng, d)).collect();
        if let Some(ex) = exclusion {
            let (a, b) = ex.dims;
            let mut tries = 0;
            while ex.contains(point[a], point[b]) {
                tries += 1;
                if tries > MAX_REDRAWS {
                    return Err(Error::Sampling(format!(
                        "sample {i}: no point of its cell found outside the exclusion zone"
                    )));
                }
                point[a] = draw(&mut rng, a);
                point[b] = draw(&mut rng, b);
            }
        }
        out.push(point);
    }
    Ok(out)
}

/// Stratum index of `v` in `[lo, hi]` split into `n` cells.
pub fn stratum(v: f64, lo: f64, hi: f64, n: usize) -> usize {
    (((v - lo) / (hi - lo) * n as f64).floor() as usize).min(n - 1)
}
