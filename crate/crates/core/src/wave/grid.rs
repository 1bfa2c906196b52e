use crate::error::{Error, Result};

/// Full domain `[-lx, lx] × [-ly, ly]` sampled at `nx × ny` nodes, a zoom
/// window of whole grid nodes, and the time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub lx: f64,
    pub ly: f64,
    pub nx: usize,
    pub ny: usize,
    /// First full-grid node index of the zoom window along x and y.
    pub zoom_x0: usize,
    pub zoom_y0: usize,
    pub zoom_nx: usize,
    pub zoom_ny: usize,
    pub t_final: f64,
    pub nt: usize,
    /// Wave speed.
    pub c: f64,
}

/// Fraction of the stability limit used when the time step is derived.
pub const CFL_MARGIN: f64 = 0.9;

impl GridSpec {
    /// Centered zoom window, `t_final` chosen so that `Δt` is `CFL_MARGIN`
    /// of the stability limit.
    #[allow(clippy::too_many_arguments)]
    pub fn centered(
        lx: f64,
        ly: f64,
        nx: usize,
        ny: usize,
        zoom_nx: usize,
        zoom_ny: usize,
        nt: usize,
        c: f64,
    ) -> Result<Self> {
        if zoom_nx > nx || zoom_ny > ny {
            return Err(Error::Config(format!(
                "zoom window {zoom_nx}×{zoom_ny} exceeds grid {nx}×{ny}"
            )));
        }
        let mut g = GridSpec {
            lx,
            ly,
            nx,
            ny,
            zoom_x0: (nx - zoom_nx) / 2,
            zoom_y0: (ny - zoom_ny) / 2,
            zoom_nx,
            zoom_ny,
            t_final: 0.0,
            nt,
            c,
        };
        g.t_final = CFL_MARGIN * g.max_stable_dt() * (nt.max(2) - 1) as f64;
        g.validate()?;
        Ok(g)
    }

    /// 64×64 on `[-1, 1]²`, centered 16×16 zoom, 64 time steps, `c = 1`.
    pub fn desk() -> Self {
        Self::centered(1.0, 1.0, 64, 64, 16, 16, 64, 1.0).expect("valid desk grid")
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.lx / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        2.0 * self.ly / (self.ny - 1) as f64
    }

    pub fn dt(&self) -> f64 {
        self.t_final / (self.nt - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        -self.lx + i as f64 * self.dx()
    }

    pub fn y(&self, j: usize) -> f64 {
        -self.ly + j as f64 * self.dy()
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.dt()
    }

    pub fn max_stable_dt(&self) -> f64 {
        1.0 / (self.c * (1.0 / self.dx().powi(2) + 1.0 / self.dy().powi(2)).sqrt())
    }

    /// `c·Δt·sqrt(1/Δx² + 1/Δy²)`; stable when ≤ 1.
    pub fn courant(&self) -> f64 {
        self.c * self.dt() * (1.0 / self.dx().powi(2) + 1.0 / self.dy().powi(2)).sqrt()
    }

    /// Zoom half-extents `(L′_x, L′_y)`.
    pub fn zoom_half_extents(&self) -> (f64, f64) {
        (
            0.5 * (self.zoom_nx - 1) as f64 * self.dx(),
            0.5 * (self.zoom_ny - 1) as f64 * self.dy(),
        )
    }

    /// Number of nodes on the zoom window's rectangle ring.
    pub fn n_boundary(&self) -> usize {
        if self.zoom_nx == 1 || self.zoom_ny == 1 {
            return self.zoom_nx * self.zoom_ny;
        }
        2 * self.zoom_nx + 2 * self.zoom_ny - 4
    }

    /// Window-local `(i, j)` of every ring node, clockwise from `(0, 0)`:
    /// along `i = 0`, then `j = last`, then back along `i = last`, then
    /// `j = 0`.
    pub fn boundary_nodes(&self) -> Vec<(usize, usize)> {
        let (nx, ny) = (self.zoom_nx, self.zoom_ny);
        if nx == 1 || ny == 1 {
            return (0..nx).flat_map(|i| (0..ny).map(move |j| (i, j))).collect();
        }
        let mut out = Vec::with_capacity(self.n_boundary());
        out.extend((0..ny).map(|j| (0, j)));
        out.extend((1..nx).map(|i| (i, ny - 1)));
        out.extend((0..ny - 1).rev().map(|j| (nx - 1, j)));
        out.extend((1..nx - 1).rev().map(|i| (i, 0)));
        out
    }

    /// Ω′ expanded by half a cell: sources inside it would snap to a zoom
    /// node. `(x_min, x_max, y_min, y_max)`.
    pub fn source_exclusion(&self) -> (f64, f64, f64, f64) {
        let (hx, hy) = (0.5 * self.dx(), 0.5 * self.dy());
        (
            self.x(self.zoom_x0) - hx,
            self.x(self.zoom_x0 + self.zoom_nx - 1) + hx,
            self.y(self.zoom_y0) - hy,
            self.y(self.zoom_y0 + self.zoom_ny - 1) + hy,
        )
    }

    /// Grid node nearest to `(x, y)`, clamped to the domain.
    pub fn nearest_node(&self, x: f64, y: f64) -> (usize, usize) {
        let snap = |v: f64, l: f64, d: f64, n: usize| {
            (((v + l) / d).round().max(0.0) as usize).min(n - 1)
        };
        (
            snap(x, self.lx, self.dx(), self.nx),
            snap(y, self.ly, self.dy(), self.ny),
        )
    }

    pub fn in_zoom(&self, i: usize, j: usize) -> bool {
        (self.zoom_x0..self.zoom_x0 + self.zoom_nx).contains(&i)
            && (self.zoom_y0..self.zoom_y0 + self.zoom_ny).contains(&j)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.lx > 0.0 && self.ly > 0.0 && self.c > 0.0 && self.t_final > 0.0) {
            return bad(format!(
                "extents, wave speed and final time must be positive (lx={}, ly={}, c={}, t_final={})",
                self.lx, self.ly, self.c, self.t_final
            ));
        }
        if self.nx < 3 || self.ny < 3 {
            return bad(format!("grid {}×{} needs at least 3 nodes per axis", self.nx, self.ny));
        }
        if self.nt < 3 {
            return bad(format!("need at least 3 time steps, got {}", self.nt));
        }
        if self.zoom_nx < 2
            || self.zoom_ny < 2
            || self.zoom_x0 + self.zoom_nx > self.nx
            || self.zoom_y0 + self.zoom_ny > self.ny
        {
            return bad(format!(
                "zoom window start ({}, {}) size {}×{} does not fit grid {}×{}",
                self.zoom_x0, self.zoom_y0, self.zoom_nx, self.zoom_ny, self.nx, self.ny
            ));
        }
        let courant = self.courant();
        if courant > 1.0 + 1e-12 {
            return Err(Error::Cfl(courant));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desk_grid() {
        let g = GridSpec::desk();
        assert_eq!((g.zoom_x0, g.zoom_y0), (24, 24));
        assert_eq!(g.n_boundary(), 60);
        assert!((g.courant() - CFL_MARGIN).abs() < 1e-12);
        assert!((g.dt() - g.t_final / 63.0).abs() < 1e-15);
        assert!((g.x(0) + 1.0).abs() < 1e-15 && (g.x(63) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ring_visits_each_edge_node_once() {
        for (nx, ny) in [(2, 2), (3, 5), (16, 16), (4, 2)] {
            let g = GridSpec::centered(1.0, 1.0, 20, 20, nx, ny, 5, 1.0).unwrap();
            let ring = g.boundary_nodes();
            assert_eq!(ring.len(), g.n_boundary());
            let mut seen = std::collections::HashSet::new();
            for &(i, j) in &ring {
                assert!(i == 0 || j == 0 || i == nx - 1 || j == ny - 1);
                assert!(seen.insert((i, j)));
            }
            // consecutive ring nodes are grid neighbours
            for w in ring.windows(2) {
                let d = w[0].0.abs_diff(w[1].0) + w[0].1.abs_diff(w[1].1);
                assert_eq!(d, 1);
            }
        }
    }

    #[test]
    fn cfl_violation_is_rejected() {
        let mut g = GridSpec::desk();
        g.t_final *= 1.2;
        assert!(matches!(g.validate(), Err(Error::Cfl(c)) if c > 1.0));
    }

    #[test]
    fn exclusion_contains_every_zoom_node_snap_region() {
        let g = GridSpec::desk();
        let (x0, x1, y0, y1) = g.source_exclusion();
        // points just outside the expanded box snap outside the window
        for (x, y) in [(x0 - 1e-9, 0.0), (x1 + 1e-9, 0.0), (0.0, y0 - 1e-9), (0.0, y1 + 1e-9)] {
            let (i, j) = g.nearest_node(x, y);
            assert!(!g.in_zoom(i, j), "({x}, {y}) -> ({i}, {j})");
        }
        let (i, j) = g.nearest_node(x0 + 1e-9, y0 + 1e-9);
        assert!(g.in_zoom(i, j));
    }
}
