//! Explicit leapfrog for `(1/c²) u_tt − Δu = f` with a 5-point Laplacian.

use crate::error::{Error, Result};
use crate::tensor::Tensor;
use crate::wave::grid::GridSpec;

/// Source frequency and location.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveParams {
    pub omega: f64,
    pub xs: f64,
    pub ys: f64,
}

impl WaveParams {
    pub fn to_array(self) -> [f64; 3] {
        [self.omega, self.xs, self.ys]
    }

    pub fn from_slice(v: &[f64]) -> Self {
        Self {
            omega: v[0],
            xs: v[1],
            ys: v[2],
        }
    }
}

/// Point forcing `f(node, step)`; the solver scales it by `(cΔt)²`.
pub struct PointSource<'a> {
    pub node: usize,
    pub amplitude: &'a dyn Fn(usize) -> f64,
}

/// A rectangular node grid with fixed spacing and time step. Nodes on the
/// outer ring are never updated by the scheme; their values come from the
/// caller's boundary closure.
#[derive(Debug, Clone, Copy)]
pub struct Leapfrog {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub c: f64,
    pub dt: f64,
}

impl Leapfrog {
    pub fn new(nx: usize, ny: usize, dx: f64, dy: f64, c: f64, dt: f64) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::Shape(format!("leapfrog grid {nx}×{ny} is too small")));
        }
        let courant = c * dt * (1.0 / (dx * dx) + 1.0 / (dy * dy)).sqrt();
        if !courant.is_finite() || courant > 1.0 + 1e-12 {
            return Err(Error::Cfl(courant));
        }
        Ok(Self { nx, ny, dx, dy, c, dt })
    }

    pub fn full(g: &GridSpec) -> Result<Self> {
        g.validate()?;
        Self::new(g.nx, g.ny, g.dx(), g.dy(), g.c, g.dt())
    }

    pub fn zoom(g: &GridSpec) -> Result<Self> {
        g.validate()?;
        Self::new(g.zoom_nx, g.zoom_ny, g.dx(), g.dy(), g.c, g.dt())
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    /// Interior update. `prev = None` is the first step from rest:
    /// `u¹ = u⁰ + ½(cΔt)²(Δu⁰ + f⁰)`.
    fn step(&self, prev: Option<&[f64]>, cur: &[f64], next: &mut [f64]) {
        let (ny, c2) = (self.ny, (self.c * self.dt).powi(2));
        let (ax, ay) = (c2 / (self.dx * self.dx), c2 / (self.dy * self.dy));
        for i in 1..self.nx - 1 {
            for j in 1..ny - 1 {
                let k = i * ny + j;
                let u = cur[k];
                let lap = ax * (cur[k + ny] - 2.0 * u + cur[k - ny])
                    + ay * (cur[k + 1] - 2.0 * u + cur[k - 1]);
                next[k] = match prev {
                    Some(p) => 2.0 * u - p[k] + lap,
                    None => u + 0.5 * lap,
                };
            }
        }
    }

    fn is_interior(&self, node: usize) -> bool {
        let (i, j) = (node / self.ny, node % self.ny);
        i > 0 && j > 0 && i + 1 < self.nx && j + 1 < self.ny
    }

    /// Runs `nt` frames from `u0` (zero initial velocity). `boundary(n, u)`
    /// sets the ring of frame `n`, including frame 0. Returns `[nt, nx, ny]`.
    pub fn run(
        &self,
        nt: usize,
        u0: &[f64],
        source: Option<PointSource>,
        mut boundary: impl FnMut(usize, &mut [f64]),
    ) -> Result<Tensor> {
        let n = self.len();
        if u0.len() != n {
            return Err(Error::Shape(format!(
                "initial state has {} values for a {}×{} grid",
                u0.len(),
                self.nx,
                self.ny
            )));
        }
        let c2 = (self.c * self.dt).powi(2);
        let mut frames = vec![0.0; nt * n];
        frames[..n].copy_from_slice(u0);
        boundary(0, &mut frames[..n]);
        for step in 0..nt.saturating_sub(1) {
            let (done, rest) = frames.split_at_mut((step + 1) * n);
            let cur = &done[step * n..];
            let prev = (step > 0).then(|| &done[(step - 1) * n..step * n]);
            let next = &mut rest[..n];
            // ring starts from the current values; the closure overrides it
            next.copy_from_slice(cur);
            self.step(prev, cur, next);
            if let Some(src) = &source {
                if self.is_interior(src.node) {
                    let w = if prev.is_some() { 1.0 } else { 0.5 };
                    next[src.node] += w * c2 * (src.amplitude)(step);
                }
            }
            boundary(step + 1, next);
        }
        Tensor::new(vec![nt, self.nx, self.ny], frames)
    }

    /// Staggered energy between consecutive frames `a = uⁿ`, `b = uⁿ⁺¹`:
    /// `Σ ((b − a)/(cΔt))² + Σ_edges (D b)(D a)`, times `ΔxΔy`. Exactly
    /// conserved by the scheme in the absence of forcing and with a fixed
    /// zero ring.
    pub fn energy(&self, a: &[f64], b: &[f64]) -> f64 {
        let ny = self.ny;
        let mut kinetic = 0.0;
        for (x, y) in a.iter().zip(b) {
            kinetic += ((y - x) / (self.c * self.dt)).powi(2);
        }
        let mut grad = 0.0;
        for i in 0..self.nx {
            for j in 0..ny {
                let k = i * ny + j;
                if i + 1 < self.nx {
                    grad += (b[k + ny] - b[k]) * (a[k + ny] - a[k]) / (self.dx * self.dx);
                }
                if j + 1 < ny {
                    grad += (b[k + 1] - b[k]) * (a[k + 1] - a[k]) / (self.dy * self.dy);
                }
            }
        }
        (kinetic + grad) * self.dx * self.dy
    }
}

/// Full-domain displacement `[N_T, N_x, N_y]` for source `p`, starting from
/// rest with a zero Dirichlet boundary.
pub fn solve_wave(p: &WaveParams, g: &GridSpec) -> Result<Tensor> {
    let lf = Leapfrog::full(g)?;
    let (i, j) = g.nearest_node(p.xs, p.ys);
    let (dt, omega) = (g.dt(), p.omega);
    let scale = 1.0 / (g.dx() * g.dy());
    let amp = move |n: usize| scale * (omega * n as f64 * dt).sin();
    let src = PointSource {
        node: i * g.ny + j,
        amplitude: &amp,
    };
    lf.run(g.nt, &vec![0.0; lf.len()], Some(src), |_, _| {})
}

/// `∂u/∂t` by central differences, one-sided first order at both ends.
pub fn velocity_field(u: &Tensor, dt: f64) -> Result<Tensor> {
    if u.rank() < 1 || u.shape()[0] < 3 {
        return Err(Error::Shape(format!(
            "velocity needs at least 3 time steps, got shape {:?}",
            u.shape()
        )));
    }
    let nt = u.shape()[0];
    let n = u.len() / nt;
    let d = u.data();
    let mut v = vec![0.0; u.len()];
    for t in 0..nt {
        let (lo, hi, h) = match t {
            0 => (0, 1, dt),
            _ if t == nt - 1 => (nt - 2, nt - 1, dt),
            _ => (t - 1, t + 1, 2.0 * dt),
        };
        for k in 0..n {
            v[t * n + k] = (d[hi * n + k] - d[lo * n + k]) / h;
        }
    }
    Tensor::new(u.shape().to_vec(), v)
}

fn expect_full(u: &Tensor, g: &GridSpec) -> Result<usize> {
    if u.rank() != 3 || u.shape()[1] != g.nx || u.shape()[2] != g.ny {
        return Err(Error::Shape(format!(
            "expected [N_T, {}, {}], got {:?}",
            g.nx,
            g.ny,
            u.shape()
        )));
    }
    g.validate()?;
    Ok(u.shape()[0])
}

/// Zoom-window copy `[N_T, N′_x, N′_y]` of a full field.
pub fn restrict(u: &Tensor, g: &GridSpec) -> Result<Tensor> {
    let nt = expect_full(u, g)?;
    Ok(Tensor::from_fn(&[nt, g.zoom_nx, g.zoom_ny], |i| {
        u.get(&[i[0], g.zoom_x0 + i[1], g.zoom_y0 + i[2]])
    }))
}

/// Ring traces `[N_T, n_b]` of a zoom field `[N_T, N′_x, N′_y]`, in
/// [`GridSpec::boundary_nodes`] order.
pub fn extract_boundary_zoom(z: &Tensor, g: &GridSpec) -> Result<Tensor> {
    if z.rank() != 3 || z.shape()[1] != g.zoom_nx || z.shape()[2] != g.zoom_ny {
        return Err(Error::Shape(format!(
            "expected zoom field [N_T, {}, {}], got {:?}",
            g.zoom_nx,
            g.zoom_ny,
            z.shape()
        )));
    }
    let nodes = g.boundary_nodes();
    let nt = z.shape()[0];
    Ok(Tensor::from_fn(&[nt, nodes.len()], |i| {
        let (a, b) = nodes[i[1]];
        z.get(&[i[0], a, b])
    }))
}

/// Ring traces of a full-domain field.
pub fn extract_boundary(u: &Tensor, g: &GridSpec) -> Result<Tensor> {
    extract_boundary_zoom(&restrict(u, g)?, g)
}

/// Re-solves the zoom window from rest with time-dependent Dirichlet values
/// taken from `traces` `[N_T, n_b]`. The source is assumed outside the
/// window, so the zoom problem is source-free.
pub fn submodel_solve(traces: &Tensor, g: &GridSpec) -> Result<Tensor> {
    let nodes = g.boundary_nodes();
    traces.expect_shape(&[g.nt, nodes.len()])?;
    let lf = Leapfrog::zoom(g)?;
    let ny = g.zoom_ny;
    let nb = nodes.len();
    let tr = traces.data();
    lf.run(g.nt, &vec![0.0; lf.len()], None, |n, u| {
        for (b, &(i, j)) in nodes.iter().enumerate() {
            u[i * ny + j] = tr[n * nb + b];
        }
    })
}
