//! The variant zoo: architectures built from a small set of width knobs.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::nn::{Layer, Model, SeparableConv, Sequential};
use crate::wave::GridSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    FcT,
    Conv2D,
    Conv2DT,
    Conv3D,
    Conv25D,
    Conv25Db,
    FcTBoundary,
    Conv1DBoundary,
    Conv1DTBoundary,
    Conv2DBoundary,
    Conv15DBoundary,
}

impl Variant {
    pub const ALL: [Variant; 11] = [
        Variant::FcT,
        Variant::Conv2D,
        Variant::Conv2DT,
        Variant::Conv3D,
        Variant::Conv25D,
        Variant::Conv25Db,
        Variant::FcTBoundary,
        Variant::Conv1DBoundary,
        Variant::Conv1DTBoundary,
        Variant::Conv2DBoundary,
        Variant::Conv15DBoundary,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::FcT => "FC_t",
            Variant::Conv2D => "Conv2D",
            Variant::Conv2DT => "Conv2D_t",
            Variant::Conv3D => "Conv3D",
            Variant::Conv25D => "Conv2.5D",
            Variant::Conv25Db => "Conv2.5Db",
            Variant::FcTBoundary => "FC_t_Boundary",
            Variant::Conv1DBoundary => "Conv1D_Boundary",
            Variant::Conv1DTBoundary => "Conv1D_t_Boundary",
            Variant::Conv2DBoundary => "Conv2D_Boundary",
            Variant::Conv15DBoundary => "Conv1.5D_Boundary",
        }
    }

    /// Consumes `(p, t)` and emits one time slice.
    pub fn time_input(self) -> bool {
        matches!(
            self,
            Variant::FcT | Variant::Conv2DT | Variant::FcTBoundary | Variant::Conv1DTBoundary
        )
    }

    /// Emits boundary traces instead of zoom fields.
    pub fn boundary(self) -> bool {
        matches!(
            self,
            Variant::FcTBoundary
                | Variant::Conv1DBoundary
                | Variant::Conv1DTBoundary
                | Variant::Conv2DBoundary
                | Variant::Conv15DBoundary
        )
    }

    /// Uses separable convolutions throughout.
    pub fn separable(self) -> bool {
        matches!(self, Variant::Conv25D | Variant::Conv25Db | Variant::Conv15DBoundary)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown variant `{s}`")))
    }
}

/// Subset of {batch norm, Euler, shared trunk}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Regularization {
    pub bn: bool,
    pub euler: bool,
    pub shared: bool,
}

impl Regularization {
    pub const BASIC: Regularization = Regularization {
        bn: false,
        euler: false,
        shared: false,
    };

    /// Table column order.
    pub const COLUMNS: [Regularization; 6] = [
        Regularization::BASIC,
        Regularization {
            bn: true,
            euler: false,
            shared: false,
        },
        Regularization {
            bn: false,
            euler: true,
            shared: false,
        },
        Regularization {
            bn: false,
            euler: false,
            shared: true,
        },
        Regularization {
            bn: true,
            euler: false,
            shared: true,
        },
        Regularization {
            bn: false,
            euler: true,
            shared: true,
        },
    ];

    pub fn validate(self) -> Result<()> {
        if self.bn && self.euler {
            return Err(Error::BatchNormWithEuler);
        }
        Ok(())
    }

    pub fn label(self) -> String {
        let mut parts = Vec::new();
        if self.bn {
            parts.push("BN");
        }
        if self.euler {
            parts.push("E");
        }
        if self.shared {
            parts.push("SL");
        }
        if parts.is_empty() {
            "Basic".into()
        } else {
            parts.join("&")
        }
    }

    /// Position in [`Self::COLUMNS`].
    pub fn column(self) -> Option<usize> {
        Self::COLUMNS.iter().position(|&c| c == self)
    }
}

impl fmt::Display for Regularization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Parses `Basic` or `&`/`+`-joined parts of `BN`, `E`, `SL`. The BN and E
/// combination parses; [`Regularization::validate`] rejects it.
impl FromStr for Regularization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut r = Regularization::BASIC;
        if s.eq_ignore_ascii_case("basic") || s.is_empty() {
            return Ok(r);
        }
        for part in s.split(['&', '+']) {
            let flag = match part.trim().to_ascii_uppercase().as_str() {
                "BN" => &mut r.bn,
                "E" => &mut r.euler,
                "SL" => &mut r.shared,
                other => {
                    return Err(Error::Config(format!(
                        "unknown regularization `{other}` in `{s}`"
                    )))
                }
            };
            if *flag {
                return Err(Error::Config(format!("repeated regularization in `{s}`")));
            }
            *flag = true;
        }
        Ok(r)
    }
}

/// Width knobs shared by every variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arch {
    /// Kernel extent along every axis (clamped to the axis length).
    pub kernel: usize,
    /// Filters per hidden convolution.
    pub filters: usize,
    /// Upsampling conv blocks between the lift and the output stage.
    pub blocks: usize,
    /// Hidden width of the dense lift.
    pub lift_width: usize,
    pub fc_width: usize,
    /// Hidden dense layers of the FC variants.
    pub fc_depth: usize,
}

impl Default for Arch {
    fn default() -> Self {
        Self {
            kernel: 5,
            filters: 24,
            blocks: 3,
            lift_width: 16,
            fc_width: 128,
            fc_depth: 3,
        }
    }
}

/// Which separable grouping a decoder uses for its kernels.
#[derive(Debug, Clone, PartialEq)]
enum ConvKind {
    Full,
    Separable(Vec<Vec<usize>>),
}

/// Per-sample output of a variant: `[N_T, ...]` for whole-history models,
/// one slice `[...]` for `(p, t)` models.
pub fn target_shape(v: Variant, g: &GridSpec) -> Vec<usize> {
    let slice = if v.boundary() {
        vec![g.n_boundary()]
    } else {
        vec![g.zoom_nx, g.zoom_ny]
    };
    if v.time_input() {
        slice
    } else {
        let mut s = vec![g.nt];
        s.extend(slice);
        s
    }
}

pub fn input_width(v: Variant) -> usize {
    if v.time_input() {
        4
    } else {
        3
    }
}

fn latent_extent(s: usize, blocks: usize, level: usize) -> usize {
    // level 0 is the lift output, level b the output of block b
    let div = 1usize << (blocks + 1 - level).min(40);
    s.div_ceil(div).max(s.min(4))
}

/// Conv decoder from a `width`-wide feature vector to `[c_out, spatial...]`.
/// Returns `(trunk, head)`: the trunk ends after the last hidden block.
fn decoder(
    in_width: usize,
    spatial: &[usize],
    c_out: usize,
    kind: &ConvKind,
    a: &Arch,
    bn: bool,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<Layer>, Vec<Layer>)> {
    let k: Vec<usize> = spatial.iter().map(|&s| a.kernel.min(s)).collect();
    let l0: Vec<usize> = spatial.iter().map(|&s| latent_extent(s, a.blocks, 0)).collect();
    let conv = |c_in: usize, nf: usize, rng: &mut ChaCha8Rng| -> Result<Layer> {
        Ok(match kind {
            ConvKind::Full => Layer::conv(c_in, nf, &k, rng),
            ConvKind::Separable(groups) => Layer::separable(SeparableConv::new(
                c_in,
                nf,
                &k,
                groups.clone(),
                false,
                rng,
            )?),
        })
    };
    let grown = |s: &[usize]| -> Vec<usize> { s.iter().zip(&k).map(|(a, b)| a + b - 1).collect() };

    let mut trunk = vec![
        Layer::dense(in_width, a.lift_width, rng),
        Layer::tanh(),
        Layer::dense(a.lift_width, l0.iter().product(), rng),
    ];
    let mut shape = vec![1];
    shape.extend(&l0);
    trunk.push(Layer::reshape(&shape));
    let mut channels = 1;
    for b in 1..=a.blocks {
        let s: Vec<usize> = spatial.iter().map(|&n| latent_extent(n, a.blocks, b)).collect();
        if channels > 1 {
            trunk.push(Layer::channel_sum());
        }
        trunk.push(Layer::upsample(&grown(&s)));
        trunk.push(conv(channels, a.filters, rng)?);
        if bn {
            trunk.push(Layer::batch_norm(a.filters));
        }
        trunk.push(Layer::tanh());
        channels = a.filters;
    }
    let mut head = Vec::new();
    if channels > 1 {
        head.push(Layer::channel_sum());
    }
    head.push(Layer::upsample(&grown(spatial)));
    // init scale still follows the channel count feeding the sum
    head.push(conv(channels, c_out, rng)?);
    Ok((trunk, head))
}

/// Dense stack `in → fc_width × fc_depth → out`, split like [`decoder`].
fn dense_net(in_width: usize, out: usize, a: &Arch, bn: bool, rng: &mut ChaCha8Rng) -> (Vec<Layer>, Vec<Layer>) {
    let mut trunk = Vec::new();
    let mut w = in_width;
    for _ in 0..a.fc_depth {
        trunk.push(Layer::dense(w, a.fc_width, rng));
        if bn {
            trunk.push(Layer::batch_norm(a.fc_width));
        }
        trunk.push(Layer::tanh());
        w = a.fc_width;
    }
    (trunk, vec![Layer::dense(w, out, rng)])
}

/// One trunk/head pair emitting `target_shape(v, g)`.
fn network(v: Variant, g: &GridSpec, a: &Arch, bn: bool, rng: &mut ChaCha8Rng) -> Result<(Vec<Layer>, Vec<Layer>)> {
    let target = target_shape(v, g);
    let inw = input_width(v);
    let (s, nt, nb) = ([g.zoom_nx, g.zoom_ny], g.nt, g.n_boundary());
    let (spatial, c_out, kind): (Vec<usize>, usize, ConvKind) = match v {
        Variant::FcT | Variant::FcTBoundary => {
            let (trunk, mut head) = dense_net(inw, target.iter().product(), a, bn, rng);
            head.push(Layer::reshape(&target));
            return Ok((trunk, head));
        }
        Variant::Conv2D => (s.to_vec(), nt, ConvKind::Full),
        Variant::Conv2DT => (s.to_vec(), 1, ConvKind::Full),
        Variant::Conv3D => (vec![nt, s[0], s[1]], 1, ConvKind::Full),
        Variant::Conv25D => (
            vec![nt, s[0], s[1]],
            1,
            ConvKind::Separable(vec![vec![1, 2], vec![0]]),
        ),
        Variant::Conv25Db => (
            vec![nt, s[0], s[1]],
            1,
            ConvKind::Separable(vec![vec![2], vec![1], vec![0]]),
        ),
        Variant::Conv1DBoundary => (vec![nb], nt, ConvKind::Full),
        Variant::Conv1DTBoundary => (vec![nb], 1, ConvKind::Full),
        Variant::Conv2DBoundary => (vec![nt, nb], 1, ConvKind::Full),
        Variant::Conv15DBoundary => (
            vec![nt, nb],
            1,
            ConvKind::Separable(vec![vec![1], vec![0]]),
        ),
    };
    let (trunk, mut head) = decoder(inw, &spatial, c_out, &kind, a, bn, rng)?;
    if c_out == 1 {
        head.push(Layer::reshape(&target));
    }
    Ok((trunk, head))
}

/// Displacement and velocity heads for `v` under `reg`. With the shared
/// trunk both heads read one copy of the lift and hidden blocks; otherwise
/// the two fields get independent networks.
pub fn build_model(v: Variant, reg: Regularization, g: &GridSpec, a: &Arch, seed: u64) -> Result<Model> {
    reg.validate()?;
    if a.kernel == 0 || a.filters == 0 || a.lift_width == 0 || a.fc_width == 0 {
        return Err(Error::Config(format!("architecture widths must be positive: {a:?}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let input = [input_width(v)];
    if reg.shared {
        let (trunk, head_u) = network(v, g, a, reg.bn, &mut rng)?;
        // second head: same output stage, fresh weights
        let (_, head_v) = network(v, g, a, reg.bn, &mut rng)?;
        Model::new(
            Sequential::new(trunk),
            vec![Sequential::new(head_u), Sequential::new(head_v)],
            &input,
        )
    } else {
        let heads = (0..2)
            .map(|_| {
                let (mut t, h) = network(v, g, a, reg.bn, &mut rng)?;
                t.extend(h);
                Ok(Sequential::new(t))
            })
            .collect::<Result<Vec<_>>>()?;
        Model::new(Sequential::default(), heads, &input)
    }
}

/// Every (variant, regularization) pair in table order, BN&E excluded.
pub fn legal_cells(variants: &[Variant], regs: &[Regularization]) -> Vec<(Variant, Regularization)> {
    variants
        .iter()
        .flat_map(|&v| regs.iter().map(move |&r| (v, r)))
        .filter(|(_, r)| r.validate().is_ok())
        .collect()
}
