use crate::decomp::ParamBudget;
use crate::error::{Error, Result};
use crate::nn::layer::{Layer, LayerKind, Param};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Default)]
pub struct Sequential {
    pub layers: Vec<Layer>,
}

impl Sequential {
    pub fn new(layers: Vec<Layer>) -> Self {
        Self { layers }
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    pub fn forward_train(&mut self, x: &Tensor) -> Result<Tensor> {
        let mut h = x.clone();
        for l in &mut self.layers {
            h = l.forward_train(&h)?;
        }
        Ok(h)
    }

    pub fn infer(&self, x: &Tensor) -> Result<Tensor> {
        let mut h = x.clone();
        for l in &self.layers {
            h = l.infer(&h)?;
        }
        Ok(h)
    }

    pub fn backward(&mut self, dy: &Tensor) -> Result<Tensor> {
        let mut g = dy.clone();
        for l in self.layers.iter_mut().rev() {
            g = l.backward(&g)?;
        }
        Ok(g)
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Layer::param_count).sum()
    }

    fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>> {
        let mut s = input.to_vec();
        for (i, l) in self.layers.iter().enumerate() {
            s = l.output_shape(&s).map_err(|e| {
                Error::Shape(format!("layer {i} ({}) rejects input {s:?}: {e}", l.name()))
            })?;
        }
        Ok(s)
    }
}

/// Shared trunk `N_s` followed by one or more heads: `M_h(p) = N_h(N_s(p))`.
///
/// An empty trunk means the heads are independent networks on the raw input.
/// With a non-empty trunk there is exactly one copy of its parameters, and
/// its gradient is the sum of the contributions of every head.
#[derive(Debug, Clone)]
pub struct Model {
    pub trunk: Sequential,
    pub heads: Vec<Sequential>,
    input_shape: Vec<usize>,
    output_shapes: Vec<Vec<usize>>,
}

impl Model {
    /// Validates that shapes chain from `input_shape` (per sample) through
    /// every head.
    pub fn new(trunk: Sequential, heads: Vec<Sequential>, input_shape: &[usize]) -> Result<Self> {
        if heads.is_empty() {
            return Err(Error::Config("a model needs at least one head".into()));
        }
        let mid = trunk.output_shape(input_shape)?;
        let output_shapes = heads
            .iter()
            .map(|h| h.output_shape(&mid))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            trunk,
            heads,
            input_shape: input_shape.to_vec(),
            output_shapes,
        })
    }

    pub fn single(net: Sequential, input_shape: &[usize]) -> Result<Self> {
        Self::new(Sequential::default(), vec![net], input_shape)
    }

    pub fn input_shape(&self) -> &[usize] {
        &self.input_shape
    }

    pub fn output_shapes(&self) -> &[Vec<usize>] {
        &self.output_shapes
    }

    pub fn is_shared(&self) -> bool {
        !self.trunk.is_empty() && self.heads.len() > 1
    }

    /// Number of head graphs that read the trunk output.
    pub fn trunk_consumers(&self) -> usize {
        if self.trunk.is_empty() {
            0
        } else {
            self.heads.len()
        }
    }

    fn check_input(&self, x: &Tensor) -> Result<()> {
        if x.rank() < 1 || x.shape()[1..] != self.input_shape[..] {
            return Err(Error::Shape(format!(
                "model expects [B, {:?}], got {:?}",
                self.input_shape,
                x.shape()
            )));
        }
        Ok(())
    }

    pub fn forward_train(&mut self, x: &Tensor) -> Result<Vec<Tensor>> {
        self.check_input(x)?;
        let h = self.trunk.forward_train(x)?;
        self.heads.iter_mut().map(|hd| hd.forward_train(&h)).collect()
    }

    pub fn infer(&self, x: &Tensor) -> Result<Vec<Tensor>> {
        self.check_input(x)?;
        let h = self.trunk.infer(x)?;
        self.heads.iter().map(|hd| hd.infer(&h)).collect()
    }

    /// Accumulates parameter gradients for per-head output gradients.
    pub fn backward(&mut self, grads: &[Tensor]) -> Result<()> {
        if grads.len() != self.heads.len() {
            return Err(Error::Shape(format!(
                "{} head gradients for {} heads",
                grads.len(),
                self.heads.len()
            )));
        }
        let mut trunk_grad: Option<Tensor> = None;
        for (hd, g) in self.heads.iter_mut().zip(grads) {
            let gi = hd.backward(g)?;
            match &mut trunk_grad {
                Some(acc) => acc.add_assign(&gi)?,
                None => trunk_grad = Some(gi),
            }
        }
        if !self.trunk.is_empty() {
            self.trunk
                .backward(&trunk_grad.expect("at least one head"))?;
        }
        Ok(())
    }

    pub fn zero_grad(&mut self) {
        for p in self.params_mut() {
            p.zero_grad();
        }
    }

    pub fn clear_cache(&mut self) {
        for l in self.layers_mut() {
            l.clear_cache();
        }
    }

    fn sections(&self) -> Vec<(String, &Sequential)> {
        let mut v = vec![("trunk".to_string(), &self.trunk)];
        for (i, h) in self.heads.iter().enumerate() {
            v.push((format!("head{i}"), h));
        }
        v
    }

    pub fn layers(&self) -> impl Iterator<Item = &Layer> {
        self.trunk.layers.iter().chain(self.heads.iter().flat_map(|h| h.layers.iter()))
    }

    pub fn layers_mut(&mut self) -> impl Iterator<Item = &mut Layer> {
        self.trunk
            .layers
            .iter_mut()
            .chain(self.heads.iter_mut().flat_map(|h| h.layers.iter_mut()))
    }

    /// Parameters in a fixed order: trunk first, then each head.
    pub fn params(&self) -> Vec<&Param> {
        self.layers().flat_map(|l| l.params()).collect()
    }

    pub fn params_mut(&mut self) -> Vec<&mut Param> {
        self.layers_mut().flat_map(|l| l.params_mut()).collect()
    }

    /// `(name, tensor)` of every trainable parameter and every batch-norm
    /// running statistic.
    pub fn state(&self) -> Vec<(String, Tensor)> {
        let mut out = Vec::new();
        for (prefix, seq) in self.sections() {
            for (i, l) in seq.layers.iter().enumerate() {
                for (j, p) in l.params().iter().enumerate() {
                    out.push((format!("{prefix}.{i}.{j}.{}", p.name), p.value.clone()));
                }
                if let LayerKind::BatchNorm(bn) = &l.kind {
                    out.push((
                        format!("{prefix}.{i}.running_mean"),
                        Tensor::vector(bn.running_mean.clone()),
                    ));
                    out.push((
                        format!("{prefix}.{i}.running_var"),
                        Tensor::vector(bn.running_var.clone()),
                    ));
                }
            }
        }
        out
    }

    /// Inverse of [`Self::state`]; every entry must be present with the
    /// same shape.
    pub fn load_state(&mut self, state: &[(String, Tensor)]) -> Result<()> {
        let lookup = |name: &str| -> Result<&Tensor> {
            state
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, t)| t)
                .ok_or_else(|| Error::Format(format!("checkpoint is missing `{name}`")))
        };
        let mut sections: Vec<(String, &mut Sequential)> = vec![("trunk".into(), &mut self.trunk)];
        for (i, h) in self.heads.iter_mut().enumerate() {
            sections.push((format!("head{i}"), h));
        }
        for (prefix, seq) in sections {
            for (i, l) in seq.layers.iter_mut().enumerate() {
                for (j, p) in l.params_mut().into_iter().enumerate() {
                    let t = lookup(&format!("{prefix}.{i}.{j}.{}", p.name))?;
                    t.expect_shape(p.value.shape())?;
                    p.value = t.clone();
                }
                if let LayerKind::BatchNorm(bn) = &mut l.kind {
                    let m = lookup(&format!("{prefix}.{i}.running_mean"))?;
                    let v = lookup(&format!("{prefix}.{i}.running_var"))?;
                    m.expect_shape(&[bn.running_mean.len()])?;
                    v.expect_shape(&[bn.running_var.len()])?;
                    bn.running_mean = m.data().to_vec();
                    bn.running_var = v.data().to_vec();
                }
            }
        }
        Ok(())
    }

    /// Full vs. fully separated parameter counts: every convolution counted
    /// once with its full kernel and once with one 1D factor per axis; all
    /// other parameters are the same in both columns.
    pub fn budget(&self) -> ParamBudget {
        self.layers()
            .map(|l| match &l.kind {
                LayerKind::Conv(c) => crate::decomp::param_budget(
                    &[c.extents().to_vec()],
                    c.filters(),
                    true,
                ),
                LayerKind::Separable(s) => {
                    crate::decomp::param_budget(&[s.extents.clone()], s.filters(), true)
                }
                _ => ParamBudget {
                    full_count: l.param_count(),
                    decomposed_count: l.param_count(),
                },
            })
            .sum()
    }
}

/// Exact count of trainable scalars (batch-norm γ/β included, running
/// statistics excluded).
pub fn count_params(model: &Model) -> usize {
    model.layers().map(Layer::param_count).sum()
}
