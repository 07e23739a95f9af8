//! Flat parameter vectors and a small feed-forward network with exact
//! backpropagation.
//!
//! The same network type serves as the policy and as the inverse-dynamics
//! model. All search-space arithmetic happens on [`ParamVec`], the flattened
//! form of a network; [`MlpNet::flatten`] / [`MlpNet::unflatten`] convert
//! between the two using a fixed layout: layers in order, each layer's weight
//! matrix row-major (one row per output unit), then its bias vector. The
//! layout must not change — master and workers exchange raw vectors and both
//! sides rely on it.
//!
//! Everything is `f64`; at these sizes determinism matters more than speed.

use rand::Rng;

use crate::error::{Error, Result};

/// A flattened vector of network parameters. Length is fixed at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVec(Vec<f64>);

impl ParamVec {
    pub fn new(values: Vec<f64>) -> Self {
        ParamVec(values)
    }

    pub fn zeros(len: usize) -> Self {
        ParamVec(vec![0.0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &ParamVec) -> f64 {
        debug_assert_eq!(self.len(), other.len());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    /// Elementwise `self + scale * other`.
    pub fn add_scaled(&self, other: &ParamVec, scale: f64) -> Result<ParamVec> {
        if self.len() != other.len() {
            return Err(Error::shape("add_scaled", self.len(), other.len()));
        }
        Ok(ParamVec(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + scale * b)
                .collect(),
        ))
    }

    pub fn sub(&self, other: &ParamVec) -> Result<ParamVec> {
        self.add_scaled(other, -1.0)
    }
}

impl From<Vec<f64>> for ParamVec {
    fn from(v: Vec<f64>) -> Self {
        ParamVec(v)
    }
}

impl std::ops::Index<usize> for ParamVec {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// One gradient-descent step: `params - lr * grad`.
pub fn sgd_step(params: &ParamVec, grad: &ParamVec, lr: f64) -> Result<ParamVec> {
    if params.len() != grad.len() {
        return Err(Error::shape("sgd_step", params.len(), grad.len()));
    }
    if !(lr >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "learning rate must be >= 0, got {lr}"
        )));
    }
    params.add_scaled(grad, -lr)
}

/// Per-layer nonlinearity. Hidden layers use the rectifier, the output layer
/// is left linear so actions are unbounded before env-side clipping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => {
                if x > 0.0 {
                    x
                } else {
                    0.0
                }
            }
            Activation::Identity => x,
        }
    }

    /// Derivative as a gate on the pre-activation value.
    fn gate(self, pre: f64) -> f64 {
        match self {
            Activation::Relu => {
                if pre > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }

    pub fn code(self) -> u8 {
        match self {
            Activation::Relu => 0,
            Activation::Identity => 1,
        }
    }

    pub fn from_code(code: u8) -> Result<Self> {
        match code {
            0 => Ok(Activation::Relu),
            1 => Ok(Activation::Identity),
            c => Err(Error::Protocol(format!("unknown activation code {c}"))),
        }
    }
}

/// Dimensions and activation of a single dense layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerSpec {
    pub input_dim: usize,
    pub output_dim: usize,
    pub activation: Activation,
}

impl LayerSpec {
    pub fn param_count(&self) -> usize {
        self.input_dim * self.output_dim + self.output_dim
    }
}

/// The full layer stack of a network. Consecutive layers must compose.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetShape(Vec<LayerSpec>);

impl NetShape {
    pub fn new(layers: Vec<LayerSpec>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidArgument("network needs >= 1 layer".into()));
        }
        for spec in &layers {
            if spec.input_dim == 0 || spec.output_dim == 0 {
                return Err(Error::InvalidArgument("layer dims must be > 0".into()));
            }
        }
        for pair in layers.windows(2) {
            if pair[0].output_dim != pair[1].input_dim {
                return Err(Error::shape(
                    "layer composition",
                    pair[0].output_dim,
                    pair[1].input_dim,
                ));
            }
        }
        Ok(NetShape(layers))
    }

    /// Standard stack: rectifier hidden layers, identity output.
    pub fn mlp(input_dim: usize, hidden: &[usize], output_dim: usize) -> Result<Self> {
        let mut layers = Vec::with_capacity(hidden.len() + 1);
        let mut prev = input_dim;
        for &h in hidden {
            layers.push(LayerSpec {
                input_dim: prev,
                output_dim: h,
                activation: Activation::Relu,
            });
            prev = h;
        }
        layers.push(LayerSpec {
            input_dim: prev,
            output_dim: output_dim,
            activation: Activation::Identity,
        });
        NetShape::new(layers)
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.0
    }

    pub fn input_dim(&self) -> usize {
        self.0[0].input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.0[self.0.len() - 1].output_dim
    }

    pub fn param_count(&self) -> usize {
        self.0.iter().map(LayerSpec::param_count).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Layer {
    /// Row-major, one row per output unit: `weights[r * input_dim + c]`.
    weights: Vec<f64>,
    bias: Vec<f64>,
}

/// A feed-forward network. Immutable once constructed; training produces a
/// new net via [`MlpNet::unflatten`] after [`sgd_step`] on the flat form.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpNet {
    shape: NetShape,
    layers: Vec<Layer>,
}

/// Per-layer values cached by [`MlpNet::forward_trace`] for backprop.
pub struct ForwardTrace {
    /// `inputs[0]` is the network input, `inputs[k]` the post-activation
    /// output of layer `k-1`.
    inputs: Vec<Vec<f64>>,
    /// Pre-activation values per layer.
    preacts: Vec<Vec<f64>>,
}

impl ForwardTrace {
    pub fn output(&self) -> &[f64] {
        &self.inputs[self.inputs.len() - 1]
    }
}

impl MlpNet {
    /// All weights and biases zero.
    pub fn zeros(shape: NetShape) -> Self {
        let layers = shape
            .layers()
            .iter()
            .map(|s| Layer {
                weights: vec![0.0; s.input_dim * s.output_dim],
                bias: vec![0.0; s.output_dim],
            })
            .collect();
        MlpNet { shape, layers }
    }

    /// Weights uniform in `[-1/sqrt(fan_in), +1/sqrt(fan_in)]`, biases zero.
    pub fn init<R: Rng + ?Sized>(shape: NetShape, rng: &mut R) -> Self {
        let layers = shape
            .layers()
            .iter()
            .map(|s| {
                let bound = 1.0 / (s.input_dim as f64).sqrt();
                Layer {
                    weights: (0..s.input_dim * s.output_dim)
                        .map(|_| rng.gen_range(-bound..=bound))
                        .collect(),
                    bias: vec![0.0; s.output_dim],
                }
            })
            .collect();
        MlpNet { shape, layers }
    }

    pub fn shape(&self) -> &NetShape {
        &self.shape
    }

    pub fn input_dim(&self) -> usize {
        self.shape.input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.shape.output_dim()
    }

    pub fn param_count(&self) -> usize {
        self.shape.param_count()
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        let mut trace = self.forward_trace(input)?;
        Ok(trace.inputs.pop().expect("trace holds the output"))
    }

    /// Forward pass keeping everything backprop needs.
    pub fn forward_trace(&self, input: &[f64]) -> Result<ForwardTrace> {
        if input.len() != self.input_dim() {
            return Err(Error::shape("forward input", self.input_dim(), input.len()));
        }
        if input.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("forward input"));
        }
        let mut inputs = Vec::with_capacity(self.layers.len() + 1);
        let mut preacts = Vec::with_capacity(self.layers.len());
        inputs.push(input.to_vec());
        for (layer, spec) in self.layers.iter().zip(self.shape.layers()) {
            let x = &inputs[inputs.len() - 1];
            let mut pre = layer.bias.clone();
            for (r, p) in pre.iter_mut().enumerate() {
                let row = &layer.weights[r * spec.input_dim..(r + 1) * spec.input_dim];
                let mut acc = 0.0;
                for (w, xi) in row.iter().zip(x.iter()) {
                    acc += w * xi;
                }
                *p += acc;
            }
            let post = pre.iter().map(|&v| spec.activation.apply(v)).collect();
            preacts.push(pre);
            inputs.push(post);
        }
        Ok(ForwardTrace { inputs, preacts })
    }

    /// Gradient of a scalar loss with respect to every parameter, given the
    /// loss gradient at the output. Layout matches [`MlpNet::flatten`].
    pub fn backward(&self, input: &[f64], output_grad: &[f64]) -> Result<ParamVec> {
        let trace = self.forward_trace(input)?;
        let mut grad = vec![0.0; self.param_count()];
        self.accumulate_backward(&trace, output_grad, &mut grad)?;
        Ok(ParamVec(grad))
    }

    /// Backprop from a cached trace, adding into `grad_accum` so callers can
    /// sum over a batch without intermediate allocations.
    pub fn accumulate_backward(
        &self,
        trace: &ForwardTrace,
        output_grad: &[f64],
        grad_accum: &mut [f64],
    ) -> Result<()> {
        if output_grad.len() != self.output_dim() {
            return Err(Error::shape(
                "backward output_grad",
                self.output_dim(),
                output_grad.len(),
            ));
        }
        if grad_accum.len() != self.param_count() {
            return Err(Error::shape(
                "backward grad buffer",
                self.param_count(),
                grad_accum.len(),
            ));
        }
        // delta[k] = dL/d(pre-activation of layer k)
        let mut delta: Vec<f64> = output_grad.to_vec();
        let last = self.layers.len() - 1;
        for (d, &pre) in delta.iter_mut().zip(&trace.preacts[last]) {
            *d *= self.shape.layers()[last].activation.gate(pre);
        }
        // Walk layers back to front; grad layout is front to back.
        let mut offsets: Vec<usize> = Vec::with_capacity(self.layers.len());
        let mut off = 0;
        for spec in self.shape.layers() {
            offsets.push(off);
            off += spec.param_count();
        }
        for k in (0..self.layers.len()).rev() {
            let spec = self.shape.layers()[k];
            let x = &trace.inputs[k];
            let base = offsets[k];
            for r in 0..spec.output_dim {
                let d = delta[r];
                let wrow = base + r * spec.input_dim;
                for c in 0..spec.input_dim {
                    grad_accum[wrow + c] += d * x[c];
                }
                grad_accum[base + spec.input_dim * spec.output_dim + r] += d;
            }
            if k > 0 {
                let layer = &self.layers[k];
                let prev_spec = self.shape.layers()[k - 1];
                let mut prev_delta = vec![0.0; spec.input_dim];
                for (r, &d) in delta.iter().enumerate() {
                    let row = &layer.weights[r * spec.input_dim..(r + 1) * spec.input_dim];
                    for (pd, w) in prev_delta.iter_mut().zip(row) {
                        *pd += d * w;
                    }
                }
                for (pd, &pre) in prev_delta.iter_mut().zip(&trace.preacts[k - 1]) {
                    *pd *= prev_spec.activation.gate(pre);
                }
                delta = prev_delta;
            }
        }
        Ok(())
    }

    /// Flatten to the fixed layout: per layer, weight rows then bias.
    pub fn flatten(&self) -> ParamVec {
        let mut out = Vec::with_capacity(self.param_count());
        for layer in &self.layers {
            out.extend_from_slice(&layer.weights);
            out.extend_from_slice(&layer.bias);
        }
        ParamVec(out)
    }

    /// Rebuild a network from a flat vector. Exact inverse of `flatten`.
    pub fn unflatten(shape: NetShape, params: &ParamVec) -> Result<MlpNet> {
        if params.len() != shape.param_count() {
            return Err(Error::shape(
                "unflatten",
                shape.param_count(),
                params.len(),
            ));
        }
        let mut layers = Vec::with_capacity(shape.layers().len());
        let mut off = 0;
        for spec in shape.layers() {
            let w_len = spec.input_dim * spec.output_dim;
            let weights = params.0[off..off + w_len].to_vec();
            off += w_len;
            let bias = params.0[off..off + spec.output_dim].to_vec();
            off += spec.output_dim;
            layers.push(Layer { weights, bias });
        }
        Ok(MlpNet { shape, layers })
    }
}

/// Mean over the batch of the squared Euclidean error between network
/// outputs and targets.
pub fn mse_loss(net: &MlpNet, inputs: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<f64> {
    if inputs.len() != targets.len() {
        return Err(Error::shape("mse batch", inputs.len(), targets.len()));
    }
    if inputs.is_empty() {
        return Err(Error::InvalidArgument("mse on empty batch".into()));
    }
    let mut total = 0.0;
    for (x, t) in inputs.iter().zip(targets) {
        let y = net.forward(x)?;
        if t.len() != y.len() {
            return Err(Error::shape("mse target", y.len(), t.len()));
        }
        total += y
            .iter()
            .zip(t)
            .map(|(yi, ti)| (yi - ti) * (yi - ti))
            .sum::<f64>();
    }
    Ok(total / inputs.len() as f64)
}

/// Loss as in [`mse_loss`] together with its gradient in flat layout.
pub fn mse_loss_and_grad(
    net: &MlpNet,
    inputs: &[Vec<f64>],
    targets: &[Vec<f64>],
) -> Result<(f64, ParamVec)> {
    if inputs.len() != targets.len() {
        return Err(Error::shape("mse batch", inputs.len(), targets.len()));
    }
    if inputs.is_empty() {
        return Err(Error::InvalidArgument("mse on empty batch".into()));
    }
    let scale = 1.0 / inputs.len() as f64;
    let mut grad = vec![0.0; net.param_count()];
    let mut total = 0.0;
    let mut out_grad = vec![0.0; net.output_dim()];
    for (x, t) in inputs.iter().zip(targets) {
        let trace = net.forward_trace(x)?;
        let y = trace.output();
        if t.len() != y.len() {
            return Err(Error::shape("mse target", y.len(), t.len()));
        }
        for ((g, yi), ti) in out_grad.iter_mut().zip(y).zip(t) {
            let e = yi - ti;
            total += e * e;
            *g = 2.0 * e * scale;
        }
        net.accumulate_backward(&trace, &out_grad, &mut grad)?;
    }
    Ok((total * scale, ParamVec(grad)))
}
