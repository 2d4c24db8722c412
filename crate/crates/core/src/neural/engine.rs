//! Layers, forward and backward passes.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Negative slope of the leaky ReLU (the PyTorch default).
pub const LEAKY_SLOPE: f64 = 0.01;
/// Batch-normalization momentum and epsilon (PyTorch defaults).
pub const BN_MOMENTUM: f64 = 0.1;
pub const BN_EPS: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Batch statistics and active dropout.
    Train,
    /// Batch statistics, dropout off. Used for gradient checks.
    TrainNoDropout,
    /// Running statistics, dropout off.
    Infer,
}

impl Mode {
    fn batch_stats(self) -> bool {
        self != Mode::Infer
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar + Serialize + for<'a> Deserialize<'a>")]
pub struct Dense<S> {
    /// `in x out`
    pub weights: Matrix<S>,
    pub bias: Vec<S>,
}

impl<S: Scalar> Dense<S> {
    pub fn new(weights: Matrix<S>, bias: Vec<S>) -> Result<Self> {
        if bias.len() != weights.cols() {
            return Err(Error::Shape(format!("bias of {} for {} outputs", bias.len(), weights.cols())));
        }
        Ok(Self { weights, bias })
    }

    /// Weights and biases uniform in `±1/sqrt(input)`.
    pub fn init(input: usize, output: usize, rng: &mut ChaCha8Rng) -> Self {
        let bound = 1.0 / (input.max(1) as f64).sqrt();
        let weights = Matrix::from_fn(input, output, |_, _| S::c(rng.random_range(-bound..bound)));
        let bias = (0..output).map(|_| S::c(rng.random_range(-bound..bound))).collect();
        Self { weights, bias }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar + Serialize + for<'a> Deserialize<'a>")]
pub struct BatchNorm<S> {
    pub gamma: Vec<S>,
    pub beta: Vec<S>,
    pub running_mean: Vec<S>,
    pub running_var: Vec<S>,
    pub momentum: S,
    pub eps: S,
}

impl<S: Scalar> BatchNorm<S> {
    pub fn new(dim: usize) -> Self {
        Self {
            gamma: vec![S::one(); dim],
            beta: vec![S::zero(); dim],
            running_mean: vec![S::zero(); dim],
            running_var: vec![S::one(); dim],
            momentum: S::c(BN_MOMENTUM),
            eps: S::c(BN_EPS),
        }
    }
}

/// Gaussian units `exp(-|x - c_k|^2 / (2 w_k^2))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar + Serialize + for<'a> Deserialize<'a>")]
pub struct Rbf<S> {
    /// `units x in`
    pub centers: Matrix<S>,
    pub widths: Vec<S>,
    /// Whether centers and widths receive gradient updates.
    pub trainable: bool,
}

impl<S: Scalar> Rbf<S> {
    pub fn new(centers: Matrix<S>, widths: Vec<S>, trainable: bool) -> Result<Self> {
        if widths.len() != centers.rows() {
            return Err(Error::Shape(format!("{} widths for {} centers", widths.len(), centers.rows())));
        }
        if widths.iter().any(|w| !(w.abs() > S::zero())) {
            return Err(Error::Config("RBF widths must be non-zero".into()));
        }
        Ok(Self { centers, widths, trainable })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "layer", rename_all = "snake_case")]
#[serde(bound = "S: Scalar + Serialize + for<'a> Deserialize<'a>")]
pub enum Layer<S> {
    Dense(Dense<S>),
    BatchNorm(BatchNorm<S>),
    LeakyRelu { alpha: S },
    Dropout { p: S },
    Rbf(Rbf<S>),
}

/// Values kept from the forward pass for the backward pass.
#[derive(Debug, Clone)]
pub enum Cache<S> {
    Dense { input: Matrix<S> },
    BatchNorm { xhat: Matrix<S>, inv_std: Vec<S>, batch: bool, mean: Vec<S>, var: Vec<S> },
    LeakyRelu { input: Matrix<S> },
    Dropout { mask: Option<Vec<S>> },
    Rbf { input: Matrix<S>, output: Matrix<S>, sqdist: Matrix<S> },
}

impl<S: Scalar> Layer<S> {
    pub fn input_dim(&self) -> Option<usize> {
        match self {
            Layer::Dense(d) => Some(d.weights.rows()),
            Layer::BatchNorm(b) => Some(b.gamma.len()),
            Layer::Rbf(r) => Some(r.centers.cols()),
            _ => None,
        }
    }

    /// Output width given the input width.
    pub fn output_dim(&self, input: usize) -> usize {
        match self {
            Layer::Dense(d) => d.weights.cols(),
            Layer::Rbf(r) => r.centers.rows(),
            _ => input,
        }
    }

    pub fn forward(&self, x: Matrix<S>, mode: Mode, rng: Option<&mut ChaCha8Rng>) -> Result<(Matrix<S>, Cache<S>)> {
        if let Some(d) = self.input_dim() {
            if x.cols() != d {
                return Err(Error::Shape(format!("layer expects {d} inputs, batch has {}", x.cols())));
            }
        }
        let (n, m) = (x.rows(), x.cols());
        match self {
            Layer::Dense(d) => {
                let mut out = x.matmul(&d.weights)?;
                for i in 0..n {
                    for (o, b) in out.row_mut(i).iter_mut().zip(&d.bias) {
                        *o += *b;
                    }
                }
                Ok((out, Cache::Dense { input: x }))
            }
            Layer::BatchNorm(bn) => {
                let (mean, var) = if mode.batch_stats() {
                    column_moments(&x)
                } else {
                    (bn.running_mean.clone(), bn.running_var.clone())
                };
                let inv_std: Vec<S> = var.iter().map(|v| S::one() / (*v + bn.eps).sqrt()).collect();
                let mut xhat = x;
                let mut out = Matrix::zeros(n, m);
                for i in 0..n {
                    let row = xhat.row_mut(i);
                    let o = out.row_mut(i);
                    for j in 0..m {
                        row[j] = (row[j] - mean[j]) * inv_std[j];
                        o[j] = bn.gamma[j] * row[j] + bn.beta[j];
                    }
                }
                Ok((out, Cache::BatchNorm { xhat, inv_std, batch: mode.batch_stats(), mean, var }))
            }
            Layer::LeakyRelu { alpha } => {
                let mut out = x.clone();
                for v in out.as_mut_slice() {
                    if *v <= S::zero() {
                        *v *= *alpha;
                    }
                }
                Ok((out, Cache::LeakyRelu { input: x }))
            }
            Layer::Dropout { p } => {
                if mode != Mode::Train || *p <= S::zero() {
                    return Ok((x, Cache::Dropout { mask: None }));
                }
                let rng = rng.ok_or_else(|| Error::Config("dropout in training mode needs a random stream".into()))?;
                let keep = S::one() - *p;
                let scale = S::one() / keep;
                let keep = keep.to_f64().unwrap_or(1.0);
                let mask: Vec<S> =
                    (0..n * m).map(|_| if rng.random::<f64>() < keep { scale } else { S::zero() }).collect();
                let mut out = x;
                for (v, k) in out.as_mut_slice().iter_mut().zip(&mask) {
                    *v *= *k;
                }
                Ok((out, Cache::Dropout { mask: Some(mask) }))
            }
            Layer::Rbf(r) => {
                let k = r.centers.rows();
                let mut sqdist = Matrix::zeros(n, k);
                let mut out = Matrix::zeros(n, k);
                let two = S::c(2.0);
                for i in 0..n {
                    let xi = x.row(i);
                    for u in 0..k {
                        let d2: S = xi.iter().zip(r.centers.row(u)).map(|(a, c)| (*a - *c) * (*a - *c)).sum();
                        let w = r.widths[u];
                        sqdist.set(i, u, d2);
                        out.set(i, u, (-d2 / (two * w * w)).exp());
                    }
                }
                Ok((out.clone(), Cache::Rbf { input: x, output: out, sqdist }))
            }
        }
    }

    /// Gradient with respect to the layer input, plus parameter gradients in
    /// the order of [`Layer::parameters`].
    pub fn backward(&self, cache: &Cache<S>, dy: &Matrix<S>) -> Result<(Matrix<S>, Vec<Vec<S>>)> {
        let (n, m) = (dy.rows(), dy.cols());
        match (self, cache) {
            (Layer::Dense(d), Cache::Dense { input }) => {
                let dw = input.t_matmul(dy)?;
                let mut db = vec![S::zero(); m];
                for i in 0..n {
                    for (g, v) in db.iter_mut().zip(dy.row(i)) {
                        *g += *v;
                    }
                }
                let dx = dy.matmul_t(&d.weights)?;
                Ok((dx, vec![dw.as_slice().to_vec(), db]))
            }
            (Layer::BatchNorm(bn), Cache::BatchNorm { xhat, inv_std, batch, .. }) => {
                let mut dgamma = vec![S::zero(); m];
                let mut dbeta = vec![S::zero(); m];
                for i in 0..n {
                    for j in 0..m {
                        dgamma[j] += dy.get(i, j) * xhat.get(i, j);
                        dbeta[j] += dy.get(i, j);
                    }
                }
                let mut dx = Matrix::zeros(n, m);
                if *batch {
                    let nn = S::c(n as f64);
                    for j in 0..m {
                        // With dxhat = dy * gamma:
                        // dx = inv_std / N * (N dxhat - sum(dxhat) - xhat * sum(dxhat xhat))
                        let g = bn.gamma[j];
                        let sum1 = dbeta[j] * g;
                        let sum2 = dgamma[j] * g;
                        for i in 0..n {
                            let dxhat = dy.get(i, j) * g;
                            dx.set(i, j, inv_std[j] / nn * (nn * dxhat - sum1 - xhat.get(i, j) * sum2));
                        }
                    }
                } else {
                    for i in 0..n {
                        for j in 0..m {
                            dx.set(i, j, dy.get(i, j) * bn.gamma[j] * inv_std[j]);
                        }
                    }
                }
                Ok((dx, vec![dgamma, dbeta]))
            }
            (Layer::LeakyRelu { alpha }, Cache::LeakyRelu { input }) => {
                let mut dx = dy.clone();
                for (g, x) in dx.as_mut_slice().iter_mut().zip(input.as_slice()) {
                    if *x <= S::zero() {
                        *g *= *alpha;
                    }
                }
                Ok((dx, Vec::new()))
            }
            (Layer::Dropout { .. }, Cache::Dropout { mask }) => {
                let mut dx = dy.clone();
                if let Some(mask) = mask {
                    for (g, k) in dx.as_mut_slice().iter_mut().zip(mask) {
                        *g *= *k;
                    }
                }
                Ok((dx, Vec::new()))
            }
            (Layer::Rbf(r), Cache::Rbf { input, output, sqdist }) => {
                let k = r.centers.rows();
                let d = r.centers.cols();
                let mut dx = Matrix::zeros(n, d);
                let mut dc = Matrix::zeros(k, d);
                let mut dw = vec![S::zero(); k];
                for i in 0..n {
                    for u in 0..k {
                        let w = r.widths[u];
                        let g = dy.get(i, u) * output.get(i, u);
                        dw[u] += g * sqdist.get(i, u) / (w * w * w);
                        // d out / d x = out * -(x - c) / w^2
                        let coef = -g / (w * w);
                        for t in 0..d {
                            let diff = input.get(i, t) - r.centers.get(u, t);
                            let v = coef * diff;
                            dx.set(i, t, dx.get(i, t) + v);
                            dc.set(u, t, dc.get(u, t) - v);
                        }
                    }
                }
                let grads = if r.trainable { vec![dc.as_slice().to_vec(), dw] } else { Vec::new() };
                Ok((dx, grads))
            }
            _ => Err(Error::Shape("forward cache does not belong to this layer".into())),
        }
    }

    pub fn parameters(&self) -> Vec<&[S]> {
        match self {
            Layer::Dense(d) => vec![d.weights.as_slice(), &d.bias],
            Layer::BatchNorm(b) => vec![&b.gamma, &b.beta],
            Layer::Rbf(r) if r.trainable => vec![r.centers.as_slice(), &r.widths],
            _ => Vec::new(),
        }
    }

    pub fn parameters_mut(&mut self) -> Vec<&mut [S]> {
        match self {
            Layer::Dense(d) => vec![d.weights.as_mut_slice(), &mut d.bias],
            Layer::BatchNorm(b) => vec![&mut b.gamma, &mut b.beta],
            Layer::Rbf(r) if r.trainable => vec![r.centers.as_mut_slice(), &mut r.widths],
            _ => Vec::new(),
        }
    }
}

/// Per-column mean and biased variance.
pub(crate) fn column_moments<S: Scalar>(x: &Matrix<S>) -> (Vec<S>, Vec<S>) {
    let (n, m) = (x.rows(), x.cols());
    let nn = S::c(n.max(1) as f64);
    let mut mean = vec![S::zero(); m];
    for i in 0..n {
        for (s, v) in mean.iter_mut().zip(x.row(i)) {
            *s += *v;
        }
    }
    for s in &mut mean {
        *s /= nn;
    }
    let mut var = vec![S::zero(); m];
    for i in 0..n {
        for j in 0..m {
            let d = x.get(i, j) - mean[j];
            var[j] += d * d;
        }
    }
    for v in &mut var {
        *v /= nn;
    }
    (mean, var)
}

/// Gradients for every parameter tensor of a network, in parameter order.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<S> {
    pub tensors: Vec<Vec<S>>,
}

/// A forward pass: the output and what the backward pass needs.
#[derive(Debug, Clone)]
pub struct Pass<S> {
    pub output: Matrix<S>,
    caches: Vec<Cache<S>>,
}

/// Ordered stack of layers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar + Serialize + for<'a> Deserialize<'a>")]
pub struct Network<S> {
    input_dim: usize,
    layers: Vec<Layer<S>>,
}

impl<S: Scalar> Network<S> {
    pub fn new(input_dim: usize, layers: Vec<Layer<S>>) -> Result<Self> {
        let mut dim = input_dim;
        for (i, layer) in layers.iter().enumerate() {
            if let Some(want) = layer.input_dim() {
                if want != dim {
                    return Err(Error::Shape(format!("layer {i} expects {want} inputs, previous layer gives {dim}")));
                }
            }
            dim = layer.output_dim(dim);
        }
        Ok(Self { input_dim, layers })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers.iter().fold(self.input_dim, |d, l| l.output_dim(d))
    }

    pub fn layers(&self) -> &[Layer<S>] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer<S>] {
        &mut self.layers
    }

    pub fn forward(&self, x: &Matrix<S>, mode: Mode, mut rng: Option<&mut ChaCha8Rng>) -> Result<Pass<S>> {
        if x.cols() != self.input_dim {
            return Err(Error::Shape(format!("network expects {} inputs, batch has {}", self.input_dim, x.cols())));
        }
        let mut h = x.clone();
        let mut caches = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let (out, cache) = layer.forward(h, mode, rng.as_deref_mut())?;
            caches.push(cache);
            h = out;
        }
        Ok(Pass { output: h, caches })
    }

    /// Inference-mode output.
    pub fn predict(&self, x: &Matrix<S>) -> Result<Matrix<S>> {
        Ok(self.forward(x, Mode::Infer, None)?.output)
    }

    /// Back-propagate `dy` (gradient of the loss w.r.t. the output).
    pub fn backward(&self, pass: &Pass<S>, dy: &Matrix<S>) -> Result<Gradients<S>> {
        let mut g = dy.clone();
        let mut per_layer = Vec::with_capacity(self.layers.len());
        for (layer, cache) in self.layers.iter().zip(&pass.caches).rev() {
            let (dx, grads) = layer.backward(cache, &g)?;
            per_layer.push(grads);
            g = dx;
        }
        per_layer.reverse();
        Ok(Gradients { tensors: per_layer.into_iter().flatten().collect() })
    }

    /// Batch MSE and its gradients.
    pub fn loss_and_gradients(
        &self,
        x: &Matrix<S>,
        y: &Matrix<S>,
        mode: Mode,
        rng: Option<&mut ChaCha8Rng>,
    ) -> Result<(S, Gradients<S>, Pass<S>)> {
        let pass = self.forward(x, mode, rng)?;
        let (loss, dy) = mse_loss(&pass.output, y)?;
        let grads = self.backward(&pass, &dy)?;
        Ok((loss, grads, pass))
    }

    /// Fold the batch statistics of a training pass into the running averages.
    pub fn update_running_stats(&mut self, pass: &Pass<S>) {
        let n = pass.output.rows();
        for (layer, cache) in self.layers.iter_mut().zip(&pass.caches) {
            if let (Layer::BatchNorm(bn), Cache::BatchNorm { batch: true, mean, var, .. }) = (layer, cache) {
                let m = bn.momentum;
                let unbias = if n > 1 { S::c(n as f64 / (n - 1) as f64) } else { S::one() };
                for j in 0..mean.len() {
                    bn.running_mean[j] = (S::one() - m) * bn.running_mean[j] + m * mean[j];
                    bn.running_var[j] = (S::one() - m) * bn.running_var[j] + m * var[j] * unbias;
                }
            }
        }
    }

    pub fn parameters(&self) -> Vec<&[S]> {
        self.layers.iter().flat_map(Layer::parameters).collect()
    }

    pub fn parameters_mut(&mut self) -> Vec<&mut [S]> {
        self.layers.iter_mut().flat_map(Layer::parameters_mut).collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.parameters().iter().map(|p| p.len()).sum()
    }
}

/// Mean over all elements of the squared error, and its gradient.
pub fn mse_loss<S: Scalar>(pred: &Matrix<S>, target: &Matrix<S>) -> Result<(S, Matrix<S>)> {
    if pred.rows() != target.rows() || pred.cols() != target.cols() {
        return Err(Error::Shape(format!(
            "prediction {}x{} vs target {}x{}",
            pred.rows(),
            pred.cols(),
            target.rows(),
            target.cols()
        )));
    }
    let count = S::c((pred.rows() * pred.cols()).max(1) as f64);
    let mut grad = Matrix::zeros(pred.rows(), pred.cols());
    let mut loss = S::zero();
    for ((g, p), t) in grad.as_mut_slice().iter_mut().zip(pred.as_slice()).zip(target.as_slice()) {
        let e = *p - *t;
        loss += e * e;
        *g = S::c(2.0) * e / count;
    }
    Ok((loss / count, grad))
}

/// Largest relative error between analytic and central-difference
/// gradients over every parameter, with dropout off.
///
/// The relative error is `|a - n| / max(|a|, |n|, 1e-6)`.
pub fn gradient_check<S: Scalar>(net: &Network<S>, x: &Matrix<S>, y: &Matrix<S>, h: S) -> Result<S> {
    let (_, analytic, _) = net.loss_and_gradients(x, y, Mode::TrainNoDropout, None)?;
    let mut probe = net.clone();
    let floor = S::c(1e-6);
    let mut worst = S::zero();
    let sizes: Vec<usize> = net.parameters().iter().map(|p| p.len()).collect();
    for (t, &len) in sizes.iter().enumerate() {
        for k in 0..len {
            let orig = probe.parameters()[t][k];
            probe.parameters_mut()[t][k] = orig + h;
            let up = mse_loss(&probe.forward(x, Mode::TrainNoDropout, None)?.output, y)?.0;
            probe.parameters_mut()[t][k] = orig - h;
            let down = mse_loss(&probe.forward(x, Mode::TrainNoDropout, None)?.output, y)?.0;
            probe.parameters_mut()[t][k] = orig;
            let numeric = (up - down) / (S::c(2.0) * h);
            let a = analytic.tensors[t][k];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(floor);
            worst = worst.max(rel);
        }
    }
    Ok(worst)
}
