//! Mini-batch Adam with early stopping on a held-out recent slice.

use std::path::Path;

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::neural::engine::{mse_loss, Gradients, Mode, Network};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Epochs without a validation improvement before stopping.
    pub patience: usize,
    /// Share of the most recent rows held out for validation.
    pub validation_fraction: f64,
    pub seed: u64,
    /// Train RBF centers and widths by gradient instead of freezing them.
    pub train_rbf: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            batch_size: 64,
            max_epochs: 1000,
            patience: 20,
            validation_fraction: 0.10,
            seed: 0,
            train_rbf: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(format!("training {what}")));
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad("learning rate must be a non-negative number");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) || !(self.epsilon > 0.0) {
            return bad("Adam moments must lie in [0, 1) with positive epsilon");
        }
        if self.batch_size < 2 {
            return bad("batch size must be at least 2");
        }
        if self.max_epochs == 0 || self.patience == 0 {
            return bad("epochs and patience must be positive");
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return bad("validation fraction must lie in (0, 1)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_mse: f64,
    pub val_mse: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<S> {
    /// Parameters from the epoch with the lowest validation MSE.
    pub network: Network<S>,
    pub curve: Vec<EpochStats>,
    pub best_epoch: usize,
    /// Validation MSE before the first update.
    pub initial_val_mse: f64,
}

impl<S> TrainOutcome<S> {
    pub fn best_val_mse(&self) -> f64 {
        self.curve.iter().find(|e| e.epoch == self.best_epoch).map_or(self.initial_val_mse, |e| e.val_mse)
    }
}

struct Adam<S> {
    lr: S,
    beta1: S,
    beta2: S,
    eps: S,
    step: i32,
    m: Vec<Vec<S>>,
    v: Vec<Vec<S>>,
}

impl<S: Scalar> Adam<S> {
    fn new(cfg: &TrainConfig, net: &Network<S>) -> Self {
        let zeros: Vec<Vec<S>> = net.parameters().iter().map(|p| vec![S::zero(); p.len()]).collect();
        Self {
            lr: S::c(cfg.learning_rate),
            beta1: S::c(cfg.beta1),
            beta2: S::c(cfg.beta2),
            eps: S::c(cfg.epsilon),
            step: 0,
            m: zeros.clone(),
            v: zeros,
        }
    }

    fn update(&mut self, net: &mut Network<S>, grads: &Gradients<S>) {
        self.step += 1;
        let c1 = S::one() - self.beta1.powi(self.step);
        let c2 = S::one() - self.beta2.powi(self.step);
        for (t, param) in net.parameters_mut().into_iter().enumerate() {
            let (m, v, g) = (&mut self.m[t], &mut self.v[t], &grads.tensors[t]);
            for k in 0..param.len() {
                m[k] = self.beta1 * m[k] + (S::one() - self.beta1) * g[k];
                v[k] = self.beta2 * v[k] + (S::one() - self.beta2) * g[k] * g[k];
                let mhat = m[k] / c1;
                let vhat = v[k] / c2;
                param[k] -= self.lr * mhat / (vhat.sqrt() + self.eps);
            }
        }
    }
}

fn gather<S: Scalar>(m: &Matrix<S>, rows: &[usize]) -> Matrix<S> {
    let mut data = Vec::with_capacity(rows.len() * m.cols());
    for &r in rows {
        data.extend_from_slice(m.row(r));
    }
    Matrix::from_vec(rows.len(), m.cols(), data).expect("gathered rows are rectangular")
}

fn to_f64<S: Scalar>(v: S) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// Train `net` on rows `x -> y`, holding out the most recent rows for
/// validation. Rows are assumed to be in time order.
pub fn train<S: Scalar>(
    mut net: Network<S>,
    x: &Matrix<S>,
    y: &Matrix<S>,
    cfg: &TrainConfig,
    rng: &mut ChaCha8Rng,
) -> Result<TrainOutcome<S>> {
    cfg.validate()?;
    let n = x.rows();
    if y.rows() != n {
        return Err(Error::Shape(format!("{n} input rows, {} target rows", y.rows())));
    }
    if n < 10 {
        return Err(Error::InsufficientData(format!("{n} training rows, need at least 10")));
    }
    let n_val = ((n as f64 * cfg.validation_fraction).round() as usize).clamp(1, n - 2);
    let n_fit = n - n_val;
    let val_rows: Vec<usize> = (n_fit..n).collect();
    let (x_val, y_val) = (gather(x, &val_rows), gather(y, &val_rows));
    let val_mse = |net: &Network<S>| -> Result<f64> { Ok(to_f64(mse_loss(&net.predict(&x_val)?, &y_val)?.0)) };

    let initial_val_mse = val_mse(&net)?;
    let mut adam = Adam::new(cfg, &net);
    let mut order: Vec<usize> = (0..n_fit).collect();
    let mut best = (f64::INFINITY, net.clone(), 0usize);
    let mut curve = Vec::new();
    let mut stale = 0;
    for epoch in 1..=cfg.max_epochs {
        order.shuffle(rng);
        let mut sum = 0.0;
        let mut seen = 0usize;
        for batch in order.chunks(cfg.batch_size) {
            // Batch statistics need at least two rows.
            if batch.len() < 2 {
                continue;
            }
            let (bx, by) = (gather(x, batch), gather(y, batch));
            let (loss, grads, pass) = net.loss_and_gradients(&bx, &by, Mode::Train, Some(rng))?;
            adam.update(&mut net, &grads);
            net.update_running_stats(&pass);
            sum += to_f64(loss) * batch.len() as f64;
            seen += batch.len();
        }
        let v = val_mse(&net)?;
        curve.push(EpochStats { epoch, train_mse: sum / seen.max(1) as f64, val_mse: v });
        if v < best.0 {
            best = (v, net.clone(), epoch);
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.patience {
                break;
            }
        }
    }
    let (_, network, best_epoch) = best;
    Ok(TrainOutcome { network, curve, best_epoch, initial_val_mse })
}

/// Write `epoch,train_mse,val_mse` rows.
pub fn write_training_curve(curve: &[EpochStats], path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in curve {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
