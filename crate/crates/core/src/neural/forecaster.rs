//! The two network forecasters: architectures, fitting and prediction.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::calendar::hour_of_week;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::models::{finish_window, CounterView, ForecastContext, Forecaster};
use crate::neural::engine::{column_moments, BatchNorm, Dense, Layer, Network, Rbf, BN_EPS, LEAKY_SLOPE};
use crate::neural::input::{training_rows, InputSpec, NN_HISTORY};
use crate::neural::kmeans::{kmeans, median_center_distance};
use crate::neural::train::{train, EpochStats, TrainConfig};
use crate::scalar::Scalar;
use crate::series::{ForecastWindow, HORIZON};

pub const FFNN_HIDDEN: [usize; 2] = [10, 46];
pub const FFNN_DROPOUT: f64 = 0.406;
pub const RBF_UNITS: usize = 16;

/// Input batch norm, two dense blocks (dense, batch norm, leaky ReLU,
/// dropout) of 10 and 46 units, and a dense layer to the 72 outputs.
pub fn ffnn_network<S: Scalar>(input: usize, rng: &mut ChaCha8Rng) -> Network<S> {
    let mut layers = vec![Layer::BatchNorm(BatchNorm::new(input))];
    let mut width = input;
    for hidden in FFNN_HIDDEN {
        layers.push(Layer::Dense(Dense::init(width, hidden, rng)));
        layers.push(Layer::BatchNorm(BatchNorm::new(hidden)));
        layers.push(Layer::LeakyRelu { alpha: S::c(LEAKY_SLOPE) });
        layers.push(Layer::Dropout { p: S::c(FFNN_DROPOUT) });
        width = hidden;
    }
    layers.push(Layer::Dense(Dense::init(width, HORIZON, rng)));
    Network::new(input, layers).expect("layer widths chain by construction")
}

/// Input batch norm, a layer of Gaussian units and a dense output layer.
pub fn rbfnn_network<S: Scalar>(
    centers: Matrix<S>,
    widths: Vec<S>,
    trainable: bool,
    rng: &mut ChaCha8Rng,
) -> Result<Network<S>> {
    let input = centers.cols();
    let units = centers.rows();
    let layers = vec![
        Layer::BatchNorm(BatchNorm::new(input)),
        Layer::Rbf(Rbf::new(centers, widths, trainable)?),
        Layer::Dense(Dense::init(units, HORIZON, rng)),
    ];
    Network::new(input, layers)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NeuralKind {
    Ffnn,
    Rbfnn,
}

/// A trained network plus the input layout and target scaling it expects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeuralForecaster {
    pub kind: NeuralKind,
    pub input: InputSpec,
    pub network: Network<f64>,
    /// Targets are fitted as `(y - target_mean) / target_scale`.
    pub target_mean: f64,
    pub target_scale: f64,
    pub best_epoch: usize,
    pub curve: Vec<EpochStats>,
}

impl NeuralForecaster {
    pub fn fit_ffnn(train: &CounterView<'_>, cfg: &TrainConfig) -> Result<Self> {
        Self::fit(train, NeuralKind::Ffnn, InputSpec::ffnn(), cfg)
    }

    pub fn fit_rbfnn(train: &CounterView<'_>, cfg: &TrainConfig) -> Result<Self> {
        Self::fit(train, NeuralKind::Rbfnn, InputSpec::rbfnn(), cfg)
    }

    pub fn fit(view: &CounterView<'_>, kind: NeuralKind, input: InputSpec, cfg: &TrainConfig) -> Result<Self> {
        cfg.validate()?;
        let rows = training_rows(view, &input)?;
        if rows.origins.len() < 10 {
            return Err(Error::InsufficientData(format!(
                "counter {} has {} usable network rows, need 10",
                view.counter_id,
                rows.origins.len()
            )));
        }
        let targets = rows.targets.as_slice();
        let mean = targets.iter().sum::<f64>() / targets.len() as f64;
        let var = targets.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / targets.len() as f64;
        let scale = if var > 0.0 { var.sqrt() } else { 1.0 };
        let z: Vec<f64> = targets.iter().map(|y| (y - mean) / scale).collect();
        let z = Matrix::from_vec(rows.targets.rows(), HORIZON, z)?;

        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let width = input.width();
        let net = match kind {
            NeuralKind::Ffnn => ffnn_network(width, &mut rng),
            NeuralKind::Rbfnn => {
                // Cluster in the space the input batch norm maps to.
                let standardized = standardize(&rows.inputs);
                let centers = kmeans(&standardized, RBF_UNITS, &mut rng)?;
                let w = median_center_distance(&centers);
                rbfnn_network(centers, vec![w; RBF_UNITS], cfg.train_rbf, &mut rng)?
            }
        };
        let outcome = train(net, &rows.inputs, &z, cfg, &mut rng)?;
        Ok(Self {
            kind,
            input,
            network: outcome.network,
            target_mean: mean,
            target_scale: scale,
            best_epoch: outcome.best_epoch,
            curve: outcome.curve,
        })
    }

    /// Forecast from an input row.
    pub fn predict_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        let x = Matrix::from_vec(1, row.len(), row.to_vec())?;
        let z = self.network.predict(&x)?;
        Ok(z.row(0).iter().map(|v| v * self.target_scale + self.target_mean).collect())
    }
}

fn standardize(x: &Matrix<f64>) -> Matrix<f64> {
    let (mean, var) = column_moments(x);
    Matrix::from_fn(x.rows(), x.cols(), |i, j| (x.get(i, j) - mean[j]) / (var[j] + BN_EPS).sqrt())
}

impl Forecaster for NeuralForecaster {
    fn warmup(&self) -> usize {
        NN_HISTORY
    }

    fn predict(&self, ctx: &ForecastContext<'_>) -> Result<ForecastWindow> {
        let trailing = ctx.valid.iter().rev().take_while(|v| **v).count();
        if trailing < NN_HISTORY {
            return Err(Error::WarmUp { needed: NN_HISTORY, available: trailing });
        }
        let mut row = Vec::with_capacity(self.input.width());
        self.input.push_row(ctx.history, ctx.origin_index(), ctx.weather_now, hour_of_week(ctx.origin)?, &mut row);
        finish_window(ctx.origin, self.predict_row(&row)?)
    }
}
