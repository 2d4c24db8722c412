//! A small dense network engine and the two network forecasters built on it.

mod engine;
mod forecaster;
mod input;
mod kmeans;
mod train;

pub use engine::{
    gradient_check, mse_loss, BatchNorm, Cache, Dense, Gradients, Layer, Mode, Network, Pass, Rbf, BN_EPS, BN_MOMENTUM,
    LEAKY_SLOPE,
};
pub use forecaster::{ffnn_network, rbfnn_network, NeuralForecaster, NeuralKind, FFNN_DROPOUT, FFNN_HIDDEN, RBF_UNITS};
pub use input::{training_rows, InputSpec, RowSet, FFNN_INDICES, NN_HISTORY, RBFNN_INDICES};
pub use kmeans::{kmeans, median_center_distance};
pub use train::{train, write_training_curve, EpochStats, TrainConfig, TrainOutcome};
