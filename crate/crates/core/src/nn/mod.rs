//! Forward-only inference: 1-D convolution, pooling, recurrent cells
//! (LSTM and GRU), dense and softmax layers, composed from a portable JSON
//! weights bundle. A nearest-centroid classifier over feature vectors is
//! provided for weight-free use.

mod bundle;
mod centroid;
mod ops;
mod recurrent;

pub(crate) use bundle::classify_compiled;
pub use bundle::{
    classify_window, forward_layers, table2_bundle, ClassProbabilities, FeatureNorm, Layer, LayerKind,
    LayerParams, LayerSpec, WeightsBundle,
};
pub use centroid::{centroid_classify, fit_centroids, CentroidModel};
pub use ops::{conv1d_forward, dense_forward, maxpool1d, relu, softmax, Conv1d, Dense};
pub use recurrent::{
    gru_cell_step, gru_forward, lstm_cell_step, lstm_forward, sigmoid, CellActivation, GruStep,
    GruWeights, LstmStep, LstmWeights,
};

use crate::error::{Error, Result};

/// Row-major `channels × len` activations; element `(c, t)` is at `c * len + t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub channels: usize,
    pub len: usize,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn new(channels: usize, len: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != channels * len {
            return Err(Error::shape(
                format!("{channels}x{len} = {} values", channels * len),
                format!("{} values", data.len()),
            ));
        }
        Ok(Tensor {
            channels,
            len,
            data,
        })
    }

    pub fn zeros(channels: usize, len: usize) -> Self {
        Tensor {
            channels,
            len,
            data: vec![0.0; channels * len],
        }
    }

    /// A single column vector (`len` = 1).
    pub fn vector(values: Vec<f64>) -> Self {
        Tensor {
            channels: values.len(),
            len: 1,
            data: values,
        }
    }

    #[inline]
    pub fn at(&self, c: usize, t: usize) -> f64 {
        self.data[c * self.len + t]
    }

    /// The `channels`-long input vector at step `t`.
    pub fn column(&self, t: usize) -> Vec<f64> {
        (0..self.channels).map(|c| self.at(c, t)).collect()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.channels, self.len)
    }
}
