//! Weights bundle: a JSON document describing an ordered layer stack.
//!
//! ```json
//! {
//!   "input_len": 128,
//!   "input_channels": 3,
//!   "class_names": ["Walk", "Jog"],
//!   "feature_norm": {"mean": [0, 0, 0], "std": [1, 1, 1]},
//!   "layers": [
//!     {"kind": "conv1d", "params": {"in_channels": 3, "filters": 4, "kernel_size": 5, "stride": 1},
//!      "weights": [...], "bias": [...]},
//!     {"kind": "relu"},
//!     ...
//!   ]
//! }
//! ```

use serde::{Deserialize, Serialize};

use super::ops::{conv1d_forward, dense_forward, maxpool1d, relu, softmax, Conv1d, Dense};
use super::recurrent::{gru_forward, lstm_forward, CellActivation, GruWeights, LstmWeights};
use super::Tensor;
use crate::error::{Error, Result};
use crate::signal::SampleWindow;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerKind {
    Conv1d,
    Relu,
    Maxpool1d,
    Dropout,
    Flatten,
    Lstm,
    Gru,
    Dense,
    Softmax,
}

impl LayerKind {
    fn name(self) -> &'static str {
        match self {
            LayerKind::Conv1d => "conv1d",
            LayerKind::Relu => "relu",
            LayerKind::Maxpool1d => "maxpool1d",
            LayerKind::Dropout => "dropout",
            LayerKind::Flatten => "flatten",
            LayerKind::Lstm => "lstm",
            LayerKind::Gru => "gru",
            LayerKind::Dense => "dense",
            LayerKind::Softmax => "softmax",
        }
    }
}

/// Shape parameters; which fields are required depends on the layer kind.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LayerParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub in_channels: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stride: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pool_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub in_features: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub return_sequences: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell_activation: Option<CellActivation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub kind: LayerKind,
    #[serde(default)]
    pub params: LayerParams,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub weights: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bias: Vec<f64>,
}

impl LayerSpec {
    pub fn simple(kind: LayerKind) -> Self {
        LayerSpec {
            kind,
            params: LayerParams::default(),
            weights: Vec::new(),
            bias: Vec::new(),
        }
    }
}

/// Per-input-channel normalisation applied before the first layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureNorm {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl FeatureNorm {
    pub fn apply(&self, values: &mut [f64]) {
        for ((v, m), s) in values.iter_mut().zip(&self.mean).zip(&self.std) {
            *v = (*v - m) / if *s > 0.0 { *s } else { 1.0 };
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightsBundle {
    pub layers: Vec<LayerSpec>,
    pub input_len: usize,
    pub input_channels: usize,
    pub class_names: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature_norm: Option<FeatureNorm>,
}

/// A validated layer ready for inference.
#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Conv1d(Conv1d),
    Relu,
    MaxPool1d { pool_size: usize, stride: usize },
    Dropout,
    Flatten,
    Lstm { weights: LstmWeights, return_sequences: bool },
    Gru { weights: GruWeights, return_sequences: bool },
    Dense(Dense),
    Softmax,
}

impl Layer {
    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        match self {
            Layer::Conv1d(c) => conv1d_forward(x, c),
            Layer::Relu => Ok(relu(x)),
            Layer::MaxPool1d { pool_size, stride } => maxpool1d(x, *pool_size, *stride),
            Layer::Dropout => Ok(x.clone()),
            Layer::Flatten => Ok(Tensor::vector(x.data.clone())),
            Layer::Lstm {
                weights,
                return_sequences,
            } => lstm_forward(x, weights, *return_sequences),
            Layer::Gru {
                weights,
                return_sequences,
            } => gru_forward(x, weights, *return_sequences),
            Layer::Dense(d) => Ok(Tensor::vector(dense_forward(&x.data, d)?)),
            Layer::Softmax => Ok(Tensor {
                data: softmax(&x.data),
                ..*x
            }),
        }
    }

    /// Output shape for a given input shape, or a reason why it does not compose.
    fn output_shape(&self, (c, l): (usize, usize)) -> std::result::Result<(usize, usize), String> {
        match self {
            Layer::Conv1d(conv) => {
                if c != conv.in_channels {
                    return Err(format!("expects {} channels, got {c}", conv.in_channels));
                }
                conv.output_len(l)
                    .map(|len| (conv.filters, len))
                    .ok_or_else(|| format!("input length {l} shorter than kernel {}", conv.kernel_size))
            }
            Layer::MaxPool1d { pool_size, stride } => {
                if l < *pool_size {
                    return Err(format!("input length {l} shorter than pool {pool_size}"));
                }
                Ok((c, (l - pool_size) / stride + 1))
            }
            Layer::Relu | Layer::Dropout | Layer::Softmax => Ok((c, l)),
            Layer::Flatten => Ok((c * l, 1)),
            Layer::Lstm {
                weights,
                return_sequences,
            } => recurrent_shape(c, l, weights.input_dim, weights.units, *return_sequences),
            Layer::Gru {
                weights,
                return_sequences,
            } => recurrent_shape(c, l, weights.input_dim, weights.units, *return_sequences),
            Layer::Dense(d) => {
                if c * l != d.in_features {
                    return Err(format!("expects {} features, got {c}x{l}", d.in_features));
                }
                Ok((d.units, 1))
            }
        }
    }
}

fn recurrent_shape(
    c: usize,
    l: usize,
    input_dim: usize,
    units: usize,
    return_sequences: bool,
) -> std::result::Result<(usize, usize), String> {
    if c != input_dim {
        return Err(format!("expects input_dim {input_dim}, got {c} channels"));
    }
    if l == 0 {
        return Err("empty sequence".into());
    }
    Ok((units, if return_sequences { l } else { 1 }))
}

fn require(value: Option<usize>, name: &str) -> std::result::Result<usize, String> {
    match value {
        Some(v) if v >= 1 => Ok(v),
        Some(_) => Err(format!("{name} must be >= 1")),
        None => Err(format!("missing parameter {name}")),
    }
}

fn expect_len(got: usize, want: usize, what: &str) -> std::result::Result<(), String> {
    if got != want {
        return Err(format!("{what}: declared shape needs {want} values, got {got}"));
    }
    Ok(())
}

impl LayerSpec {
    fn compile(&self) -> std::result::Result<Layer, String> {
        let p = &self.params;
        let layer = match self.kind {
            LayerKind::Conv1d => {
                let in_channels = require(p.in_channels, "in_channels")?;
                let filters = require(p.filters, "filters")?;
                let kernel_size = require(p.kernel_size, "kernel_size")?;
                let stride = require(p.stride.or(Some(1)), "stride")?;
                expect_len(self.weights.len(), filters * in_channels * kernel_size, "weights")?;
                expect_len(self.bias.len(), filters, "bias")?;
                Layer::Conv1d(Conv1d {
                    in_channels,
                    filters,
                    kernel_size,
                    stride,
                    weights: self.weights.clone(),
                    bias: self.bias.clone(),
                })
            }
            LayerKind::Relu => Layer::Relu,
            LayerKind::Maxpool1d => {
                let pool_size = require(p.pool_size, "pool_size")?;
                let stride = require(p.stride.or(Some(pool_size)), "stride")?;
                Layer::MaxPool1d { pool_size, stride }
            }
            LayerKind::Dropout => Layer::Dropout,
            LayerKind::Flatten => Layer::Flatten,
            LayerKind::Lstm => {
                let units = require(p.units, "units")?;
                let input_dim = require(p.input_dim, "input_dim")?;
                let weights = LstmWeights::from_flat(
                    units,
                    input_dim,
                    &self.weights,
                    &self.bias,
                    p.cell_activation.unwrap_or_default(),
                )
                .map_err(|e| e.to_string())?;
                Layer::Lstm {
                    weights,
                    return_sequences: p.return_sequences.unwrap_or(false),
                }
            }
            LayerKind::Gru => {
                let units = require(p.units, "units")?;
                let input_dim = require(p.input_dim, "input_dim")?;
                let weights = GruWeights::from_flat(units, input_dim, &self.weights, &self.bias)
                    .map_err(|e| e.to_string())?;
                Layer::Gru {
                    weights,
                    return_sequences: p.return_sequences.unwrap_or(false),
                }
            }
            LayerKind::Dense => {
                let in_features = require(p.in_features, "in_features")?;
                let units = require(p.units, "units")?;
                expect_len(self.weights.len(), units * in_features, "weights")?;
                expect_len(self.bias.len(), units, "bias")?;
                Layer::Dense(Dense {
                    in_features,
                    units,
                    weights: self.weights.clone(),
                    bias: self.bias.clone(),
                })
            }
            LayerKind::Softmax => Layer::Softmax,
        };
        if !self.weights.iter().chain(&self.bias).all(|v| v.is_finite()) {
            return Err("non-finite weight".into());
        }
        Ok(layer)
    }
}

/// Probabilities over a bundle's `class_names`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassProbabilities {
    pub probs: Vec<f64>,
}

impl ClassProbabilities {
    /// Index of the most probable class; ties go to the lower index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, p) in self.probs.iter().enumerate() {
            if *p > self.probs[best] {
                best = i;
            }
        }
        best
    }
}

impl WeightsBundle {
    pub fn from_json(text: &str) -> Result<Self> {
        let bundle: WeightsBundle = serde_json::from_str(text)?;
        bundle.compile()?;
        Ok(bundle)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bundle serialises")
    }

    /// Validates every layer and checks that shapes compose end to end.
    pub fn compile(&self) -> Result<Vec<Layer>> {
        if self.input_len == 0 || self.input_channels == 0 {
            return Err(Error::InvalidParameter(
                "input_len and input_channels must be positive".into(),
            ));
        }
        if let Some(norm) = &self.feature_norm {
            if norm.mean.len() != self.input_channels || norm.std.len() != self.input_channels {
                return Err(Error::shape(
                    format!("feature_norm of {} channels", self.input_channels),
                    format!("mean {} / std {}", norm.mean.len(), norm.std.len()),
                ));
            }
        }
        let mut shape = (self.input_channels, self.input_len);
        let mut layers = Vec::with_capacity(self.layers.len());
        for (index, spec) in self.layers.iter().enumerate() {
            let invalid = |reason: String| Error::InvalidLayer {
                index,
                kind: spec.kind.name().to_string(),
                reason,
            };
            let layer = spec.compile().map_err(invalid)?;
            shape = layer.output_shape(shape).map_err(invalid)?;
            layers.push(layer);
        }
        match self.layers.last().map(|l| l.kind) {
            Some(LayerKind::Softmax) => {}
            _ => {
                return Err(Error::InvalidParameter(
                    "the final layer must be softmax".into(),
                ))
            }
        }
        if shape.0 * shape.1 != self.class_names.len() {
            return Err(Error::shape(
                format!("{} classes", self.class_names.len()),
                format!("softmax width {}", shape.0 * shape.1),
            ));
        }
        Ok(layers)
    }

    /// Input tensor (`input_channels × input_len`) for a window, normalised
    /// when the bundle carries `feature_norm`.
    pub fn input_tensor(&self, window: &SampleWindow) -> Result<Tensor> {
        if window.len() != self.input_len {
            return Err(Error::shape(
                format!("window of {} samples", self.input_len),
                format!("window of {} samples", window.len()),
            ));
        }
        let mut channels: Vec<Vec<f64>> = (0..3).map(|a| window.axis(a)).collect();
        match self.input_channels {
            3 => {}
            6 => {
                for a in 0..3 {
                    channels.push(window.gyro_axis(a).ok_or_else(|| {
                        Error::shape("6 channels (acc + gyro)", "window without gyroscope")
                    })?);
                }
            }
            n => return Err(Error::shape("3 or 6 input channels", format!("{n}"))),
        }
        if let Some(norm) = &self.feature_norm {
            for (c, values) in channels.iter_mut().enumerate() {
                let s = if norm.std[c] > 0.0 { norm.std[c] } else { 1.0 };
                values.iter_mut().for_each(|v| *v = (*v - norm.mean[c]) / s);
            }
        }
        Tensor::new(self.input_channels, self.input_len, channels.concat())
    }
}

/// Runs `tensor` through compiled layers in order.
pub fn forward_layers(layers: &[Layer], tensor: Tensor) -> Result<Tensor> {
    layers.iter().try_fold(tensor, |x, layer| layer.forward(&x))
}

pub fn classify_window(window: &SampleWindow, bundle: &WeightsBundle) -> Result<ClassProbabilities> {
    let layers = bundle.compile()?;
    classify_compiled(window, bundle, &layers)
}

pub(crate) fn classify_compiled(
    window: &SampleWindow,
    bundle: &WeightsBundle,
    layers: &[Layer],
) -> Result<ClassProbabilities> {
    let out = forward_layers(layers, bundle.input_tensor(window)?)?;
    Ok(ClassProbabilities { probs: out.data })
}

/// Zero-weight bundle with the reference architecture: two convolutions
/// (32 then 128 filters, kernel 64), dropout 0.07, max pooling, flatten,
/// two 64-unit GRUs, dropout 0.2, dense and softmax.
pub fn table2_bundle(class_names: Vec<String>, input_channels: usize, input_len: usize) -> Result<WeightsBundle> {
    let conv = |in_channels: usize, filters: usize| LayerSpec {
        kind: LayerKind::Conv1d,
        params: LayerParams {
            in_channels: Some(in_channels),
            filters: Some(filters),
            kernel_size: Some(64),
            stride: Some(1),
            ..LayerParams::default()
        },
        weights: vec![0.0; filters * in_channels * 64],
        bias: vec![0.0; filters],
    };
    let dropout = |rate: f64| LayerSpec {
        kind: LayerKind::Dropout,
        params: LayerParams {
            rate: Some(rate),
            ..LayerParams::default()
        },
        weights: Vec::new(),
        bias: Vec::new(),
    };
    let gru = |input_dim: usize, return_sequences: bool| {
        let (nw, nb) = GruWeights::flat_len(64, input_dim);
        LayerSpec {
            kind: LayerKind::Gru,
            params: LayerParams {
                input_dim: Some(input_dim),
                units: Some(64),
                return_sequences: Some(return_sequences),
                ..LayerParams::default()
            },
            weights: vec![0.0; nw],
            bias: vec![0.0; nb],
        }
    };
    // conv lengths: L -> L-63 -> L-126, pooled by 2
    let conv_out = input_len.checked_sub(126).filter(|&l| l >= 2).ok_or_else(|| {
        Error::InvalidParameter(format!("input_len {input_len} too short for two kernel-64 convolutions"))
    })?;
    let pooled = (conv_out - 2) / 2 + 1;
    let classes = class_names.len();
    let bundle = WeightsBundle {
        layers: vec![
            conv(input_channels, 32),
            LayerSpec::simple(LayerKind::Relu),
            conv(32, 128),
            LayerSpec::simple(LayerKind::Relu),
            dropout(0.07),
            LayerSpec {
                kind: LayerKind::Maxpool1d,
                params: LayerParams {
                    pool_size: Some(2),
                    stride: Some(2),
                    ..LayerParams::default()
                },
                weights: Vec::new(),
                bias: Vec::new(),
            },
            LayerSpec::simple(LayerKind::Flatten),
            gru(128 * pooled, true),
            gru(64, false),
            dropout(0.2),
            LayerSpec {
                kind: LayerKind::Dense,
                params: LayerParams {
                    in_features: Some(64),
                    units: Some(classes),
                    ..LayerParams::default()
                },
                weights: vec![0.0; 64 * classes],
                bias: vec![0.0; classes],
            },
            LayerSpec::simple(LayerKind::Softmax),
        ],
        input_len,
        input_channels,
        class_names,
        feature_norm: None,
    };
    bundle.compile()?;
    Ok(bundle)
}
