use super::Tensor;
use crate::error::{Error, Result};

/// Valid (unpadded) 1-D cross-correlation. Weights are row-major
/// `[filters][in_channels][kernel_size]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Conv1d {
    pub in_channels: usize,
    pub filters: usize,
    pub kernel_size: usize,
    pub stride: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Conv1d {
    pub fn output_len(&self, input_len: usize) -> Option<usize> {
        (input_len >= self.kernel_size && self.stride > 0)
            .then(|| (input_len - self.kernel_size) / self.stride + 1)
    }
}

pub fn conv1d_forward(input: &Tensor, layer: &Conv1d) -> Result<Tensor> {
    if input.channels != layer.in_channels {
        return Err(Error::shape(
            format!("{} input channels", layer.in_channels),
            format!("{}x{} input", input.channels, input.len),
        ));
    }
    let out_len = layer.output_len(input.len).ok_or_else(|| {
        Error::shape(
            format!("length >= kernel {}", layer.kernel_size),
            format!("{}x{} input", input.channels, input.len),
        )
    })?;
    let k = layer.kernel_size;
    let mut out = Vec::with_capacity(layer.filters * out_len);
    for f in 0..layer.filters {
        let filter = &layer.weights[f * layer.in_channels * k..(f + 1) * layer.in_channels * k];
        for o in 0..out_len {
            let start = o * layer.stride;
            let mut acc = layer.bias[f];
            for c in 0..layer.in_channels {
                let row = &input.data[c * input.len + start..c * input.len + start + k];
                acc += row
                    .iter()
                    .zip(&filter[c * k..(c + 1) * k])
                    .map(|(x, w)| x * w)
                    .sum::<f64>();
            }
            out.push(acc);
        }
    }
    Tensor::new(layer.filters, out_len, out)
}

pub fn relu(input: &Tensor) -> Tensor {
    Tensor {
        data: input.data.iter().map(|&v| v.max(0.0)).collect(),
        ..*input
    }
}

/// Per-channel max over windows of `pool_size`, advancing by `stride`.
pub fn maxpool1d(input: &Tensor, pool_size: usize, stride: usize) -> Result<Tensor> {
    if pool_size == 0 || stride == 0 || input.len < pool_size {
        return Err(Error::shape(
            format!("length >= pool {pool_size}, stride >= 1"),
            format!("{}x{} input, stride {stride}", input.channels, input.len),
        ));
    }
    let out_len = (input.len - pool_size) / stride + 1;
    let mut out = Vec::with_capacity(input.channels * out_len);
    for c in 0..input.channels {
        let row = &input.data[c * input.len..(c + 1) * input.len];
        out.extend((0..out_len).map(|o| {
            row[o * stride..o * stride + pool_size]
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max)
        }));
    }
    Tensor::new(input.channels, out_len, out)
}

/// Fully connected layer, weights row-major `[units][in_features]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub in_features: usize,
    pub units: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

pub fn dense_forward(x: &[f64], layer: &Dense) -> Result<Vec<f64>> {
    if x.len() != layer.in_features {
        return Err(Error::shape(
            format!("{} input features", layer.in_features),
            format!("{} values", x.len()),
        ));
    }
    Ok(layer
        .weights
        .chunks_exact(layer.in_features)
        .zip(&layer.bias)
        .map(|(row, b)| b + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>())
        .collect())
}

/// Numerically stable softmax (max-subtracted).
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|v| (v - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn conv(weights: Vec<f64>, bias: f64, stride: usize) -> Conv1d {
        Conv1d {
            in_channels: 1,
            filters: 1,
            kernel_size: weights.len(),
            stride,
            weights,
            bias: vec![bias],
        }
    }

    #[test]
    fn conv_difference_kernel() {
        let x = Tensor::vector(vec![1.0, 2.0, 3.0, 4.0]);
        let x = Tensor::new(1, 4, x.data).unwrap();
        let y = conv1d_forward(&x, &conv(vec![1.0, 0.0, -1.0], 0.0, 1)).unwrap();
        assert_eq!(y.data, vec![-2.0, -2.0]);
    }

    #[test]
    fn conv_identity_and_zero_input() {
        let x = Tensor::new(1, 5, vec![3.0, -1.0, 0.5, 2.0, 7.0]).unwrap();
        assert_eq!(conv1d_forward(&x, &conv(vec![1.0], 0.0, 1)).unwrap(), x);
        let z = Tensor::zeros(1, 6);
        let y = conv1d_forward(&z, &conv(vec![0.3, 0.2], 1.5, 1)).unwrap();
        assert_eq!(y.data, vec![1.5; 5]);
    }

    #[test]
    fn conv_shape_errors_name_both_shapes() {
        let x = Tensor::zeros(2, 3);
        let err = conv1d_forward(&x, &conv(vec![1.0; 2], 0.0, 1)).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("1 input channels") && msg.contains("2x3"), "{msg}");
        assert!(conv1d_forward(&Tensor::zeros(1, 2), &conv(vec![1.0; 3], 0.0, 1)).is_err());
    }

    #[test]
    fn relu_cases() {
        let x = Tensor::new(1, 3, vec![-1.0, 0.0, 2.0]).unwrap();
        assert_eq!(relu(&x).data, vec![0.0, 0.0, 2.0]);
        let neg = Tensor::new(1, 2, vec![-3.0, -0.1]).unwrap();
        assert_eq!(relu(&neg).data, vec![0.0, 0.0]);
        let pos = Tensor::new(1, 2, vec![3.0, 0.1]).unwrap();
        assert_eq!(relu(&pos), pos);
    }

    #[test]
    fn maxpool_cases() {
        let x = Tensor::new(1, 4, vec![1.0, 3.0, 2.0, 5.0]).unwrap();
        assert_eq!(maxpool1d(&x, 2, 2).unwrap().data, vec![3.0, 5.0]);
        assert_eq!(maxpool1d(&x, 4, 1).unwrap().data, vec![5.0]);
        let c = Tensor::new(1, 4, vec![2.0; 4]).unwrap();
        assert_eq!(maxpool1d(&c, 2, 1).unwrap().data, vec![2.0; 3]);
        assert!(maxpool1d(&x, 5, 1).is_err());
    }

    #[test]
    fn softmax_cases() {
        let p = softmax(&[0.0, 0.0, 0.0]);
        assert!(p.iter().all(|v| (v - 1.0 / 3.0).abs() < 1e-15));
        let p = softmax(&[1000.0, 0.0]);
        assert!((p[0] - 1.0).abs() < 1e-12 && p[1] >= 0.0 && p[1] < 1e-300);
        assert!(p.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn identity_dense() {
        let d = Dense {
            in_features: 3,
            units: 3,
            weights: vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
            bias: vec![0.0; 3],
        };
        assert_eq!(dense_forward(&[4.0, -2.0, 0.5], &d).unwrap(), vec![4.0, -2.0, 0.5]);
        assert!(dense_forward(&[1.0], &d).is_err());
    }
}
