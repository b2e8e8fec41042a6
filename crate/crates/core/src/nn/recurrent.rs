use serde::{Deserialize, Serialize};

use super::Tensor;
use crate::error::{Error, Result};

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Squashing function applied to the LSTM candidate state and to the cell
/// state before the output gate. `Sigmoid` matches the printed cell
/// equations; `Tanh` is the conventional LSTM.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellActivation {
    #[default]
    Sigmoid,
    Tanh,
}

impl CellActivation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            CellActivation::Sigmoid => sigmoid(x),
            CellActivation::Tanh => x.tanh(),
        }
    }
}

/// `U·x + W·h + b` for one gate. `u` is `[units][input_dim]`, `w` is `[units][units]`.
fn affine(u: &[f64], w: &[f64], b: &[f64], x: &[f64], h: &[f64]) -> Vec<f64> {
    let (n_in, units) = (x.len(), h.len());
    (0..units)
        .map(|j| {
            let ux: f64 = u[j * n_in..(j + 1) * n_in].iter().zip(x).map(|(a, b)| a * b).sum();
            let wh: f64 = w[j * units..(j + 1) * units].iter().zip(h).map(|(a, b)| a * b).sum();
            ux + wh + b[j]
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateWeights {
    pub u: Vec<f64>,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

impl GateWeights {
    fn zeros(units: usize, input_dim: usize) -> Self {
        GateWeights {
            u: vec![0.0; units * input_dim],
            w: vec![0.0; units * units],
            b: vec![0.0; units],
        }
    }

    fn check(&self, units: usize, input_dim: usize, name: &str) -> Result<()> {
        if self.u.len() != units * input_dim || self.w.len() != units * units || self.b.len() != units {
            return Err(Error::shape(
                format!("{name} gate U {units}x{input_dim}, W {units}x{units}, b {units}"),
                format!("U {}, W {}, b {} values", self.u.len(), self.w.len(), self.b.len()),
            ));
        }
        Ok(())
    }

    /// Splits flat `weights` (per gate: U then W) and `bias` (per gate) into gates.
    fn split(weights: &[f64], bias: &[f64], units: usize, input_dim: usize, gates: usize) -> Vec<Self> {
        let per_gate = units * input_dim + units * units;
        (0..gates)
            .map(|g| {
                let block = &weights[g * per_gate..(g + 1) * per_gate];
                GateWeights {
                    u: block[..units * input_dim].to_vec(),
                    w: block[units * input_dim..].to_vec(),
                    b: bias[g * units..(g + 1) * units].to_vec(),
                }
            })
            .collect()
    }

    fn flatten(gates: &[&GateWeights]) -> (Vec<f64>, Vec<f64>) {
        let weights = gates.iter().flat_map(|g| g.u.iter().chain(&g.w).copied()).collect();
        let bias = gates.iter().flat_map(|g| g.b.iter().copied()).collect();
        (weights, bias)
    }
}

/// LSTM parameters, gates in the order output, input, forget, candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmWeights {
    pub units: usize,
    pub input_dim: usize,
    pub output: GateWeights,
    pub input: GateWeights,
    pub forget: GateWeights,
    pub candidate: GateWeights,
    pub activation: CellActivation,
}

impl LstmWeights {
    pub fn zeros(units: usize, input_dim: usize) -> Self {
        let z = GateWeights::zeros(units, input_dim);
        LstmWeights {
            units,
            input_dim,
            output: z.clone(),
            input: z.clone(),
            forget: z.clone(),
            candidate: z,
            activation: CellActivation::Sigmoid,
        }
    }

    pub fn flat_len(units: usize, input_dim: usize) -> (usize, usize) {
        (4 * (units * input_dim + units * units), 4 * units)
    }

    pub fn from_flat(
        units: usize,
        input_dim: usize,
        weights: &[f64],
        bias: &[f64],
        activation: CellActivation,
    ) -> Result<Self> {
        let (nw, nb) = Self::flat_len(units, input_dim);
        if weights.len() != nw || bias.len() != nb {
            return Err(Error::shape(
                format!("{nw} weights and {nb} biases"),
                format!("{} weights and {} biases", weights.len(), bias.len()),
            ));
        }
        let mut g = GateWeights::split(weights, bias, units, input_dim, 4).into_iter();
        let mut next = || g.next().expect("four gates");
        Ok(LstmWeights {
            units,
            input_dim,
            output: next(),
            input: next(),
            forget: next(),
            candidate: next(),
            activation,
        })
    }

    pub fn to_flat(&self) -> (Vec<f64>, Vec<f64>) {
        GateWeights::flatten(&[&self.output, &self.input, &self.forget, &self.candidate])
    }

    fn check(&self) -> Result<()> {
        self.output.check(self.units, self.input_dim, "output")?;
        self.input.check(self.units, self.input_dim, "input")?;
        self.forget.check(self.units, self.input_dim, "forget")?;
        self.candidate.check(self.units, self.input_dim, "candidate")
    }
}

/// Result of one LSTM step, including the gate activations.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmStep {
    pub h: Vec<f64>,
    pub s: Vec<f64>,
    pub output_gate: Vec<f64>,
    pub input_gate: Vec<f64>,
    pub forget_gate: Vec<f64>,
    pub candidate: Vec<f64>,
}

fn check_dims(x: &[f64], h: &[f64], units: usize, input_dim: usize) -> Result<()> {
    if x.len() != input_dim || h.len() != units {
        return Err(Error::shape(
            format!("x[{input_dim}], h[{units}]"),
            format!("x[{}], h[{}]", x.len(), h.len()),
        ));
    }
    Ok(())
}

/// o, i, f = σ(W·h + U·x + b); s̃ = g(W·h + U·x + b);
/// s = f⊙s_prev + i⊙s̃; h = o⊙g(s).
pub fn lstm_cell_step(x: &[f64], h_prev: &[f64], s_prev: &[f64], p: &LstmWeights) -> Result<LstmStep> {
    check_dims(x, h_prev, p.units, p.input_dim)?;
    if s_prev.len() != p.units {
        return Err(Error::shape(format!("s[{}]", p.units), format!("s[{}]", s_prev.len())));
    }
    p.check()?;
    let g = p.activation;
    let gate = |gw: &GateWeights, f: &dyn Fn(f64) -> f64| -> Vec<f64> {
        affine(&gw.u, &gw.w, &gw.b, x, h_prev).into_iter().map(f).collect()
    };
    let output_gate = gate(&p.output, &sigmoid);
    let input_gate = gate(&p.input, &sigmoid);
    let forget_gate = gate(&p.forget, &sigmoid);
    let candidate = gate(&p.candidate, &|v| g.apply(v));
    let s: Vec<f64> = (0..p.units)
        .map(|j| forget_gate[j] * s_prev[j] + input_gate[j] * candidate[j])
        .collect();
    let h = (0..p.units).map(|j| output_gate[j] * g.apply(s[j])).collect();
    Ok(LstmStep {
        h,
        s,
        output_gate,
        input_gate,
        forget_gate,
        candidate,
    })
}

/// Runs the cell over every step (column) of `input` from zero state.
pub fn lstm_forward(input: &Tensor, p: &LstmWeights, return_sequences: bool) -> Result<Tensor> {
    let mut h = vec![0.0; p.units];
    let mut s = vec![0.0; p.units];
    let mut seq = Vec::with_capacity(input.len);
    for t in 0..input.len {
        let step = lstm_cell_step(&input.column(t), &h, &s, p)?;
        h = step.h;
        s = step.s;
        if return_sequences {
            seq.push(h.clone());
        }
    }
    Ok(collect_states(h, seq, p.units, return_sequences))
}

fn collect_states(last: Vec<f64>, seq: Vec<Vec<f64>>, units: usize, return_sequences: bool) -> Tensor {
    if !return_sequences {
        return Tensor::vector(last);
    }
    let len = seq.len();
    let mut data = vec![0.0; units * len];
    for (t, h) in seq.iter().enumerate() {
        for (j, v) in h.iter().enumerate() {
            data[j * len + t] = *v;
        }
    }
    Tensor {
        channels: units,
        len,
        data,
    }
}

/// GRU parameters, gates in the order update (z), reset (r), candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct GruWeights {
    pub units: usize,
    pub input_dim: usize,
    pub update: GateWeights,
    pub reset: GateWeights,
    pub candidate: GateWeights,
}

impl GruWeights {
    pub fn zeros(units: usize, input_dim: usize) -> Self {
        let z = GateWeights::zeros(units, input_dim);
        GruWeights {
            units,
            input_dim,
            update: z.clone(),
            reset: z.clone(),
            candidate: z,
        }
    }

    pub fn flat_len(units: usize, input_dim: usize) -> (usize, usize) {
        (3 * (units * input_dim + units * units), 3 * units)
    }

    pub fn from_flat(units: usize, input_dim: usize, weights: &[f64], bias: &[f64]) -> Result<Self> {
        let (nw, nb) = Self::flat_len(units, input_dim);
        if weights.len() != nw || bias.len() != nb {
            return Err(Error::shape(
                format!("{nw} weights and {nb} biases"),
                format!("{} weights and {} biases", weights.len(), bias.len()),
            ));
        }
        let mut g = GateWeights::split(weights, bias, units, input_dim, 3).into_iter();
        let mut next = || g.next().expect("three gates");
        Ok(GruWeights {
            units,
            input_dim,
            update: next(),
            reset: next(),
            candidate: next(),
        })
    }

    pub fn to_flat(&self) -> (Vec<f64>, Vec<f64>) {
        GateWeights::flatten(&[&self.update, &self.reset, &self.candidate])
    }

    fn check(&self) -> Result<()> {
        self.update.check(self.units, self.input_dim, "update")?;
        self.reset.check(self.units, self.input_dim, "reset")?;
        self.candidate.check(self.units, self.input_dim, "candidate")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GruStep {
    pub h: Vec<f64>,
    pub update_gate: Vec<f64>,
    pub reset_gate: Vec<f64>,
    pub candidate: Vec<f64>,
}

/// z = σ(W_z h + U_z x + b_z); r = σ(W_r h + U_r x + b_r);
/// h̃ = tanh(W (r⊙h) + U x + b); h' = (1 − z)⊙h + z⊙h̃.
pub fn gru_cell_step(x: &[f64], h_prev: &[f64], p: &GruWeights) -> Result<GruStep> {
    check_dims(x, h_prev, p.units, p.input_dim)?;
    p.check()?;
    let update_gate: Vec<f64> = affine(&p.update.u, &p.update.w, &p.update.b, x, h_prev)
        .into_iter()
        .map(sigmoid)
        .collect();
    let reset_gate: Vec<f64> = affine(&p.reset.u, &p.reset.w, &p.reset.b, x, h_prev)
        .into_iter()
        .map(sigmoid)
        .collect();
    let gated: Vec<f64> = reset_gate.iter().zip(h_prev).map(|(r, h)| r * h).collect();
    let candidate: Vec<f64> = affine(&p.candidate.u, &p.candidate.w, &p.candidate.b, x, &gated)
        .into_iter()
        .map(f64::tanh)
        .collect();
    let h = (0..p.units)
        .map(|j| (1.0 - update_gate[j]) * h_prev[j] + update_gate[j] * candidate[j])
        .collect();
    Ok(GruStep {
        h,
        update_gate,
        reset_gate,
        candidate,
    })
}

pub fn gru_forward(input: &Tensor, p: &GruWeights, return_sequences: bool) -> Result<Tensor> {
    let mut h = vec![0.0; p.units];
    let mut seq = Vec::with_capacity(input.len);
    for t in 0..input.len {
        h = gru_cell_step(&input.column(t), &h, p)?.h;
        if return_sequences {
            seq.push(h.clone());
        }
    }
    Ok(collect_states(h, seq, p.units, return_sequences))
}
