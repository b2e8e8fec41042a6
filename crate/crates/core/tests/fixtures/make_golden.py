"""Writes golden_bundle.json and golden_case.json.

The expected probabilities come from a plain numpy forward pass that shares
no code with the crate. Re-run only when the bundle format changes:

    python3 crates/core/tests/fixtures/make_golden.py
"""
import json
import pathlib

import numpy as np

HERE = pathlib.Path(__file__).parent
rng = np.random.default_rng(20240101)

C, L = 3, 16
K, F = 5, 4
LSTM_UNITS, GRU_UNITS, CLASSES = 3, 2, 4


def sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def rand(*shape, scale=0.5):
    return rng.uniform(-scale, scale, size=shape)


conv_w, conv_b = rand(F, C, K), rand(F)
# per gate: U [units, in] then W [units, units]; gates o, i, f, candidate
lstm_u, lstm_w, lstm_b = rand(4, LSTM_UNITS, F), rand(4, LSTM_UNITS, LSTM_UNITS), rand(4, LSTM_UNITS)
# gates z, r, candidate
gru_u, gru_w, gru_b = rand(3, GRU_UNITS, LSTM_UNITS), rand(3, GRU_UNITS, GRU_UNITS), rand(3, GRU_UNITS)
dense_w, dense_b = rand(CLASSES, GRU_UNITS, scale=2.0), rand(CLASSES)
mean, std = np.array([0.1, 9.5, -0.2]), np.array([1.5, 2.0, 0.0])

x = np.stack([rng.normal(0, 1, L), rng.normal(9.8, 2, L), rng.normal(0, 1, L)])


def forward(x):
    s = np.where(std > 0, std, 1.0)
    x = (x - mean[:, None]) / s[:, None]
    out_len = L - K + 1
    y = np.array([[conv_b[f] + np.sum(conv_w[f] * x[:, t:t + K]) for t in range(out_len)] for f in range(F)])
    y = np.maximum(y, 0.0)
    y = np.array([[y[c, 2 * t:2 * t + 2].max() for t in range(out_len // 2)] for c in range(F)])
    h, cell, seq = np.zeros(LSTM_UNITS), np.zeros(LSTM_UNITS), []
    for t in range(y.shape[1]):
        pre = [lstm_u[g] @ y[:, t] + lstm_w[g] @ h + lstm_b[g] for g in range(4)]
        o, i, f = sigmoid(pre[0]), sigmoid(pre[1]), sigmoid(pre[2])
        cell = f * cell + i * np.tanh(pre[3])
        h = o * np.tanh(cell)
        seq.append(h)
    seq = np.array(seq).T
    g = np.zeros(GRU_UNITS)
    for t in range(seq.shape[1]):
        xt = seq[:, t]
        z = sigmoid(gru_u[0] @ xt + gru_w[0] @ g + gru_b[0])
        r = sigmoid(gru_u[1] @ xt + gru_w[1] @ g + gru_b[1])
        cand = np.tanh(gru_u[2] @ xt + gru_w[2] @ (r * g) + gru_b[2])
        g = (1 - z) * g + z * cand
    logits = dense_w @ g + dense_b
    e = np.exp(logits - logits.max())
    return e / e.sum()


def flat_gates(u, w):
    return np.concatenate([np.concatenate([u[k].ravel(), w[k].ravel()]) for k in range(len(u))]).tolist()


bundle = {
    "input_len": L,
    "input_channels": C,
    "class_names": ["walk", "jog", "sit", "stand"],
    "feature_norm": {"mean": mean.tolist(), "std": std.tolist()},
    "layers": [
        {"kind": "conv1d", "params": {"in_channels": C, "filters": F, "kernel_size": K, "stride": 1},
         "weights": conv_w.ravel().tolist(), "bias": conv_b.tolist()},
        {"kind": "relu"},
        {"kind": "maxpool1d", "params": {"pool_size": 2, "stride": 2}},
        {"kind": "dropout", "params": {"rate": 0.07}},
        {"kind": "lstm", "params": {"input_dim": F, "units": LSTM_UNITS, "return_sequences": True,
                                    "cell_activation": "tanh"},
         "weights": flat_gates(lstm_u, lstm_w), "bias": lstm_b.ravel().tolist()},
        {"kind": "gru", "params": {"input_dim": LSTM_UNITS, "units": GRU_UNITS},
         "weights": flat_gates(gru_u, gru_w), "bias": gru_b.ravel().tolist()},
        {"kind": "dense", "params": {"in_features": GRU_UNITS, "units": CLASSES},
         "weights": dense_w.ravel().tolist(), "bias": dense_b.tolist()},
        {"kind": "softmax"},
    ],
}
case = {"acc": x.T.tolist(), "probs": forward(x).tolist()}
(HERE / "golden_bundle.json").write_text(json.dumps(bundle, indent=1) + "\n")
(HERE / "golden_case.json").write_text(json.dumps(case, indent=1) + "\n")
