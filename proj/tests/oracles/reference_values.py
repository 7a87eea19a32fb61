"""Independent reference values for the frozen oracle tests.

Written against numpy and scikit-learn only; nothing here imports the C++
code. Parameters come from the closed-form fill used by tests/test_support.hpp:
value[k] = scale * sin(1.3 * k + phase) over the row-major flat index k.

Run: python3 tests/oracles/reference_values.py
"""

import numpy as np
from sklearn.metrics import roc_auc_score


def fill(rows, cols, phase, scale=0.5):
    k = np.arange(rows * cols, dtype=np.float64)
    return (scale * np.sin(1.3 * k + phase)).reshape(rows, cols)


def layer_norm(x, gamma, beta, eps=1e-5):
    mu = x.mean(axis=1, keepdims=True)
    var = ((x - mu) ** 2).mean(axis=1, keepdims=True)
    return gamma * (x - mu) / np.sqrt(var + eps) + beta


def transformer_params(d, dff, base):
    return dict(
        wq=fill(d, d, base + 0.1), wk=fill(d, d, base + 0.2), wv=fill(d, d, base + 0.3),
        wo=fill(d, d, base + 0.4), w1=fill(d, dff, base + 0.5), b1=fill(1, dff, base + 0.6, 0.1),
        w2=fill(dff, d, base + 0.7), b2=fill(1, d, base + 0.8, 0.1),
        g1=1.0 + fill(1, d, base + 0.9, 0.1), be1=fill(1, d, base + 1.0, 0.1),
        g2=1.0 + fill(1, d, base + 1.1, 0.1), be2=fill(1, d, base + 1.2, 0.1))


def transformer(x, p, heads):
    d = x.shape[1]
    dk = d // heads
    q, k, v = x @ p["wq"], x @ p["wk"], x @ p["wv"]
    ctx = np.zeros_like(x)
    for h in range(heads):
        s = slice(h * dk, (h + 1) * dk)
        scores = q[:, s] @ k[:, s].T / np.sqrt(dk)
        a = np.exp(scores - scores.max(axis=1, keepdims=True))
        a /= a.sum(axis=1, keepdims=True)
        ctx[:, s] = a @ v[:, s]
    n1 = layer_norm(x + ctx @ p["wo"], p["g1"], p["be1"])
    ff = np.maximum(n1 @ p["w1"] + p["b1"], 0.0) @ p["w2"] + p["b2"]
    return layer_norm(n1 + ff, p["g2"], p["be2"])


def sig(z):
    return 1.0 / (1.0 + np.exp(-z))


def lstm_dir(x, w, u, b, reverse):
    L = x.shape[0]
    H = u.shape[1]
    h = np.zeros(H)
    c = np.zeros(H)
    out = np.zeros((L, H))
    order = range(L - 1, -1, -1) if reverse else range(L)
    for t in order:
        z = w @ x[t] + u @ h + b[0]
        i, f, g, o = sig(z[:H]), sig(z[H:2 * H]), np.tanh(z[2 * H:3 * H]), sig(z[3 * H:])
        c = f * c + i * g
        h = o * np.tanh(c)
        out[t] = h
    return out


def bilstm_params(inp, H, layers, base):
    ps = []
    for k in range(layers):
        ps.append([(fill(4 * H, inp, base + 10 * k + 2 * d + 0.1),
                    fill(4 * H, H, base + 10 * k + 2 * d + 0.2),
                    fill(1, 4 * H, base + 10 * k + 2 * d + 0.3, 0.1)) for d in range(2)])
        inp = 2 * H
    return ps


def bilstm_pool(x, ps):
    inp = x
    for fwd, bwd in ps:
        hf = lstm_dir(inp, *fwd, reverse=False)
        hb = lstm_dir(inp, *bwd, reverse=True)
        inp = np.hstack([hf, hb])
    return np.concatenate([hf[-1], hb[0]])


def show(name, arr):
    flat = np.asarray(arr, dtype=np.float64).ravel()
    print(f"{name} = {{" + ", ".join(repr(float(v)) for v in flat) + "}")


def main():
    np.set_printoptions(precision=17)
    x = fill(3, 4, 0.0, 1.0)
    p = transformer_params(4, 8, 0.0)
    show("transformer_1head", transformer(x, p, 1))
    show("transformer_2head", transformer(x, p, 2))

    xs = fill(4, 3, 0.5, 1.0)
    ps = bilstm_params(3, 2, 2, 0.0)
    show("bilstm_pool", bilstm_pool(xs, ps))

    # Discriminant: residual transformer, BiLSTM pooling, sigmoid head.
    xd = fill(3, 4, 0.25, 1.0)
    pd = transformer_params(4, 16, 3.0)
    hd = transformer(xd, pd, 1) + xd
    psd = bilstm_params(4, 3, 2, 5.0)
    pooled = bilstm_pool(hd, psd)
    w = fill(1, 6, 7.0)
    b = 0.05
    show("discriminant_prob", [sig(w[0] @ pooled + b)])

    # AUC with ties, checked against scikit-learn.
    rng = np.random.default_rng(12345)
    y = rng.integers(0, 2, 40)
    s = np.round(rng.random(40), 1)
    show("auc_labels", y)
    show("auc_scores", s)
    show("auc_value", [roc_auc_score(y, s)])

    # Adam: three steps on f(x) = sum(x^2) from x0.
    x = np.array([1.0, -2.0, 0.5])
    m = np.zeros(3)
    v = np.zeros(3)
    lr, b1, b2, eps = 0.1, 0.9, 0.999, 1e-8
    for t in range(1, 4):
        g = 2 * x
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        x = x - lr * (m / (1 - b1 ** t)) / (np.sqrt(v / (1 - b2 ** t)) + eps)
    show("adam_three_steps", x)

    pe = np.zeros((5, 6))
    for pos in range(5):
        for i in range(6):
            angle = pos / 10000 ** (2 * (i // 2) / 6)
            pe[pos, i] = np.sin(angle) if i % 2 == 0 else np.cos(angle)
    show("positions_5x6", pe)


if __name__ == "__main__":
    main()
