"""Contrastive neural ratio estimation over perturbation classes.

The critic is ``f(x, c) = encoder(x) . W[c]`` with a ReLU MLP encoder. It is
trained as a binary classifier separating joint pairs ``(x, c) ~ p(x, c)``
from pairs whose labels were shuffled within the batch (a draw from
``p(x) p(c)``), so at the optimum ``f(x, c) = log p(x | c) / p(x)`` and
``f(x, a) - f(x, b) = log p(x | a) / p(x | b)``.

Everything is plain numpy with hand-written backprop and Adam.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import Condition, DataError, ExperimentDataset, NumericError, as_samples, make_rng

log = logging.getLogger(__name__)

FORMAT_VERSION = 1


@dataclass(frozen=True)
class NreTrainConfig:
    hidden_sizes: tuple[int, ...] = (128, 64)
    embed_dim: int = 32
    step_size: float = 0.005
    epochs: int = 500
    batch_size: int = 1024
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "hidden_sizes", tuple(int(h) for h in self.hidden_sizes))
        if any(h <= 0 for h in self.hidden_sizes) or self.embed_dim <= 0:
            raise ValueError("layer sizes must be positive")
        if self.step_size <= 0 or self.epochs <= 0 or self.batch_size <= 0:
            raise ValueError("step_size, epochs and batch_size must be positive")


@dataclass
class RatioModel:
    weights: list[np.ndarray]  # encoder layer matrices, shape (fan_in, fan_out)
    biases: list[np.ndarray]
    class_embeddings: np.ndarray  # (n_classes, embed_dim)
    class_index: dict[Condition, int]
    x_mean: np.ndarray
    x_scale: np.ndarray
    loss_history: list[float] = field(default_factory=list)
    train_accuracy: float = float("nan")

    def params(self) -> list[np.ndarray]:
        return [*self.weights, *self.biases, self.class_embeddings]

    def row(self, cond: Condition) -> int:
        try:
            return self.class_index[cond]
        except KeyError:
            raise DataError(f"condition {cond} is not registered in the ratio model") from None

    def encode(self, X) -> np.ndarray:
        h = (as_samples(X, "x") - self.x_mean) / self.x_scale
        for k, (W, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ W + b
            if k < len(self.weights) - 1:
                h = np.maximum(h, 0.0)
        return h

    def logits(self, X) -> np.ndarray:
        """f(x, c) for every row of X and every class, shape (n, n_classes)."""
        return self.encode(X) @ self.class_embeddings.T


def nre_log_ratio(model: RatioModel, x, c_num: Condition, c_den: Condition) -> np.ndarray | float:
    """log p(x | c_num) / p(x | c_den) as ``f(x, c_num) - f(x, c_den)``.

    Accepts a single vector (returns a float) or a sample matrix.
    """
    a, b = model.row(c_num), model.row(c_den)
    single = np.ndim(x) == 1
    X = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if a == b:
        out = np.zeros(X.shape[0])
    else:
        E = model.encode(X)
        out = E @ model.class_embeddings[a] - E @ model.class_embeddings[b]
    return float(out[0]) if single else out


# ---------------------------------------------------------------------------
# objective


def _softplus(z):
    return np.logaddexp(0.0, z)


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def nre_loss_and_grads(params: Sequence[np.ndarray], X: np.ndarray, c_pos: np.ndarray, c_neg: np.ndarray):
    """Balanced contrastive loss and its gradients w.r.t. ``params``.

    ``params`` is ``[W_1..W_L, b_1..b_L, class_embeddings]`` acting on
    already-standardised inputs. Returns ``(loss, grads)`` in the same order.
    """
    L = (len(params) - 1) // 2
    Ws, bs, C = params[:L], params[L : 2 * L], params[-1]
    acts = [X]
    h = X
    for k in range(L):
        h = h @ Ws[k] + bs[k]
        if k < L - 1:
            h = np.maximum(h, 0.0)
        acts.append(h)
    E = acts[-1]
    B = X.shape[0]
    f_pos = np.einsum("bd,bd->b", E, C[c_pos])
    f_neg = np.einsum("bd,bd->b", E, C[c_neg])
    loss = (_softplus(-f_pos).sum() + _softplus(f_neg).sum()) / (2 * B)

    g_pos = -_sigmoid(-f_pos) / (2 * B)
    g_neg = _sigmoid(f_neg) / (2 * B)
    G = np.zeros((B, C.shape[0]))
    rows = np.arange(B)
    np.add.at(G, (rows, c_pos), g_pos)
    np.add.at(G, (rows, c_neg), g_neg)
    dC = G.T @ E
    dh = G @ C
    dWs = [None] * L
    dbs = [None] * L
    for k in range(L - 1, -1, -1):
        if k < L - 1:
            dh = dh * (acts[k + 1] > 0)
        dWs[k] = acts[k].T @ dh
        dbs[k] = dh.sum(0)
        if k > 0:
            dh = dh @ Ws[k].T
    return float(loss), [*dWs, *dbs, dC]


class _Adam:
    def __init__(self, params, lr, b1=0.9, b2=0.999, eps=1e-8):
        self.lr, self.b1, self.b2, self.eps = lr, b1, b2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        c1 = 1 - self.b1**self.t
        c2 = 1 - self.b2**self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.b1
            m += (1 - self.b1) * g
            v *= self.b2
            v += (1 - self.b2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def init_model(classes: Sequence[Condition], dim: int, config: NreTrainConfig, rng, x_mean=None, x_scale=None) -> RatioModel:
    """Fan-in (Kaiming) initialisation for the ReLU encoder."""
    rng = make_rng(rng)
    sizes = [dim, *config.hidden_sizes, config.embed_dim]
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        weights.append(rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    emb = rng.normal(0.0, np.sqrt(1.0 / config.embed_dim), size=(len(classes), config.embed_dim))
    return RatioModel(
        weights,
        biases,
        emb,
        {c: k for k, c in enumerate(classes)},
        np.zeros(dim) if x_mean is None else x_mean,
        np.ones(dim) if x_scale is None else x_scale,
    )


def _stack(dataset: ExperimentDataset, classes: Sequence[Condition]):
    X = np.vstack([dataset[c] for c in classes])
    y = np.concatenate([np.full(dataset[c].shape[0], k) for k, c in enumerate(classes)])
    return X, y


def nre_train(dataset: ExperimentDataset, config: NreTrainConfig, rng=None) -> RatioModel:
    """Train the contrastive critic on every condition of ``dataset``.

    Each epoch visits all samples once in a shuffled order; negatives pair
    each batch's inputs with a within-batch permutation of its labels.
    """
    rng = make_rng(config.seed if rng is None else rng)
    classes = sorted(dataset.conditions)
    X, y = _stack(dataset, classes)
    mean = X.mean(0)
    scale = X.std(0)
    scale[scale == 0] = 1.0
    Xs = (X - mean) / scale
    model = init_model(classes, X.shape[1], config, rng, mean, scale)
    params = model.params()
    opt = _Adam(params, config.step_size)
    N = X.shape[0]
    bs = min(config.batch_size, N)
    for epoch in range(config.epochs):
        order = rng.permutation(N)
        total = 0.0
        for s in range(0, N, bs):
            idx = order[s : s + bs]
            c_pos = y[idx]
            c_neg = c_pos[rng.permutation(len(idx))]
            loss, grads = nre_loss_and_grads(params, Xs[idx], c_pos, c_neg)
            if not np.isfinite(loss):
                raise NumericError(f"non-finite NRE loss at epoch {epoch}")
            opt.step(params, grads)
            total += loss * len(idx)
        model.loss_history.append(total / N)
        log.debug("nre epoch %d loss %.6f", epoch, total / N)
    if not all(np.isfinite(p).all() for p in params):
        raise NumericError("non-finite NRE weights after training")
    model.train_accuracy = classification_accuracy(model, X, y)
    log.info("nre trained: final loss %.5f, train accuracy %.4f", model.loss_history[-1], model.train_accuracy)
    return model


def classification_accuracy(model: RatioModel, X, y) -> float:
    """Fraction of rows whose highest-scoring class is the true one."""
    correct = 0
    for s in range(0, len(X), 65536):
        correct += int((model.logits(X[s : s + 65536]).argmax(1) == y[s : s + 65536]).sum())
    return correct / len(X)


# ---------------------------------------------------------------------------
# persistence


def save_model(model: RatioModel, path) -> None:
    """Write an ``.npz`` weight file (format version stored alongside)."""
    classes = sorted(model.class_index, key=model.class_index.get)
    arrays = {f"W{k}": W for k, W in enumerate(model.weights)}
    arrays.update({f"b{k}": b for k, b in enumerate(model.biases)})
    with open(path, "wb") as fh:
        np.savez(
            fh,
            format_version=np.array(FORMAT_VERSION),
            n_layers=np.array(len(model.weights)),
            class_embeddings=model.class_embeddings,
            class_records=np.array([[c.rank, c.i, c.j] for c in classes], dtype=np.int64),
            x_mean=model.x_mean,
            x_scale=model.x_scale,
            loss_history=np.array(model.loss_history, dtype=np.float64),
            train_accuracy=np.array(model.train_accuracy),
            **arrays,
        )


def load_model(path) -> RatioModel:
    with np.load(Path(path)) as z:
        if int(z["format_version"]) != FORMAT_VERSION:
            raise DataError(f"{path}: unsupported ratio model format {int(z['format_version'])}")
        L = int(z["n_layers"])
        classes = [Condition(int(r), int(i), int(j)) for r, i, j in z["class_records"]]
        return RatioModel(
            [z[f"W{k}"] for k in range(L)],
            [z[f"b{k}"] for k in range(L)],
            z["class_embeddings"],
            {c: k for k, c in enumerate(classes)},
            z["x_mean"],
            z["x_scale"],
            list(z["loss_history"]),
            float(z["train_accuracy"]),
        )


