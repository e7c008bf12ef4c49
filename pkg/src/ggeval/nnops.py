"""Minimal dense numerical kernel: message-passing layers with analytic
gradients, pooling, reconstruction losses and an Adam optimizer.

Everything runs in double precision so gradients can be checked tightly
against central finite differences.
"""

from __future__ import annotations

import json

import numpy as np


class ParamStore:
    """Named parameter tensors with paired gradient and Adam moment buffers."""

    def __init__(self):
        self.params: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}
        self._m: dict[str, np.ndarray] = {}
        self._v: dict[str, np.ndarray] = {}
        self.step_count = 0

    def add(self, name: str, value: np.ndarray) -> np.ndarray:
        if name in self.params:
            raise ValueError(f"duplicate parameter name {name!r}")
        value = np.asarray(value, dtype=np.float64)
        self.params[name] = value
        self.grads[name] = np.zeros_like(value)
        self._m[name] = np.zeros_like(value)
        self._v[name] = np.zeros_like(value)
        return value

    def zero_grad(self) -> None:
        for g in self.grads.values():
            g[...] = 0.0

    def to_json(self) -> str:
        doc = {
            name: {"shape": list(p.shape), "data": p.ravel().tolist()}
            for name, p in sorted(self.params.items())
        }
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ParamStore":
        store = cls()
        for name, entry in json.loads(text).items():
            store.add(name, np.array(entry["data"]).reshape(entry["shape"]))
        return store


def adam_step(
    store: ParamStore,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> None:
    """Bias-corrected adaptive-moment update; gradients are zeroed afterward."""
    store.step_count += 1
    t = store.step_count
    for name, p in store.params.items():
        g = store.grads[name]
        m, v = store._m[name], store._v[name]
        m[...] = beta1 * m + (1.0 - beta1) * g
        v[...] = beta2 * v + (1.0 - beta2) * g * g
        m_hat = m / (1.0 - beta1**t)
        v_hat = v / (1.0 - beta2**t)
        p -= lr * m_hat / (np.sqrt(v_hat) + eps)
    store.zero_grad()


def neighbor_sum(edges, H: np.ndarray) -> np.ndarray:
    """Unnormalized sum over neighbors; isolated nodes aggregate zero."""
    agg = np.zeros_like(H)
    if len(edges):
        e = np.asarray(edges, dtype=np.int64)
        np.add.at(agg, e[:, 0], H[e[:, 1]])
        np.add.at(agg, e[:, 1], H[e[:, 0]])
    return agg


class MessagePassingLayer:
    """H' = act((A_sum H) W_neigh + H W_self + b), GIN-style sum aggregation."""

    def __init__(self, store: ParamStore, name: str, d_in: int, d_out: int,
                 activation: str = "relu", rng: np.random.Generator | None = None):
        if activation not in ("relu", "identity"):
            raise ValueError(f"unknown activation {activation!r}")
        self.name = name
        self.d_in = d_in
        self.d_out = d_out
        self.activation = activation
        self.store = store
        if rng is None:
            rng = np.random.default_rng(0)
        scale = 1.0 / np.sqrt(d_in)
        store.add(f"{name}.w_neigh", rng.uniform(-scale, scale, size=(d_in, d_out)))
        store.add(f"{name}.w_self", rng.uniform(-scale, scale, size=(d_in, d_out)))
        store.add(f"{name}.bias", np.zeros(d_out))

    def _p(self, suffix: str) -> np.ndarray:
        return self.store.params[f"{self.name}.{suffix}"]

    def _g(self, suffix: str) -> np.ndarray:
        return self.store.grads[f"{self.name}.{suffix}"]

    def forward(self, edges, H: np.ndarray):
        H = np.asarray(H, dtype=np.float64)
        if H.ndim != 2 or H.shape[1] != self.d_in:
            raise ValueError(
                f"{self.name}: expected N x {self.d_in} input, got {H.shape}"
            )
        agg = neighbor_sum(edges, H)
        z = agg @ self._p("w_neigh") + H @ self._p("w_self") + self._p("bias")
        out = np.maximum(z, 0.0) if self.activation == "relu" else z
        cache = (edges, H, agg, z)
        return out, cache

    def backward(self, cache, grad_out: np.ndarray) -> np.ndarray:
        """Accumulates parameter gradients; returns the gradient w.r.t. H."""
        edges, H, agg, z = cache
        if grad_out.shape != z.shape:
            raise ValueError(f"{self.name}: upstream gradient shape {grad_out.shape}")
        dz = np.where(z > 0.0, grad_out, 0.0) if self.activation == "relu" else grad_out
        self._g("w_neigh")[...] += agg.T @ dz
        self._g("w_self")[...] += H.T @ dz
        self._g("bias")[...] += dz.sum(axis=0)
        d_agg = dz @ self._p("w_neigh").T
        # Sum aggregation over a symmetric edge list is self-adjoint.
        return neighbor_sum(edges, d_agg) + dz @ self._p("w_self").T


def mean_pool(H: np.ndarray) -> np.ndarray:
    H = np.asarray(H, dtype=np.float64)
    if H.shape[0] == 0:
        raise ValueError("mean_pool of an empty matrix")
    return H.mean(axis=0)


def sce_loss(pred: np.ndarray, target: np.ndarray, gamma: float):
    """Scaled cosine error: mean over rows of (1 - cos(pred, target))^gamma.

    Rows where either vector has zero norm contribute loss 1 with zero
    gradient. Returns (loss, gradient w.r.t. pred).
    """
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ValueError("pred/target shape mismatch")
    m = pred.shape[0]
    grad = np.zeros_like(pred)
    total = 0.0
    for i in range(m):
        p, t = pred[i], target[i]
        np_, nt = np.linalg.norm(p), np.linalg.norm(t)
        if np_ == 0.0 or nt == 0.0:
            total += 1.0
            continue
        c = float(p @ t) / (np_ * nt)
        c = min(1.0, max(-1.0, c))
        total += (1.0 - c) ** gamma
        dc = t / (np_ * nt) - c * p / np_**2
        grad[i] = -gamma * (1.0 - c) ** (gamma - 1.0) * dc
    return total / m, grad / m


def bce_logit_loss(scores: np.ndarray, labels: np.ndarray):
    """Mean binary cross-entropy on logits, overflow-safe.

    Returns (loss, gradient w.r.t. scores).
    """
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if s.shape != y.shape:
        raise ValueError("scores/labels length mismatch")
    loss = float(np.mean(np.maximum(s, 0.0) - s * y + np.log1p(np.exp(-np.abs(s)))))
    sigmoid = np.where(s >= 0, 1.0 / (1.0 + np.exp(-s)), np.exp(s) / (1.0 + np.exp(s)))
    return loss, (sigmoid - y) / s.size
