"""Layers with explicit forward/backward passes.

Each layer keeps what its backward pass needs from the most recent forward
call and accumulates parameter gradients into ``self.grads``.
"""

from __future__ import annotations

import numpy as np

from ..spectral import chebyshev_basis

ACTIVATIONS = ("relu", "identity")


def glorot(rng, fan_in, fan_out, shape, dtype):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape).astype(dtype)


def _act(z, kind):
    return np.maximum(z, 0) if kind == "relu" else z


def _act_grad(dout, z, kind):
    return dout * (z > 0) if kind == "relu" else dout


class Layer:
    kind = ""

    def __init__(self, activation):
        if activation not in ACTIVATIONS:
            raise ValueError(f"activation must be one of {ACTIVATIONS}")
        self.activation = activation
        self.params = {}
        self.grads = {}
        self._cache = None

    def zero_grad(self):
        for k, v in self.params.items():
            self.grads[k] = np.zeros_like(v)

    def _check_in(self, x, f_in):
        if x.ndim != 2 or x.shape[1] != f_in:
            raise ValueError(f"{self.kind} layer expects {f_in} input features, got shape {x.shape}")


class ChebConv(Layer):
    """``relu(sum_k T_k(L^) X Theta_k + b)`` on the batch's scaled Laplacian."""
    kind = "cheb"

    def __init__(self, f_in, f_out, order, rng, activation="relu", dtype=np.float64):
        super().__init__(activation)
        if order < 1:
            raise ValueError("Chebyshev order K must be >= 1")
        self.f_in, self.f_out, self.order = f_in, f_out, order
        self.params = {
            "theta": glorot(rng, f_in * order, f_out, (order, f_in, f_out), dtype),
            "bias": np.zeros(f_out, dtype=dtype),
        }
        self.zero_grad()

    def forward(self, x, batch):
        self._check_in(x, self.f_in)
        l_hat = batch.scaled_laplacian
        terms = chebyshev_basis(l_hat, x, self.order)
        theta = self.params["theta"]
        z = sum(t @ theta[k] for k, t in enumerate(terms)) + self.params["bias"]
        self._cache = (terms, z, l_hat)
        return _act(z, self.activation)

    def backward(self, dout, need_input_grad=True):
        terms, z, l_hat = self._cache
        dz = _act_grad(dout, z, self.activation)
        theta = self.params["theta"]
        for k, t in enumerate(terms):
            self.grads["theta"][k] += t.T @ dz
        self.grads["bias"] += dz.sum(axis=0)
        if not need_input_grad:
            return None
        # sum_k T_k(L^) (dz Theta_k^T), evaluated with Clenshaw's recurrence
        # (T_k(L^) is symmetric because L^ is).
        coeffs = [dz @ theta[k].T for k in range(self.order)]
        b1 = np.zeros_like(coeffs[0])
        b2 = np.zeros_like(coeffs[0])
        for k in range(self.order - 1, 0, -1):
            b1, b2 = coeffs[k] + 2.0 * (l_hat @ b1) - b2, b1
        return coeffs[0] + l_hat @ b1 - b2


class SpatialConv(Layer):
    """``act(X W1 + (mean over neighbours of X) W2 + b)``."""
    kind = "spatial"

    def __init__(self, f_in, f_out, rng, activation="relu", dtype=np.float64):
        super().__init__(activation)
        self.f_in, self.f_out = f_in, f_out
        self.params = {
            "w1": glorot(rng, f_in, f_out, (f_in, f_out), dtype),
            "w2": glorot(rng, f_in, f_out, (f_in, f_out), dtype),
            "bias": np.zeros(f_out, dtype=dtype),
        }
        self.zero_grad()

    def forward(self, x, batch):
        self._check_in(x, self.f_in)
        agg = batch.mean_adjacency @ x
        z = x @ self.params["w1"] + agg @ self.params["w2"] + self.params["bias"]
        self._cache = (x, agg, z, batch)
        return _act(z, self.activation)

    def backward(self, dout, need_input_grad=True):
        x, agg, z, batch = self._cache
        dz = _act_grad(dout, z, self.activation)
        self.grads["w1"] += x.T @ dz
        self.grads["w2"] += agg.T @ dz
        self.grads["bias"] += dz.sum(axis=0)
        if not need_input_grad:
            return None
        return dz @ self.params["w1"].T + batch.mean_adjacency_T @ (dz @ self.params["w2"].T)


class Dense(Layer):
    kind = "dense"

    def __init__(self, f_in, f_out, rng, activation="relu", dtype=np.float64):
        super().__init__(activation)
        self.f_in, self.f_out = f_in, f_out
        self.params = {
            "w": glorot(rng, f_in, f_out, (f_in, f_out), dtype),
            "bias": np.zeros(f_out, dtype=dtype),
        }
        self.zero_grad()

    def forward(self, x, batch=None):
        self._check_in(x, self.f_in)
        z = x @ self.params["w"] + self.params["bias"]
        self._cache = (x, z)
        return _act(z, self.activation)

    def backward(self, dout, need_input_grad=True):
        x, z = self._cache
        dz = _act_grad(dout, z, self.activation)
        self.grads["w"] += x.T @ dz
        self.grads["bias"] += dz.sum(axis=0)
        if not need_input_grad:
            return None
        return dz @ self.params["w"].T
