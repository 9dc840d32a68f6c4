"""Graph Laplacians, the graph Fourier transform and polynomial spectral filters."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp

from .errors import ConsistencyError, NumericalError, ParameterError

COMBINATORIAL = "combinatorial"
NORMALIZED = "normalized"
MODES = (COMBINATORIAL, NORMALIZED)

EIG_MAX_NODES = 64


@dataclass(frozen=True)
class Laplacian:
    matrix: sp.csr_matrix
    mode: str
    lambda_max: Optional[float] = None

    @property
    def num_nodes(self):
        return self.matrix.shape[0]

    def with_lambda_max(self, value):
        return replace(self, lambda_max=float(value))


@dataclass(frozen=True)
class SpectralBasis:
    eigenvalues: np.ndarray  # ascending
    U: np.ndarray            # columns are eigenvectors


def inv_sqrt_degree(deg):
    """``d^-1/2`` with 0 for isolated nodes."""
    deg = np.asarray(deg, dtype=np.float64)
    out = np.zeros_like(deg)
    np.divide(1.0, np.sqrt(deg), out=out, where=deg > 0)
    return out


def laplacian(adjacency, degree, mode=NORMALIZED, literal=False):
    """``D - M`` or ``I - D^-1/2 M D^-1/2``.

    Isolated nodes get a zero row in both forms, so every filter leaves them
    scaled by ``h(0)``.  ``literal=True`` builds the normalized form through
    the intermediate ``W = M D^-1``, i.e. ``I - D^-1/2 M D^-3/2``, which is
    not symmetric on irregular graphs; it exists for comparison only.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    adj = sp.csr_matrix(adjacency, dtype=np.float64)
    n = adj.shape[0]
    if adj.shape != (n, n) or degree.shape != (n, n):
        raise ConsistencyError("adjacency and degree must be square and the same size")
    if abs(adj - adj.T).max() > 0:
        raise ConsistencyError("adjacency is not symmetric")
    d = sp.csr_matrix(degree).diagonal()
    if sp.csr_matrix(degree).count_nonzero() != np.count_nonzero(d):
        raise ConsistencyError("degree matrix has off-diagonal entries")
    if not np.allclose(d, np.asarray(adj.sum(axis=1)).ravel(), rtol=0, atol=1e-9):
        raise ConsistencyError("degree diagonal differs from adjacency row sums")

    if mode == COMBINATORIAL:
        mat = sp.diags(d) - adj
    else:
        s = inv_sqrt_degree(d)
        active = (d > 0).astype(np.float64)
        if literal:
            dinv = np.zeros_like(d)
            np.divide(1.0, d, out=dinv, where=d > 0)
            core = sp.diags(s) @ (adj @ sp.diags(dinv)) @ sp.diags(s)
        else:
            core = sp.diags(s) @ adj @ sp.diags(s)
        mat = sp.diags(active) - core
    return Laplacian(sp.csr_matrix(mat), mode)


def laplacian_of(graph, mode=NORMALIZED):
    from .graph import adjacency_and_degree
    return laplacian(*adjacency_and_degree(graph), mode=mode)


def eigendecompose(lap: Laplacian, max_nodes=EIG_MAX_NODES) -> SpectralBasis:
    """Dense symmetric eigendecomposition ``L = U diag(lam) U^T`` (small graphs only)."""
    if lap.num_nodes > max_nodes:
        raise ValueError(f"{lap.num_nodes} nodes exceeds the dense limit of {max_nodes}")
    dense = lap.matrix.toarray()
    try:
        lam, U = np.linalg.eigh((dense + dense.T) / 2)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition did not converge: {exc}") from exc
    return SpectralBasis(lam, U)


def _check_signal(basis_or_n, x):
    n = basis_or_n if isinstance(basis_or_n, int) else basis_or_n.U.shape[0]
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] != n:
        raise ValueError(f"signal has {x.shape[0]} entries, graph has {n} nodes")
    return x


def gft(basis: SpectralBasis, x):
    return basis.U.T @ _check_signal(basis, x)


def igft(basis: SpectralBasis, x_hat):
    return basis.U @ _check_signal(basis, x_hat)


def spectral_filter(basis: SpectralBasis, x, h: Callable):
    """``U diag(h(lam)) U^T x`` for a frequency response ``h``."""
    response = np.asarray(h(basis.eigenvalues), dtype=np.float64) * np.ones_like(basis.eigenvalues)
    x_hat = gft(basis, x)
    if x_hat.ndim == 1:
        return basis.U @ (response * x_hat)
    return basis.U @ (response[:, None] * x_hat)


def estimate_lambda_max(lap: Laplacian, fast=False, tol=1e-12, max_iter=20000, seed=0):
    """Largest Laplacian eigenvalue by power iteration.

    With ``fast=True`` a normalized Laplacian returns its spectral bound 2.
    """
    if fast and lap.mode == NORMALIZED:
        return 2.0
    n = lap.num_nodes
    if n == 0 or lap.matrix.count_nonzero() == 0:
        return 0.0
    v = np.random.default_rng(seed).standard_normal(n)
    v /= np.linalg.norm(v)
    rho = 0.0
    for _ in range(max_iter):
        w = lap.matrix @ v
        new_rho = float(v @ w)
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        v = w / norm
        if abs(new_rho - rho) <= tol * max(abs(new_rho), 1.0):
            return new_rho
        rho = new_rho
    raise NumericalError(f"power iteration did not converge in {max_iter} iterations")


def scaled_laplacian(lap: Laplacian, lambda_max=None):
    """``2 L / lambda_max - I``; an all-zero Laplacian maps to ``-I``."""
    lmax = lambda_max if lambda_max is not None else lap.lambda_max
    if lmax is None:
        lmax = estimate_lambda_max(lap)
    scale = 2.0 / lmax if lmax > 0 else 0.0
    n = lap.num_nodes
    return sp.csr_matrix(scale * lap.matrix - sp.identity(n, format="csr"))


def chebyshev_basis(l_hat, x, order):
    """``[T_0(L^) x, ..., T_{order-1}(L^) x]`` via the three-term recurrence."""
    terms = [x]
    if order > 1:
        terms.append(l_hat @ x)
    for _ in range(2, order):
        terms.append(2.0 * (l_hat @ terms[-1]) - terms[-2])
    return terms


def chebyshev_filter(lap: Laplacian, x, theta, lambda_max=None):
    """``sum_k theta_k T_k(L^) x`` without forming any dense matrix."""
    theta = np.asarray(theta, dtype=np.float64).ravel()
    if theta.size < 1:
        raise ParameterError("Chebyshev filter needs at least one coefficient")
    x = _check_signal(lap.num_nodes, x)
    l_hat = scaled_laplacian(lap, lambda_max)
    terms = chebyshev_basis(l_hat, x, theta.size)
    return sum(t * tk for t, tk in zip(theta, terms))


def chebyshev_response(theta, lambda_max):
    """Scalar frequency response matching :func:`chebyshev_filter`."""
    theta = np.asarray(theta, dtype=np.float64).ravel()
    scale = 2.0 / lambda_max if lambda_max > 0 else 0.0

    def h(lam):
        return np.polynomial.chebyshev.chebval(scale * np.asarray(lam) - 1.0, theta)
    return h
