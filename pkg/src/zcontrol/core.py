"""Model configuration, interaction kernels and weight-balanced matrices."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np
from scipy.special import expit


class ConfigurationError(ValueError):
    """Raised when a model, kernel or simulation configuration is invalid."""


@dataclass(frozen=True)
class SmoothedHK:
    """Smoothed Hegselmann-Krause kernel.

    ``skew_strength`` scales the skew-cycle perturbation that turns the
    symmetric kernel into a directed, weight-balanced one. Set it to 0 to keep
    the matrix symmetric.
    """

    alpha: float
    skew_strength: float = 0.8

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise ConfigurationError(f"alpha must be positive, got {self.alpha}")
        _check_skew(self.skew_strength)


@dataclass(frozen=True)
class CuckerSmale:
    """Cucker-Smale communication weight ``K / (N (1 + |xi - xj|^2)^beta)``."""

    K: float = 1.0
    beta: float = 1.0
    skew_strength: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.K) and self.K > 0):
            raise ConfigurationError(f"K must be positive, got {self.K}")
        if not (math.isfinite(self.beta) and self.beta >= 0):
            raise ConfigurationError(f"beta must be >= 0, got {self.beta}")
        _check_skew(self.skew_strength)


Kernel = Union[SmoothedHK, CuckerSmale]


def _check_skew(b):
    if not (math.isfinite(b) and 0 <= b < 1):
        raise ConfigurationError(f"skew_strength must lie in [0, 1), got {b}")


@dataclass(frozen=True)
class ModelConfig:
    order: int
    agents: int
    dim: int

    def __post_init__(self):
        if self.order < 1:
            raise ConfigurationError(f"order must be >= 1, got {self.order}")
        if self.agents < 1:
            raise ConfigurationError(f"agents must be >= 1, got {self.agents}")
        if self.dim < 1:
            raise ConfigurationError(f"dim must be >= 1, got {self.dim}")


def phi_hk(r, alpha):
    """Smoothed Hegselmann-Krause influence function.

    ``phi(r) = (1 - sig(alpha (r - 1))) / (1 - sig(-alpha))``. Both the
    numerator and denominator are rewritten as logistic values of the opposite
    sign, which stays finite for ``alpha`` in the hundreds.

    Parameters
    ----------
    r : float or array_like
        Nonnegative distances.
    alpha : float
        Steepness of the cut-off around distance 1.

    Returns
    -------
    float or ndarray
        Values in (0, 1]; underflows to 0 only far beyond the cut-off for
        very steep kernels.
    """
    r = np.asarray(r, dtype=float)
    if not np.all(np.isfinite(r)) or not math.isfinite(alpha):
        raise ValueError("phi_hk requires finite inputs")
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if np.any(r < 0):
        raise ValueError("distances must be nonnegative")
    out = _phi_hk(r, alpha)
    return out if out.ndim else float(out)


def _phi_hk(r, alpha):
    # unchecked core of phi_hk; callers guarantee finite nonnegative r
    out = np.asarray(-alpha * (r - 1.0))
    expit(out, out=out)
    out *= 1.0 + math.exp(-alpha)
    # at r == 0 the ratio is exactly one; rounding may overshoot by an ulp
    return np.minimum(out, 1.0, out=out)


def cs_weight(xi, xj, K, beta, N):
    """Cucker-Smale weight between two agents."""
    diff = np.asarray(xi, dtype=float) - np.asarray(xj, dtype=float)
    if not np.all(np.isfinite(diff)):
        raise ValueError("cs_weight requires finite positions")
    return K / (N * (1.0 + diff @ diff) ** beta)


def pairwise_sq_dist(X):
    """Matrix of squared Euclidean distances between the rows of ``X``."""
    diff = X[:, None, :] - X[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def skew_cycle_matrix(N):
    """Skew-symmetric cycle matrix with zero row and column sums.

    Entry (i, i+1) is +1 and (i, i-1) is -1 along the cycle 1 -> 2 -> ... -> N,
    closed by s[0, N-1] = -1 and s[N-1, 0] = +1. For N == 2 the two cycle
    edges coincide and the matrix is zero.
    """
    if N < 2:
        raise ValueError(f"skew cycle needs N >= 2, got {N}")
    S = np.zeros((N, N), dtype=int)
    if N == 2:
        return S
    idx = np.arange(N)
    S[idx, (idx + 1) % N] = 1
    S[idx, (idx - 1) % N] = -1
    return S


@lru_cache(maxsize=32)
def _skew_float(N):
    S = skew_cycle_matrix(N).astype(float)
    S.flags.writeable = False
    return S


@lru_cache(maxsize=32)
def _cycle_index(N):
    rows = np.arange(N)
    return rows, (rows - 1) % N


def cycle_kernel_values(Phi):
    """Kernel values on the cycle edges (i, i-1) for i >= 2 and (1, N)."""
    rows, cols = _cycle_index(Phi.shape[0])
    return np.roll(Phi[rows, cols], -1)


def epsilon_skew(X1, kernel, b=None):
    """Skew amplitude ``b * min(phi on cycle edges)`` for a smoothed HK kernel."""
    X1 = np.asarray(X1, dtype=float)
    if X1.ndim != 2 or X1.shape[0] < 2:
        raise ValueError("epsilon_skew needs an N x d position array with N >= 2")
    if b is None:
        b = kernel.skew_strength
    Phi = phi_hk(np.sqrt(pairwise_sq_dist(X1)), kernel.alpha)
    return b * float(np.min(cycle_kernel_values(Phi)))


def symmetric_kernel_matrix(X1, kernel, assume_finite=False):
    """Symmetric part of the interaction matrix, zero diagonal.

    ``assume_finite`` skips the input check when the caller has verified that
    ``X1`` is finite; overflowing distances then give zero weight.
    """
    N = X1.shape[0]
    D2 = pairwise_sq_dist(X1)
    if isinstance(kernel, SmoothedHK):
        if not assume_finite and not np.isfinite(D2).all():
            raise ValueError("phi_hk requires finite inputs")
        A = _phi_hk(np.sqrt(D2, out=D2), kernel.alpha)
    elif isinstance(kernel, CuckerSmale):
        A = kernel.K / (N * (1.0 + D2) ** kernel.beta)
    else:
        raise TypeError(f"unknown kernel {kernel!r}")
    A = np.asarray(A, dtype=float)
    np.fill_diagonal(A, 0.0)
    return A


def build_interaction_matrix(X1, kernel, assume_finite=False):
    """Weight-balanced interaction matrix ``a_ij(X1)``.

    The symmetric kernel matrix is perturbed by ``eps(x) * S`` with ``S`` the
    skew cycle matrix when ``kernel.skew_strength > 0``. The perturbation keeps
    row and column sums equal, so the result is weight-balanced but directed.
    """
    X1 = np.asarray(X1, dtype=float)
    A = symmetric_kernel_matrix(X1, kernel, assume_finite)
    N = A.shape[0]
    if kernel.skew_strength > 0 and N > 2:
        rows, cols = _cycle_index(N)
        eps = kernel.skew_strength * float(A[rows, cols].min())
        # b < 1 makes eps <= every cycle weight, so no entry turns negative
        A = A + eps * _skew_float(N)
    return A


def balance_tolerance(A, rel=1e-10):
    return rel * max(1.0, float(np.max(np.abs(A))) if A.size else 1.0)


def check_weight_balanced(A, tol=None):
    """Return ``(balanced, max_defect)`` comparing row and column sums."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("interaction matrix must be square")
    if tol is None:
        tol = balance_tolerance(A)
    defect = float(np.max(np.abs(A.sum(axis=1) - A.sum(axis=0)))) if A.size else 0.0
    return defect <= tol, defect
