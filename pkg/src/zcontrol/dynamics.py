"""Uncontrolled k-th order consensus dynamics and consensus metrics.

A state stack is a float array of shape ``(k, N, d)``: ``X[0]`` holds the
positions, ``X[1]`` the velocities and so on up to the top-order state
``X[k-1]``.
"""

import numpy as np

from .core import build_interaction_matrix


def as_state(X):
    X = np.asarray(X, dtype=float)
    if X.ndim != 3:
        raise ValueError(f"state stack must have shape (k, N, d), got {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("state stack contains non-finite entries")
    return X


def coupling(A, Y):
    """Laplacian-type coupling ``sum_j A_ij (y_j - y_i)`` for every row i."""
    return A @ Y - np.add.reduce(A, axis=1)[:, None] * Y


def rhs_uncontrolled(X, kernel, A=None):
    """Time derivative of the uncontrolled system.

    The lower blocks are shifted copies of the state (``x^(r)' = x^(r+1)``);
    the top block is the coupling through ``A(X[0])``. ``A`` may be passed in
    when the caller has already assembled it for the current positions.
    """
    if A is None:
        A = build_interaction_matrix(X[0], kernel)
    dX = np.empty_like(X)
    dX[:-1] = X[1:]
    dX[-1] = coupling(A, X[-1])
    return dX


def average_top(X):
    return np.add.reduce(X[-1], axis=0) / X.shape[1]


def consensus_gamma(X):
    """Consensus parameter ``(1/N^2) sum_i |x_i^(k) - mean|^2``."""
    top = X[-1]
    N = top.shape[0]
    dev = top - top.mean(axis=0)
    return float(np.sum(dev * dev)) / N**2
