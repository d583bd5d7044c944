"""Direct Z-control acting on the top-order state."""

import math

import numpy as np

from .core import build_interaction_matrix, check_weight_balanced


def _check_lambda(lam):
    if not (math.isfinite(lam) and lam > 0):
        raise ValueError(f"lambda must be positive, got {lam}")


def _direct(top, A, lam, balanced):
    # returns the control and the row sums of A for reuse by the caller
    _check_lambda(lam)
    N = top.shape[0]
    dev = top - np.add.reduce(top, axis=0) / N
    # second pass removes the rounding left by a large common mean
    dev -= np.add.reduce(dev, axis=0) / N
    rows = np.add.reduce(A, axis=1)[:, None]
    U = -lam * dev - (A @ dev - rows * dev)
    # for balanced A the exact sum is zero; when lam ~ row strength U cancels
    # and rounding of size |dev| would otherwise dominate it
    if balanced is None:
        balanced = check_weight_balanced(A)[0]
    if balanced:
        U -= np.add.reduce(U, axis=0) / N
    return U, rows


def direct_control(X, A, lam, balanced=None):
    """Control ``u_i = -lam (x_i^(k) - mean) - sum_j a_ij (x_j^(k) - x_i^(k))``.

    Cancels the coupling and replaces it with exponential relaxation towards
    the current top-order average. For weight-balanced ``A`` the inputs sum to
    zero over the agents; the rounding residue of that sum is projected out.
    ``balanced`` skips the balance check when the caller already knows.
    """
    return _direct(X[-1], A, lam, balanced)[0]


def rhs_direct(X, kernel, lam, A=None, balanced=None):
    """Controlled derivative and the control used, ``(dX, U)``."""
    if A is None:
        A = build_interaction_matrix(X[0], kernel)
    top = X[-1]
    U, rows = _direct(top, A, lam, balanced)
    dX = np.empty_like(X)
    dX[:-1] = X[1:]
    dX[-1] = (A @ top - rows * top) + U
    return dX, U


def zero_sum_defect(U):
    """``|sum_i u_i|`` relative to ``sum_i |u_i|`` (0 for a zero control)."""
    scale = float(np.sqrt(np.einsum("ij,ij->i", U, U)).sum())
    if scale == 0.0:
        return 0.0
    total = np.add.reduce(U, axis=0)
    return math.sqrt(float(total @ total)) / scale
