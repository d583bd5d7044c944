"""Indirect Z-control for Cucker-Smale type models.

The control enters a lower-order state (position or velocity) while the
target is consensus of the top-order state. Substituting the controlled
dynamics into the higher-order error law gives a linear system
``L_B U = -R`` that is singular; it is solved in the minimum-norm least
squares sense.

Three laws are provided:

``vel_via_pos``
    second order model, ``x' = v + u``; velocity consensus.
``acc_via_pos``
    third order model, ``x' = v + u``; acceleration consensus.
``acc_via_vel``
    third order model, ``v' = z + u``; acceleration consensus with a
    third-order error law.

All derivations differentiate ``a_ij(x)`` along the flow, so the interaction
must be the plain (symmetric) Cucker-Smale weight.
"""

from dataclasses import dataclass

import numpy as np

from .core import ConfigurationError, CuckerSmale, pairwise_sq_dist, symmetric_kernel_matrix
from .dynamics import coupling
from .lsq import LsqDiagnostics, min_agents, min_norm_lstsq

MODES = ("vel_via_pos", "acc_via_pos", "acc_via_vel")
MODE_ORDER = {"vel_via_pos": 2, "acc_via_pos": 3, "acc_via_vel": 3}
# state block receiving the control: 0 = positions, 1 = velocities
MODE_SLOT = {"vel_via_pos": 0, "acc_via_pos": 0, "acc_via_vel": 1}

DEGENERATE_SIGMA = 1e-12
# absolute singular-value floor of the indirect solve
RANK_ABS_FLOOR = 1e-12


def check_kernel(kernel):
    if not isinstance(kernel, CuckerSmale):
        raise ConfigurationError("indirect control is derived for the Cucker-Smale kernel only")
    if kernel.skew_strength != 0:
        raise ConfigurationError("indirect control requires skew_strength = 0")


@dataclass(frozen=True)
class PairScalars:
    """Pairwise scalars as N x N matrices (diagonals are 0, rho's is 1)."""

    rho: np.ndarray
    s: np.ndarray
    q: np.ndarray
    r: np.ndarray


def pair_scalars(x, v, z=None):
    dx = x[:, None, :] - x[None, :, :]
    dv = v[:, None, :] - v[None, :, :]
    rho = 1.0 + np.einsum("ijk,ijk->ij", dx, dx)
    s = np.einsum("ijk,ijk->ij", dx, dv)
    q = np.einsum("ijk,ijk->ij", dv, dv)
    if z is None:
        r = np.zeros_like(s)
    else:
        dz = z[:, None, :] - z[None, :, :]
        r = np.einsum("ijk,ijk->ij", dx, dz)
    return PairScalars(rho, s, q, r)


def b_coeff(xi, xj, K, beta, N):
    """``b_ij = -(2 beta K / N) (1 + |xi - xj|^2)^(-beta - 1)``, the factor in da_ij/dt."""
    diff = np.asarray(xi, dtype=float) - np.asarray(xj, dtype=float)
    return -2.0 * beta * K / N * (1.0 + diff @ diff) ** (-beta - 1.0)


def b_matrix(x, kernel):
    N = x.shape[0]
    B = -2.0 * kernel.beta * kernel.K / N * (1.0 + pairwise_sq_dist(x)) ** (-kernel.beta - 1.0)
    np.fill_diagonal(B, 0.0)
    return B


def row_strength(A, i=None):
    """``r_i = sum_k a_ik``; all rows when ``i`` is None."""
    r = np.asarray(A).sum(axis=1)
    return r if i is None else float(r[i])


def a_dot_matrix(x, v, kernel):
    """``da_ij/dt = b_ij s_ij`` along the uncontrolled position flow ``x' = v``."""
    return b_matrix(x, kernel) * pair_scalars(x, v).s


def row_strength_dot(x, v, kernel):
    return a_dot_matrix(x, v, kernel).sum(axis=1)


def a_ddot0(pair, K, beta, N):
    """Control-free part of the second derivative of ``a_ij`` (third-order model)."""
    rho, s = pair.rho, pair.s
    return (
        4.0 * beta * (beta + 1.0) * K * rho ** (-beta - 2.0) * s**2
        - 2.0 * beta * K * rho ** (-beta - 1.0) * (pair.q + pair.r)
    ) / N


def assemble_LB(x, w, kernel):
    """Block matrix multiplying the stacked control.

    Off-diagonal block (i, j) is ``-b_ij (w_j - w_i)(x_i - x_j)^T`` and the
    diagonal block is minus the sum of the off-diagonal blocks of its row.
    ``w`` is the velocity for the second-order law and the acceleration for
    the third-order laws. Returns an ``(N d, N d)`` array.
    """
    N, d = x.shape
    B = b_matrix(x, kernel)
    dx = x[:, None, :] - x[None, :, :]
    dw = w[None, :, :] - w[:, None, :]
    blocks = -np.einsum("ij,ija,ijb->ijab", B, dw, dx)
    idx = np.arange(N)
    blocks[idx, idx] = -blocks.sum(axis=1)
    return blocks.transpose(0, 2, 1, 3).reshape(N * d, N * d)


def _coupling_rates(A, Ad, w):
    """First and (control-free) second derivative of ``w`` when ``w' = A``-coupling."""
    w1 = coupling(A, w)
    r = A.sum(axis=1)[:, None]
    rdot = Ad.sum(axis=1)[:, None]
    Aw = A @ w
    # expanded form: sum_j adot_ij (w_j - w_i) + sum_jk a_ij (a_jk - a_ik) w_k
    #                + r_i^2 w_i - sum_j a_ij r_j w_j
    w2 = (Ad @ w - rdot * w) + (A @ Aw - r * Aw) + r**2 * w - A @ (r * w)
    return w1, w2


def rhs_R_second(x, v, kernel, lam):
    """Right-hand side ``R`` of the velocity-via-position law, shape (N, d)."""
    check_kernel(kernel)
    v = v - v.mean(axis=0)
    A = symmetric_kernel_matrix(x, kernel)
    Ad = a_dot_matrix(x, v, kernel)
    v1, v2 = _coupling_rates(A, Ad, v)
    return v2 + 2.0 * lam * v1 + lam**2 * v


def rhs_R_third_pos(x, v, z, kernel, lam):
    """Right-hand side of the acceleration-via-position law.

    Same structure as the second-order law with the accelerations in the
    coupling slots; the rate of ``a_ij`` still uses the velocities.
    """
    check_kernel(kernel)
    z = z - z.mean(axis=0)
    A = symmetric_kernel_matrix(x, kernel)
    Ad = a_dot_matrix(x, v, kernel)
    z1, z2 = _coupling_rates(A, Ad, z)
    return z2 + 2.0 * lam * z1 + lam**2 * z


def rhs_R_third_vel(x, v, z, kernel, lam):
    """Right-hand side of the acceleration-via-velocity law.

    Control-free part of ``z''' + 3 lam z'' + 3 lam^2 z' + lam^3 (z - mean)``
    written with matrix products in place of the triple and quadruple sums.
    """
    check_kernel(kernel)
    N = x.shape[0]
    z = z - z.mean(axis=0)
    A = symmetric_kernel_matrix(x, kernel)
    B = b_matrix(x, kernel)
    pair = pair_scalars(x, v, z)
    Ad = B * pair.s
    Add = a_ddot0(pair, kernel.K, kernel.beta, N)
    np.fill_diagonal(Add, 0.0)

    r = A.sum(axis=1)[:, None]
    rdot = Ad.sum(axis=1)[:, None]
    Az = A @ z
    z1, z2 = _coupling_rates(A, Ad, z)

    z3 = (
        coupling(Add, z)
        + 2.0 * (Ad @ Az - rdot * Az)
        + 2.0 * (r * rdot * z - Ad @ (r * z))
        + (A @ (Ad @ z) - r * (Ad @ z))
        + (A @ (A @ z1) - r * (A @ z1))
        - A @ (rdot * z)
        - A @ (r * z1)
        + r * rdot * z
        + r**2 * z1
    )
    return z3 + 3.0 * lam * z2 + 3.0 * lam**2 * z1 + lam**3 * z


def compat_defect(R):
    """``|sum_i R_i|`` relative to ``sum_i |R_i|`` (0 when R vanishes)."""
    scale = float(np.sum(np.linalg.norm(R, axis=1)))
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(R.sum(axis=0))) / scale


def assemble_system(X, kernel, lam, mode):
    """``(L_B, R)`` for the given state stack and mode."""
    if mode not in MODES:
        raise ConfigurationError(f"unknown indirect mode {mode!r}")
    if X.shape[0] != MODE_ORDER[mode]:
        raise ConfigurationError(f"mode {mode} needs an order-{MODE_ORDER[mode]} state")
    if mode == "vel_via_pos":
        x, v = X
        return assemble_LB(x, v, kernel), rhs_R_second(x, v, kernel, lam)
    x, v, z = X
    LB = assemble_LB(x, z, kernel)
    if mode == "acc_via_pos":
        return LB, rhs_R_third_pos(x, v, z, kernel, lam)
    return LB, rhs_R_third_vel(x, v, z, kernel, lam)


def indirect_control(X, kernel, lam, mode):
    """Minimum-norm least-squares indirect control.

    Returns
    -------
    U : (N, d) ndarray
    diag : LsqDiagnostics
        Rank, residual and extreme singular values of the solve plus the
        relative compatibility defect of ``R``. When the largest singular
        value of ``L_B`` is negligible the control is set to zero and
        ``diag.degenerate`` is True.
    """
    if not (np.isfinite(lam) and lam > 0):
        raise ValueError(f"lambda must be positive, got {lam}")
    check_kernel(kernel)
    _, N, d = X.shape
    if N < min_agents(d):
        raise ConfigurationError(f"indirect control in d={d} needs N >= {min_agents(d)}, got {N}")
    LB, R = assemble_system(X, kernel, lam, mode)
    defect = compat_defect(R)
    rhs = -R.ravel()
    u, diag = min_norm_lstsq(LB, rhs, compat_defect=defect, abs_floor=RANK_ABS_FLOOR)
    rnorm = float(np.linalg.norm(rhs))
    if diag.sigma_max < DEGENERATE_SIGMA * max(1.0, rnorm):
        diag = LsqDiagnostics(0, rnorm, diag.sigma_max, 0.0, defect, degenerate=True)
        u = np.zeros_like(rhs)
    return u.reshape(N, d), diag
