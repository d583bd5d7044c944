"""Minimum-norm least squares with rank and conditioning diagnostics."""

from dataclasses import dataclass, asdict

import numpy as np

from .core import ConfigurationError

EPS = 2.0**-52
REL_FLOOR = 1e-14


@dataclass(frozen=True)
class LsqDiagnostics:
    numerical_rank: int
    residual_norm: float
    sigma_max: float
    sigma_min_positive: float
    compat_defect: float = 0.0
    degenerate: bool = False

    def as_dict(self):
        return asdict(self)


def rank_threshold(sigma_max, shape, abs_floor=0.0):
    """Singular values at or below this are treated as zero.

    Relative part ``sigma_max * max(max(shape) * eps, 1e-14)``; ``abs_floor``
    optionally adds an absolute lower bound.
    """
    return max(sigma_max * max(max(shape) * EPS, REL_FLOOR), abs_floor)


def numerical_rank(s, shape, abs_floor=0.0):
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > rank_threshold(s[0], shape, abs_floor)))


def min_norm_lstsq(M, b, compat_defect=0.0, abs_floor=0.0):
    """Truncated-SVD solution of ``min |M u - b|`` with minimal ``|u|``.

    Parameters
    ----------
    M : (m, n) array_like
    b : (m,) array_like
    compat_defect : float, optional
        Carried through to the diagnostics unchanged; callers that know a
        compatibility condition on ``b`` report its defect here.
    abs_floor : float, optional
        Absolute singular-value cut-off added to the relative one.

    Returns
    -------
    u : (n,) ndarray
    diag : LsqDiagnostics
    """
    M = np.asarray(M, dtype=float)
    b = np.asarray(b, dtype=float)
    if not (np.all(np.isfinite(M)) and np.all(np.isfinite(b))):
        raise ValueError("min_norm_lstsq requires finite inputs")
    if M.ndim != 2 or b.shape != (M.shape[0],):
        raise ValueError(f"shape mismatch: M {M.shape}, b {b.shape}")
    m, n = M.shape
    if M.size == 0:
        return np.zeros(n), LsqDiagnostics(0, float(np.linalg.norm(b)), 0.0, 0.0, compat_defect)
    W, s, Vt = np.linalg.svd(M, full_matrices=False)
    rank = numerical_rank(s, M.shape, abs_floor)
    coef = (W[:, :rank].T @ b) / s[:rank]
    u = Vt[:rank].T @ coef
    residual = float(np.linalg.norm(M @ u - b))
    diag = LsqDiagnostics(
        numerical_rank=rank,
        residual_norm=residual,
        sigma_max=float(s[0]),
        sigma_min_positive=float(s[rank - 1]) if rank else 0.0,
        compat_defect=compat_defect,
    )
    return u, diag


def expected_rank(N, d):
    """Observed rank law ``N d - d (d + 1) / 2`` of the indirect-control matrix."""
    if N < 1 or d < 1:
        raise ConfigurationError("N and d must be >= 1")
    rank = N * d - d * (d + 1) // 2
    if rank < 1:
        raise ConfigurationError(
            f"N={N}, d={d} gives rank {rank}; need N >= {min_agents(d)} agents"
        )
    return rank


def min_agents(d):
    """Smallest N with ``N d - d (d + 1) / 2 >= 1``."""
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    # ceil((d + 1) / 2 + 1 / d) in exact integer arithmetic
    return -((-(d * (d + 1) + 2)) // (2 * d))

