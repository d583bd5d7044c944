import numpy as np
import pytest

from zcontrol.core import ConfigurationError
from zcontrol.lsq import expected_rank, min_agents, min_norm_lstsq, numerical_rank


def test_hand_case_rank_one():
    # M = [[1, 1], [1, 1]], b = (2, 0): projected b = (1, 1), u = (0.5, 0.5)
    u, diag = min_norm_lstsq(np.ones((2, 2)), np.array([2.0, 0.0]))
    assert np.allclose(u, [0.5, 0.5])
    assert diag.numerical_rank == 1
    assert diag.residual_norm == pytest.approx(np.sqrt(2))
    assert diag.sigma_max == pytest.approx(2.0)
    assert diag.sigma_min_positive == pytest.approx(2.0)


def test_matches_pinv_oracle(rng):
    M = rng.normal(size=(12, 5)) @ rng.normal(size=(5, 9))
    b = rng.normal(size=12)
    u, diag = min_norm_lstsq(M, b)
    assert diag.numerical_rank == 5
    assert np.allclose(u, np.linalg.pinv(M, rcond=1e-12) @ b, atol=1e-10)


def test_residual_is_orthogonal_projection(rng):
    M = rng.normal(size=(10, 4)) @ rng.normal(size=(4, 10))
    b = rng.normal(size=10)
    u, diag = min_norm_lstsq(M, b)
    res = M @ u - b
    # residual is orthogonal to the range of M
    assert np.linalg.norm(M.T @ res) < 1e-10
    assert diag.residual_norm == pytest.approx(np.linalg.norm(res))


def test_minimum_norm_and_local_optimality(rng):
    M = rng.normal(size=(8, 3)) @ rng.normal(size=(3, 8))
    b = rng.normal(size=8)
    u, _ = min_norm_lstsq(M, b)
    null = np.linalg.svd(M)[2][3:]
    # u has no null-space component
    assert np.linalg.norm(null @ u) < 1e-10
    base = np.linalg.norm(M @ u - b)
    for _ in range(20):
        du = 1e-3 * rng.normal(size=8)
        assert np.linalg.norm(M @ (u + du) - b) >= base - 1e-12
        # moving along the null space keeps the residual and grows the norm
        w = u + null.T @ rng.normal(size=5)
        assert np.linalg.norm(w) >= np.linalg.norm(u)


def test_zero_matrix():
    u, diag = min_norm_lstsq(np.zeros((3, 3)), np.ones(3))
    assert not u.any() and diag.numerical_rank == 0 and diag.sigma_min_positive == 0.0


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        min_norm_lstsq(np.eye(2), np.ones(3))
    with pytest.raises(ValueError):
        min_norm_lstsq(np.array([[np.inf]]), np.ones(1))


def test_numerical_rank_threshold():
    s = np.array([1.0, 1e-3, 1e-20])
    assert numerical_rank(s, (3, 3)) == 2
    assert numerical_rank(np.zeros(3), (3, 3)) == 0


@pytest.mark.parametrize("N,d,rank", [(150, 3, 444), (150, 4, 590), (150, 5, 735),
                                      (150, 10, 1445), (150, 20, 2790), (150, 30, 4035),
                                      (20, 2, 37), (20, 3, 54)])
def test_expected_rank_table(N, d, rank):
    assert expected_rank(N, d) == rank


@pytest.mark.parametrize("d,n", [(1, 2), (2, 2), (3, 3), (4, 3), (5, 4), (10, 6), (30, 16)])
def test_min_agents(d, n):
    assert min_agents(d) == n
    assert expected_rank(n, d) >= 1
    with pytest.raises(ConfigurationError):
        expected_rank(n - 1, d)


def test_min_agents_formula_brute_force():
    for d in range(1, 200):
        smallest = next(N for N in range(1, 10 * d) if N * d - d * (d + 1) // 2 >= 1)
        assert min_agents(d) == smallest


def test_identity_returns_rhs(rng):
    b = rng.normal(size=6)
    u, diag = min_norm_lstsq(np.eye(6), b)
    assert np.allclose(u, b) and diag.residual_norm < 1e-15


def test_hand_pseudo_inverse():
    u, diag = min_norm_lstsq(np.array([[1.0, 0.0], [0.0, 0.0]]), np.array([1.0, 1.0]))
    assert np.allclose(u, [1.0, 0.0])
    assert diag.residual_norm == pytest.approx(1.0)


def test_orthonormal_range_projection_oracle(rng):
    Q, _ = np.linalg.qr(rng.normal(size=(9, 4)))
    b = rng.normal(size=9)
    _, diag = min_norm_lstsq(Q, b)
    outside = b - Q @ (Q.T @ b)
    assert diag.residual_norm == pytest.approx(np.linalg.norm(outside), rel=1e-12)


def test_hundred_perturbations_and_null_directions(rng):
    M = rng.normal(size=(7, 4)) @ rng.normal(size=(4, 6))
    b = rng.normal(size=7)
    u, diag = min_norm_lstsq(M, b)
    null = np.linalg.svd(M)[2][diag.numerical_rank:]
    for _ in range(100):
        assert np.linalg.norm(M @ (u + rng.normal(size=6)) - b) >= diag.residual_norm - 1e-12
        assert np.linalg.norm(u) <= np.linalg.norm(u + null.T @ rng.normal(size=len(null)))


def test_deterministic(rng):
    M = rng.normal(size=(20, 20))
    b = rng.normal(size=20)
    u1, d1 = min_norm_lstsq(M, b)
    u2, d2 = min_norm_lstsq(M.copy(), b.copy())
    assert np.array_equal(u1, u2) and d1 == d2
