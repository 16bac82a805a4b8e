import numpy as np
import pytest

from spectraprg.linalg import (
    as_sym,
    batch_lambda_max,
    block_diag,
    eig_sym,
    lambda_max,
    lambda_min,
    matrix_function,
    power_iteration_lambda_max,
    random_orthogonal,
    random_sym,
    spectral_norm,
)


def test_as_sym_symmetrizes_exactly():
    m = np.array([[1.0, 2.0 + 1e-12], [2.0, 3.0]])
    s = as_sym(m)
    assert s[0, 1] == s[1, 0]
    assert not s.flags.writeable


@pytest.mark.parametrize("bad", [np.ones((2, 3)), np.array([[0.0, 1.0], [2.0, 0.0]]),
                                 np.array([[np.nan, 0.0], [0.0, 1.0]])])
def test_as_sym_rejects(bad):
    with pytest.raises(ValueError):
        as_sym(bad)


def test_eig_diagonal_sorted():
    w, _ = eig_sym(np.diag([3.0, 1.0, 2.0]))
    np.testing.assert_array_equal(w, [3.0, 2.0, 1.0])


def test_eig_2x2_closed_form():
    w, v = eig_sym([[0.0, 1.0], [1.0, 0.0]])
    np.testing.assert_allclose(w, [1.0, -1.0], atol=1e-15)
    s = 1 / np.sqrt(2)
    assert abs(abs(v[:, 0] @ [s, s]) - 1) < 1e-12
    assert abs(abs(v[:, 1] @ [s, -s]) - 1) < 1e-12


@pytest.mark.parametrize("k", [1, 3, 6, 10])
def test_eig_reconstruction_and_orthogonality(rng, k):
    M = random_sym(k, rng, scale=3.0)
    w, V = eig_sym(M)
    assert np.max(np.abs(V.T @ V - np.eye(k))) <= 1e-10
    assert np.max(np.abs((V * w) @ V.T - M)) <= 1e-9 * (1 + np.max(np.abs(M)))
    np.testing.assert_allclose(w, np.linalg.eigvalsh(M)[::-1], atol=1e-12)
    assert np.all(np.diff(w) <= 0)


def test_lambda_max_trivial():
    assert lambda_max(np.diag([-1.0, -2.0])) == -1.0
    assert lambda_max(np.eye(4)) == 1.0
    assert lambda_min(np.diag([-1.0, -2.0])) == -2.0


def test_lambda_max_matches_power_iteration(rng):
    for _ in range(10):
        M = random_sym(6, rng)
        assert abs(lambda_max(M) - power_iteration_lambda_max(M)) <= 1e-8


def test_spectral_norm_and_batch(rng):
    mats = np.stack([random_sym(4, rng) for _ in range(50)])
    got = batch_lambda_max(mats)
    np.testing.assert_allclose(got, np.linalg.eigvalsh(mats)[:, -1], atol=1e-12)
    M = mats[0]
    assert spectral_norm(M) == pytest.approx(np.max(np.abs(np.linalg.eigvalsh(M))), abs=1e-12)


def test_matrix_function_exp(rng):
    M = random_sym(4, rng)
    from scipy.linalg import expm
    np.testing.assert_allclose(matrix_function(np.exp, M), expm(M), atol=1e-12)


def test_random_orthogonal_and_block_diag(rng):
    Q = random_orthogonal(5, rng)
    np.testing.assert_allclose(Q.T @ Q, np.eye(5), atol=1e-12)
    B = block_diag(np.eye(2), 2 * np.eye(3))
    assert B.shape == (5, 5) and B[4, 4] == 2 and B[0, 3] == 0
