import os
import subprocess
import sys

import numpy as np
import pytest

from spectraprg import _backend, _pykernels
from spectraprg.gf2 import field_poly

compiled = _backend.compiled_kernels()
needs_ext = pytest.mark.skipif(compiled is None, reason="compiled extension not built")


def test_backend_name():
    assert _backend.BACKEND in ("cython", "python")
    if compiled is not None and os.environ.get("SPECTRAPRG_BACKEND", "") != "python":
        assert _backend.BACKEND == "cython"


def test_forced_python_backend():
    env = dict(os.environ, SPECTRAPRG_BACKEND="python")
    code = "import spectraprg; print(spectraprg.BACKEND); from spectraprg.linalg import lambda_max; print(lambda_max([[2.0, 0], [0, 1]]))"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["python", "2.0"]


@needs_ext
def test_jacobi_parity(rng):
    for k in (1, 2, 5, 9):
        W = rng.standard_normal((k, k))
        M = np.ascontiguousarray(W + W.T)
        wc, vc, _, _ = compiled.jacobi_eigh(M, 1e-12, 100)
        wp, vp, _, _ = _pykernels.jacobi_eigh(M, 1e-12, 100)
        np.testing.assert_allclose(wc, wp, atol=1e-12)
        np.testing.assert_allclose(np.abs(vc.T @ vp), np.eye(k), atol=1e-8)


@needs_ext
def test_batch_lambda_max_parity(rng):
    W = rng.standard_normal((500, 4, 4))
    mats = np.ascontiguousarray(W + W.transpose(0, 2, 1))
    np.testing.assert_allclose(compiled.batch_lambda_max(mats, 1e-12, 100),
                               _pykernels.batch_lambda_max(mats, 1e-12, 100), atol=1e-12)


@needs_ext
@pytest.mark.parametrize("a", [1, 4, 13, 32])
def test_gf_parity(rng, a):
    coeffs = rng.integers(0, 1 << a, size=(50, 4), dtype=np.uint64)
    points = rng.integers(0, 1 << a, size=30, dtype=np.uint64)
    p = field_poly(a)
    np.testing.assert_array_equal(compiled.poly_eval_batch(coeffs, points, a, p),
                                  _pykernels.poly_eval_batch(coeffs, points, a, p))
    x, y = int(points[0]), int(points[1])
    assert int(compiled.gf_mul(x, y, a, p)) == int(_pykernels.gf_mul(x, y, a, p))


@needs_ext
def test_mz_expand_parity(rng):
    n, w, t, b, a = 40, 3, 4, 6, 6
    hc = rng.integers(0, 1 << b, size=(200, w), dtype=np.uint64)
    bc = rng.integers(0, 1 << a, size=(200, t, w), dtype=np.uint64)
    args = (hc, bc, n, b, field_poly(b), a, field_poly(a), 2)
    np.testing.assert_array_equal(compiled.mz_expand_batch(*args), _pykernels.mz_expand_batch(*args))
