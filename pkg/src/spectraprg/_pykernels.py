"""Pure numpy kernels, used when the compiled extension is unavailable.

Same signatures and results as ``_kernels.pyx``; the loops here are
vectorised across the batch axis instead of across matrix entries.
"""
import numpy as np

BACKEND = "python"


def _rotate(a, v, p, q, idx=None):
    """One Jacobi rotation zeroing a[..., p, q] for a stack of matrices."""
    apq = a[:, p, q]
    nz = apq != 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        theta = np.where(nz, (a[:, q, q] - a[:, p, p]) / (2.0 * np.where(nz, apq, 1.0)), 0.0)
    t = np.sign(theta) / (np.abs(theta) + np.hypot(theta, 1.0))
    t = np.where(theta == 0.0, np.where(nz, 1.0, 0.0), t)
    c = 1.0 / np.sqrt(t * t + 1.0)
    s = t * c
    c1 = c[:, None]
    s1 = s[:, None]
    arp = a[:, :, p].copy()
    arq = a[:, :, q].copy()
    a[:, :, p] = c1 * arp - s1 * arq
    a[:, :, q] = s1 * arp + c1 * arq
    apr = a[:, p, :].copy()
    aqr = a[:, q, :].copy()
    a[:, p, :] = c1 * apr - s1 * aqr
    a[:, q, :] = s1 * apr + c1 * aqr
    a[:, p, q] = 0.0
    a[:, q, p] = 0.0
    if v is not None:
        vrp = v[:, :, p].copy()
        vrq = v[:, :, q].copy()
        v[:, :, p] = c1 * vrp - s1 * vrq
        v[:, :, q] = s1 * vrp + c1 * vrq


def _off(a):
    k = a.shape[1]
    iu = np.triu_indices(k, 1)
    return np.sqrt(2.0 * np.sum(a[:, iu[0], iu[1]] ** 2, axis=1))


def _jacobi_stack(a, v, tol_rel, max_sweeps):
    """Cyclic Jacobi on a stack; returns per-matrix sweep counts (-1 = no convergence)."""
    N, k, _ = a.shape
    fro = np.sqrt(np.sum(a * a, axis=(1, 2)))
    sweeps = np.full(N, -1, dtype=np.int64)
    active = np.arange(N)
    for sweep in range(max_sweeps + 1):
        off = _off(a[active])
        done = off <= tol_rel * fro[active]
        sweeps[active[done]] = sweep
        active = active[~done]
        if active.size == 0 or sweep == max_sweeps:
            break
        sub = a[active]
        subv = v[active] if v is not None else None
        for p in range(k - 1):
            for q in range(p + 1, k):
                _rotate(sub, subv, p, q)
        a[active] = sub
        if v is not None:
            v[active] = subv
    return sweeps


def jacobi_eigh(m, tol_rel=1e-12, max_sweeps=100):
    a = np.array(m, dtype=np.float64, order="C")[None]
    k = a.shape[1]
    if k == 0:
        return np.empty(0), np.empty((0, 0)), 0, 0.0
    v = np.eye(k)[None].copy()
    sweeps = _jacobi_stack(a, v, tol_rel, max_sweeps)
    off = float(_off(a)[0])
    w = np.diagonal(a[0]).copy()
    order = np.argsort(-w, kind="stable")
    return w[order], v[0][:, order], int(sweeps[0]), off


def batch_lambda_max(mats, tol_rel=1e-12, max_sweeps=100):
    a = np.array(mats, dtype=np.float64, order="C")
    if a.shape[1] == 0:
        return np.full(a.shape[0], -np.inf)
    if a.shape[0] == 0:
        return np.empty(0)
    sweeps = _jacobi_stack(a, None, tol_rel, max_sweeps)
    if np.any(sweeps < 0):
        raise ArithmeticError("Jacobi iteration did not converge for some matrix in the batch")
    return np.max(np.diagonal(a, axis1=1, axis2=2), axis=1)


def _gf_mul_arr(x, y, a, poly):
    x = np.asarray(x, dtype=np.uint64).copy()
    y = np.asarray(y, dtype=np.uint64).copy()
    x, y = np.broadcast_arrays(x, y)
    x = x.copy()
    y = y.copy()
    r = np.zeros_like(x)
    one = np.uint64(1)
    for _ in range(a):
        r ^= np.where((y & one) == one, x, np.uint64(0))
        y >>= one
        x <<= one
    poly = np.uint64(poly)
    for i in range(2 * a - 2, a - 1, -1):
        bit = (r >> np.uint64(i)) & one
        r ^= np.where(bit == one, poly << np.uint64(i - a), np.uint64(0))
    return r


def gf_mul(x, y, a, poly):
    return int(_gf_mul_arr(np.uint64(x), np.uint64(y), a, poly))


def _horner(coeffs, x, a, poly):
    """coeffs: (..., w) uint64; x broadcastable to coeffs[..., 0]."""
    w = coeffs.shape[-1]
    acc = np.zeros(np.broadcast_shapes(coeffs.shape[:-1], np.shape(x)), dtype=np.uint64)
    for j in range(w - 1, -1, -1):
        acc = _gf_mul_arr(acc, x, a, poly) ^ coeffs[..., j]
    return acc


def poly_eval_batch(coeffs, points, a, poly):
    coeffs = np.ascontiguousarray(coeffs, dtype=np.uint64)
    points = np.ascontiguousarray(points, dtype=np.uint64)
    N, w = coeffs.shape
    if w == 0:
        return np.zeros((N, points.shape[0]), dtype=np.uint64)
    return _horner(coeffs[:, None, :], points[None, :], a, poly)


def mz_expand_batch(hash_coeffs, block_coeffs, n, b, hash_poly, a, block_poly, log2t):
    hash_coeffs = np.ascontiguousarray(hash_coeffs, dtype=np.uint64)
    block_coeffs = np.ascontiguousarray(block_coeffs, dtype=np.uint64)
    N = hash_coeffs.shape[0]
    t = block_coeffs.shape[1]
    if log2t == 0 or hash_coeffs.shape[1] == 0:
        buckets = np.zeros((N, n), dtype=np.int64)
    else:
        hv = poly_eval_batch(hash_coeffs, np.arange(n, dtype=np.uint64), b, hash_poly)
        buckets = (hv >> np.uint64(b - log2t)).astype(np.int64)
    # position of j inside its bucket = number of earlier indices in the same bucket
    onehot = buckets[:, :, None] == np.arange(t)[None, None, :]
    pos = (np.cumsum(onehot, axis=1) - 1)[onehot].reshape(N, n)
    if block_coeffs.shape[2] == 0:
        return np.ones((N, n), dtype=np.int8)
    rows = np.arange(N)[:, None]
    coeff_per_coord = block_coeffs[rows, buckets]  # (N, n, w)
    bv = _horner(coeff_per_coord, pos.astype(np.uint64), a, block_poly)
    return (1 - 2 * (bv & np.uint64(1)).astype(np.int8)).astype(np.int8)
