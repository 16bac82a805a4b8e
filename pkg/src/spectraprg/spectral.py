"""Divided differences and Fréchet derivatives of matrix and spectral functions.

Two families of maps on symmetric matrices are covered:

* matrix functions ``X -> f(X)`` for scalar ``f`` (Daleckii-Krein
  formulas: entrywise divided differences in the eigenbasis of ``X``);
* spectral functions ``X -> f(lambda(X))`` for symmetric ``f : R^k -> R``,
  whose first three derivatives are contractions of tensors built from
  ``grad f``, ``hess f``, ``d3 f`` and their difference quotients.

Independent checks come from integral representations (Dyson's formula
for ``exp``, a double integral for ``exp(-x^2/2)``) and from
finite differences with one Richardson step.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np
from numpy.polynomial import legendre, polynomial as P

from . import mollifier as mol
from .linalg import as_sym, eig_sym, spectral_norm

CONFLUENT_TOL = 1e-7
GAP_TOL = 1e-5


# --- scalar functions ------------------------------------------------------------

@dataclass(frozen=True)
class ScalarFunction:
    """A real function with analytic derivatives up to order 3.

    ``derivs[i]`` is the ``(i+1)``-th derivative; fewer than three entries
    means higher derivatives are unavailable.
    """

    id: str
    value: Callable
    derivs: tuple = ()
    coeffs: tuple | None = None

    def __call__(self, x):
        return self.value(x)

    def deriv(self, order: int, x):
        if order == 0:
            return self.value(x)
        if order > len(self.derivs):
            raise ValueError(f"{self.id}: derivative of order {order} not available")
        return self.derivs[order - 1](x)

    @classmethod
    def gauss_cdf(cls) -> "ScalarFunction":
        return cls("gauss_cdf", mol.g, tuple(lambda x, i=i: mol.g_derivs(x)[i] for i in range(3)))

    @classmethod
    def exp(cls) -> "ScalarFunction":
        return cls("exp", np.exp, (np.exp, np.exp, np.exp))

    @classmethod
    def neg_half_square_exp(cls) -> "ScalarFunction":
        e = lambda x: np.exp(-0.5 * np.asarray(x) ** 2)
        return cls(
            "neg_half_square_exp",
            e,
            (
                lambda x: -np.asarray(x) * e(x),
                lambda x: (np.asarray(x) ** 2 - 1.0) * e(x),
                lambda x: (3.0 * np.asarray(x) - np.asarray(x) ** 3) * e(x),
            ),
        )

    @classmethod
    def polynomial(cls, coeffs: Sequence[float]) -> "ScalarFunction":
        """Polynomial with coefficients given lowest degree first."""
        c = np.asarray(coeffs, dtype=np.float64)
        ds = [c]
        for _ in range(3):
            ds.append(P.polyder(ds[-1]) if ds[-1].size > 1 else np.zeros(1))
        return cls(
            "polynomial",
            lambda x, c=c: P.polyval(x, c),
            tuple(lambda x, d=d: P.polyval(x, d) for d in ds[1:]),
            tuple(c.tolist()),
        )

    @classmethod
    def custom(cls, value: Callable, *derivs: Callable, id: str = "custom") -> "ScalarFunction":
        return cls(id, value, tuple(derivs))


def _divided_diff_sorted(f: ScalarFunction, pts: np.ndarray) -> np.ndarray:
    """Divided differences along the last axis of ``pts`` (already sorted)."""
    m = pts.shape[-1] - 1
    if m == 0:
        return np.asarray(f(pts[..., 0]), dtype=np.float64)
    lo, hi = pts[..., 0], pts[..., -1]
    scale = np.maximum(1.0, np.max(np.abs(pts), axis=-1))
    span = hi - lo
    close = span < CONFLUENT_TOL * scale
    out = np.empty(pts.shape[:-1])
    if np.any(close):
        mean = np.mean(pts[close], axis=-1)
        out[close] = f.deriv(m, mean) / math.factorial(m)
    far = ~close
    if np.any(far):
        sub = pts[far]
        right = _divided_diff_sorted(f, sub[..., 1:])
        left = _divided_diff_sorted(f, sub[..., :-1])
        out[far] = (right - left) / span[far]
    return out


def divided_diff(f: ScalarFunction, xs, order: int | None = None):
    """Divided difference ``f^[m](x_0, ..., x_m)`` with ``m = len(xs) - 1 <= 3``.

    ``xs`` may carry leading batch axes; differences run over the last
    axis. Points closer than ``1e-7 * max(1, |x|)`` take the confluent
    limit ``f^(m)(mean) / m!``. Points are sorted first so that the outer
    pair in each recursive step is the farthest apart.
    """
    pts = np.sort(np.asarray(xs, dtype=np.float64), axis=-1)
    m = pts.shape[-1] - 1
    if order is not None and order != m:
        raise ValueError(f"order {order} needs {order + 1} points, got {m + 1}")
    if not 0 <= m <= 3:
        raise ValueError("divided differences are supported up to order 3")
    out = _divided_diff_sorted(f, pts)
    return float(out) if out.ndim == 0 else out


def _dd_matrix(f: ScalarFunction, lam: np.ndarray) -> np.ndarray:
    k = lam.size
    return divided_diff(f, np.stack(np.broadcast_arrays(lam[:, None], lam[None, :]), axis=-1)).reshape(k, k)


def _dd_tensor(f: ScalarFunction, lam: np.ndarray) -> np.ndarray:
    k = lam.size
    grid = np.stack(np.broadcast_arrays(lam[:, None, None], lam[None, :, None], lam[None, None, :]), axis=-1)
    return divided_diff(f, grid).reshape(k, k, k)


def matrix_apply(f: ScalarFunction, X) -> np.ndarray:
    w, V = eig_sym(X)
    return (V * f(w)) @ V.T


def frechet_d1(f: ScalarFunction, X, A) -> np.ndarray:
    """``Df(X)[A]``: Hadamard product of the first divided differences with ``A`` in the eigenbasis of ``X``."""
    w, V = eig_sym(X)
    Ap = V.T @ np.asarray(A, dtype=np.float64) @ V
    return V @ (_dd_matrix(f, w) * Ap) @ V.T


def frechet_d2(f: ScalarFunction, X, A, B) -> np.ndarray:
    """``D^2 f(X)[A, B]``.

    In the eigenbasis, entry ``(i, l)`` is
    ``sum_j f^[2](x_i, x_j, x_l) (A_ij B_jl + B_ij A_jl)``.
    """
    w, V = eig_sym(X)
    Ap = V.T @ np.asarray(A, dtype=np.float64) @ V
    Bp = V.T @ np.asarray(B, dtype=np.float64) @ V
    K = _dd_tensor(f, w)
    out = np.einsum("ijl,ij,jl->il", K, Ap, Bp) + np.einsum("ijl,ij,jl->il", K, Bp, Ap)
    return V @ out @ V.T


def _gauss_legendre(points: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [0, 1]."""
    x, wts = legendre.leggauss(points)
    return 0.5 * (x + 1.0), 0.5 * wts


def dyson_d1_exp(X, A, quad_points: int = 64) -> np.ndarray:
    """``int_0^1 exp((1-u) X) A exp(u X) du`` by Gauss-Legendre quadrature."""
    if quad_points < 16:
        raise ValueError("quad_points must be >= 16")
    w, V = eig_sym(X)
    u, wt = _gauss_legendre(quad_points)
    Ap = V.T @ np.asarray(A, dtype=np.float64) @ V
    # kernel_ij = sum_q wt_q exp((1-u_q) w_i + u_q w_j)
    E = np.exp((1.0 - u)[:, None, None] * w[None, :, None] + u[:, None, None] * w[None, None, :])
    K = np.tensordot(wt, E, axes=1)
    return V @ (K * Ap) @ V.T


def d2_gauss_integral(X, A, B, quad_points: int = 48) -> np.ndarray:
    """Second derivative of ``exp(-X^2/2)`` from its integral representation.

    Sum of two double integrals over ``(u, v)`` with sandwiched factors
    ``XA + AX`` and ``XB + BX``, and the single integral
    ``-1/2 int exp(-(1-u) X^2/2) (AB + BA) exp(-u X^2/2) du``.
    """
    if quad_points < 16:
        raise ValueError("quad_points must be >= 16")
    w, V = eig_sym(X)
    s = 0.5 * w * w
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    Ap, Bp = V.T @ A @ V, V.T @ B @ V
    CA = (w[:, None] + w[None, :]) * Ap
    CB = (w[:, None] + w[None, :]) * Bp
    u, wu = _gauss_legendre(quad_points)
    v, wv = u, wu
    U, Vv = u[:, None], v[None, :]
    Wuv = wu[:, None] * wv[None, :]
    si, sj, sl = s[:, None, None, None, None], s[None, :, None, None, None], s[None, None, :, None, None]
    # first double integral: (1-u) e^{-(1-u)(1-v) s_i} CB_ij e^{-(1-u) v s_j} CA_jl e^{-u s_l}
    K1 = np.sum(Wuv * (1 - U) * np.exp(-(1 - U) * (1 - Vv) * si - (1 - U) * Vv * sj - U * sl), axis=(-2, -1))
    # second: u e^{-(1-u) s_i} CA_ij e^{-u(1-v) s_j} CB_jl e^{-u v s_l}
    K2 = np.sum(Wuv * U * np.exp(-(1 - U) * si - U * (1 - Vv) * sj - U * Vv * sl), axis=(-2, -1))
    E3 = np.exp(-(1.0 - u)[:, None, None] * s[None, :, None] - u[:, None, None] * s[None, None, :])
    K3 = np.tensordot(wu, E3, axes=1)
    out = 0.25 * np.einsum("ijl,ij,jl->il", K1, CB, CA)
    out += 0.25 * np.einsum("ijl,ij,jl->il", K2, CA, CB)
    out -= 0.5 * K3 * (Ap @ Bp + Bp @ Ap)
    return V @ out @ V.T


# --- symmetric functions of eigenvalues ------------------------------------------

@dataclass(frozen=True)
class MultivariateSymmetricFunction:
    """Permutation-symmetric ``f : R^k -> R`` with partials up to order 3.

    ``grad(x)``, ``hess(x)`` and ``d3(x)`` return arrays of shape (k,),
    (k, k) and (k, k, k).
    """

    value: Callable
    grad: Callable
    hess: Callable
    d3: Callable
    name: str = "custom"
    symmetric: bool = True

    def __call__(self, x):
        return self.value(np.asarray(x, dtype=np.float64))

    @classmethod
    def bentkus(cls) -> "MultivariateSymmetricFunction":
        """``G(x) = prod_i g(x_i)`` with partials as products of ``g``-derivatives."""
        return cls(mol.G, lambda x: _bentkus_partials(x)[0], lambda x: _bentkus_partials(x)[1],
                   lambda x: _bentkus_partials(x)[2], "bentkus")

    @classmethod
    def bentkus_theta(cls, theta: float) -> "MultivariateSymmetricFunction":
        """``G_theta(x) = G(-x / theta)``."""
        if not theta > 0:
            raise ValueError("theta must be positive")

        def parts(x):
            d1, d2, d3 = _bentkus_partials(-np.asarray(x, dtype=np.float64) / theta)
            return -d1 / theta, d2 / theta**2, -d3 / theta**3

        return cls(lambda x: mol.G_theta(x, theta), lambda x: parts(x)[0], lambda x: parts(x)[1],
                   lambda x: parts(x)[2], f"bentkus_theta({theta})")

    @classmethod
    def separable(cls, h: ScalarFunction) -> "MultivariateSymmetricFunction":
        """``f(x) = sum_i h(x_i)``."""

        def d3(x):
            x = np.asarray(x, dtype=np.float64)
            out = np.zeros((x.size,) * 3)
            i = np.arange(x.size)
            out[i, i, i] = h.deriv(3, x)
            return out

        return cls(
            lambda x: float(np.sum(h(np.asarray(x, dtype=np.float64)))),
            lambda x: np.asarray(h.deriv(1, np.asarray(x, dtype=np.float64)), dtype=np.float64),
            lambda x: np.diag(h.deriv(2, np.asarray(x, dtype=np.float64))),
            d3,
            f"sum_{h.id}",
        )


def _bentkus_partials(x):
    """Gradient, Hessian and third-derivative tensor of ``G`` at ``x``.

    Each partial is ``G(x)`` times a product of ratios
    ``g^{(c)}(x_i) / g(x_i)``, which stay finite in the far left tail.
    """
    x = np.asarray(x, dtype=np.float64)
    k = x.size
    Pv = mol.G(x)
    gb = mol.gbar(x)
    r1, r2, r3 = gb, -x * gb, (x * x - 1.0) * gb
    d1 = Pv * r1
    d2 = Pv * np.outer(r1, r1)
    d2[np.diag_indices(k)] = Pv * r2
    d3 = Pv * np.einsum("i,j,l->ijl", r1, r1, r1)
    a, b, c = np.indices((k, k, k))
    ab, bc, ac = a == b, b == c, a == c
    pair = Pv * r2[:, None] * r1[None, :]  # pair[p, q] = P r2_p r1_q
    m = ab & ~bc
    d3[m] = pair[a[m], c[m]]
    m = ac & ~ab
    d3[m] = pair[a[m], b[m]]
    m = bc & ~ab
    d3[m] = pair[b[m], a[m]]
    i = np.arange(k)
    d3[i, i, i] = Pv * r3
    return d1, d2, d3


def _check_gaps(w: np.ndarray, gap_tol: float | None) -> float:
    spread = float(w[0] - w[-1]) if w.size else 0.0
    tol = gap_tol if gap_tol is not None else GAP_TOL * max(spread, 1e-8 * (1.0 + float(np.max(np.abs(w)))))
    return tol


class DegenerateSpectrumError(ValueError):
    """Eigenvalues closer than the gap tolerance."""


def _min_gap(w: np.ndarray) -> float:
    return float(np.min(-np.diff(w))) if w.size > 1 else math.inf


MULTIPLICITIES = (1, 3, 1, 6, 3, 1, 1)


@dataclass(frozen=True)
class SendovTensors:
    """Coefficient tensors of the third derivative of ``f o lambda`` at distinct eigenvalues ``x``.

    ``T[0..5]`` are the six (k, k, k) tensors paired with the monomials
    ``Q_aa Q_bb Q_cc``, ``Q_ab^2 Q_cc``, ``Q_ac^2 Q_bb``, ``Q_aa Q_bc^2``,
    ``Q_ab Q_bc Q_ca`` and ``Q_ac Q_ba Q_cb`` (one per permutation of three
    slots). ``seven`` holds the coefficient arrays of the grouped seven-term
    form, whose terms enter with multiplicities :data:`MULTIPLICITIES`.
    """

    x: np.ndarray
    T: tuple
    seven: tuple

    def contract(self, Q: np.ndarray) -> float:
        d = np.diag(Q)
        T1, T2, T3, T4, T5, T6 = self.T
        s = np.einsum("abc,a,b,c->", T1, d, d, d)
        s += np.einsum("abc,ab,c->", T2, Q * Q, d)
        s += np.einsum("abc,ac,b->", T3, Q * Q, d)
        s += np.einsum("abc,a,bc->", T4, d, Q * Q)
        s += np.einsum("abc,ab,bc,ca->", T5, Q, Q, Q)
        s += np.einsum("abc,ac,ba,cb->", T6, Q, Q, Q)
        return float(s)

    def seven_terms(self, Q: np.ndarray) -> np.ndarray:
        """Values of the seven grouped terms (before multiplicities)."""
        d = np.diag(Q)
        C1, C2, C3, C4, C5, C6, C7 = self.seven
        return np.array([
            float(np.sum(C1 * d**3)),
            float(np.einsum("ab,a,b->", C2, d * d, d)),
            float(np.einsum("abc,a,b,c->", C3, d, d, d)),
            float(np.einsum("ab,b,ba->", C4, d, Q * Q)),
            float(np.einsum("abc,ab,c->", C5, Q * Q, d)),
            float(np.einsum("abc,ab,bc,ca->", C6, Q, Q, Q)),
            float(np.einsum("abc,ac,ba,cb->", C7, Q, Q, Q)),
        ])


def sendov_tensors(f: MultivariateSymmetricFunction, x, gap_tol: float | None = None) -> SendovTensors:
    """Build the third-derivative coefficient tensors at the eigenvalue vector ``x``.

    Raises :class:`DegenerateSpectrumError` when two entries of ``x`` are
    closer than ``gap_tol`` (default ``1e-5`` times the spread).
    """
    x = np.asarray(x, dtype=np.float64)
    order = np.argsort(-x, kind="stable")
    tol = _check_gaps(x[order], gap_tol)
    if _min_gap(x[order]) < tol:
        raise DegenerateSpectrumError(f"eigenvalue gap {_min_gap(x[order]):.3e} below tolerance {tol:.3e}")
    k = x.size
    d1, d2, d3 = f.grad(x), f.hess(x), f.d3(x)
    a, b, c = np.indices((k, k, k))
    ab, bc, ac = a == b, b == c, a == c
    distinct = ~ab & ~bc & ~ac
    xa, xb, xc = x[a], x[b], x[c]

    def q(num, den, mask):
        # num / den where mask holds, 0 elsewhere (den is replaced off-mask)
        return np.where(mask, num / np.where(mask, den, 1.0), 0.0)

    D1a, D1b, D1c = d1[a], d1[b], d1[c]
    T2 = np.zeros((k, k, k))
    m = bc & ~ab
    T2 += q(d2[c, c] - d2[a, c], xc - xa, m) - q(D1c - D1a, (xc - xa) ** 2, m)
    m = ac & ~ab
    T2 += q(d2[b, c] - d2[c, c], xb - xc, m) + q(D1b - D1c, (xb - xc) ** 2, m)
    T2 += q(d2[b, c] - d2[a, c], xb - xa, distinct)
    T3 = q(d2[c, b] - d2[a, b], xc - xa, ~ac)
    T4 = q(d2[c, a] - d2[b, a], xc - xb, ~bc)
    cyc_a = q(D1c - D1a, (xc - xb) * (xc - xa), distinct) - q(D1b - D1a, (xc - xb) * (xb - xa), distinct)
    cyc_b = q(D1b - D1c, (xc - xa) * (xb - xc), distinct) - q(D1b - D1a, (xc - xa) * (xb - xa), distinct)
    T5 = q(D1b - D1a, (xb - xa) ** 2, ~bc & ac) + q(D1c - D1a, (xc - xa) ** 2, ab & ~bc) + cyc_a
    T6 = -q(D1b - D1a, (xb - xa) ** 2, ~ac & bc) + q(D1c - D1b, (xc - xb) ** 2, ab & ~ac) + cyc_b

    i = np.arange(k)
    C1 = d3[i, i, i].copy()
    A2, B2 = np.indices((k, k))
    off = A2 != B2
    C2 = np.where(off, d3[A2, B2, A2], 0.0)
    C3 = np.where(distinct, d3, 0.0)
    dx = x[B2] - x[A2]
    C4 = q(d2[B2, B2] - d2[A2, B2], dx, off) - q(d1[B2] - d1[A2], dx**2, off)
    C5 = q(d2[b, c] - d2[a, c], xb - xa, distinct)
    return SendovTensors(x, (d3, T2, T3, T4, T5, T6), (C1, C2, C3, C4, C5, cyc_a, cyc_b))


def _spectral_setup(X, jitter: bool, gap_tol: float | None, rng_seed: int):
    w, V = eig_sym(X)
    tol = _check_gaps(w, gap_tol)
    if _min_gap(w) < tol:
        if not jitter:
            raise DegenerateSpectrumError(f"eigenvalue gap {_min_gap(w):.3e} below tolerance {tol:.3e}")
        # push eigenvalues apart by an arithmetic progression, then a small random tilt
        rng = np.random.default_rng(rng_seed)
        step = 2.0 * tol
        w = w - step * np.arange(w.size) - 0.1 * step * rng.random(w.size)
    return w, V


def spectral_d1(f: MultivariateSymmetricFunction, X, H) -> float:
    """``D(f o lambda)(X)[H] = sum_i grad_i Q_ii`` with ``Q = V^T H V``."""
    w, V = eig_sym(X)
    Q = V.T @ np.asarray(H, dtype=np.float64) @ V
    return float(np.dot(f.grad(w), np.diag(Q)))


def spectral_d2(f: MultivariateSymmetricFunction, X, H, jitter: bool = False, gap_tol: float | None = None) -> float:
    """``D^2(f o lambda)(X)[H, H]``: Hessian on the diagonal of ``Q`` plus gradient quotients on ``Q_ij^2``."""
    w, V = _spectral_setup(X, jitter, gap_tol, 0)
    Q = V.T @ np.asarray(H, dtype=np.float64) @ V
    d = np.diag(Q)
    g1 = f.grad(w)
    k = w.size
    off = ~np.eye(k, dtype=bool)
    dx = w[:, None] - w[None, :]
    quot = np.where(off, (g1[:, None] - g1[None, :]) / np.where(off, dx, 1.0), 0.0)
    return float(d @ f.hess(w) @ d + np.sum(quot * Q * Q))


def frechet_d3_spectral(
    f: MultivariateSymmetricFunction,
    X,
    H,
    jitter: bool = False,
    gap_tol: float | None = None,
    rng_seed: int = 0,
) -> float:
    """``D^3(f o lambda)(X)[H, H, H]``.

    Diagonalises ``X = V diag(x) V^T``, rotates ``Q = V^T H V`` and
    contracts the six coefficient tensors of :func:`sendov_tensors`.
    With ``jitter=True`` a degenerate spectrum is split apart first.
    """
    w, V = _spectral_setup(X, jitter, gap_tol, rng_seed)
    Q = V.T @ as_sym(H) @ V
    return sendov_tensors(f, w, gap_tol=0.0 if jitter else gap_tol).contract(Q)


# --- finite-difference oracles ---------------------------------------------------

class FDResult(NamedTuple):
    value: float | np.ndarray
    error_estimate: float


_STENCILS = {
    1: ((-2, 1 / 12), (-1, -8 / 12), (1, 8 / 12), (2, -1 / 12)),
    2: ((-2, -1 / 12), (-1, 16 / 12), (0, -30 / 12), (1, 16 / 12), (2, -1 / 12)),
    3: ((-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)),
}
_STENCIL_ORDER = {1: 4, 2: 4, 3: 2}


def fd_directional(phi: Callable[[float], np.ndarray], order: int, h: float) -> FDResult:
    """Central-difference estimate of ``phi^{(order)}(0)`` with one Richardson step."""
    if order not in _STENCILS:
        raise ValueError("order must be 1, 2 or 3")

    def D(step):
        return sum(c * np.asarray(phi(j * step), dtype=np.float64) for j, c in _STENCILS[order]) / step**order

    coarse, fine = D(h), D(h / 2)
    p = 2 ** _STENCIL_ORDER[order]
    val = fine + (fine - coarse) / (p - 1)
    err = float(np.max(np.abs(val - fine)))
    return FDResult(float(val) if np.ndim(val) == 0 else val, err)


def default_fd_step(X, H, order: int) -> float:
    base = 5e-3 if order == 3 else 1e-3
    nh = spectral_norm(H)
    return base * (1.0 + spectral_norm(X)) / nh if nh > 0 else base


def fd_spectral_oracle(F: Callable, X, H, order: int, h: float | None = None) -> FDResult:
    """``d^order/dt^order F(X + t H)`` at ``t = 0`` for a scalar- or matrix-valued ``F``."""
    X = np.asarray(X, dtype=np.float64)
    H = np.asarray(H, dtype=np.float64)
    if h is None:
        h = default_fd_step(X, H, order)
    return fd_directional(lambda t: F(X + t * H), order, h)


def spectral_function(f: MultivariateSymmetricFunction) -> Callable:
    """``X -> f(lambda(X))``."""
    return lambda X: f(eig_sym(X).eigenvalues)


# --- derivative bound ------------------------------------------------------------

@dataclass(frozen=True)
class DerivativeReport:
    analytic_value: float
    fd_value: float
    rel_error: float
    bound_value: float
    ratio: float


def bentkus_d3_bound_check(X, H, theta: float, alpha: float, fd: bool = True) -> DerivativeReport:
    """Compare ``|D^3 Psi_theta(X + alpha I)[H, H, H]|`` with ``(Delta^2 + alpha^2) / theta^3 * ln(k)^3 * ||H||^3``.

    ``Delta = max(1, ||X||)``; the comparison constant is 1, so ``ratio``
    is the empirical constant for this instance.
    """
    X = as_sym(X)
    H = as_sym(H)
    k = X.shape[0]
    f = MultivariateSymmetricFunction.bentkus_theta(theta)
    Y = X + alpha * np.eye(k)
    val = frechet_d3_spectral(f, Y, H, jitter=True)
    if fd and spectral_norm(H) > 0:
        fdv = float(fd_spectral_oracle(spectral_function(f), Y, H, 3).value)
    else:
        fdv = val
    delta = max(1.0, spectral_norm(X))
    bound = (delta**2 + alpha**2) / theta**3 * math.log(k) ** 3 * spectral_norm(H) ** 3
    ratio = abs(val) / bound if bound > 0 else (0.0 if val == 0 else math.inf)
    return DerivativeReport(val, fdv, abs(val - fdv) / max(1.0, abs(fdv)), bound, ratio)
