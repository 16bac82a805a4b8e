"""Gaussian-CDF product mollifier for the non-positive orthant.

``G(x) = prod_i g(x_i)`` with ``g`` the standard normal CDF, and
``G_theta(x) = G(-x / theta)`` is the probability that ``x + theta * g``
lies in the orthant ``{y <= 0}`` for a standard Gaussian vector ``g``.
Shifting the argument by ``+-alpha`` sandwiches the orthant indicator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfcx, log_ndtr, ndtr

from .linalg import eigvals_sym

INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
SQRT2 = math.sqrt(2.0)
SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)


def g(x):
    """Standard normal CDF."""
    return ndtr(x)


def log_g(x):
    """``log g(x)``, accurate in the far left tail."""
    return log_ndtr(x)


def g_derivs(x):
    """``(g', g'', g''')`` at ``x``: ``phi``, ``-x phi``, ``(x^2 - 1) phi``."""
    x = np.asarray(x, dtype=np.float64)
    phi = INV_SQRT_2PI * np.exp(-0.5 * x * x)
    return phi, -x * phi, (x * x - 1.0) * phi


def gbar(x):
    """``g'(x) / g(x)``.

    Written as ``sqrt(2/pi) / erfcx(-x / sqrt(2))``: the scaled
    complementary error function carries the ``exp(-x^2/2)`` factor of
    both numerator and denominator, so nothing underflows in the left tail
    and the ratio keeps full relative precision everywhere.
    """
    x = np.asarray(x, dtype=np.float64)
    out = SQRT_2_OVER_PI / erfcx(-x / SQRT2)
    return out[()] if out.ndim == 0 else out


def gbar_d1(x):
    """``gbar'(x) = -(x + gbar) gbar``."""
    x = np.asarray(x, dtype=np.float64)
    gb = gbar(x)
    return -(x + gb) * gb


def gbar_d2(x):
    """``gbar''(x) = (x^2 - 1) gbar + 3 x gbar^2 + 2 gbar^3``."""
    x = np.asarray(x, dtype=np.float64)
    gb = gbar(x)
    return (x * x - 1.0) * gb + 3.0 * x * gb**2 + 2.0 * gb**3


def log_G(x):
    """``sum_i log g(x_i)`` over the last axis, summed in sorted order."""
    logs = np.sort(log_ndtr(np.asarray(x, dtype=np.float64)), axis=-1)
    out = np.sum(logs, axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def G(x):
    """``prod_i g(x_i)`` over the last axis, evaluated as ``exp(log_G)``."""
    out = np.exp(log_G(x))
    return float(out) if np.ndim(out) == 0 else out


def G_theta(x, theta: float):
    """``G(-x / theta)``."""
    if not theta > 0:
        raise ValueError("theta must be positive")
    return G(-np.asarray(x, dtype=np.float64) / theta)


def psi(x) -> int:
    """Indicator of ``max_i x_i <= 0``."""
    return int(np.max(np.asarray(x)) <= 0.0)


def Psi_theta(M, theta: float) -> float:
    """``G_theta`` of the eigenvalues of a symmetric matrix."""
    return G_theta(eigvals_sym(M), theta)


def bentkus_norm1(x, order: int) -> float:
    """Sum of absolute values of all order-``t`` partials of ``G`` at ``x``.

    The sum runs over ordered index tuples ``(p_1, ..., p_t)``. A partial
    with index multiplicities ``c_i`` factors as ``prod_i g^{(c_i)}(x_i)``,
    so dividing by ``G`` leaves ratios ``r_c(x_i) = |g^{(c)}(x_i)| / g(x_i)``
    and the tuple sum becomes a polynomial in their power sums.
    """
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if order not in (1, 2, 3):
        raise ValueError("order must be 1, 2 or 3")
    gb = gbar(x)
    r1 = gb
    r2 = np.abs(x) * gb
    r3 = np.abs(x * x - 1.0) * gb
    s1 = math.fsum(r1)
    if order == 1:
        total = s1
    elif order == 2:
        total = s1 * s1 - math.fsum(r1 * r1) + math.fsum(r2)
    else:
        s2 = math.fsum(r1 * r1)
        s3 = math.fsum(r1**3)
        distinct = s1**3 - 3.0 * s1 * s2 + 2.0 * s3
        pairs = 3.0 * (math.fsum(r2) * s1 - math.fsum(r2 * r1))
        total = distinct + pairs + math.fsum(r3)
    return G(x) * total


@dataclass(frozen=True)
class MollifierParams:
    """Smoothing scale ``theta`` and the shifts derived from it.

    ``alpha = c_shift * theta * sqrt(ln(k / delta))`` and
    ``Lambda = c_lambda * theta * sqrt(ln(k / delta))``; ``c_lambda``
    defaults to ``2 * c_shift`` so that ``Lambda - alpha`` leaves room for
    the Gaussian tail.
    """

    k: int
    theta: float
    delta: float
    c_shift: float = 2.0
    c_lambda: float | None = None

    def __post_init__(self):
        if self.k < 1 or not self.theta > 0 or not 0 < self.delta < 1:
            raise ValueError("need k >= 1, theta > 0, 0 < delta < 1")
        if self.c_shift <= 0:
            raise ValueError("c_shift must be positive")
        if self.c_lambda is None:
            object.__setattr__(self, "c_lambda", 2.0 * self.c_shift)
        if self.c_lambda <= 0:
            raise ValueError("c_lambda must be positive")

    @property
    def _scale(self) -> float:
        return self.theta * math.sqrt(max(math.log(self.k / self.delta), 0.0))

    @property
    def alpha(self) -> float:
        return self.c_shift * self._scale

    @property
    def Lambda(self) -> float:
        return self.c_lambda * self._scale


@dataclass(frozen=True)
class SandwichReport:
    region: str  # "inner" (max x <= -Lambda), "outer" (max x >= Lambda) or "shell"
    clause1_ok: bool | None
    clause2_ok: bool | None
    lower_ok: bool
    upper_ok: bool

    @property
    def passed(self) -> bool:
        return self.lower_ok and self.upper_ok and self.clause1_ok is not False and self.clause2_ok is not False


def sandwich_check(params: MollifierParams, x) -> SandwichReport:
    """Check the approximation and sandwich inequalities of ``G_theta`` at ``x``.

    Deep inside the orthant ``G_theta(x + alpha)`` must be within ``delta``
    of 1; far outside ``G_theta(x - alpha)`` must be within ``delta`` of 0;
    everywhere ``G_theta(x + alpha) - delta <= psi(x) <= G_theta(x - alpha) + delta``.
    Clauses that do not apply to the region of ``x`` are reported as None.
    """
    x = np.asarray(x, dtype=np.float64)
    mx = float(np.max(x))
    p = psi(x)
    hi = G_theta(x + params.alpha, params.theta)
    lo = G_theta(x - params.alpha, params.theta)
    c1 = c2 = None
    if mx <= -params.Lambda:
        region, c1 = "inner", abs(hi - 1.0) <= params.delta
    elif mx >= params.Lambda:
        region, c2 = "outer", abs(lo) <= params.delta
    else:
        region = "shell"
    return SandwichReport(region, c1, c2, hi - params.delta <= p, p <= lo + params.delta)
