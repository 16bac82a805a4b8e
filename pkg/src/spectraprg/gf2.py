"""Arithmetic in GF(2^a) for 1 <= a <= 32.

Field elements are Python ints (or uint64 arrays) below ``2^a``; the
element with integer value ``v`` is the polynomial whose coefficient of
``x^i`` is bit ``i`` of ``v``. Each field is fixed by one irreducible
polynomial from :data:`IRREDUCIBLE`, given with its leading bit.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from ._backend import kernels

#: Irreducible polynomial of each degree (lowest-weight choice: trinomial
#: where one exists, else pentanomial).
IRREDUCIBLE: dict[int, int] = {
    1: 0x3, 2: 0x7, 3: 0xB, 4: 0x13, 5: 0x25, 6: 0x43, 7: 0x83, 8: 0x11B,
    9: 0x203, 10: 0x409, 11: 0x805, 12: 0x1009, 13: 0x201B, 14: 0x4021,
    15: 0x8003, 16: 0x1002B, 17: 0x20009, 18: 0x40009, 19: 0x80027,
    20: 0x100009, 21: 0x200005, 22: 0x400003, 23: 0x800021, 24: 0x100001B,
    25: 0x2000009, 26: 0x400001B, 27: 0x8000027, 28: 0x10000003,
    29: 0x20000005, 30: 0x40000003, 31: 0x80000009, 32: 0x10000008D,
}

MAX_DEGREE = 32


def field_poly(a: int) -> int:
    """The modulus of GF(2^a)."""
    try:
        return IRREDUCIBLE[int(a)]
    except KeyError:
        raise ValueError(f"field exponent a={a} outside the supported range 1..{MAX_DEGREE}") from None


def _check_elements(values, a: int) -> None:
    arr = np.asarray(values, dtype=object).ravel()
    for v in arr:
        if not 0 <= int(v) < (1 << a):
            raise ValueError(f"{v} is not an element of GF(2^{a})")


def clmul(x: int, y: int) -> int:
    """Carry-less product of two bit-polynomials."""
    r = 0
    while y:
        if y & 1:
            r ^= x
        y >>= 1
        x <<= 1
    return r


def poly_mod(x: int, p: int) -> int:
    """Remainder of bit-polynomial ``x`` modulo ``p``."""
    dp = p.bit_length() - 1
    while x.bit_length() - 1 >= dp:
        x ^= p << (x.bit_length() - 1 - dp)
    return x


def poly_gcd(x: int, y: int) -> int:
    while y:
        x, y = y, poly_mod(x, y)
    return x


def gf2a_mul(x: int, y: int, a: int) -> int:
    """Product in GF(2^a)."""
    p = field_poly(a)
    _check_elements([x, y], a)
    return int(kernels.gf_mul(x, y, a, p))


def gf2a_pow(x: int, e: int, a: int) -> int:
    p = field_poly(a)
    r, base = 1, x
    while e:
        if e & 1:
            r = int(kernels.gf_mul(r, base, a, p))
        base = int(kernels.gf_mul(base, base, a, p))
        e >>= 1
    return r


def gf2a_eval_poly(coeffs: Sequence[int], point: int, a: int) -> int:
    """Horner evaluation of ``sum_j coeffs[j] * point^j`` in GF(2^a).

    Parameters
    ----------
    coeffs : sequence of int
        Coefficients, lowest degree first. Empty means the zero polynomial.
    point : int
        Evaluation point.
    a : int
        Field exponent, ``1 <= a <= 32``.
    """
    p = field_poly(a)
    _check_elements(list(coeffs) + [point], a)
    acc = 0
    for c in reversed(list(coeffs)):
        acc = int(kernels.gf_mul(acc, point, a, p)) ^ int(c)
    return acc


def poly_eval_batch(coeffs: np.ndarray, points: np.ndarray, a: int) -> np.ndarray:
    """Evaluate N polynomials (rows of ``coeffs``) at every point; returns (N, P) uint64."""
    return kernels.poly_eval_batch(
        np.ascontiguousarray(coeffs, dtype=np.uint64),
        np.ascontiguousarray(points, dtype=np.uint64),
        a,
        field_poly(a),
    )


def is_irreducible_rabin(p: int) -> bool:
    """Rabin's test: ``x^(2^d) = x mod p`` and ``gcd(x^(2^(d/q)) - x, p) = 1`` for primes ``q | d``."""
    d = p.bit_length() - 1
    if d < 1:
        return False

    def mulmod(u, v):
        return poly_mod(clmul(u, v), p)

    def x_pow_2pow(e):
        r = poly_mod(0b10, p)
        for _ in range(e):
            r = mulmod(r, r)
        return r

    x = poly_mod(0b10, p)
    for q in _prime_factors(d):
        if poly_gcd(p, x_pow_2pow(d // q) ^ x) != 1:
            return False
    return x_pow_2pow(d) == x


def has_factor_trial(p: int) -> bool:
    """Exhaustive trial division by every polynomial of degree 1..deg(p)/2."""
    d = p.bit_length() - 1
    for q in range(2, 1 << (d // 2 + 1)):
        if poly_mod(p, q) == 0:
            return True
    return False


def _prime_factors(n: int) -> list[int]:
    out, q = [], 2
    while q * q <= n:
        if n % q == 0:
            out.append(q)
            while n % q == 0:
                n //= q
        q += 1
    if n > 1:
        out.append(n)
    return out
