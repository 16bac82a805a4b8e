import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from spectraprg.gf2 import (
    IRREDUCIBLE,
    clmul,
    field_poly,
    gf2a_eval_poly,
    gf2a_mul,
    gf2a_pow,
    has_factor_trial,
    is_irreducible_rabin,
    poly_eval_batch,
    poly_mod,
)


def _ref_mul(x, y, a, p):
    """Schoolbook shift-and-add multiply with reduction after every shift."""
    acc = 0
    for _ in range(a):
        if y & 1:
            acc ^= x
        y >>= 1
        x <<= 1
        if x >> a & 1:
            x ^= p
    return acc


def _as_sympy(p):
    x = sympy.Symbol("x")
    return sympy.Poly(sum(x**i for i in range(p.bit_length()) if p >> i & 1), x, modulus=2)


@pytest.mark.parametrize("a", sorted(IRREDUCIBLE))
def test_table_irreducible(a):
    p = IRREDUCIBLE[a]
    assert p.bit_length() == a + 1
    assert _as_sympy(p).is_irreducible
    assert is_irreducible_rabin(p)


def test_reducible_detected():
    for p in (0b101, 0b1111, 0b10001, 0x11D ^ 0x2):
        assert _as_sympy(p).is_irreducible == is_irreducible_rabin(p)
    assert has_factor_trial(0b101)          # (x+1)^2
    assert not has_factor_trial(0b111)


def test_field_poly_range():
    with pytest.raises(ValueError):
        field_poly(0)
    with pytest.raises(ValueError):
        field_poly(33)


def test_clmul_and_mod():
    assert clmul(0b11, 0b11) == 0b101
    assert poly_mod(0b10000, 0b10011) == 0b0011


@settings(max_examples=200, deadline=None)
@given(a=st.integers(1, 32), data=st.data())
def test_mul_matches_reference(a, data):
    x = data.draw(st.integers(0, (1 << a) - 1))
    y = data.draw(st.integers(0, (1 << a) - 1))
    assert gf2a_mul(x, y, a) == _ref_mul(x, y, a, field_poly(a))


@pytest.mark.parametrize("a", [2, 3, 4, 8])
def test_multiplicative_group(a):
    # every nonzero element satisfies x^(2^a - 1) = 1 and has an inverse
    for x in range(1, 1 << a):
        assert gf2a_pow(x, (1 << a) - 1, a) == 1
        assert gf2a_mul(x, gf2a_pow(x, (1 << a) - 2, a), a) == 1


def test_eval_poly_examples():
    assert gf2a_eval_poly([0, 0, 0], 5, 4) == 0
    assert all(gf2a_eval_poly([7], p, 4) == 7 for p in range(16))
    assert gf2a_eval_poly([0, 0, 1], 0b0010, 4) == 0b0100
    with pytest.raises(ValueError):
        gf2a_eval_poly([16], 0, 4)


def test_eval_batch_matches_scalar(rng):
    a = 7
    coeffs = rng.integers(0, 1 << a, size=(20, 5), dtype=np.uint64)
    points = np.arange(1 << a, dtype=np.uint64)
    got = poly_eval_batch(coeffs, points, a)
    for i in range(20):
        for j in (0, 1, 5, 77, 127):
            # independent Horner with the reference multiply
            acc = 0
            for c in reversed(coeffs[i].tolist()):
                acc = _ref_mul(acc, j, a, field_poly(a)) ^ c
            assert int(got[i, j]) == acc
