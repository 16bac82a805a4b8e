"""Bounded-independence bit generators, hash families, and their composition.

A :class:`KWiseBitGenerator` outputs the low bits of a random degree-(w-1)
polynomial over GF(2^a) at the points 0, 1, ..., m-1; any w of the outputs
are exactly uniform. A :class:`HashFamily` does the same with the top bits
to map ``[n] -> [t]``. :class:`MZGenerator` buckets the coordinates with a
hash and fills each bucket from its own bit generator.

Because every output bit is a GF(2)-linear function of the seed bits, the
exact output distribution of the composed generator can be computed from
linear images rather than by running through all seeds; see
:func:`prg_accept_prob_exact`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, NamedTuple

import numpy as np

from ._backend import kernels
from .gf2 import field_poly, gf2a_pow, poly_eval_batch

SEED_BATCH = 1 << 15


def _ceil_log2(x: int) -> int:
    return max(0, (int(x) - 1).bit_length())


def _check_seed(seed, w: int, a: int, what: str) -> tuple:
    seed = tuple(int(c) for c in seed)
    if len(seed) != w:
        raise ValueError(f"{what} seed has {len(seed)} elements, expected {w}")
    if any(not 0 <= c < (1 << a) for c in seed):
        raise ValueError(f"{what} seed element outside GF(2^{a})")
    return seed


@dataclass(frozen=True)
class KWiseBitGenerator:
    """w-wise uniform generator of m signs from a polynomial over GF(2^a)."""

    m: int
    w: int
    seed: tuple = ()
    a: int | None = None

    def __post_init__(self):
        if self.m < 1 or self.w < 0:
            raise ValueError("need m >= 1 and w >= 0")
        a = self.a if self.a is not None else max(1, _ceil_log2(self.m))
        if (1 << a) < self.m:
            raise ValueError(f"GF(2^{a}) has fewer than m={self.m} points")
        field_poly(a)
        object.__setattr__(self, "a", a)
        seed = self.seed if self.seed else (0,) * self.w
        object.__setattr__(self, "seed", _check_seed(seed, self.w, a, "bit generator"))

    @property
    def seed_bits(self) -> int:
        return self.w * self.a


def kwise_bits(gen: KWiseBitGenerator) -> np.ndarray:
    """Signs ``(-1)^{LSB p(i)}`` for field points ``i = 0..m-1``, as int8."""
    coeffs = np.array([gen.seed], dtype=np.uint64).reshape(1, gen.w)
    v = poly_eval_batch(coeffs, np.arange(gen.m, dtype=np.uint64), gen.a)[0]
    return (1 - 2 * (v & np.uint64(1)).astype(np.int8)).astype(np.int8)


@dataclass(frozen=True)
class HashFamily:
    """w-wise uniform hash ``[n] -> [t_pow2]`` from a polynomial over GF(2^b)."""

    n: int
    t_pow2: int
    w: int
    seed: tuple = ()
    b: int | None = None

    def __post_init__(self):
        if self.n < 1 or self.t_pow2 < 1 or self.t_pow2 & (self.t_pow2 - 1):
            raise ValueError("need n >= 1 and t_pow2 a power of two")
        b = self.b if self.b is not None else max(_ceil_log2(self.n), self.log2t, 1)
        if (1 << b) < max(self.n, self.t_pow2):
            raise ValueError(f"GF(2^{b}) too small for n={self.n}, t={self.t_pow2}")
        field_poly(b)
        object.__setattr__(self, "b", b)
        seed = self.seed if self.seed else (0,) * self.w
        object.__setattr__(self, "seed", _check_seed(seed, self.w, b, "hash"))

    @property
    def log2t(self) -> int:
        return self.t_pow2.bit_length() - 1

    @property
    def seed_bits(self) -> int:
        return self.w * self.b


def hash_eval(h: HashFamily, i: int) -> int:
    """Bucket (1-based) of index ``i`` (1-based): top ``log2 t`` bits of the hash polynomial at element ``i - 1``."""
    if not 1 <= i <= h.n:
        raise IndexError(f"index {i} outside [1, {h.n}]")
    if h.log2t == 0:
        return 1
    coeffs = np.array([h.seed], dtype=np.uint64).reshape(1, h.w)
    v = int(poly_eval_batch(coeffs, np.array([i - 1], dtype=np.uint64), h.b)[0, 0])
    return (v >> (h.b - h.log2t)) + 1


class MZSeed(NamedTuple):
    hash: tuple
    blocks: tuple


@dataclass(frozen=True)
class MZGenerator:
    """Hash-then-fill generator on ``{-1,+1}^n``.

    Parameters
    ----------
    n, k : int
        Number of output coordinates and matrix dimension of the target class.
    tau : float
        Regularity parameter; the number of buckets is ``ceil(1/tau)``
        rounded up to a power of two.
    w : int, optional
        Independence order of both the hash and the block generators.
        Defaults to ``80 * ceil(log2 k)`` (at least 1).
    """

    n: int
    k: int
    tau: float
    w: int | None = None

    def __post_init__(self):
        if self.n < 1 or self.k < 1:
            raise ValueError("need n >= 1 and k >= 1")
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        w = self.w if self.w is not None else max(1, 80 * _ceil_log2(self.k))
        if w < 1:
            raise ValueError("w must be >= 1")
        object.__setattr__(self, "w", int(w))
        field_poly(self.a)
        field_poly(self.b)

    @property
    def t(self) -> int:
        return 1 << _ceil_log2(math.ceil(1.0 / self.tau - 1e-12))

    @property
    def log2t(self) -> int:
        return self.t.bit_length() - 1

    @property
    def b(self) -> int:
        """Hash field exponent."""
        return max(_ceil_log2(self.n), self.log2t, 1)

    @property
    def a(self) -> int:
        """Block field exponent (each block supplies up to n bits)."""
        return max(1, _ceil_log2(self.n))

    @property
    def hash_bits(self) -> int:
        return self.w * self.b

    @property
    def block_bits(self) -> int:
        return self.w * self.a

    def hash_family(self, seed=()) -> HashFamily:
        return HashFamily(self.n, self.t, self.w, tuple(seed), self.b)

    def block(self, seed=()) -> KWiseBitGenerator:
        return KWiseBitGenerator(self.n, self.w, tuple(seed), self.a)


def seed_length(g: MZGenerator) -> int:
    """Total seed bits ``r = w*b + t*w*a``."""
    return g.hash_bits + g.t * g.block_bits


def _validate_seed(g: MZGenerator, seed) -> MZSeed:
    h, blocks = seed
    if len(blocks) != g.t:
        raise ValueError(f"expected {g.t} block seeds, got {len(blocks)}")
    return MZSeed(_check_seed(h, g.w, g.b, "hash"), tuple(_check_seed(z, g.w, g.a, "block") for z in blocks))


def mz_generate_batch(g: MZGenerator, hash_coeffs: np.ndarray, block_coeffs: np.ndarray) -> np.ndarray:
    """Outputs for N seeds given as (N, w) hash and (N, t, w) block coefficient arrays."""
    return kernels.mz_expand_batch(
        np.ascontiguousarray(hash_coeffs, dtype=np.uint64),
        np.ascontiguousarray(block_coeffs, dtype=np.uint64),
        g.n, g.b, field_poly(g.b), g.a, field_poly(g.a), g.log2t,
    )


def mz_generate(g: MZGenerator, seed_tuple) -> np.ndarray:
    """Output in ``{-1,+1}^n`` (int8) for one seed ``(hash_seed, (block_1, ..., block_t))``.

    Coordinate j goes to bucket ``h(j)`` and takes the next unused bit of
    that bucket's generator, scanning j in increasing order.
    """
    s = _validate_seed(g, seed_tuple)
    hc = np.array([s.hash], dtype=np.uint64).reshape(1, g.w)
    bc = np.array([s.blocks], dtype=np.uint64).reshape(1, g.t, g.w)
    return mz_generate_batch(g, hc, bc)[0]


# --- serialization -----------------------------------------------------------

def _layout(g: MZGenerator) -> list[int]:
    """Bit width of each seed element in serialization order."""
    return [g.b] * g.w + [g.a] * (g.t * g.w)


def seed_to_int(g: MZGenerator, seed_tuple) -> int:
    s = _validate_seed(g, seed_tuple)
    out = 0
    for v, width in zip(list(s.hash) + [c for z in s.blocks for c in z], _layout(g)):
        out = (out << width) | v
    return out


def seed_from_int(g: MZGenerator, value: int) -> MZSeed:
    r = seed_length(g)
    if not 0 <= value < (1 << r):
        raise ValueError(f"seed integer outside [0, 2^{r})")
    elems = []
    shift = r
    for width in _layout(g):
        shift -= width
        elems.append((value >> shift) & ((1 << width) - 1))
    h = tuple(elems[: g.w])
    rest = elems[g.w:]
    return MZSeed(h, tuple(tuple(rest[i * g.w:(i + 1) * g.w]) for i in range(g.t)))


def seed_to_bits(g: MZGenerator, seed_tuple) -> str:
    """Seed as a string of exactly ``seed_length(g)`` binary digits."""
    return format(seed_to_int(g, seed_tuple), f"0{seed_length(g)}b")


def seed_to_hex(g: MZGenerator, seed_tuple) -> str:
    """Hex serialization: every element zero-padded to ``ceil(width/4)`` digits, hash first."""
    s = _validate_seed(g, seed_tuple)
    hw, bw = -(-g.b // 4), -(-g.a // 4)
    return "".join(format(v, f"0{hw}x") for v in s.hash) + "".join(
        format(v, f"0{bw}x") for z in s.blocks for v in z
    )


def seed_from_hex(g: MZGenerator, text: str) -> MZSeed:
    hw, bw = -(-g.b // 4), -(-g.a // 4)
    if len(text) != g.w * hw + g.t * g.w * bw:
        raise ValueError("hex seed has the wrong length")
    h = tuple(int(text[i * hw:(i + 1) * hw], 16) for i in range(g.w))
    off = g.w * hw
    blocks = tuple(
        tuple(int(text[off + (i * g.w + e) * bw: off + (i * g.w + e + 1) * bw], 16) for e in range(g.w))
        for i in range(g.t)
    )
    return _validate_seed(g, MZSeed(h, blocks))


# --- seed enumeration ---------------------------------------------------------

def _decode_ints(g: MZGenerator, ints: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split seed integers (uint64, r <= 64) into hash and block coefficient arrays."""
    ints = ints.astype(np.uint64)
    cols = []
    shift = seed_length(g)
    for width in _layout(g):
        shift -= width
        cols.append((ints >> np.uint64(shift)) & np.uint64((1 << width) - 1))
    arr = np.stack(cols, axis=1) if cols else np.zeros((ints.size, 0), np.uint64)
    return arr[:, : g.w].copy(), arr[:, g.w:].reshape(-1, g.t, g.w).copy()


def seed_batches(g: MZGenerator, cap: int, rng_seed: int = 0, batch: int = SEED_BATCH
                 ) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Seeds as coefficient arrays, in batches; same order as :func:`enumerate_or_sample_seeds`.

    All ``2^r`` seeds in increasing integer order if ``2^r <= cap``,
    otherwise ``cap`` uniform seeds drawn from ``default_rng(rng_seed)``.
    """
    if cap < 1:
        raise ValueError("cap must be >= 1")
    r = seed_length(g)
    if r < 63 and (1 << r) <= cap:
        total = 1 << r
        for start in range(0, total, batch):
            yield _decode_ints(g, np.arange(start, min(total, start + batch), dtype=np.uint64))
        return
    rng = np.random.default_rng(rng_seed)
    for start in range(0, cap, batch):
        size = min(batch, cap - start)
        hc = rng.integers(0, 1 << g.b, size=(size, g.w), dtype=np.uint64)
        bc = rng.integers(0, 1 << g.a, size=(size, g.t, g.w), dtype=np.uint64)
        yield hc, bc


def is_exhaustive(g: MZGenerator, cap: int) -> bool:
    r = seed_length(g)
    return r < 63 and (1 << r) <= cap


def enumerate_or_sample_seeds(g: MZGenerator, cap: int, rng_seed: int = 0) -> Iterator[MZSeed]:
    """All seeds (lexicographic) if there are at most ``cap``, else ``cap`` random ones."""
    for hc, bc in seed_batches(g, cap, rng_seed):
        for h, z in zip(hc.tolist(), bc.tolist()):
            yield MZSeed(tuple(h), tuple(tuple(row) for row in z))


# --- exact output distribution via GF(2)-linearity ----------------------------

def _span_basis(vectors) -> list[int]:
    """Basis (as int bitmasks) of the GF(2) span of ``vectors``."""
    pivots: dict[int, int] = {}
    for v in vectors:
        while v:
            top = v.bit_length() - 1
            if top in pivots:
                v ^= pivots[top]
            else:
                pivots[top] = v
                break
    return list(pivots.values())


def _hash_image_basis(g: MZGenerator) -> list[int]:
    """Span of the hash outputs: bit ``j*log2t + q`` is bucket-bit ``q`` of coordinate ``j``."""
    if g.log2t == 0:
        return []
    p, lo = field_poly(g.b), g.b - g.log2t
    powers = [[gf2a_pow(j, e, g.b) for e in range(g.w)] for j in range(g.n)]
    cols = []
    for e in range(g.w):
        for l in range(g.b):
            col = 0
            for j in range(g.n):
                hv = int(kernels.gf_mul(1 << l, powers[j][e], g.b, p)) >> lo
                col |= hv << (j * g.log2t)
            cols.append(col)
    return _span_basis(cols)


def _block_lsb_rows(g: MZGenerator) -> list[int]:
    """For each position p, the seed-bit mask of the functional ``LSB(poly(p))``."""
    p = field_poly(g.a)
    rows = []
    for pos in range(g.n):
        mask = 0
        for e in range(g.w):
            pe = gf2a_pow(pos, e, g.a)
            for l in range(g.a):
                if int(kernels.gf_mul(1 << l, pe, g.a, p)) & 1:
                    mask |= 1 << (e * g.a + l)
        rows.append(mask)
    return rows


def _span_points(basis: list[int], limit: int = 1 << 16) -> Iterator[np.ndarray]:
    """All GF(2) combinations of ``basis`` (n <= 64 bit masks), in uint64 chunks."""
    low, high = basis[:16], basis[16:]
    base = np.zeros(1, dtype=np.uint64)
    for v in low:
        base = np.concatenate([base, base ^ np.uint64(v)])
    for idx in range(1 << len(high)):
        off = 0
        for i, v in enumerate(high):
            if idx >> i & 1:
                off ^= v
        yield base ^ np.uint64(off)


def _masks_to_signs(masks: np.ndarray, n: int) -> np.ndarray:
    bits = (masks[:, None] >> np.arange(n, dtype=np.uint64)[None, :]) & np.uint64(1)
    return 1.0 - 2.0 * bits.astype(np.float64)


def exact_plan(g: MZGenerator) -> list[tuple[np.ndarray, list[int]]]:
    """For every equally likely hash outcome: (bucket of each coordinate, output-space basis)."""
    if g.n > 64:
        raise ValueError("exact output distribution supports n <= 64")
    rows = _block_lsb_rows(g)
    plan = []
    for chunk in _span_points(_hash_image_basis(g)):
        for hmask in chunk.tolist():
            buckets = [(hmask >> (j * g.log2t)) & ((1 << g.log2t) - 1) for j in range(g.n)]
            basis = []
            for bucket in range(g.t):
                members = [j for j in range(g.n) if buckets[j] == bucket]
                cols = []
                for s in range(g.block_bits):
                    col = 0
                    for pos, j in enumerate(members):
                        if rows[pos] >> s & 1:
                            col |= 1 << j
                    cols.append(col)
                basis.extend(_span_basis(cols))
            plan.append((np.array(buckets), basis))
    return plan


EXACT_MAX_HASH_OUTCOMES = 1 << 12
INFEASIBLE = 1 << 62


def exact_cost(g: MZGenerator, limit: int = INFEASIBLE) -> int:
    """Number of output points :func:`prg_accept_prob_exact` would evaluate.

    Returns :data:`INFEASIBLE` without building the plan when the hash
    image alone has more than ``min(limit, 4096)`` points.
    """
    if g.n > 64:
        return INFEASIBLE
    hb = len(_hash_image_basis(g))
    if (1 << hb) > min(limit, EXACT_MAX_HASH_OUTCOMES):
        return INFEASIBLE
    return sum(1 << len(basis) for _, basis in exact_plan(g))


def prg_accept_prob_exact(g: MZGenerator, accept: Callable[[np.ndarray], np.ndarray]) -> Fraction:
    """Exact ``Pr_seed[accept(G(seed))]`` for a uniform seed.

    The hash outputs are uniform on the image of a linear map, and given
    the hash outcome the output is uniform on the direct sum of the
    per-bucket images; both are enumerated through bases.

    Parameters
    ----------
    accept : callable
        Maps an (N, n) float array of signs to N booleans.
    """
    plan = exact_plan(g)
    total = Fraction(0)
    for _, basis in plan:
        hits = 0
        for masks in _span_points(basis):
            hits += int(np.count_nonzero(accept(_masks_to_signs(masks, g.n))))
        total += Fraction(hits, 1 << len(basis))
    return total / len(plan)
