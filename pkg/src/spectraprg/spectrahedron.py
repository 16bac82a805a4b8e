"""Spectrahedra ``{x : sum_i x_i A^i <= B}`` and their Boolean membership.

A :class:`PositiveSpectrahedron` has all coefficient matrices PSD (or all
NSD). Two of them, one of each sign, pack into a block-diagonal
:class:`PackedIntersection` whose membership is the conjunction.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from pathlib import Path

import numpy as np

from .linalg import as_sym, batch_lambda_max, block_diag, eig_sym, random_orthogonal

SEMIDEF_TOL = 1e-9
REGULARITY_TOL = 1e-8


class Sign(str, Enum):
    PSD = "PSD"
    NSD = "NSD"


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Spectrahedron:
    """Coefficients ``A`` of shape (n, k, k) and offset ``B`` of shape (k, k)."""

    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, dtype=np.float64)
        if A.ndim != 3 or A.shape[1] != A.shape[2]:
            raise ValueError(f"A must have shape (n, k, k), got {A.shape}")
        A = np.stack([as_sym(a) for a in A]) if A.shape[0] else A.copy()
        B = as_sym(self.B)
        if B.shape[0] != A.shape[1]:
            raise ValueError(f"B is {B.shape[0]}x{B.shape[0]} but A^i are {A.shape[1]}x{A.shape[1]}")
        object.__setattr__(self, "A", _freeze(A))
        object.__setattr__(self, "B", _freeze(B))

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def k(self) -> int:
        return self.A.shape[1]

    def matrix_at(self, x) -> np.ndarray:
        """``sum_i x_i A^i - B``."""
        x = self._check_point(x)
        return np.tensordot(x, self.A, axes=1) - self.B

    def lambda_max_at(self, x) -> float:
        return float(eig_sym(self.matrix_at(x)).eigenvalues[0])

    def lambda_max_batch(self, X) -> np.ndarray:
        """``lambda_max(sum_i x_i A^i - B)`` for each row of an (N, n) array."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n:
            raise ValueError(f"points must have shape (N, {self.n}), got {X.shape}")
        k = self.k
        mats = (X @ self.A.reshape(self.n, k * k)).reshape(-1, k, k) - self.B
        return batch_lambda_max(mats)

    def contains(self, x, tol: float = 0.0) -> bool:
        return self.lambda_max_at(x) <= tol

    def contains_batch(self, X, tol: float = 0.0) -> np.ndarray:
        return self.lambda_max_batch(X) <= tol

    def _check_point(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.n,):
            raise ValueError(f"point has length {x.size}, expected n={self.n}")
        return x


@dataclass(frozen=True, eq=False)
class PositiveSpectrahedron(Spectrahedron):
    """Spectrahedron whose ``A^i`` are all PSD (or all NSD), with declared regularity.

    ``declared_tau``, ``declared_M`` and ``declared_gamma`` are the claimed
    (tau, M)-regularity parameters and bound on ``||B||``; ``None`` means
    undeclared.
    """

    sign: Sign = Sign.PSD
    declared_tau: float | None = None
    declared_M: float | None = None
    declared_gamma: float | None = None

    def __post_init__(self):
        super().__post_init__()
        object.__setattr__(self, "sign", Sign(self.sign))
        if self.declared_M is not None and self.declared_M < 1:
            raise ValueError("declared_M must be >= 1")
        for name in ("declared_tau", "declared_gamma"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ValueError(f"{name} must be nonnegative")
        for i, a in enumerate(self.normal_form()):
            lo = eig_sym(a).eigenvalues[-1] if self.k else 0.0
            if lo < -SEMIDEF_TOL:
                raise ValueError(f"A^{i + 1} is not {self.sign.value} (extreme eigenvalue {lo:.3e})")

    def normal_form(self) -> np.ndarray:
        """The coefficient family with the sign flipped to PSD."""
        return self.A if self.sign is Sign.PSD else -self.A

    def with_offset(self, B, declared_gamma: float | None = None) -> "PositiveSpectrahedron":
        return PositiveSpectrahedron(self.A, B, self.sign, self.declared_tau, self.declared_M, declared_gamma)

    def to_json(self) -> str:
        return json.dumps(instance_to_dict(self))

    def save(self, path) -> None:
        Path(path).write_text(self.to_json())


@dataclass(frozen=True)
class SpectrahedronPair:
    S1: PositiveSpectrahedron
    S2: PositiveSpectrahedron

    def __post_init__(self):
        if self.S1.sign is not Sign.PSD or self.S2.sign is not Sign.NSD:
            raise ValueError("pair must be (PSD, NSD)")
        if self.S1.n != self.S2.n:
            raise ValueError(f"pair has n={self.S1.n} and n={self.S2.n}")

    @property
    def n(self) -> int:
        return self.S1.n


@dataclass(frozen=True, eq=False)
class PackedIntersection(Spectrahedron):
    """Block-diagonal packing of a PSD/NSD pair; ``blocks`` holds the block sizes."""

    blocks: tuple = field(default=())

    def lambda_max_batch(self, X) -> np.ndarray:
        if len(self.blocks) < 2:
            return super().lambda_max_batch(X)
        return np.max(self.block_lambda_max_batch(X), axis=1)

    def block_lambda_max_batch(self, X) -> np.ndarray:
        """Per-block ``lambda_max`` as an (N, n_blocks) array."""
        X = np.asarray(X, dtype=np.float64)
        out = []
        for sub in self.block_views():
            out.append(Spectrahedron.lambda_max_batch(sub, X))
        return np.stack(out, axis=1)

    @cached_property
    def _views(self) -> tuple:
        views, i = [], 0
        for size in self.blocks or (self.k,):
            j = i + size
            views.append(Spectrahedron(self.A[:, i:j, i:j], self.B[i:j, i:j]))
            i = j
        return tuple(views)

    def block_views(self) -> list[Spectrahedron]:
        return list(self._views)


def membership(S: Spectrahedron, x, tol: float = 0.0) -> int:
    """1 iff ``lambda_max(sum_i x_i A^i - B) <= tol``."""
    return int(S.contains(x, tol))


def pack_intersection(pair: SpectrahedronPair) -> PackedIntersection:
    S1, S2 = pair.S1, pair.S2
    A = np.stack([block_diag(a1, a2) for a1, a2 in zip(S1.A, S2.A)]) if S1.n else np.zeros((0, S1.k + S2.k, S1.k + S2.k))
    return PackedIntersection(A, block_diag(S1.B, S2.B), blocks=(S1.k, S2.k))


@dataclass(frozen=True)
class RegularityReport:
    tau_actual: float
    lambda_min_sum: float
    lambda_max_sum: float
    gamma_actual: float
    passed: bool

    @property
    def pass_(self) -> bool:
        return self.passed


def check_regularity(S: PositiveSpectrahedron, tol: float = REGULARITY_TOL) -> RegularityReport:
    """Measure (tau, M, gamma) for ``S`` and compare against its declared values.

    ``tau_actual = max_i lambda_max(A^i)`` on the PSD normal form; the sum
    of squares bounds are the extreme eigenvalues of ``sum_i (A^i)^2``.
    Undeclared parameters are not checked.
    """
    A = S.normal_form()
    k = S.k
    tau = max((eig_sym(a).eigenvalues[0] for a in A), default=0.0)
    sq = np.einsum("nij,njl->il", A, A) if S.n else np.zeros((k, k))
    w = eig_sym(sq).eigenvalues
    wb = eig_sym(S.B).eigenvalues
    gamma = float(max(abs(wb[0]), abs(wb[-1]))) if k else 0.0
    ok = True
    if S.declared_tau is not None:
        ok &= tau <= S.declared_tau + tol
    if S.declared_M is not None:
        ok &= w[-1] >= 1.0 - tol and w[0] <= S.declared_M + tol
    if S.declared_gamma is not None:
        ok &= gamma <= S.declared_gamma + tol
    return RegularityReport(float(tau), float(w[-1]), float(w[0]), gamma, bool(ok))


def random_regular_instance(
    n: int,
    k: int,
    tau_target: float,
    M_target: float,
    gamma: float,
    rng_seed: int,
    sign: Sign = Sign.PSD,
    max_tries: int = 200,
) -> PositiveSpectrahedron:
    """Random (tau, M)-regular positive spectrahedron with ``||B|| <= gamma``.

    Each ``A^i = W W^T`` (Gaussian ``W``) has its spectrum clipped to
    ``[0, tau]``; the family is then rescaled so that
    ``lambda_min(sum (A^i)^2) = 1``. A draw whose rescaled family breaks
    ``A^i <= tau I`` or ``sum (A^i)^2 <= M I`` is retried with a larger
    pre-clipping scale, which pushes the family towards ``tau I``.
    """
    if n < 1 or k < 1:
        raise ValueError("n and k must be positive")
    if tau_target <= 0 or M_target < 1 or gamma < 0:
        raise ValueError("need tau > 0, M >= 1, gamma >= 0")
    if n * tau_target**2 < 1.0:
        raise ValueError(f"infeasible: n*tau^2 = {n * tau_target ** 2:.4g} < 1, so sum (A^i)^2 >= I is unreachable")
    rng = np.random.default_rng(rng_seed)
    scale = 1.0
    for _ in range(max_tries):
        A = np.empty((n, k, k))
        for i in range(n):
            W = rng.standard_normal((k, k))
            w, V = eig_sym(W @ W.T * (scale * tau_target / k))
            A[i] = (V * np.clip(w, 0.0, tau_target)) @ V.T
        sq = np.einsum("nij,njl->il", A, A)
        ws = eig_sym(sq).eigenvalues
        if ws[-1] <= 0:
            scale *= 2.0
            continue
        c = 1.0 / math.sqrt(ws[-1])
        if c > 1.0 or ws[0] * c * c > M_target:
            scale *= 2.0
            continue
        A *= c
        Q = random_orthogonal(k, rng)
        B = (Q * rng.uniform(-gamma, gamma, size=k)) @ Q.T
        if sign is Sign.NSD:
            A = -A
        S = PositiveSpectrahedron(A, B, sign, tau_target, M_target, gamma)
        if check_regularity(S).passed:
            return S
        scale *= 2.0
    raise RuntimeError("could not generate a regular instance; loosen M_target")


def random_regular_pair(n, k, tau, M, gamma, rng_seed) -> SpectrahedronPair:
    ss = np.random.SeedSequence(rng_seed).spawn(2)
    s1 = random_regular_instance(n, k, tau, M, gamma, int(ss[0].generate_state(1)[0]))
    s2 = random_regular_instance(n, k, tau, M, gamma, int(ss[1].generate_state(1)[0]), sign=Sign.NSD)
    return SpectrahedronPair(s1, s2)


def recenter(S: PositiveSpectrahedron, quantile: float = 0.5, samples: int = 4000, rng_seed: int = 0) -> PositiveSpectrahedron:
    """Shift ``B`` by a multiple of the identity so that roughly ``quantile`` of the cube is accepted.

    Useful for sensitivity experiments, where instances accepting almost
    nothing or almost everything carry no signal.
    """
    X = np.random.default_rng(rng_seed).choice([-1.0, 1.0], size=(samples, S.n))
    lam = S.lambda_max_batch(X)
    c = float(np.quantile(lam, quantile))
    B = S.B + c * np.eye(S.k)
    gamma = float(np.max(np.abs(eig_sym(B).eigenvalues)))
    return S.with_offset(B, declared_gamma=gamma)


def boolean_cube(n: int) -> np.ndarray:
    """All ``2^n`` points of {-1, +1}^n as rows, in binary counting order (bit 1 -> -1)."""
    idx = np.arange(2**n, dtype=np.int64)[:, None]
    bits = (idx >> np.arange(n - 1, -1, -1)) & 1
    return (1 - 2 * bits).astype(np.float64)


def sylvester_membership(S: Spectrahedron, x) -> int:
    """Independent membership oracle via leading principal minors.

    ``x`` is accepted iff every leading principal minor of
    ``B - sum_i x_i A^i`` is positive (Sylvester's criterion for positive
    definiteness). Agrees with :func:`membership` away from the boundary.
    """
    D = S.B - np.tensordot(np.asarray(x, dtype=np.float64), S.A, axes=1)
    for r in range(1, S.k + 1):
        if np.linalg.det(D[:r, :r]) <= 0.0:
            return 0
    return 1


def instance_to_dict(S: PositiveSpectrahedron) -> dict:
    return {
        "n": S.n,
        "k": S.k,
        "sign": S.sign.value,
        "A": [a.tolist() for a in S.A],
        "B": S.B.tolist(),
        "tau": S.declared_tau,
        "M": S.declared_M,
        "gamma": S.declared_gamma,
    }


def instance_from_dict(d: dict) -> PositiveSpectrahedron:
    n, k = int(d["n"]), int(d["k"])
    A = np.array(d["A"], dtype=np.float64).reshape(n, k, k) if n else np.zeros((0, k, k))
    B = np.array(d["B"], dtype=np.float64).reshape(k, k)
    return PositiveSpectrahedron(A, B, Sign(d.get("sign", "PSD")), d.get("tau"), d.get("M"), d.get("gamma"))


def load_instance(path) -> PositiveSpectrahedron:
    return instance_from_dict(json.loads(Path(path).read_text()))
