"""Monte Carlo and exhaustive estimators for spectrahedral Boolean functions.

Every estimate comes back as an :class:`EstimatorReport` carrying a
Hoeffding confidence radius and the master seed it was produced from.
Sampling is split into fixed-size chunks with their own random streams
(see :mod:`spectraprg.rng`), so a report is reproducible bit for bit
regardless of the number of worker threads.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from . import prg as prg_mod
from . import rng as rng_mod
from .linalg import batch_lambda_max, eig_sym
from .spectrahedron import (
    PackedIntersection,
    PositiveSpectrahedron,
    Spectrahedron,
    SpectrahedronPair,
    pack_intersection,
)

EXACT_MAX_N = 24
EXACT_CHUNK = 1 << 16


@dataclass(frozen=True)
class EstimatorConfig:
    """Sample budget and reproducibility settings.

    ``samples == 0`` asks for the exact (enumerated) answer where one exists.
    """

    samples: int = 100_000
    master_seed: int = 0
    chunk_size: int = 1 << 14
    confidence: float = 0.999
    workers: int | None = None

    def __post_init__(self):
        if self.samples < 0:
            raise ValueError("samples must be >= 0")
        if self.chunk_size < 1:
            raise ValueError("chunk_size must be >= 1")
        if not 0 < self.confidence < 1:
            raise ValueError("confidence must lie in (0, 1)")

    @property
    def radius(self) -> float:
        return hoeffding_radius(self.samples, self.confidence)

    def derive(self, label: str) -> "EstimatorConfig":
        """Same settings with a sub-seed for a labelled part of an experiment."""
        return EstimatorConfig(self.samples, rng_mod.derive_seed(self.master_seed, label), self.chunk_size,
                               self.confidence, self.workers)

    def with_samples(self, samples: int) -> "EstimatorConfig":
        return EstimatorConfig(samples, self.master_seed, self.chunk_size, self.confidence, self.workers)


def hoeffding_radius(n: int, confidence: float = 0.999) -> float:
    """``sqrt(ln(2 / (1 - confidence)) / (2 n))`` for a mean of ``n`` variables in [0, 1]."""
    if n <= 0:
        return math.inf
    return math.sqrt(math.log(2.0 / (1.0 - confidence)) / (2.0 * n))


@dataclass(frozen=True)
class EstimatorReport:
    estimate: float
    radius: float
    n_samples: int
    seed: int
    metadata: dict = field(default_factory=dict)

    def as_row(self, **extra) -> dict:
        row = dict(extra)
        row.update(estimate=repr(float(self.estimate)), radius=repr(float(self.radius)),
                   n_samples=self.n_samples, seed=self.seed)
        for key, val in self.metadata.items():
            row.setdefault(key, val)
        return row


# --- targets ------------------------------------------------------------------

def as_target(S) -> Spectrahedron:
    """Accept a spectrahedron, a packed intersection, or a PSD/NSD pair (packed on the fly)."""
    if isinstance(S, SpectrahedronPair):
        return pack_intersection(S)
    if isinstance(S, Spectrahedron):
        return S
    raise TypeError(f"cannot evaluate membership for {type(S).__name__}")


def _predicate(F) -> tuple[Callable[[np.ndarray], np.ndarray], int | None]:
    if isinstance(F, (Spectrahedron, SpectrahedronPair)):
        T = as_target(F)
        return T.contains_batch, T.n
    return F, getattr(F, "n", None)


def _cube_chunk(n: int, start: int, stop: int) -> np.ndarray:
    idx = np.arange(start, stop, dtype=np.int64)[:, None]
    bits = (idx >> np.arange(n - 1, -1, -1)) & 1
    return 1.0 - 2.0 * bits.astype(np.float64)


def exact_count(accept: Callable[[np.ndarray], np.ndarray], n: int) -> int:
    """Number of accepted points of ``{-1, +1}^n``."""
    if n > EXACT_MAX_N:
        raise ValueError(f"exact enumeration needs n <= {EXACT_MAX_N}, got n={n}")
    total = 1 << n
    return sum(int(np.count_nonzero(accept(_cube_chunk(n, s, min(total, s + EXACT_CHUNK)))))
               for s in range(0, total, EXACT_CHUNK))


def _mc_mean(cfg: EstimatorConfig, draw: Callable[[np.random.Generator, int], np.ndarray]) -> float:
    """Mean of the 0/1 outcomes ``draw(rng, size)`` over ``cfg.samples`` draws."""
    counts = rng_mod.map_chunks(lambda r, size, i: int(np.count_nonzero(draw(r, size))),
                                cfg.samples, cfg.chunk_size, cfg.master_seed, cfg.workers)
    return rng_mod.ordered_sum(counts) / cfg.samples


# --- acceptance probabilities -------------------------------------------------

def accept_prob(S, source: str, cfg: EstimatorConfig, gen: prg_mod.MZGenerator | None = None,
                cap: int | None = None) -> EstimatorReport:
    """Probability that ``x`` lies in ``S`` for ``x`` from the given source.

    Parameters
    ----------
    source : {"uniform", "gaussian", "exact", "prg", "prg_exact"}
        ``exact`` enumerates ``{-1, +1}^n`` (``n <= 24``). ``prg`` averages
        over the generator's seeds: all of them when there are at most
        ``cap`` (default ``cfg.samples``), else ``cap`` random ones.
        ``prg_exact`` computes the generator's acceptance probability
        exactly through its linear structure.
    """
    T = as_target(S)
    n = T.n
    if source == "exact":
        c = exact_count(T.contains_batch, n)
        frac = Fraction(c, 1 << n)
        return EstimatorReport(float(frac), 0.0, 1 << n, cfg.master_seed,
                               {"source": "exact", "fraction": str(frac)})
    if source in ("uniform", "gaussian"):
        if cfg.samples < 1:
            raise ValueError("Monte Carlo needs samples >= 1")
        sampler = rng_mod.signs if source == "uniform" else rng_mod.gaussians
        est = _mc_mean(cfg, lambda r, size: T.contains_batch(sampler(r, (size, n))))
        return EstimatorReport(est, cfg.radius, cfg.samples, cfg.master_seed, {"source": source})
    if gen is None:
        raise ValueError(f"source {source!r} needs a generator")
    if gen.n != n:
        raise ValueError(f"generator has n={gen.n}, instance has n={n}")
    if source == "prg_exact":
        frac = prg_mod.prg_accept_prob_exact(gen, T.contains_batch)
        return EstimatorReport(float(frac), 0.0, 0, cfg.master_seed,
                               {"source": "prg_exact", "fraction": str(frac)})
    if source == "prg":
        cap = cap if cap is not None else cfg.samples
        seed = rng_mod.derive_seed(cfg.master_seed, "prg-seeds")
        hits = used = 0
        for hc, bc in prg_mod.seed_batches(gen, cap, seed):
            X = prg_mod.mz_generate_batch(gen, hc, bc).astype(np.float64)
            hits += int(np.count_nonzero(T.contains_batch(X)))
            used += hc.shape[0]
        exhaustive = prg_mod.is_exhaustive(gen, cap)
        meta = {"source": "prg", "prg_mode": "exhaustive" if exhaustive else "sampled"}
        if exhaustive:
            meta["fraction"] = str(Fraction(hits, used))
        radius = 0.0 if exhaustive else hoeffding_radius(used, cfg.confidence)
        return EstimatorReport(hits / used, radius, used, seed, meta)
    raise ValueError(f"unknown source {source!r}")


def fooling_error(S, gen: prg_mod.MZGenerator, cfg: EstimatorConfig, cap: int | None = None,
                  prg_mode: str = "auto") -> EstimatorReport:
    """``|Pr_uniform[x in S] - Pr_seed[G(seed) in S]|`` with the summed radius.

    The uniform side is exact when ``cfg.samples == 0``. ``prg_mode`` is
    ``"seeds"`` (enumerate or sample seeds), ``"exact"`` (linear-image
    computation) or ``"auto"``: enumerate when ``2^r <= cap``, else the
    linear-image computation when its cost is at most ``cap``, else sample.
    """
    cap = cap if cap is not None else max(cfg.samples, 1)
    if cfg.samples == 0:
        uni = accept_prob(S, "exact", cfg)
    else:
        uni = accept_prob(S, "uniform", cfg.derive("uniform"))
    mode = prg_mode
    if mode == "auto":
        if prg_mod.is_exhaustive(gen, cap):
            mode = "seeds"
        elif prg_mod.exact_cost(gen, limit=cap) <= cap:
            mode = "exact"
        else:
            mode = "seeds"
    if mode == "exact":
        rep = accept_prob(S, "prg_exact", cfg, gen)
    elif mode == "seeds":
        rep = accept_prob(S, "prg", cfg, gen, cap)
    else:
        raise ValueError(f"unknown prg_mode {prg_mode!r}")
    meta = {"uniform": uni.estimate, "prg": rep.estimate,
            "prg_mode": rep.metadata.get("prg_mode", rep.metadata["source"]),
            "seed_length": prg_mod.seed_length(gen), "wise": gen.w, "t": gen.t}
    if "fraction" in uni.metadata and "fraction" in rep.metadata:
        diff = abs(Fraction(uni.metadata["fraction"]) - Fraction(rep.metadata["fraction"]))
        meta["fraction"] = str(diff)
        return EstimatorReport(float(diff), 0.0, rep.n_samples, cfg.master_seed, meta)
    return EstimatorReport(abs(uni.estimate - rep.estimate), uni.radius + rep.radius, rep.n_samples,
                           cfg.master_seed, meta)


# --- anti-concentration and sensitivity ---------------------------------------

def _blocks(S) -> list[Spectrahedron]:
    if isinstance(S, SpectrahedronPair):
        return [S.S1, S.S2]
    if isinstance(S, PackedIntersection):
        return S.block_views()
    return [as_target(S)]


def anti_concentration(S, Lambda, source: str, cfg: EstimatorConfig):
    """``Pr[some block has lambda_max(sum x_i A^i - B) in (-Lambda, Lambda]]``.

    ``Lambda`` may be a sequence, in which case one report per value is
    returned, all computed from the same samples.
    """
    lams = np.atleast_1d(np.asarray(Lambda, dtype=np.float64))
    if np.any(lams <= 0):
        raise ValueError("Lambda must be positive")
    if source not in ("uniform", "gaussian"):
        raise ValueError("source must be 'uniform' or 'gaussian'")
    blocks = _blocks(S)
    n = blocks[0].n
    sampler = rng_mod.signs if source == "uniform" else rng_mod.gaussians

    def chunk(r, size, i):
        X = sampler(r, (size, n))
        lm = np.stack([b.lambda_max_batch(X) for b in blocks], axis=1)
        inside = (lm[None, :, :] > -lams[:, None, None]) & (lm[None, :, :] <= lams[:, None, None])
        return np.count_nonzero(np.any(inside, axis=2), axis=1)

    counts = rng_mod.map_chunks(chunk, cfg.samples, cfg.chunk_size, cfg.master_seed, cfg.workers)
    reports = []
    for j, lam in enumerate(lams):
        est = rng_mod.ordered_sum([int(c[j]) for c in counts]) / cfg.samples
        reports.append(EstimatorReport(est, cfg.radius, cfg.samples, cfg.master_seed,
                                       {"Lambda": float(lam), "source": source}))
    return reports if np.ndim(Lambda) else reports[0]


def noise_sensitivity(F, epsilon: float, cfg: EstimatorConfig, n: int | None = None) -> EstimatorReport:
    """``Pr[F(x) != F(y)]`` with ``x`` uniform and ``y`` flipping each coordinate with probability ``epsilon``."""
    accept, n0 = _predicate(F)
    n = n if n is not None else n0
    if n is None:
        raise ValueError("n is required for a bare predicate")
    if not 0 <= epsilon <= 0.5:
        raise ValueError("epsilon must lie in [0, 1/2]")

    def draw(r, size):
        X = rng_mod.signs(r, (size, n))
        flips = rng_mod.open_uniform(r, (size, n)) < epsilon
        Y = np.where(flips, -X, X)
        return np.asarray(accept(X)) != np.asarray(accept(Y))

    est = _mc_mean(cfg, draw)
    return EstimatorReport(est, cfg.radius, cfg.samples, cfg.master_seed, {"epsilon": epsilon})


def average_sensitivity(F, cfg: EstimatorConfig, n: int | None = None) -> EstimatorReport:
    """``n * Pr[F(x) != F(x with coordinate i flipped)]`` for uniform ``x`` and ``i``."""
    accept, n0 = _predicate(F)
    n = n if n is not None else n0
    if n is None:
        raise ValueError("n is required for a bare predicate")

    def draw(r, size):
        X = rng_mod.signs(r, (size, n))
        i = r.integers(0, n, size=size)
        Y = X.copy()
        Y[np.arange(size), i] *= -1.0
        return np.asarray(accept(X)) != np.asarray(accept(Y))

    p = _mc_mean(cfg, draw)
    return EstimatorReport(n * p, n * cfg.radius, cfg.samples, cfg.master_seed, {"n": n})


# --- bucketing ----------------------------------------------------------------

@dataclass(frozen=True)
class BucketSplit:
    """Signed buckets: index ``2l`` holds bucket ``l``'s coordinates with ``z = +1``, ``2l + 1`` those with ``z = -1``."""

    buckets: tuple
    coefficients: np.ndarray | None


def bucket_split(z, m: int, rng: np.random.Generator, A: np.ndarray | None = None) -> BucketSplit:
    """Hash coordinates uniformly into ``m`` buckets and split each by the sign of ``z``.

    With coefficient matrices ``A`` (n, k, k), also returns the induced
    coefficients ``sum_{j in C_q} z_j A^j`` of each signed bucket.
    """
    z = np.asarray(z)
    if m < 1:
        raise ValueError("m must be >= 1")
    if not np.all(np.abs(z) == 1):
        raise ValueError("z must be a +-1 vector")
    pi = rng.integers(0, m, size=z.size)
    q = 2 * pi + (z < 0)
    buckets = tuple(np.flatnonzero(q == j) for j in range(2 * m))
    coeffs = None
    if A is not None:
        A = np.asarray(A, dtype=np.float64)
        coeffs = np.stack([np.tensordot(z[b].astype(np.float64), A[b], axes=1) if b.size else
                           np.zeros(A.shape[1:]) for b in buckets])
    return BucketSplit(buckets, coeffs)


def bucket_goodness(S: PositiveSpectrahedron, m: int, trials: int, cfg: EstimatorConfig,
                    tau: float | None = None) -> EstimatorReport:
    """Fraction of random hashes ``[n] -> [m]`` with at least ``3m/4`` good buckets.

    Bucket ``c`` is good when ``sum_{j in bucket c} A^j >= I / (2 tau m)``
    (on the PSD normal form). ``tau`` defaults to the declared value, or
    the measured one if none is declared.
    """
    A = S.normal_form()
    n, k = A.shape[0], A.shape[1]
    if tau is None:
        tau = S.declared_tau if S.declared_tau is not None else max(eig_sym(a).eigenvalues[0] for a in A)
    thresh = 1.0 / (2.0 * tau * m)
    flat = A.reshape(n, k * k)

    def chunk(r, size, i):
        good_trials = 0
        for _ in range(size):
            pi = r.integers(0, m, size=n)
            sig = np.zeros((m, k * k))
            np.add.at(sig, pi, flat)
            lam_min = -batch_lambda_max(-sig.reshape(m, k, k))
            good_trials += int(np.count_nonzero(lam_min >= thresh) >= 0.75 * m)
        return good_trials

    goods = rng_mod.map_chunks(chunk, trials, max(1, min(cfg.chunk_size, 64)), cfg.master_seed, cfg.workers)
    est = rng_mod.ordered_sum(goods) / trials
    return EstimatorReport(est, hoeffding_radius(trials, cfg.confidence), trials, cfg.master_seed,
                           {"m": m, "tau": tau, "lemma_bound": 1.0 - math.exp(-m / 4.0)})


# --- matrix concentration facts -----------------------------------------------

@dataclass(frozen=True)
class FactCheck:
    fact: str
    param: float
    lhs: float
    rhs: float
    radius: float
    passed: bool


def _ceil_log2(k: int) -> int:
    return max(0, (int(k) - 1).bit_length())


def _mean_se(values: np.ndarray) -> tuple[float, float]:
    v = np.asarray(values, dtype=np.float64)
    return float(np.mean(v)), float(np.std(v, ddof=1) / math.sqrt(v.size)) if v.size > 1 else math.inf


def _sum_sq_norm(A: np.ndarray) -> float:
    return float(eig_sym(np.einsum("nij,njl->il", A, A)).eigenvalues[0])


def _schatten_pow(M: np.ndarray, p: int) -> np.ndarray:
    """``||M||_{4p}^{4p} = tr(M^{4p})`` for a stack of symmetric matrices."""
    P = M @ M
    for _ in range(p - 1):
        P = P @ P
    return np.einsum("nij,nij->n", P, P)


def matrix_fact_checks(A, cfg: EstimatorConfig, ms: Sequence[int] = (2, 4, 6), ps: Sequence[int] = (1, 2),
                       deltas: Sequence[float] = (0.25, 0.5), bernoulli_p: float = 0.5) -> list[FactCheck]:
    """Compare Monte Carlo left-hand sides of three matrix inequalities with their bounds.

    * moments: ``E ||sum x_i A^i||^m <= (1 + 2m ceil(log2 k))^{m/2} ||sum (A^i)^2||^{m/2}``
      for Rademacher and Gaussian ``x``;
    * Rosenthal: ``(E ||sum x_i A^i||_{4p}^{4p})^{1/4p} <= sqrt(4p-1) ||(sum (A^i)^2)^{1/2}||_{4p}
      + (4p-1) (sum ||A^i||_{4p}^{4p})^{1/4p}``;
    * Chernoff: for ``X_i = b_i A^i`` with ``b_i ~ Bernoulli(p)`` and ``A^i`` PSD,
      ``Pr[lambda_min(sum X_i) <= (1-delta) mu] <= k (e^{-delta} / (1-delta)^{1-delta})^{mu/R}``
      with ``mu = lambda_min(sum E X_i)`` and ``R = max lambda_max(A^i)``.

    Moment checks pass when ``mean - 3 se <= bound``; the probability check
    passes when ``estimate - 3 radius <= bound``.
    """
    A = np.asarray(A, dtype=np.float64)
    n, k = A.shape[0], A.shape[1]
    N = cfg.samples
    flat = A.reshape(n, k * k)
    out: list[FactCheck] = []
    s2 = _sum_sq_norm(A)
    L = _ceil_log2(k)

    def sums(sampler, label):
        chunks = rng_mod.map_chunks(lambda r, size, i: (sampler(r, (size, n)) @ flat).reshape(size, k, k),
                                    N, cfg.chunk_size, rng_mod.derive_seed(cfg.master_seed, label), cfg.workers)
        return np.concatenate(chunks)

    for label, sampler in (("rademacher", rng_mod.signs), ("gaussian", rng_mod.gaussians)):
        Ms = sums(sampler, label)
        norms = np.maximum(batch_lambda_max(Ms), batch_lambda_max(-Ms))
        for m in ms:
            mean, se = _mean_se(norms**m)
            rhs = (1.0 + 2.0 * m * L) ** (m / 2.0) * s2 ** (m / 2.0)
            out.append(FactCheck(f"moment_{label}", m, mean, rhs, 3 * se, mean - 3 * se <= rhs))

    Ms = sums(rng_mod.signs, "rosenthal")
    sq = np.einsum("nij,njl->il", A, A)
    wsq = np.clip(eig_sym(sq).eigenvalues, 0.0, None)
    for p in ps:
        q = 4 * p
        mean, se = _mean_se(_schatten_pow(Ms, p))
        term1 = math.sqrt(q - 1) * float(np.sum(wsq ** (q / 2.0))) ** (1.0 / q)
        term2 = (q - 1) * float(np.sum(_schatten_pow(A, p))) ** (1.0 / q)
        rhs = (term1 + term2) ** q
        out.append(FactCheck("rosenthal", p, mean, rhs, 3 * se, mean - 3 * se <= rhs))

    R = max(eig_sym(a).eigenvalues[0] for a in A)
    mu = float(eig_sym(bernoulli_p * A.sum(axis=0)).eigenvalues[-1])
    chunks = rng_mod.map_chunks(
        lambda r, size, i: -batch_lambda_max(-((rng_mod.open_uniform(r, (size, n)) < bernoulli_p).astype(np.float64)
                                               @ flat).reshape(size, k, k)),
        N, cfg.chunk_size, rng_mod.derive_seed(cfg.master_seed, "chernoff"), cfg.workers)
    lam_min = np.concatenate(chunks)
    rad = hoeffding_radius(N, cfg.confidence)
    for d in deltas:
        est = float(np.mean(lam_min <= (1.0 - d) * mu))
        rhs = k * (math.exp(-d) / (1.0 - d) ** (1.0 - d)) ** (mu / R) if R > 0 else math.inf
        out.append(FactCheck("chernoff", d, est, rhs, 3 * rad, est - 3 * rad <= rhs))
    return out


# --- regressions and output ---------------------------------------------------

def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    lx, ly = np.log(np.asarray(xs, dtype=np.float64)), np.log(np.asarray(ys, dtype=np.float64))
    return float(np.polyfit(lx, ly, 1)[0])


def linear_fit(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float]:
    """``(slope, intercept)`` of the least-squares line."""
    slope, intercept = np.polyfit(np.asarray(xs, dtype=np.float64), np.asarray(ys, dtype=np.float64), 1)
    return float(slope), float(intercept)


def _config_value(v) -> str:
    if isinstance(v, (list, tuple)):
        return ",".join(str(x) for x in v)
    return str(v)


def write_csv(rows: Iterable[dict], config: dict, out=None) -> str:
    """CSV text with a ``#`` config comment line, a header row and one row per dict."""
    rows = list(rows)
    buf = io.StringIO()
    buf.write("# " + " ".join(f"{k}={_config_value(v)}" for k, v in config.items()) + "\n")
    fields: list[str] = []
    for r in rows:
        for key in r:
            if key not in fields:
                fields.append(key)
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    text = buf.getvalue()
    if out is not None:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    return text
