"""Command-line front end.

Every experiment command writes a CSV whose first line is a ``#`` comment
holding the fully resolved configuration, so a run can be repeated from
its own output. Exit codes: 0 success, 2 invalid input, 1 runtime failure.
"""
from __future__ import annotations

import argparse
import itertools
import json
import sys
from pathlib import Path

import numpy as np

from . import estimators as est
from . import mollifier as mol
from . import prg
from . import rng as rng_mod
from . import spectral as sp
from .linalg import random_orthogonal, random_sym, spectral_norm
from .spectrahedron import (
    PositiveSpectrahedron,
    Sign,
    SpectrahedronPair,
    check_regularity,
    load_instance,
    random_regular_instance,
    recenter,
)


class ValidationError(ValueError):
    pass


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be a nonnegative integer")
    return v


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _cfg(args, samples=None) -> est.EstimatorConfig:
    return est.EstimatorConfig(samples=args.samples if samples is None else samples, master_seed=args.seed,
                               chunk_size=args.chunk_size)


def _load(path) -> PositiveSpectrahedron:
    try:
        return load_instance(path)
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        raise ValidationError(f"cannot read instance {path}: {exc}") from None


def _target(args):
    S = _load(args.instance)
    if getattr(args, "instance2", None):
        S2 = _load(args.instance2)
        return SpectrahedronPair(S, S2) if S.sign is Sign.PSD else SpectrahedronPair(S2, S)
    return S


def _emit(args, rows, config) -> None:
    text = est.write_csv(rows, config)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func",)}


# --- commands ---------------------------------------------------------------------

def cmd_gen_instance(args):
    if not args.output:
        raise ValidationError("gen-instance needs --output")
    S = random_regular_instance(args.n, args.k, args.tau, args.M, args.gamma, args.seed, Sign(args.sign))
    if args.recenter:
        S = recenter(S, rng_seed=rng_mod.derive_seed(args.seed, "recenter"))
    if not check_regularity(S).passed:
        raise RuntimeError("generated instance failed its regularity check")
    S.save(args.output)


def cmd_eval(args):
    S = _load(args.instance)
    if args.points:
        try:
            X = np.loadtxt(args.points, delimiter=",", ndmin=2)
        except (OSError, ValueError) as exc:
            raise ValidationError(f"cannot read points {args.points}: {exc}") from None
    else:
        X = rng_mod.signs(rng_mod.chunk_rng(args.seed, 0), (args.random, S.n))
    if X.shape[1] != S.n:
        raise ValidationError(f"points have {X.shape[1]} coordinates, instance has n={S.n}")
    lam = S.lambda_max_batch(X)
    rows = [{"index": i, "lambda_max": repr(float(l)), "member": int(l <= 0.0)} for i, l in enumerate(lam)]
    _emit(args, rows, _config(args))


def cmd_regularity(args):
    S = _load(args.instance)
    r = check_regularity(S)
    _emit(args, [{"tau_actual": repr(r.tau_actual), "lambda_min_sum": repr(r.lambda_min_sum),
                  "lambda_max_sum": repr(r.lambda_max_sum), "gamma_actual": repr(r.gamma_actual),
                  "pass": int(r.passed)}], _config(args))


def cmd_fool(args):
    S = _load(args.instance)
    tau = args.tau if args.tau is not None else S.declared_tau
    if tau is None:
        raise ValidationError("instance declares no tau; pass --tau")
    g = prg.MZGenerator(S.n, S.k, tau, args.wise)
    r = est.fooling_error(S, g, _cfg(args), cap=args.cap_seeds, prg_mode=args.prg_mode)
    _emit(args, [r.as_row(experiment="fool")], _config(args))


def cmd_anticonc(args):
    S = _target(args)
    reps = est.anti_concentration(S, args.Lambda, args.source, _cfg(args))
    _emit(args, [r.as_row(experiment="anticonc") for r in reps], _config(args))


def cmd_ns(args):
    S = _target(args)
    rows = []
    for i, e in enumerate(args.epsilon):
        cfg = _cfg(args).derive(f"ns:{i}")
        rows.append(est.noise_sensitivity(S, e, cfg).as_row(experiment="ns"))
    _emit(args, rows, _config(args))


def cmd_as(args):
    S = _target(args)
    _emit(args, [est.average_sensitivity(S, _cfg(args)).as_row(experiment="as")], _config(args))


def cmd_buckets(args):
    S = _load(args.instance)
    r = est.bucket_goodness(S, args.m, args.trials, _cfg(args), tau=args.tau)
    _emit(args, [r.as_row(experiment="buckets")], _config(args))


def cmd_factcheck(args):
    S = _load(args.instance)
    checks = est.matrix_fact_checks(S.normal_form(), _cfg(args))
    rows = [{"fact": c.fact, "param": c.param, "lhs": repr(c.lhs), "rhs": repr(c.rhs), "radius": repr(c.radius),
             "pass": int(c.passed)} for c in checks]
    _emit(args, rows, _config(args))


def cmd_deriv_check(args):
    rng = np.random.default_rng(args.seed)
    f = sp.MultivariateSymmetricFunction.bentkus_theta(args.theta)
    F = sp.spectral_function(f)
    alpha = mol.MollifierParams(args.k, args.theta, args.delta).alpha
    rows = []
    for t in range(args.trials):
        V = random_orthogonal(args.k, rng)
        X = (V * rng.uniform(-1.0, 1.0, args.k)) @ V.T
        H = random_sym(args.k, rng)
        H = H / spectral_norm(H)
        if args.order == 3:
            rep = sp.bentkus_d3_bound_check(X, H, args.theta, alpha)
            rows.append({"trial": t, "k": args.k, "analytic": repr(rep.analytic_value), "fd": repr(rep.fd_value),
                         "rel_error": repr(rep.rel_error), "bound_ratio": repr(rep.ratio)})
            continue
        val = sp.spectral_d1(f, X, H) if args.order == 1 else sp.spectral_d2(f, X, H, jitter=True)
        fd = float(sp.fd_spectral_oracle(F, X, H, args.order).value)
        rows.append({"trial": t, "k": args.k, "analytic": repr(val), "fd": repr(fd),
                     "rel_error": repr(abs(val - fd) / max(1.0, abs(fd))), "bound_ratio": ""})
    _emit(args, rows, _config(args))


def cmd_mollifier_check(args):
    params = mol.MollifierParams(args.k, args.theta, args.delta, args.c_shift, args.c_lambda)
    rng = np.random.default_rng(args.seed)
    L, k = params.Lambda, args.k
    # a uniform box almost never lands deep inside the orthant for larger k,
    # so a third of the points is drawn from each region explicitly
    n_in = n_out = args.points // 3
    n_any = args.points - n_in - n_out
    inner = -L - rng.exponential(L, (n_in, k))
    outer = rng.uniform(-3.0 * L, 3.0 * L, (n_out, k))
    outer[np.arange(n_out), rng.integers(0, k, n_out)] = L + rng.exponential(L, n_out)
    anywhere = rng.uniform(-3.0 * L, 3.0 * L, (n_any, k))
    counts = {"inner": [0, 0], "outer": [0, 0], "shell": [0, 0]}
    lower = upper = 0
    for x in np.concatenate([inner, outer, anywhere]):
        r = mol.sandwich_check(params, x)
        counts[r.region][0] += 1
        counts[r.region][1] += int(r.passed)
        lower += int(r.lower_ok)
        upper += int(r.upper_ok)
    rows = [{"clause": name, "points": c[0], "pass_rate": repr(c[1] / c[0]) if c[0] else ""}
            for name, c in counts.items()]
    rows.append({"clause": "sandwich_lower", "points": args.points, "pass_rate": repr(lower / args.points)})
    rows.append({"clause": "sandwich_upper", "points": args.points, "pass_rate": repr(upper / args.points)})
    cfg = _config(args)
    cfg.update(alpha=params.alpha, Lambda=params.Lambda)
    _emit(args, rows, cfg)


def cmd_prg_selftest(args):
    """Exhaustive marginal-uniformity check of a bit generator and a hash family."""
    rows = []
    gen_bits = args.wise * args.a
    if gen_bits > 22:
        raise ValidationError("wise * a must be at most 22 for exhaustive enumeration")
    rows.append({"object": "kwise_bits", "w": args.wise, "size": args.m, "field": args.a,
                 "max_deviation": kwise_max_deviation(args.wise, args.m, args.a)})
    hb = prg.HashFamily(args.m, args.t, args.wise).b
    if args.wise * hb <= 22:
        rows.append({"object": "hash", "w": args.wise, "size": args.m, "field": hb,
                     "max_deviation": hash_max_deviation(args.wise, args.m, args.t)})
    _emit(args, rows, _config(args))
    if any(r["max_deviation"] != 0 for r in rows):
        raise RuntimeError("marginal deviation detected")


def _all_coeff_rows(w: int, a: int) -> np.ndarray:
    total = 1 << (w * a)
    idx = np.arange(total, dtype=np.uint64)
    cols = [(idx >> np.uint64(e * a)) & np.uint64((1 << a) - 1) for e in range(w)]
    return np.stack(cols, axis=1) if cols else np.zeros((total, 0), np.uint64)


def _max_marginal_deviation(values: np.ndarray, w: int, levels: int) -> int:
    """Largest deviation of any <=w-coordinate pattern count from its uniform share."""
    N, m = values.shape
    worst = 0
    for size in range(1, min(w, m) + 1):
        for cols in itertools.combinations(range(m), size):
            code = np.zeros(N, dtype=np.int64)
            for c in cols:
                code = code * levels + values[:, c]
            counts = np.bincount(code, minlength=levels**size)
            worst = max(worst, int(np.max(np.abs(counts * levels**size - N))))
    return worst


def kwise_max_deviation(w: int, m: int, a: int) -> int:
    coeffs = _all_coeff_rows(w, a)
    from .gf2 import poly_eval_batch
    vals = poly_eval_batch(coeffs, np.arange(m, dtype=np.uint64), a) & np.uint64(1)
    return _max_marginal_deviation(vals.astype(np.int64), w, 2)


def hash_max_deviation(w: int, n: int, t: int, b: int | None = None) -> int:
    h = prg.HashFamily(n, t, w, b=b)
    coeffs = _all_coeff_rows(w, h.b)
    from .gf2 import poly_eval_batch
    vals = poly_eval_batch(coeffs, np.arange(n, dtype=np.uint64), h.b) >> np.uint64(h.b - h.log2t)
    return _max_marginal_deviation(vals.astype(np.int64), w, t)


# --- parser -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spectraprg", description="Pseudorandomness experiments for positive spectrahedra.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, instance=False, samples=False, pair=False):
        s = sub.add_parser(name, help=help_text, description=help_text)
        s.set_defaults(func=func)
        s.add_argument("--output", "-o", default=None, help="output path (CSV or JSON); stdout if omitted")
        s.add_argument("--seed", type=int, default=0, help="master seed for all randomness")
        if instance:
            s.add_argument("--instance", required=True, help="instance JSON file")
        if pair:
            s.add_argument("--instance2", default=None, help="second instance of opposite sign (pair experiments)")
        if samples:
            s.add_argument("--samples", type=_nonneg_int, default=100_000, help="Monte Carlo sample count")
            s.add_argument("--chunk-size", type=_positive_int, default=1 << 14, help="samples per random stream")
        return s

    s = add("gen-instance", cmd_gen_instance, "generate a random regular positive spectrahedron")
    s.add_argument("--n", type=_positive_int, required=True)
    s.add_argument("--k", type=_positive_int, required=True)
    s.add_argument("--tau", type=float, required=True)
    s.add_argument("--M", type=float, required=True)
    s.add_argument("--gamma", type=float, required=True)
    s.add_argument("--sign", choices=["PSD", "NSD"], default="PSD")
    s.add_argument("--recenter", action="store_true", help="shift B so about half the cube is accepted")

    s = add("eval", cmd_eval, "evaluate membership on a point set", instance=True)
    s.add_argument("--points", default=None, help="CSV file of +-1 rows")
    s.add_argument("--random", type=_positive_int, default=16, help="number of random points when --points is absent")

    add("regularity", cmd_regularity, "measure (tau, M, gamma) of an instance", instance=True)

    s = add("fool", cmd_fool, "fooling error of the hash-then-fill generator", instance=True, samples=True)
    s.add_argument("--wise", type=_positive_int, default=None, help="independence order (default 80*ceil(log2 k))")
    s.add_argument("--tau", type=float, default=None, help="bucket parameter (default: the instance's tau)")
    s.add_argument("--cap-seeds", type=_positive_int, default=1_000_000, help="seed budget")
    s.add_argument("--prg-mode", choices=["auto", "seeds", "exact"], default="auto")

    s = add("anticonc", cmd_anticonc, "anti-concentration of lambda_max near 0", instance=True, samples=True, pair=True)
    s.add_argument("--Lambda", type=_float_list, required=True, help="comma-separated interval half-widths")
    s.add_argument("--source", choices=["uniform", "gaussian"], default="uniform")

    s = add("ns", cmd_ns, "noise sensitivity", instance=True, samples=True, pair=True)
    s.add_argument("--epsilon", type=_float_list, required=True, help="comma-separated noise rates")

    add("as", cmd_as, "average sensitivity", instance=True, samples=True, pair=True)

    s = add("buckets", cmd_buckets, "random bucketing goodness", instance=True, samples=True)
    s.add_argument("--m", type=_positive_int, required=True, help="number of buckets")
    s.add_argument("--trials", type=_positive_int, default=1000)
    s.add_argument("--tau", type=float, default=None)

    add("factcheck", cmd_factcheck, "matrix moment / Rosenthal / Chernoff checks on an instance's coefficients",
        instance=True, samples=True)

    s = add("deriv-check", cmd_deriv_check, "spectral derivative of the mollifier vs finite differences")
    s.add_argument("--order", type=int, choices=[1, 2, 3], default=3)
    s.add_argument("--k", type=_positive_int, default=4)
    s.add_argument("--trials", type=_positive_int, default=10)
    s.add_argument("--theta", type=float, default=0.5)
    s.add_argument("--delta", type=float, default=0.01)

    s = add("mollifier-check", cmd_mollifier_check, "approximation and sandwich clauses of the mollifier")
    s.add_argument("--k", type=_positive_int, default=8)
    s.add_argument("--theta", type=float, default=0.5)
    s.add_argument("--delta", type=float, default=0.01)
    s.add_argument("--c-shift", type=float, default=2.0)
    s.add_argument("--c-lambda", type=float, default=None)
    s.add_argument("--points", type=_positive_int, default=10_000)

    s = add("prg-selftest", cmd_prg_selftest, "exhaustive marginal uniformity of the generator components")
    s.add_argument("--wise", type=_positive_int, default=3)
    s.add_argument("--m", type=_positive_int, default=8)
    s.add_argument("--a", type=_positive_int, default=4)
    s.add_argument("--t", type=_positive_int, default=2)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args)
    except (ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - report and signal a runtime failure
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


def run(argv) -> int:
    return main(argv)


if __name__ == "__main__":
    sys.exit(main())
