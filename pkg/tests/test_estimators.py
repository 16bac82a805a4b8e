import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from spectraprg import estimators as est
from spectraprg.prg import MZGenerator
from spectraprg.spectrahedron import (
    PositiveSpectrahedron,
    Sign,
    SpectrahedronPair,
    boolean_cube,
    random_regular_instance,
    random_regular_pair,
    recenter,
)


@pytest.fixture
def corner():
    """n=2, k=1: accepts only x = (-1, -1)."""
    A = np.array([[[1.0]], [[1.0]]])
    return PositiveSpectrahedron(A, np.array([[-1.5]]))


def test_hoeffding_radius():
    assert est.hoeffding_radius(100, 0.95) == pytest.approx(math.sqrt(math.log(40) / 200))
    assert est.hoeffding_radius(0) == math.inf


def test_config_validation_and_derive():
    with pytest.raises(ValueError):
        est.EstimatorConfig(samples=-1)
    c = est.EstimatorConfig(samples=10, master_seed=3)
    assert c.derive("x").master_seed != c.master_seed
    assert c.derive("x") == c.derive("x")
    assert c.with_samples(5).samples == 5


def test_exact_corner(corner):
    r = est.accept_prob(corner, "exact", est.EstimatorConfig())
    assert r.estimate == 0.25 and r.radius == 0
    assert r.metadata["fraction"] == "1/4"


def test_uniform_mc_corner(corner):
    r = est.accept_prob(corner, "uniform", est.EstimatorConfig(samples=10**6, master_seed=1))
    assert abs(r.estimate - 0.25) <= r.radius


def test_gaussian_source(corner):
    # x1 + x2 <= -1.5 with Gaussian x: probability Phi(-1.5 / sqrt 2)
    from scipy.stats import norm
    r = est.accept_prob(corner, "gaussian", est.EstimatorConfig(samples=200000, master_seed=2))
    assert abs(r.estimate - norm.cdf(-1.5 / math.sqrt(2))) <= r.radius


def test_estimates_reproducible_and_thread_invariant():
    S = random_regular_instance(12, 3, 0.4, 2.0, 1.0, 3)
    a = est.accept_prob(S, "uniform", est.EstimatorConfig(samples=50000, master_seed=9, chunk_size=7000, workers=1))
    b = est.accept_prob(S, "uniform", est.EstimatorConfig(samples=50000, master_seed=9, chunk_size=7000, workers=3))
    assert a.estimate == b.estimate


def test_pack_vacuous_pair_matches_single():
    S1 = random_regular_instance(10, 2, 0.45, 2.0, 1.0, 4)
    S2 = PositiveSpectrahedron(np.zeros((10, 2, 2)), np.eye(2), sign=Sign.NSD)
    cfg = est.EstimatorConfig()
    assert est.accept_prob(SpectrahedronPair(S1, S2), "exact", cfg).estimate == \
        est.accept_prob(S1, "exact", cfg).estimate


def test_exact_rejects_large_n():
    with pytest.raises(ValueError):
        est.exact_count(lambda X: X[:, 0] > 0, 25)


def test_fooling_error_full_independence_is_zero():
    S = random_regular_instance(8, 2, 0.5, 2.0, 1.0, 5)
    g = MZGenerator(8, 2, 1.0, 8)
    r = est.fooling_error(S, g, est.EstimatorConfig(samples=0), cap=10**6)
    assert r.estimate == 0 and r.metadata["fraction"] == "0"


def test_fooling_error_degenerate_always_accept():
    S0 = random_regular_instance(8, 2, 0.5, 2.0, 1.0, 6)
    S = S0.with_offset(8 * 0.5 * 10 * np.eye(2))
    g = MZGenerator(8, 2, 0.5, 2)
    r = est.fooling_error(S, g, est.EstimatorConfig(samples=0), cap=10**5)
    assert r.metadata["uniform"] == 1.0 and r.metadata["prg"] == 1.0 and r.estimate == 0


def test_fooling_error_modes_agree():
    S = random_regular_instance(10, 2, 0.5, 2.0, 1.0, 7)
    g = MZGenerator(10, 2, 0.5, 2)
    cfg = est.EstimatorConfig(samples=0)
    seeds = est.fooling_error(S, g, cfg, cap=1 << 24, prg_mode="seeds")
    exact = est.fooling_error(S, g, cfg, cap=1 << 24, prg_mode="exact")
    assert seeds.metadata["prg_mode"] == "exhaustive"
    assert Fraction(seeds.metadata["fraction"]) == Fraction(exact.metadata["fraction"])


def test_fooling_error_sampled_radius():
    S = random_regular_instance(16, 3, 0.25, 2.0, 1.0, 8)
    g = MZGenerator(16, 3, 0.25, 4)
    r = est.fooling_error(S, g, est.EstimatorConfig(samples=0), cap=20000, prg_mode="seeds")
    assert r.metadata["prg_mode"] == "sampled" and r.n_samples == 20000
    assert r.radius == pytest.approx(est.hoeffding_radius(20000))


def test_anti_concentration_limits():
    pair = random_regular_pair(20, 2, 0.3, 2.0, 1.0, 1)
    cfg = est.EstimatorConfig(samples=20000, master_seed=2)
    n = 20
    big = 1.0 + 3 * math.sqrt(n * 2.0) + 10
    hi, lo = est.anti_concentration(pair, [big, 1e-9], "uniform", cfg)
    assert hi.estimate == 1.0
    assert lo.estimate <= 1e-3
    vals = [r.estimate for r in est.anti_concentration(pair, [0.1, 0.2, 0.4, 0.8], "gaussian", cfg)]
    assert vals == sorted(vals)
    with pytest.raises(ValueError):
        est.anti_concentration(pair, 0.0, "uniform", cfg)


def test_noise_sensitivity_trivial():
    S = random_regular_instance(20, 2, 0.3, 2.0, 1.0, 2)
    cfg = est.EstimatorConfig(samples=5000)
    assert est.noise_sensitivity(S, 0.0, cfg).estimate == 0
    const = lambda X: np.ones(len(X), dtype=bool)
    assert est.noise_sensitivity(const, 0.3, cfg, n=20).estimate == 0


def test_noise_sensitivity_dictator():
    dictator = lambda X: X[:, 0] == -1
    r = est.noise_sensitivity(dictator, 0.1, est.EstimatorConfig(samples=200000, master_seed=3), n=5)
    assert abs(r.estimate - 0.1) <= r.radius


def test_average_sensitivity_trivial_and_majority():
    cfg = est.EstimatorConfig(samples=100000, master_seed=4)
    dictator = lambda X: X[:, 0] == -1
    r = est.average_sensitivity(dictator, cfg, n=7)
    assert abs(r.estimate - 1.0) <= r.radius
    assert est.average_sensitivity(lambda X: np.zeros(len(X), bool), cfg, n=7).estimate == 0
    # majority on 5 bits: AS = 5 * C(4,2) / 2^4 = 15/8, computed by brute force
    maj = lambda X: X.sum(axis=1) > 0
    cube = boolean_cube(5)
    brute = sum(int(maj(cube[[j]])[0] != maj(cube[[j]] * np.where(np.arange(5) == i, -1, 1))[0])
                for j in range(32) for i in range(5)) / 32
    assert brute == 15 / 8
    r = est.average_sensitivity(maj, cfg, n=5)
    assert abs(r.estimate - brute) <= r.radius


def test_bucket_split_basic(rng):
    z = np.array([1, -1, 1, 1, -1])
    bs = est.bucket_split(z, 1, rng)
    assert list(bs.buckets[0]) == [0, 2, 3] and list(bs.buckets[1]) == [1, 4]
    bs = est.bucket_split(np.ones(9), 3, rng)
    assert all(bs.buckets[q].size == 0 for q in range(1, 6, 2))
    assert sorted(np.concatenate(bs.buckets).tolist()) == list(range(9))


def test_bucket_split_unate_coefficients(rng):
    S = random_regular_instance(30, 3, 0.3, 2.0, 1.0, 3)
    z = rng.choice([-1, 1], size=30)
    bs = est.bucket_split(z, 4, rng, A=S.A)
    for q, C in enumerate(bs.coefficients):
        w = np.linalg.eigvalsh(C)
        if q % 2 == 0:
            assert w.min() >= -1e-9
        else:
            assert w.max() <= 1e-9
    with pytest.raises(ValueError):
        est.bucket_split(np.array([1, 0]), 1, rng)


def test_bucket_goodness_trivial():
    A = np.array([np.eye(2)])
    S = PositiveSpectrahedron(A, np.zeros((2, 2)), declared_tau=1.0)
    r = est.bucket_goodness(S, 1, 20, est.EstimatorConfig())
    assert r.estimate == 1.0
    tiny = PositiveSpectrahedron(np.stack([1e-3 * np.eye(2)] * 5), np.zeros((2, 2)), declared_tau=1e-3)
    r = est.bucket_goodness(tiny, 20, 50, est.EstimatorConfig())
    assert r.estimate == 0.0


def test_fact_checks_single_matrix():
    A = np.array([np.diag([2.0, 0.5])])
    checks = est.matrix_fact_checks(A, est.EstimatorConfig(samples=2000))
    assert all(c.passed for c in checks)
    m2 = [c for c in checks if c.fact == "moment_rademacher" and c.param == 2][0]
    # ||x A|| = ||A|| for x = +-1
    assert m2.lhs == pytest.approx(4.0)


def test_rosenthal_scalar_bruteforce():
    """Diagonal commuting family: the p=1 left side is a scalar expectation over all sign patterns."""
    rng = np.random.default_rng(5)
    n = 10
    d = rng.uniform(0, 1, size=(n, 2))
    A = np.stack([np.diag(r) for r in d])
    checks = est.matrix_fact_checks(A, est.EstimatorConfig(samples=50000, master_seed=1), ms=(2,), ps=(1,))
    ros = [c for c in checks if c.fact == "rosenthal"][0]
    exact = np.mean([np.sum((np.array(s) @ d) ** 4) for s in itertools.product([-1, 1], repeat=n)])
    assert abs(ros.lhs - exact) <= ros.radius + 1e-9
    assert ros.passed


def test_moment_fact_mc():
    rng = np.random.default_rng(6)
    W = rng.standard_normal((50, 4, 4))
    A = np.einsum("nij,nkj->nik", W, W) / 50
    checks = est.matrix_fact_checks(A, est.EstimatorConfig(samples=100000, master_seed=2), ms=(4,), ps=(1,))
    assert all(c.passed for c in checks)


def test_fits():
    xs = [1, 2, 4, 8]
    assert est.loglog_slope(xs, [3 * x**0.5 for x in xs]) == pytest.approx(0.5)
    assert est.linear_fit([0, 1, 2], [1, 3, 5]) == pytest.approx((2.0, 1.0))


def test_write_csv(tmp_path):
    rows = [{"a": 1, "b": "x"}, {"a": 2, "c": 3}]
    text = est.write_csv(rows, {"seed": 4, "Lambda": [0.1, 0.2]}, out=tmp_path / "o.csv")
    lines = text.splitlines()
    assert lines[0] == "# seed=4 Lambda=0.1,0.2"
    assert lines[1] == "a,b,c"
    assert (tmp_path / "o.csv").read_text() == text
