"""Pseudorandom generators, mollifiers and spectral derivatives for positive spectrahedra."""
from ._backend import BACKEND
from .estimators import (
    EstimatorConfig,
    EstimatorReport,
    accept_prob,
    anti_concentration,
    average_sensitivity,
    bucket_goodness,
    bucket_split,
    fooling_error,
    matrix_fact_checks,
    noise_sensitivity,
)
from .gf2 import IRREDUCIBLE, gf2a_eval_poly, gf2a_mul
from .linalg import ConvergenceError, EigDecomposition, as_sym, eig_sym, lambda_max, lambda_min
from .mollifier import (
    G,
    G_theta,
    MollifierParams,
    Psi_theta,
    bentkus_norm1,
    g,
    g_derivs,
    gbar,
    gbar_d1,
    gbar_d2,
    log_G,
    log_g,
    psi,
    sandwich_check,
)
from .prg import (
    HashFamily,
    KWiseBitGenerator,
    MZGenerator,
    enumerate_or_sample_seeds,
    hash_eval,
    kwise_bits,
    mz_generate,
    seed_length,
)
from .spectrahedron import (
    PackedIntersection,
    PositiveSpectrahedron,
    RegularityReport,
    Sign,
    Spectrahedron,
    SpectrahedronPair,
    check_regularity,
    load_instance,
    membership,
    pack_intersection,
    random_regular_instance,
    recenter,
    sylvester_membership,
)
from .spectral import (
    DerivativeReport,
    MultivariateSymmetricFunction,
    ScalarFunction,
    bentkus_d3_bound_check,
    d2_gauss_integral,
    divided_diff,
    dyson_d1_exp,
    fd_spectral_oracle,
    frechet_d1,
    frechet_d2,
    frechet_d3_spectral,
    sendov_tensors,
)

__version__ = "0.1.0"
