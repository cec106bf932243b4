"""Lattice-point statistics of Haar-random unimodular lattices.

Counting transforms (point, primitive point, independent and primitive tuple
counts), moment-polynomial combinatorics, exact and MCMC samplers, and a
seeded Monte Carlo experiment harness.
"""

from . import errors
from .harness import (
    ExperimentSpec,
    ResultRecord,
    load_config,
    run_experiment,
    write_csv,
    write_json,
)
from .lattice import (
    LatticePoint,
    UnimodularLattice,
    enumerate_in_region,
    enumerate_nonzero_in_radius,
    is_primitive,
    is_primitive_tuple,
)
from .linalg import (
    gcd_vector,
    int_det,
    integer_coefficients,
    lll_reduce,
    rank_with_tolerance,
    smith_normal_form,
)
from .regions import (
    Annulus,
    BallByVolume,
    Box,
    Difference,
    Region,
    ShiftedBall,
    Union,
    ball_of_volume,
    box,
    composite_volume,
    region_from_config,
    unit_ball_volume,
)
from .rogers import (
    BetaCoefficient,
    MomentPolynomial,
    RogersMatrixTerm,
    RogersPartition,
    ball_integral_mc,
    ball_integral_r1,
    beta_coefficient,
    d_matrices,
    moment_polynomial,
    omega,
    partitions,
    phi,
    q_polynomial,
    theta,
    zeta,
)
from .sampler import (
    ChainConfig,
    ChainSample,
    chain_rng,
    mcmc_step,
    sample_chain,
    sample_sl2_exact,
    single_chain,
    stationarity_diagnostics,
)
from .siegel import (
    CountReport,
    count_report,
    evaluate_statistic,
    independent_tuple_count,
    primitive_count,
    primitive_ktuple_count,
    siegel_count,
    span_dim_primitive,
)

__version__ = "0.1.0"
