"""Polar pairs of point-sets and the closest-pair reductions built on them."""

from .codes import BinaryCode, certify_min_distance, hadamard_code, rs_hadamard_code
from .constructions import (
    PolarPair,
    l0_arbitrary,
    l0_binary,
    l2_simplex,
    lp_high_code,
    lp_high_random,
    lp_mid,
    real_to_binary,
)
from .exceptions import ConstructionError, InternalInvariantError, InvalidInputError, PolarPairError
from .metrics import Metric, PointSet, distance, distance_pow_p
from .reductions import (
    OVInstance,
    ReductionCertificate,
    bcp_to_closest_pair,
    dedupe,
    ov_to_closest_pair_linf,
)
from .solvers import (
    BCPInstance,
    PairResult,
    bcp_bruteforce,
    closest_pair_bruteforce,
    hamming_closest_pair_fast,
    ov_bruteforce,
)
from .verify import (
    DistributionPair,
    VerificationReport,
    check_polar,
    distance_graph,
    distribution_falsifier,
    expected_distances,
    l0_coordinate_contribution,
    spectral_check,
)

__version__ = "0.1.0"
