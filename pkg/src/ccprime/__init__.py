"""Coherent configurations with two fibers of prime order."""

from ccprime.core import (
    CoherentConfig,
    ColorMatrix,
    IntersectionTensor,
    MatchingVerdict,
    complex_product,
    fibers,
    matching_structure,
    restrict,
    tensor_product,
    trivial_configuration,
    u_set,
    validate_configuration,
)
from ccprime.equitable import EquitablePartition, enumerate_equitable, point_partition, verify_equitable
from ccprime.orbitals import ActionSpec, affine_action, orbital_configuration
from ccprime.sieve import (
    DegreeMultiset,
    SieveParameters,
    SieveReport,
    candidate_multisets,
    classify_k,
    design_parameters,
    run_pipeline,
    survey,
)
from ccprime.tableau import BetaTableau, TableauInstance, eliminate, solve

__version__ = "0.1.0"
