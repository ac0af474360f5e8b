"""Constrained controllability and degraded control of PNPNPN hexacopters under rotor failure."""

__version__ = "0.1.0"

from .allocation import AllocationMatrix, PimSingular, allocate, hover_distribution, pim, saturate
from .controllability import (
    ControllabilityReport,
    NoFlip,
    WitnessInvalid,
    check_degraded,
    check_full,
    check_full_allocated,
    degraded_lift_threshold,
    degraded_thrust_threshold,
    inclusion_test,
    witness_direction,
    witness_direction_eta2,
)
from .model import (
    AirframeParams,
    build_degraded_system,
    build_full_effectiveness,
    build_full_system,
    build_reduced_effectiveness,
    controllability_matrix_rank,
    single_failure,
)
from .sets import (
    DegenerateSet,
    HPolytope,
    SamplingExhausted,
    Zonotope,
    allocation_polytope,
    attainable_set,
    facet_normals,
    hpoly_interior_margin,
    hpoly_sample,
    support,
    zonotope_contains,
)
from .simulator import FaultEvent, Gains, Scenario, Setpoints, Trace, run_scenario
