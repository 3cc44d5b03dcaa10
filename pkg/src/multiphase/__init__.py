"""Precision bounds, optimal probes, and measurement verification for
multimode optical phase estimation."""

__version__ = "0.1.0"

from .allocation import (
    Allocation,
    optimal_all_pairs,
    optimal_common,
    optimal_ring,
    optimize_numeric,
    project_simplex,
)
from .costs import (
    CostMatrix,
    ScalarBound,
    cost_all_pairs,
    cost_common,
    cost_custom,
    cost_ring,
    scalar_bound,
    variance_of_pair,
)
from .errors import InvariantViolation, NumericalFailure
from .fock import (
    CoherentProbe,
    FockLayer,
    ModeCount,
    NoonProbe,
    PhaseVector,
    apply_phases,
    decompose_coherent,
    number_covariance,
    occupation_basis,
    poisson_weight,
    truncation_bound,
)
from .measurement import (
    CfimResult,
    MeasurementSet,
    build_ghz_set,
    build_hadamard_d3,
    build_humphreys_set,
    cfim,
    extrapolate_cfim,
    outcome_probabilities,
)
from .montecarlo import (
    SimConfig,
    SimResult,
    default_offsets,
    run,
    sweep_shots,
    variance_scaling_exponent,
)
from .qfim import (
    FisherMatrix,
    invert_restricted,
    qfim_coherent_no_reference,
    qfim_coherent_with_reference,
    qfim_noon,
    qfim_oracle,
    rank_of,
    restrict,
)
from .strategies import (
    StrategyReport,
    StrategyRow,
    advantage_ratio,
    build_report,
    sequential_classical,
    sequential_quantum,
    simultaneous_bound,
)
