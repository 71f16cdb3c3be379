"""Cooperative spontaneous emission of a dense two-level gas.

Simulates the radiative decay of an initially inverted ensemble through an
effective two-atom description: four reduced variables (mean excited
population, population difference, inversion product and exchange coherence)
evolve under dissipative rates that are themselves closed forms in the state
and solved self-consistently at every step.  A full 4x4 master-equation
propagator serves as an independent oracle, and a small CLI reproduces the
burst trajectories, the peak-vs-cooperativity scaling table and the rate
spectrum with its dispersion integral.
"""

from .states import (
    BASIS_LABELS,
    InvalidStateError,
    Parameters,
    RateSet,
    ReducedState,
    Trajectory,
    UnphysicalStateError,
    check_density_matrix,
    entanglement_witness,
    reconstruct,
    reduce,
    super_sub_populations,
)
from .rates import (
    AmbiguousRootsError,
    NoRootError,
    RateInputs,
    RateIntermediates,
    RateSaturationError,
    RateSolveError,
    SourceFunctions,
    SpectralProfile,
    chirp_kk,
    cooperativity_from_density,
    gamma_spectrum,
    geometric_factor,
    rate_rhs,
    retarded_kernel,
    solve_self_consistent,
    source_functions,
)
from .dynamics import (
    BoundaryPeakWarning,
    IntegrationError,
    IntegratorConfig,
    StiffnessError,
    find_peak,
    integrate,
    intensity,
    rhs_general,
    rhs_small_sample,
)
from .oracle import (
    Liouvillian,
    OracleIntegrityError,
    SpectralReport,
    build_liouvillian,
    propagate,
    spectral_check,
    unvectorize,
    vectorize,
)
from .scan import ScalingFit, ScanRow, fit_scaling, sweep

__version__ = "0.1.0"

__all__ = [
    "BASIS_LABELS",
    "InvalidStateError",
    "UnphysicalStateError",
    "Parameters",
    "ReducedState",
    "RateSet",
    "Trajectory",
    "check_density_matrix",
    "entanglement_witness",
    "reconstruct",
    "reduce",
    "super_sub_populations",
    "AmbiguousRootsError",
    "NoRootError",
    "RateInputs",
    "RateIntermediates",
    "RateSaturationError",
    "RateSolveError",
    "SourceFunctions",
    "SpectralProfile",
    "chirp_kk",
    "cooperativity_from_density",
    "gamma_spectrum",
    "geometric_factor",
    "rate_rhs",
    "retarded_kernel",
    "solve_self_consistent",
    "source_functions",
    "BoundaryPeakWarning",
    "IntegrationError",
    "IntegratorConfig",
    "StiffnessError",
    "find_peak",
    "integrate",
    "intensity",
    "rhs_general",
    "rhs_small_sample",
    "Liouvillian",
    "OracleIntegrityError",
    "SpectralReport",
    "build_liouvillian",
    "propagate",
    "spectral_check",
    "unvectorize",
    "vectorize",
    "ScalingFit",
    "ScanRow",
    "fit_scaling",
    "sweep",
]
