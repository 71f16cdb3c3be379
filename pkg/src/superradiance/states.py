"""Core state types for the effective two-atom, two-level emission model.

The two-atom Hilbert space uses the fixed product basis (|aa>, |ab>, |ba>, |bb>)
where |a> is the excited and |b> the ground state of a single atom; the first
letter refers to atom 1.  Density-matrix entries follow the convention
rho[i, j] = <basis_i| rho |basis_j>, so for example the exchange coherence
between |ab> and |ba> sits at rho[1, 2].

All rates are expressed in units of the vacuum decay rate ``gamma`` and times
in units of ``1/gamma``.  The model itself only ever sees the two dimensionless
knobs ``coop`` (scaled atomic density) and ``rho_size`` (sample radius over
reduced wavelength).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "BASIS_LABELS",
    "InvalidStateError",
    "UnphysicalStateError",
    "Parameters",
    "ReducedState",
    "RateSet",
    "Trajectory",
    "reduce",
    "reconstruct",
    "super_sub_populations",
    "entanglement_witness",
    "check_density_matrix",
]

#: Ordered two-atom product basis; index 0 is the doubly excited state.
BASIS_LABELS = ("aa", "ab", "ba", "bb")

DELTA_MODES = ("zero", "kramers-kronig")


class InvalidStateError(ValueError):
    """A density matrix or reduced state violates its defining invariants."""


class UnphysicalStateError(ValueError):
    """Reduced variables left the physical region (population outside [0, 1])."""


@dataclass(frozen=True)
class Parameters:
    """Physical configuration of a run.

    Attributes
    ----------
    coop:
        Cooperativity parameter (scaled density), dimensionless, >= 0.
    rho_size:
        Effective radial size of the sample in units of the reduced
        wavelength, dimensionless, > 0.
    gamma:
        Vacuum single-atom decay rate; sets the unit of time.  Default 1.
    delta_mode:
        "zero" keeps the collective frequency shift pinned at zero;
        "kramers-kronig" recomputes it from the rate spectrum once per
        output sample.
    series_epsilon:
        Threshold on the exponent magnitude below which the removable
        singularity of the rate formula switches to its series form.
    fixed_point_tol:
        Relative tolerance of the self-consistent rate solve.
    """

    coop: float
    rho_size: float
    gamma: float = 1.0
    delta_mode: str = "zero"
    series_epsilon: float = 1e-8
    fixed_point_tol: float = 1e-10

    def __post_init__(self):
        if not self.gamma > 0.0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.coop < 0.0:
            raise ValueError(f"coop must be non-negative, got {self.coop}")
        if not self.rho_size > 0.0:
            raise ValueError(f"rho_size must be positive, got {self.rho_size}")
        if self.delta_mode not in DELTA_MODES:
            raise ValueError(f"delta_mode must be one of {DELTA_MODES}, got {self.delta_mode!r}")
        if not self.series_epsilon > 0.0:
            raise ValueError("series_epsilon must be positive")
        if not self.fixed_point_tol > 0.0:
            raise ValueError("fixed_point_tol must be positive")

    def with_coop(self, coop: float) -> "Parameters":
        return replace(self, coop=coop)


@dataclass(frozen=True)
class ReducedState:
    """The four real variables that close the symmetric two-atom dynamics.

    ``a`` is the mean excited-state population per atom, ``d`` the
    excited-population difference between the two probe atoms, ``n`` the
    product of their inversions and ``x`` the exchange coherence
    <ab| rho |ba> (real along the dynamics considered here).
    """

    a: float
    d: float = 0.0
    n: float = 1.0
    x: float = 0.0

    def validate(self, atol: float = 1e-9) -> "ReducedState":
        """Check the defining ranges; returns self so calls can be chained."""
        if not (-atol <= self.a <= 1.0 + atol):
            raise InvalidStateError(f"population a={self.a} outside [0, 1]")
        if abs(self.n) > 1.0 + atol:
            raise InvalidStateError(f"inversion product n={self.n} outside [-1, 1]")
        if abs(self.d) > 1.0 + atol:
            raise InvalidStateError(f"population difference d={self.d} outside [-1, 1]")
        return self


@dataclass(frozen=True)
class RateSet:
    """Instantaneous dissipative rates entering the equations of motion.

    The symmetric/antisymmetric combinations are defined through the per-atom
    rate matrix: 2*gamma_plus = G11 + G22, 2*gamma_minus = G11 - G22 for the
    single-atom induced rates and likewise gammabar_plus/minus for the cross
    rates G12, G21.  ``delta`` is the common frequency shift (chirp) and
    ``delta12`` the relative shift between the two atoms.
    """

    gamma_plus: float
    gammabar_plus: float
    gamma_vac: float
    gamma_minus: float = 0.0
    gammabar_minus: float = 0.0
    delta12: float = 0.0
    delta: float = 0.0

    @classmethod
    def symmetric(cls, gamma_induced: float, gammabar: float, gamma_vac: float,
                  delta: float = 0.0) -> "RateSet":
        """Small-sample configuration: identical atoms, no relative shift."""
        return cls(gamma_plus=gamma_induced, gammabar_plus=gammabar,
                   gamma_vac=gamma_vac, delta=delta)

    @property
    def is_symmetric(self) -> bool:
        return self.gamma_minus == 0.0 and self.gammabar_minus == 0.0 and self.delta12 == 0.0


@dataclass
class Trajectory:
    """Time-ordered samples of a simulated decay.

    All arrays share one length; ``t`` is strictly increasing.  ``gamma_rate``
    and ``gammabar`` hold the converged self-consistent rates at each sample,
    ``energy`` the cumulative emitted fraction (integral of the intensity).
    """

    t: np.ndarray
    a: np.ndarray
    d: np.ndarray
    n: np.ndarray
    x: np.ndarray
    gamma_rate: np.ndarray
    gammabar: np.ndarray
    intensity: np.ndarray
    rho_pp: np.ndarray
    rho_mm: np.ndarray
    witness: np.ndarray
    energy: np.ndarray
    delta: np.ndarray
    params: Parameters
    terminated_early: bool = False

    def __len__(self) -> int:
        return len(self.t)

    def state_at(self, i: int) -> ReducedState:
        return ReducedState(a=float(self.a[i]), d=float(self.d[i]),
                            n=float(self.n[i]), x=float(self.x[i]))

    def rates_at(self, i: int) -> RateSet:
        return RateSet.symmetric(float(self.gamma_rate[i]), float(self.gammabar[i]),
                                 self.params.gamma, delta=float(self.delta[i]))

    def validate(self) -> "Trajectory":
        if np.any(np.diff(self.t) <= 0.0):
            raise InvalidStateError("trajectory times must be strictly increasing")
        for i in range(len(self.t)):
            self.state_at(i).validate()
        return self


def check_density_matrix(rho: np.ndarray, trace_tol: float = 1e-12,
                         herm_tol: float = 1e-12, eig_floor: float = -1e-10) -> np.ndarray:
    """Validate a 4x4 density matrix (Hermitian, unit trace, positive)."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise InvalidStateError(f"expected a 4x4 matrix, got shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > herm_tol:
        raise InvalidStateError("density matrix is not Hermitian within tolerance")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > trace_tol:
        raise InvalidStateError(f"density matrix trace {tr} differs from 1")
    if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < eig_floor:
        raise InvalidStateError("density matrix has a negative eigenvalue beyond tolerance")
    return rho


def reduce(rho: np.ndarray, trace_tol: float = 1e-9) -> ReducedState:
    """Project a two-atom density matrix onto the four reduced variables.

    a = rho[0,0] + (rho[1,1] + rho[2,2]) / 2
    d = rho[1,1] - rho[2,2]
    n = rho[0,0] - rho[1,1] - rho[2,2] + rho[3,3]
    x = Re rho[1,2]

    Raises
    ------
    InvalidStateError
        If the trace deviates from one by more than ``trace_tol``.
    """
    rho = np.asarray(rho, dtype=complex)
    tr = np.trace(rho).real
    if abs(tr - 1.0) > trace_tol:
        raise InvalidStateError(f"cannot reduce matrix with trace {tr}")
    p_aa = rho[0, 0].real
    p_ab = rho[1, 1].real
    p_ba = rho[2, 2].real
    p_bb = rho[3, 3].real
    return ReducedState(
        a=p_aa + 0.5 * (p_ab + p_ba),
        d=p_ab - p_ba,
        n=p_aa - p_ab - p_ba + p_bb,
        x=rho[1, 2].real,
    )


def reconstruct(state: ReducedState, atol: float = 1e-12) -> np.ndarray:
    """Rebuild the X-structured density matrix that maps back onto ``state``.

    The reconstruction places all population on the diagonal plus the single
    exchange coherence x between |ab> and |ba>; this is exactly the family of
    matrices reached from the doubly excited initial state.  ``reduce`` of the
    result reproduces ``state`` identically.

    Raises
    ------
    UnphysicalStateError
        If any of the four populations falls outside [0, 1] by more
        than ``atol``.
    """
    a, d, n, x = state.a, state.d, state.n, state.x
    one_exc = 0.5 * (1.0 - n)           # total single-excitation population
    p_aa = a - 0.5 * one_exc
    p_ab = 0.5 * (one_exc + d)
    p_ba = 0.5 * (one_exc - d)
    p_bb = 1.0 - a - 0.5 * one_exc
    for label, p in zip(BASIS_LABELS, (p_aa, p_ab, p_ba, p_bb)):
        if not (-atol <= p <= 1.0 + atol):
            raise UnphysicalStateError(
                f"population of |{label}> = {p} outside [0, 1] for state {state}")
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = p_aa
    rho[1, 1] = p_ab
    rho[2, 2] = p_ba
    rho[3, 3] = p_bb
    rho[1, 2] = x
    rho[2, 1] = x
    return rho


def super_sub_populations(state: ReducedState) -> tuple[float, float]:
    """Populations of the symmetric (|ab>+|ba>)/sqrt(2) and antisymmetric
    (|ab>-|ba>)/sqrt(2) one-excitation states: (1 - n)/4 +- x."""
    base = 0.25 * (1.0 - state.n)
    return base + state.x, base - state.x


def entanglement_witness(rho: np.ndarray) -> float:
    """Exchange coherence in excess of the separability bound.

    Returns W = |rho[1,2]| - sqrt(rho[0,0] * rho[3,3]).  For the X-structured
    matrices produced by this model, W <= 0 means the state is separable
    (zero concurrence); a positive W equals half the two-qubit concurrence.
    """
    rho = np.asarray(rho, dtype=complex)
    p_aa = max(rho[0, 0].real, 0.0)
    p_bb = max(rho[3, 3].real, 0.0)
    return abs(rho[1, 2]) - math.sqrt(p_aa * p_bb)
