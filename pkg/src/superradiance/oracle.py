"""Full 4x4 two-atom master-equation propagator.

This is the independent cross-check for the reduced dynamics: the same
self-consistent rates drive a complete Lindblad-type generator on the
two-atom density matrix, with an incoherent pump channel at the induced rate
G_ij (raising jumps) and a decay channel at G_ij + gamma_ij (lowering jumps),

    drho/dt =   i sum_j h_j [[s_j, s_j+], rho]
              - 1/2 sum_ij G_ij            ([rho s_i, s_j+] + [s_i, s_j+ rho])
              - 1/2 sum_ij (G_ij + g_ij)   ([rho s_j+, s_i] + [s_j+, s_i rho]),

with s_j = |b><a| acting on atom j and h_j the single-atom frequency shifts.
Vacuum decay is kept diagonal (g_ij = gamma delta_ij); the cross-atom
spontaneous channel is exposed as an optional knob for sensitivity studies.
Since the rate closure depends only on (a, x), reduction commutes with
evolution and the reduced integrator must agree with this propagator.

Density matrices are vectorized row-major: vec(rho)[4*i + j] = rho[i, j],
so a left/right product A rho B maps to (A kron B^T) vec(rho).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .states import Parameters, RateSet, check_density_matrix
from .rates import solve_self_consistent

__all__ = [
    "SIGMA_1",
    "SIGMA_2",
    "OracleIntegrityError",
    "Liouvillian",
    "SpectralReport",
    "vectorize",
    "unvectorize",
    "build_liouvillian",
    "propagate",
    "spectral_check",
]


class OracleIntegrityError(RuntimeError):
    """The full propagation produced an unphysical density matrix."""


def _lowering(atom: int) -> np.ndarray:
    """Lowering operator |b><a| on the given atom in the (aa, ab, ba, bb) basis."""
    s = np.zeros((4, 4))
    if atom == 0:
        s[2, 0] = 1.0   # aa -> ba
        s[3, 1] = 1.0   # ab -> bb
    else:
        s[1, 0] = 1.0   # aa -> ab
        s[3, 2] = 1.0   # ba -> bb
    return s


SIGMA_1 = _lowering(0)
SIGMA_2 = _lowering(1)
_SIGMA = (SIGMA_1, SIGMA_2)
_I4 = np.eye(4)


def vectorize(rho: np.ndarray) -> np.ndarray:
    """Row-major stacking of a 4x4 matrix into a length-16 vector."""
    return np.asarray(rho, dtype=complex).reshape(16)


def unvectorize(vec: np.ndarray) -> np.ndarray:
    return np.asarray(vec, dtype=complex).reshape(4, 4)


def _left(A: np.ndarray) -> np.ndarray:
    return np.kron(A, _I4)


def _right(B: np.ndarray) -> np.ndarray:
    return np.kron(_I4, B.T)


def _sandwich(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Superoperator of rho -> A rho B."""
    return np.kron(A, B.T)


def _pump_block(i: int, j: int) -> np.ndarray:
    """Raising-jump dissipator s_j+ rho s_i - 1/2 {s_i s_j+, rho}."""
    si, sj = _SIGMA[i], _SIGMA[j]
    k = si @ sj.T
    return _sandwich(sj.T, si) - 0.5 * (_left(k) + _right(k))


def _decay_block(i: int, j: int) -> np.ndarray:
    """Lowering-jump dissipator s_i rho s_j+ - 1/2 {s_j+ s_i, rho}."""
    si, sj = _SIGMA[i], _SIGMA[j]
    k = sj.T @ si
    return _sandwich(si, sj.T) - 0.5 * (_left(k) + _right(k))


def _shift_block(atom: int) -> np.ndarray:
    """i [[s, s+], rho] for one atom (enters multiplied by h_j)."""
    s = _SIGMA[atom]
    comm = s @ s.T - s.T @ s
    return 1j * (_left(comm) - _right(comm))


_PUMP = [[_pump_block(i, j) for j in range(2)] for i in range(2)]
_DECAY = [[_decay_block(i, j) for j in range(2)] for i in range(2)]
_SHIFT = [_shift_block(0), _shift_block(1)]


@dataclass(frozen=True)
class Liouvillian:
    """Generator matrix acting on row-major vectorized density matrices."""

    matrix: np.ndarray
    rates: RateSet

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return unvectorize(self.matrix @ vectorize(rho))


def build_liouvillian(rates: RateSet, gamma_cross: float = 0.0) -> Liouvillian:
    """Assemble the 16x16 generator for a given rate set.

    The per-atom rate matrix is recovered from the symmetric/antisymmetric
    combinations: G11/G22 = gamma_plus +- gamma_minus and G12/G21 =
    gammabar_plus +- gammabar_minus.  ``gamma_cross`` adds a cross-atom
    vacuum channel (off by default; the homogeneous reduced equations are
    reproduced with purely diagonal vacuum decay).
    """
    g11 = rates.gamma_plus + rates.gamma_minus
    g22 = rates.gamma_plus - rates.gamma_minus
    g12 = rates.gammabar_plus + rates.gammabar_minus
    g21 = rates.gammabar_plus - rates.gammabar_minus
    g_induced = ((g11, g12), (g21, g22))
    g_vac = ((rates.gamma_vac, gamma_cross), (gamma_cross, rates.gamma_vac))
    # delta = 2 h_j for the common shift, delta12 = 2 (h_1 - h_2)
    h1 = 0.5 * rates.delta + 0.25 * rates.delta12
    h2 = 0.5 * rates.delta - 0.25 * rates.delta12

    mat = np.zeros((16, 16), dtype=complex)
    for i in range(2):
        for j in range(2):
            mat += g_induced[i][j] * _PUMP[i][j]
            mat += (g_induced[i][j] + g_vac[i][j]) * _DECAY[i][j]
    if h1 != 0.0:
        mat += h1 * _SHIFT[0]
    if h2 != 0.0:
        mat += h2 * _SHIFT[1]
    return Liouvillian(matrix=mat, rates=rates)


def propagate(rho0: np.ndarray, params: Parameters, t_end: float,
              times: np.ndarray | None = None, rel_tol: float = 1e-10,
              abs_tol: float = 1e-12, rate_scale: float = 1.0,
              gamma_cross: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Propagate a density matrix under the state-dependent generator.

    At every derivative evaluation the rates are re-solved from the reduced
    variables of the current matrix, exactly as in the reduced integrator.
    The input is symmetrized before each evaluation, so Hermiticity cannot
    drift.  Returns ``(times, rhos)`` with ``rhos`` of shape (n, 4, 4).

    ``rate_scale`` multiplies the induced rates (sensitivity knob; 1.0 is the
    physical model).  Raises ``OracleIntegrityError`` if any sampled matrix
    develops an eigenvalue below -1e-6.
    """
    rho0 = check_density_matrix(np.asarray(rho0, dtype=complex))
    if times is None:
        times = np.linspace(0.0, t_end, 201)
    times = np.asarray(times, dtype=float)
    gamma = params.gamma
    warm: list[float | None] = [None]

    def odefun(t, y):
        rho = unvectorize(y)
        rho = 0.5 * (rho + rho.conj().T)
        a = min(max((rho[0, 0] + 0.5 * (rho[1, 1] + rho[2, 2])).real, 0.0), 1.0)
        x = rho[1, 2].real
        gi, gbar = solve_self_consistent(a, x, 0.0, params, warm[0])
        warm[0] = gi
        rates = RateSet.symmetric(rate_scale * gi, rate_scale * gbar, gamma)
        gen = build_liouvillian(rates, gamma_cross=gamma_cross)
        return gen.matrix @ vectorize(rho)

    sol = solve_ivp(odefun, (0.0, t_end), vectorize(rho0), method="RK45",
                    rtol=rel_tol, atol=abs_tol, t_eval=times)
    if sol.status != 0:
        raise OracleIntegrityError(f"full propagation failed: {sol.message}")

    rhos = np.empty((len(sol.t), 4, 4), dtype=complex)
    for k in range(len(sol.t)):
        rho = unvectorize(sol.y[:, k])
        rho = 0.5 * (rho + rho.conj().T)
        low = np.linalg.eigvalsh(rho).min()
        if low < -1e-6:
            raise OracleIntegrityError(
                f"positivity violated at t={sol.t[k]}: min eigenvalue {low}")
        rhos[k] = rho
    return sol.t, rhos


@dataclass(frozen=True)
class SpectralReport:
    """Eigenstructure summary of a generator."""

    abscissa: float                 # largest real part of the spectrum
    eigenvalues: np.ndarray
    stationary: np.ndarray | None   # unit-trace kernel element, if one exists

    @property
    def is_contractive(self) -> bool:
        return self.abscissa <= 1e-10


def spectral_check(liouvillian: Liouvillian) -> SpectralReport:
    """Eigen-decompose a generator and extract its stationary state.

    For physical rate sets (positive semidefinite jump-rate matrices) the
    spectrum lies in the closed left half-plane.  The stationary state is
    the kernel eigenvector rescaled to unit trace; it is reported as None
    when the kernel is degenerate (e.g. the all-zero generator, where every
    state is stationary) or traceless.
    """
    evals, evecs = np.linalg.eig(liouvillian.matrix)
    abscissa = float(evals.real.max())
    scale = max(float(np.abs(evals).max()), 1.0)
    kernel = np.flatnonzero(np.abs(evals) <= 1e-9 * scale)
    stationary = None
    if len(kernel) == 1:
        cand = unvectorize(evecs[:, kernel[0]])
        tr = np.trace(cand)
        if abs(tr) > 1e-9:
            cand = cand / tr
            stationary = 0.5 * (cand + cand.conj().T)
    return SpectralReport(abscissa=abscissa, eigenvalues=evals, stationary=stationary)
