"""Closed-form induced decay rates and their self-consistent solution.

The medium dresses each atom with an induced rate ``Gamma`` (incoherent pump
and stimulated decay) and a cross-atom rate ``Gammabar``.  Both are closed
forms in the instantaneous atomic variables (a, x), the two geometry knobs
(coop, rho_size) and the dressed linewidth Gamma_f = gamma/2 + Gamma itself,
so every evaluation is a scalar fixed-point problem in Gamma.

With the detuning written as ``delta`` (units of gamma) the ingredients are

    Gamma_f   = gamma/2 + Gamma
    zeta0     = (1/2) coop rho (gamma/Gamma_f) (2a - 1)
    zeta      = zeta0 * Gamma_f^2 / (Gamma_f^2 + delta^2)
    rho_tilde = rho - (delta/Gamma_f) zeta
    lorentz   = gamma Gamma_f / (Gamma_f^2 + delta^2)
    I(z, r)   = (((z-1) e^z + cos r)^2 + (r e^z - sin r)^2) / (z^2 + r^2)^2

    Gamma    = gamma a (coop rho gamma / Gamma_f) * Gamma_f^2/(Gamma_f^2+delta^2)
               * phi(2 zeta)  +  2 gamma coop^2 rho^4 lorentz x I(zeta, rho_tilde)
    Gammabar = 3 gamma coop rho lorentz a I(zeta, rho_tilde)
               + 2 gamma coop^2 rho^4 lorentz x I(zeta, rho_tilde)

where phi(z) = (e^z - 1)/z with phi(0) = 1.  The phi form is algebraically
identical to the raw a/(2a-1) (e^{2 zeta} - 1) expression but stays finite at
the removable singularity a = 1/2.

At full inversion the fixed point is astronomically far from the naive
iterate (the right-hand side at Gamma = 0 is e^{2 coop rho} - 1), so the
solver brackets the root and bisects instead of iterating.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .states import Parameters

__all__ = [
    "RateInputs",
    "RateIntermediates",
    "SpectralProfile",
    "SourceFunctions",
    "RateSolveError",
    "RateSaturationError",
    "NoRootError",
    "AmbiguousRootsError",
    "geometric_factor",
    "rate_rhs",
    "solve_self_consistent",
    "gamma_spectrum",
    "chirp_kk",
    "source_functions",
    "retarded_kernel",
    "cooperativity_from_density",
]

# upper cap of the root bracket, in units of gamma
_GAMMA_CAP = 1e12
# exponent beyond which exp() would overflow a float64
_EXP_OVERFLOW = 700.0


class RateSolveError(RuntimeError):
    """The self-consistent rate equation could not be solved."""


class RateSaturationError(RateSolveError):
    """The exponential gain factor overflowed; parameters are outside the
    validity range of the closed-form rates."""

    def __init__(self, zeta: float):
        self.zeta = zeta
        super().__init__(f"exponential gain e^(2 zeta) overflows for zeta = {zeta}")


class NoRootError(RateSolveError):
    """No sign change of rhs(Gamma) - Gamma on the search interval."""


class AmbiguousRootsError(RateSolveError):
    """More than one fixed point was bracketed; reports all brackets."""

    def __init__(self, brackets):
        self.brackets = list(brackets)
        super().__init__(f"rate equation has multiple candidate roots in {self.brackets}")


@dataclass(frozen=True)
class RateInputs:
    """Atomic variables and detuning at which the rates are evaluated."""

    a: float
    x: float
    delta: float
    params: Parameters

    def __post_init__(self):
        if not (0.0 <= self.a <= 1.0):
            raise ValueError(f"population a={self.a} outside [0, 1]")


@dataclass(frozen=True)
class RateIntermediates:
    """Diagnostic byproducts of one rate evaluation."""

    gamma_f: float      # dressed linewidth gamma/2 + Gamma
    zeta0: float        # on-resonance exponent
    zeta: float         # detuned exponent
    rho_tilde: float    # dispersion-corrected size argument
    geom: float         # geometric factor I(zeta, rho_tilde)


@dataclass(frozen=True)
class SpectralProfile:
    """Induced rate sampled on a symmetric detuning grid (units of gamma)."""

    grid: np.ndarray
    gamma_values: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        vals = np.asarray(self.gamma_values, dtype=float)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "gamma_values", vals)
        if grid.ndim != 1 or len(grid) < 2:
            raise ValueError("grid must be a 1-d array with at least two points")
        if np.any(np.diff(grid) <= 0.0):
            raise ValueError("grid must be strictly increasing")
        span = max(abs(grid[0]), abs(grid[-1]))
        if np.max(np.abs(grid + grid[::-1])) > 1e-9 * max(span, 1.0):
            raise ValueError("grid must be symmetric about zero")
        if vals.shape != grid.shape:
            raise ValueError("gamma_values must match the grid shape")


@dataclass(frozen=True)
class SourceFunctions:
    """Fourier-space emission sources at one detuning (scaled units)."""

    p1s: float          # single-atom incoherent source (Lorentzian)
    p2s: float          # two-atom exchange source (same Lorentzian, 2x numerator)
    p1ret: complex      # retarded single-atom response


def _phi(z: float, eps: float = 1e-8) -> float:
    """(e^z - 1)/z continued through z = 0; series branch below ``eps``."""
    if abs(z) < eps:
        return 1.0 + 0.5 * z + z * z / 6.0
    return math.expm1(z) / z


def geometric_factor(zeta: float, rho: float) -> float:
    """Interference factor I(zeta, rho) of the two-point emission kernel.

    Closed form (((zeta-1) e^zeta + cos rho)^2 + (rho e^zeta - sin rho)^2)
    / (zeta^2 + rho^2)^2, continued analytically to the value 1/4 at the
    origin where numerator and denominator vanish together.
    """
    rr = zeta * zeta + rho * rho
    if rr < 1e-10:
        # leading order of the expansion about the origin
        return 0.25
    if zeta > _EXP_OVERFLOW:
        raise RateSaturationError(zeta)
    ez = math.exp(zeta)
    re = (zeta - 1.0) * ez + math.cos(rho)
    im = rho * ez - math.sin(rho)
    return (re * re + im * im) / (rr * rr)


def rate_rhs(inputs: RateInputs, gamma_current: float
             ) -> tuple[float, float, RateIntermediates]:
    """One evaluation of the closed-form rates at a trial ``gamma_current``.

    Returns ``(gamma_next, gammabar, intermediates)`` where ``gamma_next`` is
    the right-hand side of the fixed-point equation for the induced rate.

    Raises
    ------
    RateSaturationError
        If the exponential gain factor overflows float64.
    """
    if gamma_current < 0.0:
        raise ValueError(f"gamma_current must be non-negative, got {gamma_current}")
    p = inputs.params
    gamma = p.gamma
    coop = p.coop
    rho = p.rho_size
    a = inputs.a
    x = inputs.x
    delta = inputs.delta

    gf = 0.5 * gamma + gamma_current
    lor = gf * gf / (gf * gf + delta * delta)
    zeta0 = 0.5 * coop * rho * (gamma / gf) * (2.0 * a - 1.0)
    zeta = zeta0 * lor
    rho_tilde = rho - (delta / gf) * zeta
    lorentz = gamma * gf / (gf * gf + delta * delta)

    if 2.0 * zeta > _EXP_OVERFLOW:
        raise RateSaturationError(zeta)
    geom = geometric_factor(zeta, rho_tilde)
    inter = RateIntermediates(gamma_f=gf, zeta0=zeta0, zeta=zeta,
                              rho_tilde=rho_tilde, geom=geom)

    pump = gamma * a * (coop * rho * gamma / gf) * lor * _phi(2.0 * zeta, p.series_epsilon)
    exchange = 2.0 * gamma * coop * coop * rho ** 4 * lorentz * x * geom
    gamma_next = pump + exchange
    gammabar = 3.0 * gamma * coop * rho * lorentz * a * geom + exchange
    return gamma_next, gammabar, inter


def _bracket_sign_changes(g, lo: float, hi: float, n: int) -> list[tuple[float, float]]:
    """Scan ``g`` on a log-spaced grid over [lo, hi]; return sign-change brackets."""
    pts = [lo]
    start = max(lo, 1e-9 * hi)
    pts.extend(np.geomspace(start, hi, n))
    brackets = []
    prev_t, prev_v = pts[0], g(pts[0])
    for t in pts[1:]:
        v = g(t)
        if prev_v == 0.0:
            brackets.append((prev_t, prev_t))
        elif v == 0.0 or (v < 0.0) != (prev_v < 0.0):
            brackets.append((prev_t, t))
        prev_t, prev_v = t, v
    return brackets


def solve_self_consistent(a: float, x: float, delta: float, params: Parameters,
                          warm_start: float | None = None, *,
                          detect_multiple: bool = False,
                          diagnostics: dict | None = None) -> tuple[float, float]:
    """Solve Gamma = rhs(Gamma) for the induced rate; returns (Gamma, Gammabar).

    The root of g(Gamma) = rhs(Gamma) - Gamma is bracketed on
    [0, min(rhs(0), 1e12 gamma)] and polished by Brent's method; a valid
    ``warm_start`` (e.g. the converged rate of the previous time step) shrinks
    the bracket first.  Naive fixed-point iteration is hopeless here: at full
    inversion rhs(0) = e^{2 coop rho} - 1.

    Raises
    ------
    NoRootError
        If g has no sign change on the search interval.
    AmbiguousRootsError
        With ``detect_multiple=True``, if more than one root is bracketed.
    """
    if not (0.0 <= a <= 1.0):
        raise ValueError(f"population a={a} outside [0, 1]")
    gamma = params.gamma
    tol = params.fixed_point_tol
    if params.coop == 0.0:
        if diagnostics is not None:
            diagnostics["iterations"] = 0
        return 0.0, 0.0

    inputs = RateInputs(a=a, x=x, delta=delta, params=params)
    evals = [0]

    def g(G: float) -> float:
        evals[0] += 1
        try:
            gamma_next, _, _ = rate_rhs(inputs, G)
        except RateSaturationError:
            # saturated rhs is effectively +infinity, far above any trial G
            return math.inf
        return gamma_next - G

    def finish(root: float) -> tuple[float, float]:
        gamma_next, gammabar, _ = rate_rhs(inputs, root)
        if diagnostics is not None:
            diagnostics["iterations"] = evals[0]
            diagnostics["residual"] = gamma_next - root
        if abs(gamma_next - root) > tol * max(root, gamma):
            raise RateSolveError(
                f"fixed point residual {gamma_next - root} exceeds tolerance at Gamma={root}")
        return root, gammabar

    cap = _GAMMA_CAP * gamma
    g0 = g(0.0)
    if g0 == 0.0:
        return finish(0.0)
    if g0 < 0.0:
        raise NoRootError(
            f"rhs(0) = {g0} < 0: no non-negative fixed point for a={a}, x={x}, delta={delta}")
    hi = min(g0, cap) if math.isfinite(g0) else cap

    if detect_multiple:
        brackets = _bracket_sign_changes(g, 0.0, hi, 64)
        if len(brackets) > 1:
            raise AmbiguousRootsError(brackets)

    lo = 0.0
    if warm_start is not None and 0.0 < warm_start <= hi:
        gw = g(warm_start)
        if abs(gw) <= tol * max(warm_start, gamma):
            return finish(warm_start)
        if gw > 0.0:
            # root lies above the warm start; expand upward
            lo = warm_start
            step = max(warm_start, gamma)
            t = warm_start
            while t < hi:
                t = min(t + step, hi)
                if g(t) <= 0.0:
                    hi = t
                    break
                lo = t
                step *= 2.0
        else:
            # root lies below; halve down towards zero
            hi = warm_start
            t = warm_start
            while t > 0.0:
                t = 0.0 if t < 1e-12 * gamma else 0.5 * t
                if g(t) >= 0.0:
                    lo = t
                    break
                hi = t

    # off resonance the rhs can grow with Gamma before rolling over, so the
    # naive upper bound rhs(0) may sit below the root; expand until bracketed
    while g(hi) > 0.0:
        if hi >= cap:
            raise NoRootError(
                f"no sign change of rhs(Gamma) - Gamma on [0, {cap}] for a={a}, x={x}")
        lo = hi
        hi = min(4.0 * hi + gamma, cap)
    root = brentq(g, lo, hi, xtol=1e-15 * gamma, rtol=4.0 * np.finfo(float).eps,
                  maxiter=300)
    return finish(float(root))


def gamma_spectrum(a: float, x: float, params: Parameters, grid: np.ndarray, *,
                   pin_rho_tilde: bool = False) -> SpectralProfile:
    """Self-consistent induced rate versus detuning on a symmetric grid.

    Each grid point is solved independently (no warm-start chaining), so the
    result does not depend on evaluation order.  With ``pin_rho_tilde`` the
    dispersion correction of the size argument is frozen at ``rho_size``,
    which removes the only odd-in-detuning ingredient and makes the profile
    exactly even.
    """
    grid = np.asarray(grid, dtype=float)
    values = np.empty_like(grid)
    for k, dp in enumerate(grid):
        try:
            if pin_rho_tilde:
                values[k] = _solve_pinned(a, x, float(dp), params)
            else:
                values[k], _ = solve_self_consistent(a, x, float(dp), params)
        except RateSolveError as exc:
            raise RateSolveError(f"rate solve failed at delta_prime={dp}: {exc}") from exc
    return SpectralProfile(grid=grid, gamma_values=values)


def _solve_pinned(a: float, x: float, delta: float, params: Parameters) -> float:
    """Self-consistent rate with rho_tilde frozen at rho_size (diagnostics)."""
    gamma = params.gamma
    coop = params.coop
    rho = params.rho_size
    if coop == 0.0:
        return 0.0

    def rhs(G: float) -> float:
        gf = 0.5 * gamma + G
        lor = gf * gf / (gf * gf + delta * delta)
        zeta = 0.5 * coop * rho * (gamma / gf) * (2.0 * a - 1.0) * lor
        lorentz = gamma * gf / (gf * gf + delta * delta)
        if 2.0 * zeta > _EXP_OVERFLOW:
            return math.inf
        geom = geometric_factor(zeta, rho)
        return (gamma * a * (coop * rho * gamma / gf) * lor * _phi(2.0 * zeta)
                + 2.0 * gamma * coop * coop * rho ** 4 * lorentz * x * geom)

    def g(G: float) -> float:
        return rhs(G) - G

    g0 = g(0.0)
    if g0 == 0.0:
        return 0.0
    if g0 < 0.0:
        raise NoRootError(f"rhs(0) < 0 at delta={delta}")
    cap = _GAMMA_CAP * gamma
    hi = min(g0, cap) if math.isfinite(g0) else cap
    lo = 0.0
    while g(hi) > 0.0:
        if hi >= cap:
            raise NoRootError(f"no bracket at delta={delta}")
        lo = hi
        hi = min(4.0 * hi + gamma, cap)
    return float(brentq(g, lo, hi, xtol=1e-15 * gamma,
                        rtol=4.0 * np.finfo(float).eps, maxiter=300))


def chirp_kk(profile: SpectralProfile, delta_eval: float) -> float:
    """Collective frequency shift from the rate spectrum by dispersion integral.

    Evaluates (1/pi) P int dD' Gamma(D') / (delta_eval - D') over the grid
    support.  The profile is interpolated piecewise-linearly and each segment
    integrated in closed form, which handles the principal-value singularity
    exactly (the divergent log terms of adjacent segments cancel).  The
    neglected tail is estimated from the endpoint values and reported through
    a warning when it is not negligible.

    Raises
    ------
    ValueError
        If ``delta_eval`` lies outside the open interior of the grid.
    """
    xg = profile.grid
    yg = profile.gamma_values
    if not (xg[0] < delta_eval < xg[-1]):
        raise ValueError(
            f"delta_eval={delta_eval} outside the open grid interval ({xg[0]}, {xg[-1]})")

    terms = []
    for k in range(len(xg) - 1):
        x0 = xg[k]
        x1 = xg[k + 1]
        m = (yg[k + 1] - yg[k]) / (x1 - x0)
        yline = yg[k] + m * (delta_eval - x0)   # segment's line at the pole
        u0 = delta_eval - x0
        u1 = delta_eval - x1
        if u0 != 0.0:
            terms.append(yline * math.log(abs(u0)))
        if u1 != 0.0:
            terms.append(-yline * math.log(abs(u1)))
        terms.append(-m * (x1 - x0))
    result = math.fsum(terms) / math.pi

    # tail estimate assuming ~1/D'^2 falloff beyond the grid
    span = xg[-1]
    tail = (abs(yg[-1]) * span / max(span - delta_eval, 1e-300)
            + abs(yg[0]) * abs(xg[0]) / max(abs(xg[0]) + delta_eval, 1e-300)) / math.pi
    scale = max(abs(result), np.max(np.abs(yg)), 1e-300)
    if tail > 1e-3 * scale:
        warnings.warn(
            f"spectral grid may be too short for the dispersion integral: "
            f"estimated tail contribution {tail:.3e} vs result {result:.3e}",
            stacklevel=2)
    return result


def source_functions(a: float, x: float, gamma_induced: float, delta_probe: float,
                     delta: float, gamma: float = 1.0) -> SourceFunctions:
    """Fourier-space emission sources at probe detuning ``delta_probe``.

    In scaled units (the dipole/density prefactor set to one):

        p1s   = 2 a Gf / (Gf^2 + (D' - D)^2)
        p2s   = 2 x Gf / (Gf^2 + (D' - D)^2)
        p1ret = (1 - 2a) / (Gf + i (D' - D))

    with Gf = gamma/2 + gamma_induced.  The incoherent sources are Lorentzian
    in the detuning; the retarded response changes sign at zero inversion.
    """
    if gamma_induced < 0.0:
        raise ValueError("gamma_induced must be non-negative")
    gf = 0.5 * gamma + gamma_induced
    det = delta_probe - delta
    denom = gf * gf + det * det
    return SourceFunctions(
        p1s=2.0 * a * gf / denom,
        p2s=2.0 * x * gf / denom,
        p1ret=(1.0 - 2.0 * a) / complex(gf, det),
    )


def retarded_kernel(r: float, p1ret: complex, scale: float = 1.0,
                    kappa: float = 0.0) -> complex:
    """Dressed spherical-wave propagation kernel at scaled radius ``r``.

    ``r`` is measured in units of c/omega.  The complex wave number is
    q0 = 1 + i kappa p1ret with coupling kappa = coop/2 in scaled units, and
    the kernel is D = -i scale e^{i q0 r} / r: for an absorbing medium
    (positive Im q0, inversion below one half) the amplitude falls faster
    than 1/r, for an inverted medium it grows.  Diagnostic only; the
    homogeneous dynamics never evaluates it.
    """
    if r <= 0.0:
        raise ValueError(f"radius must be positive, got {r}")
    q0 = 1.0 + 1j * kappa * p1ret
    return -1j * scale * np.exp(1j * q0 * r) / r


def cooperativity_from_density(number_density: float, wavelength: float) -> float:
    """Cooperativity parameter from atomic density and transition wavelength.

    C = density * wavelength^3 / (4 pi^2), proportional to the number of atoms
    in a cubic wavelength.
    """
    if number_density < 0.0:
        raise ValueError(f"number density must be non-negative, got {number_density}")
    if wavelength <= 0.0:
        raise ValueError(f"wavelength must be positive, got {wavelength}")
    return number_density * wavelength ** 3 / (4.0 * math.pi ** 2)
