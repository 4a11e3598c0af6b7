"""A computable signal whose derivative encodes membership.

Each element ``a(n)`` of the enumeration contributes a narrow smooth blip of
height ``4**-a(n)`` centred on ``2**-a(n)``; its running integral is a smooth
step.  The sum of the steps is a computable function ``f`` with
``f'(2**-j) = 4**-j`` for members and ``0`` otherwise.  A simulated
differentiator with quantized time and amplitude shows how fine the time
resolution must be before the blip of a member is seen.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .precision import Cvq, quantize
from .quadrature import ToleranceNotMet, adaptive_simpson
from .resets import BudgetExhausted, Enumerator, ScheduleExhausted, SyntheticSchedule, WaitingTimeTable

__all__ = [
    "BlipSpec",
    "DifferentiatorSim",
    "NotInSetWithinBudget",
    "Observation",
    "SignalF",
    "SignalValue",
    "ToleranceNotMet",
    "f_partial",
    "f_prime_exact",
    "perturbed_signal",
    "phi",
    "phi_array",
    "phi_integral",
    "psi",
    "run_differentiator",
    "step_Phi",
]

# internal accuracy for the integral of phi, in units of the blip area
_UNIT_TOL = 1e-14


class NotInSetWithinBudget(LookupError):
    pass


def phi(x: float) -> float:
    """Smooth bump ``exp(-x^2 / (1 - x^2))`` on ``|x| < 1``, zero elsewhere."""
    if abs(x) >= 1.0:
        return 0.0
    x2 = x * x
    return math.exp(-x2 / (1.0 - x2))


def phi_array(x):
    x = np.asarray(x, dtype=float)
    inside = np.abs(x) < 1.0
    x2 = np.where(inside, x * x, 0.0)
    return np.where(inside, np.exp(-x2 / (1.0 - x2)), 0.0)


@functools.lru_cache(maxsize=None)
def phi_integral(tol: float = 1e-15) -> float:
    """Integral of ``phi`` over ``[-1, 1]`` (about 1.2069)."""
    return 2.0 * adaptive_simpson(phi, 0.0, 1.0, tol / 2)


def _phi_cumulative(u: float, tol: float) -> float:
    """Integral of ``phi`` over ``[-1, u]``.

    Computed as ``I/2 +- int_0^|u|`` so that values on both sides of the
    centre share the cached half-integral; central differences across the
    centre then cancel it exactly.
    """
    if u <= -1.0:
        return 0.0
    if u >= 1.0:
        return phi_integral()
    half = 0.5 * phi_integral()
    if u == 0.0:
        return half
    inner = min(adaptive_simpson(phi, 0.0, abs(u), tol), half)
    return half + inner if u > 0 else half - inner


@dataclass(frozen=True)
class BlipSpec:
    n: int
    a_n: int

    @property
    def center(self) -> float:
        return 2.0 ** -self.a_n

    @property
    def height(self) -> float:
        return 4.0 ** -self.a_n

    @property
    def half_width(self) -> float:
        return 2.0 ** -(self.n + self.a_n + 2)

    @property
    def support(self) -> tuple[float, float]:
        return self.center - self.half_width, self.center + self.half_width

    @property
    def step_height(self) -> float:
        """Final value of the step: ``height * half_width * I_phi``."""
        return self.height * self.half_width * phi_integral()


def psi(spec: BlipSpec, x: float) -> float:
    return spec.height * phi((x - spec.center) / spec.half_width)


def step_Phi(spec: BlipSpec, x: float, tol: float = 1e-12) -> float:
    """``int_0^x psi``, to absolute error ``tol``.

    Zero left of the support and the exact final value right of it; only
    points inside the support are integrated numerically.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if x <= 0.0:
        return 0.0
    lo, hi = spec.support
    if x <= lo:
        return 0.0
    area = spec.height * spec.half_width
    if x >= hi:
        return area * phi_integral()
    u = (x - spec.center) / spec.half_width
    unit_tol = min(_UNIT_TOL, 0.5 * tol / area)
    return area * _phi_cumulative(u, unit_tol)


class SignalValue(NamedTuple):
    value: float
    tail_bound: float


@dataclass(frozen=True)
class SignalF:
    """Partial sum of the steps for ``n < n_terms``, minus any ``omitted`` indices."""

    enumeration: Enumerator
    n_terms: int | None = None
    omitted: frozenset[int] = frozenset()
    blips: tuple[BlipSpec, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n_terms = self.n_terms
        if n_terms is None:
            if not isinstance(self.enumeration, SyntheticSchedule):
                raise ValueError("n_terms is required for machine-mode enumerations")
            n_terms = self.enumeration.length
        blips = []
        for n in range(n_terms):
            try:
                blips.append(BlipSpec(n, self.enumeration.nth(n)))
            except (ScheduleExhausted, BudgetExhausted):
                break
        object.__setattr__(self, "n_terms", len(blips))
        object.__setattr__(self, "omitted", frozenset(self.omitted))
        object.__setattr__(self, "blips", tuple(blips))

    @property
    def active(self) -> tuple[BlipSpec, ...]:
        return tuple(b for b in self.blips if b.n not in self.omitted)

    @property
    def tail_bound(self) -> float:
        return 2.0 ** (1 - self.n_terms)

    def blip_for(self, j: int) -> BlipSpec | None:
        for b in self.active:
            if b.a_n == j:
                return b
        return None


def f_partial(sig: SignalF, x: float, tol: float = 1e-12) -> SignalValue:
    """Sum of the retained steps at ``x``, each to ``tol / n_terms``."""
    per_term = tol / max(sig.n_terms, 1)
    total = 0.0
    for b in sig.active:
        total += step_Phi(b, x, per_term)
    return SignalValue(total, sig.tail_bound)


def f_prime_exact(sig: SignalF, x: float) -> float:
    """Derivative of the partial sum: the one blip covering ``x``, or 0."""
    for b in sig.active:
        lo, hi = b.support
        if lo < x < hi:
            return psi(b, x)
    return 0.0


def perturbed_signal(sig: SignalF, j: int) -> SignalF:
    """The signal with the step that announces ``j`` removed."""
    nu = WaitingTimeTable(sig.enumeration, sig.n_terms).nu(j)
    if nu is None:
        raise NotInSetWithinBudget(f"{j} not enumerated within {sig.n_terms} terms")
    return SignalF(sig.enumeration, sig.n_terms, sig.omitted | {nu})


@dataclass(frozen=True)
class DifferentiatorSim:
    """A differentiator that reads time and amplitude through finite resolutions.

    ``fd_step`` defaults to the time resolution.  ``output_gain`` amplifies
    the output before it is quantized (and the detection level with it).
    """

    time_cvq: Cvq
    amp_cvq: Cvq
    fd_step: float | None = None
    detection_threshold_factor: float = 0.5
    output_gain: float = 1.0

    def __post_init__(self):
        if self.fd_step is None:
            object.__setattr__(self, "fd_step", self.time_cvq.resolution_eps)
        if self.fd_step < self.time_cvq.resolution_eps:
            raise ValueError("fd_step must be at least the time resolution")
        if not 0 < self.detection_threshold_factor < 1:
            raise ValueError("detection_threshold_factor must lie in (0, 1)")
        if self.output_gain < 1:
            raise ValueError("output_gain must be >= 1")


class Observation(NamedTuple):
    answer: bool
    time: float
    derivative: float
    reading: float
    clipped: bool


def run_differentiator(sim: DifferentiatorSim, sig: SignalF, j: int) -> Observation:
    """Ask whether ``j`` is a member by reading ``f'`` at ``2**-j``.

    Observation instant and stencil points are quantized in time; the
    central difference is then quantized in amplitude.  YES iff the reading
    exceeds ``detection_threshold_factor * 4**-j``.
    """
    target = 2.0 ** -j
    if target > sim.time_cvq.bound_x:
        raise ValueError(f"2**-{j} lies beyond the time bound")
    t = quantize(sim.time_cvq, target).quantized_value
    t_lo = quantize(sim.time_cvq, t - sim.fd_step).quantized_value
    t_hi = quantize(sim.time_cvq, t + sim.fd_step).quantized_value
    if t_hi > t_lo:
        slope = (f_partial(sig, t_hi).value - f_partial(sig, t_lo).value) / (t_hi - t_lo)
    else:
        slope = 0.0
    reading = quantize(sim.amp_cvq, sim.output_gain * slope)
    level = sim.detection_threshold_factor * sim.output_gain * 4.0 ** -j
    return Observation(abs(reading.quantized_value) > level, t, slope, reading.quantized_value, reading.clipped)
