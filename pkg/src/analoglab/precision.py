"""Continuously variable quantities with a magnitude bound and a resolution."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

__all__ = ["Cvq", "Reading", "amplify", "gain_to_resolve", "precision_ratio", "quantize", "scale"]


@dataclass(frozen=True)
class Cvq:
    """A quantity bounded by ``bound_x`` and controllable to ``resolution_eps``.

    Both are in the same (arbitrary) unit.
    """

    bound_x: float
    resolution_eps: float
    label: str = ""

    def __post_init__(self):
        if not (self.resolution_eps > 0 and math.isfinite(self.bound_x)):
            raise ValueError("need finite bound and positive resolution")
        if self.bound_x < self.resolution_eps:
            raise ValueError(f"bound {self.bound_x} is below resolution {self.resolution_eps}")

    @classmethod
    def from_ratio(cls, ratio: float, bound_x: float = 1.0, label: str = "") -> Cvq:
        return cls(bound_x, bound_x / ratio, label)

    @property
    def ratio(self) -> float:
        return precision_ratio(self)


@dataclass(frozen=True)
class Reading:
    quantized_value: float
    clipped: bool = False


def precision_ratio(cvq: Cvq) -> float:
    """Dimensionless ``bound / resolution``."""
    return cvq.bound_x / cvq.resolution_eps


def scale(cvq: Cvq, factor: float) -> Cvq:
    """Change of unit: multiply bound and resolution by ``factor``."""
    if not factor > 0:
        raise ValueError("unit factor must be positive")
    return replace(cvq, bound_x=cvq.bound_x * factor, resolution_eps=cvq.resolution_eps * factor)


def quantize(cvq: Cvq, true_value: float) -> Reading:
    """Nearest multiple of the resolution, ties to the even multiple.

    Values outside ``[-bound, bound]`` saturate at the largest representable
    multiple and are flagged as clipped.
    """
    if not math.isfinite(true_value):
        raise ValueError("cannot quantize a non-finite value")
    eps = cvq.resolution_eps
    top = math.floor(cvq.bound_x / eps)
    k = round(true_value / eps)  # round() is half-to-even
    if abs(true_value) > cvq.bound_x or abs(k) > top:
        return Reading(math.copysign(top * eps, true_value), True)
    return Reading(k * eps, False)


def amplify(cvq: Cvq, gain: float) -> Cvq:
    """Scale the range by ``gain`` at unchanged resolution (PR grows by ``gain``)."""
    if gain < 1:
        raise ValueError("gain must be >= 1")
    return replace(cvq, bound_x=cvq.bound_x * gain)


def gain_to_resolve(cvq: Cvq, height: float, fraction: float = 0.5) -> float:
    """Smallest gain (>= 1) at which a feature of ``height`` reads above ``fraction * height``.

    The amplified value ``gain * height`` only has to round to the first
    nonzero multiple of the resolution, i.e. exceed ``eps / 2``; for
    ``fraction < 1`` that reading already clears the threshold.  So the
    answer is ``eps / (2 height)`` nudged past the rounding seam.
    """
    if height <= 0 or height > cvq.bound_x:
        raise ValueError("height must lie in (0, bound]")
    if not 0 < fraction < 1:
        raise ValueError("fraction must lie in (0, 1)")
    gain = max(1.0, cvq.resolution_eps / (2.0 * height))
    while quantize(amplify(cvq, gain), gain * height).quantized_value <= fraction * gain * height:
        gain = math.nextafter(gain, math.inf) * (1.0 + 1e-12)
    return gain
