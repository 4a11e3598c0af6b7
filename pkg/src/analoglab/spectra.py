"""Line-or-band spectra and their finite-resolution measurement.

Two diagonal operator models are built from an enumeration:

``T``  one spectral feature per question ``j < J`` at ``5 - 4 * 2**-j``: a
       line if ``j`` was not enumerated within the row budget, otherwise a
       band of width ``2 * 2**-nu(j)``;
``S``  eigenvalues ``2**-a(n)`` for the first ``N`` rows.

A measurement at resolution ``eps`` merges features closer than ``eps`` and
calls a merged feature a band iff its extent is at least ``2 eps``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence, Union

import numpy as np

from .resets import Enumerator, SyntheticSchedule, WaitingTimeTable

__all__ = [
    "Band",
    "Line",
    "OperatorApprox",
    "RequiresSyntheticGroundTruth",
    "SpectralFeature",
    "SpectrumReading",
    "build_S",
    "build_T",
    "classify_membership",
    "lambda_j",
    "measure",
    "rows_needed",
    "s_mode_resolution",
    "t_mode_resolution",
]

Mode = Literal["T", "S"]


class RequiresSyntheticGroundTruth(TypeError):
    pass


@dataclass(frozen=True)
class Line:
    position: float

    kind = "line"

    @property
    def lo(self) -> float:
        return self.position

    @property
    def hi(self) -> float:
        return self.position


@dataclass(frozen=True)
class Band:
    center: float
    width: float

    kind = "band"

    @property
    def lo(self) -> float:
        return self.center - self.width / 2

    @property
    def hi(self) -> float:
        return self.center + self.width / 2


SpectralFeature = Union[Line, Band]


@dataclass(frozen=True)
class OperatorApprox:
    """Diagonal operator model.

    A band is stored as ``M`` equally spaced eigenvalues; ``bands`` lists the
    index ranges ``[start, stop)`` of ``eigenvalues`` that sample one
    continuous band, so measurement treats them as connected.
    """

    dimension: int
    eigenvalues: tuple[float, ...]
    rows_used: int
    bands: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if len(self.eigenvalues) > self.dimension:
            raise ValueError("more eigenvalues than the dimension")


@dataclass(frozen=True)
class SpectrumReading:
    resolution: float
    detected: tuple[Line | Band, ...] = field(default_factory=tuple)

    def feature_near(self, x: float) -> Line | Band | None:
        """The feature containing ``x`` or, failing that, the nearest one within ``resolution``."""
        best, best_d = None, None
        for f in self.detected:
            d = max(f.lo - x, x - f.hi, 0.0)
            if d < self.resolution and (best_d is None or d < best_d):
                best, best_d = f, d
        return best


def lambda_j(j: int) -> float:
    return 5.0 - 4.0 * 2.0 ** -j


def build_T(enumeration: Enumerator, J: int, budget: int, M: int = 8) -> OperatorApprox:
    if M < 2:
        raise ValueError("bands need at least two sample points")
    table = WaitingTimeTable(enumeration, budget)
    eig: list[float] = []
    bands = []
    for j in range(J):
        lam = lambda_j(j)
        nu = table.nu(j)
        if nu is None:
            eig.append(lam)
            continue
        width = 2.0 * 2.0 ** -nu
        start = len(eig)
        eig.extend(np.linspace(lam - width / 2, lam + width / 2, M).tolist())
        bands.append((start, len(eig)))
    rows = table.rows_consulted() if J else 0
    return OperatorApprox(len(eig), tuple(eig), rows, tuple(bands))


def build_S(enumeration: Enumerator, N: int) -> OperatorApprox:
    values = enumeration.prefix(N)
    if len(values) < N:
        raise ValueError(f"enumeration only reaches {len(values)} of {N} rows")
    return OperatorApprox(N, tuple(2.0 ** -a for a in values), N)


def measure(op: OperatorApprox, eps: float) -> SpectrumReading:
    if not eps > 0:
        raise ValueError("resolution must be positive")
    if not op.eigenvalues:
        return SpectrumReading(eps, ())
    # merge connected band samples first, then anything closer than eps
    pieces: list[tuple[float, float]] = []
    in_band = set()
    for start, stop in op.bands:
        seg = op.eigenvalues[start:stop]
        pieces.append((min(seg), max(seg)))
        in_band.update(range(start, stop))
    pieces += [(v, v) for i, v in enumerate(op.eigenvalues) if i not in in_band]
    pieces.sort()

    clusters: list[list[float]] = []
    for lo, hi in pieces:
        if clusters and lo - clusters[-1][1] < eps:
            clusters[-1][1] = max(clusters[-1][1], hi)
        else:
            clusters.append([lo, hi])

    detected: list[Line | Band] = []
    for lo, hi in clusters:
        extent = hi - lo
        if extent >= 2 * eps:
            detected.append(Band((lo + hi) / 2, extent))
        else:
            detected.append(Line((lo + hi) / 2))
    return SpectrumReading(eps, tuple(detected))


def classify_membership(reading: SpectrumReading, j: int, mode: Mode) -> bool:
    """T: YES iff a band covers ``lambda_j``.  S: YES iff a line lies within ``eps`` of ``2**-j``."""
    if mode == "T":
        f = reading.feature_near(lambda_j(j))
        return isinstance(f, Band) and f.lo <= lambda_j(j) <= f.hi
    if mode == "S":
        target = 2.0 ** -j
        return any(isinstance(f, Line) and abs(f.position - target) < reading.resolution for f in reading.detected)
    raise ValueError(f"unknown mode {mode!r}")


def s_mode_resolution(j: int) -> float:
    """Resolution that isolates ``2**-j`` from its neighbours."""
    return 2.0 ** -(j + 1)


def t_mode_resolution(op: OperatorApprox, j: int) -> float:
    """Resolution fine enough to see any band around ``lambda_j``.

    Half the smallest band width present, capped at a quarter of the gap to
    the next question so lines never merge.
    """
    widths = [op.eigenvalues[b - 1] - op.eigenvalues[a] for a, b in op.bands]
    gap = 2.0 ** -(j + 1)
    return min([gap / 4] + [w / 4 for w in widths])


def rows_needed(enumeration: Enumerator, J: int, mode: Mode = "S", M: int = 8, max_rows: int | None = None) -> int:
    """Smallest truncation depth at which every ``j < J`` is classified correctly."""
    if not isinstance(enumeration, SyntheticSchedule):
        raise RequiresSyntheticGroundTruth("ground truth needs a synthetic schedule")
    if J == 0:
        return 0
    limit = enumeration.length if max_rows is None else max_rows
    members = enumeration.members
    for n in range(limit + 1):
        if mode == "S":
            op = build_S(enumeration, n)
            answers = [classify_membership(measure(op, s_mode_resolution(j)), j, "S") for j in range(J)]
        else:
            op = build_T(enumeration, J, n, M)
            answers = [classify_membership(measure(op, t_mode_resolution(op, j)), j, "T") for j in range(J)]
        if all(a == (j in members) for j, a in enumerate(answers)):
            return n
    raise ValueError(f"no truncation depth up to {limit} classifies every j < {J}")


def correct_answers(answers: Sequence[bool], members: frozenset[int]) -> list[bool]:
    return [a == (j in members) for j, a in enumerate(answers)]
