"""An evaluable membership detector built from sin, +, x, constants and a switch.

``F(j, x)`` is a surrogate with the five properties the detection argument
needs: even in every coordinate, nonnegative, above 1 everywhere for
non-members, at most 1 only near integer-square witnesses, and impossible to
evaluate without calling the verifier.  ``H = rho(F)`` turns "``F <= 1``
somewhere" into a nonzero signal; ``B_j(t)`` threads ``H_j`` along a
one-parameter decoding curve and ``K(j)`` integrates it against a cutoff.
Because ``B_j`` vanishes for ``t**2 < nu(j) - 1``, any finite upper limit of
integration bounds the waiting times it can detect.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal, Union

import numpy as np

from .blip import phi_array
from .resets import ArityMismatch, DiophantineVerifier

__all__ = [
    "Add",
    "ArityMismatch",
    "ConstPi",
    "ConstRational",
    "CutoffIntegral",
    "DecodingFamily",
    "FDevice",
    "IndexOutOfRange",
    "K",
    "Mul",
    "NonConvergentQuadrature",
    "Rho",
    "Sin",
    "Var",
    "B",
    "F",
    "H",
    "bound_beta_from_upper_limit",
    "decode",
    "eval_expr",
    "rho",
]

RhoVariant = Literal["piecewise", "smooth"]


class IndexOutOfRange(IndexError):
    pass


class NonConvergentQuadrature(ArithmeticError):
    pass


################################################################################
# Expression trees over the closed class


@dataclass(frozen=True)
class Add:
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Mul:
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Sin:
    arg: Expr


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class ConstRational:
    p: int
    q: int = 1

    def __post_init__(self):
        if self.q == 0:
            raise ZeroDivisionError("rational constant with zero denominator")


@dataclass(frozen=True)
class ConstPi:
    pass


@dataclass(frozen=True)
class Rho:
    arg: Expr
    variant: RhoVariant = "piecewise"


Expr = Union[Add, Mul, Sin, Var, ConstRational, ConstPi, Rho]


def arity(expr: Expr) -> int:
    """Number of variables the expression reads (max index + 1)."""
    if isinstance(expr, Var):
        return expr.index + 1
    if isinstance(expr, (Add, Mul)):
        return max(arity(expr.left), arity(expr.right))
    if isinstance(expr, (Sin, Rho)):
        return arity(expr.arg)
    return 0


def eval_expr(expr: Expr, xs):
    """Evaluate ``expr`` at ``xs``; coordinates may be floats or numpy arrays."""
    need = arity(expr)
    if len(xs) < need:
        raise ArityMismatch(f"expression reads {need} variables, got {len(xs)}")
    return _eval(expr, xs)


def _eval(e, xs):
    if isinstance(e, Add):
        return _eval(e.left, xs) + _eval(e.right, xs)
    if isinstance(e, Mul):
        return _eval(e.left, xs) * _eval(e.right, xs)
    if isinstance(e, Sin):
        return np.sin(_eval(e.arg, xs))
    if isinstance(e, Var):
        return xs[e.index]
    if isinstance(e, ConstRational):
        return float(Fraction(e.p, e.q))
    if isinstance(e, ConstPi):
        return math.pi
    if isinstance(e, Rho):
        return rho(e.variant, _eval(e.arg, xs))
    raise TypeError(f"not an expression node: {e!r}")


def rho(variant: RhoVariant, x):
    """Switch with ``rho(0) = 1`` and ``rho(x) = 0`` for ``x >= 1``.

    ``piecewise`` is ``(|x - 1| - (x - 1)) / 2``; ``smooth`` is the bump
    ``phi``, which is only meaningful for ``x >= 0``.
    """
    if variant == "piecewise":
        y = np.asarray(x, dtype=float) - 1.0
        out = 0.5 * (np.abs(y) - y)
    elif variant == "smooth":
        out = phi_array(x)
    else:
        raise ValueError(f"unknown rho variant {variant!r}")
    return float(out) if np.ndim(out) == 0 else out


# sin^2(pi y) and cos^2(pi y) as closed-class trees in one variable
_PI_Y = Mul(ConstPi(), Var(0))
_SIN2 = Mul(Sin(_PI_Y), Sin(_PI_Y))
_COS_PI_Y = Sin(Add(_PI_Y, Mul(ConstRational(1, 2), ConstPi())))
_COS2 = Mul(_COS_PI_Y, _COS_PI_Y)


################################################################################
# The detector


def nearest_natural(y):
    """Nearest natural number, ties rounded up."""
    return np.maximum(np.floor(np.asarray(y, dtype=float) + 0.5), 0).astype(np.int64)


class FDevice:
    """Surrogate ``F`` over a verifier with ``k`` witness coordinates.

    ``F(j, x) = 2 V(j, <x_1^2>, ..., <x_k^2>) prod cos^2(pi x_i^2)
    + 4k sum sin^2(pi x_i^2)``

    with ``<y>`` the nearest natural.  If ``V >= 1`` then ``F >= 2``; the
    mask ``prod cos^2`` vanishes at every rounding seam, so ``F`` is
    continuous.  ``verifier_calls`` counts verifier evaluations.
    """

    def __init__(self, verifier: DiophantineVerifier, rho_variant: RhoVariant = "piecewise"):
        self.verifier = verifier
        self.k = verifier.arity
        self.rho_variant = rho_variant
        self.verifier_calls = 0

    def __repr__(self):
        return f"FDevice(k={self.k}, rho_variant={self.rho_variant!r})"

    def _coords(self, x):
        if len(x) != self.k:
            raise ArityMismatch(f"F takes {self.k} coordinates, got {len(x)}")
        return np.broadcast_arrays(*(np.asarray(xi, dtype=float) for xi in x))

    def F(self, j: int, x):
        xs = self._coords(x)
        squares = [xi * xi for xi in xs]
        ints = np.stack([nearest_natural(s) for s in squares], axis=-1)
        v = self.verifier.evaluate_grid(j, ints).astype(float)
        self.verifier_calls += int(v.size)
        mask = 1.0
        penalty = 0.0
        for s in squares:
            mask = mask * eval_expr(_COS2, [s])
            penalty = penalty + eval_expr(_SIN2, [s])
        out = 2.0 * v * mask + 4.0 * self.k * penalty
        return float(out) if np.ndim(out) == 0 else out

    def H(self, j: int, x):
        return rho(self.rho_variant, self.F(j, x))


def F(dev: FDevice, j: int, x):
    return dev.F(j, x)


def H(dev: FDevice, j: int, x):
    return dev.H(j, x)


################################################################################
# One-parameter decoding


@dataclass(frozen=True)
class DecodingFamily:
    """Coordinates ``(t)_i = t sin(t^(2i-1))``, ``i = 1..k``; ``|(t)_i| <= t``."""

    k: int

    def decode(self, t, i: int):
        if not 1 <= i <= self.k:
            raise IndexOutOfRange(f"coordinate {i} outside 1..{self.k}")
        t = np.asarray(t, dtype=float)
        out = t * np.sin(t ** (2 * i - 1))
        return float(out) if np.ndim(out) == 0 else out

    def point(self, t):
        return [self.decode(t, i) for i in range(1, self.k + 1)]

    def frequency(self, t: float) -> float:
        """Angular frequency of the innermost sine of the last coordinate at ``t``."""
        return (2 * self.k - 1) * t ** (2 * self.k - 2)


def decode(fam: DecodingFamily, t, i: int):
    return fam.decode(t, i)


def B(dev: FDevice, fam: DecodingFamily, j: int, t):
    """``H_j`` along the decoding curve."""
    if fam.k != dev.k:
        raise ArityMismatch(f"decoder has {fam.k} coordinates, device {dev.k}")
    return dev.H(j, fam.point(t))


################################################################################
# Cutoff integral


def _exp_cutoff(t):
    return np.exp(-t)


def _lorentz_cutoff(t):
    return 1.0 / (1.0 + t * t)


_CUTOFFS = {"exp": _exp_cutoff, "lorentz": _lorentz_cutoff}


@dataclass(frozen=True)
class CutoffIntegral:
    """Truncated ``int_0^B B_j(t) gamma(t) dt`` with step-halving refinement.

    The first grid resolves the decoded signal: the phase ``pi x_i^2`` of
    the detector moves at up to ``2 pi t^2 (2k - 1) t^(2k-2)`` per unit
    ``t`` at ``t = B``, sampled ``samples_per_period`` times per period.
    Composite Simpson estimates are compared across halvings until two
    successive ones agree within ``tol``.
    """

    upper_limit_B: float
    gamma: str = "exp"
    tol: float = 1e-10
    samples_per_period: int = 16
    max_halvings: int = 24
    max_points: int = 2**23

    def __post_init__(self):
        if not self.upper_limit_B > 0:
            raise ValueError("upper limit must be positive")
        if self.gamma not in _CUTOFFS:
            raise ValueError(f"unknown cutoff {self.gamma!r}")

    def cutoff(self, t):
        return _CUTOFFS[self.gamma](t)

    def initial_panels(self, k: int) -> int:
        b = self.upper_limit_B
        inner = (2 * k - 1) * max(b, 1.0) ** (2 * k - 2)
        rate = max(inner, 2.0 * math.pi * max(b, 1.0) ** 2 * inner)
        step = 2.0 * math.pi / rate / self.samples_per_period
        panels = max(16, math.ceil(b / step))
        return panels + panels % 2


def _simpson(values: np.ndarray, h: float) -> float:
    return h / 3.0 * (values[0] + values[-1] + 4.0 * values[1:-1:2].sum() + 2.0 * values[2:-1:2].sum())


def K(dev: FDevice, fam: DecodingFamily, cut: CutoffIntegral, j: int) -> float:
    """Approximate ``int_0^B B_j(t) gamma(t) dt``; nonnegative."""
    b = cut.upper_limit_B
    panels = cut.initial_panels(fam.k)
    t = np.linspace(0.0, b, panels + 1)
    values = B(dev, fam, j, t) * cut.cutoff(t)
    prev = _simpson(values, b / panels)
    for _ in range(cut.max_halvings):
        if 2 * panels + 1 > cut.max_points:
            break
        mid = (t[:-1] + t[1:]) / 2.0
        fresh = B(dev, fam, j, mid) * cut.cutoff(mid)
        merged = np.empty(2 * panels + 1)
        merged[0::2], merged[1::2] = values, fresh
        t = np.empty_like(merged)
        t[0::2], t[1::2] = np.linspace(0.0, b, panels + 1), mid
        panels *= 2
        values = merged
        cur = _simpson(values, b / panels)
        if abs(cur - prev) < cut.tol:
            return max(cur, 0.0)
        prev = cur
    raise NonConvergentQuadrature(f"K({j}) did not settle to {cut.tol:g} with upper limit {b}")


def bound_beta_from_upper_limit(upper: float) -> int:
    """Any waiting time detectable below ``upper`` is at most ``ceil(upper^2) + 1``."""
    if upper < 1:
        raise ValueError("upper limit must be >= 1")
    return math.ceil(upper * upper) + 1
