"""Adaptive Simpson quadrature with an absolute error target."""

from __future__ import annotations

import math
from typing import Callable

__all__ = ["ToleranceNotMet", "adaptive_simpson"]


class ToleranceNotMet(ArithmeticError):
    pass


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float,
    max_depth: int = 50,
) -> float:
    """Integrate ``f`` over ``[a, b]`` to absolute error ``tol``.

    Interval bisection with the usual ``|S2 - S1| <= 15 tol`` acceptance test
    and the Richardson correction ``(S2 - S1) / 15`` added to each accepted
    panel.  Raises :class:`ToleranceNotMet` when a panel still fails the test
    at ``max_depth``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if a == b:
        return 0.0
    if b < a:
        return -adaptive_simpson(f, b, a, tol, max_depth)
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _recurse(f, a, b, fa, fm, fb, whole, tol, max_depth)


def _recurse(f, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    delta = left + right - whole
    if abs(delta) <= 15.0 * tol:
        return left + right + delta / 15.0
    if depth <= 0 or m in (a, b) or not math.isfinite(delta):
        raise ToleranceNotMet(f"panel [{a!r}, {b!r}] did not converge (delta={delta:.3e})")
    return (
        _recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + _recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    )
