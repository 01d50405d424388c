"""Shared numerical kernels: quadrature, bisection, golden-section search.

All throughput and energy integrals in the package go through the
composite Simpson rules here; the Lagrange multipliers of the adaptive
policies and every rate/power inversion go through :func:`solve_monotone`;
the fixed-rate window optimization goes through :func:`minimize_scalar`.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

log = logging.getLogger("whet.numerics")

__all__ = [
    "NumericsOptions",
    "BracketedRoot",
    "simpson",
    "integrate",
    "integrate_function",
    "cumulative_simpson",
    "solve_monotone",
    "expand_bracket",
    "minimize_scalar",
]


@dataclass(frozen=True)
class NumericsOptions:
    """Tunable tolerances; the defaults reproduce all shipped experiments.

    Attributes
    ----------
    lambda_rtol : float
        Relative tolerance on the power-budget residual when bisecting a
        waterline multiplier.
    time_tol : float
        Absolute tolerance (s) of the golden-section window search.
    quad_n : int
        Sample count (odd) for Simpson quadrature over sub-intervals with
        non-grid endpoints.
    coarse_sweep : int
        Points in the coarse sweep that vets unimodality before a
        golden-section search; on failure the search falls back to a
        dense grid.
    max_bracket_growth : int
        Cap on geometric bracket expansions before giving up.
    """

    lambda_rtol: float = 1e-10
    time_tol: float = 1e-6
    quad_n: int = 401
    coarse_sweep: int = 64
    max_bracket_growth: int = 60


@dataclass(frozen=True)
class BracketedRoot:
    """A sign-changing interval handed to :func:`solve_monotone`."""

    lo: float
    hi: float
    tol: float = 1e-12
    max_iter: int = 200

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise ValueError("bracket needs lo < hi")


def simpson(values: np.ndarray, dx: float) -> float:
    """Composite Simpson integral of uniformly spaced samples.

    Requires an odd sample count (even interval count); exact for
    polynomials up to degree 3.
    """
    y = np.asarray(values, dtype=float)
    if y.ndim != 1 or y.size < 3 or y.size % 2 == 0:
        raise ValueError("Simpson rule needs a 1-d array with odd length >= 3")
    if dx <= 0:
        raise ValueError("dx must be positive")
    return float(dx / 3.0 * (y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-2:2].sum()))


def integrate(profile, dx: float | None = None) -> float:
    """Integral of a :class:`~whet.scenario.PowerProfile` or raw samples.

    Profiles carry their own uniform grid; raw arrays need ``dx``.
    """
    if hasattr(profile, "values") and hasattr(profile, "grid"):
        return simpson(profile.values, profile.grid.step)
    if dx is None:
        raise ValueError("raw sample arrays need an explicit dx")
    return simpson(np.asarray(profile, dtype=float), dx)


def integrate_function(
    f: Callable[[np.ndarray], np.ndarray], a: float, b: float, n: int = 401
) -> float:
    """Simpson integral of a vectorized function over [a, b].

    Used for integrals whose endpoints are not grid points (truncation
    windows, burst intervals).  ``n`` is rounded up to the next odd count.
    """
    if a == b:
        return 0.0
    if b < a:
        return -integrate_function(f, b, a, n)
    if n < 3:
        n = 3
    if n % 2 == 0:
        n += 1
    ts = np.linspace(a, b, n)
    return simpson(np.asarray(f(ts), dtype=float), (b - a) / (n - 1))


def cumulative_simpson(values: np.ndarray, dx: float) -> np.ndarray:
    """Running integral whose final entry equals :func:`simpson` exactly.

    Even-index entries are exact partial composite-Simpson sums.  Odd-index
    entries integrate the local parabola to its midpoint, clamped into the
    surrounding pair's range so that nonnegative integrands always yield a
    nondecreasing ledger (used by the energy-causality checks).
    """
    y = np.asarray(values, dtype=float)
    if y.ndim != 1 or y.size < 3 or y.size % 2 == 0:
        raise ValueError("cumulative Simpson needs a 1-d array with odd length >= 3")
    pair = dx / 3.0 * (y[:-2:2] + 4.0 * y[1:-1:2] + y[2::2])
    cum = np.zeros(y.size)
    cum[2::2] = np.cumsum(pair)
    first_half = dx / 12.0 * (5.0 * y[:-2:2] + 8.0 * y[1:-1:2] - y[2::2])
    lo = np.minimum(0.0, pair)
    hi = np.maximum(0.0, pair)
    cum[1::2] = cum[0:-2:2] + np.clip(first_half, lo, hi)
    return cum


def solve_monotone(f: Callable[[float], float], bracket: BracketedRoot,
                   f_tol: float | None = None) -> float:
    """Bisection root of a continuous monotone function on a bracket.

    Stops when the bracket width drops below ``bracket.tol`` or, when
    ``f_tol`` is given, as soon as ``|f| <= f_tol``.
    """
    lo, hi = float(bracket.lo), float(bracket.hi)
    f_lo, f_hi = f(lo), f(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if math.copysign(1.0, f_lo) == math.copysign(1.0, f_hi):
        raise ValueError(
            "no sign change on the bracket; widen the bracket and retry"
        )
    mid = 0.5 * (lo + hi)
    for _ in range(bracket.max_iter):
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if f_mid == 0.0 or (f_tol is not None and abs(f_mid) <= f_tol):
            return mid
        if math.copysign(1.0, f_mid) == math.copysign(1.0, f_lo):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
        if hi - lo < bracket.tol:
            break
    return 0.5 * (lo + hi)


def expand_bracket(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    *,
    grow_hi: bool = True,
    grow_lo: bool = False,
    factor: float = 2.0,
    max_growth: int = 60,
    tol: float = 1e-12,
    max_iter: int = 200,
) -> BracketedRoot:
    """Geometrically widen [lo, hi] until f changes sign across it."""
    f_lo, f_hi = f(lo), f(hi)
    for _ in range(max_growth):
        if f_lo == 0.0 or f_hi == 0.0:
            break
        if math.copysign(1.0, f_lo) != math.copysign(1.0, f_hi):
            break
        width = hi - lo
        if grow_hi:
            hi = hi + factor * width
            f_hi = f(hi)
        if grow_lo and math.copysign(1.0, f_lo) == math.copysign(1.0, f_hi):
            lo = lo - factor * width
            f_lo = f(lo)
    else:
        raise ValueError("could not bracket a sign change; widen the search range")
    return BracketedRoot(lo, hi, tol=tol, max_iter=max_iter)


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def minimize_scalar(
    f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-6
) -> tuple[float, float]:
    """Golden-section minimum of a unimodal function on [lo, hi].

    Returns ``(argmin, min)``.  The endpoints themselves compete with the
    interior result, so a monotone objective degrades gracefully to the
    better endpoint.
    """
    if not lo <= hi:
        raise ValueError("needs lo <= hi")
    a, b = float(lo), float(hi)
    best_end = min(((f(a), a), (f(b), b)))
    if b - a <= tol:
        return best_end[1], best_end[0]
    x1 = b - _INV_PHI * (b - a)
    x2 = a + _INV_PHI * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INV_PHI * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INV_PHI * (b - a)
            f2 = f(x2)
    x = x1 if f1 <= f2 else x2
    fx = min(f1, f2)
    if best_end[0] < fx:
        return best_end[1], best_end[0]
    return x, fx
