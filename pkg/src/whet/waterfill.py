"""Water-filling kernel shared by the adaptive policies.

Both adaptive policies reduce to the same structure: pick a waterline W
and transmit ``W - floor(t) + boost(t)`` wherever ``W > floor(t)``, where
``floor`` is the per-instant inverse channel quality (scaled noise power
after both hops) and ``boost`` is the extra power that tunnels the
constant circuit draw back to the control center.  The support rule
``W > floor`` simultaneously enforces the activation threshold: below it
the sensor could not transmit a positive rate, so spending power there is
wasted and the sample is zeroed.

The waterline relates to the Lagrange multiplier as ``W = 1/(lambda ln 2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import BracketedRoot, expand_bracket, simpson, solve_monotone

__all__ = ["WaterfillChannel", "power_values", "rate_values", "solve_waterline"]


@dataclass(frozen=True)
class WaterfillChannel:
    """Per-sample waterline floor and activation boost (both in watts)."""

    floor: np.ndarray
    boost: np.ndarray
    dx: float

    def __post_init__(self) -> None:
        if self.floor.shape != self.boost.shape:
            raise ValueError("floor and boost must have matching shapes")
        if np.any(self.floor <= 0.0):
            raise ValueError("waterline floor must be positive")


def power_values(chan: WaterfillChannel, waterline: float) -> np.ndarray:
    """Transmit power per sample at the given waterline."""
    active = waterline > chan.floor
    return np.where(active, waterline - chan.floor + chan.boost, 0.0)


def rate_values(chan: WaterfillChannel, waterline: float) -> np.ndarray:
    """Instantaneous uplink rate per sample (bit/Hz/s) at the waterline."""
    return np.log2(np.maximum(waterline / chan.floor, 1.0))


def solve_waterline(
    chan: WaterfillChannel,
    budget: float,
    rtol: float = 1e-10,
    max_growth: int = 60,
) -> tuple[float, float]:
    """Waterline that spends exactly ``budget`` joules over the pass.

    Returns ``(waterline, lagrange multiplier)``.  The transmit energy is
    continuous and strictly increasing in the waterline once the support
    is nonempty, so bisection converges unconditionally; the upper edge is
    widened geometrically until it overshoots the budget.
    """
    if budget <= 0:
        raise ValueError("energy budget must be positive")

    def residual(w: float) -> float:
        return simpson(power_values(chan, w), chan.dx) - budget

    span = chan.dx * (chan.floor.size - 1)
    lo = float(chan.floor.min())
    hi = lo + budget / span
    bracket = expand_bracket(
        residual, lo, hi, max_growth=max_growth, tol=0.0, max_iter=200
    )
    w = solve_monotone(residual, bracket, f_tol=rtol * budget)
    return w, 1.0 / (w * math.log(2.0))
