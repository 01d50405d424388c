"""Policies under a fixed information rate (FIRC).

The sensor transmits at one constant instantaneous rate inside a
truncated window [t1, t2] containing the closest approach and stays
silent outside it.  For the storage scheme, the minimal average
control-center power for a cumulative-throughput target ``r0`` reduces to
a one-dimensional search over the departing edge t2: at the optimum the
equivalent propagation attenuation at both window edges must match, which
pins t1 to t2 in closed form.  Inverting that map over ``r0`` yields the
best fixed-rate throughput at a given power budget.

A storage-free baseline is provided as well: constant downlink power with
a fixed-rate window sized so the instantaneous harvest covers the sensor
at every instant (binding at the window edge).
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .harvest_store_use import realize_policy
from .numerics import (
    expand_bracket,
    integrate_function,
    minimize_scalar,
    solve_monotone,
)
from .scenario import PowerProfile, Scenario, distance

log = logging.getLogger("whet.fixed_rate")

__all__ = [
    "FircSolution",
    "CtpFircSolution",
    "boundary_map",
    "required_avg_power",
    "min_power",
    "max_rate",
    "ctp_firc",
]


@dataclass(frozen=True)
class FircSolution:
    """A solved fixed-rate policy.

    ``instantaneous_rate`` is r0/(t2-t1) in bit/Hz/s; the window bounds
    are continuous (not grid-snapped), while the profiles sample them on
    the scenario grid.
    """

    r0: float
    t1: float
    t2: float
    P0_min: float
    instantaneous_rate: float
    p_v: PowerProfile
    p_c: PowerProfile
    p_s: PowerProfile
    delta_t_m: float
    eta: float
    burst_energy: float


@dataclass(frozen=True)
class CtpFircSolution:
    """Fixed-rate baseline under constant downlink power, no storage."""

    throughput: float
    instantaneous_rate: float
    t_half: float
    P0: float


def boundary_map(scenario: Scenario, t2: float) -> float:
    """Approaching window edge t1 matched to a departing edge t2.

    Solves the edge-attenuation equality
    d(t1)^(alpha_s+alpha_c) = d(t2)^alpha_s * d0^alpha_c for the negative
    root; the positive root lies outside the admissible t1 <= 0 domain.
    """
    geom, chan = scenario.geometry, scenario.channel
    if not 0.0 <= t2 <= geom.t_end * (1.0 + 1e-12):
        raise ValueError("t2 must lie in [0, t_end]")
    target = (
        geom.d0**chan.alpha_c * distance(geom, t2) ** chan.alpha_s
    ) ** (2.0 / (chan.alpha_s + chan.alpha_c))
    gap = max(target - geom.d0**2, 0.0)
    t1 = -math.sqrt(gap) / geom.v0
    if t1 < -geom.t_end:
        warnings.warn("matched t1 fell outside the pass; clamping to -t_end")
        t1 = -geom.t_end
    return t1


def required_avg_power(scenario: Scenario, r0: float, t1: float, t2: float) -> float:
    """Average control-center power that sustains ``r0`` on [t1, t2] (W).

    The fixed-rate term scales the two opportunistic path-loss integrals
    (two-hop loss while approaching, banked-at-t0 loss while departing);
    the circuit terms back-propagate the constant draw through the same
    transfer attenuations.  Strictly increasing in r0 for a fixed window.
    """
    geom, chan, en = scenario.geometry, scenario.channel, scenario.energy
    if r0 <= 0:
        raise ValueError("r0 must be positive")
    if not (t1 <= 0.0 <= t2):
        raise ValueError("the window must contain t = 0")
    if t2 <= t1:
        raise ValueError("empty window: the rate exponent diverges")
    n = scenario.numerics.quad_n
    if (t2 - t1) <= r0 / 1020.0:
        return math.inf  # rate exponent would overflow; window far too small
    rate_gain = 2.0 ** (r0 / (t2 - t1)) - 1.0
    two_hop = integrate_function(
        lambda t: distance(geom, t) ** (chan.alpha_s + chan.alpha_c), t1, 0.0, n
    )
    departing = geom.d0**chan.alpha_c * integrate_function(
        lambda t: distance(geom, t) ** chan.alpha_s, 0.0, t2, n
    )
    circuit = (
        integrate_function(lambda t: distance(geom, t) ** chan.alpha_c, t1, 0.0, n)
        + geom.d0**chan.alpha_c * t2
    )
    total_energy = (
        rate_gain * en.sigma0_sq * (two_hop + departing) / (en.xi * chan.Gs * chan.Gc)
        + en.P_cons * circuit / (en.xi * chan.Gc)
    )
    return total_energy * geom.v0 / (2.0 * geom.L0)


def _virtual_profile(scenario: Scenario, r0: float, t1: float, t2: float) -> PowerProfile:
    """Sample the fixed-rate virtual power on the grid (window snapped)."""
    geom, chan, en = scenario.geometry, scenario.channel, scenario.energy
    t = scenario.grid.times
    d = scenario.distances()
    rate_gain = 2.0 ** (r0 / (t2 - t1)) - 1.0
    uplink_need = rate_gain * en.sigma0_sq * d**chan.alpha_s / chan.Gs
    transfer_pow = np.where(t <= 0.0, d**chan.alpha_c, geom.d0**chan.alpha_c)
    values = (uplink_need + en.P_cons) * transfer_pow / (en.xi * chan.Gc)
    inside = (t >= t1) & (t <= t2)
    snap = scenario.grid.step / max(t2 - t1, scenario.grid.step)
    log.debug("window snapped to the grid; worst relative snap %.2e", snap)
    return PowerProfile(scenario.grid, np.where(inside, values, 0.0))


def _count_basins(values: np.ndarray) -> int:
    """Number of local minima seen by a sampled curve (boundary included)."""
    slope = np.sign(np.diff(values))
    basins = int(np.sum(np.diff(slope) > 0))
    if slope.size and slope[0] > 0:
        basins += 1
    if slope.size and slope[-1] < 0:
        basins += 1
    return max(basins, 1)


def _sweep_then_golden(objective, lo: float, hi: float, opts) -> tuple[float, float]:
    """Coarse unimodality-vetted sweep followed by golden refinement."""
    sweep = np.linspace(lo, hi, opts.coarse_sweep)
    values = np.array([objective(x) for x in sweep])
    finite_vals = values[np.isfinite(values)]
    multimodal = finite_vals.size >= 3 and _count_basins(finite_vals) > 1
    if multimodal or finite_vals.size < 3:
        if multimodal:
            log.warning(
                "window objective looks multimodal; falling back to a dense search"
            )
        sweep = np.linspace(lo, hi, 4096)
        values = np.array([objective(x) for x in sweep])
    best = int(np.argmin(values))
    if not math.isfinite(values[best]):
        raise ValueError("r0 is too large for this pass window")
    return minimize_scalar(
        objective,
        sweep[max(best - 1, 0)],
        sweep[min(best + 1, sweep.size - 1)],
        tol=opts.time_tol,
    )


def min_power(scenario: Scenario, r0: float) -> FircSolution:
    """Window minimizing the average power for a throughput target.

    Two one-dimensional searches cover the two optimum regimes: sweeping
    the departing edge with the approaching edge pinned by the
    edge-attenuation equality (interior optima), and, because cheap
    departing-half transfer often saturates the departing edge at t_end
    where that equality no longer binds, sweeping the approaching edge
    with t2 = t_end.  The better window wins.
    """
    geom = scenario.geometry
    opts = scenario.numerics

    def matched_edges(t2: float) -> float:
        if t2 <= 0.0:
            return math.inf
        return required_avg_power(scenario, r0, boundary_map(scenario, t2), t2)

    def saturated_departure(t1: float) -> float:
        return required_avg_power(scenario, r0, t1, geom.t_end)

    t2_a, p0_a = _sweep_then_golden(matched_edges, 0.0, geom.t_end, opts)
    t1_b, p0_b = _sweep_then_golden(saturated_departure, -geom.t_end, 0.0, opts)
    if p0_b < p0_a:
        t1_opt, t2_opt, p0_min = t1_b, geom.t_end, p0_b
    else:
        t1_opt, t2_opt, p0_min = boundary_map(scenario, t2_a), t2_a, p0_a

    p_v = _virtual_profile(scenario, r0, t1_opt, t2_opt)
    realized = realize_policy(scenario, p_v, scenario.energy.P_m)
    return FircSolution(
        r0=r0,
        t1=t1_opt,
        t2=t2_opt,
        P0_min=p0_min,
        instantaneous_rate=r0 / (t2_opt - t1_opt),
        p_v=p_v,
        p_c=realized.p_c,
        p_s=realized.p_s,
        delta_t_m=realized.delta_t_m,
        eta=realized.eta,
        burst_energy=realized.burst_energy,
    )


def max_rate(scenario: Scenario, P0: float | None = None) -> FircSolution:
    """Largest fixed-rate throughput affordable at average power P0.

    Inverts :func:`min_power` by bisecting the throughput target; the
    minimal power is monotone increasing in the target, so the root is
    unique.  If even a vanishing rate costs more than ``P0`` (circuit
    floor), a zero-rate solution is returned with a diagnostic log.
    """
    if P0 is None:
        P0 = scenario.energy.P0
    if P0 <= 0:
        raise ValueError("P0 must be positive")

    def residual(r0: float) -> float:
        return min_power(scenario, r0).P0_min - P0

    tiny = 1e-9
    if residual(tiny) >= 0.0:
        log.info("P0=%.3g W is below the feasibility floor; fixed-rate throughput 0", P0)
        grid = scenario.grid
        zero = PowerProfile(grid, np.zeros(grid.n))
        return FircSolution(
            r0=0.0, t1=0.0, t2=0.0, P0_min=P0, instantaneous_rate=0.0,
            p_v=zero, p_c=zero, p_s=zero, delta_t_m=0.0, eta=0.0, burst_energy=0.0,
        )
    bracket = expand_bracket(
        residual,
        tiny,
        1.0,
        max_growth=scenario.numerics.max_bracket_growth,
        tol=0.0,
        max_iter=80,
    )
    r0 = solve_monotone(residual, bracket, f_tol=1e-9 * P0)
    return min_power(scenario, r0)


def ctp_firc(scenario: Scenario, P0: float | None = None) -> CtpFircSolution:
    """Best fixed-rate schedule under constant downlink power, no storage.

    The sensor transmits at a constant rate on a symmetric window
    [-T, +T]; without storage the rate is capped by the instantaneous
    harvest at the window edge, so the throughput is 2T times the edge
    rate, maximized over T.
    """
    geom, chan, en = scenario.geometry, scenario.channel, scenario.energy
    if P0 is None:
        P0 = en.P0

    def edge_rate(t_half: float) -> float:
        d = distance(geom, t_half)
        p_s = max(en.xi * chan.Gc * P0 / d**chan.alpha_c - en.P_cons, 0.0)
        return math.log2(1.0 + chan.Gs * p_s / (d**chan.alpha_s * en.sigma0_sq))

    def loss(t_half: float) -> float:
        return -2.0 * t_half * edge_rate(t_half)

    sweep = np.linspace(0.0, geom.t_end, scenario.numerics.coarse_sweep)
    best = int(np.argmin([loss(T) for T in sweep]))
    t_half, neg = minimize_scalar(
        loss,
        sweep[max(best - 1, 0)],
        sweep[min(best + 1, sweep.size - 1)],
        tol=scenario.numerics.time_tol,
    )
    throughput = -neg
    rate = edge_rate(t_half) if throughput > 0.0 else 0.0
    return CtpFircSolution(
        throughput=throughput,
        instantaneous_rate=rate,
        t_half=t_half,
        P0=P0,
    )
