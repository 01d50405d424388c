"""Policies for the harvest-and-use scheme (no energy storage).

Harvested energy must be spent the instant it arrives, so the sensor's
transmit power is pinned to the instantaneous harvest minus the circuit
draw.  Two control-center policies are provided: a constant-power
baseline (CTP) and the throughput-optimal adaptive policy (OTP), a
water-filling shape over the pass with an activation threshold that keeps
the sensor silent where the harvest could not even cover its circuit
power.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import waterfill
from .numerics import simpson
from .scenario import PowerProfile, Scenario

__all__ = ["HauSolution", "ctp_throughput", "otp_power_profile", "solve_otp"]


@dataclass(frozen=True)
class HauSolution:
    """A solved harvest-and-use policy.

    ``lambda1`` is the budget multiplier of the adaptive policy (``None``
    for CTP); ``throughput`` is cumulative over the pass in bit/Hz.
    """

    policy_kind: str
    p_c: PowerProfile
    p_s: PowerProfile
    throughput: float
    lambda1: float | None = None


def _channel(scenario: Scenario) -> waterfill.WaterfillChannel:
    chan, en = scenario.channel, scenario.energy
    d = scenario.distances()
    floor = d ** (chan.alpha_s + chan.alpha_c) * en.sigma0_sq / (en.xi * chan.Gs * chan.Gc)
    boost = d**chan.alpha_c * en.P_cons / (en.xi * chan.Gc)
    return waterfill.WaterfillChannel(floor=floor, boost=boost, dx=scenario.grid.step)


def _sensor_power(scenario: Scenario, p_c: np.ndarray) -> np.ndarray:
    """Instantaneous-harvest sensor power: (xi*|h_c|^2*p_c - P_cons)^+."""
    chan, en = scenario.channel, scenario.energy
    d = scenario.distances()
    harvest = en.xi * chan.Gc * p_c / d**chan.alpha_c
    return np.maximum(harvest - en.P_cons, 0.0)


def ctp_throughput(scenario: Scenario) -> HauSolution:
    """Constant transmission policy: p_c flat at P0 over the whole pass.

    The sensor transmits wherever the harvest exceeds the circuit draw;
    zero cumulative throughput is a valid outcome when P0 is too small to
    ever activate it.
    """
    chan, en = scenario.channel, scenario.energy
    d = scenario.distances()
    p_c = np.full(scenario.grid.n, en.P0)
    p_s = _sensor_power(scenario, p_c)
    rate = np.log2(1.0 + chan.Gs * p_s / (d**chan.alpha_s * en.sigma0_sq))
    return HauSolution(
        policy_kind="ctp",
        p_c=PowerProfile(scenario.grid, p_c),
        p_s=PowerProfile(scenario.grid, p_s),
        throughput=simpson(rate, scenario.grid.step),
    )


def otp_power_profile(scenario: Scenario, lambda1: float) -> PowerProfile:
    """Adaptive control-center power for a given budget multiplier.

    Water-filling against the two-hop path loss, with the activation
    refinement: samples where the implied sensor power would not be
    positive are zeroed rather than burning power below the circuit
    threshold.
    """
    if lambda1 <= 0:
        raise ValueError("lambda1 must be positive")
    w = 1.0 / (lambda1 * np.log(2.0))
    values = waterfill.power_values(_channel(scenario), w)
    return PowerProfile(scenario.grid, values)


def solve_otp(scenario: Scenario) -> HauSolution:
    """Adaptive policy with the budget constraint tight.

    The multiplier is bisected until the average of p_c equals P0; the
    throughput is the water-filling rate integral, which dominates the
    CTP value for the same scenario.
    """
    chan = _channel(scenario)
    w, lam = waterfill.solve_waterline(
        chan,
        scenario.energy_budget,
        rtol=scenario.numerics.lambda_rtol,
        max_growth=scenario.numerics.max_bracket_growth,
    )
    p_c = waterfill.power_values(chan, w)
    p_s = np.where(p_c > 0.0, _sensor_power(scenario, p_c), 0.0)
    throughput = simpson(waterfill.rate_values(chan, w), scenario.grid.step)
    return HauSolution(
        policy_kind="otp",
        p_c=PowerProfile(scenario.grid, p_c),
        p_s=PowerProfile(scenario.grid, p_s),
        throughput=throughput,
        lambda1=lam,
    )
