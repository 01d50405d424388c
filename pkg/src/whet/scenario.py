"""Scenario description: geometry, link model, energy parameters, time grid.

A mobile control center drives past a sensor along a straight track at
constant speed, powering it over the downlink and collecting data over the
uplink.  Everything downstream (policy solvers, the fading simulator, the
experiment runners) consumes the immutable value types defined here.

Conventions
-----------
* Time ``t`` runs over one pass ``[-L0/v0, +L0/v0]`` with ``t = 0`` at the
  closest approach.
* Gains are linear power ratios, powers are watts, distances are meters.
* ``m = math.inf`` selects the deterministic channel (no small-scale
  fading); finite ``m >= 0.5`` selects Nakagami-m fading with unit mean
  power, i.e. squared magnitudes are Gamma(shape=m, mean=1).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .numerics import NumericsOptions

__all__ = [
    "ScenarioGeometry",
    "ChannelParams",
    "EnergyParams",
    "TimeGrid",
    "PowerProfile",
    "Scenario",
    "distance",
    "channel_gain",
    "energy_attenuation",
    "equivalent_attenuation",
    "sample_fading_trace",
]


@dataclass(frozen=True)
class ScenarioGeometry:
    """Track/coverage geometry of one sensor cell.

    Attributes
    ----------
    d0 : float
        Perpendicular distance from the sensor to the track (m).
    L0 : float
        Half-length of the track segment inside the coverage circle (m).
    v0 : float
        Speed of the control center (m/s).
    """

    d0: float
    L0: float
    v0: float

    def __post_init__(self) -> None:
        if not (self.d0 > 0 and self.L0 > 0 and self.v0 > 0):
            raise ValueError("d0, L0 and v0 must all be positive")

    @property
    def dm(self) -> float:
        """Coverage radius: distance from the sensor to either track end."""
        return math.hypot(self.d0, self.L0)

    @property
    def t_end(self) -> float:
        """Half-duration of one pass (s); the pass covers [-t_end, +t_end]."""
        return self.L0 / self.v0


@dataclass(frozen=True)
class ChannelParams:
    """Deterministic path-loss parameters plus the Nakagami fading shape.

    ``Gc``/``alpha_c`` describe the downlink (energy transfer), ``Gs``/
    ``alpha_s`` the uplink (data).  ``m`` is the Nakagami shape; ``inf``
    disables small-scale fading.
    """

    Gc: float
    Gs: float
    alpha_c: float
    alpha_s: float
    m: float = math.inf

    def __post_init__(self) -> None:
        if not (self.Gc > 0 and self.Gs > 0):
            raise ValueError("link gains must be positive")
        if not (math.isinf(self.m) or self.m >= 0.5):
            raise ValueError("Nakagami shape m must be >= 0.5 or infinite")
        for name, a in (("alpha_c", self.alpha_c), ("alpha_s", self.alpha_s)):
            if not 2.0 <= a <= 5.0:
                warnings.warn(
                    f"{name} = {a} outside the usual 2..5 path-loss range",
                    stacklevel=2,
                )

    @property
    def is_symmetric(self) -> bool:
        """True when both links share one gain and one exponent."""
        return self.Gc == self.Gs and self.alpha_c == self.alpha_s


@dataclass(frozen=True)
class EnergyParams:
    """Energy/power parameters of the link budget.

    Attributes
    ----------
    xi : float
        RF-to-stored-energy harvesting efficiency, in (0, 1].
    P_cons : float
        Constant baseband circuit power drawn whenever the sensor is
        active (W).
    P0 : float
        Average transmit power budget at the control center (W).
    sigma0_sq : float
        Uplink noise power (W).
    P_m : float or None
        Optional cap on the instantaneous control-center transmit power;
        ``None`` means unbounded (ideal burst allowed).
    """

    xi: float
    P_cons: float
    P0: float
    sigma0_sq: float
    P_m: float | None = None

    def __post_init__(self) -> None:
        if not 0 < self.xi <= 1:
            raise ValueError("xi must lie in (0, 1]")
        if self.P_cons < 0:
            raise ValueError("P_cons must be nonnegative")
        if self.P0 <= 0:
            raise ValueError("P0 must be positive")
        if self.sigma0_sq <= 0:
            raise ValueError("sigma0_sq must be positive")
        if self.P_m is not None and not self.P_m > self.P0:
            raise ValueError("P_m, when given, must exceed P0")


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(np.asarray(a, dtype=float))
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class TimeGrid:
    """Uniform sampling of one pass with an odd sample count.

    The center sample always sits exactly at t = 0 so that the closest
    approach (where several policies concentrate energy) is representable.
    """

    times: np.ndarray

    def __post_init__(self) -> None:
        times = _readonly(self.times)
        object.__setattr__(self, "times", times)
        n = times.size
        if n < 3 or n % 2 == 0:
            raise ValueError("grid needs an odd sample count >= 3")
        steps = np.diff(times)
        if steps.min() <= 0:
            raise ValueError("grid times must be strictly increasing")
        if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
            raise ValueError("grid must be uniform")
        if times[(n - 1) // 2] != 0.0:
            raise ValueError("center sample must sit exactly at t = 0")
        if not math.isclose(-times[0], times[-1], rel_tol=1e-12):
            raise ValueError("grid must be symmetric about t = 0")

    @classmethod
    def span(cls, t_end: float, n: int) -> "TimeGrid":
        """Build the grid of ``n`` samples covering ``[-t_end, +t_end]``."""
        if t_end <= 0:
            raise ValueError("t_end must be positive")
        times = np.linspace(-t_end, t_end, n)
        if n % 2 == 1:
            times[(n - 1) // 2] = 0.0
        return cls(times)

    @classmethod
    def for_geometry(cls, geom: ScenarioGeometry, n: int) -> "TimeGrid":
        return cls.span(geom.t_end, n)

    @property
    def n(self) -> int:
        return self.times.size

    @property
    def step(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    @property
    def center(self) -> int:
        """Index of the t = 0 sample."""
        return (self.n - 1) // 2


@dataclass(frozen=True)
class PowerProfile:
    """A nonnegative power trajectory sampled on a :class:`TimeGrid`."""

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        values = _readonly(self.values)
        object.__setattr__(self, "values", values)
        if values.shape != self.grid.times.shape:
            raise ValueError("profile length must match its grid")
        if values.min(initial=0.0) < 0.0:
            raise ValueError("power values must be nonnegative")

    @classmethod
    def constant(cls, grid: TimeGrid, level: float) -> "PowerProfile":
        return cls(grid, np.full(grid.n, float(level)))


@dataclass(frozen=True)
class Scenario:
    """Bundle of everything a policy solver needs."""

    geometry: ScenarioGeometry
    channel: ChannelParams
    energy: EnergyParams
    grid: TimeGrid
    numerics: NumericsOptions = field(default_factory=NumericsOptions)

    def __post_init__(self) -> None:
        if not math.isclose(self.grid.t_end, self.geometry.t_end, rel_tol=1e-9):
            raise ValueError("grid span must match the pass duration L0/v0")

    @property
    def pass_duration(self) -> float:
        """Length of one pass, 2*L0/v0 (s)."""
        return 2.0 * self.geometry.t_end

    @property
    def energy_budget(self) -> float:
        """Total transmit energy available per pass, P0 * 2*L0/v0 (J)."""
        return self.energy.P0 * self.pass_duration

    def distances(self) -> np.ndarray:
        """Control-center-to-sensor distance at every grid sample."""
        return distance(self.geometry, self.grid.times)


def _check_window(geom: ScenarioGeometry, t: np.ndarray | float) -> None:
    limit = geom.t_end * (1.0 + 1e-12) + 1e-15
    if np.max(np.abs(t)) > limit:
        raise ValueError(f"time outside the pass window [-{geom.t_end}, {geom.t_end}]")


def distance(geom: ScenarioGeometry, t: np.ndarray | float):
    """Distance between control center and sensor at time ``t`` (m).

    Even in ``t`` and minimized at the closest approach ``t = 0``.
    """
    t = np.asarray(t, dtype=float)
    _check_window(geom, t)
    out = np.hypot(geom.d0, geom.v0 * t)
    return float(out) if out.ndim == 0 else out


def channel_gain(
    geom: ScenarioGeometry,
    chan: ChannelParams,
    t: np.ndarray | float,
    link: str = "downlink",
):
    """Squared channel magnitude G/d(t)^alpha for the requested link."""
    d = distance(geom, t)
    if link == "downlink":
        return chan.Gc / d**chan.alpha_c
    if link == "uplink":
        return chan.Gs / d**chan.alpha_s
    raise ValueError(f"unknown link {link!r}")


def energy_attenuation(
    geom: ScenarioGeometry,
    chan: ChannelParams,
    energy: EnergyParams,
    t: np.ndarray | float,
):
    """End-to-end energy-transfer attenuation xi*Gc/d(t)^alpha_c.

    The fraction of control-center transmit power that lands in the
    sensor's energy store when transferred at time ``t``.  Unimodal with
    its maximum at t = 0, which is what makes the closest approach the
    best transfer opportunity.
    """
    d = distance(geom, t)
    return energy.xi * chan.Gc / d**chan.alpha_c


def equivalent_attenuation(
    geom: ScenarioGeometry,
    chan: ChannelParams,
    energy: EnergyParams,
    t: np.ndarray | float,
):
    """Combined transfer-plus-uplink attenuation under opportunistic transfer.

    While approaching (t <= 0) energy is transferred at the moment it is
    spent, so both hops see d(t); after the closest approach (t >= 0) the
    energy was banked at t = 0, so the transfer hop sees d0 while the
    uplink sees d(t).  Continuous at t = 0, increasing on [-t_end, 0] and
    decreasing on [0, t_end].
    """
    d = distance(geom, t)
    t = np.asarray(t, dtype=float)
    transfer_pow = np.where(t <= 0.0, d**chan.alpha_c, geom.d0**chan.alpha_c)
    out = energy.xi * chan.Gs * chan.Gc / (d**chan.alpha_s * transfer_pow)
    return float(out) if out.ndim == 0 else out


def sample_fading_trace(chan: ChannelParams, grid: TimeGrid, seed: int) -> np.ndarray:
    """Draw one squared-magnitude fading trace |beta(t)|^2 on the grid.

    Samples at distinct grid points are independent; the grid resolution
    therefore sets the effective coherence time.  With unit-power
    Nakagami-m amplitude fading the squared magnitude is Gamma
    distributed with shape ``m`` and mean 1 (variance ``1/m``).  An
    infinite ``m`` returns the all-ones deterministic trace.  The draw is
    a pure function of ``(seed, grid.n)``.
    """
    if math.isinf(chan.m):
        return np.ones(grid.n)
    rng = np.random.Generator(np.random.PCG64(seed))
    return rng.gamma(shape=chan.m, scale=1.0 / chan.m, size=grid.n)
