"""Scenario/experiment configuration: flat key = value files with sections.

An empty file yields the reference setup used throughout the shipped
experiments: 10 dB link gains, path-loss exponent 3 on both hops, 5 mW
circuit draw, 20 m/s pass speed, 50% harvesting efficiency, a sensor
10 m off a 200 m track, unit noise power, and a 2001-sample grid.

Value syntax
------------
* scalars:  ``xi = 0.5``, ``m = inf``
* sweeps:   ``snr_db = 60:110:1``  (inclusive endpoints)
* lists:    ``m_list = 3, 6, 50, inf``
* strings:  ``experiment = fig3a``

Unknown sections or keys are hard errors with the offending line number,
as are values that violate a physical invariant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .numerics import NumericsOptions
from .scenario import (
    ChannelParams,
    EnergyParams,
    Scenario,
    ScenarioGeometry,
    TimeGrid,
)

__all__ = ["ConfigError", "ScenarioConfig", "load_config", "build_scenario"]

EXPERIMENTS = ("single", "fig3a", "fig3b", "fig4", "fig5a", "fig5b")
POLICIES = ("ctp_hau", "otp_hau", "otp_hsu", "firc_hsu")


class ConfigError(ValueError):
    """Configuration file or override rejected; message carries file:line."""


@dataclass(frozen=True)
class Sweep:
    """Inclusive start:stop:step sweep."""

    start: float
    stop: float
    step: float

    def values(self) -> np.ndarray:
        if self.step <= 0:
            raise ConfigError("sweep step must be positive")
        count = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return self.start + self.step * np.arange(max(count, 1))


# key -> (section, kind); kind in {float, int, str, float_or_sweep, list, optional}
_SCHEMA: dict[str, tuple[str, str]] = {
    "d0": ("geometry", "float"),
    "l0": ("geometry", "float"),
    "v0": ("geometry", "float"),
    "gc_db": ("channel", "float"),
    "gs_db": ("channel", "float"),
    "alpha_c": ("channel", "float"),
    "alpha_s": ("channel", "float"),
    "m": ("channel", "float"),
    "xi": ("energy", "float"),
    "p_cons": ("energy", "float"),
    "sigma0_sq": ("energy", "float"),
    "snr_db": ("energy", "float_or_sweep"),
    "p0": ("energy", "optional_float"),
    "pm_over_p0_db": ("energy", "optional_float"),
    "grid_n": ("numerics", "int"),
    "lambda_rtol": ("numerics", "float"),
    "time_tol": ("numerics", "float"),
    "quad_n": ("numerics", "int"),
    "coarse_sweep": ("numerics", "int"),
    "experiment": ("experiment", "str"),
    "policy": ("experiment", "str"),
    "alpha0": ("experiment", "float_or_sweep"),
    "r0": ("experiment", "float_or_sweep"),
    "m_list": ("experiment", "list"),
    "trials": ("experiment", "int"),
    "base_seed": ("experiment", "int"),
    "out_dir": ("experiment", "str"),
}

_SECTIONS = ("geometry", "channel", "energy", "numerics", "experiment")


@dataclass(frozen=True)
class ScenarioConfig:
    """Fully resolved configuration with reference defaults."""

    d0: float = 10.0
    l0: float = 100.0
    v0: float = 20.0
    gc_db: float = 10.0
    gs_db: float = 10.0
    alpha_c: float = 3.0
    alpha_s: float = 3.0
    m: float = math.inf
    xi: float = 0.5
    p_cons: float = 5e-3
    sigma0_sq: float = 1.0
    snr_db: float | Sweep = 90.0
    p0: float | None = None
    pm_over_p0_db: float | None = None
    grid_n: int = 2001
    lambda_rtol: float = 1e-10
    time_tol: float = 1e-6
    quad_n: int = 401
    coarse_sweep: int = 64
    experiment: str = "single"
    policy: str = "otp_hsu"
    alpha0: float | Sweep = Sweep(2.0, 5.0, 0.25)
    r0: float | Sweep = 60.0
    m_list: tuple[float, ...] = (3.0, 6.0, 50.0, math.inf)
    trials: int = 1000
    base_seed: int = 20240810
    out_dir: str = "out"

    def __post_init__(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(
                f"experiment must be one of {', '.join(EXPERIMENTS)}; "
                f"got {self.experiment!r}"
            )
        if self.policy not in POLICIES:
            raise ConfigError(
                f"policy must be one of {', '.join(POLICIES)}; got {self.policy!r}"
            )
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.grid_n < 3 or self.grid_n % 2 == 0:
            raise ConfigError("grid_n must be an odd integer >= 3")


def _parse_scalar(text: str) -> float:
    t = text.strip().lower()
    if t in ("inf", "+inf", "infinity"):
        return math.inf
    return float(t)


def _parse_value(key: str, kind: str, raw: str, where: str):
    raw = raw.strip()
    try:
        if kind == "str":
            return raw
        if kind == "int":
            return int(raw)
        if kind in ("float", "optional_float"):
            return _parse_scalar(raw)
        if kind == "list":
            return tuple(_parse_scalar(p) for p in raw.split(","))
        if kind == "float_or_sweep":
            if ":" in raw:
                parts = [p.strip() for p in raw.split(":")]
                if len(parts) != 3:
                    raise ValueError("sweeps need start:stop:step")
                return Sweep(*(float(p) for p in parts))
            return _parse_scalar(raw)
    except ValueError as exc:
        raise ConfigError(f"{where}: bad value for {key!r}: {exc}") from None
    raise AssertionError(f"unhandled kind {kind}")


def parse_assignments(pairs: list[tuple[str, str, str]]) -> dict:
    """Validate (key, value, location) triples against the schema."""
    out: dict = {}
    for key, raw, where in pairs:
        key = key.strip().lower()
        if key not in _SCHEMA:
            raise ConfigError(f"{where}: unknown key {key!r}")
        _, kind = _SCHEMA[key]
        out[key] = _parse_value(key, kind, raw, where)
    return out


def load_config(path: str | Path, overrides: list[str] | None = None) -> ScenarioConfig:
    """Parse a configuration file, apply overrides, validate everything.

    ``overrides`` are ``key=value`` strings (optionally ``section.key``)
    that win over file values.  An empty or missing-section file is fine;
    a missing file is not.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    pairs: list[tuple[str, str, str]] = []
    section = None
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        where = f"{path}:{lineno}"
        stripped = line.strip()
        if not stripped or stripped.startswith(("#", ";")):
            continue
        if stripped.startswith("[") and stripped.endswith("]"):
            section = stripped[1:-1].strip().lower()
            if section not in _SECTIONS:
                raise ConfigError(f"{where}: unknown section [{section}]")
            continue
        if "=" not in stripped:
            raise ConfigError(f"{where}: expected 'key = value'")
        key, raw = stripped.split("=", 1)
        key = key.strip().lower()
        if key in _SCHEMA and section is not None and _SCHEMA[key][0] != section:
            raise ConfigError(
                f"{where}: key {key!r} belongs to section [{_SCHEMA[key][0]}]"
            )
        pairs.append((key, raw, where))
    values = parse_assignments(pairs)
    values.update(parse_overrides(overrides or []))
    try:
        cfg = ScenarioConfig(**values)
    except TypeError as exc:  # unexpected dataclass field
        raise ConfigError(str(exc)) from None
    _validate(cfg)
    return cfg


def parse_overrides(overrides: list[str]) -> dict:
    pairs = []
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r}: expected key=value")
        key, raw = item.split("=", 1)
        key = key.strip().lower()
        if "." in key:
            section, key = key.split(".", 1)
            if key in _SCHEMA and _SCHEMA[key][0] != section:
                raise ConfigError(
                    f"override {item!r}: key {key!r} belongs to "
                    f"section [{_SCHEMA[key][0]}]"
                )
        pairs.append((key, raw, f"override {item!r}"))
    return parse_assignments(pairs)


def _validate(cfg: ScenarioConfig) -> None:
    """Build the module types once so invariant violations surface early."""
    snr_probe = None
    if isinstance(cfg.snr_db, Sweep):
        snr_probe = float(cfg.snr_db.values()[0])
    try:
        build_scenario(cfg, snr_db=snr_probe)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _scalar(value: float | Sweep, key: str) -> float:
    if isinstance(value, Sweep):
        raise ConfigError(f"{key} must be a scalar here, not a sweep")
    return float(value)


def build_scenario(
    cfg: ScenarioConfig,
    *,
    snr_db: float | None = None,
    alpha0: float | None = None,
    m: float | None = None,
) -> Scenario:
    """Materialize a :class:`~whet.scenario.Scenario` from the config.

    ``snr_db``/``alpha0``/``m`` override the config values so sweep
    runners can reuse one config across their rows.  P0 is
    ``sigma0_sq * 10^(snr_db/10)`` unless an explicit ``p0`` is set.
    """
    geometry = ScenarioGeometry(d0=cfg.d0, L0=cfg.l0, v0=cfg.v0)
    alpha_c = cfg.alpha_c if alpha0 is None else alpha0
    alpha_s = cfg.alpha_s if alpha0 is None else alpha0
    channel = ChannelParams(
        Gc=10.0 ** (cfg.gc_db / 10.0),
        Gs=10.0 ** (cfg.gs_db / 10.0),
        alpha_c=alpha_c,
        alpha_s=alpha_s,
        m=cfg.m if m is None else m,
    )
    if snr_db is None and cfg.p0 is not None:
        p0 = cfg.p0
    else:
        snr = _scalar(cfg.snr_db, "snr_db") if snr_db is None else snr_db
        p0 = cfg.sigma0_sq * 10.0 ** (snr / 10.0)
    p_m = None
    if cfg.pm_over_p0_db is not None:
        p_m = p0 * 10.0 ** (cfg.pm_over_p0_db / 10.0)
    try:
        energy = EnergyParams(
            xi=cfg.xi,
            P_cons=cfg.p_cons,
            P0=p0,
            sigma0_sq=cfg.sigma0_sq,
            P_m=p_m,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    grid = TimeGrid.for_geometry(geometry, cfg.grid_n)
    numerics = NumericsOptions(
        lambda_rtol=cfg.lambda_rtol,
        time_tol=cfg.time_tol,
        quad_n=cfg.quad_n,
        coarse_sweep=cfg.coarse_sweep,
    )
    return Scenario(
        geometry=geometry,
        channel=channel,
        energy=energy,
        grid=grid,
        numerics=numerics,
    )
