"""Transmission policies for sensors wirelessly powered by a mobile control center."""

from .config import ScenarioConfig, build_scenario, load_config
from .scenario import (
    ChannelParams,
    EnergyParams,
    PowerProfile,
    Scenario,
    ScenarioGeometry,
    TimeGrid,
)

__version__ = "0.1.0"

__all__ = [
    "ChannelParams",
    "EnergyParams",
    "PowerProfile",
    "Scenario",
    "ScenarioConfig",
    "ScenarioGeometry",
    "TimeGrid",
    "build_scenario",
    "load_config",
    "__version__",
]
