import math

import numpy as np
import pytest

from whet.config import ScenarioConfig, build_scenario


@pytest.fixture
def ref_cfg():
    """Reference configuration (the shipped defaults)."""
    return ScenarioConfig()


@pytest.fixture
def ref_scenario(ref_cfg):
    """Reference scenario at 90 dB SNR."""
    return build_scenario(ref_cfg, snr_db=90.0)


def random_scenario(rng: np.random.Generator, grid_n: int = 401, **overrides):
    """One random-but-sane scenario for property sweeps."""
    params = dict(
        grid_n=grid_n,
        d0=float(rng.uniform(2.0, 30.0)),
        l0=float(rng.uniform(30.0, 300.0)),
        v0=float(rng.uniform(5.0, 40.0)),
        gc_db=float(rng.uniform(3.0, 17.0)),
        gs_db=float(rng.uniform(3.0, 17.0)),
        alpha_c=float(rng.uniform(2.0, 4.5)),
        alpha_s=float(rng.uniform(2.0, 4.5)),
        xi=float(rng.uniform(0.2, 1.0)),
        p_cons=float(rng.uniform(0.0, 0.02)),
    )
    params.update(overrides)
    snr_db = float(rng.uniform(70.0, 105.0))
    return build_scenario(ScenarioConfig(**params), snr_db=snr_db)


@pytest.fixture
def scenario_factory():
    return random_scenario
