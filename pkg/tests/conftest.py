"""Shared fixtures for the weaktrace test-suite."""

import numpy as np
import pytest

from weaktrace import config
from weaktrace.scenarios import ScenarioConfig, build_one_cycle_fig2, build_salih_fig1

_CONFIG_FIELDS = (
    "_epsilon",
    "_mode",
    "_tolerance",
    "_verdict_threshold",
    "_anomalous_threshold",
    "_probability_floor",
)


@pytest.fixture(autouse=True)
def restore_config():
    """Undo any change a test makes to the global configuration."""
    saved = {name: getattr(config, name) for name in _CONFIG_FIELDS}
    yield config
    for name, value in saved.items():
        setattr(config, name, value)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260101)


@pytest.fixture(scope="session")
def fig1():
    """Two-cycle circuit with the final H filter and first-order couplings."""
    return build_salih_fig1()


@pytest.fixture(scope="session")
def fig1_decoupled(fig1):
    return fig1.decoupled()


@pytest.fixture(scope="session")
def fig1_nofilter():
    return build_salih_fig1(ScenarioConfig(include_final_filter=False))


@pytest.fixture(scope="session")
def fig2_shutter():
    return build_one_cycle_fig2(True)[0]


@pytest.fixture(scope="session")
def fig2_open():
    return build_one_cycle_fig2(False)[0]
