"""Tests for the global configuration object."""

import pytest

from weaktrace.config import MODES, WeaktraceConfig, config


def test_defaults():
    fresh = WeaktraceConfig()
    assert fresh.mode in MODES
    assert fresh.epsilon >= 0
    assert fresh.tolerance > 0
    assert 0 < fresh.anomalous_threshold <= 1


def test_setters_validate():
    with pytest.raises(ValueError):
        config.epsilon = -1e-3
    with pytest.raises(ValueError):
        config.mode = "second-order"
    with pytest.raises(ValueError):
        config.tolerance = 0
    with pytest.raises(ValueError):
        config.verdict_threshold = -0.1
    with pytest.raises(ValueError):
        config.anomalous_threshold = 1.5
    with pytest.raises(ValueError):
        config.probability_floor = -1.0


def test_setters_store_floats():
    config.epsilon = 0
    assert config.epsilon == 0.0 and isinstance(config.epsilon, float)
    config.mode = "exact"
    assert config.mode == "exact"


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("WEAKTRACE_EPSILON", "0.01")
    monkeypatch.setenv("WEAKTRACE_MODE", "exact")
    monkeypatch.setenv("WEAKTRACE_TOLERANCE", "1e-9")
    fresh = WeaktraceConfig()
    assert fresh.epsilon == 0.01
    assert fresh.mode == "exact"
    assert fresh.tolerance == 1e-9


def test_invalid_environment_values_are_ignored(monkeypatch):
    monkeypatch.setenv("WEAKTRACE_EPSILON", "-2")
    monkeypatch.setenv("WEAKTRACE_MODE", "fast")
    monkeypatch.setenv("WEAKTRACE_TOLERANCE", "tiny")
    fresh = WeaktraceConfig()
    assert fresh.epsilon == 1e-3
    assert fresh.mode == "first-order"
    assert fresh.tolerance == 1e-12
