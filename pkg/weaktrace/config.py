# weaktrace/config.py
# SPDX-License-Identifier: MIT
# Copyright (c) 2026 The weaktrace developers
"""Configuration management for weaktrace."""
from __future__ import annotations

from ._version import __version__

import os

MODES = ("exact", "first-order")


class WeaktraceConfig:
    """Global numeric defaults for simulations, verdicts and tolerances."""

    def __init__(self) -> None:
        self._epsilon: float = 1e-3
        self._mode: str = "first-order"
        self._tolerance: float = 1e-12
        self._verdict_threshold: float = 0.1
        self._anomalous_threshold: float = 0.25
        self._probability_floor: float = 1e-30
        self._load_from_env()

    def _load_from_env(self) -> None:
        if epsilon := os.getenv("WEAKTRACE_EPSILON"):
            try:
                value = float(epsilon)
                if value >= 0:
                    self._epsilon = value
            except ValueError:
                pass

        if mode := os.getenv("WEAKTRACE_MODE"):
            if mode in MODES:
                self._mode = mode

        if tolerance := os.getenv("WEAKTRACE_TOLERANCE"):
            try:
                value = float(tolerance)
                if value > 0:
                    self._tolerance = value
            except ValueError:
                pass

        if threshold := os.getenv("WEAKTRACE_VERDICT_THRESHOLD"):
            try:
                value = float(threshold)
                if value > 0:
                    self._verdict_threshold = value
            except ValueError:
                pass

        if threshold := os.getenv("WEAKTRACE_ANOMALOUS_THRESHOLD"):
            try:
                value = float(threshold)
                if 0 < value <= 1:
                    self._anomalous_threshold = value
            except ValueError:
                pass

        if floor := os.getenv("WEAKTRACE_PROBABILITY_FLOOR"):
            try:
                value = float(floor)
                if value >= 0:
                    self._probability_floor = value
            except ValueError:
                pass

    @property
    def epsilon(self) -> float:
        """Default kick strength used for numeric (exact-mode) runs."""
        return self._epsilon

    @epsilon.setter
    def epsilon(self, value: float) -> None:
        if value < 0:
            raise ValueError("Epsilon must be non-negative.")
        self._epsilon = float(value)

    @property
    def mode(self) -> str:
        """Default mirror coupling mode: 'exact' or 'first-order'."""
        return self._mode

    @mode.setter
    def mode(self, value: str) -> None:
        if value not in MODES:
            raise ValueError(f"Mode must be one of {MODES}, got {value!r}.")
        self._mode = value

    @property
    def tolerance(self) -> float:
        """Absolute tolerance for normalization, Hermiticity and unitarity checks."""
        return self._tolerance

    @tolerance.setter
    def tolerance(self, value: float) -> None:
        if value <= 0:
            raise ValueError("Tolerance must be positive.")
        self._tolerance = float(value)

    @property
    def verdict_threshold(self) -> float:
        """Smallest |coefficient| (in units of epsilon) counted as a first-order trace."""
        return self._verdict_threshold

    @verdict_threshold.setter
    def verdict_threshold(self, value: float) -> None:
        if value <= 0:
            raise ValueError("Verdict threshold must be positive.")
        self._verdict_threshold = float(value)

    @property
    def anomalous_threshold(self) -> float:
        """Smallest fidelity deficit counted as an anomalous (order unity) trace."""
        return self._anomalous_threshold

    @anomalous_threshold.setter
    def anomalous_threshold(self, value: float) -> None:
        if not 0 < value <= 1:
            raise ValueError("Anomalous threshold must lie in (0, 1].")
        self._anomalous_threshold = float(value)

    @property
    def probability_floor(self) -> float:
        """Numeric probabilities at or below this value count as zero."""
        return self._probability_floor

    @probability_floor.setter
    def probability_floor(self, value: float) -> None:
        if value < 0:
            raise ValueError("Probability floor must be non-negative.")
        self._probability_floor = float(value)


config = WeaktraceConfig()
