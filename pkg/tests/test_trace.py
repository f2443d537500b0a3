"""Tests for first-order and exact mirror traces."""

import numpy as np
import pytest

from weaktrace.engine import NULL
from weaktrace.hilbert import CHI_PERP, basis_state, is_density_matrix
from weaktrace.optics import WiringError
from weaktrace.scenarios import ScenarioConfig, build_salih_fig1
from weaktrace.trace import (
    ANOMALOUS_TRACE,
    FIRST_ORDER_TRACE,
    NO_TRACE,
    TraceReport,
    classify_trace,
    fidelity_deficit,
    mirror_state_at,
    strategy_c_branches,
    trace_exact,
    trace_first_order,
)


class TestClassify:

    def test_coefficient(self):
        assert classify_trace(coefficient=0.5) == FIRST_ORDER_TRACE
        assert classify_trace(coefficient=-0.5j) == FIRST_ORDER_TRACE
        assert classify_trace(coefficient=0.0) == NO_TRACE
        assert classify_trace(coefficient=0.05) == NO_TRACE

    def test_deficit(self):
        assert classify_trace(deficit=0.9) == ANOMALOUS_TRACE
        assert classify_trace(deficit=2.5e-7, epsilon=1e-3) == FIRST_ORDER_TRACE
        assert classify_trace(deficit=1e-14, epsilon=1e-3) == NO_TRACE
        assert classify_trace(deficit=0.0, epsilon=0.0) == NO_TRACE

    def test_anomalous_deficit_wins_over_coefficient(self):
        assert classify_trace(coefficient=0.0, deficit=1.0) == ANOMALOUS_TRACE

    def test_thresholds_follow_config(self, restore_config):
        restore_config.verdict_threshold = 0.6
        assert classify_trace(coefficient=0.5) == NO_TRACE


class TestFirstOrder:

    def test_d0_branch(self, fig1):
        reports = trace_first_order(fig1, "D0")
        assert reports["MR_B1"].coefficient == pytest.approx(0.5)
        assert reports["MR_B1"].coherent is True
        assert reports["MR_B1"].verdict == FIRST_ORDER_TRACE
        assert reports["MR_B3"].coefficient == pytest.approx(0.0)
        assert reports["MR_B3"].verdict == NO_TRACE
        assert reports["MR_B1"].probability == pytest.approx(0.25)

    def test_without_final_filter(self, fig1_nofilter):
        reports = trace_first_order(fig1_nofilter, "D0")
        assert reports["MR_B1"].coefficient == pytest.approx(0.5)
        assert reports["MR_B3"].coefficient == pytest.approx(-0.5)
        assert reports["MR_B3"].coherent is False
        assert all(report.verdict == FIRST_ORDER_TRACE for report in reports.values())

    def test_read_at_a_time_point(self, fig1):
        reports = trace_first_order(fig1, policy={"D_A1": NULL}, time="t8")
        assert reports["MR_B1"].coefficient == pytest.approx(-0.5)
        assert reports["MR_B1"].coherent is False

    def test_predicted_deficit(self, fig1):
        report = trace_first_order(fig1, "D0", epsilon=1e-3)["MR_B1"]
        assert report.predicted_deficit == pytest.approx(0.25e-6)

    def test_anomalous_when_chi_perp_at_zeroth_order(self):
        circuit = build_salih_fig1(ScenarioConfig(cycles=1))
        kicked = basis_state(circuit.registry, "src", "H", (CHI_PERP,))
        report = trace_first_order(circuit, "D_S", initial=kicked)["MR_B1"]
        assert report.verdict == ANOMALOUS_TRACE
        assert report.coefficient is None


class TestExact:

    def test_deficit_scales_with_epsilon_squared(self, fig1):
        for eps in (1e-2, 1e-3, 1e-4):
            reports = trace_exact(fig1, "D0", epsilon=eps)
            assert reports["MR_B1"].fidelity_deficit / eps**2 == pytest.approx(0.25, rel=1e-3)
            assert reports["MR_B1"].verdict == FIRST_ORDER_TRACE
            assert reports["MR_B3"].fidelity_deficit < 1e-2 * eps**2
            assert reports["MR_B3"].verdict == NO_TRACE

    def test_coherence(self, fig1):
        report = trace_exact(fig1, "D0", epsilon=1e-3)["MR_B1"]
        assert report.coherence == pytest.approx(0.5, rel=1e-4)

    def test_zero_coupling_leaves_no_trace(self, fig1):
        reports = trace_exact(fig1, "D0", epsilon=0.0)
        for report in reports.values():
            assert report.fidelity_deficit == 0.0
            assert report.verdict == NO_TRACE

    def test_mirror_state_is_a_density_matrix(self, fig1):
        for time in ("t5", "t8", "t9", None):
            rho = mirror_state_at(fig1, "MR_B1", time, outcome="D0", epsilon=0.05)
            assert is_density_matrix(rho, 1e-10)
        rho = mirror_state_at(fig1, "MR_B1", outcome="D0", epsilon=0.05)
        assert fidelity_deficit(rho) == pytest.approx(trace_exact(fig1, "D0", epsilon=0.05)["MR_B1"].fidelity_deficit)

    def test_as_dict_encodes_complex(self):
        report = TraceReport("M", "D0", FIRST_ORDER_TRACE, 1e-3, coefficient=0.5j)
        encoded = report.as_dict()
        assert encoded["coefficient"] == {"re": 0.0, "im": 0.5}
        assert encoded["predicted_deficit"] == pytest.approx(0.25e-6)
        assert encoded["fidelity_deficit"] is None


class TestStrategyC:

    def test_branches(self):
        circuit = build_salih_fig1(ScenarioConfig(cycles=1, strategy="C"))
        eps = 1e-3
        branches = strategy_c_branches(circuit, epsilon=eps)
        assert branches["H"].probability + branches["V"].probability == pytest.approx(1.0)
        assert branches["V"].probability == pytest.approx(eps**2 / 4, rel=1e-4)
        assert branches["H"].verdict == NO_TRACE
        assert branches["H"].fidelity_deficit == pytest.approx(0.0, abs=1e-15)
        assert branches["V"].verdict == ANOMALOUS_TRACE
        np.testing.assert_allclose(np.array(branches["V"].rho)[1, 1], 1.0, atol=1e-5)

    def test_needs_polarization_measurement(self, fig1):
        with pytest.raises(WiringError):
            strategy_c_branches(fig1)

    @pytest.mark.parametrize("eps", [1e-2, 1e-3])
    def test_branches_mix_back_into_the_unread_mirror(self, eps):
        circuit = build_salih_fig1(ScenarioConfig(cycles=1, strategy="C"))
        branches = strategy_c_branches(circuit, epsilon=eps, mirror_id="MR_B1")
        mixed = sum(report.probability * np.array(report.rho) for report in branches.values())
        unread = mirror_state_at(circuit, "MR_B1", "t8", policy={"D_A1": NULL}, epsilon=eps)
        np.testing.assert_allclose(mixed, unread, atol=1e-10)
        assert is_density_matrix(mixed)
