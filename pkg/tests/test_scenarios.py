"""Tests for the built-in circuits and scenario reports."""

import json

import numpy as np
import pytest

from weaktrace.scenarios import (
    ABSORBED,
    COUNTERFACTUAL,
    NOT_COUNTERFACTUAL,
    NOT_TESTED,
    SCENARIOS,
    ScenarioConfig,
    ScenarioConfigError,
    build_one_cycle_fig2,
    build_salih_fig1,
    builtin_circuits,
    cycle_transfer_maps,
    run_fig2,
    run_paradox_suite,
    run_scenario,
    run_strategy,
)
from weaktrace.trace import FIRST_ORDER_TRACE, NO_TRACE


class TestConfig:

    def test_validation(self):
        with pytest.raises(ScenarioConfigError):
            ScenarioConfig(cycles=3)
        with pytest.raises(ScenarioConfigError):
            ScenarioConfig(strategy="D")
        with pytest.raises(ScenarioConfigError):
            ScenarioConfig(cycles=1, strategy="B")
        with pytest.raises(ScenarioConfigError):
            ScenarioConfig(strategy="C")
        with pytest.raises(ScenarioConfigError):
            ScenarioConfig(epsilon=-1.0)
        with pytest.raises(ValueError):
            ScenarioConfig(couplings={"MR_B9": None})

    def test_defaults_follow_config(self, restore_config):
        restore_config.epsilon = 0.02
        restore_config.mode = "exact"
        coupling = ScenarioConfig().coupling("MR_B1")
        assert (coupling.epsilon, coupling.mode) == (0.02, "exact")


class TestCircuits:

    def test_names_and_outcomes(self, fig1, fig1_nofilter):
        assert fig1.name == "salih-fig1"
        assert fig1_nofilter.name == "salih-fig1-nofilter"
        assert fig1_nofilter.outcomes() == ["D_A1", "D_A2", "D0"]
        one = build_salih_fig1(ScenarioConfig(cycles=1))
        assert one.outcomes() == ["D_A1", "D_S"]
        assert one.mirrors == ("MR_B1",)
        strategy_c = build_salih_fig1(ScenarioConfig(cycles=1, strategy="C"))
        assert strategy_c.name == "salih-fig1-one-cycle-strategy-c"
        assert strategy_c.outcomes() == ["D_A1", "H", "V"]

    def test_both_outer_cycles_are_the_same_map(self):
        first, second = cycle_transfer_maps()
        np.testing.assert_allclose(first, second, atol=1e-12)

    def test_builtin_circuits(self):
        circuits = builtin_circuits()
        assert set(circuits) == {
            "salih-fig1",
            "salih-fig1-nofilter",
            "salih-fig1-one-cycle",
            "salih-fig1-one-cycle-strategy-c",
            "one-cycle-shutter",
            "one-cycle-open",
        }


class TestOneCycleProtocol:

    def test_shutter_present(self):
        _, verdicts = build_one_cycle_fig2(True)
        by_outcome = {verdict.outcome: verdict for verdict in verdicts}
        assert by_outcome["shutter"].probability == pytest.approx(0.25)
        assert by_outcome["D3"].probability == pytest.approx(0.125)
        assert by_outcome["D0"].probability == pytest.approx(0.5)
        assert by_outcome["D1"].probability == pytest.approx(0.125)
        assert by_outcome["D1"].verdict == COUNTERFACTUAL
        assert by_outcome["D0"].verdict == NOT_TESTED
        assert by_outcome["shutter"].verdict == ABSORBED
        assert by_outcome["shutter"].traces == ()
        assert all(trace.verdict == NO_TRACE for trace in by_outcome["D1"].traces)

    def test_shutter_absent(self):
        _, verdicts = build_one_cycle_fig2(False)
        by_outcome = {verdict.outcome: verdict for verdict in verdicts}
        assert set(by_outcome) == {"D3", "D0"}
        assert by_outcome["D3"].probability == pytest.approx(0.5)
        assert by_outcome["D3"].verdict == NOT_COUNTERFACTUAL
        traces = {trace.mirror_id: trace for trace in by_outcome["D3"].traces}
        assert traces["MB1"].coefficient == pytest.approx(0.5)
        assert traces["MB2"].coefficient == pytest.approx(0.5)
        assert traces["MB1"].verdict == FIRST_ORDER_TRACE
        assert by_outcome["D0"].verdict == NOT_TESTED

    def test_reports(self):
        assert run_fig2(True).passed
        assert run_fig2(False).passed


class TestReports:

    @pytest.mark.parametrize("name", sorted(SCENARIOS))
    def test_every_scenario_passes(self, name):
        report = run_scenario(name)
        failed = [check.name for check in report.checks if not check.passed]
        assert report.passed, failed
        assert report.scenario == name

    @pytest.mark.parametrize("name", ["fig1", "paradox", "strategy-b"])
    def test_scenarios_pass_in_exact_mode(self, name):
        assert run_scenario(name, epsilon=1e-3, mode="exact").passed

    def test_unknown_scenario(self):
        with pytest.raises(ScenarioConfigError):
            run_scenario("fig9")
        with pytest.raises(ScenarioConfigError):
            run_strategy("Z")

    def test_paradox_values(self):
        report = run_paradox_suite()
        assert report.values["(P_C)_w(t2)"] == pytest.approx(0.5)
        assert report.values["(P_C)_w(t2')"] == pytest.approx(0.0)
        assert report.values["MR_B1 coefficient"] == pytest.approx(0.5)

    def test_strategy_b_cancels_on_average(self):
        report = run_strategy("B")
        assert report.values["(P_C)_w(t2) | D_A2"] == pytest.approx(-0.5)
        assert report.values["(P_C)_w(t2) | D0"] == pytest.approx(0.5)
        assert report.values["mixed (P_C)_w(t2)"] == pytest.approx(0.0, abs=1e-12)
        coefficients = sorted(trace.coefficient.real for trace in report.traces)
        assert coefficients == pytest.approx([-0.5, 0.5])

    @pytest.mark.parametrize("eps", [1e-2, 1e-3, 1e-4, 0.1])
    def test_strategy_a_state_matches_closed_form(self, eps):
        report = run_strategy("A", epsilon=eps)
        assert report.passed
        assert report.values["verification probability"] == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("eps", [1e-2, 1e-3, 1e-4])
    def test_strategy_c_weak_values_match_the_mirror(self, eps):
        report = run_strategy("C", epsilon=eps)
        failed = [check.name for check in report.checks if not check.passed]
        assert report.passed, failed
        assert abs(report.values["(P_C)_w(t2) | H"]) < 1e-12
        assert report.values["(P_C)_w(t2) | V"] == pytest.approx(0.5, abs=1e-6)
        weighted = complex(report.values["mixed (P_C)_w(t2) / eps^2"])
        deficit = report.values["mixed MR_B1 deficit / eps^2"]
        # both positive: the V branch carries +1/2 with weight eps^2/4
        assert weighted.real == pytest.approx(0.125, rel=1e-2)
        assert abs(weighted.imag) < 1e-9
        assert deficit == pytest.approx(0.25, rel=1e-2)
        assert weighted.real == pytest.approx(deficit / 2, rel=1e-2)
        assert complex(report.values["composite mixed (P_C)_w(t2) / eps^2"]).real == pytest.approx(weighted.real, abs=1e-6)

    def test_strategy_c_without_coupling(self):
        report = run_strategy("C", epsilon=0.0)
        assert report.passed
        assert report.values["P(V)"] == pytest.approx(0.0, abs=1e-15)

    def test_zero_coupling(self):
        report = run_scenario("fig1", epsilon=0.0)
        assert report.passed
        deficits = [trace.fidelity_deficit for trace in report.traces if trace.fidelity_deficit is not None]
        assert deficits and all(deficit == 0.0 for deficit in deficits)

    def test_report_is_json_ready_and_stable(self):
        first = json.dumps(run_scenario("strategy-c").as_dict(), sort_keys=True)
        second = json.dumps(run_scenario("strategy-c").as_dict(), sort_keys=True)
        assert first == second
        payload = json.loads(first)
        assert payload["convention"] == "real-v1"
        assert payload["passed"] is True
