# weaktrace/scenarios.py
# SPDX-License-Identifier: MIT
# Copyright (c) 2026 The weaktrace developers
from ._version import __version__

# import required packages
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple
import math
import numpy as np

# bring in other sibling modules
from .config import config
from .engine import (
    BRANCH,
    CLICK,
    NULL,
    Circuit,
    Stage,
    evolve_backward,
    evolve_forward,
    outcome_probability,
    transfer_matrix,
)
from .firstorder import to_complex
from .hilbert import (
    CHI,
    CHI_PERP,
    WeaktraceError,
    basis_state,
    inner_product,
    projector,
    reduced_mirror_state,
    state_from_terms,
)
from .optics import DEFAULT_CONVENTION, MirrorCoupling, detector, hwp, mirror, pbs, pol_filter_pbs, shutter
from .trace import (
    FIRST_ORDER_TRACE,
    NO_TRACE,
    ANOMALOUS_TRACE,
    TraceReport,
    fidelity_deficit,
    mirror_state_at,
    strategy_c_branches,
    trace_exact,
    trace_first_order,
)
from .tsvf import (
    EnsembleOutcome,
    OutcomeEnsemble,
    mixed_weak_value,
    postselection_ensemble,
    two_state_vector,
    two_state_vector_at,
    weak_value,
)

"""
Built-in reconstructions of the nested-interferometer setups.

The two-cycle circuit has one outer cycle per stage block below; each cycle is
a Zeno step whose inner interferometer sends everything that enters it to the
cycle's detector, with one coupled mirror on the inner right-hand arm.

    stage  element                          cycle 1   cycle 2
    1      HWP on the entry port
    2      PBS (entry, vac) -> (A, I)
    3      HWP on I
    4      PBS (I, vac) -> (C, B)            t2        t2'
    5      mirror on C                       t5        t5'
    6      PBS (C, B) -> (D, L)
    7      HWP on D                          t6        t6'
    8      PBS (A, D) -> (S, J)              t7        t9
    9      detector on J                     t8
"""

FIG1_PORTS = ("src", "vac", "A", "B", "C", "D", "I", "J", "L", "S", "F", "G")
FIG2_PORTS = ("S", "vac", "A", "B", "C", "D", "I", "J", "L", "F", "G")
STRATEGIES = ("none", "A", "B", "C")

_CYCLE_LABELS = (
    {"mirror": "MR_B1", "detector": "D_A1", "t2": "t2", "t5": "t5", "t6": "t6", "t7": "t7", "t8": "t8"},
    {"mirror": "MR_B3", "detector": "D_A2", "t2": "t2'", "t5": "t5'", "t6": "t6'", "t7": "t9", "t8": None},
)


class ScenarioConfigError(WeaktraceError, ValueError):
    """Raised for an inconsistent scenario configuration."""


@dataclass(frozen=True)
class ScenarioConfig:
    """Knobs of the built-in circuits.

    ``couplings`` maps mirror ids to explicit couplings; mirrors left out get
    ``MirrorCoupling(epsilon, mode)`` with the config defaults.
    """

    cycles: int = 2
    include_final_filter: bool = True
    couplings: Mapping[str, MirrorCoupling] = field(default_factory=dict)
    shutter_present: bool = True
    strategy: str = "none"
    epsilon: Optional[float] = None
    mode: Optional[str] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "couplings", MappingProxyType(dict(self.couplings)))
        if self.cycles not in (1, 2):
            raise ScenarioConfigError(f"cycles must be 1 or 2, got {self.cycles}")
        if self.strategy not in STRATEGIES:
            raise ScenarioConfigError(f"strategy must be one of {STRATEGIES}, got {self.strategy!r}")
        if self.strategy == "B" and self.cycles != 2:
            raise ScenarioConfigError("strategy B needs both outer cycles")
        if self.strategy == "C" and self.cycles != 1:
            raise ScenarioConfigError("strategy C measures H/V right after the first cycle")
        if self.epsilon is not None and self.epsilon < 0:
            raise ScenarioConfigError(f"epsilon must be non-negative, got {self.epsilon}")
        known = set(self.mirror_ids())
        unknown = sorted(set(self.couplings) - known)
        if unknown:
            raise ScenarioConfigError(f"couplings given for unknown mirror(s) {unknown}; known: {sorted(known)}")

    def mirror_ids(self) -> Tuple[str, ...]:
        return tuple(labels["mirror"] for labels in _CYCLE_LABELS[: self.cycles])

    def coupling(self, mirror_id: str) -> MirrorCoupling:
        if mirror_id in self.couplings:
            return self.couplings[mirror_id]
        return self.default_coupling()

    def default_coupling(self) -> MirrorCoupling:
        epsilon = config.epsilon if self.epsilon is None else self.epsilon
        mode = config.mode if self.mode is None else self.mode
        return MirrorCoupling(epsilon, mode)


def _outer_cycle(entry: str, labels: Mapping[str, Optional[str]], coupling: MirrorCoupling) -> List[Stage]:
    return [
        Stage((hwp(entry),)),
        Stage((pbs((entry, "vac"), ("A", "I")),)),
        Stage((hwp("I"),)),
        Stage((pbs(("I", "vac"), ("C", "B")),), labels["t2"]),
        Stage((mirror("C", labels["mirror"], coupling),), labels["t5"]),
        Stage((pbs(("C", "B"), ("D", "L")),)),
        Stage((hwp("D"),), labels["t6"]),
        Stage((pbs(("A", "D"), ("S", "J")),), labels["t7"]),
        Stage((detector("J", labels["detector"]),), labels["t8"]),
    ]


def build_salih_fig1(scenario: Optional[ScenarioConfig] = None, debug: bool = False) -> Circuit:
    """
    Build the nested two-cycle interferometer (or its one-cycle variants).

    The photon starts H-polarized at ``src``. With the default configuration
    the circuit ends with an H filter at ``S`` (H to ``F``, V to ``G``) and the
    detectors ``D0`` (H on ``F``) and ``D_G`` (on ``G``); without the filter a
    single ``D0`` watches ``S``. One-cycle circuits end with ``D_S`` on ``S``,
    or, for strategy C, with an H/V measurement (outcomes ``H`` and ``V``).

    Args:
    -----

        :scenario (ScenarioConfig): Optional argument. Defaults to ``ScenarioConfig()``, the full two-cycle circuit with the filter.

        :debug (bool): Optional argument. Defaults to `False`. If set to `True` the function prints some debug information.

    Returns:
    --------

        :Circuit: Time points ``t1`` (initial), ``t2``, ``t5``-``t8``, ``t2'``, ``t5'``, ``t6'``, ``t9``, ``t10``, ``t11``.

    Raises:
    -------

        :ScenarioConfigError: Via :py:class:`ScenarioConfig` validation.

    Example:
    --------

        .. code-block:: python

            circuit = build_salih_fig1()
            snapshots, _ = evolve_forward(circuit, circuit.initial_state(symbolic=True), {"D_A1": "null"})
            print(snapshots["t8"])
    """
    scenario = ScenarioConfig() if scenario is None else scenario
    stages: List[Stage] = []
    entry = "src"
    for labels in _CYCLE_LABELS[: scenario.cycles]:
        stages.extend(_outer_cycle(entry, labels, scenario.coupling(labels["mirror"])))
        entry = "S"

    if scenario.strategy == "C":
        stages.append(Stage((pol_filter_pbs(("S", "vac"), ("F", "G")),), "t10"))
        stages.append(Stage((detector("F", "H"), detector("G", "V")), "t11"))
    elif scenario.cycles == 1:
        stages.append(Stage((detector("S", "D_S"),), "t11"))
    elif scenario.include_final_filter:
        stages.append(Stage((pol_filter_pbs(("S", "vac"), ("F", "G")),), "t10"))
        stages.append(Stage((detector("F", "D0", pol_filter="H"), detector("G", "D_G")), "t11"))
    else:
        stages.append(Stage((detector("S", "D0"),), "t11"))

    name = "salih-fig1" if scenario.cycles == 2 else "salih-fig1-one-cycle"
    if scenario.cycles == 2 and not scenario.include_final_filter:
        name = "salih-fig1-nofilter"
    if scenario.strategy != "none":
        name = f"{name}-strategy-{scenario.strategy.lower()}"
    circuit = Circuit(tuple(stages), FIG1_PORTS, scenario.mirror_ids(), name, ("src", "H"), "t1")
    if debug:
        print(f"[build_salih_fig1] {name}: {len(stages)} stages, outcomes {circuit.outcomes()}")
    return circuit


def cycle_transfer_maps(scenario: Optional[ScenarioConfig] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Transfer matrices of the two outer cycles with couplings removed.

    The first cycle's entry port ``src`` is renamed ``S`` so both cycles act on
    the same ports; detection events count as identities.
    """
    scenario = ScenarioConfig(include_final_filter=False) if scenario is None else scenario
    if scenario.cycles != 2:
        raise ScenarioConfigError("cycle comparison needs both outer cycles")
    circuit = build_salih_fig1(scenario).decoupled()
    length = len(_outer_cycle("S", _CYCLE_LABELS[0], MirrorCoupling(0.0)))
    first = circuit.sliced(0, length, "cycle-1").relabeled({"src": "S"})
    second = circuit.sliced(length, 2 * length, "cycle-2")
    basis = first.registry.basis()
    return transfer_matrix(first, basis=basis), transfer_matrix(second, basis=basis)


def build_one_cycle_fig2(
    shutter_present : Optional[bool] = None,
    scenario        : Optional[ScenarioConfig] = None,
    debug           : bool = False,
) -> Tuple[Circuit, Tuple["BranchVerdict", ...]]:
    """
    One-cycle counterfactual channel with Bob's shutter on the ``C`` arm.

    The photon enters H-polarized at ``S`` and crosses one outer cycle whose
    right-hand arm carries the shutter (if present) followed by the mirrors
    ``MB1`` and ``MB2``. The exit is split by an H filter. Outcomes: ``D3`` on
    ``J``, ``D0`` (H) on ``F``, ``D1`` on ``G`` and ``shutter``.

    Returns:
    --------

        :Tuple[Circuit, Tuple[BranchVerdict, ...]]: The circuit and one verdict per outcome that can occur at zeroth order.
    """
    scenario = ScenarioConfig() if scenario is None else scenario
    shutter_present = scenario.shutter_present if shutter_present is None else shutter_present
    coupling = scenario.default_coupling()
    inner_arm = [Stage((shutter("C", "shutter"),))] if shutter_present else []
    stages = [
        Stage((hwp("S"),)),
        Stage((pbs(("S", "vac"), ("A", "I")),)),
        Stage((hwp("I"),)),
        Stage((pbs(("I", "vac"), ("C", "B")),), "t2"),
        *inner_arm,
        Stage((mirror("C", "MB1", coupling),)),
        Stage((mirror("C", "MB2", coupling),), "t5"),
        Stage((pbs(("C", "B"), ("D", "L")),)),
        Stage((hwp("D"),), "t6"),
        Stage((pbs(("A", "D"), ("S", "J")),), "t7"),
        Stage((detector("J", "D3"),), "t8"),
        Stage((pol_filter_pbs(("S", "vac"), ("F", "G")),), "t10"),
        Stage((detector("F", "D0", pol_filter="H"), detector("G", "D1")), "t11"),
    ]
    name = "one-cycle-shutter" if shutter_present else "one-cycle-open"
    circuit = Circuit(tuple(stages), FIG2_PORTS, ("MB1", "MB2"), name, ("S", "H"), "t1")
    verdicts = fig2_verdicts(circuit, debug=debug)
    return circuit, verdicts


@dataclass(frozen=True)
class BranchVerdict:
    """What one outcome of the one-cycle protocol says about the right-hand mirrors."""

    outcome: str
    probability: float
    verdict: str
    traces: Tuple[TraceReport, ...]

    def as_dict(self) -> Dict[str, Any]:
        return {
            "outcome": self.outcome,
            "probability": self.probability,
            "verdict": self.verdict,
            "traces": [trace.as_dict() for trace in self.traces],
        }


COUNTERFACTUAL = "counterfactual"
NOT_COUNTERFACTUAL = "not-counterfactual"
NOT_TESTED = "not-tested"
ABSORBED = "absorbed"


def fig2_verdicts(circuit: Circuit, debug: bool = False) -> Tuple[BranchVerdict, ...]:
    """Classify every outcome of nonzero zeroth-order probability."""
    policy = {name: BRANCH for name in circuit.outcomes()}
    _, ledger = evolve_forward(circuit.decoupled(), policy=policy)
    verdicts = []
    for name in circuit.outcomes():
        probability = float(ledger.probability(name))
        if probability <= config.probability_floor:
            continue
        if name == "shutter":
            # absorbed photons never reach the mirrors behind the shutter
            verdicts.append(BranchVerdict(name, probability, ABSORBED, ()))
            continue
        traces = tuple(trace_first_order(circuit, name).values())
        if any(trace.verdict != NO_TRACE for trace in traces):
            verdict = NOT_COUNTERFACTUAL
        elif name == "D1":
            verdict = COUNTERFACTUAL
        else:
            verdict = NOT_TESTED
        if debug:
            print(f"[fig2_verdicts] {name}: p={probability:.4g} -> {verdict}")
        verdicts.append(BranchVerdict(name, probability, verdict, traces))
    return tuple(verdicts)


# -- reports ---------------------------------------------------------------

@dataclass(frozen=True)
class Check:
    name: str
    expected: Any
    actual: Any
    passed: bool

    def as_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "expected": _plain(self.expected), "actual": _plain(self.actual), "passed": self.passed}


@dataclass(frozen=True)
class ScenarioReport:
    """Values, pass/fail checks and mirror traces of one scenario run."""

    scenario: str
    epsilon: float
    mode: str
    checks: Tuple[Check, ...] = ()
    values: Mapping[str, Any] = field(default_factory=dict)
    traces: Tuple[TraceReport, ...] = ()
    branches: Tuple[BranchVerdict, ...] = ()
    convention: str = DEFAULT_CONVENTION

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", MappingProxyType(dict(self.values)))

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def as_dict(self) -> Dict[str, Any]:
        return {
            "scenario": self.scenario,
            "epsilon": self.epsilon,
            "mode": self.mode,
            "convention": self.convention,
            "passed": self.passed,
            "values": {key: _plain(value) for key, value in self.values.items()},
            "checks": [check.as_dict() for check in self.checks],
            "traces": [trace.as_dict() for trace in self.traces],
            "branches": [branch.as_dict() for branch in self.branches],
        }


def _plain(value: Any) -> Any:
    if isinstance(value, (bool, str)) or value is None:
        return value
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    number = to_complex(value)
    return number.real if number.imag == 0 else {"re": number.real, "im": number.imag}


def _close(name: str, expected: Any, actual: Any, tolerance: float) -> Check:
    difference = abs(to_complex(actual) - to_complex(expected))
    return Check(name, expected, actual, difference <= tolerance)


def _at_most(name: str, bound: float, actual: float) -> Check:
    return Check(name, f"<= {bound:.3e}", actual, actual <= bound)


def _equal(name: str, expected: Any, actual: Any) -> Check:
    return Check(name, expected, actual, expected == actual)


def _resolve(epsilon: Optional[float], mode: Optional[str]) -> Tuple[float, str]:
    return (config.epsilon if epsilon is None else epsilon), (config.mode if mode is None else mode)


# -- scenario runners ------------------------------------------------------

def run_fig1(
    include_final_filter : bool = True,
    epsilon              : Optional[float] = None,
    mode                 : Optional[str] = None,
    debug                : bool = False,
) -> ScenarioReport:
    """Traces on both mirrors after postselection on ``D0``, first-order and exact."""
    epsilon, mode = _resolve(epsilon, mode)
    circuit = build_salih_fig1(ScenarioConfig(include_final_filter=include_final_filter, epsilon=epsilon, mode=mode))
    first = trace_first_order(circuit, "D0", epsilon=epsilon, debug=debug)
    exact = trace_exact(circuit, "D0", epsilon=epsilon, debug=debug)
    tolerance = config.tolerance
    bound = 10 * epsilon**4
    values = {"P(D0) at zeroth order": outcome_probability(circuit.decoupled(), None, "D0")}
    checks = [_close("P(D0) at zeroth order", 0.25, values["P(D0) at zeroth order"], tolerance)]
    if include_final_filter:
        tsv = two_state_vector_at(circuit.decoupled(), "t2", "D0")
        values["(P_C)_w(t2)"] = weak_value(tsv, projector(paths=["C"]))
        checks += [
            _close("MR_B1 coefficient", 0.5, first["MR_B1"].coefficient, tolerance),
            _close("MR_B3 coefficient", 0.0, first["MR_B3"].coefficient, tolerance),
            _close("MR_B1 deficit", epsilon**2 / 4, exact["MR_B1"].fidelity_deficit, bound),
            _at_most("MR_B3 deficit", bound, exact["MR_B3"].fidelity_deficit),
            _close("(P_C)_w(t2)", 0.5, values["(P_C)_w(t2)"], tolerance),
        ]
    else:
        checks += [
            _equal("MR_B1 verdict", FIRST_ORDER_TRACE, first["MR_B1"].verdict),
            _equal("MR_B3 verdict", FIRST_ORDER_TRACE, first["MR_B3"].verdict),
        ]
    traces = tuple(first.values()) + tuple(exact.values())
    name = "fig1" if include_final_filter else "fig1-nofilter"
    return ScenarioReport(name, epsilon, mode, tuple(checks), values, traces)


def run_paradox_suite(epsilon: Optional[float] = None, mode: Optional[str] = None, debug: bool = False) -> ScenarioReport:
    """
    The paradox in one report.

    Weak values of the projector on ``C`` at ``t2`` and ``t2'`` for the
    ``D0``-postselected photon, the first-order traces on both mirrors, and
    the check that the state of ``MR_B1`` at ``t8`` does not depend on whether
    the second cycle exists.
    """
    epsilon, mode = _resolve(epsilon, mode)
    circuit = build_salih_fig1(ScenarioConfig(epsilon=epsilon, mode=mode))
    ideal = circuit.decoupled()
    on_c = projector(paths=["C"], name="P_C")
    values: Dict[str, Any] = {
        "(P_C)_w(t2)": weak_value(two_state_vector_at(ideal, "t2", "D0"), on_c, debug=debug),
        "(P_C)_w(t2')": weak_value(two_state_vector_at(ideal, "t2'", "D0"), on_c, debug=debug),
    }
    first = trace_first_order(circuit, "D0", epsilon=epsilon, debug=debug)
    values["MR_B1 coefficient"] = first["MR_B1"].coefficient
    values["MR_B3 coefficient"] = first["MR_B3"].coefficient

    one_cycle = build_salih_fig1(ScenarioConfig(cycles=1, epsilon=epsilon, mode=mode))
    before = mirror_state_at(circuit, "MR_B1", "t8", policy={"D_A1": NULL}, epsilon=epsilon)
    alone = mirror_state_at(one_cycle, "MR_B1", "t8", policy={"D_A1": NULL}, epsilon=epsilon)
    values["MR_B1 deficit at t8"] = fidelity_deficit(before)

    tolerance = config.tolerance
    checks = (
        _close("(P_C)_w(t2)", 0.5, values["(P_C)_w(t2)"], tolerance),
        _close("(P_C)_w(t2')", 0.0, values["(P_C)_w(t2')"], tolerance),
        _close("MR_B1 coefficient", 0.5, values["MR_B1 coefficient"], tolerance),
        _close("MR_B3 coefficient", 0.0, values["MR_B3 coefficient"], tolerance),
        _equal("MR_B1 at t8 independent of the second cycle", True, before.tobytes() == alone.tobytes()),
    )
    return ScenarioReport("paradox", epsilon, mode, checks, values, tuple(first.values()))


def _strategy_a(epsilon: float, mode: str, debug: bool) -> ScenarioReport:
    circuit = build_salih_fig1(ScenarioConfig(cycles=1, strategy="A", epsilon=epsilon, mode=mode))
    upto = circuit.sliced(0, circuit.stage_index("t8"))
    policy = {"D_A1": NULL}
    forward, _ = evolve_forward(upto, upto.initial_state(symbolic=True), policy, debug=debug)
    verification = forward["t8"]
    backward = evolve_backward(upto, verification, policy, debug=debug)
    tsv = two_state_vector(forward["t2"], backward["t2"], "t2")
    trace = trace_first_order(upto, policy=policy, epsilon=epsilon)["MR_B1"]

    # verify the exactly evolved state against
    # |S,H>|chi> + (1 - eta)/2 |S,V>|chi> - eta eps/2 |S,V>|chi_perp>, eta = (1 + eps^2)^(-1/2)
    exact = upto.with_mode("exact", epsilon)
    evolved, _ = evolve_forward(exact, policy=policy)
    eta = 1.0 / math.sqrt(1.0 + epsilon**2)
    terms = [(1.0, "S", "H", (CHI,)), ((1.0 - eta) / 2, "S", "V", (CHI,)), (-eta * epsilon / 2, "S", "V", (CHI_PERP,))]
    expected = state_from_terms(exact.registry, terms)
    expected = expected.scaled(1.0 / math.sqrt(expected.norm_squared()))
    success = abs(inner_product(expected, evolved["t8"])) ** 2
    values = {
        "verification probability": success,
        "(P_C)_w(t2)": weak_value(tsv, projector(paths=["C"])),
        "MR_B1 coefficient at t8": trace.coefficient,
    }
    tolerance = config.tolerance
    checks = (
        _close("verification probability", 1.0, values["verification probability"], 1e-12),
        _close("(P_C)_w(t2)", 0.0, values["(P_C)_w(t2)"], tolerance),
        _equal("MR_B1 verdict", FIRST_ORDER_TRACE, trace.verdict),
    )
    return ScenarioReport("strategy-a", epsilon, mode, checks, values, (trace,))


def _strategy_b(epsilon: float, mode: str, debug: bool) -> ScenarioReport:
    circuit = build_salih_fig1(ScenarioConfig(strategy="B", epsilon=epsilon, mode=mode))
    ideal = circuit.decoupled()
    branches = ("D_A2", "D0")
    on_c = projector(paths=["C"], name="P_C")

    _, ledger = evolve_forward(ideal, policy={"D_A1": NULL})
    reference = ledger.event("D_A2").weight_before
    tsvs = {name: two_state_vector_at(ideal, "t2", name) for name in branches}
    weights = {name: float(ledger.probability(name)) / reference for name in branches}
    total = sum(weights.values())
    ensemble = OutcomeEnsemble(
        tuple(EnsembleOutcome(name, weights[name] / total, tsvs[name].backward) for name in branches)
    )
    pre = tsvs["D0"].forward
    values: Dict[str, Any] = {f"(P_C)_w(t2) | {name}": weak_value(tsvs[name], on_c) for name in branches}
    values.update({f"P({name})": ensemble[name].probability for name in branches})
    values["mixed (P_C)_w(t2)"] = mixed_weak_value(pre, ensemble, on_c, "t2", debug=debug)

    # exact mirror states per branch, mixed with their exact weights
    exact = circuit.with_mode("exact", epsilon)
    _, exact_ledger = evolve_forward(exact, policy={"D_A1": NULL})
    exact_weights = {name: float(exact_ledger.probability(name)) for name in branches}
    norm = sum(exact_weights.values())
    rhos = {name: mirror_state_at(circuit, "MR_B1", outcome=name, epsilon=epsilon) for name in branches}
    mixed = sum(exact_weights[name] / norm * rhos[name] for name in branches)
    single = mirror_state_at(circuit, "MR_B1", "t8", policy={"D_A1": NULL}, epsilon=epsilon)
    values["mixed MR_B1 deficit"] = fidelity_deficit(mixed)
    values["single-kick deficit"] = fidelity_deficit(single)
    values["mixed MR_B1 coherence"] = complex(mixed[1, 0]) / epsilon if epsilon > 0 else 0j

    tolerance = config.tolerance
    checks = (
        _close("(P_C)_w(t2) | D_A2", -0.5, values["(P_C)_w(t2) | D_A2"], tolerance),
        _close("(P_C)_w(t2) | D0", 0.5, values["(P_C)_w(t2) | D0"], tolerance),
        _close("equal branch probabilities", values["P(D0)"], values["P(D_A2)"], tolerance),
        _close("mixed (P_C)_w(t2)", 0.0, values["mixed (P_C)_w(t2)"], tolerance),
        _close("mixed deficit equals a single kick", values["single-kick deficit"], values["mixed MR_B1 deficit"], 10 * epsilon**4),
        _at_most("mixed coherence", 10 * epsilon, abs(values["mixed MR_B1 coherence"])),
    )
    traces = tuple(trace_first_order(circuit, name, epsilon=epsilon)["MR_B1"] for name in branches)
    return ScenarioReport("strategy-b", epsilon, mode, checks, values, traces)


def _weighted_weak_value(
    upto    : Circuit,
    forward : Any,
    bras    : Mapping[str, Any],
    epsilon : float,
    debug   : bool,
) -> Tuple[OutcomeEnsemble, complex]:
    """Postselect the t8 state on ``bras`` and average the weak values of P_C at t2."""
    policy = {"D_A1": NULL}
    at_t8 = postselection_ensemble(forward["t8"], bras, epsilon)
    at_t2 = OutcomeEnsemble(
        tuple(
            EnsembleOutcome(outcome.name, outcome.probability, evolve_backward(upto, outcome.bra, policy)["t2"])
            for outcome in at_t8.outcomes
        )
    )
    on_c = projector(paths=["C"], name="P_C")
    return at_t2, mixed_weak_value(forward["t2"], at_t2, on_c, "t2", debug=debug)


def _strategy_c(epsilon: float, mode: str, debug: bool) -> ScenarioReport:
    circuit = build_salih_fig1(ScenarioConfig(cycles=1, strategy="C", epsilon=epsilon, mode=mode))
    branches = strategy_c_branches(circuit, epsilon=epsilon, mirror_id="MR_B1", debug=debug)
    v_branch = branches["V"]

    exact = circuit.with_mode("exact", epsilon)
    upto = exact.sliced(0, exact.stage_index("t8"))
    forward, _ = evolve_forward(upto, policy={"D_A1": NULL})
    unconditioned = reduced_mirror_state(forward["t8"], "MR_B1", epsilon)

    values: Dict[str, Any] = {f"P({name})": report.probability for name, report in branches.items()}
    values.update({f"{name} verdict": report.verdict for name, report in branches.items()})
    h_first = trace_first_order(circuit, "H", policy={"D_A1": NULL, "H": CLICK, "V": NULL}, epsilon=epsilon)["MR_B1"]
    values["H branch MR_B1 coefficient"] = h_first.coefficient
    tolerance = config.tolerance
    checks = [
        _close("P(V)", epsilon**2 / 4, v_branch.probability, 10 * epsilon**4),
        _close("P(H) + P(V)", 1.0, branches["H"].probability + v_branch.probability, 1e-12),
        _equal("H verdict", NO_TRACE, branches["H"].verdict),
        _close("H branch MR_B1 coefficient", 0.0, h_first.coefficient, tolerance),
    ]
    if v_branch.rho is None:
        return ScenarioReport("strategy-c", epsilon, mode, tuple(checks), values, tuple(branches.values()))

    # the branch mirror states mix back into the unconditioned one
    mixed_rho = sum(report.probability * np.array(report.rho) for report in branches.values() if report.rho is not None)
    deficit = fidelity_deficit(mixed_rho)

    # photon-only readout: each bra keeps the mirror state its branch leaves behind
    photon_bras = {pol: forward["t8"].restricted(lambda label, pol=pol: label.pol == pol) for pol in ("H", "V")}
    ensemble, weighted = _weighted_weak_value(upto, forward, photon_bras, epsilon, debug)
    on_c = projector(paths=["C"], name="P_C")
    for outcome in ensemble.outcomes:
        values[f"(P_C)_w(t2) | {outcome.name}"] = weak_value(two_state_vector(forward["t2"], outcome.bra, "t2"), on_c)

    # the same average over a composite photon-and-mirror readout
    composite_bras = {
        f"S,{pol},{level}": basis_state(upto.registry, "S", pol, (level,))
        for pol in ("H", "V")
        for level in (CHI, CHI_PERP)
    }
    _, composite = _weighted_weak_value(upto, forward, composite_bras, epsilon, debug)

    scale = epsilon**2
    values["mixed (P_C)_w(t2) / eps^2"] = weighted / scale
    values["composite mixed (P_C)_w(t2) / eps^2"] = composite / scale
    values["mixed MR_B1 deficit / eps^2"] = deficit / scale
    checks += [
        _at_most("V branch <chi|rho|chi>", 10 * epsilon**2, v_branch.rho[0][0].real),
        _equal("V verdict", ANOMALOUS_TRACE, v_branch.verdict),
        _at_most("mixed branch states vs unconditioned mirror state", 1e-10, float(np.max(np.abs(mixed_rho - unconditioned)))),
        _close("(P_C)_w(t2) | H", 0.0, values["(P_C)_w(t2) | H"], tolerance),
        _close("(P_C)_w(t2) | V", 0.5, values["(P_C)_w(t2) | V"], 1e-6),
        _close("mixed (P_C)_w(t2) / eps^2", 0.125, values["mixed (P_C)_w(t2) / eps^2"], 10 * epsilon**2),
        _close("mixed MR_B1 deficit / eps^2", 0.25, values["mixed MR_B1 deficit / eps^2"], 10 * epsilon**2),
        _close(
            "mixed weak value vs half the mirror deficit",
            values["mixed MR_B1 deficit / eps^2"] / 2,
            values["mixed (P_C)_w(t2) / eps^2"],
            10 * epsilon**2,
        ),
        _close(
            "composite readout gives the same average",
            values["mixed (P_C)_w(t2) / eps^2"],
            values["composite mixed (P_C)_w(t2) / eps^2"],
            1e-6,
        ),
    ]
    return ScenarioReport("strategy-c", epsilon, mode, tuple(checks), values, tuple(branches.values()))


def run_strategy(which: str, epsilon: Optional[float] = None, mode: Optional[str] = None, debug: bool = False) -> ScenarioReport:
    """
    Run one of the three ways of reading the first-cycle trace.

    A: postselect photon and mirror together on the state they had at t8.
    B: detect the photon with D_A2 or D0 and forget which.
    C: measure H/V right after the first cycle.

    Raises:
    -------

        :ScenarioConfigError: ``which`` is not one of ``'A'``, ``'B'``, ``'C'``.
    """
    epsilon, mode = _resolve(epsilon, mode)
    runners = {"A": _strategy_a, "B": _strategy_b, "C": _strategy_c}
    key = which.upper()
    if key not in runners:
        raise ScenarioConfigError(f"unknown strategy {which!r}; choose A, B or C")
    return runners[key](epsilon, mode, debug)


def run_fig2(shutter_present: bool, epsilon: Optional[float] = None, mode: Optional[str] = None, debug: bool = False) -> ScenarioReport:
    """Branch verdicts of the one-cycle protocol, with or without the shutter."""
    epsilon, mode = _resolve(epsilon, mode)
    circuit, verdicts = build_one_cycle_fig2(shutter_present, ScenarioConfig(epsilon=epsilon, mode=mode), debug=debug)
    by_outcome = {verdict.outcome: verdict for verdict in verdicts}
    total = sum(verdict.probability for verdict in verdicts)
    checks = [_close("branch probabilities sum to one", 1.0, total, 1e-12)]
    if shutter_present:
        checks.append(_equal("D1 verdict", COUNTERFACTUAL, by_outcome["D1"].verdict if "D1" in by_outcome else None))
    else:
        checks.append(_equal("D3 verdict", NOT_COUNTERFACTUAL, by_outcome["D3"].verdict if "D3" in by_outcome else None))
    checks.append(_equal("D0 verdict", NOT_TESTED, by_outcome["D0"].verdict if "D0" in by_outcome else None))
    values = {f"P({verdict.outcome})": verdict.probability for verdict in verdicts}
    traces = tuple(trace for verdict in verdicts for trace in verdict.traces)
    name = "fig2-shutter" if shutter_present else "fig2-open"
    return ScenarioReport(name, epsilon, mode, tuple(checks), values, traces, verdicts)


SCENARIOS: Dict[str, Callable[..., ScenarioReport]] = {
    "fig1": lambda **kw: run_fig1(True, **kw),
    "fig1-nofilter": lambda **kw: run_fig1(False, **kw),
    "fig2-shutter": lambda **kw: run_fig2(True, **kw),
    "fig2-open": lambda **kw: run_fig2(False, **kw),
    "paradox": run_paradox_suite,
    "strategy-a": lambda **kw: run_strategy("A", **kw),
    "strategy-b": lambda **kw: run_strategy("B", **kw),
    "strategy-c": lambda **kw: run_strategy("C", **kw),
}


def run_scenario(name: str, epsilon: Optional[float] = None, mode: Optional[str] = None, debug: bool = False) -> ScenarioReport:
    """Run a built-in scenario by its command-line name."""
    if name not in SCENARIOS:
        raise ScenarioConfigError(f"unknown scenario {name!r}; known: {', '.join(SCENARIOS)}")
    return SCENARIOS[name](epsilon=epsilon, mode=mode, debug=debug)


def builtin_circuits() -> Dict[str, Circuit]:
    """Every built-in circuit, keyed by circuit name."""
    circuits = [
        build_salih_fig1(),
        build_salih_fig1(ScenarioConfig(include_final_filter=False)),
        build_salih_fig1(ScenarioConfig(cycles=1)),
        build_salih_fig1(ScenarioConfig(cycles=1, strategy="C")),
        build_one_cycle_fig2(True)[0],
        build_one_cycle_fig2(False)[0],
    ]
    return {circuit.name: circuit for circuit in circuits}
