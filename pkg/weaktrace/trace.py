# weaktrace/trace.py
# SPDX-License-Identifier: MIT
# Copyright (c) 2026 The weaktrace developers
from ._version import __version__

# import required packages
from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Tuple
import cmath
import math
import numpy as np
import sympy as sp

# bring in other sibling modules
from .config import config
from .engine import BRANCH, CLICK, NULL, Circuit, evolve_forward, postselect_policy
from .firstorder import orders, to_complex
from .hilbert import CHI, CHI_PERP, BasisLabel, StateVector, reduced_mirror_state
from .optics import WiringError

"""
Weak traces left on mirrors.

A trace is read per mirror from the conditioned, normalized state written as
|Phi0>|chi> + eps |Phi1>|chi_perp>. The first-order reading is exact in
epsilon; the exact reading reduces the numerically evolved state to the
mirror's 2x2 density matrix.
"""

NO_TRACE = "no-trace"
FIRST_ORDER_TRACE = "first-order-trace"
ANOMALOUS_TRACE = "anomalous-trace"
VERDICTS = (NO_TRACE, FIRST_ORDER_TRACE, ANOMALOUS_TRACE)


@dataclass(frozen=True)
class TraceReport:
    """Trace on one mirror for one conditioned history.

    ``coefficient`` is the chi_perp amplitude in units of epsilon (first-order
    reading); ``fidelity_deficit`` is 1 - <chi|rho|chi> (exact reading).
    Fields that a reading does not produce are ``None``.
    """

    mirror_id: str
    outcome: Optional[str]
    verdict: str
    epsilon: Optional[float] = None
    coefficient: Optional[complex] = None
    coherent: Optional[bool] = None
    fidelity_deficit: Optional[float] = None
    coherence: Optional[complex] = None
    rho: Optional[Tuple[Tuple[complex, complex], Tuple[complex, complex]]] = None
    probability: Optional[float] = None

    @property
    def predicted_deficit(self) -> Optional[float]:
        """Leading-order deficit |c|^2 eps^2 implied by the first-order coefficient."""
        if self.coefficient is None or self.epsilon is None:
            return None
        return abs(self.coefficient) ** 2 * self.epsilon**2

    def as_dict(self) -> Dict[str, object]:
        def number(value):
            if value is None:
                return None
            value = complex(value)
            return value.real if value.imag == 0 else {"re": value.real, "im": value.imag}

        return {
            "mirror": self.mirror_id,
            "outcome": self.outcome,
            "verdict": self.verdict,
            "epsilon": self.epsilon,
            "coefficient": number(self.coefficient),
            "coherent": self.coherent,
            "fidelity_deficit": self.fidelity_deficit,
            "predicted_deficit": self.predicted_deficit,
            "coherence": number(self.coherence),
            "probability": self.probability,
        }


def classify_trace(
    coefficient         : Optional[complex] = None,
    deficit             : Optional[float] = None,
    epsilon             : Optional[float] = None,
    verdict_threshold   : Optional[float] = None,
    anomalous_threshold : Optional[float] = None,
) -> str:
    """
    Turn a coefficient and/or a fidelity deficit into a verdict.

    A deficit at or above ``anomalous_threshold`` is anomalous. Otherwise the
    coefficient decides (|c| at or above ``verdict_threshold``); with only a
    deficit, it must reach ``(verdict_threshold * epsilon)**2``.

    Returns:
    --------

        :str: One of ``'no-trace'``, ``'first-order-trace'``, ``'anomalous-trace'``.
    """
    verdict_threshold = config.verdict_threshold if verdict_threshold is None else verdict_threshold
    anomalous_threshold = config.anomalous_threshold if anomalous_threshold is None else anomalous_threshold
    if deficit is not None and deficit >= anomalous_threshold:
        return ANOMALOUS_TRACE
    if coefficient is not None:
        return FIRST_ORDER_TRACE if abs(coefficient) >= verdict_threshold else NO_TRACE
    if deficit is not None and epsilon is not None:
        if deficit > 0 and deficit >= (verdict_threshold * epsilon) ** 2:
            return FIRST_ORDER_TRACE
    return NO_TRACE


def _policy(circuit: Circuit, outcome: Optional[str], policy: Optional[Mapping[str, str]]) -> Dict[str, str]:
    if policy is not None:
        return dict(policy)
    if outcome is None:
        return {}
    return postselect_policy(circuit, outcome)


def _conditioned_state(
    circuit : Circuit,
    initial : Optional[StateVector],
    policy  : Mapping[str, str],
    time    : Optional[str],
    debug   : bool,
) -> Tuple[StateVector, float]:
    snapshots, ledger = evolve_forward(circuit, initial, policy, debug=debug)
    state = snapshots.final if time is None else snapshots[time]
    return state, ledger.final_weight


def _split_by_level(state: StateVector, index: int, order: int) -> Dict[tuple, complex]:
    """Amplitudes of one epsilon order, keyed by the label without mirror ``index``."""
    parts: Dict[tuple, Dict[str, complex]] = {}
    for label, amplitude in state.amplitudes.items():
        value = complex(sp.N(orders(amplitude)[order]))
        if value == 0:
            continue
        rest = (label.path, label.pol, label.env[:index] + label.env[index + 1:])
        parts.setdefault(label.env[index], {})[rest] = value
    return parts


def _first_order_coefficient(state: StateVector, mirror_id: str, tolerance: float) -> Tuple[Optional[complex], Optional[bool], bool]:
    index = state.registry.mirror_index(mirror_id)
    zeroth = _split_by_level(state, index, 0)
    first = _split_by_level(state, index, 1)
    if zeroth.get(CHI_PERP):
        return None, None, True
    phi0 = zeroth.get(CHI, {})
    phi1 = first.get(CHI_PERP, {})
    norm0 = sum(abs(a) ** 2 for a in phi0.values())
    norm1 = sum(abs(a) ** 2 for a in phi1.values())
    if norm0 == 0:
        return None, None, True
    if norm1 == 0:
        return 0j, True, False
    overlap = sum(phi0.get(key, 0).conjugate() * value for key, value in phi1.items())
    if abs(overlap) > tolerance:
        phase = cmath.phase(overlap)
    else:
        ordered = sorted(phi1, key=lambda key: state.registry.sort_key(_label_from(key, index, state)))
        phase = cmath.phase(phi1[ordered[0]])
    magnitude = math.sqrt(norm1 / norm0)
    coherent = abs(abs(overlap) ** 2 - norm0 * norm1) <= tolerance
    return cmath.rect(magnitude, phase), coherent, False


def _label_from(key: tuple, index: int, state: StateVector) -> BasisLabel:
    path, pol, rest = key
    return BasisLabel(path, pol, rest[:index] + (CHI,) + rest[index:])


def trace_first_order(
    circuit   : Circuit,
    outcome   : Optional[str] = None,
    initial   : Optional[StateVector] = None,
    policy    : Optional[Mapping[str, str]] = None,
    time      : Optional[str] = None,
    epsilon   : Optional[float] = None,
    tolerance : Optional[float] = None,
    debug     : bool = False,
) -> Dict[str, TraceReport]:
    """
    First-order trace coefficients on every registered mirror.

    The circuit is evolved with symbolic epsilon, postselected on ``outcome``
    (click there, null at every other event) unless an explicit ``policy`` is
    given, and read at ``time`` or at the end.

    Args:
    -----

        :circuit (Circuit): The circuit. Couplings act at first order whatever their mode.

        :outcome (str): Optional argument. The postselected outcome.

        :initial (StateVector): Optional argument. Defaults to the circuit source state.

        :policy (Mapping[str, str]): Optional argument. Overrides the postselection policy.

        :time (str): Optional argument. Time point to read the trace at; defaults to the final state.

        :epsilon (float): Optional argument. Defaults to config.epsilon. Only used for the predicted deficit.

        :tolerance (float): Optional argument. Defaults to config.tolerance.

        :debug (bool): Optional argument. Defaults to `False`. If set to `True` the function prints some debug information.

    Returns:
    --------

        :Dict[str, TraceReport]: One report per registered mirror.

    Raises:
    -------

        :ImpossibleBranchError: The postselected history has zero probability.

    Example:
    --------

        .. code-block:: python

            reports = trace_first_order(build_salih_fig1(), "D0")
            reports["MR_B1"].coefficient   # (0.5+0j)
    """
    epsilon = config.epsilon if epsilon is None else epsilon
    tolerance = config.tolerance if tolerance is None else tolerance
    start = (circuit.initial_state() if initial is None else initial).as_symbolic()
    state, weight = _conditioned_state(circuit, start, _policy(circuit, outcome, policy), time, debug)
    probability = float(to_complex(orders(weight)[0]).real)

    reports: Dict[str, TraceReport] = {}
    for mirror_id in circuit.mirrors:
        coefficient, coherent, anomalous = _first_order_coefficient(state, mirror_id, tolerance)
        verdict = ANOMALOUS_TRACE if anomalous else classify_trace(coefficient)
        reports[mirror_id] = TraceReport(
            mirror_id, outcome, verdict, epsilon,
            coefficient=coefficient, coherent=coherent, probability=probability,
        )
        if debug:
            print(f"[trace_first_order] {mirror_id}: coefficient={coefficient}, verdict={verdict}")
    return reports


def fidelity_deficit(rho: np.ndarray) -> float:
    """1 - <chi|rho|chi> for a unit-trace mirror state, read off the chi_perp population."""
    return float(rho[1, 1].real)


def mirror_state_at(
    circuit   : Circuit,
    mirror_id : str,
    time      : Optional[str] = None,
    outcome   : Optional[str] = None,
    initial   : Optional[StateVector] = None,
    policy    : Optional[Mapping[str, str]] = None,
    epsilon   : Optional[float] = None,
    debug     : bool = False,
) -> np.ndarray:
    """Exact reduced state of one mirror at ``time`` (or at the end), exact couplings."""
    epsilon = config.epsilon if epsilon is None else epsilon
    exact = circuit.with_mode("exact", epsilon)
    state, _ = _conditioned_state(exact, initial, _policy(circuit, outcome, policy), time, debug)
    return reduced_mirror_state(state, mirror_id, epsilon)


def trace_exact(
    circuit : Circuit,
    outcome : Optional[str] = None,
    initial : Optional[StateVector] = None,
    epsilon : Optional[float] = None,
    policy  : Optional[Mapping[str, str]] = None,
    time    : Optional[str] = None,
    debug   : bool = False,
) -> Dict[str, TraceReport]:
    """
    Exact traces from the numerically evolved state.

    Every coupling is switched to exact mode with strength ``epsilon``; the
    conditioned state is reduced to each mirror's 2x2 density matrix.

    Returns:
    --------

        :Dict[str, TraceReport]: One report per registered mirror with ``rho``, ``fidelity_deficit`` and ``coherence`` (rho[chi_perp, chi] / epsilon) set.

    Raises:
    -------

        :ImpossibleBranchError: The postselected history has zero probability.
    """
    epsilon = config.epsilon if epsilon is None else epsilon
    exact = circuit.with_mode("exact", epsilon)
    state, weight = _conditioned_state(exact, initial, _policy(circuit, outcome, policy), time, debug)

    reports: Dict[str, TraceReport] = {}
    for mirror_id in circuit.mirrors:
        rho = reduced_mirror_state(state, mirror_id, epsilon)
        deficit = fidelity_deficit(rho)
        coherence = complex(rho[1, 0]) / epsilon if epsilon > 0 else 0j
        reports[mirror_id] = TraceReport(
            mirror_id, outcome, classify_trace(deficit=deficit, epsilon=epsilon), epsilon,
            fidelity_deficit=deficit,
            coherence=coherence,
            rho=tuple(tuple(complex(x) for x in row) for row in rho),
            probability=float(weight),
        )
        if debug:
            print(f"[trace_exact] {mirror_id}: deficit={deficit:.6e}")
    return reports


def strategy_c_branches(
    circuit   : Circuit,
    initial   : Optional[StateVector] = None,
    epsilon   : Optional[float] = None,
    mirror_id : Optional[str] = None,
    outcomes  : Tuple[str, str] = ("H", "V"),
    debug     : bool = False,
) -> Dict[str, TraceReport]:
    """
    Exact trace on one mirror in each branch of the final H/V measurement.

    Every other event is null. Branch probabilities are conditioned on those
    nulls, so they sum to one.

    Returns:
    --------

        :Dict[str, TraceReport]: Reports keyed by outcome name, ``probability`` set to the branch probability.

    Raises:
    -------

        :WiringError: The circuit has no H/V measurement.
    """
    epsilon = config.epsilon if epsilon is None else epsilon
    names = circuit.outcomes()
    missing = [name for name in outcomes if name not in names]
    if missing:
        raise WiringError(f"[strategy_c_branches] no polarization measurement: missing outcome(s) {missing}")
    mirror_id = mirror_id or circuit.coupled_mirrors()[0]

    base = {name: NULL for name in names}
    exact = circuit.with_mode("exact", epsilon)
    _, ledger = evolve_forward(exact, initial, {**base, **{name: BRANCH for name in outcomes}}, debug=debug)
    reference = ledger.event(outcomes[0]).weight_before

    reports: Dict[str, TraceReport] = {}
    for name in outcomes:
        probability = ledger.probability(name) / reference
        if probability <= config.probability_floor:
            reports[name] = TraceReport(mirror_id, name, NO_TRACE, epsilon, probability=probability)
            continue
        report = trace_exact(circuit, name, initial, epsilon, {**base, name: CLICK}, debug=debug)[mirror_id]
        reports[name] = TraceReport(
            mirror_id, name, report.verdict, epsilon,
            fidelity_deficit=report.fidelity_deficit,
            coherence=report.coherence,
            rho=report.rho,
            probability=probability,
        )
    return reports
