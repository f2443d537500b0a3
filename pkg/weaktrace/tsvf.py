# weaktrace/tsvf.py
# SPDX-License-Identifier: MIT
# Copyright (c) 2026 The weaktrace developers
from ._version import __version__

# import required packages
from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple
import math
import sympy as sp

# bring in other sibling modules
from .config import config
from .engine import Circuit, evolve_backward, evolve_forward, postselect_policy
from .firstorder import Amplitude, divide, is_zero, to_complex
from .hilbert import OperatorSpec, StateVector, WeaktraceError, inner_product

"""
Two-state vectors and weak values.

The weak value of an operator A between a forward state |psi> and a backward
state <phi| is <phi|A|psi> / <phi|psi>. Symbolic states give exact first-order
expressions; numeric states give Python complex numbers.
"""


class UndefinedWeakValueError(WeaktraceError):
    """Raised when the forward and backward states are orthogonal."""


class CompletenessError(WeaktraceError):
    """Raised for an incomplete ensemble or a set of projectors that is not a partition."""


@dataclass(frozen=True)
class TwoStateVector:
    forward: StateVector
    backward: StateVector
    time: Optional[str]
    overlap: Amplitude

    @property
    def symbolic(self) -> bool:
        return self.forward.symbolic or self.backward.symbolic


def _vanishes(value: Amplitude, probability_floor: float) -> bool:
    if isinstance(value, sp.Basic):
        return is_zero(value)
    return abs(value) ** 2 <= probability_floor


def two_state_vector(
    forward           : StateVector,
    backward          : StateVector,
    time              : Optional[str] = None,
    probability_floor : Optional[float] = None,
) -> TwoStateVector:
    """
    Pair a forward state with a backward state at the same instant.

    Raises:
    -------

        :UndefinedWeakValueError: ``<backward|forward>`` is zero.

        :RegistryError: The two states live on different registries.
    """
    probability_floor = config.probability_floor if probability_floor is None else probability_floor
    overlap = inner_product(backward, forward)
    if _vanishes(overlap, probability_floor):
        where = f" at {time}" if time else ""
        raise UndefinedWeakValueError(f"[two_state_vector] forward and backward states are orthogonal{where}")
    return TwoStateVector(forward, backward, time, overlap)


def postselected_bra(circuit: Circuit, outcome: str, initial: Optional[StateVector] = None) -> StateVector:
    """The state that reaches ``outcome`` when it clicks and every other event is null."""
    snapshots, _ = evolve_forward(circuit, initial, postselect_policy(circuit, outcome))
    return snapshots.final


def two_state_vector_at(
    circuit  : Circuit,
    time     : str,
    outcome  : str,
    initial  : Optional[StateVector] = None,
    bra      : Optional[StateVector] = None,
    debug    : bool = False,
) -> TwoStateVector:
    """
    Two-state vector at ``time`` for the history that ends with ``outcome``.

    The forward state is conditioned on a null result at every event before
    ``outcome``; the backward state starts from ``bra`` (by default the state
    that reaches ``outcome``) and is evolved back with the same treatment.

    Args:
    -----

        :circuit (Circuit): The circuit.

        :time (str): Time-point label, e.g. ``'t2'``.

        :outcome (str): The postselected outcome.

        :initial (StateVector): Optional argument. Defaults to the circuit source state.

        :bra (StateVector): Optional argument. Final postselection state. Defaults to :py:func:`postselected_bra`.

        :debug (bool): Optional argument. Defaults to `False`. If set to `True` the function prints some debug information.

    Returns:
    --------

        :TwoStateVector: forward and backward states at ``time``.

    Example:
    --------

        .. code-block:: python

            tsv = two_state_vector_at(build_salih_fig1().decoupled(), "t2", "D0")
            weak_value(tsv, projector(paths=["C"]))   # 1/2
    """
    policy = postselect_policy(circuit, outcome)
    forward, _ = evolve_forward(circuit, initial, policy, debug=debug)
    final_bra = forward.final if bra is None else bra
    backward = evolve_backward(circuit, final_bra, policy, debug=debug)
    return two_state_vector(forward[time], backward[time], time)


def weak_value(tsv: TwoStateVector, operator: OperatorSpec, debug: bool = False) -> Amplitude:
    """
    Weak value ``<phi|A|psi> / <phi|psi>``.

    Args:
    -----

        :tsv (TwoStateVector): Pre- and postselected states at one instant.

        :operator (OperatorSpec): The operator A, typically a projector.

        :debug (bool): Optional argument. Defaults to `False`. If set to `True` the function prints some debug information.

    Returns:
    --------

        :complex | sympy.Expr: A complex number for numeric states, an exact first-order expression for symbolic ones.
    """
    numerator = inner_product(tsv.backward, operator.apply(tsv.forward))
    if tsv.symbolic:
        value = divide(numerator, tsv.overlap)
    else:
        value = complex(numerator) / complex(tsv.overlap)
    if debug:
        print(f"[weak_value] ({operator.name})_w at {tsv.time} = {value}")
    return value


@dataclass(frozen=True)
class EnsembleOutcome:
    name: str
    probability: float
    bra: StateVector


@dataclass(frozen=True)
class OutcomeEnsemble:
    """A complete measurement: outcome names, probabilities and backward states."""

    outcomes: Tuple[EnsembleOutcome, ...]

    def __post_init__(self) -> None:
        outcomes = tuple(self.outcomes)
        object.__setattr__(self, "outcomes", outcomes)
        total = sum(outcome.probability for outcome in outcomes)
        if not outcomes or abs(total - 1.0) > 1e-12:
            raise CompletenessError(f"[OutcomeEnsemble] probabilities sum to {total}, not 1")
        for outcome in outcomes:
            if outcome.probability < 0:
                raise CompletenessError(f"[OutcomeEnsemble] negative probability for {outcome.name!r}")
        for i, left in enumerate(outcomes):
            for right in outcomes[i + 1:]:
                overlap = inner_product(left.bra, right.bra)
                if not _vanishes(overlap, config.tolerance**2):
                    raise CompletenessError(
                        f"[OutcomeEnsemble] bras of {left.name!r} and {right.name!r} are not orthogonal ({overlap})"
                    )

    def __len__(self) -> int:
        return len(self.outcomes)

    def __getitem__(self, name: str) -> EnsembleOutcome:
        for outcome in self.outcomes:
            if outcome.name == name:
                return outcome
        raise KeyError(name)

    def names(self) -> List[str]:
        return [outcome.name for outcome in self.outcomes]


def postselection_ensemble(
    pre     : StateVector,
    bras    : Mapping[str, StateVector],
    epsilon : Optional[float] = None,
) -> OutcomeEnsemble:
    """
    Build an ensemble from final bras, with probabilities ``|<phi_k|psi>|^2``.

    Bras are normalized; probabilities are normalized over the ensemble, so
    the bras only need to span the part of the space ``pre`` lives in.
    Symbolic states are evaluated at ``epsilon``.

    Raises:
    -------

        :CompletenessError: ``pre`` has no overlap with any of the bras, or the bras are not orthogonal.
    """
    epsilon = config.epsilon if epsilon is None else epsilon
    pre = pre.as_numeric(epsilon)
    weights: Dict[str, float] = {}
    normalized: Dict[str, StateVector] = {}
    for name, bra in bras.items():
        bra = bra.as_numeric(epsilon)
        norm = bra.norm_squared()
        if norm <= 0:
            raise CompletenessError(f"[postselection_ensemble] bra {name!r} is zero")
        normalized[name] = bra.scaled(1.0 / math.sqrt(norm))
        weights[name] = abs(inner_product(normalized[name], pre)) ** 2
    total = sum(weights.values())
    if total <= 0:
        raise CompletenessError("[postselection_ensemble] the state is orthogonal to every bra")
    return OutcomeEnsemble(tuple(EnsembleOutcome(name, weights[name] / total, normalized[name]) for name in bras))


def mixed_weak_value(
    pre      : StateVector,
    ensemble : OutcomeEnsemble,
    operator : OperatorSpec,
    time     : Optional[str] = None,
    debug    : bool = False,
) -> complex:
    """
    Weak value for an unread (mixed) postselection.

    The probability-weighted average of the pure weak values of the outcomes;
    outcomes at or below the probability floor are skipped.

    Raises:
    -------

        :UndefinedWeakValueError: An outcome of nonzero probability is orthogonal to ``pre``.
    """
    total = 0j
    for outcome in ensemble.outcomes:
        if outcome.probability <= config.probability_floor:
            continue
        value = to_complex(weak_value(two_state_vector(pre, outcome.bra, time), operator))
        if debug:
            print(f"[mixed_weak_value] {outcome.name}: p={outcome.probability:.6g}, wv={value}")
        total += outcome.probability * value
    return total


@dataclass(frozen=True)
class WeakValueSumReport:
    values: Tuple[Tuple[str, Amplitude], ...]
    total: Amplitude

    def value(self, name: str) -> Amplitude:
        return dict(self.values)[name]


def weak_value_sum_check(
    tsv       : TwoStateVector,
    partition : Sequence[OperatorSpec],
    tolerance : Optional[float] = None,
) -> WeakValueSumReport:
    """
    Check that the weak values of a partition of projectors add up to one.

    The projectors must not overlap anywhere and must cover every label on
    which either state of ``tsv`` has amplitude.

    Raises:
    -------

        :CompletenessError: The projectors overlap, leave part of the support uncovered, or their weak values do not sum to one.
    """
    tolerance = config.tolerance if tolerance is None else tolerance
    registry = tsv.forward.registry
    for operator in partition:
        if operator.kind != "projector":
            raise CompletenessError(f"[weak_value_sum_check] {operator.name} is not a projector")
        operator.predicate.validate(registry)
    for label in registry.basis():
        hits = [op.name for op in partition if op.predicate.matches(label, registry)]
        if len(hits) > 1:
            raise CompletenessError(f"[weak_value_sum_check] {label} is selected by {hits}")
    support = set(tsv.forward.amplitudes) | set(tsv.backward.amplitudes)
    for label in sorted(support, key=registry.sort_key):
        if not any(op.predicate.matches(label, registry) for op in partition):
            raise CompletenessError(f"[weak_value_sum_check] {label} is not covered by the partition")

    values = tuple((op.name, weak_value(tsv, op)) for op in partition)
    total: Any = sum((value for _, value in values), sp.Integer(0) if tsv.symbolic else 0j)
    balanced = is_zero(total - 1) if tsv.symbolic else abs(total - 1) <= tolerance
    if not balanced:
        raise CompletenessError(f"[weak_value_sum_check] weak values sum to {total}")
    return WeakValueSumReport(values, total)
