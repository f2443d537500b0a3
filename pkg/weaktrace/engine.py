# weaktrace/engine.py
# SPDX-License-Identifier: MIT
# Copyright (c) 2026 The weaktrace developers
from ._version import __version__

# import required packages
from dataclasses import dataclass, replace
from types import MappingProxyType
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple
import math
import numpy as np
import sympy as sp

# bring in other sibling modules
from .config import config
from .firstorder import EPS, Amplitude, inverse_sqrt, orders, truncate
from .hilbert import (
    POLARIZATIONS,
    BasisLabel,
    Registry,
    RegistryError,
    StateVector,
    WeaktraceError,
    basis_state,
)
from .optics import MIRROR_COUPLED, Element, MirrorCoupling, WiringError

CLICK = "click"
NULL = "null"
BRANCH = "branch"
ACTIONS = (CLICK, NULL, BRANCH)


class ImpossibleBranchError(WeaktraceError):
    """Raised when conditioning on an event whose probability is zero."""


class AmbiguityError(WeaktraceError):
    """Raised when backward evolution meets an event with no declared treatment."""


@dataclass(frozen=True)
class Stage:
    """Elements applied in parallel, optionally followed by a named time point."""

    elements: Tuple[Element, ...]
    timepoint: Optional[str] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "elements", tuple(self.elements))
        seen: Dict[str, Element] = {}
        for element in self.elements:
            for port in element.ports:
                if port in seen:
                    raise WiringError(
                        f"[Stage] port collision on {port!r} between {seen[port].describe()} and {element.describe()}"
                    )
                seen[port] = element

    @property
    def events(self) -> Tuple[Element, ...]:
        return tuple(element for element in self.elements if element.is_event)


@dataclass(frozen=True)
class Circuit:
    """An ordered list of stages over a declared set of ports and mirrors.

    ``source`` is the (port, polarization) the photon enters on and ``initial``
    an optional time-point label for the state before the first stage.
    """

    stages: Tuple[Stage, ...]
    ports: Tuple[str, ...]
    mirrors: Tuple[str, ...] = ()
    name: str = "circuit"
    source: Optional[Tuple[str, str]] = None
    initial: Optional[str] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "stages", tuple(self.stages))
        object.__setattr__(self, "ports", tuple(self.ports))
        object.__setattr__(self, "mirrors", tuple(self.mirrors))
        registry = Registry(self.ports, self.mirrors)

        outcomes: List[str] = []
        timepoints: List[str] = [self.initial] if self.initial else []
        for index, stage in enumerate(self.stages, start=1):
            for element in stage.elements:
                for port in element.ports:
                    if port not in registry.ports:
                        raise WiringError(f"[Circuit] stage {index}: {element.describe()} uses undeclared port {port!r}")
                if element.kind == MIRROR_COUPLED:
                    registry.mirror_index(element.mirror_id)
                if element.is_event:
                    outcomes.append(element.name)
            if stage.timepoint:
                timepoints.append(stage.timepoint)

        for kind, names in (("outcome", outcomes), ("time point", timepoints)):
            duplicates = sorted({name for name in names if names.count(name) > 1})
            if duplicates:
                raise WiringError(f"[Circuit] duplicate {kind} name(s): {', '.join(duplicates)}")

        if self.source is not None:
            port, pol = self.source
            registry.check_port(port)
            if pol not in POLARIZATIONS:
                raise WiringError(f"[Circuit] source polarization must be one of {POLARIZATIONS}, got {pol!r}")
            object.__setattr__(self, "source", (port, pol))

    @property
    def registry(self) -> Registry:
        return Registry(self.ports, self.mirrors)

    def outcomes(self) -> List[str]:
        return [event.name for _, event in self.events()]

    def events(self) -> List[Tuple[int, Element]]:
        """``(stage index, element)`` for every detector and shutter, in order."""
        return [(index, element) for index, stage in enumerate(self.stages) for element in stage.events]

    def timepoints(self) -> List[str]:
        labels = [self.initial] if self.initial else []
        return labels + [stage.timepoint for stage in self.stages if stage.timepoint]

    def initial_state(self, symbolic: bool = False) -> StateVector:
        """``|source, pol>`` with every mirror in its undisturbed level."""
        if self.source is None:
            raise WiringError(f"[Circuit] {self.name!r} declares no source.")
        return basis_state(self.registry, self.source[0], self.source[1], symbolic=symbolic)

    def _with_elements(self, transform) -> "Circuit":
        stages = tuple(Stage(tuple(transform(e) for e in stage.elements), stage.timepoint) for stage in self.stages)
        return replace(self, stages=stages)

    def decoupled(self) -> "Circuit":
        """Same circuit with every mirror coupling removed."""
        return self._with_elements(lambda element: element.decoupled())

    def with_coupling(self, coupling: MirrorCoupling, mirror_id: Optional[str] = None) -> "Circuit":
        """Replace the coupling of every coupled mirror (or only ``mirror_id``)."""
        def swap(element: Element) -> Element:
            if mirror_id is None or element.mirror_id == mirror_id:
                return element.with_coupling(coupling)
            return element
        return self._with_elements(swap)

    def with_mode(self, mode: str, epsilon: Optional[float] = None) -> "Circuit":
        """Switch every coupling to ``mode``, optionally with a common ``epsilon``."""
        def swap(element: Element) -> Element:
            if element.coupling is None:
                return element
            strength = element.coupling.epsilon if epsilon is None else epsilon
            return element.with_coupling(MirrorCoupling(strength, mode))
        return self._with_elements(swap)

    def coupled_mirrors(self) -> List[str]:
        """Ids of the mirrors some element actually couples to, in registry order."""
        used = {e.mirror_id for stage in self.stages for e in stage.elements if e.kind == MIRROR_COUPLED}
        return [mirror_id for mirror_id in self.mirrors if mirror_id in used]

    def without_events(self) -> "Circuit":
        stages = tuple(
            Stage(tuple(e for e in stage.elements if not e.is_event), stage.timepoint) for stage in self.stages
        )
        return replace(self, stages=stages)

    def sliced(self, start: int, stop: int, name: Optional[str] = None) -> "Circuit":
        """Stages ``start`` (inclusive) to ``stop`` (exclusive), keeping the registry."""
        return replace(self, stages=self.stages[start:stop], name=name or self.name, initial=None)

    def relabeled(self, mapping: Mapping[str, str]) -> "Circuit":
        """Rename ports; ports that merge under the mapping are declared once."""
        circuit = self._with_elements(lambda element: element.relabeled(mapping))
        source = (mapping.get(self.source[0], self.source[0]), self.source[1]) if self.source else None
        ports = tuple(dict.fromkeys(mapping.get(p, p) for p in self.ports))
        return replace(circuit, ports=ports, source=source)

    def stage_index(self, timepoint: str) -> int:
        """Number of stages applied when ``timepoint`` is reached."""
        if timepoint == self.initial:
            return 0
        for index, stage in enumerate(self.stages, start=1):
            if stage.timepoint == timepoint:
                return index
        raise RegistryError(f"[Circuit] unknown time point {timepoint!r}; known: {self.timepoints()}")


@dataclass(frozen=True)
class SnapshotSet:
    """States recorded at named time points.

    ``factors`` lists, per conditioning event, the norm of the branch before it
    was renormalized; their product is the unconditional amplitude norm of the
    followed branch.
    """

    direction: str
    snapshots: Mapping[str, StateVector]
    factors: Tuple[Tuple[str, Amplitude], ...] = ()
    final: Optional[StateVector] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "snapshots", MappingProxyType(dict(self.snapshots)))

    def __getitem__(self, timepoint: str) -> StateVector:
        if timepoint not in self.snapshots:
            raise RegistryError(f"[SnapshotSet] no {self.direction} snapshot at {timepoint!r}; have {list(self.snapshots)}")
        return self.snapshots[timepoint]

    def __contains__(self, timepoint: str) -> bool:
        return timepoint in self.snapshots

    def labels(self) -> List[str]:
        return list(self.snapshots)

    def unconditional_norm(self) -> Amplitude:
        norm: Any = 1
        for _, factor in self.factors:
            norm = norm * factor
        return truncate(norm) if isinstance(norm, sp.Basic) else float(abs(norm))


@dataclass(frozen=True)
class LedgerEvent:
    """One detection event met during forward evolution."""

    outcome: str
    action: str
    stage: int
    click_probability: Amplitude
    null_probability: Amplitude
    weight_before: Amplitude

    @property
    def unconditional_click(self) -> Amplitude:
        return _product(self.weight_before, self.click_probability)

    @property
    def weight_after(self) -> Amplitude:
        followed = self.click_probability if self.action == CLICK else self.null_probability
        return _product(self.weight_before, followed)


@dataclass(frozen=True)
class ProbabilityLedger:
    events: Tuple[LedgerEvent, ...] = ()

    def __len__(self) -> int:
        return len(self.events)

    def event(self, outcome: str) -> LedgerEvent:
        for event in self.events:
            if event.outcome == outcome:
                return event
        raise RegistryError(f"[ProbabilityLedger] outcome {outcome!r} was not reached.")

    def probability(self, outcome: str) -> Amplitude:
        """Unconditional probability that ``outcome`` clicks."""
        return self.event(outcome).unconditional_click

    @property
    def final_weight(self) -> Amplitude:
        """Unconditional probability of the followed history."""
        return self.events[-1].weight_after if self.events else 1.0

    def total(self) -> Amplitude:
        """Followed history plus every branched-off click; 1 when every event branches."""
        total: Any = self.final_weight
        for event in self.events:
            if event.action == BRANCH:
                total = total + event.unconditional_click
        return truncate(total) if isinstance(total, sp.Basic) else float(total)


def _product(left: Any, right: Any) -> Amplitude:
    if isinstance(left, sp.Basic) or isinstance(right, sp.Basic):
        return truncate(left * right)
    return float(left) * float(right)


def _is_impossible(probability: Amplitude, symbolic: bool, floor: float) -> bool:
    if symbolic:
        zeroth, _ = orders(probability)
        return sp.simplify(zeroth) == 0
    return probability <= floor


def _sqrt(probability: Amplitude, symbolic: bool) -> Amplitude:
    if not symbolic:
        return math.sqrt(probability)
    zeroth, first = orders(probability)
    return sp.expand(sp.sqrt(zeroth) + first / (2 * sp.sqrt(zeroth)) * EPS)


def _renormalized(state: StateVector, probability: Amplitude) -> StateVector:
    if state.symbolic:
        return state.scaled(inverse_sqrt(probability))
    return state.scaled(1.0 / math.sqrt(probability))


def _split(state: StateVector, event: Element) -> Tuple[StateVector, StateVector]:
    predicate = event.click_predicate()
    clicked = state.restricted(lambda label: predicate.matches(label, state.registry))
    passed = state.restricted(lambda label: not predicate.matches(label, state.registry))
    return clicked, passed


def _check_policy(circuit: Circuit, policy: Mapping[str, str]) -> None:
    outcomes = set(circuit.outcomes())
    for outcome, action in policy.items():
        if outcome not in outcomes:
            raise RegistryError(f"Unknown outcome {outcome!r}; circuit {circuit.name!r} has {sorted(outcomes)}.")
        if action not in ACTIONS:
            raise ValueError(f"Policy action for {outcome!r} must be one of {ACTIONS}, got {action!r}.")


def postselect_policy(circuit: Circuit, outcome: str) -> Dict[str, str]:
    """Policy that clicks at ``outcome`` and is null at every other event."""
    outcomes = circuit.outcomes()
    if outcome not in outcomes:
        raise RegistryError(f"Unknown outcome {outcome!r}; circuit {circuit.name!r} has {outcomes}.")
    return {name: CLICK if name == outcome else NULL for name in outcomes}


def evolve_forward(
    circuit           : Circuit,
    initial           : Optional[StateVector] = None,
    policy            : Optional[Mapping[str, str]] = None,
    probability_floor : Optional[float] = None,
    debug             : bool = False,
) -> Tuple[SnapshotSet, ProbabilityLedger]:
    """
    Evolve a state through ``circuit``, conditioning on detection events.

    Each stage is applied in order. At a detection event the policy decides:
    ``click`` projects onto the absorbed subspace, ``null`` onto its
    complement, and ``branch`` records both probabilities and follows the
    null branch. Every conditioned state is renormalized; the ledger keeps the
    unconditional account.

    Args:
    -----

        :circuit (Circuit): The circuit to run.

        :initial (StateVector): Optional argument. Normalized initial state. Defaults to the circuit source state (numeric).

        :policy (Mapping[str, str]): Optional argument. Outcome name -> ``click``/``null``/``branch``. Missing outcomes branch.

        :probability_floor (float): Optional argument. Defaults to config.probability_floor. Numeric probabilities at or below it count as zero.

        :debug (bool): Optional argument. Defaults to `False`. If set to `True` the function prints some debug information.

    Returns:
    --------

        :Tuple[SnapshotSet, ProbabilityLedger]: The forward snapshots and the ledger of every event met.

    Raises:
    -------

        :ImpossibleBranchError: A ``click`` or ``null`` is requested for an event of zero probability.

        :RegistryError: The policy names an outcome the circuit does not have.

        :ValueError: The initial state is not normalized, or a policy action is unknown.

    Example:
    --------

        .. code-block:: python

            snapshots, ledger = evolve_forward(circuit, circuit.initial_state(symbolic=True), {"D_A1": "null"})
            print(snapshots["t8"])
    """
    probability_floor = config.probability_floor if probability_floor is None else probability_floor
    policy = dict(policy or {})
    _check_policy(circuit, policy)
    state = circuit.initial_state() if initial is None else initial
    if not state.is_normalized():
        raise ValueError(f"[evolve_forward] initial state is not normalized: {state}")

    snapshots: Dict[str, StateVector] = {}
    if circuit.initial:
        snapshots[circuit.initial] = state
    factors: List[Tuple[str, Amplitude]] = []
    events: List[LedgerEvent] = []
    weight: Amplitude = sp.Integer(1) if state.symbolic else 1.0
    terminated = False

    for index, stage in enumerate(circuit.stages, start=1):
        for element in stage.elements:
            if not element.is_event:
                state = element.apply(state)
                continue
            action = policy.get(element.name, BRANCH)
            clicked, passed = _split(state, element)
            if terminated:
                if action != BRANCH:
                    raise ImpossibleBranchError(
                        f"[evolve_forward] cannot condition on {action} at {element.name!r}: the photon was already absorbed"
                    )
                zero = sp.Integer(0) if state.symbolic else 0.0
                events.append(LedgerEvent(element.name, action, index, zero, zero, weight))
                continue
            click_p, null_p = clicked.norm_squared(), passed.norm_squared()
            event = LedgerEvent(element.name, action, index, click_p, null_p, weight)
            events.append(event)
            if debug:
                print(f"[evolve_forward] stage {index} {element.name}: {action}, p(click)={click_p}, p(null)={null_p}")

            followed, probability = (clicked, click_p) if action == CLICK else (passed, null_p)
            if _is_impossible(probability, state.symbolic, probability_floor):
                if action != BRANCH:
                    raise ImpossibleBranchError(
                        f"[evolve_forward] cannot condition on {action} at {element.name!r}: probability {probability}"
                    )
                # the photon is absorbed with certainty; nothing continues
                state, terminated = StateVector(state.registry, {}, state.symbolic), True
                weight = event.weight_after
                continue
            state = _renormalized(followed, probability)
            factors.append((element.name, _sqrt(probability, state.symbolic)))
            weight = event.weight_after
        if stage.timepoint:
            snapshots[stage.timepoint] = state
            if debug:
                print(f"[evolve_forward] stage {index} -> {stage.timepoint} ({len(state)} terms)")

    return SnapshotSet("forward", snapshots, tuple(factors), state), ProbabilityLedger(tuple(events))


def evolve_backward(
    circuit    : Circuit,
    final_bra  : StateVector,
    treatment  : Optional[Mapping[str, str]] = None,
    debug      : bool = False,
) -> SnapshotSet:
    """
    Evolve a postselected bra backwards through ``circuit``.

    Stages are undone in reverse order with the adjoint of every element. The
    snapshot at a stage's time point is taken before that stage is undone, so
    forward and backward snapshots refer to the same instant. Detection events
    insert their click or null projector; bras are not renormalized.

    Args:
    -----

        :circuit (Circuit): The circuit to run backwards.

        :final_bra (StateVector): The postselected state after the last stage, stored as a ket.

        :treatment (Mapping[str, str]): Optional argument. Outcome name -> ``click``/``null``. An event left out is treated as null when the bra has no amplitude it would absorb.

        :debug (bool): Optional argument. Defaults to `False`. If set to `True` the function prints some debug information.

    Returns:
    --------

        :SnapshotSet: Backward snapshots keyed by time point.

    Raises:
    -------

        :AmbiguityError: An untreated event would absorb part of the bra, or ``branch`` is requested.

        :ImpossibleBranchError: A projector annihilates the bra.

        :RegistryError: The treatment names an unknown outcome.
    """
    treatment = dict(treatment or {})
    _check_policy(circuit, treatment)
    bra = final_bra
    snapshots: Dict[str, StateVector] = {}

    for index in range(len(circuit.stages), 0, -1):
        stage = circuit.stages[index - 1]
        if stage.timepoint:
            snapshots[stage.timepoint] = bra
            if debug:
                print(f"[evolve_backward] {stage.timepoint} <- stage {index} ({len(bra)} terms)")
        for element in reversed(stage.elements):
            if not element.is_event:
                bra = element.apply_adjoint(bra)
                continue
            clicked, passed = _split(bra, element)
            action = treatment.get(element.name)
            if action is None:
                if not clicked.is_zero():
                    raise AmbiguityError(
                        f"[evolve_backward] bra has amplitude on {element.name!r}; declare click or null for it"
                    )
                action = NULL
            if action == BRANCH:
                raise AmbiguityError(f"[evolve_backward] {element.name!r}: backward evolution cannot branch")
            bra = clicked if action == CLICK else passed
            if bra.is_zero():
                raise ImpossibleBranchError(f"[evolve_backward] {action} at {element.name!r} annihilates the bra")

    if circuit.initial:
        snapshots[circuit.initial] = bra
    ordered = {label: snapshots[label] for label in circuit.timepoints() if label in snapshots}
    return SnapshotSet("backward", ordered, (), bra)


def outcome_probability(
    circuit : Circuit,
    initial : Optional[StateVector],
    outcome : str,
    policy  : Optional[Mapping[str, str]] = None,
    debug   : bool = False,
) -> Amplitude:
    """
    Unconditional probability that ``outcome`` clicks.

    Every other event branches unless ``policy`` says otherwise, so earlier
    clicks are accounted for as lost photons. Mirrors are traced out.

    Raises:
    -------

        :RegistryError: ``outcome`` is not an event of the circuit.
    """
    if outcome not in circuit.outcomes():
        raise RegistryError(f"Unknown outcome {outcome!r}; circuit {circuit.name!r} has {circuit.outcomes()}.")
    policy = dict(policy or {})
    policy[outcome] = BRANCH
    _, ledger = evolve_forward(circuit, initial, policy, debug=debug)
    probability = ledger.probability(outcome)
    if debug:
        print(f"[outcome_probability] P({outcome}) = {probability}")
    return probability


def transfer_matrix(circuit: Circuit, epsilon: float = 0.0, basis: Optional[Sequence[BasisLabel]] = None) -> np.ndarray:
    """Dense matrix of the whole circuit with detection events as identities."""
    registry = circuit.registry
    basis = registry.basis() if basis is None else list(basis)
    stripped = circuit.without_events()
    columns = []
    for label in basis:
        state = StateVector(registry, {label: 1})
        for stage in stripped.stages:
            for element in stage.elements:
                state = element.apply(state)
        columns.append(state.dense(basis, epsilon))
    return np.array(columns, dtype=complex).T
