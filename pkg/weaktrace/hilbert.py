# weaktrace/hilbert.py
# SPDX-License-Identifier: MIT
# Copyright (c) 2026 The weaktrace developers
from ._version import __version__

# import required packages
from dataclasses import dataclass, field
from itertools import product
from types import MappingProxyType
from typing import Any, Callable, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple, Union
import numpy as np
import sympy as sp

# bring in other sibling modules
from .config import config
from .firstorder import Amplitude, conjugate, exact, is_zero, to_complex, truncate

"""
Labeled composite state space of one photon and a set of two-level mirrors.

A basis label is (path, polarization, mirror levels). Mirror levels are stored
positionally, in the order the mirrors were registered. States are sparse maps
from labels to amplitudes; a missing label means amplitude exactly zero. Kets
and bras share the representation: a bra is stored as the ket it is dual to,
and :py:func:`inner_product` conjugates its first argument.
"""

POLARIZATIONS = ("H", "V")
CHI = "chi"
CHI_PERP = "chi_perp"
LEVELS = (CHI, CHI_PERP)


class WeaktraceError(Exception):
    """Base exception for weaktrace."""


class RegistryError(WeaktraceError):
    """Raised for unknown ports or mirrors and for mismatched registries."""


class DegenerateStateError(WeaktraceError):
    """Raised when a state that must be normalizable has zero norm."""


@dataclass(frozen=True)
class Registry:
    """The declared ports and registered mirror ids a state lives on."""

    ports: Tuple[str, ...]
    mirrors: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "ports", tuple(self.ports))
        object.__setattr__(self, "mirrors", tuple(self.mirrors))
        if len(set(self.ports)) != len(self.ports):
            raise RegistryError(f"[Registry] duplicate port in {self.ports}")
        if len(set(self.mirrors)) != len(self.mirrors):
            raise RegistryError(f"[Registry] duplicate mirror in {self.mirrors}")

    def check_port(self, port: str) -> str:
        if port not in self.ports:
            raise RegistryError(f"Unknown port {port!r}; declared ports are {self.ports}.")
        return port

    def mirror_index(self, mirror_id: str) -> int:
        try:
            return self.mirrors.index(mirror_id)
        except ValueError:
            raise RegistryError(f"Unregistered mirror {mirror_id!r}; registered mirrors are {self.mirrors}.") from None

    def without_mirrors(self) -> "Registry":
        return Registry(self.ports, ())

    def basis(self) -> List["BasisLabel"]:
        """Every basis label, in canonical order."""
        return [
            BasisLabel(path, pol, env)
            for path in self.ports
            for pol in POLARIZATIONS
            for env in product(LEVELS, repeat=len(self.mirrors))
        ]

    def sort_key(self, label: "BasisLabel") -> Tuple[int, int, Tuple[int, ...]]:
        return (
            self.ports.index(label.path),
            POLARIZATIONS.index(label.pol),
            tuple(LEVELS.index(level) for level in label.env),
        )


@dataclass(frozen=True)
class BasisLabel:
    """One composite basis state |path, pol> |chi levels>."""

    path: str
    pol: str
    env: Tuple[str, ...] = ()

    def with_path(self, path: str) -> "BasisLabel":
        return BasisLabel(path, self.pol, self.env)

    def with_pol(self, pol: str) -> "BasisLabel":
        return BasisLabel(self.path, pol, self.env)

    def with_level(self, index: int, level: str) -> "BasisLabel":
        env = list(self.env)
        env[index] = level
        return BasisLabel(self.path, self.pol, tuple(env))

    def __str__(self) -> str:
        env = "".join(f"|{level}>" for level in self.env)
        return f"|{self.path},{self.pol}>{env}"


def _check_label(registry: Registry, label: BasisLabel) -> None:
    registry.check_port(label.path)
    if label.pol not in POLARIZATIONS:
        raise RegistryError(f"Unknown polarization {label.pol!r} in {label}.")
    if len(label.env) != len(registry.mirrors):
        raise RegistryError(
            f"Label {label} carries {len(label.env)} mirror levels, registry has {len(registry.mirrors)} mirrors."
        )
    for level in label.env:
        if level not in LEVELS:
            raise RegistryError(f"Unknown mirror level {level!r} in {label}.")


@dataclass(frozen=True)
class StateVector:
    """Sparse, immutable map from basis labels to complex amplitudes.

    Numeric states hold Python ``complex`` amplitudes. Symbolic states hold
    sympy expressions in epsilon, truncated to first order.
    """

    registry: Registry
    amplitudes: Mapping[BasisLabel, Amplitude] = field(default_factory=dict)
    symbolic: bool = False

    def __post_init__(self) -> None:
        cleaned: Dict[BasisLabel, Amplitude] = {}
        for label, amplitude in dict(self.amplitudes).items():
            _check_label(self.registry, label)
            if self.symbolic:
                amplitude = truncate(amplitude)
                if amplitude == 0:
                    continue
            else:
                amplitude = complex(to_complex(amplitude))
                if amplitude == 0:
                    continue
            cleaned[label] = amplitude
        ordered = dict(sorted(cleaned.items(), key=lambda item: self.registry.sort_key(item[0])))
        object.__setattr__(self, "amplitudes", MappingProxyType(ordered))

    # -- inspection -----------------------------------------------------

    def amplitude(self, label: BasisLabel) -> Amplitude:
        return self.amplitudes.get(label, sp.Integer(0) if self.symbolic else 0j)

    def items(self) -> List[Tuple[BasisLabel, Amplitude]]:
        return list(self.amplitudes.items())

    def __len__(self) -> int:
        return len(self.amplitudes)

    def is_zero(self) -> bool:
        return not self.amplitudes

    def norm_squared(self) -> Amplitude:
        """Sum of |amplitude|^2 (a first-order expression for symbolic states)."""
        if self.symbolic:
            return truncate(sum((a * conjugate(a) for a in self.amplitudes.values()), sp.Integer(0)))
        return float(sum(abs(a) ** 2 for a in self.amplitudes.values()))

    def is_normalized(self, tolerance: Optional[float] = None) -> bool:
        tolerance = config.tolerance if tolerance is None else tolerance
        if self.symbolic:
            return is_zero(self.norm_squared() - 1)
        return abs(self.norm_squared() - 1.0) <= tolerance

    def paths(self) -> FrozenSet[str]:
        return frozenset(label.path for label in self.amplitudes)

    # -- construction of new states ------------------------------------

    def _rebuilt(self, amplitudes: Mapping[BasisLabel, Amplitude]) -> "StateVector":
        return StateVector(self.registry, amplitudes, self.symbolic)

    def scaled(self, factor: Any) -> "StateVector":
        if self.symbolic:
            factor = exact(factor)
        return self._rebuilt({label: factor * a for label, a in self.amplitudes.items()})

    def plus(self, other: "StateVector") -> "StateVector":
        _check_compatible(self, other)
        left, right = _promote(self, other)
        summed: Dict[BasisLabel, Amplitude] = dict(left.amplitudes)
        for label, amplitude in right.amplitudes.items():
            summed[label] = summed.get(label, 0) + amplitude
        return StateVector(left.registry, summed, left.symbolic)

    def minus(self, other: "StateVector") -> "StateVector":
        return self.plus(other.scaled(-1))

    def restricted(self, keep: Callable[[BasisLabel], bool]) -> "StateVector":
        """Keep only the labels for which ``keep(label)`` holds."""
        return self._rebuilt({label: a for label, a in self.amplitudes.items() if keep(label)})

    def mapped(self, transform: Callable[[BasisLabel], Iterable[Tuple[BasisLabel, Any]]]) -> "StateVector":
        """Apply a linear map given by its action on basis labels."""
        result: Dict[BasisLabel, Amplitude] = {}
        for label, amplitude in self.amplitudes.items():
            for target, coefficient in transform(label):
                result[target] = result.get(target, 0) + coefficient * amplitude
        return self._rebuilt(result)

    def as_symbolic(self) -> "StateVector":
        if self.symbolic:
            return self
        return StateVector(self.registry, {label: exact(a) for label, a in self.amplitudes.items()}, True)

    def as_numeric(self, epsilon: float = 0.0) -> "StateVector":
        if not self.symbolic:
            return self
        return StateVector(self.registry, {label: to_complex(a, epsilon) for label, a in self.amplitudes.items()}, False)

    def dense(self, basis: Optional[Sequence[BasisLabel]] = None, epsilon: float = 0.0) -> np.ndarray:
        """Dense complex vector over ``basis`` (defaults to the full registry basis)."""
        basis = self.registry.basis() if basis is None else basis
        return np.array([to_complex(self.amplitude(label), epsilon) for label in basis], dtype=complex)

    def __str__(self) -> str:
        if not self.amplitudes:
            return "0"
        return " + ".join(f"({a}){label}" for label, a in self.amplitudes.items())


def _check_compatible(left: StateVector, right: StateVector) -> None:
    if left.registry.mirrors != right.registry.mirrors:
        raise RegistryError(
            f"Mirror registries differ: {left.registry.mirrors} vs {right.registry.mirrors}."
        )
    if set(left.registry.ports) != set(right.registry.ports):
        raise RegistryError(f"Port registries differ: {left.registry.ports} vs {right.registry.ports}.")


def _promote(left: StateVector, right: StateVector) -> Tuple[StateVector, StateVector]:
    if left.symbolic or right.symbolic:
        return left.as_symbolic(), right.as_symbolic()
    return left, right


def basis_state(
    registry : Registry,
    path     : str,
    pol      : str,
    env      : Optional[Sequence[str]] = None,
    symbolic : bool = False,
) -> StateVector:
    """Unit state on a single label; mirrors default to their undisturbed level."""
    env = tuple(env) if env is not None else (CHI,) * len(registry.mirrors)
    return StateVector(registry, {BasisLabel(path, pol, env): 1}, symbolic)


def state_from_terms(
    registry : Registry,
    terms    : Iterable[Tuple[Any, ...]],
    symbolic : bool = False,
) -> StateVector:
    """Build a state from ``(coefficient, path, pol[, env])`` tuples."""
    amplitudes: Dict[BasisLabel, Amplitude] = {}
    for term in terms:
        coefficient, path, pol, *rest = term
        env = tuple(rest[0]) if rest else (CHI,) * len(registry.mirrors)
        label = BasisLabel(path, pol, env)
        amplitudes[label] = amplitudes.get(label, 0) + coefficient
    return StateVector(registry, amplitudes, symbolic)


def inner_product(bra: StateVector, ket: StateVector, debug: bool = False) -> Amplitude:
    """Compute <bra|ket>, conjugating the amplitudes of ``bra`` exactly once.

    Args:
    -----

        :bra (StateVector): The state whose dual is taken.

        :ket (StateVector): The state the dual acts on.

        :debug (bool): Optional argument. Defaults to `False`. If set to `True` the function prints some debug information.

    Returns:
    --------

        :complex | sympy.Expr: The overlap. Symbolic when either argument is symbolic.

    Raises:
    -------

        :RegistryError: The two states live on different port or mirror registries.

    Example:
    --------

        .. code-block:: python

            psi = weaktrace.basis_state(registry, "A", "H")
            weaktrace.inner_product(psi, psi)   # (1+0j)
    """
    _check_compatible(bra, ket)
    bra, ket = _promote(bra, ket)
    if bra.symbolic:
        total = sp.Integer(0)
        for label, amplitude in ket.amplitudes.items():
            if label in bra.amplitudes:
                total += conjugate(bra.amplitudes[label]) * amplitude
        total = truncate(total)
    else:
        total = 0j
        for label, amplitude in ket.amplitudes.items():
            if label in bra.amplitudes:
                total += bra.amplitudes[label].conjugate() * amplitude
    if debug:
        print(f"[inner_product] {len(bra)} x {len(ket)} terms -> {total}")
    return total


@dataclass(frozen=True)
class LabelPredicate:
    """Declarative selection of basis labels; ``None`` means 'any'."""

    paths: Optional[FrozenSet[str]] = None
    pols: Optional[FrozenSet[str]] = None
    levels: Tuple[Tuple[str, str], ...] = ()

    def validate(self, registry: Registry) -> None:
        for path in sorted(self.paths or ()):
            registry.check_port(path)
        for pol in sorted(self.pols or ()):
            if pol not in POLARIZATIONS:
                raise RegistryError(f"Unknown polarization {pol!r}.")
        for mirror_id, level in self.levels:
            registry.mirror_index(mirror_id)
            if level not in LEVELS:
                raise RegistryError(f"Unknown mirror level {level!r}.")

    def matches(self, label: BasisLabel, registry: Registry) -> bool:
        if self.paths is not None and label.path not in self.paths:
            return False
        if self.pols is not None and label.pol not in self.pols:
            return False
        for mirror_id, level in self.levels:
            if label.env[registry.mirror_index(mirror_id)] != level:
                return False
        return True

    def describe(self) -> str:
        parts = []
        if self.paths is not None:
            parts.append("path=" + "|".join(sorted(self.paths)))
        if self.pols is not None:
            parts.append("pol=" + "|".join(sorted(self.pols)))
        parts.extend(f"{mirror_id}={level}" for mirror_id, level in self.levels)
        return ",".join(parts) or "identity"


@dataclass(frozen=True)
class OperatorSpec:
    """A linear operator: a projector, an element map, or a linear combination."""

    kind: str
    name: str
    predicate: Optional[LabelPredicate] = None
    action: Optional[Callable[[StateVector], StateVector]] = field(default=None, compare=False)
    terms: Tuple[Tuple[Any, "OperatorSpec"], ...] = ()

    def apply(self, state: StateVector) -> StateVector:
        if self.kind == "projector":
            self.predicate.validate(state.registry)
            return state.restricted(lambda label: self.predicate.matches(label, state.registry))
        if self.kind == "element":
            return self.action(state)
        if self.kind == "composed":
            result = StateVector(state.registry, {}, state.symbolic)
            for coefficient, operator in self.terms:
                result = result.plus(operator.apply(state).scaled(coefficient))
            return result
        raise ValueError(f"Unknown operator kind {self.kind!r}.")

    def __add__(self, other: "OperatorSpec") -> "OperatorSpec":
        return linear_combination([(1, self), (1, other)])

    def __rmul__(self, coefficient: Any) -> "OperatorSpec":
        return linear_combination([(coefficient, self)])


def projector(
    paths    : Optional[Iterable[str]] = None,
    pols     : Optional[Iterable[str]] = None,
    levels   : Optional[Mapping[str, str]] = None,
    registry : Optional[Registry] = None,
    name     : Optional[str] = None,
) -> OperatorSpec:
    """Projector onto the labels matching a predicate; no arguments gives the identity.

    Args:
    -----

        :paths (Iterable[str]): Optional argument. Paths to keep, e.g. ``["C"]`` for P_C.

        :pols (Iterable[str]): Optional argument. Polarizations to keep.

        :levels (Mapping[str, str]): Optional argument. Required mirror levels by mirror id.

        :registry (Registry): Optional argument. When given, the predicate is validated immediately.

        :name (str): Optional argument. Display name; defaults to a description of the predicate.

    Returns:
    --------

        :OperatorSpec: An idempotent, self-adjoint operator of kind ``projector``.

    Raises:
    -------

        :RegistryError: The predicate names an unknown port, polarization or mirror.
    """
    predicate = LabelPredicate(
        frozenset(paths) if paths is not None else None,
        frozenset(pols) if pols is not None else None,
        tuple(sorted((levels or {}).items())),
    )
    if registry is not None:
        predicate.validate(registry)
    return OperatorSpec("projector", name or f"P[{predicate.describe()}]", predicate)


def identity() -> OperatorSpec:
    return projector(name="I")


def linear_combination(terms: Iterable[Tuple[Any, OperatorSpec]], name: Optional[str] = None) -> OperatorSpec:
    terms = tuple(terms)
    label = name or " + ".join(f"{coefficient}*{operator.name}" for coefficient, operator in terms)
    return OperatorSpec("composed", label, terms=terms)


def operator_matrix(
    operator : OperatorSpec,
    registry : Registry,
    symbolic : bool = False,
    epsilon  : float = 0.0,
) -> np.ndarray:
    """Dense matrix of ``operator`` over the full basis of ``registry``."""
    basis = registry.basis()
    columns = []
    for label in basis:
        image = operator.apply(StateVector(registry, {label: 1}, symbolic))
        columns.append(image.dense(basis, epsilon))
    return np.array(columns, dtype=complex).T


MixtureLike = Union[StateVector, Sequence[Tuple[float, StateVector]]]


def reduced_mirror_state(
    state_or_mixture : MixtureLike,
    mirror_id        : str,
    epsilon          : Optional[float] = None,
    debug            : bool = False,
) -> np.ndarray:
    """Reduced 2x2 density matrix of one mirror, in the basis (chi, chi_perp).

    The photon and every other mirror are traced out. A single state is
    normalized first; a mixture is given as ``(weight, state)`` pairs, each
    state is normalized and the weights are normalized to sum to one.

    Args:
    -----

        :state_or_mixture (StateVector | Sequence[Tuple[float, StateVector]]): Pure state or explicit ensemble.

        :mirror_id (str): Registered id of the mirror to keep.

        :epsilon (float): Optional argument. Defaults to config.epsilon. Value substituted into symbolic states.

        :debug (bool): Optional argument. Defaults to `False`. If set to `True` the function prints some debug information.

    Returns:
    --------

        :numpy.ndarray: Hermitian, unit-trace, positive semidefinite 2x2 complex matrix.

    Raises:
    -------

        :RegistryError: ``mirror_id`` is not registered.

        :DegenerateStateError: The input (or a weighted member of the mixture) has zero norm.
    """
    epsilon = config.epsilon if epsilon is None else epsilon
    members = [(1.0, state_or_mixture)] if isinstance(state_or_mixture, StateVector) else list(state_or_mixture)
    total_weight = float(sum(weight for weight, _ in members))
    if total_weight <= 0:
        raise DegenerateStateError("[reduced_mirror_state] mixture weights sum to zero.")

    rho = np.zeros((2, 2), dtype=complex)
    for weight, member in members:
        if weight == 0:
            continue
        numeric = member.as_numeric(epsilon)
        index = numeric.registry.mirror_index(mirror_id)
        norm = numeric.norm_squared()
        if norm <= 0:
            raise DegenerateStateError("[reduced_mirror_state] cannot reduce a zero-norm state.")
        # group amplitudes by everything except the kept mirror level
        grouped: Dict[Tuple[str, str, Tuple[str, ...]], np.ndarray] = {}
        for label, amplitude in numeric.amplitudes.items():
            rest = (label.path, label.pol, label.env[:index] + label.env[index + 1:])
            column = grouped.setdefault(rest, np.zeros(2, dtype=complex))
            column[LEVELS.index(label.env[index])] += amplitude
        for column in grouped.values():
            rho += (weight / total_weight) * np.outer(column, column.conj()) / norm

    if debug:
        print(f"[reduced_mirror_state] {mirror_id}: diag=({rho[0, 0].real:.3e}, {rho[1, 1].real:.3e})")
    return rho


def is_density_matrix(rho: np.ndarray, tolerance: Optional[float] = None) -> bool:
    """Hermitian, unit trace and no eigenvalue below -tolerance."""
    tolerance = config.tolerance if tolerance is None else tolerance
    if not np.allclose(rho, rho.conj().T, atol=tolerance, rtol=0):
        return False
    if abs(np.trace(rho) - 1) > tolerance:
        return False
    return bool(np.min(np.linalg.eigvalsh(rho)) >= -tolerance)
