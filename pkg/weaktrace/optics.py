# weaktrace/optics.py
# SPDX-License-Identifier: MIT
# Copyright (c) 2026 The weaktrace developers
from ._version import __version__

# import required packages
from dataclasses import dataclass, replace
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple
import math
import numpy as np
import sympy as sp

# bring in other sibling modules
from .config import MODES
from .firstorder import EPS
from .hilbert import (
    CHI,
    CHI_PERP,
    LEVELS,
    POLARIZATIONS,
    BasisLabel,
    LabelPredicate,
    Registry,
    StateVector,
    WeaktraceError,
)

"""
Optical elements with a fixed, real sign convention.

The calibration table below gives the state snapshots of Salih's nested
interferometer with real amplitudes only; the convention id travels with
every report.

    convention 'real-v1'
        PBS   H: transmitted (input i -> output i), amplitude +1
              V: reflected   (input i -> output 1-i), amplitude +1
        HWP   H -> (H + V)/sqrt(2)
              V -> (V - H)/sqrt(2)

A PBS is extended to a signed permutation of all eight modes on its four
ports (outputs map back onto inputs), so each non-event element is unitary on
the full space and its adjoint is exact.
"""

PBS = "PBS"
HWP = "HWP"
MIRROR_COUPLED = "MirrorCoupled"
MIRROR_IDEAL = "MirrorIdeal"
SHUTTER = "Shutter"
DETECTOR = "Detector"
POL_FILTER_PBS = "PolFilterPBS"

ELEMENT_KINDS = (PBS, HWP, MIRROR_COUPLED, MIRROR_IDEAL, SHUTTER, DETECTOR, POL_FILTER_PBS)
EVENT_KINDS = (SHUTTER, DETECTOR)


class WiringError(WeaktraceError):
    """Raised for port collisions and malformed element declarations."""


@dataclass(frozen=True)
class Convention:
    pbs_transmit: int
    pbs_reflect: int
    hwp_sigma: int


CONVENTIONS: Dict[str, Convention] = {
    "real-v1": Convention(pbs_transmit=1, pbs_reflect=1, hwp_sigma=-1),
}
DEFAULT_CONVENTION = "real-v1"


@dataclass(frozen=True)
class MirrorCoupling:
    """Weak photon-mirror coupling of strength ``epsilon``.

    exact mode:       |chi>      -> eta (|chi> + eps |chi_perp>)
                      |chi_perp> -> eta (|chi_perp> - eps |chi>),  eta = (1 + eps^2)^(-1/2)
    first-order mode: the same map without eta; second-order terms are dropped downstream.
    """

    epsilon: float
    mode: str = "first-order"

    def __post_init__(self) -> None:
        if self.epsilon < 0:
            raise ValueError(f"Coupling strength must be non-negative, got {self.epsilon}.")
        if self.mode not in MODES:
            raise ValueError(f"Unknown coupling mode {self.mode!r}. Choose from {MODES}.")
        object.__setattr__(self, "epsilon", float(self.epsilon))

    @property
    def eta(self) -> float:
        return 1.0 / math.sqrt(1.0 + self.epsilon**2)

    def with_mode(self, mode: str) -> "MirrorCoupling":
        return MirrorCoupling(self.epsilon, mode)


@dataclass(frozen=True)
class Element:
    """Immutable descriptor of one optical element.

    ``inputs``/``outputs`` are path labels. Events (detectors, shutters) have a
    single input and no outputs; their ``name`` is the outcome name.
    """

    kind: str
    inputs: Tuple[str, ...]
    outputs: Tuple[str, ...] = ()
    name: str = ""
    mirror_id: str = ""
    coupling: Optional[MirrorCoupling] = None
    pol_filter: Optional[str] = None
    convention: str = DEFAULT_CONVENTION

    def __post_init__(self) -> None:
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        if self.kind not in ELEMENT_KINDS:
            raise WiringError(f"Unknown element kind {self.kind!r}.")
        if self.convention not in CONVENTIONS:
            raise WiringError(f"Unknown convention {self.convention!r}. Known: {sorted(CONVENTIONS)}.")
        if self.pol_filter is not None and self.pol_filter not in POLARIZATIONS:
            raise WiringError(f"Polarization filter must be one of {POLARIZATIONS}, got {self.pol_filter!r}.")

    @property
    def ports(self) -> Tuple[str, ...]:
        """Every path this element touches, without repetition."""
        return tuple(dict.fromkeys(self.inputs + self.outputs))

    @property
    def is_event(self) -> bool:
        return self.kind in EVENT_KINDS

    # -- single-label action ---------------------------------------------

    def transform(self, label: BasisLabel, registry: Registry, symbolic: bool) -> List[Tuple[BasisLabel, Any]]:
        """Image of one basis label as ``[(label, coefficient), ...]``."""
        if self.is_event or label.path not in self.ports:
            return [(label, 1)]
        convention = CONVENTIONS[self.convention]

        if self.kind in (PBS, POL_FILTER_PBS):
            if label.path in self.inputs:
                side, ends = self.inputs.index(label.path), self.outputs
            else:
                side, ends = self.outputs.index(label.path), self.inputs
            if label.pol == "H":
                return [(label.with_path(ends[side]), convention.pbs_transmit)]
            return [(label.with_path(ends[1 - side]), convention.pbs_reflect)]

        if self.kind == HWP:
            half = sp.sqrt(2) / 2 if symbolic else math.sqrt(0.5)
            if label.pol == "H":
                return [(label.with_pol("H"), half), (label.with_pol("V"), half)]
            sigma = convention.hwp_sigma
            return [(label.with_pol("H"), sigma * half), (label.with_pol("V"), -sigma * half)]

        if self.kind == MIRROR_COUPLED and self.coupling is not None:
            index = registry.mirror_index(self.mirror_id)
            if symbolic:
                eta, kick = 1, EPS
            elif self.coupling.mode == "exact":
                eta, kick = self.coupling.eta, self.coupling.eta * self.coupling.epsilon
            else:
                eta, kick = 1.0, self.coupling.epsilon
            if label.env[index] == CHI:
                return [(label, eta), (label.with_level(index, CHI_PERP), kick)]
            return [(label, eta), (label.with_level(index, CHI), -kick)]

        return [(label, 1)]

    def adjoint_transform(self, label: BasisLabel, registry: Registry, symbolic: bool) -> List[Tuple[BasisLabel, Any]]:
        """Image of one basis label under the adjoint map."""
        if self.is_event or label.path not in self.ports:
            return [(label, 1)]
        levels_index = None
        if self.kind == MIRROR_COUPLED and self.coupling is not None:
            levels_index = registry.mirror_index(self.mirror_id)
        candidates = []
        for path in self.ports:
            for pol in POLARIZATIONS:
                candidate = BasisLabel(path, pol, label.env)
                if levels_index is None:
                    candidates.append(candidate)
                else:
                    candidates.extend(candidate.with_level(levels_index, level) for level in LEVELS)
        result = []
        for candidate in candidates:
            for image, coefficient in self.transform(candidate, registry, symbolic):
                if image == label:
                    conj = coefficient if symbolic else complex(coefficient).conjugate()
                    result.append((candidate, conj))
        return result

    # -- state action ------------------------------------------------------

    def apply(self, state: StateVector) -> StateVector:
        if self.is_event:
            return state
        return state.mapped(lambda label: self.transform(label, state.registry, state.symbolic))

    def apply_adjoint(self, state: StateVector) -> StateVector:
        if self.is_event:
            return state
        return state.mapped(lambda label: self.adjoint_transform(label, state.registry, state.symbolic))

    def click_predicate(self) -> LabelPredicate:
        """Labels absorbed by this event when it clicks."""
        if not self.is_event:
            raise WiringError(f"{self.kind} is not a detection event.")
        pols = frozenset({self.pol_filter}) if self.pol_filter else None
        return LabelPredicate(frozenset(self.inputs), pols)

    # -- derived elements --------------------------------------------------

    def decoupled(self) -> "Element":
        if self.kind == MIRROR_COUPLED:
            return replace(self, kind=MIRROR_IDEAL, coupling=None)
        return self

    def with_coupling(self, coupling: MirrorCoupling) -> "Element":
        if self.kind == MIRROR_COUPLED:
            return replace(self, coupling=coupling)
        return self

    def relabeled(self, mapping: Mapping[str, str]) -> "Element":
        return replace(
            self,
            inputs=tuple(mapping.get(p, p) for p in self.inputs),
            outputs=tuple(mapping.get(p, p) for p in self.outputs),
        )

    def describe(self) -> str:
        if self.kind in (PBS, POL_FILTER_PBS):
            return f"{self.kind}({','.join(self.inputs)}->{','.join(self.outputs)})"
        if self.kind in (MIRROR_COUPLED, MIRROR_IDEAL):
            return f"{self.kind}({self.inputs[0]},{self.mirror_id})"
        if self.is_event:
            return f"{self.kind}({self.inputs[0]},{self.name})"
        return f"{self.kind}({self.inputs[0]})"


def _check_registry_ports(registry: Optional[Registry], ports: Iterable[str]) -> None:
    if registry is None:
        return
    for port in ports:
        if port not in registry.ports:
            raise WiringError(f"Undeclared port {port!r}; declared ports are {registry.ports}.")


def pbs(
    inputs     : Sequence[str],
    outputs    : Sequence[str],
    convention : str = DEFAULT_CONVENTION,
    registry   : Optional[Registry] = None,
) -> Element:
    """Polarizing beam splitter.

    Args:
    -----

        :inputs (Sequence[str]): The two input paths ``(in1, in2)``.

        :outputs (Sequence[str]): The two output paths. H entering ``in_i`` leaves by ``out_i``; V leaves by the other one.

        :convention (str): Optional argument. Defaults to `'real-v1'`. Calibration table entry.

        :registry (Registry): Optional argument. When given, the ports are checked against it.

    Returns:
    --------

        :Element: A ``PBS`` element.

    Raises:
    -------

        :WiringError: Not exactly two inputs and two outputs, or the four ports are not distinct.
    """
    return _splitter(PBS, inputs, outputs, convention, registry)


def pol_filter_pbs(
    inputs     : Sequence[str],
    outputs    : Sequence[str],
    convention : str = DEFAULT_CONVENTION,
    registry   : Optional[Registry] = None,
) -> Element:
    """PBS used as a polarization filter: H continues to ``outputs[0]``, V is split off to ``outputs[1]``."""
    return _splitter(POL_FILTER_PBS, inputs, outputs, convention, registry)


def _splitter(kind: str, inputs: Sequence[str], outputs: Sequence[str], convention: str, registry: Optional[Registry]) -> Element:
    inputs, outputs = tuple(inputs), tuple(outputs)
    if len(inputs) != 2 or len(outputs) != 2:
        raise WiringError(f"[{kind}] needs two inputs and two outputs, got {inputs} -> {outputs}.")
    if len(set(inputs + outputs)) != 4:
        raise WiringError(f"[{kind}] port collision in {inputs} -> {outputs}.")
    _check_registry_ports(registry, inputs + outputs)
    return Element(kind, inputs, outputs, convention=convention)


def hwp(path: str, convention: str = DEFAULT_CONVENTION, registry: Optional[Registry] = None) -> Element:
    """Half-wave plate rotating polarization by 45 degrees on one path."""
    _check_registry_ports(registry, [path])
    return Element(HWP, (path,), (path,), convention=convention)


def mirror(
    path      : str,
    mirror_id : str,
    coupling  : Optional[MirrorCoupling] = None,
    registry  : Optional[Registry] = None,
) -> Element:
    """Mirror on ``path``; with a coupling it kicks mirror ``mirror_id``.

    Raises:
    -------

        :RegistryError: A coupling is given and ``mirror_id`` is not registered in ``registry``.

        :WiringError: ``path`` is not declared in ``registry``.
    """
    _check_registry_ports(registry, [path])
    if coupling is None:
        return Element(MIRROR_IDEAL, (path,), (path,), mirror_id=mirror_id)
    if registry is not None:
        registry.mirror_index(mirror_id)
    return Element(MIRROR_COUPLED, (path,), (path,), mirror_id=mirror_id, coupling=coupling)


def shutter(path: str, name: str = "shutter", registry: Optional[Registry] = None) -> Element:
    """Blocker: everything on ``path`` is absorbed (outcome ``name``)."""
    _check_registry_ports(registry, [path])
    return Element(SHUTTER, (path,), name=name)


def detector(
    path       : str,
    name       : str,
    pol_filter : Optional[str] = None,
    registry   : Optional[Registry] = None,
) -> Element:
    """Detector on ``path``; with ``pol_filter`` it only absorbs that polarization."""
    _check_registry_ports(registry, [path])
    if not name:
        raise WiringError("[detector] outcome name must not be empty.")
    return Element(DETECTOR, (path,), name=name, pol_filter=pol_filter)


def element_matrix(
    element  : Element,
    registry : Registry,
    symbolic : bool = False,
    epsilon  : float = 0.0,
) -> np.ndarray:
    """Dense matrix of ``element`` on the labels of its own ports.

    Rows and columns run over ``ports x {H, V} x mirror levels`` in canonical
    order; detectors and shutters give the identity.
    """
    basis = [label for label in registry.basis() if label.path in element.ports]
    columns = []
    for label in basis:
        image = element.apply(StateVector(registry, {label: 1}, symbolic))
        columns.append(image.dense(basis, epsilon))
    return np.array(columns, dtype=complex).T
