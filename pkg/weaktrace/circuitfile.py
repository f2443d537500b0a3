# weaktrace/circuitfile.py
# SPDX-License-Identifier: MIT
# Copyright (c) 2026 The weaktrace developers
from ._version import __version__

# import required packages
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple, Union
import math
import re

# bring in other sibling modules
from .config import MODES
from .engine import Circuit, Stage
from .hilbert import POLARIZATIONS, WeaktraceError
from .optics import (
    DEFAULT_CONVENTION,
    DETECTOR,
    HWP,
    MIRROR_COUPLED,
    MIRROR_IDEAL,
    PBS,
    POL_FILTER_PBS,
    SHUTTER,
    Element,
    MirrorCoupling,
    detector,
    hwp,
    mirror,
    pbs,
    pol_filter_pbs,
    shutter,
)

"""
Line-oriented text format for circuits.

    weaktrace-circuit 1
    name salih-fig1
    ports src vac A B C D I J L S F G
    mirror MR_B1 epsilon=0.001 mode=first-order
    source src H
    initial t1
    stage
    hwp src
    stage t2
    pbs I vac -> C B
    stage t5
    mirror C MR_B1 coupled
    stage t8
    detector J D_A1

Header lines come first; every ``stage`` line opens a stage (optionally
naming the time point after it) and the element lines below it belong to
that stage. ``#`` starts a comment. The full grammar is in the docs.
"""

MAGIC = "weaktrace-circuit"
FORMAT_VERSION = "1"
HEADER_KEYWORDS = ("name", "ports", "mirror", "source", "initial")
ELEMENT_KEYWORDS = ("hwp", "pbs", "filter", "mirror", "detector", "shutter")
IDENTIFIER = re.compile(r"^[A-Za-z0-9_.'+\-]+$")


@dataclass(frozen=True)
class Diagnostic:
    line: int
    column: int
    message: str

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.message}"


class CircuitParseError(WeaktraceError):
    """Raised with every diagnostic found; no circuit is returned."""

    def __init__(self, diagnostics: List[Diagnostic]) -> None:
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


@dataclass(frozen=True)
class _Token:
    text: str
    column: int


class _Reject(Exception):
    def __init__(self, column: int, message: str) -> None:
        super().__init__(message)
        self.column = column
        self.message = message


def _decode(source: Union[str, bytes]) -> str:
    if isinstance(source, str):
        return source
    try:
        return bytes(source).decode("utf-8")
    except UnicodeDecodeError as error:
        before = bytes(source)[: error.start]
        line = before.count(b"\n") + 1
        column = len(before) - (before.rfind(b"\n") + 1) + 1
        raise CircuitParseError([Diagnostic(line, column, f"invalid UTF-8 byte 0x{bytes(source)[error.start]:02x}")])


def _tokens(line: str) -> List[_Token]:
    line = line.split("#", 1)[0]
    return [_Token(match.group(0), match.start() + 1) for match in re.finditer(r"\S+", line)]


def _identifier(token: _Token, what: str) -> str:
    if not IDENTIFIER.match(token.text):
        raise _Reject(token.column, f"invalid {what} {token.text!r}")
    return token.text


def _split_options(tokens: List[_Token], allowed: Tuple[str, ...]) -> Tuple[List[_Token], Dict[str, _Token]]:
    positional: List[_Token] = []
    options: Dict[str, _Token] = {}
    for token in tokens:
        if "=" not in token.text:
            if options:
                raise _Reject(token.column, f"positional argument {token.text!r} after options")
            positional.append(token)
            continue
        key, _, value = token.text.partition("=")
        if key not in allowed:
            raise _Reject(token.column, f"unknown option {key!r}; allowed: {', '.join(allowed) or 'none'}")
        if key in options:
            raise _Reject(token.column, f"option {key!r} given twice")
        options[key] = _Token(value, token.column + len(key) + 1)
    return positional, options


def _arity(keyword: _Token, positional: List[_Token], expected: int, usage: str) -> None:
    if len(positional) != expected:
        column = positional[expected].column if len(positional) > expected else keyword.column
        raise _Reject(column, f"{keyword.text!r} expects {expected} argument(s): {usage}")


def _number(token: _Token) -> float:
    try:
        value = float(token.text)
    except ValueError:
        raise _Reject(token.column, f"not a number: {token.text!r}")
    if not math.isfinite(value) or value < 0:
        raise _Reject(token.column, f"coupling strength must be finite and non-negative, got {token.text!r}")
    return value


def _coupling(options: Dict[str, _Token], fallback: Optional[MirrorCoupling], column: int, mirror_id: str) -> Optional[MirrorCoupling]:
    if "epsilon" not in options and "mode" not in options:
        return fallback
    epsilon = _number(options["epsilon"]) if "epsilon" in options else (fallback.epsilon if fallback else None)
    if epsilon is None:
        raise _Reject(column, f"no coupling strength for mirror {mirror_id!r}")
    mode = options["mode"].text if "mode" in options else (fallback.mode if fallback else "first-order")
    if mode not in MODES:
        raise _Reject(options["mode"].column, f"unknown mode {mode!r}; allowed: {', '.join(MODES)}")
    return MirrorCoupling(epsilon, mode)


class _Parser:
    def __init__(self) -> None:
        self.diagnostics: List[Diagnostic] = []
        self.seen_magic = False
        self.name: Optional[str] = None
        self.ports: Optional[Tuple[str, ...]] = None
        self.mirrors: Dict[str, Optional[MirrorCoupling]] = {}
        self.source: Optional[Tuple[str, str]] = None
        self.initial: Optional[str] = None
        self.stages: List[Tuple[Optional[str], List[Element]]] = []
        self.stage_ports: Dict[str, int] = {}
        self.timepoints: Dict[str, int] = {}
        self.outcomes: Dict[str, int] = {}
        self.header_lines: Dict[str, int] = {}

    def port(self, token: _Token) -> str:
        if self.ports is None:
            raise _Reject(token.column, "ports must be declared before the first stage")
        if token.text not in self.ports:
            raise _Reject(token.column, f"undeclared port {token.text!r}")
        return token.text

    def parse_line(self, number: int, tokens: List[_Token]) -> None:
        keyword, rest = tokens[0], tokens[1:]
        if not self.seen_magic:
            if keyword.text != MAGIC:
                raise _Reject(keyword.column, f"expected '{MAGIC} {FORMAT_VERSION}' header")
            if len(rest) != 1 or rest[0].text != FORMAT_VERSION:
                column = rest[0].column if rest else keyword.column
                raise _Reject(column, f"unsupported format version; expected {FORMAT_VERSION}")
            self.seen_magic = True
            return
        if keyword.text == "stage":
            self.open_stage(number, keyword, rest)
        elif not self.stages and keyword.text in HEADER_KEYWORDS:
            self.header(number, keyword, rest)
        elif self.stages and keyword.text in ELEMENT_KEYWORDS:
            self.element(number, keyword, rest)
        elif keyword.text in HEADER_KEYWORDS:
            raise _Reject(keyword.column, f"header line {keyword.text!r} after the first stage")
        elif keyword.text in ELEMENT_KEYWORDS:
            raise _Reject(keyword.column, f"element {keyword.text!r} outside a stage")
        else:
            raise _Reject(keyword.column, f"unknown keyword {keyword.text!r}")

    def header(self, number: int, keyword: _Token, rest: List[_Token]) -> None:
        if keyword.text != "mirror":
            if keyword.text in self.header_lines:
                raise _Reject(keyword.column, f"{keyword.text!r} already declared on line {self.header_lines[keyword.text]}")
            self.header_lines[keyword.text] = number
        if keyword.text == "name":
            _arity(keyword, rest, 1, "name NAME")
            self.name = _identifier(rest[0], "name")
        elif keyword.text == "ports":
            if not rest:
                raise _Reject(keyword.column, "'ports' needs at least one port")
            ports: List[str] = []
            for token in rest:
                port = _identifier(token, "port")
                if port in ports:
                    raise _Reject(token.column, f"port {port!r} declared twice")
                ports.append(port)
            self.ports = tuple(ports)
        elif keyword.text == "mirror":
            positional, options = _split_options(rest, ("epsilon", "mode"))
            _arity(keyword, positional, 1, "mirror ID [epsilon=E] [mode=M]")
            mirror_id = _identifier(positional[0], "mirror id")
            if mirror_id in self.mirrors:
                raise _Reject(positional[0].column, f"mirror {mirror_id!r} registered twice")
            self.mirrors[mirror_id] = _coupling(options, None, keyword.column, mirror_id)
        elif keyword.text == "source":
            _arity(keyword, rest, 2, "source PORT POL")
            port = self.port(rest[0])
            if rest[1].text not in POLARIZATIONS:
                raise _Reject(rest[1].column, f"polarization must be H or V, got {rest[1].text!r}")
            self.source = (port, rest[1].text)
        elif keyword.text == "initial":
            _arity(keyword, rest, 1, "initial TIMEPOINT")
            self.initial = _identifier(rest[0], "time point")
            self.timepoints[self.initial] = number

    def open_stage(self, number: int, keyword: _Token, rest: List[_Token]) -> None:
        if self.ports is None:
            raise _Reject(keyword.column, "ports must be declared before the first stage")
        if len(rest) > 1:
            raise _Reject(rest[1].column, "'stage' takes at most one time-point label")
        timepoint = None
        if rest:
            timepoint = _identifier(rest[0], "time point")
            if timepoint in self.timepoints:
                raise _Reject(rest[0].column, f"duplicate time point {timepoint!r} (first on line {self.timepoints[timepoint]})")
            self.timepoints[timepoint] = number
        self.stages.append((timepoint, []))
        self.stage_ports = {}

    def claim(self, tokens: List[_Token], number: int) -> List[str]:
        ports = [self.port(token) for token in tokens]
        for token, port in zip(tokens, ports):
            if port in self.stage_ports:
                raise _Reject(token.column, f"port {port!r} already used in this stage (line {self.stage_ports[port]})")
        if len(set(ports)) != len(ports):
            raise _Reject(tokens[0].column, f"port collision in {' '.join(ports)}")
        for port in ports:
            self.stage_ports[port] = number
        return ports

    def outcome(self, token: _Token, number: int) -> str:
        name = _identifier(token, "outcome name")
        if name in self.outcomes:
            raise _Reject(token.column, f"duplicate outcome {name!r} (first on line {self.outcomes[name]})")
        self.outcomes[name] = number
        return name

    def element(self, number: int, keyword: _Token, rest: List[_Token]) -> None:
        kind = keyword.text
        if kind == "hwp":
            positional, options = _split_options(rest, ("convention",))
            _arity(keyword, positional, 1, "hwp PORT [convention=C]")
            convention = options["convention"].text if "convention" in options else DEFAULT_CONVENTION
            (port,) = self.claim(positional, number)
            built = hwp(port, convention)
        elif kind in ("pbs", "filter"):
            positional, options = _split_options(rest, ("convention",))
            if len(positional) != 5 or positional[2].text != "->":
                raise _Reject(keyword.column, f"expected '{kind} IN1 IN2 -> OUT1 OUT2'")
            ports = self.claim(positional[:2] + positional[3:], number)
            convention = options["convention"].text if "convention" in options else DEFAULT_CONVENTION
            build = pbs if kind == "pbs" else pol_filter_pbs
            built = build(ports[:2], ports[2:], convention)
        elif kind == "mirror":
            positional, options = _split_options(rest, ("epsilon", "mode"))
            if len(positional) not in (2, 3) or (len(positional) == 3 and positional[2].text != "coupled"):
                raise _Reject(keyword.column, "expected 'mirror PORT ID [coupled] [epsilon=E] [mode=M]'")
            mirror_id = _identifier(positional[1], "mirror id")
            coupled = len(positional) == 3
            if options and not coupled:
                raise _Reject(keyword.column, "coupling options need 'coupled'")
            (port,) = self.claim(positional[:1], number)
            coupling = None
            if coupled:
                if mirror_id not in self.mirrors:
                    raise _Reject(positional[1].column, f"mirror {mirror_id!r} is not registered")
                coupling = _coupling(options, self.mirrors[mirror_id], keyword.column, mirror_id)
                if coupling is None:
                    raise _Reject(positional[1].column, f"no coupling strength for mirror {mirror_id!r}")
            built = mirror(port, mirror_id, coupling)
        elif kind == "detector":
            positional, options = _split_options(rest, ("pol",))
            _arity(keyword, positional, 2, "detector PORT NAME [pol=H|V]")
            pol = options["pol"].text if "pol" in options else None
            if pol is not None and pol not in POLARIZATIONS:
                raise _Reject(options["pol"].column, f"polarization must be H or V, got {pol!r}")
            (port,) = self.claim(positional[:1], number)
            built = detector(port, self.outcome(positional[1], number), pol)
        else:
            positional, _ = _split_options(rest, ())
            _arity(keyword, positional, 2, "shutter PORT NAME")
            (port,) = self.claim(positional[:1], number)
            built = shutter(port, self.outcome(positional[1], number))
        self.stages[-1][1].append(built)

    def finish(self, last_line: int) -> Circuit:
        if not self.seen_magic:
            self.diagnostics.append(Diagnostic(1, 1, f"missing '{MAGIC} {FORMAT_VERSION}' header"))
        elif self.ports is None:
            self.diagnostics.append(Diagnostic(last_line, 1, "missing 'ports' declaration"))
        if self.diagnostics:
            raise CircuitParseError(self.diagnostics)
        stages = tuple(Stage(tuple(elements), timepoint) for timepoint, elements in self.stages)
        return Circuit(stages, self.ports, tuple(self.mirrors), self.name or "circuit", self.source, self.initial)


def parse(source: Union[str, bytes]) -> Circuit:
    """
    Parse circuit text into a validated :py:class:`Circuit`.

    Parsing goes on after an error so that every problem is reported at once.

    Args:
    -----

        :source (str | bytes): Circuit text; bytes are decoded as UTF-8.

    Returns:
    --------

        :Circuit: The circuit described by the text.

    Raises:
    -------

        :CircuitParseError: Carries one :py:class:`Diagnostic` (line, column, message) per problem.

    Example:
    --------

        .. code-block:: python

            circuit = parse(open("fig1.wtc", encoding="utf-8").read())
    """
    text = _decode(source)
    if text.startswith("\ufeff"):
        text = text[1:]
    parser = _Parser()
    # only "\n" ends a line; other Unicode line separators stay inside it
    lines = text.replace("\r\n", "\n").split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    for number, line in enumerate(lines, start=1):
        tokens = _tokens(line)
        if not tokens:
            continue
        try:
            parser.parse_line(number, tokens)
        except _Reject as reject:
            parser.diagnostics.append(Diagnostic(number, reject.column, reject.message))
        except (WeaktraceError, ValueError) as error:
            parser.diagnostics.append(Diagnostic(number, tokens[0].column, str(error)))
        if not parser.seen_magic:
            break
    try:
        return parser.finish(max(len(lines), 1))
    except CircuitParseError:
        raise
    except (WeaktraceError, ValueError) as error:
        raise CircuitParseError([Diagnostic(max(len(lines), 1), 1, str(error))])


def _format_number(value: float) -> str:
    text = repr(float(value))
    return text if float(text) == value else format(value, ".17g")


def _checked(name: str, what: str) -> str:
    if not IDENTIFIER.match(name):
        raise ValueError(f"[serialize] {what} {name!r} cannot be written; use letters, digits and _ . ' + -")
    return name


def _coupling_options(coupling: MirrorCoupling) -> str:
    return f"epsilon={_format_number(coupling.epsilon)} mode={coupling.mode}"


def _convention(element: Element) -> str:
    return "" if element.convention == DEFAULT_CONVENTION else f" convention={element.convention}"


def serialize(circuit: Circuit) -> str:
    """
    Canonical text of ``circuit``.

    Ports and mirrors keep their declared order and numbers use the shortest
    repr that reads back to the same float, so equal circuits give identical
    text and ``parse(serialize(c)) == c``.

    Raises:
    -------

        :ValueError: A name contains characters the format cannot hold.
    """
    registered: Dict[str, Optional[MirrorCoupling]] = {mirror_id: None for mirror_id in circuit.mirrors}
    for stage in circuit.stages:
        for element in stage.elements:
            if element.kind == MIRROR_COUPLED and registered.get(element.mirror_id) is None:
                registered[element.mirror_id] = element.coupling

    lines = [f"{MAGIC} {FORMAT_VERSION}", f"name {_checked(circuit.name, 'name')}"]
    lines.append("ports " + " ".join(_checked(port, "port") for port in circuit.ports))
    for mirror_id, coupling in registered.items():
        suffix = f" {_coupling_options(coupling)}" if coupling else ""
        lines.append(f"mirror {_checked(mirror_id, 'mirror id')}{suffix}")
    if circuit.source:
        lines.append(f"source {circuit.source[0]} {circuit.source[1]}")
    if circuit.initial:
        lines.append(f"initial {_checked(circuit.initial, 'time point')}")

    for stage in circuit.stages:
        lines.append(f"stage {_checked(stage.timepoint, 'time point')}" if stage.timepoint else "stage")
        for element in stage.elements:
            lines.append(_element_line(element, registered))
    return "\n".join(lines) + "\n"


def _element_line(element: Element, registered: Dict[str, Optional[MirrorCoupling]]) -> str:
    if element.kind in (PBS, POL_FILTER_PBS):
        keyword = "pbs" if element.kind == PBS else "filter"
        return f"{keyword} {' '.join(element.inputs)} -> {' '.join(element.outputs)}{_convention(element)}"
    if element.kind == HWP:
        return f"hwp {element.inputs[0]}{_convention(element)}"
    if element.kind == MIRROR_IDEAL:
        return f"mirror {element.inputs[0]} {_checked(element.mirror_id, 'mirror id')}"
    if element.kind == MIRROR_COUPLED:
        line = f"mirror {element.inputs[0]} {element.mirror_id} coupled"
        if element.coupling != registered.get(element.mirror_id):
            line += f" {_coupling_options(element.coupling)}"
        return line
    if element.kind == DETECTOR:
        pol = f" pol={element.pol_filter}" if element.pol_filter else ""
        return f"detector {element.inputs[0]} {_checked(element.name, 'outcome name')}{pol}"
    if element.kind == SHUTTER:
        return f"shutter {element.inputs[0]} {_checked(element.name, 'outcome name')}"
    raise ValueError(f"[serialize] cannot write element kind {element.kind!r}")
