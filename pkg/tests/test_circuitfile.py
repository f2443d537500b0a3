"""Tests for the circuit text format."""

import pytest

from weaktrace.circuitfile import CircuitParseError, Diagnostic, parse, serialize
from weaktrace.config import MODES
from weaktrace.engine import NULL, Circuit, Stage, evolve_forward
from weaktrace.optics import MirrorCoupling, detector, hwp, mirror, pbs, pol_filter_pbs, shutter
from weaktrace.scenarios import build_one_cycle_fig2, builtin_circuits

PORTS = ("p0", "p1", "p2", "p3", "p4", "p5")
MIRRORS = ("M0", "M1")

SMALL = """\
weaktrace-circuit 1
# one outer cycle
name small
ports S vac A B C D I J L
mirror MR epsilon=0.001 mode=exact
source S H
initial t1
stage
hwp S
stage
pbs S vac -> A I
stage
hwp I
stage t2
pbs I vac -> C B
stage t5
mirror C MR coupled
stage
pbs C B -> D L
stage t6
hwp D
stage t7
pbs A D -> S J
stage t8
detector J D_A
"""


def random_circuit(rng, index: int) -> Circuit:
    couplings = {m: MirrorCoupling(float(rng.random()), MODES[int(rng.integers(2))]) for m in MIRRORS}
    outcomes = 0
    stages = []
    for number in range(int(rng.integers(0, 6))):
        free = [str(port) for port in rng.permutation(PORTS)]
        elements = []
        while free and rng.random() < 0.7:
            kind = int(rng.integers(7))
            if kind in (0, 1) and len(free) >= 4:
                ports = [free.pop() for _ in range(4)]
                build = pbs if kind == 0 else pol_filter_pbs
                elements.append(build(ports[:2], ports[2:]))
            elif kind == 2:
                elements.append(hwp(free.pop()))
            elif kind == 3:
                mirror_id = MIRRORS[int(rng.integers(2))]
                coupling = couplings[mirror_id] if rng.random() < 0.5 else MirrorCoupling(float(rng.random()) * 1e-3)
                elements.append(mirror(free.pop(), mirror_id, coupling))
            elif kind == 4:
                elements.append(mirror(free.pop(), "ideal"))
            elif kind == 5:
                outcomes += 1
                pol = (None, "H", "V")[int(rng.integers(3))]
                elements.append(detector(free.pop(), f"D{outcomes}", pol))
            elif kind == 6:
                outcomes += 1
                elements.append(shutter(free.pop(), f"X{outcomes}"))
        timepoint = f"t{number}" if rng.random() < 0.5 else None
        stages.append(Stage(tuple(elements), timepoint))
    source = (PORTS[int(rng.integers(len(PORTS)))], "HV"[int(rng.integers(2))]) if rng.random() < 0.8 else None
    initial = "start" if rng.random() < 0.5 else None
    return Circuit(tuple(stages), PORTS, MIRRORS, f"random-{index}", source, initial)


class TestParse:

    def test_small_circuit(self):
        circuit = parse(SMALL)
        assert circuit.name == "small"
        assert circuit.mirrors == ("MR",)
        assert circuit.source == ("S", "H")
        assert circuit.outcomes() == ["D_A"]
        assert circuit.timepoints() == ["t1", "t2", "t5", "t6", "t7", "t8"]
        assert circuit.coupled_mirrors() == ["MR"]
        (element,) = circuit.stages[4].elements
        assert element.coupling == MirrorCoupling(0.001, "exact")

    def test_header_only(self):
        circuit = parse("weaktrace-circuit 1\nports A B\nsource A H\n")
        assert circuit.stages == ()
        snapshots, _ = evolve_forward(circuit)
        assert snapshots.final == circuit.initial_state()

    def test_bytes_and_bom(self):
        assert parse(("\ufeff" + SMALL).encode("utf-8")) == parse(SMALL)

    def test_element_override_of_coupling(self):
        text = SMALL.replace("mirror C MR coupled", "mirror C MR coupled epsilon=0.5")
        (element,) = parse(text).stages[4].elements
        assert element.coupling == MirrorCoupling(0.5, "exact")


class TestDiagnostics:

    def diagnostics(self, text):
        with pytest.raises(CircuitParseError) as caught:
            parse(text)
        return caught.value.diagnostics

    def test_missing_header(self):
        found = self.diagnostics("ports A\n")
        assert [(d.line, d.column) for d in found] == [(1, 1), (1, 1)]
        assert "missing" in found[-1].message

    def test_wrong_version(self):
        first = self.diagnostics("weaktrace-circuit 2\nports A\n")[0]
        assert (first.line, first.column) == (1, 19)

    def test_every_error_is_reported(self):
        text = "weaktrace-circuit 1\nports A B\nstage\nhwp Z\nlaser A\nhwp A\nhwp A\n"
        found = self.diagnostics(text)
        assert [(d.line, d.column) for d in found] == [(4, 5), (5, 1), (7, 5)]
        assert "undeclared port" in found[0].message
        assert "unknown keyword" in found[1].message
        assert "already used" in found[2].message

    def test_unregistered_coupled_mirror(self):
        text = "weaktrace-circuit 1\nports A\nstage\nmirror A M coupled epsilon=0.1\n"
        (diagnostic,) = self.diagnostics(text)
        assert diagnostic.line == 4 and "not registered" in diagnostic.message

    def test_bad_numbers_and_options(self):
        text = (
            "weaktrace-circuit 1\nports A B C D\nmirror M epsilon=-1\nmirror N epsilon=x\n"
            "stage\ndetector A D0 pol=L\nstage\npbs A B C D\n"
        )
        lines = [d.line for d in self.diagnostics(text)]
        assert lines == [3, 4, 6, 8]

    def test_duplicates(self):
        text = (
            "weaktrace-circuit 1\nports A B\nstage t1\ndetector A D\nstage t1\ndetector B D\n"
        )
        messages = [d.message for d in self.diagnostics(text)]
        assert any("duplicate time point" in m for m in messages)
        assert any("duplicate outcome" in m for m in messages)

    def test_header_after_stage(self):
        text = "weaktrace-circuit 1\nports A\nstage\nname late\n"
        (diagnostic,) = self.diagnostics(text)
        assert diagnostic.line == 4

    def test_invalid_utf8(self):
        (diagnostic,) = self.diagnostics(b"weaktrace-circuit 1\nports A\xff\n")
        assert diagnostic == Diagnostic(2, 8, "invalid UTF-8 byte 0xff")

    def test_only_newlines_end_a_line(self):
        text = "weaktrace-circuit 1\n# a\u2028b\x85c\x0bd\x1ce\nports A B\nstage\nlaser A\n"
        (diagnostic,) = self.diagnostics(text)
        assert (diagnostic.line, diagnostic.column) == (5, 1)
        (crlf,) = self.diagnostics(text.replace("\n", "\r\n"))
        assert crlf == diagnostic

    def test_diagnostic_text(self):
        assert str(Diagnostic(3, 7, "oops")) == "3:7: oops"


class TestRoundTrip:

    def test_builtin_circuits(self):
        for circuit in builtin_circuits().values():
            text = serialize(circuit)
            assert parse(text) == circuit
            assert serialize(parse(text)) == text

    def test_random_circuits(self, rng):
        for index in range(1000):
            circuit = random_circuit(rng, index)
            assert parse(serialize(circuit)) == circuit

    def test_shutter_line_is_written(self):
        circuit, _ = build_one_cycle_fig2(True)
        assert "\nshutter C shutter\n" in serialize(circuit)

    def test_parsed_circuit_evolves_like_the_original(self, fig1):
        copy = parse(serialize(fig1))
        policy = {"D_A1": NULL}
        original, _ = evolve_forward(fig1, fig1.initial_state(symbolic=True), policy)
        parsed, _ = evolve_forward(copy, copy.initial_state(symbolic=True), policy)
        assert parsed["t2"] == original["t2"]
        assert parsed["t8"] == original["t8"]

    def test_unwritable_names(self):
        circuit = Circuit((Stage((hwp("A"),)),), ("A",), name="two words")
        with pytest.raises(ValueError):
            serialize(circuit)


def test_parser_never_fails_unexpectedly(rng):
    """Mutated inputs either parse or raise CircuitParseError with located diagnostics."""
    seed = SMALL.encode("utf-8")
    alphabet = b"abcSHV01 =->#\n\t.'\xff\xc3"
    for _ in range(2000):
        data = bytearray(seed)
        for _ in range(int(rng.integers(1, 8))):
            position = int(rng.integers(len(data) + 1))
            action = int(rng.integers(3))
            if action == 0 and data:
                del data[min(position, len(data) - 1)]
            elif action == 1:
                data.insert(position, alphabet[int(rng.integers(len(alphabet)))])
            elif data:
                data[min(position, len(data) - 1)] = alphabet[int(rng.integers(len(alphabet)))]
        try:
            parse(bytes(data))
        except CircuitParseError as error:
            assert error.diagnostics
            assert all(d.line >= 1 and d.column >= 1 for d in error.diagnostics)
