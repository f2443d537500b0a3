"""Tests for labeled states, operators and reduced mirror states."""

import math

import numpy as np
import pytest
import sympy as sp

from weaktrace.firstorder import EPS
from weaktrace.hilbert import (
    CHI,
    CHI_PERP,
    BasisLabel,
    DegenerateStateError,
    Registry,
    RegistryError,
    StateVector,
    basis_state,
    identity,
    inner_product,
    is_density_matrix,
    operator_matrix,
    projector,
    reduced_mirror_state,
    state_from_terms,
)

REGISTRY = Registry(("A", "B", "C"), ("M1", "M2"))


def random_state(rng, registry=REGISTRY) -> StateVector:
    basis = registry.basis()
    values = rng.normal(size=len(basis)) + 1j * rng.normal(size=len(basis))
    values /= np.linalg.norm(values)
    return StateVector(registry, dict(zip(basis, values)))


class TestRegistry:

    def test_rejects_duplicates(self):
        with pytest.raises(RegistryError):
            Registry(("A", "A"))
        with pytest.raises(RegistryError):
            Registry(("A",), ("M", "M"))

    def test_basis_size_and_order(self):
        basis = REGISTRY.basis()
        assert len(basis) == 3 * 2 * 4
        assert basis[0] == BasisLabel("A", "H", (CHI, CHI))
        assert basis[-1] == BasisLabel("C", "V", (CHI_PERP, CHI_PERP))
        assert sorted(basis, key=REGISTRY.sort_key) == basis

    def test_unknown_names(self):
        with pytest.raises(RegistryError):
            REGISTRY.check_port("Z")
        with pytest.raises(RegistryError):
            REGISTRY.mirror_index("M9")


class TestStateVector:

    def test_zero_amplitudes_are_dropped(self):
        state = state_from_terms(REGISTRY, [(1, "A", "H"), (0, "B", "V")])
        assert len(state) == 1
        assert state.paths() == frozenset({"A"})

    def test_label_must_match_registry(self):
        with pytest.raises(RegistryError):
            StateVector(REGISTRY, {BasisLabel("A", "H", (CHI,)): 1})
        with pytest.raises(RegistryError):
            StateVector(REGISTRY, {BasisLabel("A", "D", (CHI, CHI)): 1})
        with pytest.raises(RegistryError):
            StateVector(REGISTRY, {BasisLabel("Q", "H", (CHI, CHI)): 1})

    def test_symbolic_truncation(self):
        label = BasisLabel("A", "H", (CHI, CHI))
        state = StateVector(REGISTRY, {label: 1 + EPS + EPS**2}, symbolic=True)
        assert state.amplitude(label) == 1 + EPS
        assert sp.expand(state.norm_squared() - (1 + 2 * EPS)) == 0

    def test_plus_minus_cancel(self, rng):
        state = random_state(rng)
        assert state.minus(state).is_zero()

    def test_as_numeric_evaluates_epsilon(self):
        state = state_from_terms(REGISTRY, [(1, "A", "H"), (EPS / 2, "B", "V")], symbolic=True)
        numeric = state.as_numeric(0.1)
        assert numeric.amplitude(BasisLabel("B", "V", (CHI, CHI))) == pytest.approx(0.05)


class TestInnerProduct:

    def test_conjugates_the_bra(self):
        bra = state_from_terms(REGISTRY, [(1j, "A", "H")])
        ket = state_from_terms(REGISTRY, [(1, "A", "H")])
        assert inner_product(bra, ket) == -1j

    def test_hermitian_symmetry(self, rng):
        for _ in range(20):
            left, right = random_state(rng), random_state(rng)
            assert inner_product(left, right) == pytest.approx(inner_product(right, left).conjugate())

    def test_matches_dense_vdot(self, rng):
        left, right = random_state(rng), random_state(rng)
        assert inner_product(left, right) == pytest.approx(np.vdot(left.dense(), right.dense()))

    def test_registry_mismatch(self):
        other = Registry(("A", "B", "C"), ("M1",))
        with pytest.raises(RegistryError):
            inner_product(basis_state(REGISTRY, "A", "H"), basis_state(other, "A", "H"))

    def test_symbolic(self):
        ket = state_from_terms(REGISTRY, [(1, "A", "H"), (EPS, "A", "H", (CHI_PERP, CHI))], symbolic=True)
        assert sp.expand(inner_product(ket, ket) - 1) == 0


class TestOperators:

    def test_projector_is_idempotent_and_hermitian(self, rng):
        on_b = projector(paths=["B"], levels={"M2": CHI_PERP})
        matrix = operator_matrix(on_b, REGISTRY)
        np.testing.assert_allclose(matrix @ matrix, matrix)
        np.testing.assert_allclose(matrix, matrix.conj().T)
        state = random_state(rng)
        assert on_b.apply(on_b.apply(state)) == on_b.apply(state)

    def test_identity(self, rng):
        state = random_state(rng)
        assert identity().apply(state) == state

    def test_linear_combination(self):
        state = state_from_terms(REGISTRY, [(1, "A", "H"), (1, "B", "H")])
        combined = 2 * projector(paths=["A"]) + projector(paths=["B"])
        image = combined.apply(state)
        assert image.amplitude(BasisLabel("A", "H", (CHI, CHI))) == 2
        assert image.amplitude(BasisLabel("B", "H", (CHI, CHI))) == 1

    def test_projector_validates(self):
        with pytest.raises(RegistryError):
            projector(paths=["Z"], registry=REGISTRY)
        with pytest.raises(RegistryError):
            projector(paths=["A"]).apply(basis_state(Registry(("B",)), "B", "H"))


class TestReducedMirrorState:

    def test_random_states_give_density_matrices(self, rng):
        for _ in range(50):
            state = random_state(rng)
            for mirror_id in REGISTRY.mirrors:
                assert is_density_matrix(reduced_mirror_state(state, mirror_id), 1e-10)

    def test_entangled_state_is_mixed(self):
        amplitude = 1 / math.sqrt(2)
        state = state_from_terms(
            REGISTRY,
            [(amplitude, "A", "H", (CHI, CHI)), (amplitude, "B", "H", (CHI_PERP, CHI))],
        )
        rho = reduced_mirror_state(state, "M1")
        np.testing.assert_allclose(rho, np.diag([0.5, 0.5]), atol=1e-12)
        np.testing.assert_allclose(reduced_mirror_state(state, "M2"), np.diag([1.0, 0.0]), atol=1e-12)

    def test_product_state_is_pure(self):
        state = state_from_terms(REGISTRY, [(0.6, "A", "H", (CHI, CHI)), (0.8, "A", "H", (CHI_PERP, CHI))])
        rho = reduced_mirror_state(state, "M1")
        np.testing.assert_allclose(rho, [[0.36, 0.48], [0.48, 0.64]], atol=1e-12)

    def test_unnormalized_input_is_normalized(self):
        state = state_from_terms(REGISTRY, [(3, "C", "V")])
        np.testing.assert_allclose(reduced_mirror_state(state, "M1"), np.diag([1.0, 0.0]))

    def test_mixture(self):
        chi = basis_state(REGISTRY, "A", "H", (CHI, CHI))
        perp = basis_state(REGISTRY, "A", "H", (CHI_PERP, CHI))
        rho = reduced_mirror_state([(1.0, chi), (3.0, perp)], "M1")
        np.testing.assert_allclose(rho, np.diag([0.25, 0.75]))

    def test_errors(self):
        with pytest.raises(DegenerateStateError):
            reduced_mirror_state(StateVector(REGISTRY, {}), "M1")
        with pytest.raises(RegistryError):
            reduced_mirror_state(basis_state(REGISTRY, "A", "H"), "M7")
