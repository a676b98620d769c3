"""
Tests for Pauli matrices, projectors, B-operators and the braid generator
"""
import numpy as np
import pytest

from src.errors import ArgumentError, ValidationError
from src.reps import (
    BChoice, GeneratorFamily, ProjectorParams, RepresentationParams, build_B, build_projector,
    build_sigma, family_generator, pauli, pauli_decomposition, pauli_string, permutation_op,
    sigma_inverse, sigma_power, validate_B,
)
from src.tensor_core import SWAP, identity, residual
from src.utils import random_complex


def basis(bits):
    vec = np.zeros(2 ** len(bits), dtype=complex)
    vec[int(bits, 2)] = 1.0
    return vec


ZZ_MINUS = np.diag([0, 1, 1, 0]).astype(complex)


class TestPauli:
    def test_x(self):
        np.testing.assert_array_equal(pauli('X'), [[0, 1], [1, 0]])

    def test_z(self):
        np.testing.assert_array_equal(pauli('z'), np.diag([1, -1]))

    def test_y_squares_to_identity(self):
        np.testing.assert_array_equal(pauli('Y') @ pauli('Y'), identity(2))

    def test_unknown(self):
        with pytest.raises(ArgumentError):
            pauli('W')

    def test_pauli_string(self):
        expected = np.kron(np.kron(pauli('X'), identity(2)), pauli('Z'))
        assert residual(pauli_string("XZ", (1, 3), 3), expected) == 0

    def test_decomposition_round_trip(self, rng):
        op = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        coeffs = pauli_decomposition(op)
        rebuilt = sum(c * np.kron(pauli(k[0]), pauli(k[1])) for k, c in coeffs.items())
        assert residual(rebuilt, op) <= 1e-14


class TestPermutation:
    def test_swaps_basis(self):
        np.testing.assert_allclose(permutation_op() @ basis('01'), basis('10'))

    def test_squares_to_identity(self):
        assert residual(permutation_op() @ permutation_op(), identity(4)) <= 1e-15

    def test_matches_swap_matrix(self):
        assert residual(permutation_op(), SWAP) == 0


class TestProjector:
    def test_z_aligned(self):
        np.testing.assert_allclose(build_projector(ProjectorParams(0, 0, 0.5)), np.diag([1, 0]))

    def test_x_aligned(self):
        p = build_projector(ProjectorParams(0.5, 0, 0))
        np.testing.assert_allclose(p, 0.5 * np.ones((2, 2)))
        assert residual(p @ p, p) <= 1e-15

    def test_constraint_violation(self):
        with pytest.raises(ArgumentError, match="residual"):
            build_projector(ProjectorParams(0, 0, 0))

    def test_random_projectors(self, rng):
        for _ in range(50):
            params = ProjectorParams.random(rng)
            p = build_projector(params)
            assert residual(p @ p, p) <= 1e-12
            assert abs(np.trace(p) - 1) <= 1e-12
            pp = np.kron(p, p)
            assert residual(SWAP @ pp, pp) <= 1e-12

    def test_random_real_is_hermitian(self, rng):
        p = build_projector(ProjectorParams.random_real(rng))
        assert residual(p, p.conj().T) <= 1e-15


class TestBOperator:
    def test_zz_half(self):
        np.testing.assert_array_equal(build_B(BChoice.zz_half()), np.diag([1, 0, 0, 1]))

    def test_product_projector(self):
        np.testing.assert_allclose(build_B(BChoice.product(0, 0, 0.5)), np.diag([1, 0, 0, 0]))

    def test_custom_not_swap_invariant(self):
        with pytest.raises(ValidationError) as exc:
            build_B(BChoice.custom(ZZ_MINUS))
        assert 'swap_invariance' in exc.value.failed

    def test_custom_unvalidated(self):
        np.testing.assert_array_equal(build_B(BChoice.custom(ZZ_MINUS, validate=False)), ZZ_MINUS)

    def test_validate_zz_half(self):
        report = validate_B(build_B(BChoice.zz_half()))
        assert report.passed
        assert report.idempotence == report.neighbor_commutation == report.swap_invariance == 0

    def test_validate_random_products(self, rng):
        for _ in range(10):
            p = ProjectorParams.random(rng)
            assert validate_B(build_B(BChoice('product', projector=p))).passed

    def test_swap_is_not_idempotent(self):
        report = validate_B(SWAP)
        assert 'idempotence' in report.failed
        assert report.idempotence == pytest.approx(residual(identity(4), SWAP))

    def test_needs_three_sites(self):
        with pytest.raises(ArgumentError):
            validate_B(SWAP, n_sites=2)

    def test_gauge_conjugation_keeps_axioms(self):
        q = np.array([[1.0, 0.3], [0.2, 1.0]])
        choice = BChoice.product(0.3, 0.4, 0).conjugated(q)
        assert choice.kind == 'custom'
        assert validate_B(build_B(choice), tol=1e-12).passed


class TestSigma:
    def test_alpha_zero_is_swap(self):
        np.testing.assert_array_equal(build_sigma(RepresentationParams(0, BChoice.zz_half())), SWAP)

    def test_alpha_one_product(self):
        sigma = build_sigma(RepresentationParams(1, BChoice.product(0, 0, 0.5)))
        expected = SWAP.copy()
        expected[0, 0] += 1
        np.testing.assert_allclose(sigma, expected)

    @pytest.mark.parametrize("choice", [BChoice.zz_half(), BChoice.product(0.3, 0.4, 0)])
    def test_inverse_is_two_sided(self, choice):
        params = RepresentationParams(0.7, choice)
        sigma, inv = build_sigma(params), sigma_inverse(params)
        assert residual(sigma @ inv, identity(4)) <= 1e-13
        assert residual(inv @ sigma, identity(4)) <= 1e-13

    def test_inverse_alpha_zero(self):
        np.testing.assert_array_equal(sigma_inverse(RepresentationParams(0, BChoice.zz_half())), SWAP)

    def test_inverse_alpha_one(self):
        inv = sigma_inverse(RepresentationParams(1, BChoice.zz_half()))
        np.testing.assert_allclose(inv, SWAP - 0.5 * np.diag([1, 0, 0, 1]))

    def test_inverse_pole(self):
        with pytest.raises(ArgumentError, match="alpha != -1"):
            sigma_inverse(RepresentationParams(-1, BChoice.zz_half()))


class TestSigmaPower:
    def test_zero_power(self, zz_params):
        np.testing.assert_array_equal(sigma_power(zz_params, 0), identity(4))

    def test_square(self):
        params = RepresentationParams(1, BChoice.zz_half())
        np.testing.assert_allclose(sigma_power(params, 2), np.diag([4, 1, 1, 4]))

    def test_against_iterated_products(self, rng):
        for _ in range(20):
            alpha = complex(random_complex(rng, None, 1.0))
            choice = BChoice.zz_half() if rng.uniform() < 0.5 else BChoice('product', projector=ProjectorParams.random(rng))
            params = RepresentationParams(alpha, choice)
            sigma = build_sigma(params)
            for power in range(7):
                assert residual(sigma_power(params, power), np.linalg.matrix_power(sigma, power)) <= 1e-10

    def test_negative_power(self, zz_params):
        with pytest.raises(ArgumentError):
            sigma_power(zz_params, -1)


class TestGeneratorFamily:
    def test_two_sites(self, zz_params):
        fam = GeneratorFamily(zz_params, 2)
        np.testing.assert_array_equal(family_generator(fam, 's', 1), permutation_op())

    def test_fixed_point(self, zz_params):
        fam = GeneratorFamily(zz_params, 3)
        np.testing.assert_array_equal(family_generator(fam, 's', 2) @ basis('011'), basis('011'))

    def test_swaps_first_pair(self, zz_params):
        fam = GeneratorFamily(zz_params, 3)
        np.testing.assert_array_equal(family_generator(fam, 's', 1) @ basis('011'), basis('101'))

    @pytest.mark.parametrize("i", [0, 3])
    def test_index_range(self, zz_params, i):
        with pytest.raises(ArgumentError):
            family_generator(GeneratorFamily(zz_params, 3), 'sigma', i)

    def test_unknown_generator(self, zz_params):
        with pytest.raises(ArgumentError):
            family_generator(GeneratorFamily(zz_params, 3), 'tau', 1)
