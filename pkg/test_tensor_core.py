"""
Tests for the dense tensor core
"""
import itertools

import numpy as np
import pytest

from conftest import random_matrix
from src.errors import ArgumentError, SingularMatrixError, SizeError
from src.reps import pauli
from src.tensor_core import (
    SWAP, commutator, eigenvalues, embed, embed_pair, identity, inverse, is_hermitian, kron,
    matmul, partial_trace_first, residual, swap_legs, trace_out_last,
)


def basis(bits):
    vec = np.zeros(2 ** len(bits), dtype=complex)
    vec[int(bits, 2)] = 1.0
    return vec


class TestKron:
    def test_identity(self):
        np.testing.assert_array_equal(kron(identity(2), identity(2)), identity(4))

    def test_zz_diagonal(self):
        np.testing.assert_array_equal(kron(pauli('Z'), pauli('Z')), np.diag([1, -1, -1, 1]))

    def test_xx_flips_both_legs(self):
        np.testing.assert_array_equal(kron(pauli('X'), pauli('X')) @ basis('00'), basis('11'))

    def test_associative(self, rng):
        a, b, c = (random_matrix(rng, 2) for _ in range(3))
        np.testing.assert_array_equal(kron(kron(a, b), c), kron(a, kron(b, c)))

    def test_size_cap(self):
        with pytest.raises(SizeError):
            kron(identity(8), identity(8), max_dim=32)


class TestEmbed:
    def test_adjacent_swap_is_itself(self):
        np.testing.assert_array_equal(embed_pair(SWAP, 1, 2, 2), SWAP)

    def test_outer_swap(self):
        np.testing.assert_array_equal(embed_pair(SWAP, 1, 3, 3) @ basis('100'), basis('001'))

    def test_reversed_legs_by_permutation_oracle(self, rng):
        m = random_matrix(rng, 4)
        reversed_op = embed_pair(m, 2, 1, 2)
        # brute force: <ab| M21 |cd> = <ba| M |dc>
        for (a, b), (c, d) in itertools.product(itertools.product((0, 1), repeat=2), repeat=2):
            assert reversed_op[2 * a + b, 2 * c + d] == m[2 * b + a, 2 * d + c]
        assert residual(reversed_op, SWAP @ embed_pair(m, 1, 2, 2) @ SWAP) == 0

    @pytest.mark.parametrize("i,j,n", [(1, 3, 3), (2, 4, 4), (4, 1, 5)])
    def test_leg_order_law(self, rng, i, j, n):
        m = random_matrix(rng, 4)
        s = swap_legs(i, j, n)
        assert residual(embed_pair(m, j, i, n), s @ embed_pair(m, i, j, n) @ s) <= 1e-14

    def test_general_embed_matches_kron(self, rng):
        a, b = random_matrix(rng, 2), random_matrix(rng, 2)
        expected = np.kron(np.kron(a, identity(2)), b)
        assert residual(embed(np.kron(a, b), [1, 3], 3), expected) == 0

    @pytest.mark.parametrize("legs", [(1, 1), (0, 2), (2, 4)])
    def test_bad_legs(self, legs):
        with pytest.raises(ArgumentError):
            embed_pair(SWAP, legs[0], legs[1], 3)


class TestProducts:
    def test_identity_product(self, rng):
        m = random_matrix(rng, 4)
        np.testing.assert_array_equal(matmul(identity(4), m), m)

    def test_swap_squares_to_identity(self):
        np.testing.assert_array_equal(matmul(SWAP, SWAP), identity(4))

    def test_pauli_algebra(self):
        np.testing.assert_allclose(matmul(pauli('X'), pauli('Y')), 1j * pauli('Z'))

    def test_dimension_mismatch(self):
        with pytest.raises(ArgumentError):
            matmul(identity(2), identity(4))

    def test_commutator_of_paulis(self):
        np.testing.assert_allclose(commutator(pauli('X'), pauli('Y')), 2j * pauli('Z'))


class TestInverse:
    def test_scaled_identity(self):
        np.testing.assert_allclose(inverse(2 * identity(4)), 0.5 * identity(4))

    def test_rational_r(self):
        u, c = 2.0, 1.0
        r = u * identity(4) + c * SWAP
        expected = (u * identity(4) - c * SWAP) / (u ** 2 - c ** 2)
        assert residual(inverse(r), expected) <= 1e-14
        assert residual(r @ inverse(r), identity(4)) <= 1e-14

    def test_zero_is_singular(self):
        with pytest.raises(SingularMatrixError):
            inverse(np.zeros((4, 4)))

    def test_rank_deficient_is_singular(self):
        with pytest.raises(SingularMatrixError) as exc:
            inverse(np.diag([1.0, 1.0, 0.0, 1.0]))
        assert exc.value.pivot_ratio == 0.0

    def test_round_trip(self, rng):
        for _ in range(10):
            a = random_matrix(rng, 8) + 8 * identity(8)
            assert residual(a @ inverse(a), identity(8)) <= 1e-11


class TestPartialTrace:
    def test_product_state(self, rng):
        a, b = random_matrix(rng, 2), random_matrix(rng, 4)
        assert residual(partial_trace_first(np.kron(a, b), 2), np.trace(a) * b) <= 1e-13

    def test_swap_traces_to_identity(self):
        np.testing.assert_array_equal(partial_trace_first(SWAP, 2), identity(2))
        np.testing.assert_array_equal(trace_out_last(SWAP, 2), identity(2))

    def test_identity(self):
        np.testing.assert_array_equal(partial_trace_first(identity(8), 2), 2 * identity(4))

    def test_trace_out_last_product(self, rng):
        a, b = random_matrix(rng, 4), random_matrix(rng, 2)
        assert residual(trace_out_last(np.kron(a, b), 2), np.trace(b) * a) <= 1e-13

    def test_not_divisible(self):
        with pytest.raises(ArgumentError):
            partial_trace_first(identity(6), 4)


class TestResidual:
    def test_equal(self, rng):
        m = random_matrix(rng, 4)
        assert residual(m, m) == 0

    def test_scaled_identity(self):
        assert residual(identity(2), 2 * identity(2)) == pytest.approx(1 / 3)

    def test_pauli_x_vs_y(self):
        # max|X - Y| = |1 + i| = sqrt(2); both norms are 1
        assert residual(pauli('X'), pauli('Y')) == pytest.approx(np.sqrt(2) / 2)

    def test_shape_mismatch(self):
        with pytest.raises(ArgumentError):
            residual(identity(2), identity(4))


class TestEigenvalues:
    def test_pauli_z(self):
        np.testing.assert_allclose(eigenvalues(pauli('Z')), [-1, 1])

    def test_swap(self):
        np.testing.assert_allclose(eigenvalues(SWAP), [-1, 1, 1, 1], atol=1e-14)

    def test_heisenberg_bond(self, heisenberg_bond):
        np.testing.assert_allclose(eigenvalues(heisenberg_bond), [-3, 1, 1, 1], atol=1e-13)

    def test_non_hermitian_sorted(self):
        vals = eigenvalues(np.diag([1 + 1j, -2, 1 - 1j, 0.5j]))
        expected = np.array([-2, 0.5j, 1 - 1j, 1 + 1j])
        np.testing.assert_allclose(vals, expected)

    def test_sum_equals_trace(self, rng):
        m = random_matrix(rng, 8)
        assert abs(np.sum(eigenvalues(m)) - np.trace(m)) <= 1e-10 * (1 + abs(np.trace(m)))

    def test_hermitian_flag(self, heisenberg_bond):
        assert is_hermitian(heisenberg_bond)
        assert not is_hermitian(np.array([[0, 1], [0, 0]]))
