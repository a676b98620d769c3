"""
Tests for the R-matrix ansätze and their Yang-Baxter, RTT and ABCD checks
"""
import itertools
from functools import partial

import numpy as np
import pytest

from conftest import random_matrix
from src.chain import monodromy
from src.errors import ArgumentError
from src.reps import BChoice, ProjectorParams, RepresentationParams, build_B, build_sigma
from src.rmatrix import (
    Ansatz, RMatrixSpec, YbeConvention, a1_a2_identity_residual, abcd_residual, aux_trace_check,
    build_R, build_R_derivative, regularity, rtt_residual, sigma_form_coefficients,
    sigma_form_residual, ybe_residual, ybe_residual_free_coeffs,
)
from src.spectral import SpectralPolynomial
from src.tensor_core import SWAP, identity, residual
from src.utils import make_rng, random_complex

ZZ_MINUS = np.diag([0, 1, 1, 0]).astype(complex)


def random_choice(rng):
    if rng.uniform() < 0.3:
        return BChoice.zz_half()
    return BChoice('product', projector=ProjectorParams.random(rng))


class TestBuildR:
    def test_rational_at_zero(self, rational_spec):
        np.testing.assert_array_equal(build_R(rational_spec, 0), SWAP)

    def test_a3_at_zero(self):
        spec = RMatrixSpec.deformed(1.0, BChoice.zz_half())
        np.testing.assert_array_equal(build_R(spec, 0), identity(4))

    def test_a2_entrywise(self):
        spec = RMatrixSpec.a2(RepresentationParams(1, BChoice.zz_half()), SpectralPolynomial.linear(1))
        np.testing.assert_allclose(build_R(spec, 1), np.diag([3, 2, 2, 3]))

    def test_a1_formula(self, zz_params):
        a = SpectralPolynomial((0.2, -1.5))
        spec = RMatrixSpec.a1(zz_params, a)
        u = 0.4 + 0.1j
        assert residual(build_R(spec, u), SWAP + a(u) * build_sigma(zz_params)) <= 1e-15

    def test_derivative(self, xxz_spec):
        np.testing.assert_allclose(build_R_derivative(xxz_spec, 0.7),
                                   0.5 * SWAP - 1.0 * build_B(BChoice.zz_half()))

    def test_missing_b_fn(self, zz_params):
        with pytest.raises(ArgumentError):
            RMatrixSpec(Ansatz.A3, params=zz_params, a_fn=SpectralPolynomial.linear(1))

    def test_a2_rejects_inconsistent_generator(self):
        params = RepresentationParams(0.5, BChoice.custom(ZZ_MINUS, validate=True))
        spec = RMatrixSpec.a2(params, SpectralPolynomial.linear(1))
        with pytest.raises(ArgumentError):
            build_R(spec, 0.3)


class TestYangBaxter:
    def test_rational_standard(self, rational_spec):
        assert ybe_residual(rational_spec, YbeConvention.STANDARD, 0.3, 0.2) <= 1e-13

    def test_rational_random(self, rng):
        for _ in range(100):
            u, v, c = random_complex(rng, 3, 2.0)
            spec = RMatrixSpec.rational(c)
            assert ybe_residual(spec, YbeConvention.STANDARD, u, v) <= 1e-12
            assert ybe_residual(spec, YbeConvention.DIFFERENCE, u, v) <= 1e-12

    def test_a1_braided(self, rng):
        spec = RMatrixSpec.a1(RepresentationParams(0.8, BChoice.product(0, 0, 0.5)),
                              SpectralPolynomial.linear(2.0))
        for u, v in random_complex(rng, (5, 2)):
            assert ybe_residual(spec, YbeConvention.BRAIDED, u, v) <= 1e-12

    def test_free_coefficients_zero(self, zz_params):
        spec = RMatrixSpec.a1(zz_params, SpectralPolynomial.linear(1))
        assert ybe_residual_free_coeffs(spec, 0, 0, 0) == 0

    @pytest.mark.parametrize("projector_seed", [None, 1, 2, 3, 4, 5])
    def test_free_coefficients_random(self, rng, projector_seed):
        choice = BChoice.zz_half()
        if projector_seed is not None:
            choice = BChoice('product', projector=ProjectorParams.random(make_rng(projector_seed)))
        params = RepresentationParams(complex(random_complex(rng, None, 2.0)), choice)
        spec = RMatrixSpec.a1(params, SpectralPolynomial.linear(1))
        for triple in random_complex(rng, (50, 3), 1.0):
            assert ybe_residual_free_coeffs(spec, *triple) <= 1e-11

    def test_free_coefficients_negative_control(self, rng):
        params = RepresentationParams(0.5, BChoice.custom(ZZ_MINUS, validate=False))
        spec = RMatrixSpec.a1(params, SpectralPolynomial.linear(1))
        assert ybe_residual_free_coeffs(spec, 1, 0, 1) > 1e-3

    def test_free_coefficients_wrong_ansatz(self, rational_spec):
        with pytest.raises(ArgumentError):
            ybe_residual_free_coeffs(rational_spec, 1, 2, 3)

    def test_a2_difference_form(self, a2_spec, rng):
        for u, v in random_complex(rng, (5, 2)):
            assert ybe_residual(a2_spec, YbeConvention.DIFFERENCE, u, v) <= 1e-12

    @pytest.mark.parametrize("choice", [BChoice.zz_half(), BChoice.product(0.3, 0.4, 0)])
    def test_a3_braided(self, rng, choice):
        for _ in range(50):
            alpha = complex(random_complex(rng, None, 1.0))
            u, v = random_complex(rng, 2)
            spec = RMatrixSpec.deformed(alpha, choice)
            assert ybe_residual(spec, YbeConvention.BRAIDED, u, v) <= 1e-10

    def test_a3_wrong_b_negative_control(self):
        spec = RMatrixSpec.deformed(1.0, BChoice.zz_half(), b_factor=-1.0)
        assert ybe_residual(spec, YbeConvention.BRAIDED, 0.3, 0.1) > 1e-3

    def test_gauge_covariance(self, rng):
        q = np.array([[1.0, 0.3], [0.2, 1.0]])
        base = BChoice.product(0.3, 0.4, 0)
        a = SpectralPolynomial.linear(1.5)
        for u, v in random_complex(rng, (5, 2)):
            before = ybe_residual(RMatrixSpec.a1(RepresentationParams(0.6, base), a), YbeConvention.BRAIDED, u, v)
            after = ybe_residual(RMatrixSpec.a1(RepresentationParams(0.6, base.conjugated(q)), a),
                                 YbeConvention.BRAIDED, u, v)
            assert abs(before - after) <= 1e-10


class TestIdentities:
    def test_a1_times_swap_is_a2(self, zz_params, rng):
        a = SpectralPolynomial((0.1, 2.0))
        for u in random_complex(rng, 5):
            assert a1_a2_identity_residual(zz_params, a, u) <= 1e-12

    def test_sigma_form(self, rng):
        for _ in range(10):
            params = RepresentationParams(complex(random_complex(rng, None, 1.0)), random_choice(rng))
            a, b = random_complex(rng, 2)
            assert sigma_form_residual(params, a, b) <= 1e-12

    def test_sigma_form_coefficients_of_deformation(self):
        # a = alpha u, b = 0 leaves s + alpha u sigma = (1 + alpha u) s + alpha^2 u B
        c0, c1, c2 = sigma_form_coefficients(0.5, 0.5 * 0.4, 0)
        assert (c0, c1, c2) == pytest.approx((0, 1.2, 0.1))


class TestRtt:
    def test_single_leg_is_ybe(self, rational_spec):
        t = partial(build_R, rational_spec)
        assert rtt_residual(rational_spec, t, 0.4 + 0.3j, -0.2, 1) <= 1e-13

    def test_chain(self, rational_spec, rng):
        t = partial(monodromy, rational_spec, n_sites=3)
        for u, v in random_complex(rng, (5, 2)):
            assert rtt_residual(rational_spec, t, u, v, 3) <= 1e-11

    def test_random_t_fails(self, rational_spec, rng):
        fixed = random_matrix(rng, 4)
        assert rtt_residual(rational_spec, lambda u: u * fixed + identity(4), 0.7, 0.2, 1) > 1e-3


class TestAbcd:
    def test_aa_commute_relation(self, rational_spec):
        assert abcd_residual(rational_spec, 2, 0.6, -0.3j, (1, 1, 1, 1)) <= 1e-11

    def test_all_index_sets(self, rational_spec):
        worst = max(abcd_residual(rational_spec, 3, 1.1, 0.4, idx)
                    for idx in itertools.product((1, 2), repeat=4))
        assert worst <= 1e-10

    def test_general_c(self, rng):
        spec = RMatrixSpec.rational(0.5 + 0.5j)
        for u, v in random_complex(rng, (5, 2)):
            for idx in itertools.product((1, 2), repeat=4):
                assert abcd_residual(spec, 2, u, v, idx) <= 1e-10

    def test_pole(self, rational_spec):
        with pytest.raises(ArgumentError, match="pole"):
            abcd_residual(rational_spec, 2, 0.5, 0.5, (1, 1, 1, 1))

    def test_rational_only(self, a2_spec):
        with pytest.raises(ArgumentError):
            abcd_residual(a2_spec, 2, 0.5, 0.1, (1, 1, 1, 1))


class TestAuxTrace:
    def test_rational(self, rational_spec):
        aux = aux_trace_check(rational_spec, 0.7)
        assert aux.proportional
        assert aux.constant == pytest.approx(2.4)

    def test_a2_zz_half(self):
        alpha, a = 0.3, SpectralPolynomial.linear(1.0)
        spec = RMatrixSpec.a2(RepresentationParams(alpha, BChoice.zz_half()), a)
        aux = aux_trace_check(spec, 0.2)
        assert aux.proportional
        assert aux.constant == pytest.approx(2 + 2 * 0.2 + 0.2 * alpha)

    def test_a3_product_projector(self):
        spec = RMatrixSpec.deformed(1.0, BChoice.product(0, 0, 0.5))
        aux = aux_trace_check(spec, 1.0)
        assert not aux.proportional
        assert aux.constant is None
        # 2 + alpha u - 2 alpha u P with P = diag(1, 0)
        np.testing.assert_allclose(aux.trace, np.diag([1, 3]))


class TestRegularity:
    def test_rational_at_zero(self, rational_spec):
        regular, lam = regularity(rational_spec, 0)
        assert regular
        assert lam == pytest.approx(1.0)

    def test_rational_at_half(self, rational_spec):
        assert not regularity(rational_spec, 0.5)[0]

    def test_deformed_at_zero(self, xxz_spec):
        assert not regularity(xxz_spec, 0)[0]
