"""
Shared pytest fixtures: seeded generators and the common representations
"""
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from src.reps import BChoice, RepresentationParams, pauli
from src.rmatrix import RMatrixSpec
from src.spectral import SpectralPolynomial
from src.tensor_core import SWAP
from src.utils import make_rng


@pytest.fixture
def rng():
    return make_rng(20240611)


@pytest.fixture
def swap():
    return SWAP.copy()


@pytest.fixture
def heisenberg_bond():
    """XX + YY + ZZ on two sites"""
    return sum(np.kron(pauli(k), pauli(k)) for k in 'XYZ')


@pytest.fixture
def zz_params():
    return RepresentationParams(0.6, BChoice.zz_half())


@pytest.fixture
def rational_spec():
    return RMatrixSpec.rational(1.0)


@pytest.fixture
def a2_spec():
    """1 + u s sigma with alpha = 0.3 and B = (1 + ZZ)/2"""
    return RMatrixSpec.a2(RepresentationParams(0.3, BChoice.zz_half()), SpectralPolynomial.linear(1.0))


@pytest.fixture
def xxz_spec():
    return RMatrixSpec.deformed(0.5, BChoice.zz_half())


@pytest.fixture
def xyz_spec():
    return RMatrixSpec.deformed(0.8, BChoice.product(0.3, 0.4, 0.0))


def random_matrix(rng, dim, scale=1.0):
    return scale * (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))
