"""
R-Matrices
The three loop-braid ansätze and the rational R-matrix, with Yang-Baxter,
RTT, ABCD and auxiliary-trace checks
"""
import numpy as np
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Callable, Optional, Tuple

from src.config import get_config
from src.errors import ArgumentError, ValidationError
from src.reps import BChoice, RepresentationParams, build_B, build_sigma
from src.spectral import OperatorPolynomial, SpectralPolynomial
from src.tensor_core import (
    DenseOperator, SWAP, commutator, embed, embed_pair, identity, residual, trace_out_last,
)
from src.utils import get_logger

logger = get_logger(__name__)


class Ansatz(Enum):
    A1 = "a1"              # s + a(u) sigma
    A2 = "a2"              # 1 + a(u) s sigma
    A3 = "a3"              # 1 + a(u) s + b(u) B
    RATIONAL = "rational"  # u 1 + c s


@dataclass(frozen=True, eq=False)
class RMatrixSpec:
    """An R-matrix ansatz with its coefficient functions"""
    ansatz: Ansatz
    params: Optional[RepresentationParams] = None
    a_fn: Optional[SpectralPolynomial] = None
    b_fn: Optional[SpectralPolynomial] = None
    c_const: complex = 1.0

    def __post_init__(self):
        object.__setattr__(self, 'c_const', complex(self.c_const))
        if self.ansatz is Ansatz.RATIONAL:
            return
        if self.params is None:
            raise ArgumentError(f"Ansatz {self.ansatz.value} needs representation parameters")
        if self.a_fn is None:
            raise ArgumentError(f"Ansatz {self.ansatz.value} needs a(u)")
        if self.ansatz is Ansatz.A3 and self.b_fn is None:
            raise ArgumentError("Ansatz a3 needs b(u)")

    @classmethod
    def rational(cls, c: complex = 1.0) -> "RMatrixSpec":
        return cls(Ansatz.RATIONAL, c_const=c)

    @classmethod
    def a1(cls, params: RepresentationParams, a_fn: SpectralPolynomial) -> "RMatrixSpec":
        return cls(Ansatz.A1, params=params, a_fn=a_fn)

    @classmethod
    def a2(cls, params: RepresentationParams, a_fn: SpectralPolynomial) -> "RMatrixSpec":
        return cls(Ansatz.A2, params=params, a_fn=a_fn)

    @classmethod
    def a3(cls, params: RepresentationParams, a_fn: SpectralPolynomial,
           b_fn: SpectralPolynomial) -> "RMatrixSpec":
        return cls(Ansatz.A3, params=params, a_fn=a_fn, b_fn=b_fn)

    @classmethod
    def deformed(cls, alpha: complex, b_choice: BChoice, b_factor: float = -2.0) -> "RMatrixSpec":
        """The XXZ/XYZ deformation: a(u) = alpha*u, b(u) = b_factor*alpha*u"""
        alpha = complex(alpha)
        return cls.a3(
            RepresentationParams(alpha, b_choice),
            SpectralPolynomial.linear(alpha),
            SpectralPolynomial.linear(b_factor * alpha),
        )

    @property
    def alpha(self) -> complex:
        return self.params.alpha if self.params is not None else 0j


def _a2_generator(params: RepresentationParams) -> DenseOperator:
    """s*sigma, checked against 1 + alpha*B"""
    s_sigma = SWAP @ build_sigma(params)
    expected = identity(4) + params.alpha * build_B(params.b_choice)
    err = residual(s_sigma, expected)
    if err > get_config().tolerance('validate_b'):
        if params.b_choice.validate:
            raise ValidationError(['s_sigma_identity'], {'s_sigma_identity': err})
        logger.warning(f"s*sigma differs from 1 + alpha*B by {err:.2e} (unvalidated B)")
    return s_sigma


@lru_cache(maxsize=256)
def r_polynomial(spec: RMatrixSpec) -> OperatorPolynomial:
    """R(u) as an exact operator polynomial in u"""
    if spec.ansatz is Ansatz.RATIONAL:
        return OperatorPolynomial([spec.c_const * SWAP, identity(4)])

    a = spec.a_fn.coeffs
    if spec.ansatz is Ansatz.A1:
        base, gen = SWAP, build_sigma(spec.params)
    elif spec.ansatz is Ansatz.A2:
        base, gen = identity(4), _a2_generator(spec.params)
    else:
        base, gen = identity(4), SWAP

    r = OperatorPolynomial([base]) + OperatorPolynomial([ak * gen for ak in a])
    if spec.ansatz is Ansatz.A3:
        b_op = build_B(spec.params.b_choice)
        r = r + OperatorPolynomial([bk * b_op for bk in spec.b_fn.coeffs])
    return r


def build_R(spec: RMatrixSpec, u: complex) -> DenseOperator:
    """4x4 R(u) per the ansatz formula"""
    return r_polynomial(spec).eval(u)


def build_R_derivative(spec: RMatrixSpec, u: complex) -> DenseOperator:
    """Exact R'(u)"""
    return r_polynomial(spec).derivative().eval(u)


class YbeConvention(Enum):
    """
    braided:    R1(u-v) R2(u) R1(v) = R2(v) R1(u) R2(u-v), Ri on legs (i, i+1)
    standard:   R12(u) R13(u+v) R23(v) = R23(v) R13(u+v) R12(u)
    difference: R12(u-v) R13(u) R23(v) = R23(v) R13(u) R12(u-v)
    """
    BRAIDED = "braided"
    STANDARD = "standard"
    DIFFERENCE = "difference"


# Conventions certified per ansatz; the others are measured
ASSERTED_CONVENTIONS = {
    Ansatz.RATIONAL: (YbeConvention.STANDARD, YbeConvention.DIFFERENCE),
    Ansatz.A1: (YbeConvention.BRAIDED,),
    Ansatz.A2: (YbeConvention.DIFFERENCE,),
    Ansatz.A3: (YbeConvention.BRAIDED,),
}
MEASURED_CONVENTIONS = {
    Ansatz.RATIONAL: (),
    Ansatz.A1: (),
    Ansatz.A2: (),
    Ansatz.A3: (YbeConvention.DIFFERENCE,),
}


def _ybe_sides(r: Callable[[complex], DenseOperator], conv: YbeConvention,
               u: complex, v: complex) -> Tuple[DenseOperator, DenseOperator]:
    if conv is YbeConvention.BRAIDED:
        one = lambda x: embed_pair(r(x), 1, 2, 3)
        two = lambda x: embed_pair(r(x), 2, 3, 3)
        return one(u - v) @ two(u) @ one(v), two(v) @ one(u) @ two(u - v)

    first, middle, last = (u, u + v, v) if conv is YbeConvention.STANDARD else (u - v, u, v)
    r12 = embed_pair(r(first), 1, 2, 3)
    r13 = embed_pair(r(middle), 1, 3, 3)
    r23 = embed_pair(r(last), 2, 3, 3)
    return r12 @ r13 @ r23, r23 @ r13 @ r12


def ybe_residual(spec: RMatrixSpec, conv: YbeConvention, u: complex, v: complex) -> float:
    """Residual of the Yang-Baxter equation on the 8-dimensional three-leg space"""
    lhs, rhs = _ybe_sides(lambda x: build_R(spec, x), conv, complex(u), complex(v))
    return residual(lhs, rhs)


def ybe_residual_free_coeffs(spec: RMatrixSpec, a1: complex, a2: complex, a3: complex) -> float:
    """
    Braided check with the three a-values as independent scalars

    (s + a1 sigma)_1 (s + a2 sigma)_2 (s + a3 sigma)_1
        = (s + a3 sigma)_2 (s + a2 sigma)_1 (s + a1 sigma)_2
    """
    if spec.ansatz is not Ansatz.A1:
        raise ArgumentError(f"Free-coefficient check applies to ansatz a1, got {spec.ansatz.value}")
    sigma = build_sigma(spec.params)

    def r(a, legs):
        return embed_pair(SWAP + complex(a) * sigma, legs[0], legs[1], 3)

    lhs = r(a1, (1, 2)) @ r(a2, (2, 3)) @ r(a3, (1, 2))
    rhs = r(a3, (2, 3)) @ r(a2, (1, 2)) @ r(a1, (2, 3))
    return residual(lhs, rhs)


def rtt_residual(r_spec: RMatrixSpec, t_builder: Callable[[complex], DenseOperator],
                 u: complex, v: complex, n_chain: int) -> float:
    """
    R12(u-v) T1(u) T2(v) = T2(v) T1(u) R12(u-v) on V1 ⊗ V2 ⊗ H

    t_builder(u) returns an operator on V0 ⊗ H with the auxiliary leg first.
    """
    u, v = complex(u), complex(v)
    n_legs = n_chain + 2
    chain_legs = list(range(3, n_legs + 1))
    t1 = embed(t_builder(u), [1] + chain_legs, n_legs)
    t2 = embed(t_builder(v), [2] + chain_legs, n_legs)
    r12 = embed_pair(build_R(r_spec, u - v), 1, 2, n_legs)
    return residual(r12 @ t1 @ t2, t2 @ t1 @ r12)


def abcd_residual(r_spec: RMatrixSpec, n_sites: int, u: complex, v: complex,
                  indices: Tuple[int, int, int, int]) -> float:
    """
    [T^ij(u), T^kl(v)] = c/(u-v) (T^kj(v) T^il(u) - T^kj(u) T^il(v))

    Indices are 1-based auxiliary indices (T^11 = A, T^12 = B, T^21 = C, T^22 = D).
    """
    from src.chain import blocks

    if r_spec.ansatz is not Ansatz.RATIONAL:
        raise ArgumentError("The ABCD relations are checked for the rational R-matrix")
    u, v = complex(u), complex(v)
    if u == v:
        raise ArgumentError("ABCD relations have a pole at u = v")
    if len(indices) != 4 or any(x not in (1, 2) for x in indices):
        raise ArgumentError(f"Auxiliary indices must be four values in {{1, 2}}, got {indices}")

    i, j, k, l = (x - 1 for x in indices)
    tu = blocks(r_spec, u, n_sites)
    tv = blocks(r_spec, v, n_sites)
    lhs = commutator(tu[i][j], tv[k][l])
    rhs = (r_spec.c_const / (u - v)) * (tv[k][j] @ tu[i][l] - tu[k][j] @ tv[i][l])
    return residual(lhs, rhs)


@dataclass
class AuxTrace:
    """Single-leg trace of R(u) and whether it is a multiple of the identity"""
    proportional: bool
    constant: Optional[complex]
    trace: DenseOperator
    residual: float


def aux_trace_check(spec: RMatrixSpec, u: complex, tol: Optional[float] = None) -> AuxTrace:
    """tr_0 R_{k+1,0}(u): trace over the auxiliary (second) factor"""
    if tol is None:
        tol = get_config().tolerance('ybe')
    tr = trace_out_last(build_R(spec, u), 2)
    lam = complex(np.trace(tr) / 2)
    err = residual(tr, lam * identity(2))
    if err <= tol:
        return AuxTrace(True, lam, tr, err)
    logger.debug(f"Auxiliary trace of {spec.ansatz.value} is not proportional to 1 (residual {err:.2e})")
    return AuxTrace(False, None, tr, err)


def regularity(spec: RMatrixSpec, u: complex, tol: Optional[float] = None) -> Tuple[bool, complex]:
    """Whether R(u) = lambda*s with lambda != 0 (a regular point)"""
    if tol is None:
        tol = get_config().tolerance('ybe')
    r = build_R(spec, u)
    lam = complex(np.trace(SWAP @ r) / 4)
    return (abs(lam) > 0 and residual(r, lam * SWAP) <= tol), lam


def a1_a2_identity_residual(params: RepresentationParams, a_fn: SpectralPolynomial,
                            u: complex) -> float:
    """s * R_a1(u) against R_a2(u)"""
    r1 = build_R(RMatrixSpec.a1(params, a_fn), u)
    r2 = build_R(RMatrixSpec.a2(params, a_fn), u)
    return residual(SWAP @ r1, r2)


def sigma_form_coefficients(alpha: complex, a: complex, b: complex) -> Tuple[complex, complex, complex]:
    """
    s + a sigma + b sigma^2 = c0 1 + c1 s + c2 B

    Returns:
    --------
    (c0, c1, c2) = (b, 1 + a, a alpha + b((alpha+1)^2 - 1))
    """
    alpha, a, b = complex(alpha), complex(a), complex(b)
    return b, 1 + a, a * alpha + b * ((alpha + 1) ** 2 - 1)


def sigma_form_residual(params: RepresentationParams, a: complex, b: complex) -> float:
    """Residual of the quadratic sigma form against its 1, s, B rewriting"""
    sigma = build_sigma(params)
    lhs = SWAP + a * sigma + b * (sigma @ sigma)
    c0, c1, c2 = sigma_form_coefficients(params.alpha, a, b)
    rhs = c0 * identity(4) + c1 * SWAP + c2 * build_B(params.b_choice)
    return residual(lhs, rhs)
