"""
Spectral Polynomials
Scalar and operator-valued polynomials in the spectral parameter u
"""
import math
import numpy as np
from numpy.polynomial import chebyshev as cheb
from numpy.polynomial import polynomial as P
from dataclasses import dataclass
from typing import List, Sequence, Tuple, Union

from src.config import get_config
from src.errors import ArgumentError, InconsistencyError
from src.tensor_core import DenseOperator, as_operator, norm_max, residual
from src.utils import get_logger

logger = get_logger(__name__)

TRIM_TOL = 1e-10


def _trim(coeffs: np.ndarray, tol: float = 0.0) -> np.ndarray:
    """Drop trailing coefficients whose max-entry norm is <= tol * (1 + scale)"""
    if len(coeffs) == 0:
        return coeffs
    scale = max(norm_max(c) for c in coeffs)
    keep = len(coeffs)
    while keep > 1 and norm_max(coeffs[keep - 1]) <= tol * (1.0 + scale):
        keep -= 1
    return coeffs[:keep]


@dataclass(frozen=True)
class SpectralPolynomial:
    """Complex polynomial; coeffs[k] multiplies u^k"""
    coeffs: Tuple[complex, ...]

    def __post_init__(self):
        arr = np.asarray(self.coeffs, dtype=complex).reshape(-1)
        if arr.size == 0:
            arr = np.zeros(1, dtype=complex)
        if not np.all(np.isfinite(arr)):
            raise ArgumentError("Polynomial coefficients must be finite")
        arr = _trim(arr)
        object.__setattr__(self, 'coeffs', tuple(complex(c) for c in arr))

    @classmethod
    def constant(cls, value: complex) -> "SpectralPolynomial":
        return cls((value,))

    @classmethod
    def linear(cls, slope: complex, intercept: complex = 0.0) -> "SpectralPolynomial":
        return cls((intercept, slope))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def eval(self, u: complex) -> complex:
        return complex(P.polyval(complex(u), np.asarray(self.coeffs)))

    __call__ = eval

    def derivative(self) -> "SpectralPolynomial":
        if self.degree == 0:
            return SpectralPolynomial((0.0,))
        return SpectralPolynomial(tuple(P.polyder(np.asarray(self.coeffs))))


class OperatorPolynomial:
    """
    Matrix polynomial; coeffs[k] is the (dim, dim) operator multiplying u^k

    Instances are treated as immutable.
    """

    def __init__(self, coeffs: Union[np.ndarray, Sequence[DenseOperator]], trim_tol: float = 0.0):
        ops = [as_operator(c, f"coefficient {k}") for k, c in enumerate(coeffs)]
        if not ops:
            raise ArgumentError("OperatorPolynomial needs at least one coefficient")
        dims = {op.shape for op in ops}
        if len(dims) != 1:
            raise ArgumentError(f"Coefficient operators must share one dim, got {sorted(dims)}")
        arr = _trim(np.stack(ops), trim_tol)
        arr.flags.writeable = False
        self._coeffs = arr

    @property
    def coeffs(self) -> np.ndarray:
        return self._coeffs

    @property
    def dim(self) -> int:
        return self._coeffs.shape[1]

    @property
    def degree(self) -> int:
        return self._coeffs.shape[0] - 1

    def eval(self, u: complex) -> DenseOperator:
        # Horner on the leading axis
        result = np.array(self._coeffs[-1], dtype=complex)
        for c in self._coeffs[-2::-1]:
            result = result * complex(u) + c
        return result

    __call__ = eval

    def derivative(self) -> "OperatorPolynomial":
        if self.degree == 0:
            return OperatorPolynomial([np.zeros_like(self._coeffs[0])])
        return OperatorPolynomial(P.polyder(self._coeffs, axis=0))

    def __add__(self, other: "OperatorPolynomial") -> "OperatorPolynomial":
        n = max(self.degree, other.degree) + 1
        out = np.zeros((n, self.dim, self.dim), dtype=complex)
        out[:self.degree + 1] += self._coeffs
        out[:other.degree + 1] += other.coeffs
        return OperatorPolynomial(out)


def evaluate(p: Union[SpectralPolynomial, OperatorPolynomial], u: complex):
    """Horner evaluation of either polynomial kind"""
    return p.eval(u)


def derivative(p: Union[SpectralPolynomial, OperatorPolynomial]):
    """Exact formal derivative; a constant maps to the zero polynomial"""
    return p.derivative()


def shift(p: Union[SpectralPolynomial, OperatorPolynomial], u0: complex):
    """
    Re-expand around u0: returns q with q(t) = p(t + u0)

    shift(shift(p, u0), -u0) recovers p.
    """
    taylor = []
    current = p
    for k in range(p.degree + 1):
        taylor.append(current.eval(u0) / math.factorial(k))
        current = current.derivative()
    if isinstance(p, SpectralPolynomial):
        return SpectralPolynomial(tuple(taylor))
    return OperatorPolynomial(taylor)


def chebyshev_nodes(n: int, center: complex = 0.0, radius: float = 1.0) -> np.ndarray:
    """n Chebyshev points of the first kind scaled to [center - radius, center + radius]"""
    if n < 1:
        raise ArgumentError(f"Need at least one node, got {n}")
    return complex(center) + radius * cheb.chebpts1(n).astype(complex)


def interpolate(samples: List[Tuple[complex, DenseOperator]], degree: int,
                tol: float = None, trim_tol: float = TRIM_TOL) -> OperatorPolynomial:
    """
    Entrywise polynomial fit through pointwise operator samples

    Parameters:
    -----------
    samples : list of (u, operator)
        At least degree+1 samples at pairwise-distinct nodes
    degree : int
        Requested degree; the result may normalize to a lower degree
    tol : float
        Max residual between the fit and any sample

    Raises:
    -------
    ArgumentError on duplicate nodes or too few samples
    InconsistencyError when the fit misses a sample by more than tol
    """
    if tol is None:
        tol = get_config().tolerance('interpolation')
    if degree < 0:
        raise ArgumentError(f"Degree must be >= 0, got {degree}")
    if len(samples) < degree + 1:
        raise ArgumentError(f"Need at least {degree + 1} samples for degree {degree}, got {len(samples)}")

    nodes = np.array([complex(u) for u, _ in samples])
    for i in range(len(nodes)):
        for j in range(i + 1, len(nodes)):
            if abs(nodes[i] - nodes[j]) <= 1e-12 * (1.0 + abs(nodes[i])):
                raise ArgumentError(f"Duplicate interpolation node u = {nodes[i]}")

    ops = [as_operator(op, "sample") for _, op in samples]
    dim = ops[0].shape[0]
    if any(op.shape != (dim, dim) for op in ops):
        raise ArgumentError("Samples must share one dimension")

    vander = P.polyvander(nodes, degree)
    values = np.stack(ops).reshape(len(ops), dim * dim)
    coeffs, *_ = np.linalg.lstsq(vander, values, rcond=None)
    poly = OperatorPolynomial(coeffs.reshape(degree + 1, dim, dim), trim_tol=trim_tol)

    worst = max(residual(poly.eval(u), op) for u, op in zip(nodes, ops))
    if worst > tol:
        raise InconsistencyError(worst, tol)
    logger.debug(f"Interpolated {len(samples)} samples to degree {poly.degree} (residual {worst:.2e})")
    return poly
