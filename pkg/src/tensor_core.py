"""
Dense Tensor Core
Complex linear algebra on tensor-product spaces of qubits

Basis convention: leg 1 is the most significant bit of the composite index,
so an operator on n legs is a (2^n, 2^n) array whose C-order reshape to
(2,)*2n has axis k-1 for output leg k and axis n+k-1 for input leg k.
"""
import warnings
import numpy as np
import scipy.linalg as linalg
from typing import Optional, Sequence

from src.config import get_config
from src.errors import ArgumentError, NumericalError, SingularMatrixError, SizeError
from src.utils import get_logger

logger = get_logger(__name__)

DenseOperator = np.ndarray

SWAP = np.array([[1, 0, 0, 0],
                 [0, 0, 1, 0],
                 [0, 1, 0, 0],
                 [0, 0, 0, 1]], dtype=complex)
SWAP.flags.writeable = False


def _max_dim(max_dim: Optional[int]) -> int:
    return int(max_dim) if max_dim is not None else get_config().max_dim()


def check_dim(dim: int, max_dim: Optional[int] = None) -> int:
    """Raise SizeError when dim exceeds the configured cap"""
    cap = _max_dim(max_dim)
    if dim > cap:
        raise SizeError(dim, cap)
    return dim


def as_operator(a, name: str = "operator") -> DenseOperator:
    """Validate a square, finite, non-empty matrix and return it as complex128"""
    arr = np.asarray(a, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise ArgumentError(f"{name} must be a non-empty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ArgumentError(f"{name} has non-finite entries")
    return arr


def n_legs_of(a: DenseOperator) -> int:
    """Number of qubit legs of an operator (dim must be a power of 2)"""
    dim = a.shape[0]
    n = int(round(np.log2(dim)))
    if 2 ** n != dim:
        raise ArgumentError(f"Dimension {dim} is not a power of 2")
    return n


def identity(dim: int) -> DenseOperator:
    return np.eye(dim, dtype=complex)


def kron(a: DenseOperator, b: DenseOperator, max_dim: Optional[int] = None) -> DenseOperator:
    """Kronecker product; (A⊗B)[i*db+k, j*db+l] = A[i,j]*B[k,l]"""
    a = as_operator(a, "a")
    b = as_operator(b, "b")
    check_dim(a.shape[0] * b.shape[0], max_dim)
    return np.kron(a, b)


def embed(op: DenseOperator, legs: Sequence[int], n_legs: int,
          max_dim: Optional[int] = None) -> DenseOperator:
    """
    Embed a k-leg operator on the given (1-based, distinct) legs of an n-leg space

    The i-th tensor factor of op acts on legs[i]; identity elsewhere.
    """
    op = as_operator(op, "op")
    legs = [int(leg) for leg in legs]
    k = n_legs_of(op)
    if len(legs) != k:
        raise ArgumentError(f"Operator acts on {k} legs but {len(legs)} legs were given")
    if len(set(legs)) != len(legs):
        raise ArgumentError(f"Legs must be distinct, got {legs}")
    if any(leg < 1 or leg > n_legs for leg in legs):
        raise ArgumentError(f"Legs {legs} out of range 1..{n_legs}")
    check_dim(2 ** n_legs, max_dim)

    rest = [leg for leg in range(1, n_legs + 1) if leg not in legs]
    full = np.kron(op, identity(2 ** len(rest))).reshape([2] * (2 * n_legs))

    # axis j of `full` carries leg order[j]
    order = [leg - 1 for leg in legs + rest]
    out_axes = [order.index(p) for p in range(n_legs)]
    perm = out_axes + [n_legs + ax for ax in out_axes]
    return full.transpose(perm).reshape(2 ** n_legs, 2 ** n_legs)


def embed_pair(op4: DenseOperator, leg_a: int, leg_b: int, n_legs: int,
               max_dim: Optional[int] = None) -> DenseOperator:
    """First tensor factor of op4 on leg_a, second on leg_b"""
    op4 = as_operator(op4, "op4")
    if op4.shape != (4, 4):
        raise ArgumentError(f"embed_pair needs a 4x4 operator, got {op4.shape}")
    if leg_a == leg_b:
        raise ArgumentError(f"Legs must differ, got {leg_a} twice")
    return embed(op4, [leg_a, leg_b], n_legs, max_dim)


def swap_legs(leg_a: int, leg_b: int, n_legs: int) -> DenseOperator:
    """The basis permutation exchanging two legs"""
    return embed_pair(SWAP, leg_a, leg_b, n_legs)


def matmul(a: DenseOperator, b: DenseOperator) -> DenseOperator:
    a = as_operator(a, "a")
    b = as_operator(b, "b")
    if a.shape != b.shape:
        raise ArgumentError(f"Dimension mismatch: {a.shape} vs {b.shape}")
    return a @ b


def commutator(a: DenseOperator, b: DenseOperator) -> DenseOperator:
    return matmul(a, b) - matmul(b, a)


def inverse(a: DenseOperator, threshold: Optional[float] = None) -> DenseOperator:
    """
    Inverse by LU factorisation with partial pivoting

    Raises:
    -------
    SingularMatrixError when the smallest pivot is below threshold × max-entry
    """
    a = as_operator(a, "a")
    if threshold is None:
        threshold = get_config().singular_threshold()

    scale = float(np.max(np.abs(a)))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", linalg.LinAlgWarning)
        lu, piv = linalg.lu_factor(a, check_finite=False)
    pivot = float(np.min(np.abs(np.diag(lu))))
    ratio = pivot / scale if scale > 0 else 0.0
    if ratio <= threshold:
        raise SingularMatrixError(ratio, threshold)

    return linalg.lu_solve((lu, piv), identity(a.shape[0]), check_finite=False)


def partial_trace_first(a: DenseOperator, first_dim: int) -> DenseOperator:
    """Trace out the leading tensor factor of dimension first_dim"""
    a = as_operator(a, "a")
    dim = a.shape[0]
    if first_dim < 1 or dim % first_dim != 0:
        raise ArgumentError(f"Dimension {dim} is not divisible by {first_dim}")
    rest = dim // first_dim
    return np.einsum('ijik->jk', a.reshape(first_dim, rest, first_dim, rest))


def trace_out_last(a: DenseOperator, last_dim: int) -> DenseOperator:
    """Trace out the trailing tensor factor of dimension last_dim"""
    a = as_operator(a, "a")
    dim = a.shape[0]
    if last_dim < 1 or dim % last_dim != 0:
        raise ArgumentError(f"Dimension {dim} is not divisible by {last_dim}")
    rest = dim // last_dim
    return np.einsum('ijkj->ik', a.reshape(rest, last_dim, rest, last_dim))


def norm_max(a: DenseOperator) -> float:
    """Max-entry norm"""
    return float(np.max(np.abs(a))) if np.size(a) else 0.0


def residual(a: DenseOperator, b: DenseOperator) -> float:
    """max|a-b| / (1 + max(max|a|, max|b|)); 0 iff equal"""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ArgumentError(f"Dimension mismatch: {a.shape} vs {b.shape}")
    return norm_max(a - b) / (1.0 + max(norm_max(a), norm_max(b)))


def is_hermitian(a: DenseOperator, tol: Optional[float] = None) -> bool:
    if tol is None:
        tol = get_config().tolerance('hermitian')
    a = as_operator(a, "a")
    return residual(a, a.conj().T) <= tol


def eigenvalues(a: DenseOperator, hermitian_tol: Optional[float] = None) -> np.ndarray:
    """
    All eigenvalues sorted by real part, then imaginary part

    Hermitian inputs use the symmetric solver and come back real.
    """
    a = as_operator(a, "a")
    hermitian = is_hermitian(a, hermitian_tol)
    solver = 'eigvalsh' if hermitian else 'eigvals'
    try:
        if hermitian:
            vals = linalg.eigvalsh((a + a.conj().T) / 2, check_finite=False)
        else:
            vals = linalg.eigvals(a, check_finite=False)
    except linalg.LinAlgError as e:
        raise NumericalError(
            f"Eigenvalue solver '{solver}' failed to converge: {e}",
            {'solver': solver, 'dim': a.shape[0], 'message': str(e)},
        ) from e

    if hermitian:
        return np.sort(np.real(vals))
    order = np.lexsort((vals.imag, vals.real))
    return vals[order]
