"""
Representations
Pauli matrices, the permutation generator s, single-site projectors,
B-operator families and the braid generator sigma = s + alpha*B
"""
import itertools
import numpy as np
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from src.config import get_config
from src.errors import ArgumentError, ValidationError
from src.tensor_core import (
    DenseOperator, SWAP, as_operator, embed, embed_pair, identity, inverse, residual,
)
from src.utils import format_complex, get_logger, random_complex

logger = get_logger(__name__)

_PAULI = {
    'I': np.array([[1, 0], [0, 1]], dtype=complex),
    'X': np.array([[0, 1], [1, 0]], dtype=complex),
    'Y': np.array([[0, -1j], [1j, 0]], dtype=complex),
    'Z': np.array([[1, 0], [0, -1]], dtype=complex),
}
for _m in _PAULI.values():
    _m.flags.writeable = False

PAULI_LABELS = ('I', 'X', 'Y', 'Z')


def pauli(kind: str) -> DenseOperator:
    """The 2x2 Pauli matrix X, Y, Z or the identity I"""
    key = str(kind).upper()
    if key not in _PAULI:
        raise ArgumentError(f"Unknown Pauli kind '{kind}' (expected one of I, X, Y, Z)")
    return _PAULI[key].copy()


def pauli_string(labels: str, legs: Sequence[int], n_legs: int) -> DenseOperator:
    """Product of single-site Paulis, e.g. pauli_string("XZ", (1, 3), 3) = X1 Z3"""
    if len(labels) != len(legs):
        raise ArgumentError(f"{len(labels)} labels for {len(legs)} legs")
    op = np.ones((1, 1), dtype=complex)
    for label in labels:
        op = np.kron(op, pauli(label))
    return embed(op, legs, n_legs)


def permutation_op() -> DenseOperator:
    """s = (I + XX + YY + ZZ)/2, the swap |ab> -> |ba>"""
    total = sum(np.kron(pauli(k), pauli(k)) for k in PAULI_LABELS)
    return total / 2


def pauli_decomposition(op4: DenseOperator) -> Dict[str, complex]:
    """Coefficients c_ab with op4 = sum c_ab (a ⊗ b), keys like 'XY'"""
    op4 = as_operator(op4, "op4")
    if op4.shape != (4, 4):
        raise ArgumentError(f"Pauli decomposition needs a 4x4 operator, got {op4.shape}")
    coeffs = {}
    for a, b in itertools.product(PAULI_LABELS, repeat=2):
        basis = np.kron(_PAULI[a], _PAULI[b])
        coeffs[a + b] = complex(np.trace(basis.conj().T @ op4) / 4)
    return coeffs


@dataclass(frozen=True)
class ProjectorParams:
    """P = 1/2 + lX + mY + nZ, a projector iff l^2 + m^2 + n^2 = 1/4"""
    l: complex
    m: complex
    n: complex

    def __post_init__(self):
        for name in ('l', 'm', 'n'):
            object.__setattr__(self, name, complex(getattr(self, name)))

    @property
    def constraint_residual(self) -> float:
        return abs(self.l ** 2 + self.m ** 2 + self.n ** 2 - 0.25)

    def validate(self, tol: Optional[float] = None):
        if tol is None:
            tol = get_config().tolerance('projector')
        if self.constraint_residual > tol:
            raise ArgumentError(
                f"Projector constraint l^2+m^2+n^2 = 1/4 violated: residual {self.constraint_residual:.3e}"
            )
        return self

    @classmethod
    def random(cls, rng: np.random.Generator, radius: float = 1.0) -> "ProjectorParams":
        """Random complex (l, m) and n fixed by the constraint"""
        l, m = random_complex(rng, 2, radius)
        n = np.sqrt(complex(0.25 - l ** 2 - m ** 2))
        return cls(l, m, n)

    @classmethod
    def random_real(cls, rng: np.random.Generator) -> "ProjectorParams":
        """Real unit direction scaled to 1/2 (Hermitian projector)"""
        v = rng.normal(size=3)
        v = 0.5 * v / np.linalg.norm(v)
        return cls(*v)


def build_projector(p: ProjectorParams, tol: Optional[float] = None) -> DenseOperator:
    """Rank-1 idempotent P = 1/2 I + lX + mY + nZ"""
    p.validate(tol)
    return 0.5 * pauli('I') + p.l * pauli('X') + p.m * pauli('Y') + p.n * pauli('Z')


@dataclass(frozen=True, eq=False)
class BChoice:
    """
    A B-operator recipe: product projector P⊗P, (I + ZZ)/2 or a custom 4x4 matrix

    Custom matrices with validate=False skip the axiom check (negative controls).
    """
    kind: str
    projector: Optional[ProjectorParams] = None
    matrix: Optional[np.ndarray] = None
    validate: bool = True

    KINDS = ('product', 'zz_half', 'custom')

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ArgumentError(f"Unknown B choice '{self.kind}' (expected one of {self.KINDS})")
        if self.kind == 'product' and self.projector is None:
            raise ArgumentError("Product B choice needs projector parameters")
        if self.kind == 'custom':
            if self.matrix is None:
                raise ArgumentError("Custom B choice needs a 4x4 matrix")
            m = as_operator(self.matrix, "custom B").copy()
            if m.shape != (4, 4):
                raise ArgumentError(f"Custom B must be 4x4, got {m.shape}")
            m.flags.writeable = False
            object.__setattr__(self, 'matrix', m)

    @classmethod
    def zz_half(cls) -> "BChoice":
        return cls('zz_half')

    @classmethod
    def product(cls, l: complex, m: complex, n: complex) -> "BChoice":
        return cls('product', projector=ProjectorParams(l, m, n))

    @classmethod
    def custom(cls, matrix: DenseOperator, validate: bool = True) -> "BChoice":
        return cls('custom', matrix=np.asarray(matrix, dtype=complex), validate=validate)

    @property
    def label(self) -> str:
        if self.kind == 'zz_half':
            return 'zz-half'
        if self.kind == 'product':
            p = self.projector
            return "product:" + ",".join(format_complex(x) for x in (p.l, p.m, p.n))
        return 'custom'

    def conjugated(self, q: DenseOperator) -> "BChoice":
        """Gauge transform (Q⊗Q) B (Q⊗Q)^-1 as a custom choice"""
        qq = np.kron(as_operator(q, "Q"), as_operator(q, "Q"))
        return BChoice.custom(qq @ build_B(self) @ inverse(qq), validate=self.validate)


@dataclass
class BValidation:
    """Residuals of the B axioms and their pass flags"""
    idempotence: float
    neighbor_commutation: float
    swap_invariance: float
    right_swap_invariance: float
    tolerance: float

    @property
    def residuals(self) -> Dict[str, float]:
        return {
            'idempotence': self.idempotence,
            'neighbor_commutation': self.neighbor_commutation,
            'swap_invariance': self.swap_invariance,
            'right_swap_invariance': self.right_swap_invariance,
        }

    @property
    def flags(self) -> Dict[str, bool]:
        return {name: value <= self.tolerance for name, value in self.residuals.items()}

    @property
    def failed(self) -> List[str]:
        return [name for name, ok in self.flags.items() if not ok]

    @property
    def passed(self) -> bool:
        return not self.failed


def validate_B(b: DenseOperator, n_sites: int = 3, tol: Optional[float] = None) -> BValidation:
    """
    Check B^2 = B, B12 B23 = B23 B12 and s B = B (and B s = B)

    Failures are reported, not raised.
    """
    if n_sites < 3:
        raise ArgumentError(f"validate_B needs n_sites >= 3, got {n_sites}")
    if tol is None:
        tol = get_config().tolerance('validate_b')
    b = as_operator(b, "B")
    if b.shape != (4, 4):
        raise ArgumentError(f"B must be 4x4, got {b.shape}")

    b12 = embed_pair(b, 1, 2, n_sites)
    b23 = embed_pair(b, 2, 3, n_sites)
    return BValidation(
        idempotence=residual(b @ b, b),
        neighbor_commutation=residual(b12 @ b23, b23 @ b12),
        swap_invariance=residual(SWAP @ b, b),
        right_swap_invariance=residual(b @ SWAP, b),
        tolerance=tol,
    )


def build_B(choice: BChoice) -> DenseOperator:
    """The 4x4 B operator of a choice; validated unless the choice opts out"""
    if choice.kind == 'zz_half':
        b = (identity(4) + np.kron(pauli('Z'), pauli('Z'))) / 2
    elif choice.kind == 'product':
        proj = build_projector(choice.projector)
        b = np.kron(proj, proj)
    else:
        b = np.array(choice.matrix, dtype=complex)

    if choice.validate:
        report = validate_B(b)
        if not report.passed:
            raise ValidationError(report.failed, report.residuals)
    return b


@dataclass(frozen=True)
class RepresentationParams:
    """alpha and the B choice of sigma = s + alpha*B"""
    alpha: complex
    b_choice: BChoice = field(default_factory=BChoice.zz_half)

    def __post_init__(self):
        object.__setattr__(self, 'alpha', complex(self.alpha))


def build_sigma(params: RepresentationParams) -> DenseOperator:
    """sigma = s + alpha*B"""
    return SWAP + params.alpha * build_B(params.b_choice)


def sigma_inverse(params: RepresentationParams) -> DenseOperator:
    """sigma^-1 = s - alpha/(1+alpha) * B"""
    if abs(1 + params.alpha) == 0:
        raise ArgumentError("sigma^-1 requires alpha != -1 (factor alpha/(1+alpha))")
    return SWAP - (params.alpha / (1 + params.alpha)) * build_B(params.b_choice)


def sigma_power(params: RepresentationParams, power: int) -> DenseOperator:
    """
    Closed form of sigma^power for power >= 0

    sigma^(2k+1) = s + [(alpha+1)^(2k+1) - 1] B
    sigma^(2k)   = I + [(alpha+1)^(2k) - 1] B
    """
    if power < 0:
        raise ArgumentError(f"sigma_power needs a non-negative exponent, got {power}")
    factor = (params.alpha + 1) ** power - 1
    base = SWAP if power % 2 else identity(4)
    return base + factor * build_B(params.b_choice)


@dataclass(frozen=True, eq=False)
class GeneratorFamily:
    """
    Produces s_i and sigma_i on an N-site chain

    sigma_override replaces the 4x4 braid generator (used for negative controls).
    """
    params: RepresentationParams
    n_sites: int
    sigma_override: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.n_sites < 2:
            raise ArgumentError(f"A generator family needs N >= 2, got {self.n_sites}")
        s = SWAP.copy()
        sigma = (as_operator(self.sigma_override, "sigma override").copy()
                 if self.sigma_override is not None else build_sigma(self.params))
        if sigma.shape != (4, 4):
            raise ArgumentError(f"sigma must be 4x4, got {sigma.shape}")
        for op in (s, sigma):
            op.flags.writeable = False
        object.__setattr__(self, '_local', {'s': s, 'sigma': sigma})

    def local(self, which: str) -> DenseOperator:
        if which not in self._local:
            raise ArgumentError(f"Unknown generator '{which}' (expected 's' or 'sigma')")
        return self._local[which]


def family_generator(fam: GeneratorFamily, which: str, i: int) -> DenseOperator:
    """The generator acting on legs (i, i+1) of the 2^N space"""
    if i < 1 or i > fam.n_sites - 1:
        raise ArgumentError(f"Generator index {i} out of range 1..{fam.n_sites - 1}")
    return embed_pair(fam.local(which), i, i + 1, fam.n_sites)
