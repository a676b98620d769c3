"""
Spin Chain Construction
Monodromy and transfer matrices on periodic N-site chains, commuting charges,
local Hamiltonians and the closed-form models
"""
import numpy as np
import pandas as pd
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from src.config import get_config
from src.errors import ArgumentError, PoleError, SingularMatrixError
from src.reps import ProjectorParams, build_B, build_projector, pauli_decomposition, pauli_string
from src.rmatrix import (
    Ansatz, AuxTrace, RMatrixSpec, aux_trace_check, build_R, build_R_derivative,
    r_polynomial, regularity,
)
from src.spectral import SpectralPolynomial, chebyshev_nodes, interpolate
from src.tensor_core import (
    DenseOperator, SWAP, check_dim, embed_pair, eigenvalues, identity, inverse,
    is_hermitian, norm_max, partial_trace_first, residual,
)
from src.utils import get_logger

logger = get_logger(__name__)

POLE_TOL = 1e-14


def _require_sites(n_sites: int, minimum: int = 1):
    if n_sites < minimum:
        raise ArgumentError(f"Need a chain of N >= {minimum} sites, got N = {n_sites}")


def bonds(n_sites: int) -> List[Tuple[int, int]]:
    """Periodic bonds (k+1, k) for k = 1..N, site N+1 being site 1"""
    return [(k % n_sites + 1, k) for k in range(1, n_sites + 1)]


def periodic_sum(op4: DenseOperator, n_sites: int, reverse: bool = True) -> DenseOperator:
    """Sum of a two-site operator over all periodic bonds"""
    _require_sites(n_sites, 2)
    check_dim(2 ** n_sites)
    total = np.zeros((2 ** n_sites, 2 ** n_sites), dtype=complex)
    for k_next, k in bonds(n_sites):
        legs = (k_next, k) if reverse else (k, k_next)
        total += embed_pair(op4, legs[0], legs[1], n_sites)
    return total


def monodromy(spec: RMatrixSpec, u: complex, n_sites: int) -> DenseOperator:
    """
    T(u) = R_0N(u) ... R_01(u) on V0 ⊗ H

    The auxiliary leg sits at position 1 and site k at position k+1.
    """
    _require_sites(n_sites)
    n_legs = n_sites + 1
    check_dim(2 ** n_legs)
    r = build_R(spec, u)
    result = embed_pair(r, 1, n_sites + 1, n_legs)
    for k in range(n_sites - 1, 0, -1):
        result = result @ embed_pair(r, 1, k + 1, n_legs)
    return result


def blocks(spec: RMatrixSpec, u: complex, n_sites: int) -> List[List[DenseOperator]]:
    """Auxiliary-space blocks [[A, B], [C, D]] of the monodromy"""
    dim = 2 ** n_sites
    t = monodromy(spec, u, n_sites).reshape(2, dim, 2, dim)
    return [[t[i, :, j, :] for j in range(2)] for i in range(2)]


def transfer(spec: RMatrixSpec, u: complex, n_sites: int) -> DenseOperator:
    """Transfer matrix: trace of the monodromy over the auxiliary leg"""
    return partial_trace_first(monodromy(spec, u, n_sites), 2)


def transfer_commutator(spec: RMatrixSpec, u: complex, v: complex, n_sites: int) -> float:
    """max|[T(u), T(v)]| normalised by max|T(u)| * max|T(v)|"""
    tu = transfer(spec, u, n_sites)
    tv = transfer(spec, v, n_sites)
    comm = norm_max(tu @ tv - tv @ tu)
    scale = norm_max(tu) * norm_max(tv)
    return comm / scale if scale > 0 else comm


def transfer_degree(spec: RMatrixSpec, n_sites: int) -> int:
    return n_sites * r_polynomial(spec).degree


@dataclass
class ChargeFamily:
    """Expansion coefficients I_k of T(u) around u0 and their commutators"""
    u0: complex
    charges: List[DenseOperator]
    commutators: Dict[Tuple[int, int], float]
    tolerance: float

    @property
    def max_commutator(self) -> float:
        return max(self.commutators.values()) if self.commutators else 0.0

    @property
    def passed(self) -> bool:
        return self.max_commutator <= self.tolerance

    def flags(self) -> Dict[Tuple[int, int], bool]:
        return {pair: value <= self.tolerance for pair, value in self.commutators.items()}


def extract_charges(spec: RMatrixSpec, u0: complex, n_sites: int,
                    extra_nodes: Optional[int] = None, radius: float = 1.0,
                    tol: Optional[float] = None) -> ChargeFamily:
    """
    I_k with T(u) = sum_k (u - u0)^k I_k

    T is sampled at Chebyshev nodes around u0 and fitted in t = u - u0, so the
    fitted coefficients are the charges themselves.
    """
    config = get_config()
    if extra_nodes is None:
        extra_nodes = int(config.get('charges.extra_nodes', 1))
    if tol is None:
        tol = config.tolerance('charges')

    u0 = complex(u0)
    degree = transfer_degree(spec, n_sites)
    nodes = chebyshev_nodes(degree + 1 + extra_nodes, center=u0, radius=radius)
    samples = [(node - u0, transfer(spec, node, n_sites)) for node in nodes]
    poly = interpolate(samples, degree, trim_tol=0.0)
    charges = [np.array(c) for c in poly.coeffs]

    commutators = {}
    for k in range(len(charges)):
        for n in range(k + 1, len(charges)):
            commutators[(k, n)] = residual(charges[k] @ charges[n], charges[n] @ charges[k])
    family = ChargeFamily(u0, charges, commutators, tol)
    logger.debug(f"Extracted {len(charges)} charges at u0 = {u0}; max commutator {family.max_commutator:.2e}")
    return family


def bond_term(spec: RMatrixSpec, u0: complex) -> DenseOperator:
    """R'(u0) R(u0)^-1"""
    return build_R_derivative(spec, u0) @ inverse(build_R(spec, u0))


def local_hamiltonian(spec: RMatrixSpec, u0: complex, n_sites: int) -> DenseOperator:
    """H(u0) = sum_k R'_{k+1,k}(u0) R^-1_{k+1,k}(u0) on a closed chain"""
    return periodic_sum(bond_term(spec, u0), n_sites)


def inverse_sum(spec: RMatrixSpec, u: complex, n_sites: int) -> DenseOperator:
    """sum_k R^-1_{k+1,k}(u)"""
    return periodic_sum(inverse(build_R(spec, u)), n_sites)


def _central_difference(spec: RMatrixSpec, u0: complex, n_sites: int, h: float) -> DenseOperator:
    return (transfer(spec, u0 + h, n_sites) - transfer(spec, u0 - h, n_sites)) / (2 * h)


def hamiltonian_via_derivative(spec: RMatrixSpec, u0: complex, n_sites: int,
                               h: Optional[float] = None, richardson: Optional[bool] = None,
                               reference: Optional[DenseOperator] = None,
                               tol: Optional[float] = None) -> DenseOperator:
    """
    H(u0) = T'(u0) T(u0)^-1 with T' by central differences

    With richardson enabled the derivative is refined from steps h and h/2
    whenever the first estimate misses the reference (or no reference is given).
    """
    config = get_config()
    h = float(config.get('derivative.step', 1e-5) if h is None else h)
    if h <= 0:
        raise ArgumentError(f"Finite-difference step must be positive, got {h}")
    if richardson is None:
        richardson = bool(config.get('derivative.richardson', True))
    if tol is None:
        tol = max(config.tolerance('derivative'), 10 * h * h)

    u0 = complex(u0)
    t_inv = inverse(transfer(spec, u0, n_sites))
    coarse = _central_difference(spec, u0, n_sites, h)
    estimate = coarse @ t_inv
    if richardson and (reference is None or residual(estimate, reference) > tol):
        fine = _central_difference(spec, u0, n_sites, h / 2)
        estimate = ((4 * fine - coarse) / 3) @ t_inv
    return estimate


def xxx_closed_form(c: complex, n_sites: int) -> DenseOperator:
    """(2/(3c)) sum_k (XX + YY + ZZ) on neighbouring sites"""
    c = complex(c)
    if abs(c) <= POLE_TOL:
        raise PoleError('c', c)
    heis = sum(pauli_string(k + k, (1, 2), 2) for k in 'XYZ')
    return (2 / (3 * c)) * periodic_sum(heis, n_sites, reverse=False)


def closed_form_slb(a_fn: SpectralPolynomial, alpha: complex, b: DenseOperator,
                    u: complex, n_sites: int) -> DenseOperator:
    """
    sum_i a'/(1+a) [1 + alpha/(1 + (alpha+1) a) B_{i,i+1}]

    Raises:
    -------
    PoleError naming the vanishing factor
    """
    alpha = complex(alpha)
    a = a_fn.eval(u)
    da = a_fn.derivative().eval(u)
    if abs(1 + a) <= POLE_TOL:
        raise PoleError('1+a(u)', 1 + a)
    inner = 1 + (alpha + 1) * a
    if abs(inner) <= POLE_TOL:
        raise PoleError('1+(alpha+1)a(u)', inner)
    bond = (da / (1 + a)) * (identity(4) + (alpha / inner) * np.asarray(b, dtype=complex))
    return periodic_sum(bond, n_sites, reverse=False)


def deformed_bond(alpha: complex, b: DenseOperator, u: complex) -> DenseOperator:
    """[(1 - alpha^2 u) 1 + alpha(1-u) s + 2 alpha (u-1) B] / (1 - alpha^2 u^2)"""
    alpha, u = complex(alpha), complex(u)
    den = 1 - alpha ** 2 * u ** 2
    if abs(den) <= POLE_TOL:
        raise PoleError('1-alpha^2u^2', den)
    b = np.asarray(b, dtype=complex)
    return ((1 - alpha ** 2 * u) * identity(4) + alpha * (1 - u) * SWAP
            + 2 * alpha * (u - 1) * b) / den


def closed_form_deformed(alpha: complex, b: DenseOperator, u: complex, n_sites: int) -> DenseOperator:
    return periodic_sum(deformed_bond(alpha, b, u), n_sites, reverse=False)


def traceless(op: DenseOperator) -> DenseOperator:
    dim = op.shape[0]
    return op - (np.trace(op) / dim) * identity(dim)


def model2_structure_residual(alpha: complex, u: complex) -> Tuple[float, complex]:
    """
    Traceless part of the (I + ZZ)/2 deformed bond against coef*(XX + YY - ZZ)

    Returns:
    --------
    (residual, coef) with coef = alpha(1-u) / (2(1 - alpha^2 u^2))
    """
    alpha, u = complex(alpha), complex(u)
    zz = pauli_string('ZZ', (1, 2), 2)
    b = (identity(4) + zz) / 2
    coef = alpha * (1 - u) / (2 * (1 - alpha ** 2 * u ** 2))
    xxz = pauli_string('XX', (1, 2), 2) + pauli_string('YY', (1, 2), 2) - zz
    return residual(traceless(deformed_bond(alpha, b, u)), coef * xxz), coef


def projector_pair_expansion(p: ProjectorParams) -> Dict[str, complex]:
    """Pauli coefficients of P⊗P written out term by term"""
    l, m, n = p.l, p.m, p.n
    coeffs = {key: 0j for key in (a + b for a in 'IXYZ' for b in 'IXYZ')}
    coeffs.update({
        'II': 0.25, 'XX': l * l, 'YY': m * m, 'ZZ': n * n,
        'XI': l / 2, 'IX': l / 2, 'YI': m / 2, 'IY': m / 2, 'ZI': n / 2, 'IZ': n / 2,
        'XY': l * m, 'YX': l * m, 'YZ': m * n, 'ZY': m * n, 'ZX': l * n, 'XZ': l * n,
    })
    return coeffs


@dataclass
class Model1Term:
    """Deformed bond operator with B = P⊗P and its Pauli content"""
    bond: DenseOperator
    pauli: Dict[str, complex]
    expansion_residual: float


def model1_term(p: ProjectorParams, alpha: complex, u: complex) -> Model1Term:
    proj = build_projector(p)
    pp = np.kron(proj, proj)
    found = pauli_decomposition(pp)
    expected = projector_pair_expansion(p)
    err = max(abs(found[key] - expected[key]) for key in expected)
    bond = deformed_bond(alpha, pp, u)
    return Model1Term(bond, pauli_decomposition(bond), err)


def cyclic_shift(n_sites: int) -> DenseOperator:
    """Basis permutation |a1 a2 ... aN> -> |aN a1 ... a(N-1)>"""
    _require_sites(n_sites)
    dim = check_dim(2 ** n_sites)
    shift = np.zeros((dim, dim), dtype=complex)
    for idx in range(dim):
        low = idx & 1
        out = (idx >> 1) | (low << (n_sites - 1))
        shift[out, idx] = 1.0
    return shift


@dataclass
class Spectrum:
    eigenvalues: np.ndarray
    hermitian: bool

    def to_frame(self) -> pd.DataFrame:
        vals = np.asarray(self.eigenvalues, dtype=complex)
        return pd.DataFrame({
            'index': np.arange(len(vals)),
            're': vals.real,
            'im': vals.imag,
        })


def spectrum(h: DenseOperator) -> Spectrum:
    """Sorted eigenvalues plus a hermiticity flag"""
    hermitian = is_hermitian(h)
    return Spectrum(eigenvalues(h), hermitian)


def _matches_deformed(spec: RMatrixSpec, tol: float = 1e-14) -> bool:
    if spec.ansatz is not Ansatz.A3:
        return False
    alpha = spec.alpha
    a = np.asarray(spec.a_fn.coeffs + (0j,) * 2)[:2]
    b = np.asarray(spec.b_fn.coeffs + (0j,) * 2)[:2]
    return (spec.a_fn.degree <= 1 and spec.b_fn.degree <= 1
            and np.allclose(a, [0, alpha], rtol=0, atol=tol)
            and np.allclose(b, [0, -2 * alpha], rtol=0, atol=tol))


@dataclass
class HamiltonianBundle:
    """
    The derived Hamiltonian with every comparison made against it

    derived is the local sum of R' R^-1; closed_form is the matching model
    formula (absent when the R-matrix matches none). Both may be non-Hermitian.
    """
    u0: complex
    n_sites: int
    derived: DenseOperator
    hermitian: bool
    aux_trace: AuxTrace
    regular: bool
    closed_form: Optional[DenseOperator] = None
    closed_form_name: Optional[str] = None
    discrepancy: Optional[DenseOperator] = None
    discrepancy_residual: Optional[float] = None
    inverse_sum_residual: Optional[float] = None
    fitted_scalar: Optional[complex] = None
    fitted_residual: Optional[float] = None
    derivative_route: Optional[DenseOperator] = None
    derivative_residual: Optional[float] = None
    derivative_tolerance: Optional[float] = None
    notes: List[str] = field(default_factory=list)

    @property
    def closed_form_present(self) -> bool:
        return self.closed_form is not None

    def summary(self) -> Dict:
        out = {
            'u0': self.u0,
            'n_sites': self.n_sites,
            'hermitian': self.hermitian,
            'closed_form_present': self.closed_form_present,
            'closed_form': self.closed_form_name,
            'discrepancy_residual': self.discrepancy_residual,
            'aux_trace_proportional': self.aux_trace.proportional,
            'regular_point': self.regular,
            'derivative_residual': self.derivative_residual,
        }
        if self.inverse_sum_residual is not None:
            out['discrepancy_equals_inverse_sum'] = self.inverse_sum_residual <= 1e-10
            out['inverse_sum_residual'] = self.inverse_sum_residual
        if self.fitted_scalar is not None:
            out['traceless_fitted_scalar'] = self.fitted_scalar
            out['traceless_fit_residual'] = self.fitted_residual
        if self.notes:
            out['notes'] = list(self.notes)
        return out


def fit_traceless_scalar(target: DenseOperator, basis: DenseOperator) -> Tuple[complex, float]:
    """Least-squares lambda with traceless(target) ~ lambda * traceless(basis)"""
    t, b = traceless(target), traceless(basis)
    denom = np.vdot(b, b)
    if abs(denom) == 0:
        return 0j, residual(t, np.zeros_like(t))
    lam = complex(np.vdot(b, t) / denom)
    return lam, residual(t, lam * b)


def hamiltonian_bundle(spec: RMatrixSpec, u0: complex, n_sites: int,
                       with_derivative: bool = True) -> HamiltonianBundle:
    """Derived Hamiltonian, matching closed form, discrepancy and derivative route"""
    u0 = complex(u0)
    derived = local_hamiltonian(spec, u0, n_sites)
    aux = aux_trace_check(spec, u0)
    regular, _ = regularity(spec, u0)
    bundle = HamiltonianBundle(u0, n_sites, derived, is_hermitian(derived), aux, regular)

    if spec.ansatz is Ansatz.RATIONAL and abs(u0 - spec.c_const / 2) <= 1e-14:
        bundle.closed_form = xxx_closed_form(spec.c_const, n_sites)
        bundle.closed_form_name = 'xxx'
    elif spec.ansatz is Ansatz.A2:
        b = build_B(spec.params.b_choice)
        bundle.closed_form = closed_form_slb(spec.a_fn, spec.alpha, b, u0, n_sites)
        bundle.closed_form_name = 'slb'
    elif _matches_deformed(spec):
        b = build_B(spec.params.b_choice)
        bundle.closed_form = closed_form_deformed(spec.alpha, b, u0, n_sites)
        bundle.closed_form_name = 'deformed'

    if bundle.closed_form is not None:
        bundle.discrepancy = bundle.closed_form - derived
        bundle.discrepancy_residual = residual(bundle.closed_form, derived)
        if bundle.closed_form_name == 'deformed':
            bundle.inverse_sum_residual = residual(bundle.discrepancy, inverse_sum(spec, u0, n_sites))
            bundle.fitted_scalar, bundle.fitted_residual = fit_traceless_scalar(bundle.closed_form, derived)

    if with_derivative:
        config = get_config()
        h = float(config.get('derivative.step', 1e-5))
        bundle.derivative_tolerance = max(config.tolerance('derivative'), 10 * h * h)
        try:
            bundle.derivative_route = hamiltonian_via_derivative(spec, u0, n_sites, h=h, reference=derived)
            bundle.derivative_residual = residual(bundle.derivative_route, derived)
        except SingularMatrixError as e:
            bundle.notes.append(f"derivative route skipped: {e}")
            logger.warning(f"Transfer matrix singular at u0 = {u0}; derivative route skipped")

    if not aux.proportional:
        logger.warning(f"Auxiliary trace not proportional to 1 at u0 = {u0}; Hamiltonian comparisons are measurements")
    return bundle


@dataclass
class Diagnostic:
    """[H, T(v)] residuals for the derived and closed-form Hamiltonians"""
    samples: List[complex]
    derived: List[float]
    closed_form: Optional[List[float]]
    asserted: bool
    tolerance: float

    @property
    def max_derived(self) -> float:
        return max(self.derived) if self.derived else 0.0

    @property
    def max_closed_form(self) -> Optional[float]:
        return max(self.closed_form) if self.closed_form else None

    @property
    def passed(self) -> Optional[bool]:
        """None when the residuals are measurements only"""
        if not self.asserted:
            return None
        return self.max_derived <= self.tolerance


def integrability_diagnostic(spec: RMatrixSpec, u0: complex, n_sites: int,
                             samples: Sequence[complex],
                             bundle: Optional[HamiltonianBundle] = None,
                             tol: Optional[float] = None) -> Diagnostic:
    """Commutators of the Hamiltonians with transfer matrices at sample points"""
    if tol is None:
        tol = get_config().tolerance('transfer')
    if bundle is None:
        bundle = hamiltonian_bundle(spec, u0, n_sites, with_derivative=False)

    derived, closed = [], [] if bundle.closed_form is not None else None
    for v in samples:
        tv = transfer(spec, v, n_sites)
        derived.append(residual(bundle.derived @ tv, tv @ bundle.derived))
        if closed is not None:
            closed.append(residual(bundle.closed_form @ tv, tv @ bundle.closed_form))
    return Diagnostic([complex(v) for v in samples], derived, closed, bundle.aux_trace.proportional, tol)
