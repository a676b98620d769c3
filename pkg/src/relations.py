"""
Relation Checker
Verifies the loop braid presentation relations for a generator family
and classifies which group the representation realizes
"""
import pandas as pd
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

from src.config import get_config
from src.errors import ArgumentError
from src.reps import GeneratorFamily, family_generator
from src.tensor_core import DenseOperator, identity, residual
from src.utils import get_logger

logger = get_logger(__name__)


class RelationId(Enum):
    B1 = "B1"
    B2 = "B2"
    S1 = "S1"
    S2 = "S2"
    S3 = "S3"
    M1 = "M1"
    M2 = "M2"
    M3 = "M3"
    M3P = "M3P"
    M4 = "M4"
    M2R = "M2R"

    @property
    def min_sites(self) -> int:
        if self in FAR_RELATIONS:
            return 4
        if self is RelationId.S3:
            return 2
        return 3

    @property
    def is_far(self) -> bool:
        return self in FAR_RELATIONS


FAR_RELATIONS = frozenset({RelationId.B2, RelationId.S2, RelationId.M1})

# The symmetric loop braid presentation; M4 and M2R are extra structure
PRESENTATION = (
    RelationId.B1, RelationId.B2,
    RelationId.S1, RelationId.S2, RelationId.S3,
    RelationId.M1, RelationId.M2, RelationId.M3, RelationId.M3P,
)
EXTRAS = (RelationId.M4, RelationId.M2R)

SLB = "SLB"
OLB = "OLB"
LB = "LB"
VB = "VB"
NOT_MOTION_GROUP = "not-motion-group"
NONE = "none"


def _words(rel: RelationId) -> Tuple[List[Tuple[str, int]], List[Tuple[str, int]]]:
    """
    Both sides of a neighbour relation at offset i = 0, as (generator, shift) words

    Products are read left to right.
    """
    s, g = 's', 'sigma'
    table = {
        RelationId.B1: ([(g, 0), (g, 1), (g, 0)], [(g, 1), (g, 0), (g, 1)]),
        RelationId.S1: ([(s, 0), (s, 1), (s, 0)], [(s, 1), (s, 0), (s, 1)]),
        RelationId.M2: ([(s, 0), (s, 1), (g, 0)], [(g, 1), (s, 0), (s, 1)]),
        RelationId.M3: ([(g, 0), (g, 1), (s, 0)], [(s, 1), (g, 0), (g, 1)]),
        RelationId.M3P: ([(g, 1), (g, 0), (s, 1)], [(s, 0), (g, 1), (g, 0)]),
        RelationId.M4: ([(g, 0), (s, 1), (g, 0)], [(g, 1), (s, 0), (g, 1)]),
        RelationId.M2R: ([(s, 1), (s, 0), (g, 1)], [(g, 0), (s, 1), (s, 0)]),
    }
    return table[rel]


def _far_pair(rel: RelationId) -> Tuple[str, str]:
    return {
        RelationId.B2: ('sigma', 'sigma'),
        RelationId.S2: ('s', 's'),
        RelationId.M1: ('sigma', 's'),
    }[rel]


def _product(ops: Sequence[DenseOperator]) -> DenseOperator:
    result = ops[0]
    for op in ops[1:]:
        result = result @ op
    return result


def _index_choices(rel: RelationId, n_sites: int,
                   gaps: Optional[Sequence[int]] = None) -> List[Tuple[int, ...]]:
    if rel is RelationId.S3:
        return [(i,) for i in range(1, n_sites)]
    if not rel.is_far:
        return [(i,) for i in range(1, n_sites - 1)]
    pairs = []
    for i in range(1, n_sites):
        for j in range(1, n_sites):
            gap = abs(i - j)
            if gap > 1 and (gaps is None or gap in gaps):
                pairs.append((i, j))
    return pairs


def relation_residuals(fam: GeneratorFamily, rel: RelationId,
                       gaps: Optional[Sequence[int]] = None) -> Dict[Tuple[int, ...], float]:
    """Residual of a relation at every admissible index choice"""
    if fam.n_sites < rel.min_sites:
        raise ArgumentError(
            f"Relation {rel.value} needs a chain of N >= {rel.min_sites} sites, got N = {fam.n_sites}"
        )

    @lru_cache(maxsize=None)
    def gen(which: str, i: int) -> DenseOperator:
        return family_generator(fam, which, i)

    results = {}
    for idx in _index_choices(rel, fam.n_sites, gaps):
        if rel is RelationId.S3:
            s_i = gen('s', idx[0])
            lhs, rhs = s_i @ s_i, identity(s_i.shape[0])
        elif rel.is_far:
            first, second = _far_pair(rel)
            i, j = idx
            lhs = gen(first, i) @ gen(second, j)
            rhs = gen(second, j) @ gen(first, i)
        else:
            i = idx[0]
            left, right = _words(rel)
            lhs = _product([gen(w, i + k) for w, k in left])
            rhs = _product([gen(w, i + k) for w, k in right])
        results[idx] = residual(lhs, rhs)
    return results


def check_relation(fam: GeneratorFamily, rel: RelationId, tol: Optional[float] = None,
                   gaps: Optional[Sequence[int]] = None) -> Tuple[float, bool]:
    """
    Worst-case residual of a relation over all admissible indices

    Returns:
    --------
    (residual, passed)
    """
    if tol is None:
        tol = get_config().tolerance('relations')
    by_index = relation_residuals(fam, rel, gaps)
    worst = max(by_index.values()) if by_index else 0.0
    for idx, value in by_index.items():
        logger.debug(f"{rel.value} at {idx}: residual {value:.2e}")
    return worst, worst <= tol


@dataclass
class RelationResult:
    relation: RelationId
    residual: float
    passed: bool
    by_index: Dict[Tuple[int, ...], float] = field(default_factory=dict)


@dataclass
class RelationReport:
    """Per-relation table plus the group classification"""
    n_sites: int
    tolerance: float
    results: Dict[RelationId, RelationResult]
    classification: str
    spot_checks: Dict[RelationId, RelationResult] = field(default_factory=dict)

    def passed(self, rel: RelationId) -> bool:
        return self.results[rel].passed

    def residual(self, rel: RelationId) -> float:
        return self.results[rel].residual

    @property
    def max_residual(self) -> float:
        return max(r.residual for r in self.results.values())

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for rel, res in self.results.items():
            rows.append({
                'relation': rel.value,
                'n_sites': self.n_sites,
                'residual': res.residual,
                'tolerance': self.tolerance,
                'passed': res.passed,
                'presentation': rel in PRESENTATION,
            })
        for rel, res in self.spot_checks.items():
            rows.append({
                'relation': f"{rel.value} (all gaps)",
                'n_sites': self.n_sites + 1,
                'residual': res.residual,
                'tolerance': self.tolerance,
                'passed': res.passed,
                'presentation': True,
            })
        return pd.DataFrame(rows)


def taxonomy(flags: Dict[RelationId, bool]) -> str:
    """Group name from the pass flags of the presentation relations"""
    if not all(flags[r] for r in (RelationId.S1, RelationId.S2, RelationId.S3)):
        return NOT_MOTION_GROUP
    core = (RelationId.B1, RelationId.B2, RelationId.M1, RelationId.M2)
    if not all(flags[r] for r in core):
        return NONE
    m3, m3p = flags[RelationId.M3], flags[RelationId.M3P]
    if m3 and m3p:
        return SLB
    if m3p:
        return OLB
    if m3:
        return LB
    return VB


def classify(fam: GeneratorFamily, tol: Optional[float] = None,
             spot_check: bool = True) -> RelationReport:
    """
    Check every relation and name the realized group

    At N = 4 the far-commutation relations are also spot-checked on a
    five-site family (gaps 2 and 3).
    """
    if fam.n_sites < 4:
        raise ArgumentError(f"Classification needs a chain of N >= 4 sites, got N = {fam.n_sites}")
    if tol is None:
        tol = get_config().tolerance('relations')

    results = {}
    for rel in PRESENTATION + EXTRAS:
        by_index = relation_residuals(fam, rel)
        worst = max(by_index.values())
        results[rel] = RelationResult(rel, worst, worst <= tol, by_index)

    spot_checks = {}
    if spot_check and fam.n_sites == 4:
        wider = GeneratorFamily(fam.params, 5, fam.sigma_override)
        for rel in sorted(FAR_RELATIONS, key=lambda r: r.value):
            by_index = relation_residuals(wider, rel)
            worst = max(by_index.values())
            spot_checks[rel] = RelationResult(rel, worst, worst <= tol, by_index)
            if worst > tol:
                logger.warning(f"Far commutation {rel.value} fails at N = 5: residual {worst:.2e}")

    label = taxonomy({rel: res.passed for rel, res in results.items()})
    failing = [rel.value for rel, res in results.items() if not res.passed]
    logger.info(f"Relations at N = {fam.n_sites}: {label}"
                + (f" (failing: {', '.join(failing)})" if failing else ""))
    return RelationReport(fam.n_sites, tol, results, label, spot_checks)
