"""
Experiment Configuration
Parses experiment files (YAML) into validated ExperimentConfig objects,
reporting errors with the dotted field path and the source line
"""
import yaml
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np

from src.config import get_config
from src.errors import ArgumentError, ConfigError
from src.reps import BChoice, RepresentationParams
from src.rmatrix import Ansatz, RMatrixSpec, YbeConvention
from src.spectral import SpectralPolynomial
from src.utils import get_logger, parse_complex, parse_complex_list, to_jsonable

logger = get_logger(__name__)

CHECKS = ('relations', 'ybe', 'rtt', 'abcd', 'transfer-commute', 'charges',
          'hamiltonian', 'spectrum', 'diagnostic')

# settings.yaml tolerance key used by each check
TOLERANCE_KEYS = {
    'relations': 'relations',
    'ybe': 'ybe',
    'rtt': 'rtt',
    'abcd': 'abcd',
    'transfer-commute': 'transfer',
    'charges': 'charges',
    'hamiltonian': 'hamiltonian',
    'spectrum': 'hermitian',
    'diagnostic': 'transfer',
}

# Checks that need sigma^-1 or R^-1
INVERSE_CHECKS = ('hamiltonian', 'spectrum', 'diagnostic')

TOP_LEVEL_KEYS = ('spec', 'n_sites', 'u0', 'checks', 'tolerances', 'sweep', 'samples', 'seed', 'ybe')
SPEC_KEYS = ('ansatz', 'alpha', 'b_choice', 'a_poly', 'b_poly', 'c_const')
SWEEP_KEYS = ('u', 'v', 'alpha', 'random_points', 'randomize', 'radius', 'b_choice', 'random_projectors')


def _line_index(node, prefix: str = "", lines: Optional[Dict[str, int]] = None) -> Dict[str, int]:
    """Map dotted field paths to 1-based source lines"""
    if lines is None:
        lines = {}
    if isinstance(node, yaml.MappingNode):
        for key_node, value_node in node.value:
            path = f"{prefix}.{key_node.value}" if prefix else str(key_node.value)
            lines[path] = key_node.start_mark.line + 1
            _line_index(value_node, path, lines)
    elif isinstance(node, yaml.SequenceNode):
        for i, item in enumerate(node.value):
            path = f"{prefix}[{i}]"
            lines[path] = item.start_mark.line + 1
            _line_index(item, path, lines)
    return lines


def _load_matrix_file(path: Path) -> np.ndarray:
    """A 4x4 matrix stored as a YAML list of rows (entries may be complex strings)"""
    try:
        with open(path, 'r') as f:
            rows = yaml.safe_load(f)
    except (OSError, yaml.YAMLError) as e:
        raise ArgumentError(f"Cannot read custom B matrix from {path}: {e}") from e
    return _matrix_rows(rows, str(path))


def _matrix_rows(rows: Any, source: str) -> np.ndarray:
    """Rows of complex entries as a 4x4 matrix"""
    if not isinstance(rows, list) or not all(isinstance(row, list) for row in rows):
        raise ArgumentError(f"Custom B from {source} must be a list of rows")
    if len(rows) != 4 or any(len(row) != 4 for row in rows):
        raise ArgumentError(f"Custom B from {source} must be 4x4, got row lengths {[len(r) for r in rows]}")
    try:
        return np.array([[parse_complex(x) for x in row] for row in rows], dtype=complex)
    except ValueError as e:
        raise ArgumentError(f"Custom B from {source}: {e}") from e


def parse_b_choice(value: Any, base_dir: Optional[Path] = None) -> BChoice:
    """
    Accepted forms:
      "zz-half"
      "product:l,m,n"  or  {product: [l, m, n]}
      "custom:file"    or  {custom: file-or-rows, validate: bool}

    Raises:
    -------
    ArgumentError for anything else, including malformed numbers
    """
    try:
        return _parse_b_choice(value, base_dir)
    except ArgumentError:
        raise
    except (TypeError, ValueError) as e:
        raise ArgumentError(f"Invalid B choice {value!r}: {e}") from e


def _parse_b_choice(value: Any, base_dir: Optional[Path]) -> BChoice:
    base_dir = Path(base_dir) if base_dir is not None else Path.cwd()
    if isinstance(value, str):
        text = value.strip()
        if text in ('zz-half', 'zz_half'):
            return BChoice.zz_half()
        kind, _, rest = text.partition(':')
        if kind == 'product':
            return _product_choice(parse_complex_list(rest))
        if kind == 'custom':
            if not rest:
                raise ArgumentError("custom B choice needs a file: custom:path")
            return BChoice.custom(_load_matrix_file(base_dir / rest))
        raise ArgumentError(f"Unknown B choice '{value}' (expected zz-half, product:l,m,n or custom:file)")

    if isinstance(value, dict):
        unknown = set(value) - {'product', 'custom', 'validate'}
        if unknown:
            raise ArgumentError(f"Unknown B choice keys: {sorted(unknown)}")
        if 'product' in value:
            values = value['product']
            if isinstance(values, str):
                values = parse_complex_list(values)
            if isinstance(values, list) and values and all(isinstance(v, list) for v in values):
                raise ArgumentError("Product B takes one projector (B = P⊗P); got a list of projectors")
            return _product_choice([parse_complex(v) for v in values])
        if 'custom' in value:
            source = value['custom']
            validate = bool(value.get('validate', True))
            matrix = (_load_matrix_file(base_dir / source) if isinstance(source, str)
                      else _matrix_rows(source, 'inline rows'))
            return BChoice.custom(matrix, validate=validate)
    raise ArgumentError(f"Cannot interpret B choice {value!r}")


def _product_choice(values: List[complex]) -> BChoice:
    if len(values) != 3:
        raise ArgumentError(f"Product B needs three projector parameters l, m, n; got {len(values)}")
    choice = BChoice.product(*values)
    choice.projector.validate()
    return choice


@dataclass
class ExperimentConfig:
    """A validated experiment: the R-matrix, the chain and the checks to run"""
    ansatz: Ansatz
    n_sites: int
    checks: List[str]
    seed: int = 0
    samples: int = 5
    alpha: Optional[complex] = None
    b_choice: BChoice = field(default_factory=BChoice.zz_half)
    a_poly: Optional[List[complex]] = None
    b_poly: Optional[List[complex]] = None
    c_const: complex = 1.0
    u0: Optional[complex] = None
    tolerances: Dict[str, float] = field(default_factory=dict)
    sweep: Dict[str, Any] = field(default_factory=dict)
    sweep_b_choices: List[BChoice] = field(default_factory=list)
    conventions: Optional[List[YbeConvention]] = None
    source: Optional[str] = None

    def representation(self) -> Optional[RepresentationParams]:
        if self.alpha is None:
            return None
        return RepresentationParams(self.alpha, self.b_choice)

    def effective_polys(self):
        """a(u) and b(u) coefficients; a3 defaults to a = alpha u, b = -2 alpha u"""
        if self.ansatz is Ansatz.RATIONAL:
            return None, None
        if self.ansatz is Ansatz.A3:
            a = self.a_poly if self.a_poly is not None else [0j, self.alpha]
            b = self.b_poly if self.b_poly is not None else [0j, -2 * self.alpha]
            return a, b
        return (self.a_poly if self.a_poly is not None else [0j, 1 + 0j]), None

    def build_spec(self) -> RMatrixSpec:
        if self.ansatz is Ansatz.RATIONAL:
            return RMatrixSpec.rational(self.c_const)
        params = self.representation()
        a_poly, b_poly = self.effective_polys()
        a_fn = SpectralPolynomial(tuple(a_poly))
        if self.ansatz is Ansatz.A1:
            return RMatrixSpec.a1(params, a_fn)
        if self.ansatz is Ansatz.A2:
            return RMatrixSpec.a2(params, a_fn)
        return RMatrixSpec.a3(params, a_fn, SpectralPolynomial(tuple(b_poly)))

    @property
    def expansion_point(self) -> complex:
        """u0 when given; c/2 for the rational R-matrix, 0 otherwise"""
        if self.u0 is not None:
            return self.u0
        if self.ansatz is Ansatz.RATIONAL:
            return self.c_const / 2
        return 0j

    def tolerance(self, check: str) -> float:
        if check in self.tolerances:
            return self.tolerances[check]
        key = TOLERANCE_KEYS.get(check, check)
        if key in self.tolerances:
            return self.tolerances[key]
        return get_config().tolerance(key)

    def to_dict(self) -> Dict[str, Any]:
        spec = {'ansatz': self.ansatz.value}
        if self.ansatz is Ansatz.RATIONAL:
            spec['c_const'] = self.c_const
        if self.alpha is not None:
            spec['alpha'] = self.alpha
            spec['b_choice'] = self.b_choice.label
            if self.b_choice.kind == 'custom':
                spec['b_matrix'] = self.b_choice.matrix
                spec['b_validate'] = self.b_choice.validate
        a_poly, b_poly = self.effective_polys()
        if a_poly is not None:
            spec['a_poly'] = list(a_poly)
        if b_poly is not None:
            spec['b_poly'] = list(b_poly)
        sweep = dict(self.sweep)
        if self.sweep_b_choices:
            sweep['b_choice'] = [b.label for b in self.sweep_b_choices]
        return to_jsonable({
            'spec': spec,
            'n_sites': self.n_sites,
            'u0': self.expansion_point,
            'checks': list(self.checks),
            'tolerances': dict(self.tolerances),
            'sweep': sweep,
            'samples': self.samples,
            'seed': self.seed,
            'ybe_conventions': [c.value for c in self.conventions] if self.conventions else None,
        })


class _Parser:
    """Field-by-field validation with line-aware errors"""

    def __init__(self, raw: Dict, lines: Dict[str, int], base_dir: Path):
        self.raw = raw
        self.lines = lines
        self.base_dir = base_dir

    def fail(self, path: str, message: str):
        raise ConfigError(message, field=path, line=self.lines.get(path))

    def complex_value(self, path: str, value: Any) -> complex:
        try:
            return parse_complex(value)
        except ValueError:
            self.fail(path, f"expected a number ('re' or 're+im i'), got {value!r}")

    def complex_list(self, path: str, value: Any) -> List[complex]:
        if isinstance(value, str):
            try:
                return parse_complex_list(value)
            except ValueError as e:
                self.fail(path, str(e))
        if not isinstance(value, list) or not value:
            self.fail(path, f"expected a non-empty list of numbers, got {value!r}")
        return [self.complex_value(f"{path}[{i}]", v) for i, v in enumerate(value)]

    def integer(self, path: str, value: Any, minimum: int) -> int:
        if isinstance(value, bool) or not isinstance(value, int):
            self.fail(path, f"expected an integer, got {value!r}")
        if value < minimum:
            self.fail(path, f"must be >= {minimum}, got {value}")
        return value

    def positive_float(self, path: str, value: Any) -> float:
        try:
            number = float(value)
        except (TypeError, ValueError):
            self.fail(path, f"expected a positive number, got {value!r}")
        if not number > 0:
            self.fail(path, f"must be positive, got {value!r}")
        return number

    def check_keys(self, path: str, mapping: Any, allowed) -> Dict:
        if not isinstance(mapping, dict):
            self.fail(path, f"expected a mapping, got {type(mapping).__name__}")
        for key in mapping:
            if key not in allowed:
                sub = f"{path}.{key}" if path else str(key)
                self.fail(sub, f"unknown key '{key}' (allowed: {', '.join(allowed)})")
        return mapping

    def parse(self) -> ExperimentConfig:
        raw = self.check_keys("", self.raw, TOP_LEVEL_KEYS)
        if 'spec' not in raw:
            self.fail('spec', "missing required section 'spec'")
        spec = self.check_keys('spec', raw['spec'], SPEC_KEYS)

        ansatz_name = str(spec.get('ansatz', '')).lower()
        try:
            ansatz = Ansatz(ansatz_name)
        except ValueError:
            self.fail('spec.ansatz', f"expected one of {[a.value for a in Ansatz]}, got {spec.get('ansatz')!r}")

        if 'n_sites' not in raw:
            self.fail('n_sites', "missing required field 'n_sites'")
        n_sites = self.integer('n_sites', raw['n_sites'], 1)

        checks = raw.get('checks', ['hamiltonian'])
        if not isinstance(checks, list) or not checks:
            self.fail('checks', "expected a non-empty list of checks")
        for i, name in enumerate(checks):
            if name not in CHECKS:
                self.fail(f"checks[{i}]", f"unknown check '{name}' (allowed: {', '.join(CHECKS)})")

        alpha = self.complex_value('spec.alpha', spec['alpha']) if 'alpha' in spec else None
        if alpha is None and ansatz is not Ansatz.RATIONAL:
            self.fail('spec.alpha', f"ansatz {ansatz.value} needs alpha")
        b_choice = BChoice.zz_half()
        if 'b_choice' in spec:
            try:
                b_choice = parse_b_choice(spec['b_choice'], self.base_dir)
            except ArgumentError as e:
                self.fail('spec.b_choice', str(e))

        c_const = self.complex_value('spec.c_const', spec.get('c_const', 1.0))
        a_poly = self.complex_list('spec.a_poly', spec['a_poly']) if 'a_poly' in spec else None
        b_poly = self.complex_list('spec.b_poly', spec['b_poly']) if 'b_poly' in spec else None
        if b_poly is not None and ansatz is not Ansatz.A3:
            self.fail('spec.b_poly', f"b(u) only applies to ansatz a3, not {ansatz.value}")

        if alpha is not None and alpha == -1:
            needing = [c for c in checks if c in INVERSE_CHECKS]
            if needing:
                self.fail('spec.alpha', "sigma^-1 = s - alpha/(1+alpha) B requires alpha != -1 "
                                        f"(needed by check '{needing[0]}')")

        if 'relations' in checks:
            if alpha is None:
                self.fail('spec.alpha', "the relations check needs a loop braid representation (alpha, b_choice)")
            if n_sites < 4:
                self.fail('n_sites', f"the relations check needs n_sites >= 4, got {n_sites}")
        if 'abcd' in checks and ansatz is not Ansatz.RATIONAL:
            self.fail('checks', "the abcd check applies to the rational R-matrix only")
        if any(c in checks for c in INVERSE_CHECKS) and n_sites < 2:
            self.fail('n_sites', "Hamiltonians need n_sites >= 2")

        u0 = self.complex_value('u0', raw['u0']) if raw.get('u0') is not None else None

        tolerances = {}
        for key, value in self.check_keys('tolerances', raw.get('tolerances') or {},
                                          CHECKS + tuple(sorted(set(TOLERANCE_KEYS.values())))).items():
            tolerances[key] = self.positive_float(f"tolerances.{key}", value)

        sweep = dict(self.check_keys('sweep', raw.get('sweep') or {}, SWEEP_KEYS))
        for key in ('u', 'v', 'alpha'):
            if key in sweep:
                sweep[key] = self.complex_list(f"sweep.{key}", sweep[key])
        if 'random_points' in sweep:
            sweep['random_points'] = self.integer('sweep.random_points', sweep['random_points'], 0)
        if 'radius' in sweep:
            sweep['radius'] = self.positive_float('sweep.radius', sweep['radius'])
        if 'randomize' in sweep:
            if not isinstance(sweep['randomize'], list) or any(k != 'alpha' for k in sweep['randomize']):
                self.fail('sweep.randomize', "only [alpha] may be randomized")
        if 'alpha' in sweep and alpha is None:
            self.fail('sweep.alpha', "an alpha sweep needs a loop braid ansatz")
        sweep_b_choices = []
        if 'b_choice' in sweep:
            if alpha is None:
                self.fail('sweep.b_choice', "a B choice sweep needs a loop braid ansatz")
            entries = sweep.pop('b_choice')
            if not isinstance(entries, list) or not entries:
                self.fail('sweep.b_choice', f"expected a non-empty list of B choices, got {entries!r}")
            for i, entry in enumerate(entries):
                try:
                    sweep_b_choices.append(parse_b_choice(entry, self.base_dir))
                except ArgumentError as e:
                    self.fail(f"sweep.b_choice[{i}]", str(e))
        if 'random_projectors' in sweep:
            if alpha is None:
                self.fail('sweep.random_projectors', "random projectors need a loop braid ansatz")
            sweep['random_projectors'] = self.integer('sweep.random_projectors', sweep['random_projectors'], 0)

        samples = self.integer('samples', raw.get('samples', 5), 1)
        seed = self.integer('seed', raw.get('seed', 0), 0)
        if seed >= 2 ** 64:
            self.fail('seed', "must fit in 64 bits")

        conventions = None
        if 'ybe' in raw:
            ybe = self.check_keys('ybe', raw['ybe'], ('conventions',))
            conventions = []
            for i, name in enumerate(ybe.get('conventions') or []):
                try:
                    conventions.append(YbeConvention(str(name)))
                except ValueError:
                    self.fail(f"ybe.conventions[{i}]",
                              f"expected one of {[c.value for c in YbeConvention]}, got {name!r}")

        return ExperimentConfig(
            ansatz=ansatz, n_sites=n_sites, checks=list(checks), seed=seed, samples=samples,
            alpha=alpha, b_choice=b_choice, a_poly=a_poly, b_poly=b_poly, c_const=c_const,
            u0=u0, tolerances=tolerances, sweep=sweep, sweep_b_choices=sweep_b_choices,
            conventions=conventions or None,
        )


def parse_experiment(raw: Dict, lines: Optional[Dict[str, int]] = None,
                     base_dir: Union[str, Path, None] = None) -> ExperimentConfig:
    """Validate an already-loaded experiment mapping"""
    base = Path(base_dir) if base_dir is not None else Path.cwd()
    return _Parser(raw if raw is not None else {}, lines or {}, base).parse()


def load_experiment(path: Union[str, Path]) -> ExperimentConfig:
    """
    Load and validate an experiment file

    Raises:
    -------
    ConfigError with the offending field and line
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"Cannot read experiment file {path}: {e}") from e

    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        raw = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, 'problem_mark', None)
        raise ConfigError(f"Malformed YAML: {getattr(e, 'problem', e)}",
                          line=mark.line + 1 if mark is not None else None) from e

    if raw is None:
        raise ConfigError("Experiment file is empty")
    if not isinstance(raw, dict):
        raise ConfigError("Experiment file must hold a mapping at the top level", line=1)

    cfg = parse_experiment(raw, _line_index(node), path.parent)
    cfg.source = str(path)
    logger.info(f"Loaded experiment {path.name}: ansatz {cfg.ansatz.value}, N = {cfg.n_sites}, checks {cfg.checks}")
    return cfg
