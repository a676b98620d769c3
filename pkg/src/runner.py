"""
Experiment Runner
Executes the checks of an ExperimentConfig and assembles the verification report
"""
import itertools
import json
import time
from dataclasses import dataclass, field, replace
from functools import partial
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import pandas as pd

from src.chain import (
    HamiltonianBundle, blocks, bond_term, cyclic_shift, extract_charges, hamiltonian_bundle,
    integrability_diagnostic, model1_term, model2_structure_residual, monodromy, spectrum,
    transfer, transfer_commutator,
)
from src.config import get_config
from src.experiment import CHECKS, ExperimentConfig
from src.relations import classify
from src.reps import (
    BChoice, GeneratorFamily, ProjectorParams, RepresentationParams, build_B, build_sigma,
    pauli_decomposition, sigma_inverse, sigma_power, validate_B,
)
from src.rmatrix import (
    ASSERTED_CONVENTIONS, MEASURED_CONVENTIONS, Ansatz, YbeConvention, a1_a2_identity_residual,
    abcd_residual, build_R, rtt_residual, sigma_form_residual, ybe_residual,
    ybe_residual_free_coeffs,
)
from src.sweeps import run_sweep, sweep_points
from src.tensor_core import identity, residual
from src.utils import banner, get_logger, make_rng, random_complex, to_jsonable, write_atomic

logger = get_logger(__name__)

PASS = 'pass'
FAIL = 'fail'
MEASURED = 'measured'

BRAIDED_READING = ("braided Yang-Baxter form read as R_i(u-v) R_{i+1}(u) R_i(v) "
                   "= R_{i+1}(v) R_i(u) R_{i+1}(u-v)")
SIGMA_POWER_MAX = 13


@dataclass
class CheckEntry:
    """One row of the verification report"""
    name: str
    residual: float
    tolerance: float
    status: str
    params: Dict[str, Any] = field(default_factory=dict)
    convention: Optional[str] = None
    details: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        out = {'name': self.name, 'params': self.params}
        if self.convention is not None:
            out['convention'] = self.convention
        out.update({'residual': self.residual, 'tolerance': self.tolerance, 'status': self.status})
        if self.details:
            out['details'] = self.details
        return to_jsonable(out)


def make_entry(name: str, value: float, tol: float, asserted: bool, **kwargs) -> CheckEntry:
    if not asserted:
        status = MEASURED
    else:
        status = PASS if value <= tol else FAIL
    return CheckEntry(name, float(value), float(tol), status, **kwargs)


@dataclass
class RunResult:
    report: Dict[str, Any]
    exit_code: int
    spectrum: Optional[pd.DataFrame] = None

    @property
    def entries(self) -> List[Dict[str, Any]]:
        return self.report['checks']


def _spec_at(cfg: ExperimentConfig, point: Dict):
    alpha = point.get('alpha')
    if alpha is not None and cfg.alpha is not None and alpha != cfg.alpha:
        return replace(cfg, alpha=complex(alpha)).build_spec()
    return cfg.build_spec()


# Sweep tasks (module level so worker processes can import them)

def _ybe_task(shared, point: Dict) -> Dict[str, float]:
    cfg, conventions = shared
    spec = _spec_at(cfg, point)
    return {conv.value: ybe_residual(spec, conv, point['u'], point['v']) for conv in conventions}


def _rtt_task(shared, point: Dict) -> Dict[str, float]:
    cfg, n_chain = shared
    spec = _spec_at(cfg, point)
    chain_t = partial(monodromy, spec, n_sites=n_chain)
    single_t = partial(build_R, spec)
    return {
        'chain': rtt_residual(spec, chain_t, point['u'], point['v'], n_chain),
        'single': rtt_residual(spec, single_t, point['u'], point['v'], 1),
    }


def _abcd_task(shared, point: Dict) -> float:
    cfg, n_sites = shared
    spec = _spec_at(cfg, point)
    return max(abcd_residual(spec, n_sites, point['u'], point['v'], idx)
               for idx in itertools.product((1, 2), repeat=4))


def _transfer_task(shared, point: Dict) -> Dict[str, float]:
    cfg, n_sites = shared
    spec = _spec_at(cfg, point)
    (a, _), (_, d) = blocks(spec, point['u'], n_sites)
    return {
        'commutator': transfer_commutator(spec, point['u'], point['v'], n_sites),
        'trace_blocks': residual(transfer(spec, point['u'], n_sites), a + d),
    }


class ExperimentRunner:
    """
    Runs every check named in the experiment

    Parameters:
    -----------
    cfg : ExperimentConfig
        Validated experiment
    use_multiprocessing : bool
        Sweep execution mode (None = settings.yaml)
    """

    def __init__(self, cfg: ExperimentConfig, use_multiprocessing: Optional[bool] = None):
        self.cfg = cfg
        self.use_multiprocessing = use_multiprocessing
        self.spec = cfg.build_spec()
        self.u0 = cfg.expansion_point
        self.entries: List[CheckEntry] = []
        self.timings: Dict[str, float] = {}
        self.notes: List[str] = []
        self.classification: Optional[str] = None
        self.hamiltonian: Optional[Dict[str, Any]] = None
        self.spectrum_frame: Optional[pd.DataFrame] = None
        self._bundle: Optional[HamiltonianBundle] = None
        self._certified: Optional[bool] = None
        self._certification: Dict[str, Any] = {}

    # Helpers

    def _rng(self, stream: str) -> np.random.Generator:
        return make_rng(self.cfg.seed, CHECKS.index(stream) + 1 if stream in CHECKS else len(CHECKS) + 1)

    def _radius(self) -> float:
        return float(self.cfg.sweep.get('radius', 1.0))

    def _points(self, stream: str) -> List[Dict]:
        """Sweep points when a sweep is configured, otherwise `samples` random (u, v)"""
        rng = self._rng(stream)
        defaults = {'alpha': self.cfg.alpha} if self.cfg.alpha is not None else {}
        sweep = self.cfg.sweep
        if any(sweep.get(k) for k in ('u', 'v', 'alpha', 'random_points')):
            points = sweep_points(sweep, rng, defaults, self._radius())
            for point in points:
                point.setdefault('u', complex(random_complex(rng, None, self._radius())))
                point.setdefault('v', complex(random_complex(rng, None, self._radius())))
            return points
        return [dict(defaults, u=complex(random_complex(rng, None, self._radius())),
                     v=complex(random_complex(rng, None, self._radius())))
                for _ in range(self.cfg.samples)]

    def _sweep(self, task, shared, points):
        return run_sweep(task, shared, points, self.use_multiprocessing)

    def _add(self, entry: CheckEntry):
        self.entries.append(entry)
        log = logger.warning if entry.status == FAIL else logger.info
        tag = f" [{entry.convention}]" if entry.convention else ""
        log(f"{entry.name}{tag}: residual {entry.residual:.2e} (tol {entry.tolerance:.0e}) -> {entry.status}")

    @property
    def certified(self) -> bool:
        """Whether the R-matrix satisfies the difference-form Yang-Baxter equation at the ybe points"""
        if self._certified is None:
            points = self._points('ybe')
            results = self._sweep(_ybe_task, (self.cfg, (YbeConvention.DIFFERENCE,)), points)
            worst = max(r[YbeConvention.DIFFERENCE.value] for r in results)
            tol = self.cfg.tolerance('ybe')
            self._certified = worst <= tol
            self._certification = {'convention': YbeConvention.DIFFERENCE.value,
                                   'residual': worst, 'tolerance': tol, 'certified': self._certified}
            logger.info(f"Difference-form YBE residual {worst:.2e}: "
                        f"{'certified' if self._certified else 'not certified'}")
        return self._certified

    def bundle(self) -> HamiltonianBundle:
        if self._bundle is None:
            self._bundle = hamiltonian_bundle(self.spec, self.u0, self.cfg.n_sites)
        return self._bundle

    # Checks

    def relation_alphas(self) -> List[complex]:
        """The experiment alpha followed by the grid and randomized alphas of the sweep"""
        sweep = self.cfg.sweep
        alpha_sweep: Dict[str, Any] = {'alpha': sweep['alpha']} if sweep.get('alpha') else {}
        if 'alpha' in sweep.get('randomize', []):
            alpha_sweep.update(random_points=sweep.get('random_points', 0), randomize=['alpha'])
        alphas = [self.cfg.alpha]
        for point in sweep_points(alpha_sweep, self._rng('relations'), radius=self._radius()):
            if point['alpha'] not in alphas:
                alphas.append(point['alpha'])
        return alphas

    def relation_b_choices(self) -> List[BChoice]:
        """The experiment B, the swept choices and `random_projectors` random real P⊗P"""
        choices = [self.cfg.b_choice] + list(self.cfg.sweep_b_choices)
        rng = self._rng('projectors')
        for _ in range(int(self.cfg.sweep.get('random_projectors', 0))):
            choices.append(BChoice('product', projector=ProjectorParams.random_real(rng)))
        return choices

    def check_relations(self):
        tol = self.cfg.tolerance('relations')
        alphas = self.relation_alphas()
        for b_choice in self.relation_b_choices():
            axioms = validate_B(build_B(b_choice))
            self._add(make_entry('b-axioms', max(axioms.residuals.values()), axioms.tolerance, True,
                                 params={'b_choice': b_choice.label}, details=axioms.residuals))

            for alpha in alphas:
                params = RepresentationParams(alpha, b_choice)
                report = classify(GeneratorFamily(params, self.cfg.n_sites), tol)
                if alpha == self.cfg.alpha and b_choice is self.cfg.b_choice:
                    self.classification = report.classification
                logger.debug(f"Relations for alpha={alpha}, B={b_choice.label}:\n{report.to_frame().to_string()}")
                logger.info(f"alpha={alpha}, B={b_choice.label}: {report.classification} "
                            f"(max residual {report.max_residual:.2e})")
                labels = {'n_sites': self.cfg.n_sites, 'alpha': alpha, 'b_choice': b_choice.label}
                for rel, res in report.results.items():
                    self._add(make_entry('relation', res.residual, tol, True,
                                         params=dict(labels, relation=rel.value)))
                for rel, res in report.spot_checks.items():
                    self._add(make_entry('relation-all-gaps', res.residual, tol, True,
                                         params=dict(labels, relation=rel.value, n_sites=self.cfg.n_sites + 1)))

                sigma = build_sigma(params)
                if params.alpha != -1:
                    self._add(make_entry('sigma-inverse', residual(sigma @ sigma_inverse(params), identity(4)),
                                         tol, True, params={'alpha': alpha, 'b_choice': b_choice.label}))
                worst = max(residual(sigma_power(params, p), np.linalg.matrix_power(sigma, p))
                            for p in range(SIGMA_POWER_MAX + 1))
                self._add(make_entry('sigma-power', worst, self.cfg.tolerance('ybe'), True,
                                     params={'alpha': alpha, 'b_choice': b_choice.label,
                                             'max_power': SIGMA_POWER_MAX}))

    def check_ybe(self):
        tol = self.cfg.tolerance('ybe')
        ansatz = self.spec.ansatz
        asserted = tuple(self.cfg.conventions) if self.cfg.conventions else ASSERTED_CONVENTIONS[ansatz]
        measured = () if self.cfg.conventions else MEASURED_CONVENTIONS[ansatz]
        conventions = asserted + tuple(c for c in measured if c not in asserted)

        points = self._points('ybe')
        results = self._sweep(_ybe_task, (self.cfg, conventions), points)
        for conv in conventions:
            values = [r[conv.value] for r in results]
            worst = int(np.argmax(values))
            self._add(make_entry('ybe', values[worst], tol, conv in asserted, convention=conv.value,
                                 params={'points': len(points)},
                                 details={'worst_point': {'u': points[worst]['u'], 'v': points[worst]['v']}}))
        if YbeConvention.BRAIDED in conventions:
            self.notes.append(BRAIDED_READING)

        rng = self._rng('ybe')
        if ansatz is Ansatz.A1:
            triples = random_complex(rng, (self.cfg.samples, 3), 2.0)
            worst = max(ybe_residual_free_coeffs(self.spec, *t) for t in triples)
            self._add(make_entry('ybe-free-coeffs', worst, tol, True, convention=YbeConvention.BRAIDED.value,
                                 params={'triples': len(triples)}))
        elif ansatz is Ansatz.A2:
            worst = max(a1_a2_identity_residual(self.spec.params, self.spec.a_fn, p['u']) for p in points)
            self._add(make_entry('a1-a2-identity', worst, tol, True, params={'points': len(points)}))
        elif ansatz is Ansatz.A3:
            worst = max(sigma_form_residual(self.spec.params, self.spec.a_fn(p['u']), self.spec.b_fn(p['u']))
                        for p in points)
            self._add(make_entry('sigma-form', worst, tol, True, params={'points': len(points)}))

    def check_rtt(self):
        tol = self.cfg.tolerance('rtt')
        points = self._points('rtt')
        results = self._sweep(_rtt_task, (self.cfg, self.cfg.n_sites), points)
        asserted = self.certified
        self._add(make_entry('rtt', max(r['chain'] for r in results), tol, asserted,
                             convention=YbeConvention.DIFFERENCE.value,
                             params={'n_sites': self.cfg.n_sites, 'points': len(points)}))
        self._add(make_entry('rtt-single-leg', max(r['single'] for r in results), tol, asserted,
                             convention=YbeConvention.DIFFERENCE.value,
                             params={'n_sites': 1, 'points': len(points)}))

    def check_abcd(self):
        tol = self.cfg.tolerance('abcd')
        points = [p for p in self._points('abcd') if p['u'] != p['v']]
        results = self._sweep(_abcd_task, (self.cfg, self.cfg.n_sites), points)
        self._add(make_entry('abcd', max(results), tol, True,
                             params={'n_sites': self.cfg.n_sites, 'points': len(points), 'index_sets': 16}))

    def check_transfer(self):
        tol = self.cfg.tolerance('transfer-commute')
        points = self._points('transfer-commute')
        results = self._sweep(_transfer_task, (self.cfg, self.cfg.n_sites), points)
        self._add(make_entry('transfer-commute', max(r['commutator'] for r in results), tol, self.certified,
                             params={'n_sites': self.cfg.n_sites, 'points': len(points)}))
        self._add(make_entry('transfer-trace-blocks', max(r['trace_blocks'] for r in results), tol, True,
                             params={'n_sites': self.cfg.n_sites, 'points': len(points)}))

    def check_charges(self):
        tol = self.cfg.tolerance('charges')
        family = extract_charges(self.spec, self.u0, self.cfg.n_sites, tol=tol)
        self._add(make_entry('charges', family.max_commutator, tol, self.certified,
                             params={'n_sites': self.cfg.n_sites, 'u0': self.u0},
                             details={'count': len(family.charges), 'pairs': len(family.commutators)}))

    def check_hamiltonian(self):
        tol = self.cfg.tolerance('hamiltonian')
        bundle = self.bundle()
        n = self.cfg.n_sites

        if bundle.closed_form is not None:
            asserted = bundle.closed_form_name in ('xxx', 'slb')
            self._add(make_entry('hamiltonian-closed-form', bundle.discrepancy_residual, tol, asserted,
                                 params={'closed_form': bundle.closed_form_name, 'n_sites': n, 'u0': self.u0}))
        if bundle.inverse_sum_residual is not None:
            self._add(make_entry('closed-form-minus-derived-is-inverse-sum', bundle.inverse_sum_residual,
                                 tol, False, params={'n_sites': n, 'u0': self.u0},
                                 details={'holds': bundle.inverse_sum_residual <= tol,
                                          'traceless_fitted_scalar': bundle.fitted_scalar,
                                          'traceless_fit_residual': bundle.fitted_residual}))
        if bundle.closed_form_name == 'deformed':
            choice = self.spec.params.b_choice
            if choice.kind == 'zz_half':
                value, coef = model2_structure_residual(self.spec.alpha, self.u0)
                self._add(make_entry('xxz-structure', value, tol, True,
                                     params={'alpha': self.spec.alpha, 'u0': self.u0},
                                     details={'coefficient': coef}))
            elif choice.kind == 'product':
                term = model1_term(choice.projector, self.spec.alpha, self.u0)
                self._add(make_entry('projector-pair-expansion', term.expansion_residual, tol, True,
                                     params={'b_choice': choice.label}))

        if bundle.derivative_residual is not None:
            self._add(make_entry('hamiltonian-derivative-route', bundle.derivative_residual,
                                 bundle.derivative_tolerance, bundle.regular and bundle.aux_trace.proportional,
                                 params={'n_sites': n, 'u0': self.u0, 'regular_point': bundle.regular}))

        shift = cyclic_shift(n)
        self._add(make_entry('translation-invariance', residual(bundle.derived @ shift, shift @ bundle.derived),
                             tol, True, params={'n_sites': n}))

        self.hamiltonian = bundle.summary()
        couplings = pauli_decomposition(bond_term(self.spec, self.u0))
        self.hamiltonian['bond_pauli'] = {k: v for k, v in couplings.items() if abs(v) > 1e-12}

    def check_spectrum(self):
        bundle = self.bundle()
        result = spectrum(bundle.derived)
        self.spectrum_frame = result.to_frame()
        self._add(make_entry('spectrum', residual(bundle.derived, bundle.derived.conj().T),
                             self.cfg.tolerance('spectrum'), False,
                             params={'n_sites': self.cfg.n_sites, 'u0': self.u0},
                             details={'hermitian': result.hermitian, 'count': len(result.eigenvalues)}))

    def check_diagnostic(self):
        tol = self.cfg.tolerance('diagnostic')
        bundle = self.bundle()
        samples = [p['v'] for p in self._points('diagnostic')]
        diag = integrability_diagnostic(self.spec, self.u0, self.cfg.n_sites, samples, bundle, tol)
        asserted = diag.asserted and self.certified
        self._add(make_entry('diagnostic-derived', diag.max_derived, tol, asserted,
                             params={'n_sites': self.cfg.n_sites, 'samples': len(samples)}))
        if diag.closed_form is not None:
            self._add(make_entry('diagnostic-closed-form', diag.max_closed_form, tol,
                                 asserted and bundle.closed_form_name != 'deformed',
                                 params={'closed_form': bundle.closed_form_name, 'samples': len(samples)}))

    # Orchestration

    def run(self) -> RunResult:
        dispatch = {
            'relations': self.check_relations,
            'ybe': self.check_ybe,
            'rtt': self.check_rtt,
            'abcd': self.check_abcd,
            'transfer-commute': self.check_transfer,
            'charges': self.check_charges,
            'hamiltonian': self.check_hamiltonian,
            'spectrum': self.check_spectrum,
            'diagnostic': self.check_diagnostic,
        }
        start = time.perf_counter()
        for name in self.cfg.checks:
            banner(logger, f"CHECK: {name.upper()}")
            t0 = time.perf_counter()
            dispatch[name]()
            self.timings[name] = time.perf_counter() - t0
        self.timings['total'] = time.perf_counter() - start

        counts = {status: sum(e.status == status for e in self.entries) for status in (PASS, FAIL, MEASURED)}
        report = {
            'schema_version': int(get_config().get('report.schema_version', 1)),
            'config': self.cfg.to_dict(),
            'seed': self.cfg.seed,
            'checks': [e.to_dict() for e in self.entries],
            'summary': counts,
        }
        metadata = {}
        if self.notes:
            metadata['notes'] = sorted(set(self.notes))
        if self._certification:
            metadata['ybe_certification'] = self._certification
        if metadata:
            report['metadata'] = to_jsonable(metadata)
        if self.classification is not None:
            report['classification'] = self.classification
        if self.hamiltonian is not None:
            report['hamiltonian'] = to_jsonable(self.hamiltonian)
        report['timings'] = self.timings

        if self.entries:
            frame = pd.DataFrame([{
                'check': e.name, 'convention': e.convention or '', 'residual': e.residual,
                'tolerance': e.tolerance, 'status': e.status,
            } for e in self.entries])
            logger.info("\n" + frame.to_string(index=False))

        exit_code = 2 if counts[FAIL] else 0
        banner(logger, f"RUN COMPLETE: {counts[PASS]} pass, {counts[FAIL]} fail, {counts[MEASURED]} measured")
        return RunResult(report, exit_code, self.spectrum_frame)


def report_json(report: Dict[str, Any]) -> str:
    return json.dumps(to_jsonable(report), indent=2) + "\n"


def write_outputs(result: RunResult, out_dir: Union[str, Path]) -> Dict[str, Path]:
    """report.json and (when a spectrum was computed) spectrum.csv, each written atomically"""
    out_dir = Path(out_dir)
    written = {'report': out_dir / 'report.json'}
    write_atomic(written['report'], report_json(result.report))
    if result.spectrum is not None:
        written['spectrum'] = out_dir / 'spectrum.csv'
        write_atomic(written['spectrum'], result.spectrum.to_csv(index=False, float_format='%.17g'))
    for path in written.values():
        logger.info(f"Wrote {path}")
    return written


def run_experiment(cfg: ExperimentConfig, out_dir: Union[str, Path, None] = None,
                   use_multiprocessing: Optional[bool] = None) -> RunResult:
    """Run all checks; write the outputs when out_dir is given"""
    result = ExperimentRunner(cfg, use_multiprocessing).run()
    if out_dir is not None:
        write_outputs(result, out_dir)
    return result
