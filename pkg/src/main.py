#!/usr/bin/env python3
"""
Main Entry Point for the Loop Braid Integrability Toolkit

Usage:
------
# Run an experiment file, writing report.json (and spectrum.csv) to results/xxx
python main.py run --config config/experiments/xxx_chain.yaml --out results/xxx

# Classify a loop braid representation
python main.py verify-relations --n-sites 4 --alpha 0.6 --b-choice zz-half

# Reproduce the XXX chain from the rational R-matrix
python main.py build-hamiltonian --ansatz rational --c-const 1 --u0 0.5 --n-sites 3

# Spectrum of the XXZ deformation on 8 sites
python main.py spectrum --ansatz a3 --alpha 0.5 --b-choice zz-half --u0 0 --n-sites 8 --out results/xxz

Exit codes: 0 all asserted checks pass, 2 an asserted check failed,
3 configuration or argument error, 4 numerical error.
"""

import argparse
import sys
from typing import Dict, List, Optional

from src.config import get_config
from src.errors import ArgumentError, NumericalError
from src.experiment import ExperimentConfig, load_experiment, parse_experiment
from src.runner import RunResult, run_experiment
from src.utils import get_logger, setup_logging

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 2
EXIT_CONFIG = 3
EXIT_NUMERICAL = 4

COMMAND_CHECKS = {
    'verify-relations': ['relations'],
    'check-ybe': ['ybe'],
    'build-hamiltonian': ['hamiltonian'],
    'transfer-commute': ['transfer-commute'],
    'charges': ['charges'],
    'spectrum': ['spectrum'],
    'diagnose': ['hamiltonian', 'diagnostic'],
}


class ToolkitArgumentParser(argparse.ArgumentParser):
    """Argument errors (including unknown flags) exit with the configuration error code"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--log-level', type=str, choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'],
                        help='Override the configured log level')
    common.add_argument('--settings', type=str, help='Toolkit settings file (default: config/settings.yaml)')
    common.add_argument('--no-multiprocessing', action='store_true',
                        help='Disable multiprocessing (use for debugging)')
    common.add_argument('--out', type=str, help='Output directory for report.json and spectrum.csv')
    return common


def _model_flags() -> argparse.ArgumentParser:
    model = argparse.ArgumentParser(add_help=False)
    model.add_argument('--n-sites', type=int, default=4, help='Chain length N (default: 4)')
    model.add_argument('--ansatz', type=str, choices=['a1', 'a2', 'a3', 'rational'],
                       help='R-matrix ansatz (default: a1 when --alpha is given, else rational)')
    model.add_argument('--alpha', type=str, help="Braid generator parameter (e.g. 0.6 or '0.5+0.5i')")
    model.add_argument('--b-choice', type=str, default='zz-half',
                       help='zz-half | product:l,m,n | custom:file (default: zz-half)')
    model.add_argument('--a-poly', type=str, help="Coefficients of a(u), lowest first (e.g. '0,1')")
    model.add_argument('--b-poly', type=str, help="Coefficients of b(u) for ansatz a3")
    model.add_argument('--c-const', type=str, default='1', help='c of the rational R-matrix (default: 1)')
    model.add_argument('--u0', type=str, help='Expansion point (default: c/2 for rational, else 0)')
    model.add_argument('--tol', type=float, help='Tolerance override for the checks of this command')
    model.add_argument('--seed', type=int, default=0, help='RNG seed (default: 0)')
    model.add_argument('--samples', type=int, default=5, help='Random sample points per check (default: 5)')
    return model


def build_parser() -> ToolkitArgumentParser:
    parser = ToolkitArgumentParser(
        description="Loop Braid Integrability Toolkit",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__,
    )
    subparsers = parser.add_subparsers(dest='command', metavar='COMMAND')
    subparsers.required = True
    common = _common_flags()
    model = _model_flags()

    run = subparsers.add_parser('run', parents=[common], help='Run an experiment file')
    run.add_argument('--config', type=str, required=True, help='Experiment YAML file')

    helps = {
        'verify-relations': 'Check the loop braid relations and classify the representation',
        'check-ybe': 'Yang-Baxter residuals for the chosen ansatz',
        'build-hamiltonian': 'Local Hamiltonian, matching closed form and discrepancies',
        'transfer-commute': 'Commutators of transfer matrices at random points',
        'charges': 'Expansion coefficients of the transfer matrix and their commutators',
        'spectrum': 'Eigenvalues of the local Hamiltonian (spectrum.csv)',
        'diagnose': 'Commutators of the Hamiltonians with transfer matrices',
    }
    for name, text in helps.items():
        subparsers.add_parser(name, parents=[common, model], help=text)
    return parser


def config_from_flags(args: argparse.Namespace) -> ExperimentConfig:
    """Translate subcommand flags into a validated experiment"""
    checks = COMMAND_CHECKS[args.command]
    ansatz = args.ansatz or ('a1' if args.alpha is not None else 'rational')
    spec: Dict = {'ansatz': ansatz, 'c_const': args.c_const}
    if args.alpha is not None:
        spec['alpha'] = args.alpha
        spec['b_choice'] = args.b_choice
    if args.a_poly is not None:
        spec['a_poly'] = args.a_poly
    if args.b_poly is not None:
        spec['b_poly'] = args.b_poly

    raw = {
        'spec': spec,
        'n_sites': args.n_sites,
        'checks': checks,
        'seed': args.seed,
        'samples': args.samples,
    }
    if args.u0 is not None:
        raw['u0'] = args.u0
    if args.tol is not None:
        raw['tolerances'] = {check: args.tol for check in checks}
    return parse_experiment(raw)


def print_summary(result: RunResult, stream=None):
    stream = stream or sys.stdout
    report = result.report
    if 'classification' in report:
        print(f"classification: {report['classification']}", file=stream)
    for entry in report['checks']:
        convention = f" [{entry['convention']}]" if 'convention' in entry else ""
        print(f"{entry['name']}{convention}: residual {entry['residual']:.3e} "
              f"tol {entry['tolerance']:.0e} {entry['status']}", file=stream)
    if 'hamiltonian' in report:
        ham = report['hamiltonian']
        print(f"hamiltonian: closed form {ham.get('closed_form')}, hermitian {ham['hermitian']}", file=stream)
        for label, value in ham.get('bond_pauli', {}).items():
            print(f"  {label}: {value}", file=stream)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        config = get_config(args.settings) if args.settings else get_config()
        setup_logging(args.log_level or config.get('logging.level', 'INFO'), config.get('logging.format'))

        if args.command == 'run':
            cfg = load_experiment(args.config)
            out = args.out or 'results'
        else:
            cfg = config_from_flags(args)
            out = args.out

        use_mp = False if args.no_multiprocessing else None
        result = run_experiment(cfg, out, use_multiprocessing=use_mp)
    except ArgumentError as e:
        logger.error(str(e))
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as e:
        logger.error(f"{e} {e.diagnostics}")
        print(f"numerical error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL

    print_summary(result)
    if out is None and result.spectrum is not None:
        sys.stdout.write(result.spectrum.to_csv(index=False, float_format='%.17g'))
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
