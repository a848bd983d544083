# commands.py
"""
Command-line interface: one subcommand per toolkit operation, JSON in and out.

Exit status: 0 on success, 2 when a reach/verify search ends with status
"failed", 1 on any input or toolkit error.
"""

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from .. import __version__
from ..config.config_manager import ConfigManager
from ..config.data_structures import FlowRequest, ReachReport
from ..core.exceptions import InputError, ToolkitError
from ..core.signatures import oscillating_path, sig_pl
from ..core.tensor_algebra import LieElement, TruncatedTensor, shuffle_check
from ..fields.flows import IntegratorSettings, flow, flow_with_jacobian
from ..fields.vector_fields import VectorFieldFamily
from ..orbits.distribution import SamplingSettings, bracket_span_rank, distribution_rank, iterated_brackets
from ..reports.report_generator import ReportGenerator
from ..solvers.accessibility import (ShootingSettings, reach_from_rough, reach_shooting, realize,
                                     verify_accessibility)
from ..solvers.rde_solver import solve_ode, solve_rde
from ..utils.input_loader import load_family, load_path, load_rough_path, load_vector

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_SEARCH_FAILED = 2

COMMANDS = ('sig', 'flow', 'orbit-rank', 'solve-ode', 'solve-rde', 'reach', 'verify')


class ToolkitArgumentParser(argparse.ArgumentParser):
    """argparse parser whose usage errors surface as InputError (exit 1, not 2)"""

    def error(self, message: str):
        raise InputError(f"{self.prog}: {message}")


@dataclass
class RunConfig:
    """A fully parsed command line"""
    command: str
    options: Dict[str, Any] = field(default_factory=dict)
    output: Optional[str] = None
    threads: Optional[int] = None
    log_level: Optional[str] = None
    config_path: str = "config/config.yaml"

    @classmethod
    def from_namespace(cls, namespace: argparse.Namespace) -> 'RunConfig':
        options = dict(vars(namespace))
        return cls(command=options.pop('command'), output=options.pop('output'), threads=options.pop('threads'),
                   log_level=options.pop('log_level'), config_path=options.pop('config'), options=options)

    def option(self, name: str, default: Any = None) -> Any:
        value = self.options.get(name)
        return default if value is None else value


def build_parser() -> ToolkitArgumentParser:
    parser = ToolkitArgumentParser(prog='rough_toolkit',
                                   description='Rough path signatures, flows, orbits and accessibility')
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    parser.add_argument('--config', default='config/config.yaml', help='YAML configuration file')
    parser.add_argument('--threads', type=int, help='Thread cap (default: $ROUGH_TOOLKIT_THREADS or config)')
    parser.add_argument('--log-level', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'],
                        help='Logging level on stderr (default: config system_settings.log_level)')
    parser.add_argument('--output', help='Write the JSON report to this file instead of stdout')

    sub = parser.add_subparsers(dest='command', metavar='COMMAND')
    sub.required = True

    sig = sub.add_parser('sig', help='Truncated signature of a piecewise linear path')
    source = sig.add_mutually_exclusive_group(required=True)
    source.add_argument('--path', help='Path JSON file')
    source.add_argument('--oscillating', type=int, metavar='n', help='Builtin oscillating path x(n)')
    sig.add_argument('--segments', type=int, default=20000, help='Segments for --oscillating (default: 20000)')
    sig.add_argument('--depth', type=int, default=2, help='Truncation depth N (default: 2)')

    fl = sub.add_parser('flow', help='Flow of a field, optionally with its Jacobian')
    fl.add_argument('--vf', required=True, help='Vector-field family JSON file')
    which = fl.add_mutually_exclusive_group(required=True)
    which.add_argument('--index', type=int, help='0-based field index')
    which.add_argument('--direction', help='JSON array u: flow of Σ u_i f^i')
    fl.add_argument('--time', type=float, required=True, help='Signed flow time')
    fl.add_argument('--start', required=True, help='JSON array start point')
    fl.add_argument('--step', type=float, help='Fixed RK4 step (default: |t|/max(64, ceil(|t|/0.01)))')
    fl.add_argument('--jacobian', action='store_true', help='Also integrate the variational equation')

    orb = sub.add_parser('orbit-rank', help='Rank of the orbit distribution at a point')
    orb.add_argument('--vf', required=True, help='Vector-field family JSON file')
    orb.add_argument('--point', required=True, help='JSON array base point')
    orb.add_argument('--budget', type=int, help='Sampled D-diffeomorphisms (default: config orbit.budget)')
    orb.add_argument('--seed', type=int, default=0, help='Sampling seed (default: 0)')
    orb.add_argument('--depth', type=int, help='Use iterated Lie brackets up to this depth instead of flows')
    orb.add_argument('--brackets', action='store_true',
                     help='Use iterated Lie brackets up to config orbit.bracket_depth (overridden by --depth)')

    ode = sub.add_parser('solve-ode', help='ODE driven by a piecewise linear path')
    ode.add_argument('--vf', required=True, help='Vector-field family JSON file')
    ode.add_argument('--path', required=True, help='Path JSON file')
    ode.add_argument('--start', help='JSON array start point (default: unit element for signature-ode)')
    ode.add_argument('--csv', help='Also write the trajectory table to this CSV file')

    rde = sub.add_parser('solve-rde', help='RDE driven by a level-2 rough path (log-ODE)')
    rde.add_argument('--vf', required=True, help='Vector-field family JSON file')
    rde.add_argument('--rough', required=True, help='Rough path JSON file')
    rde.add_argument('--start', help='JSON array start point (default: unit element for signature-ode)')
    rde.add_argument('--substeps', type=int, help='RK4 substeps per interval (default: config rde.substeps)')
    rde.add_argument('--csv', help='Also write the trajectory table to this CSV file')

    reach = sub.add_parser('reach', help='Search for a piecewise linear control reaching a target')
    reach.add_argument('--vf', required=True, help='Vector-field family JSON file')
    reach.add_argument('--start', help='JSON array start point (default: unit element for signature-ode)')
    goal = reach.add_mutually_exclusive_group(required=True)
    goal.add_argument('--target', help='JSON array target point')
    goal.add_argument('--rough', help='Rough path JSON file whose RDE terminal is the target')
    _add_search_flags(reach)
    reach.add_argument('--segments', type=int, help='Control segments K (default: config reach.segments)')
    reach.add_argument('--restarts', type=int, help='Random restarts (default: config reach.restarts)')

    verify = sub.add_parser('verify', help='RDE terminal, reaching control and orbit-rank check')
    verify.add_argument('--vf', required=True, help='Vector-field family JSON file')
    verify.add_argument('--rough', required=True, help='Rough path JSON file')
    verify.add_argument('--start', help='JSON array start point (default: unit element for signature-ode)')
    _add_search_flags(verify)

    return parser


def _add_search_flags(parser: argparse.ArgumentParser):
    parser.add_argument('--horizon', type=float, help='Control horizon T (default: config reach.horizon)')
    parser.add_argument('--tol', type=float, help='Endpoint tolerance (default: config reach.tolerance)')
    parser.add_argument('--seed', type=int, default=0, help='Search seed (default: 0)')


# ============================================================================
# Subcommand handlers
# ============================================================================

def _start_point(text: Optional[str], family: VectorFieldFamily) -> np.ndarray:
    if text is not None:
        start = load_vector(text, 'start')
    elif family.builtin == 'signature-ode':
        start = TruncatedTensor.identity(family.parameters['n'], family.parameters['N']).flatten()
    else:
        raise InputError("--start is required for this family")
    if start.size != family.dimension:
        raise InputError(f"start point has {start.size} coordinates, family lives on R^{family.dimension}")
    return start


def run_sig(config: RunConfig, manager: ConfigManager) -> Tuple[int, Dict[str, Any]]:
    if config.option('path') is not None:
        path = load_path(config.option('path'))
    else:
        path = oscillating_path(config.option('oscillating'), config.option('segments'))
    result = sig_pl(path, config.option('depth'))
    check = shuffle_check(result.group, float(manager.get('tensor.shuffle_tol', 1e-10)))
    report = dict(result.group.to_json())
    report['interval'] = list(result.interval)
    report['shuffle_check'] = {'passed': check.passed, 'violation': check.violation}
    return EXIT_OK, report


def run_flow(config: RunConfig, manager: ConfigManager) -> Tuple[int, Dict[str, Any]]:
    family = load_family(config.option('vf'))
    direction = config.option('direction')
    request = FlowRequest(start=_start_point(config.option('start'), family), time=config.option('time'),
                          index=config.option('index'),
                          direction=load_vector(direction, 'direction') if direction is not None else None,
                          step=config.option('step'))
    settings = IntegratorSettings.from_config(manager)
    if not config.option('jacobian', False):
        return EXIT_OK, {'endpoint': flow(family, request, settings)}
    result = flow_with_jacobian(family, request, settings)
    return EXIT_OK, {'endpoint': result.endpoint, 'jacobian': result.jacobian,
                     'near_singular': result.near_singular}


def run_orbit_rank(config: RunConfig, manager: ConfigManager) -> Tuple[int, Dict[str, Any]]:
    family = load_family(config.option('vf'))
    point = _start_point(config.option('point'), family)
    sampling = SamplingSettings.from_config(manager)
    depth = config.option('depth')
    if depth is None and config.option('brackets', False):
        depth = sampling.bracket_depth
    if depth is not None:
        rank, singular_values, basis = bracket_span_rank(family, point, depth, sampling.rank_tol)
        generators = [{'bracket': list(word)} for word, _ in iterated_brackets(family, depth)]
        return EXIT_OK, {'mode': 'bracket', 'point': point, 'depth': depth, 'rank': rank,
                         'singular_values': singular_values, 'basis': basis.T, 'generators': generators}
    estimate = distribution_rank(family, point, config.option('budget'), config.option('seed', 0), sampling,
                                 IntegratorSettings.from_config(manager), manager.thread_cap(config.threads))
    report = {'mode': 'flow'}
    report.update(estimate.to_json())
    return EXIT_OK, report


def _solution_report(solution, config: RunConfig) -> Dict[str, Any]:
    if config.option('csv') is not None:
        ReportGenerator.export_trajectory_csv(solution, config.option('csv'))
    return solution.to_json()


def run_solve_ode(config: RunConfig, manager: ConfigManager) -> Tuple[int, Dict[str, Any]]:
    family = load_family(config.option('vf'))
    path = load_path(config.option('path'))
    start = _start_point(config.option('start'), family)
    solution = solve_ode(family, path, start, IntegratorSettings.from_config(manager))
    return EXIT_OK, _solution_report(solution, config)


def run_solve_rde(config: RunConfig, manager: ConfigManager) -> Tuple[int, Dict[str, Any]]:
    family = load_family(config.option('vf'))
    rough = load_rough_path(config.option('rough'))
    start = _start_point(config.option('start'), family)
    substeps = config.option('substeps', int(manager.get('rde.substeps', 64)))
    solution = solve_rde(family, rough, start, substeps, IntegratorSettings.from_config(manager))
    return EXIT_OK, _solution_report(solution, config)


def _reach_result(report: ReachReport) -> Tuple[int, Dict[str, Any]]:
    payload = report.to_json()
    payload['realized_path'] = realize(report.control).to_json()
    return (EXIT_OK if report.converged else EXIT_SEARCH_FAILED), payload


def run_reach(config: RunConfig, manager: ConfigManager) -> Tuple[int, Dict[str, Any]]:
    family = load_family(config.option('vf'))
    start = _start_point(config.option('start'), family)
    settings = ShootingSettings.from_config(manager)
    integrator = IntegratorSettings.from_config(manager)
    search = dict(horizon=config.option('horizon', float(manager.get('reach.horizon', 1.0))),
                  segments=config.option('segments'), tol=config.option('tol'),
                  restarts=config.option('restarts'), seed=config.option('seed', 0), settings=settings,
                  threads=manager.thread_cap(config.threads))
    if config.option('rough') is not None:
        rough = load_rough_path(config.option('rough'))
        report = reach_from_rough(family, start, rough, substeps=int(manager.get('rde.substeps', 64)),
                                  integrator=integrator, **search)
    else:
        target = load_vector(config.option('target'), 'target')
        if target.size != family.dimension:
            raise InputError(f"target has {target.size} coordinates, family lives on R^{family.dimension}")
        report = reach_shooting(family, start, target, integrator=integrator, **search)
    return _reach_result(report)


def run_verify(config: RunConfig, manager: ConfigManager) -> Tuple[int, Dict[str, Any]]:
    family = load_family(config.option('vf'))
    rough = load_rough_path(config.option('rough'))
    start = _start_point(config.option('start'), family)
    report = verify_accessibility(family, start, rough, horizon=config.option('horizon'),
                                  tol=config.option('tol'), seed=config.option('seed', 0),
                                  substeps=int(manager.get('rde.substeps', 64)),
                                  settings=ShootingSettings.from_config(manager),
                                  sampling=SamplingSettings.from_config(manager),
                                  integrator=IntegratorSettings.from_config(manager),
                                  threads=manager.thread_cap(config.threads))
    return _reach_result(report)


HANDLERS = {
    'sig': run_sig,
    'flow': run_flow,
    'orbit-rank': run_orbit_rank,
    'solve-ode': run_solve_ode,
    'solve-rde': run_solve_rde,
    'reach': run_reach,
    'verify': run_verify,
}


# ============================================================================
# Entry points
# ============================================================================

def configure_logging(level: str):
    logging.basicConfig(level=getattr(logging, level.upper(), logging.INFO), stream=sys.stderr,
                        format='%(levelname)s %(name)s: %(message)s', force=True)


def run(config: RunConfig, manager: Optional[ConfigManager] = None) -> Tuple[int, Dict[str, Any]]:
    """Execute one subcommand; returns the exit status and the JSON report"""
    manager = manager or ConfigManager(config.config_path)
    TruncatedTensor.max_depth = int(manager.get('tensor.max_depth', TruncatedTensor.max_depth))
    LieElement.default_tol = float(manager.get('tensor.lie_tol', LieElement.default_tol))
    if config.command not in HANDLERS:
        raise InputError(f"unknown command {config.command!r}; choose from {', '.join(COMMANDS)}")
    logger.debug("Running %s with %s", config.command, config.options)
    return HANDLERS[config.command](config, manager)


def _error_line(error: ToolkitError) -> str:
    return json.dumps({'error': error.kind, 'message': str(error)})


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        namespace = build_parser().parse_args(argv)
        config = RunConfig.from_namespace(namespace)
        manager = ConfigManager(config.config_path)
        configure_logging(config.log_level or str(manager.get('system_settings.log_level', 'INFO')))
        status, report = run(config, manager)
        ReportGenerator(report).write(config.output)
    except ToolkitError as e:
        sys.stderr.write(_error_line(e) + '\n')
        return EXIT_ERROR
    except OSError as e:
        sys.stderr.write(_error_line(InputError(str(e))) + '\n')
        return EXIT_ERROR

    if status == EXIT_SEARCH_FAILED:
        logger.warning("❌ Search failed: status %s", report.get('status'))
    return status
