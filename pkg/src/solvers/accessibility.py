# accessibility.py
"""
Accessibility solver: piecewise linear controls whose ODE endpoint matches a
prescribed terminal state.

In the step-2 signature group the control is built exactly (one straight
segment for the increment, one square loop per coordinate plane for the
area). For general families the control is searched for by multi-start
Levenberg-Marquardt shooting over the segment directions.
"""

import concurrent.futures
import logging
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence

import numpy as np
from scipy.optimize import least_squares

from ..config.data_structures import ControlProgram, DDiffeo, PiecewiseLinearPath, ReachReport, RoughPathL2
from ..core.exceptions import BlowUpError, DimensionError, DomainError, EvaluationError
from ..core.signatures import path_length
from ..core.tensor_algebra import (TruncatedTensor, segment_exp, shuffle_check, tensor_inverse,
                                   tensor_mul)
from ..fields.flows import IntegratorSettings
from ..fields.vector_fields import VectorFieldFamily
from ..orbits.distribution import SamplingSettings, rank_profile
from .rde_solver import DEFAULT_SUBSTEPS, solve_ode, solve_rde

logger = logging.getLogger(__name__)

GROUP_TOL = 1e-8


@dataclass(frozen=True)
class ShootingSettings:
    """Search parameters for reach_shooting"""
    segments: int = 4
    tolerance: float = 1e-6
    restarts: int = 8
    round_size: int = 4
    fd_step: float = 1e-6
    max_nfev: int = 2000
    regularization: float = 1e-8

    @classmethod
    def from_config(cls, config) -> 'ShootingSettings':
        return cls(segments=int(config.get('reach.segments', cls.segments)),
                   tolerance=float(config.get('reach.tolerance', cls.tolerance)),
                   restarts=int(config.get('reach.restarts', cls.restarts)),
                   round_size=int(config.get('reach.round_size', cls.round_size)),
                   fd_step=float(config.get('reach.fd_step', cls.fd_step)),
                   max_nfev=int(config.get('reach.max_nfev', cls.max_nfev)),
                   regularization=float(config.get('reach.regularization', cls.regularization)))


class StartOutcome(NamedTuple):
    index: int
    directions: Optional[np.ndarray]
    residual: float
    nfev: int


# ============================================================================
# Control programs
# ============================================================================

def realize(control: ControlProgram) -> PiecewiseLinearPath:
    """Path starting at the origin at time 0 with increments u_k·τ_k"""
    times = np.concatenate([[0.0], np.cumsum(control.durations)])
    times[-1] = control.horizon
    points = np.vstack([np.zeros(control.dimension), np.cumsum(control.increments, axis=0)])
    return PiecewiseLinearPath(times, points)


def _control_from_increments(increments: Sequence[np.ndarray], horizon: float, width: int) -> ControlProgram:
    """Durations proportional to segment length, rescaled to the horizon"""
    if not horizon > 0:
        raise DomainError(f"horizon must be positive, got {horizon}")
    increments = [np.asarray(v, dtype=float) for v in increments if np.any(v != 0.0)]
    if not increments:
        return ControlProgram(horizon, np.zeros((1, width)), [horizon])
    lengths = np.array([np.linalg.norm(v) for v in increments])
    durations = horizon * lengths / lengths.sum()
    durations[-1] = horizon - durations[:-1].sum()
    directions = np.array([v / tau for v, tau in zip(increments, durations)])
    return ControlProgram(horizon, directions, durations)


def rescale_control(control: ControlProgram, factor: float) -> ControlProgram:
    """Durations × c, directions / c: same increments over the horizon c·T"""
    if not factor > 0:
        raise DomainError(f"rescaling factor must be positive, got {factor}")
    return ControlProgram(control.horizon * factor, control.directions / factor, control.durations * factor)


def ddiffeo_to_control(g: DDiffeo, horizon: float, width: int) -> ControlProgram:
    """
    Each stage (i, t_i) becomes a segment along sign(t_i)·e_i with duration
    T·|t_i|/Σ|t_j|; the controlled ODE started at y then ends at g(y).
    """
    increments = []
    for index, time in g.stages:
        if not 0 <= index < width:
            raise DomainError(f"stage field index {index} out of range for R^{width}")
        step = np.zeros(width)
        step[index] = time
        increments.append(step)
    # Axis increments have length |t_i|, so proportional durations give T·|t_i|/Σ|t_j|
    return _control_from_increments(increments, horizon, width)


# ============================================================================
# Exact construction in G^(2)
# ============================================================================

def reach_step2_exact(target: TruncatedTensor, horizon: float = 1.0, tol: float = GROUP_TOL) -> ControlProgram:
    """
    Control whose depth-2 signature equals `target`.

    The straight segment v = level-1 of the target leaves the residual
    exp(v)^{-1} ⊗ target, which is pure area. Each antisymmetric coefficient
    A_ij (i < j) is produced by a square loop of side sqrt|A_ij| traversed
    e_i, e_j, -e_i, -e_j (counter-clockwise, positive area) or in the
    opposite sense for negative area. Pure-area elements commute, so the
    loop order does not matter.
    """
    if target.depth != 2:
        raise DomainError(f"exact construction works in G^(2), got depth {target.depth}")
    if not horizon > 0:
        raise DomainError(f"horizon must be positive, got {horizon}")
    if target.scalar != 1.0:
        raise DomainError("target not group-like: scalar level is not 1")
    check = shuffle_check(target, tol)
    if not check.passed:
        raise DomainError(f"target not group-like: shuffle violation {check.violation:.3e}")

    n = target.width
    v = target.level(1).copy()
    residual = tensor_mul(tensor_inverse(segment_exp(v, 2)), target)
    level2 = residual.level_tensor(2)
    area = (level2 - level2.T) / 2.0

    increments: List[np.ndarray] = [v]
    eye = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            a = area[i, j]
            if a == 0.0:
                continue
            side = np.sqrt(abs(a))
            first, second = (eye[i], eye[j]) if a > 0 else (eye[j], eye[i])
            increments.extend([side * first, side * second, -side * first, -side * second])

    control = _control_from_increments(increments, horizon, n)
    logger.debug("Exact step-2 control with %d segments", control.segment_count)
    return control


def _is_signature_family(family: VectorFieldFamily, depth: Optional[int] = None) -> bool:
    if family.builtin != 'signature-ode':
        return False
    return depth is None or family.parameters.get('N') == depth


def _step2_target(family: VectorFieldFamily, start: np.ndarray, target: np.ndarray) -> Optional[TruncatedTensor]:
    """inverse(ξ) ⊗ target for the N=2 signature family, or None when ξ is not group-like"""
    n = family.parameters['n']
    origin = TruncatedTensor.from_flat(n, 2, start)
    goal = TruncatedTensor.from_flat(n, 2, target)
    if origin.scalar != 1.0 or goal.scalar != 1.0:
        return None
    return tensor_mul(tensor_inverse(origin), goal)


# ============================================================================
# Shooting
# ============================================================================

class _Shooter:
    """Residual map from K segment directions to the ODE endpoint error"""

    def __init__(self, family: VectorFieldFamily, start: np.ndarray, target: np.ndarray, horizon: float,
                 segments: int, settings: ShootingSettings, integrator: IntegratorSettings):
        self.family = family
        self.start = start
        self.target = target
        self.horizon = horizon
        self.segments = segments
        self.settings = settings
        self.integrator = integrator
        self.durations = np.full(segments, horizon / segments)
        self.durations[-1] = horizon - self.durations[:-1].sum()

    def control(self, x: np.ndarray) -> ControlProgram:
        return ControlProgram(self.horizon, x.reshape(self.segments, self.family.size), self.durations)

    def endpoint(self, x: np.ndarray) -> np.ndarray:
        return solve_ode(self.family, realize(self.control(x)), self.start, self.integrator).terminal

    def residuals(self, x: np.ndarray) -> np.ndarray:
        return np.concatenate([self.endpoint(x) - self.target, self.settings.regularization * x])

    def run(self, index: int, x0: np.ndarray) -> StartOutcome:
        try:
            result = least_squares(self.residuals, x0, method='lm', diff_step=self.settings.fd_step,
                                   ftol=1e-14, xtol=1e-14, gtol=1e-14, max_nfev=self.settings.max_nfev)
            residual = float(np.linalg.norm(self.endpoint(result.x) - self.target))
        except (BlowUpError, EvaluationError) as e:
            logger.debug("Start %d abandoned: %s", index, e)
            return StartOutcome(index, None, np.inf, 0)
        logger.debug("Start %d finished with residual %.3e after %d evaluations", index, residual, result.nfev)
        return StartOutcome(index, result.x, residual, int(result.nfev))


def _initial_guesses(family: VectorFieldFamily, start: np.ndarray, target: np.ndarray, horizon: float,
                     segments: int, restarts: int, seed: int) -> List[np.ndarray]:
    """Constant-direction seed, axis-split seed, then seeded random restarts"""
    n = family.size
    frame = family.frame(start)
    u, *_ = np.linalg.lstsq(frame, (target - start) / horizon, rcond=None)

    guesses = [np.tile(u, segments)]

    axis_split = np.zeros((segments, n))
    counts = np.bincount(np.arange(segments) % n, minlength=n)
    for k in range(segments):
        i = k % n
        axis_split[k, i] = u[i] * segments / counts[i]
    guesses.append(axis_split.reshape(-1))

    scale = 1.0 + float(np.linalg.norm(u))
    for r in range(restarts):
        rng = np.random.default_rng([seed, r])
        guesses.append(rng.normal(0.0, scale, size=segments * n))
    return guesses


def _report(family: VectorFieldFamily, start: np.ndarray, target: np.ndarray, control: ControlProgram,
            status: str, tol: float, integrator: IntegratorSettings, **extra) -> ReachReport:
    """Recompute the endpoint of the control independently and assemble the report"""
    path = realize(control)
    achieved = solve_ode(family, path, start, integrator).terminal
    residual = float(np.linalg.norm(achieved - target))
    if status in ('exact', 'converged') and residual > tol:
        status = 'failed'
    return ReachReport(status=status, control=control, achieved=achieved, target=target, residual=residual,
                       path_length=path_length(path), **extra)


def reach_shooting(family: VectorFieldFamily, start: Sequence[float], target: Sequence[float],
                   horizon: float = 1.0, segments: Optional[int] = None, tol: Optional[float] = None,
                   restarts: Optional[int] = None, seed: int = 0,
                   settings: ShootingSettings = ShootingSettings(),
                   integrator: IntegratorSettings = IntegratorSettings(),
                   threads: int = 1) -> ReachReport:
    """
    Search for K equal-duration segments whose ODE endpoint from `start` hits `target`.

    Starts are run in rounds of `settings.round_size`; the search stops after
    the first round containing a converged start and keeps the lowest
    residual, ties going to the lower start index. Round composition does
    not depend on the thread count, so reports are reproducible.
    """
    start = np.array(start, dtype=float)
    target = np.array(target, dtype=float)
    segments = settings.segments if segments is None else segments
    tol = settings.tolerance if tol is None else tol
    restarts = settings.restarts if restarts is None else restarts
    if start.size != family.dimension or target.size != family.dimension:
        raise DimensionError(f"start and target must lie in R^{family.dimension}")
    if not tol > 0:
        raise DomainError(f"tolerance must be positive, got {tol}")
    if segments < 1:
        raise DomainError(f"segment count must be positive, got {segments}")
    if not horizon > 0:
        raise DomainError(f"horizon must be positive, got {horizon}")
    common = dict(seed=seed)

    if _is_signature_family(family, depth=2):
        group_target = _step2_target(family, start, target)
        if group_target is not None and shuffle_check(group_target, GROUP_TOL).passed:
            control = reach_step2_exact(group_target, horizon)
            report = _report(family, start, target, control, 'exact', tol, integrator, start_index=0, **common)
            if report.converged:
                return report
            logger.info("Exact step-2 control missed by %.3e; falling back to shooting", report.residual)

    if np.linalg.norm(target - start) <= tol:
        control = ControlProgram(horizon, np.zeros((1, family.size)), [horizon])
        return _report(family, start, target, control, 'converged', tol, integrator, start_index=0, **common)

    shooter = _Shooter(family, start, target, horizon, segments, settings, integrator)
    guesses = _initial_guesses(family, start, target, horizon, segments, restarts, seed)
    round_size = max(1, settings.round_size)
    outcomes: List[StartOutcome] = []

    with concurrent.futures.ThreadPoolExecutor(max_workers=max(1, min(threads, round_size))) as pool:
        for first in range(0, len(guesses), round_size):
            indices = range(first, min(first + round_size, len(guesses)))
            futures = [pool.submit(shooter.run, k, guesses[k]) for k in indices]
            round_outcomes = [f.result() for f in futures]
            outcomes.extend(round_outcomes)
            if any(o.residual <= tol for o in round_outcomes):
                break

    best = min(outcomes, key=lambda o: (o.residual, o.index))
    used = len(outcomes)
    warnings = []
    if best.directions is None:
        warnings.append("every start blew up during integration")
        control = ControlProgram(horizon, np.zeros((1, family.size)), [horizon])
        return _report(family, start, target, control, 'failed', tol, integrator,
                       restarts_used=used, warnings=warnings, **common)

    status = 'converged' if best.residual <= tol else 'failed'
    if status == 'failed':
        logger.warning("⚠️ No start reached the target: best residual %.3e after %d starts", best.residual, used)
    return _report(family, start, target, shooter.control(best.directions), status, tol, integrator,
                   iterations=best.nfev, restarts_used=used, start_index=best.index, warnings=warnings,
                   **common)


# ============================================================================
# End-to-end verification
# ============================================================================

def verify_accessibility(family: VectorFieldFamily, start: Sequence[float], rough: RoughPathL2,
                         horizon: Optional[float] = None, tol: Optional[float] = None, seed: int = 0,
                         substeps: int = DEFAULT_SUBSTEPS,
                         settings: ShootingSettings = ShootingSettings(),
                         sampling: SamplingSettings = SamplingSettings(),
                         integrator: IntegratorSettings = IntegratorSettings(),
                         threads: int = 1) -> ReachReport:
    """
    Solve the RDE, then find a piecewise linear control reaching its terminal
    state, and check the rank of P_D along the RDE trajectory.
    """
    start = np.array(start, dtype=float)
    tol = settings.tolerance if tol is None else tol
    if horizon is None:
        horizon = rough.horizon if rough.horizon > 0 else 1.0

    solution = solve_rde(family, rough, start, substeps, integrator)
    terminal = solution.terminal
    report = reach_shooting(family, start, terminal, horizon=horizon, tol=tol, seed=seed,
                            settings=settings, integrator=integrator, threads=threads)

    ranks, consistent = rank_profile(family, solution.states, seed=seed, settings=sampling,
                                     integrator=integrator, threads=threads)
    report.rank_profile = ranks
    report.rank_consistent = consistent
    report.rde_terminal = terminal
    if not consistent:
        report.warnings.append(f"distribution rank varies along the RDE trajectory: {ranks}")
    return report


def reach_from_rough(family: VectorFieldFamily, start: Sequence[float], rough: RoughPathL2,
                     horizon: float = 1.0, substeps: int = DEFAULT_SUBSTEPS,
                     integrator: IntegratorSettings = IntegratorSettings(), **kwargs) -> ReachReport:
    """reach_shooting towards the terminal state of the RDE driven by `rough`"""
    terminal = solve_rde(family, rough, start, substeps, integrator).terminal
    report = reach_shooting(family, start, terminal, horizon=horizon, integrator=integrator, **kwargs)
    report.rde_terminal = terminal
    return report
