# rde_solver.py
"""
Controlled equations driven by piecewise linear paths and by level-2
geometric rough paths (log-ODE scheme)
"""

import logging
from typing import Optional, Sequence

import numpy as np

from ..config.data_structures import PiecewiseLinearPath, RDESolution, RoughPathL2
from ..core.exceptions import DimensionError, DomainError
from ..core.tensor_algebra import LieElement, TruncatedTensor, tensor_mul
from ..fields.flows import IntegratorSettings, rk4
from ..fields.vector_fields import VectorFieldFamily

logger = logging.getLogger(__name__)

DEFAULT_SUBSTEPS = 64


# ============================================================================
# Builtin Rough Paths
# ============================================================================

def pl_lift(path: PiecewiseLinearPath) -> RoughPathL2:
    """Canonical lift: drift = segment increment, zero area, on the path's own breakpoints"""
    n = path.dimension
    return RoughPathL2(times=path.times, drifts=path.increments,
                       areas=np.zeros((path.segment_count, n, n)), start=path.points[0])


def pure_area(n: int, plane: Sequence[int], area: float, intervals: int = 1,
              horizon: float = 1.0) -> RoughPathL2:
    """
    Zero-trace rough path carrying `area` in the coordinate plane (i, j),
    spread evenly over `intervals` equal intervals of [0, horizon].
    Plane indices are 0-based.
    """
    i, j = int(plane[0]), int(plane[1])
    if i == j:
        raise DomainError("a pure-area rough path needs two distinct coordinates")
    if not (0 <= i < n and 0 <= j < n):
        raise DomainError(f"plane {(i, j)} out of range for R^{n}")
    if intervals < 1:
        raise DomainError(f"interval count must be positive, got {intervals}")
    if not horizon > 0:
        raise DomainError(f"horizon must be positive, got {horizon}")
    step_area = area / intervals
    mu = np.zeros((n, n))
    mu[i, j] = step_area
    mu[j, i] = -step_area
    return RoughPathL2(times=np.linspace(0.0, horizon, intervals + 1), drifts=np.zeros((intervals, n)),
                       areas=np.repeat(mu[None, :, :], intervals, axis=0), start=np.zeros(n))


def refine(rough: RoughPathL2, factor: int) -> RoughPathL2:
    """Split each interval into `factor` equal pieces with proportional drift and area"""
    if factor < 1:
        raise DomainError(f"refinement factor must be positive, got {factor}")
    if factor == 1 or rough.interval_count == 0:
        return rough
    times = [rough.times[0]]
    for a, b in zip(rough.times[:-1], rough.times[1:]):
        times.extend(np.linspace(a, b, factor + 1)[1:])
    times[-1] = rough.times[-1]
    drifts = np.repeat(rough.drifts / factor, factor, axis=0)
    areas = np.repeat(rough.areas / factor, factor, axis=0)
    return RoughPathL2(times=times, drifts=drifts, areas=areas, start=rough.start)


def total_signature(rough: RoughPathL2) -> TruncatedTensor:
    """Chen product of exp(λ_k + μ_k) over the intervals, at depth 2"""
    result = TruncatedTensor.identity(rough.dimension, 2)
    for drift, area in zip(rough.drifts, rough.areas):
        result = tensor_mul(result, LieElement.from_drift_area(drift, area).exp())
    return result


# ============================================================================
# Solvers
# ============================================================================

def _check_dimensions(family: VectorFieldFamily, width: int, start: np.ndarray):
    if width != family.size:
        raise DimensionError(f"driver lives in R^{width} but the family has {family.size} fields")
    if start.size != family.dimension:
        raise DimensionError(f"start point has {start.size} coordinates, family lives on R^{family.dimension}")


def solve_rde(family: VectorFieldFamily, rough: RoughPathL2, start: Sequence[float],
              substeps: int = DEFAULT_SUBSTEPS,
              settings: IntegratorSettings = IntegratorSettings()) -> RDESolution:
    """
    Log-ODE scheme: over each partition interval integrate the autonomous
    field Σ λ_i f^i + Σ_{i<j} μ_ij [f^i, f^j] for unit parameter time in
    `substeps` RK4 steps. The field is rescaled to the interval's real
    duration so blow-up reports carry real times.
    """
    y = np.array(start, dtype=float)
    _check_dimensions(family, rough.dimension, y)
    if substeps < 1:
        raise DomainError(f"substeps must be positive, got {substeps}")

    states = [y.copy()]
    for k in range(rough.interval_count):
        dt = float(rough.times[k + 1] - rough.times[k])
        drift, area = rough.drifts[k], rough.areas[k]
        if np.any(drift != 0.0) or np.any(area != 0.0):
            field = family.log_ode_field(drift / dt, area / dt)
            y = rk4(field.evaluate, y, dt, substeps, settings.blowup_threshold, t0=float(rough.times[k]))
        states.append(y.copy())

    logger.debug("Log-ODE solve over %d intervals, terminal %s", rough.interval_count, y.tolist())
    return RDESolution(times=rough.times, states=np.array(states), scheme='log-ode', substeps=substeps)


def solve_ode(family: VectorFieldFamily, path: PiecewiseLinearPath, start: Sequence[float],
              settings: IntegratorSettings = IntegratorSettings()) -> RDESolution:
    """dy = f(y) dx for a piecewise linear x: flow along Σ (Δ_i/Δt) f^i on each segment"""
    y = np.array(start, dtype=float)
    _check_dimensions(family, path.dimension, y)

    states = [y.copy()]
    most_steps = settings.min_steps
    for k, (increment, dt) in enumerate(zip(path.increments, path.durations)):
        if np.any(increment != 0.0):
            field = family.combination(increment / dt)
            steps = settings.steps_for(dt)
            most_steps = max(most_steps, steps)
            y = rk4(field.evaluate, y, float(dt), steps, settings.blowup_threshold, t0=float(path.times[k]))
        states.append(y.copy())

    # substeps reports the largest RK4 step count used on any segment
    return RDESolution(times=path.times, states=np.array(states), scheme='rk4', substeps=most_steps)


def null_rough_path(n: int, times: Optional[Sequence[float]] = None) -> RoughPathL2:
    times = np.array([0.0, 1.0] if times is None else times, dtype=float)
    intervals = times.size - 1
    return RoughPathL2(times=times, drifts=np.zeros((intervals, n)), areas=np.zeros((intervals, n, n)),
                       start=np.zeros(n))
