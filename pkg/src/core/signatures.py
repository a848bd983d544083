# signatures.py
"""
Truncated signatures of piecewise linear paths via Chen's identity
"""

import logging
from typing import Optional

import numpy as np

from ..config.data_structures import PiecewiseLinearPath, SignatureResult
from .exceptions import DimensionError, DomainError
from .tensor_algebra import TruncatedTensor, tensor_mul

logger = logging.getLogger(__name__)

INTERVAL_TOL = 1e-12


def sig_pl(path: PiecewiseLinearPath, depth: int) -> SignatureResult:
    """
    Order-N signature as the Chen product of segment exponentials.

    Levels are updated in place, top level first, so that every update reads
    the lower levels of the running product before they change.
    """
    if depth < 1:
        raise DomainError(f"signature depth must be at least 1, got {depth}")

    n = path.dimension
    levels = [np.zeros(n ** k) for k in range(depth + 1)]
    levels[0][0] = 1.0

    for v in path.increments:
        powers = [None, v]
        for j in range(2, depth + 1):
            powers.append(np.outer(powers[-1], v).reshape(-1) / j)
        for k in range(depth, 0, -1):
            update = powers[k].copy()
            for j in range(1, k):
                update += np.outer(levels[k - j], powers[j]).reshape(-1)
            levels[k] += update
    # level 1 is the total increment; endpoints make it exact for closed loops
    levels[1] = path.points[-1] - path.points[0]

    logger.debug("Signature of %d segments at depth %d", path.segment_count, depth)
    return SignatureResult(TruncatedTensor(n, depth, levels), path.interval)


def chen_concat(s1: SignatureResult, s2: SignatureResult) -> SignatureResult:
    """Signature of the concatenation: S(x*y) = S(x) ⊗ S(y)"""
    if s1.width != s2.width or s1.depth != s2.depth:
        raise DimensionError(
            f"cannot concatenate signatures (n={s1.width}, N={s1.depth}) and (n={s2.width}, N={s2.depth})")

    interval = None
    if s1.interval is not None and s2.interval is not None:
        gap = abs(s1.interval[1] - s2.interval[0])
        if gap > INTERVAL_TOL * max(1.0, abs(s1.interval[1])):
            raise DomainError(f"intervals do not join: {s1.interval} then {s2.interval}")
        interval = (s1.interval[0], s2.interval[1])
    return SignatureResult(tensor_mul(s1.group, s2.group), interval)


def reverse(path: PiecewiseLinearPath) -> PiecewiseLinearPath:
    """Run the path backwards over the same time interval"""
    t0, t1 = path.interval
    return PiecewiseLinearPath(t0 + t1 - path.times[::-1], path.points[::-1])


def reparametrize(path: PiecewiseLinearPath, horizon: float, start: float = 0.0) -> PiecewiseLinearPath:
    """Affine time change onto [start, start + horizon]"""
    if not horizon > 0:
        raise DomainError(f"horizon must be positive, got {horizon}")
    t0, t1 = path.interval
    if path.times.size == 1:
        return PiecewiseLinearPath([start], path.points)
    times = start + (path.times - t0) * (horizon / (t1 - t0))
    times[-1] = start + horizon
    return PiecewiseLinearPath(times, path.points)


def concatenate(first: PiecewiseLinearPath, second: PiecewiseLinearPath) -> PiecewiseLinearPath:
    """first * second: second is translated to start where first ends and shifted in time"""
    if first.dimension != second.dimension:
        raise DimensionError(f"cannot concatenate paths in R^{first.dimension} and R^{second.dimension}")
    shift_t = first.times[-1] - second.times[0]
    shift_x = first.points[-1] - second.points[0]
    times = np.concatenate([first.times, second.times[1:] + shift_t])
    points = np.vstack([first.points, second.points[1:] + shift_x])
    return PiecewiseLinearPath(times, points)


def path_length(path: PiecewiseLinearPath) -> float:
    return float(np.sum(np.linalg.norm(path.increments, axis=1)))


def oscillating_path(n: int, segments: int, horizon: float = 1.0,
                     area_preserving: bool = True) -> PiecewiseLinearPath:
    """
    Polygonal sample of t -> (cos(2π n² t)/n, sin(2π n² t)/n) on [0, horizon].

    Inscribed vertices lose a relative O(θ²) of the enclosed area, θ being
    the angle per segment. With `area_preserving` the vertices sit on the
    radius ρ with segments·ρ²·sin(θ)/2 equal to the swept area of the curve,
    so the polygon's level-2 antisymmetric part matches the curve's exactly.
    """
    if n < 1 or segments < 1:
        raise DomainError("oscillation index and segment count must be positive")
    t = np.linspace(0.0, horizon, segments + 1)
    phase = 2.0 * np.pi * n ** 2 * t
    radius = 1.0 / n
    theta = 2.0 * np.pi * n ** 2 * horizon / segments
    if area_preserving and 0.0 < theta < np.pi:
        radius *= np.sqrt(theta / np.sin(theta))
    points = radius * np.column_stack([np.cos(phase), np.sin(phase)])
    if float(n ** 2 * horizon).is_integer():
        # whole turns: the curve closes
        points[-1] = points[0]
    return PiecewiseLinearPath(t, points)


def axis_path(index: int, time: float, dimension: int, start: Optional[float] = 0.0) -> PiecewiseLinearPath:
    """s -> s·sign(t)·e_i over [0, |t|]; its ODE solution is the flow of f^i for time t"""
    if not 0 <= index < dimension:
        raise DomainError(f"axis index {index} out of range for R^{dimension}")
    if time == 0:
        raise DomainError("axis path needs a nonzero time")
    end = np.zeros(dimension)
    end[index] = time
    return PiecewiseLinearPath([start, start + abs(time)], np.vstack([np.zeros(dimension), end]))
