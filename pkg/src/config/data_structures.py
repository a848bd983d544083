# data_structures.py
"""
Core data classes shared across the toolkit
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from ..core.exceptions import DimensionError, DomainError
from ..core.tensor_algebra import TruncatedTensor


def _frozen_array(values, ndim: int, name: str) -> np.ndarray:
    array = np.array(values, dtype=float)
    if array.ndim != ndim:
        raise DimensionError(f"{name} must be {ndim}-dimensional, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise DomainError(f"{name} contains non-finite values")
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class PiecewiseLinearPath:
    """Breakpoint times and values of a polygonal path in R^n"""
    times: np.ndarray
    points: np.ndarray

    def __post_init__(self):
        times = _frozen_array(self.times, 1, "times")
        points = _frozen_array(self.points, 2, "points")
        if times.size < 1:
            raise DomainError("a path needs at least one point")
        if points.shape[0] != times.size:
            raise DimensionError(f"{times.size} times but {points.shape[0]} points")
        if np.any(np.diff(times) <= 0):
            raise DomainError("path times must be strictly increasing")
        object.__setattr__(self, 'times', times)
        object.__setattr__(self, 'points', points)

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    @property
    def segment_count(self) -> int:
        return self.times.size - 1

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.points, axis=0)

    @property
    def durations(self) -> np.ndarray:
        return np.diff(self.times)

    @property
    def interval(self) -> Tuple[float, float]:
        return float(self.times[0]), float(self.times[-1])

    def to_json(self) -> Dict[str, Any]:
        return {'n': self.dimension, 'times': self.times.tolist(), 'points': self.points.tolist()}

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> 'PiecewiseLinearPath':
        try:
            path = cls(data['times'], data['points'])
        except KeyError as e:
            raise DomainError(f"path JSON is missing field {e}") from None
        if 'n' in data and int(data['n']) != path.dimension:
            raise DimensionError(f"path declares n={data['n']} but points have dimension {path.dimension}")
        return path


@dataclass(frozen=True, eq=False)
class SignatureResult:
    """Truncated signature S_N(x) of a path over its source interval"""
    group: TruncatedTensor
    interval: Optional[Tuple[float, float]] = None

    @property
    def width(self) -> int:
        return self.group.width

    @property
    def depth(self) -> int:
        return self.group.depth


@dataclass(frozen=True, eq=False)
class RoughPathL2:
    """Level-2 geometric rough path: per-interval drift λ_k and antisymmetric area μ_k"""
    times: np.ndarray
    drifts: np.ndarray
    areas: np.ndarray
    start: np.ndarray

    def __post_init__(self):
        times = _frozen_array(self.times, 1, "times")
        start = _frozen_array(self.start, 1, "start")
        if times.size < 1:
            raise DomainError("a rough path needs at least one partition time")
        n = start.size
        intervals = times.size - 1
        try:
            drifts = np.array(self.drifts, dtype=float).reshape(intervals, n)
            areas = np.array(self.areas, dtype=float).reshape(intervals, n, n)
        except ValueError:
            raise DimensionError(f"{intervals} intervals in R^{n} need drifts of shape ({intervals}, {n}) "
                                 f"and areas of shape ({intervals}, {n}, {n})") from None
        if np.any(np.diff(times) <= 0):
            raise DomainError("partition times must be strictly increasing")
        if not (np.all(np.isfinite(drifts)) and np.all(np.isfinite(areas))):
            raise DomainError("rough path increments must be finite")
        if np.any(areas + np.transpose(areas, (0, 2, 1)) != 0.0):
            raise DomainError("area matrices must be exactly antisymmetric")
        for name, value in (('times', times), ('drifts', drifts), ('areas', areas), ('start', start)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @property
    def dimension(self) -> int:
        return self.start.size

    @property
    def interval_count(self) -> int:
        return self.times.size - 1

    @property
    def horizon(self) -> float:
        return float(self.times[-1] - self.times[0])

    def to_json(self) -> Dict[str, Any]:
        return {
            'n': self.dimension,
            'times': self.times.tolist(),
            'increments': [{'lambda': lam.tolist(), 'mu': mu.tolist()}
                           for lam, mu in zip(self.drifts, self.areas)],
            'start': self.start.tolist(),
        }

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> 'RoughPathL2':
        try:
            n = int(data['n'])
            increments = data['increments']
            start = data.get('start', [0.0] * n)
            drifts = [inc['lambda'] for inc in increments]
            areas = [inc['mu'] for inc in increments]
            times = data['times']
        except (KeyError, TypeError) as e:
            raise DomainError(f"rough path JSON is malformed: {e}") from None
        if len(increments) != len(times) - 1:
            raise DimensionError(f"{len(times)} partition times need {len(times) - 1} increments, got {len(increments)}")
        return cls(times, np.reshape(np.array(drifts, dtype=float), (-1, n)),
                   np.reshape(np.array(areas, dtype=float), (-1, n, n)), start)


@dataclass(frozen=True, eq=False)
class RDESolution:
    """Trajectory of an RDE/ODE solve sampled at the partition times"""
    times: np.ndarray
    states: np.ndarray
    scheme: str
    substeps: int

    @property
    def terminal(self) -> np.ndarray:
        return self.states[-1]

    def to_json(self) -> Dict[str, Any]:
        return {
            'scheme': self.scheme,
            'substeps': self.substeps,
            'times': self.times.tolist(),
            'states': self.states.tolist(),
            'terminal': self.terminal.tolist(),
        }


@dataclass(frozen=True)
class DDiffeo:
    """Composition f^k_{t_k} ∘ ... ∘ f^1_{t_1}; stages apply first to last"""
    stages: Tuple[Tuple[int, float], ...] = ()

    def __post_init__(self):
        stages = tuple((int(index), float(time)) for index, time in self.stages)
        for index, time in stages:
            if index < 0:
                raise DomainError(f"field index must be non-negative, got {index}")
            if not np.isfinite(time):
                raise DomainError("D-diffeomorphism times must be finite")
        object.__setattr__(self, 'stages', stages)

    def inverse(self) -> 'DDiffeo':
        return DDiffeo(tuple((index, -time) for index, time in reversed(self.stages)))

    def __len__(self) -> int:
        return len(self.stages)

    def to_json(self) -> List[List[float]]:
        return [[index, time] for index, time in self.stages]


@dataclass(frozen=True, eq=False)
class FlowRequest:
    """Flow of field `index` (or of Σ direction_i f^i) for time `time` from `start`"""
    start: np.ndarray
    time: float
    index: Optional[int] = None
    direction: Optional[np.ndarray] = None
    step: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, 'start', _frozen_array(self.start, 1, "start"))
        if not np.isfinite(self.time):
            raise DomainError("flow time must be finite")
        if (self.index is None) == (self.direction is None):
            raise DomainError("give exactly one of a field index or a direction")
        if self.direction is not None:
            object.__setattr__(self, 'direction', _frozen_array(self.direction, 1, "direction"))
        if self.step is not None and not self.step > 0:
            raise DomainError(f"step size must be positive, got {self.step}")


@dataclass
class DistributionEstimate:
    """Estimated P_D(y) with the generators that produced it"""
    point: np.ndarray
    rank: int
    singular_values: np.ndarray
    basis: np.ndarray
    vectors: List[np.ndarray] = field(default_factory=list)
    generators: List[Dict[str, Any]] = field(default_factory=list)
    samples_used: int = 0
    samples_failed: int = 0
    naive_rank: int = 0

    def to_json(self) -> Dict[str, Any]:
        return {
            'point': self.point.tolist(),
            'rank': self.rank,
            'naive_rank': self.naive_rank,
            'singular_values': self.singular_values.tolist(),
            'basis': self.basis.T.tolist(),
            'samples_used': self.samples_used,
            'samples_failed': self.samples_failed,
            'generators': self.generators,
        }


@dataclass(frozen=True, eq=False)
class ControlProgram:
    """Ordered (direction, duration) segments of a piecewise linear control"""
    horizon: float
    directions: np.ndarray
    durations: np.ndarray

    def __post_init__(self):
        durations = _frozen_array(self.durations, 1, "durations")
        directions = np.array(self.directions, dtype=float).reshape(durations.size, -1)
        if not np.all(np.isfinite(directions)):
            raise DomainError("control directions must be finite")
        directions.setflags(write=False)
        if not self.horizon > 0:
            raise DomainError(f"horizon must be positive, got {self.horizon}")
        if np.any(durations <= 0):
            raise DomainError("segment durations must be positive")
        if abs(float(np.sum(durations)) - self.horizon) > 1e-12 * max(1.0, self.horizon):
            raise DomainError(f"durations sum to {np.sum(durations):.17g}, not the horizon {self.horizon:.17g}")
        object.__setattr__(self, 'durations', durations)
        object.__setattr__(self, 'directions', directions)

    @property
    def segment_count(self) -> int:
        return self.durations.size

    @property
    def dimension(self) -> int:
        return self.directions.shape[1]

    @property
    def increments(self) -> np.ndarray:
        return self.directions * self.durations[:, None]

    def to_json(self) -> Dict[str, Any]:
        return {
            'horizon': self.horizon,
            'segments': [{'direction': u.tolist(), 'duration': float(tau)}
                         for u, tau in zip(self.directions, self.durations)],
        }


@dataclass
class ReachReport:
    """Outcome of an accessibility search"""
    status: str
    control: ControlProgram
    achieved: np.ndarray
    target: np.ndarray
    residual: float
    iterations: int = 0
    restarts_used: int = 0
    seed: int = 0
    path_length: float = 0.0
    start_index: Optional[int] = None
    warnings: List[str] = field(default_factory=list)
    rank_profile: Optional[List[int]] = None
    rank_consistent: Optional[bool] = None
    rde_terminal: Optional[np.ndarray] = None

    @property
    def converged(self) -> bool:
        return self.status in ('exact', 'converged')

    def to_json(self) -> Dict[str, Any]:
        report: Dict[str, Any] = {
            'status': self.status,
            'residual': self.residual,
            'target': self.target.tolist(),
            'achieved': self.achieved.tolist(),
            'iterations': self.iterations,
            'restarts_used': self.restarts_used,
            'seed': self.seed,
            'path_length': self.path_length,
            'start_index': self.start_index,
            'control': self.control.to_json(),
            'warnings': list(self.warnings),
        }
        if self.rde_terminal is not None:
            report['rde_terminal'] = self.rde_terminal.tolist()
        if self.rank_profile is not None:
            report['rank_profile'] = list(self.rank_profile)
            report['rank_consistent'] = self.rank_consistent
        return report
