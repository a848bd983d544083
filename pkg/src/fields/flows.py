# flows.py
"""
Flows of vector fields, D-diffeomorphisms and their pushforwards.

All integration is classical fixed-step RK4. The pushforward integrates the
variational equation dJ/ds = Df(γ(s))·J jointly with the state, so J is the
exact derivative of the discrete flow map.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Tuple

import numpy as np

from ..config.data_structures import DDiffeo, FlowRequest
from ..core.exceptions import BlowUpError, DimensionError, EvaluationError
from .vector_fields import VectorFieldFamily

logger = logging.getLogger(__name__)

NEAR_SINGULAR_CONDITION = 1e12


@dataclass(frozen=True)
class IntegratorSettings:
    """Step-count rule and blow-up guard shared by every integration"""
    min_steps: int = 64
    max_step: float = 0.01
    blowup_threshold: float = 1e8

    @classmethod
    def from_config(cls, config) -> 'IntegratorSettings':
        return cls(min_steps=int(config.get('integrator.min_steps', cls.min_steps)),
                   max_step=float(config.get('integrator.max_step', cls.max_step)),
                   blowup_threshold=float(config.get('integrator.blowup_threshold', cls.blowup_threshold)))

    def steps_for(self, duration: float, step: Optional[float] = None) -> int:
        """max(min_steps, ⌈|t|/max_step⌉), or ⌈|t|/h⌉ for an explicit step h"""
        span = abs(duration)
        if step is not None:
            return max(1, math.ceil(span / step - 1e-12))
        return max(self.min_steps, math.ceil(span / self.max_step - 1e-12))


class FlowResult(NamedTuple):
    endpoint: np.ndarray
    jacobian: np.ndarray
    near_singular: bool


def _guard(y: np.ndarray, threshold: float, time: float, stage: Optional[int]):
    if not np.all(np.isfinite(y)) or np.max(np.abs(y), initial=0.0) > threshold:
        raise BlowUpError("state left the finite region", time, stage)


def rk4(rhs: Callable[[np.ndarray], np.ndarray], y0: np.ndarray, duration: float, steps: int,
        threshold: float = 1e8, t0: float = 0.0, stage: Optional[int] = None) -> np.ndarray:
    """Integrate the autonomous system y' = rhs(y) for a signed duration in `steps` equal steps"""
    y = np.array(y0, dtype=float)
    if duration == 0.0:
        return y
    h = duration / steps
    for k in range(steps):
        t = t0 + k * h
        try:
            k1 = rhs(y)
            k2 = rhs(y + 0.5 * h * k1)
            k3 = rhs(y + 0.5 * h * k2)
            k4 = rhs(y + h * k3)
        except EvaluationError as e:
            raise BlowUpError(f"field not evaluable along the trajectory: {e}", t, stage) from None
        candidate = y + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        _guard(candidate, threshold, t, stage)
        y = candidate
    return y


def rk4_variational(field, y0: np.ndarray, jac0: np.ndarray, duration: float, steps: int,
                    threshold: float = 1e8, t0: float = 0.0,
                    stage: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    """RK4 on the pair (y, J) with y' = f(y), J' = Df(y)·J"""
    y = np.array(y0, dtype=float)
    jac = np.array(jac0, dtype=float)
    if duration == 0.0:
        return y, jac
    h = duration / steps
    for k in range(steps):
        t = t0 + k * h
        try:
            k1 = field.evaluate(y)
            l1 = field.jacobian(y) @ jac
            y2, j2 = y + 0.5 * h * k1, jac + 0.5 * h * l1
            k2 = field.evaluate(y2)
            l2 = field.jacobian(y2) @ j2
            y3, j3 = y + 0.5 * h * k2, jac + 0.5 * h * l2
            k3 = field.evaluate(y3)
            l3 = field.jacobian(y3) @ j3
            y4, j4 = y + h * k3, jac + h * l3
            k4 = field.evaluate(y4)
            l4 = field.jacobian(y4) @ j4
        except EvaluationError as e:
            raise BlowUpError(f"field not evaluable along the trajectory: {e}", t, stage) from None
        candidate = y + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        _guard(candidate, threshold, t, stage)
        y = candidate
        jac = jac + h * (l1 + 2.0 * l2 + 2.0 * l3 + l4) / 6.0
    return y, jac


def _request_field(family: VectorFieldFamily, request: FlowRequest):
    if request.start.size != family.dimension:
        raise DimensionError(f"start point has {request.start.size} coordinates, family lives on R^{family.dimension}")
    if request.index is not None:
        return family.field(request.index)
    return family.combination(request.direction)


def flow(family: VectorFieldFamily, request: FlowRequest,
         settings: IntegratorSettings = IntegratorSettings()) -> np.ndarray:
    """Endpoint of the integral curve of the requested field after time t"""
    field = _request_field(family, request)
    steps = settings.steps_for(request.time, request.step)
    return rk4(field.evaluate, request.start, request.time, steps, settings.blowup_threshold)


def flow_with_jacobian(family: VectorFieldFamily, request: FlowRequest,
                       settings: IntegratorSettings = IntegratorSettings()) -> FlowResult:
    field = _request_field(family, request)
    steps = settings.steps_for(request.time, request.step)
    endpoint, jac = rk4_variational(field, request.start, np.eye(family.dimension), request.time, steps,
                                    settings.blowup_threshold)
    return FlowResult(endpoint, jac, _near_singular(jac))


def _near_singular(jac: np.ndarray) -> bool:
    if jac.size == 0:
        return False
    condition = np.linalg.cond(jac)
    if not np.isfinite(condition) or condition > NEAR_SINGULAR_CONDITION:
        logger.warning("⚠️ Pushforward is near-singular (condition number %.3g)", condition)
        return True
    return False


def inverse_ddiffeo(g: DDiffeo) -> DDiffeo:
    return g.inverse()


def apply_ddiffeo(family: VectorFieldFamily, g: DDiffeo, y: np.ndarray,
                  settings: IntegratorSettings = IntegratorSettings()) -> np.ndarray:
    """Apply the stages of g in order; blow-ups carry the failing stage index"""
    y = np.array(y, dtype=float)
    if y.size != family.dimension:
        raise DimensionError(f"point has {y.size} coordinates, family lives on R^{family.dimension}")
    for stage, (index, time) in enumerate(g.stages):
        field = family.field(index)
        y = rk4(field.evaluate, y, time, settings.steps_for(time), settings.blowup_threshold, stage=stage)
    return y


def apply_with_pushforward(family: VectorFieldFamily, g: DDiffeo, y: np.ndarray,
                           settings: IntegratorSettings = IntegratorSettings()) -> FlowResult:
    """g(y) together with D g(y); stage Jacobians compose by the chain rule"""
    y = np.array(y, dtype=float)
    if y.size != family.dimension:
        raise DimensionError(f"point has {y.size} coordinates, family lives on R^{family.dimension}")
    jac = np.eye(family.dimension)
    for stage, (index, time) in enumerate(g.stages):
        field = family.field(index)
        y, jac = rk4_variational(field, y, jac, time, settings.steps_for(time), settings.blowup_threshold,
                                 stage=stage)
    return FlowResult(y, jac, _near_singular(jac))


def pushforward(family: VectorFieldFamily, g: DDiffeo, y: np.ndarray,
                settings: IntegratorSettings = IntegratorSettings()) -> np.ndarray:
    return apply_with_pushforward(family, g, y, settings).jacobian
