# vector_fields.py
"""
Vector fields on R^d and the finite families D = {f^1, ..., f^n} that drive
the controlled equations
"""

import logging
import threading
from abc import ABC, abstractmethod
from functools import lru_cache
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import sympy as sp

from ..core.exceptions import DimensionError, DomainError, EvaluationError, InputError, ParseError
from ..core.tensor_algebra import flat_dimension
from .expressions import Expr, parse, to_text, variables

logger = logging.getLogger(__name__)

# ============================================================================
# Abstract Vector Field Interface
# ============================================================================

class VectorField(ABC):
    """A smooth vector field y -> f(y) on R^d"""

    dimension: int

    @abstractmethod
    def evaluate(self, y: np.ndarray) -> np.ndarray:
        """f(y) as a length-d array"""
        pass

    @abstractmethod
    def jacobian(self, y: np.ndarray) -> np.ndarray:
        """Df(y) as a d×d array, row i holding the gradient of component i"""
        pass

    @abstractmethod
    def bracket(self, other: 'VectorField') -> 'VectorField':
        """[self, other] = D(other)·self − D(self)·other"""
        pass

    def component_texts(self) -> List[str]:
        return []

# ============================================================================
# Symbolic Fields (expression components)
# ============================================================================

class SymbolicField(VectorField):
    """Field whose components are parsed expressions; Jacobians come from sympy"""

    def __init__(self, components: Sequence[Expr]):
        if not components:
            raise DimensionError("a vector field needs at least one component")
        dimension = components[0].dimension
        if any(c.dimension != dimension for c in components) or len(components) != dimension:
            raise DimensionError(f"a field on R^{dimension} needs {dimension} components, got {len(components)}")
        self.dimension = dimension
        self.components = tuple(components)

        symbols = variables(dimension)
        column = sp.Matrix([c.node for c in self.components])
        self._jacobian_nodes = column.jacobian(sp.Matrix(symbols))
        self._value_fn = sp.lambdify(symbols, list(column), modules='math')
        self._jacobian_fn = sp.lambdify(symbols, self._jacobian_nodes.tolist(), modules='math')

    @classmethod
    def from_texts(cls, texts: Sequence[str], dimension: int) -> 'SymbolicField':
        return cls([parse(text, dimension) for text in texts])

    def _call(self, fn, y: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
        if len(y) != self.dimension:
            raise DimensionError(f"point has {len(y)} coordinates, field lives on R^{self.dimension}")
        try:
            value = np.array(fn(*(float(v) for v in y)), dtype=float).reshape(shape)
        except (ZeroDivisionError, OverflowError, ValueError) as e:
            raise EvaluationError(f"field not evaluable at {list(map(float, y))}: {e}") from None
        if not np.all(np.isfinite(value)):
            raise EvaluationError(f"field is not finite at {list(map(float, y))}")
        return value

    def evaluate(self, y: np.ndarray) -> np.ndarray:
        return self._call(self._value_fn, y, (self.dimension,))

    def jacobian(self, y: np.ndarray) -> np.ndarray:
        return self._call(self._jacobian_fn, y, (self.dimension, self.dimension))

    def bracket(self, other: VectorField) -> VectorField:
        if not isinstance(other, SymbolicField):
            other = other.as_symbolic()
        if other.dimension != self.dimension:
            raise DimensionError("cannot bracket fields on different spaces")
        f = sp.Matrix([c.node for c in self.components])
        g = sp.Matrix([c.node for c in other.components])
        nodes = other._jacobian_nodes * f - self._jacobian_nodes * g
        return SymbolicField([Expr(sp.expand(node), self.dimension) for node in nodes])

    def as_symbolic(self) -> 'SymbolicField':
        return self

    def component_texts(self) -> List[str]:
        return [to_text(c) for c in self.components]

    def __repr__(self) -> str:
        return f"SymbolicField({self.component_texts()})"

# ============================================================================
# Linear Fields (y -> A y)
# ============================================================================

class LinearField(VectorField):
    """Field y -> A y; brackets stay linear: [Ay, By] = (BA − AB) y"""

    def __init__(self, matrix: np.ndarray):
        matrix = np.array(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise DimensionError(f"a linear field needs a square matrix, got shape {matrix.shape}")
        matrix.setflags(write=False)
        self.matrix = matrix
        self.dimension = matrix.shape[0]

    def evaluate(self, y: np.ndarray) -> np.ndarray:
        return self.matrix @ np.asarray(y, dtype=float)

    def jacobian(self, y: np.ndarray) -> np.ndarray:
        return self.matrix.copy()

    def bracket(self, other: VectorField) -> VectorField:
        if isinstance(other, LinearField):
            return LinearField(other.matrix @ self.matrix - self.matrix @ other.matrix)
        return self.as_symbolic().bracket(other)

    def as_symbolic(self) -> SymbolicField:
        symbols = variables(self.dimension)
        rows = sp.Matrix(self.matrix.tolist()) * sp.Matrix(symbols)
        return SymbolicField([Expr(node, self.dimension) for node in rows])

    def component_texts(self) -> List[str]:
        return self.as_symbolic().component_texts()

    def __repr__(self) -> str:
        return f"LinearField(d={self.dimension})"

# ============================================================================
# Families
# ============================================================================

class VectorFieldFamily:
    """
    The family D = {f^1, ..., f^n} of vector fields on R^d.

    Indices are 0-based in code and in JSON. Brackets are built on demand
    and cached; families are otherwise immutable and safe to share between
    threads.
    """

    def __init__(self, fields: Sequence[VectorField], builtin: Optional[str] = None,
                 parameters: Optional[Dict[str, int]] = None):
        if not fields:
            raise DimensionError("a family needs at least one field")
        dimension = fields[0].dimension
        if any(f.dimension != dimension for f in fields):
            raise DimensionError("all fields of a family must live on the same R^d")
        self.fields = tuple(fields)
        self.dimension = dimension
        self.builtin = builtin
        self.parameters = dict(parameters or {})
        self._brackets: Dict[Tuple[int, int], VectorField] = {}
        self._lock = threading.Lock()

    @property
    def size(self) -> int:
        return len(self.fields)

    def _check_index(self, i: int):
        if not 0 <= i < self.size:
            raise DomainError(f"field index {i} out of range for a family of {self.size} fields")

    def field(self, i: int) -> VectorField:
        self._check_index(i)
        return self.fields[i]

    def evaluate(self, i: int, y: np.ndarray) -> np.ndarray:
        return self.field(i).evaluate(y)

    def frame(self, y: np.ndarray) -> np.ndarray:
        """d×n matrix [f^1(y) ... f^n(y)]"""
        return np.column_stack([f.evaluate(y) for f in self.fields])

    def lie_bracket(self, i: int, j: int) -> VectorField:
        self._check_index(i)
        self._check_index(j)
        key = (i, j)
        with self._lock:
            if key not in self._brackets:
                self._brackets[key] = self.fields[i].bracket(self.fields[j])
            return self._brackets[key]

    def combination(self, direction: Sequence[float]) -> 'CombinedField':
        """y -> Σ u_i f^i(y)"""
        direction = np.asarray(direction, dtype=float)
        if direction.shape != (self.size,):
            raise DimensionError(f"direction must have {self.size} entries, got shape {direction.shape}")
        return CombinedField(list(self.fields), direction)

    def log_ode_field(self, drift: np.ndarray, area: np.ndarray) -> 'CombinedField':
        """y -> Σ λ_i f^i(y) + Σ_{i<j} μ_ij [f^i, f^j](y)"""
        fields: List[VectorField] = list(self.fields)
        weights = list(np.asarray(drift, dtype=float))
        for i in range(self.size):
            for j in range(i + 1, self.size):
                if area[i, j] != 0.0:
                    fields.append(self.lie_bracket(i, j))
                    weights.append(float(area[i, j]))
        return CombinedField(fields, np.array(weights))

    def validate_on_box(self, low: float = -1.0, high: float = 1.0, samples: int = 16, seed: int = 0):
        """Evaluate every field at the box centre and at seeded points inside [low, high]^d"""
        rng = np.random.default_rng(seed)
        points = [np.full(self.dimension, 0.5 * (low + high))]
        points.extend(rng.uniform(low, high, size=(samples, self.dimension)))
        for y in points:
            for i, f in enumerate(self.fields):
                try:
                    f.evaluate(y)
                except EvaluationError as e:
                    raise EvaluationError(f"field {i} fails on the test box: {e}") from None

    def to_json(self) -> Dict[str, Any]:
        if self.builtin is not None:
            return {'builtin': self.builtin, **self.parameters}
        return {'d': self.dimension, 'n': self.size,
                'fields': [f.component_texts() for f in self.fields]}

    def __repr__(self) -> str:
        tag = f", builtin={self.builtin!r}" if self.builtin else ""
        return f"VectorFieldFamily(d={self.dimension}, n={self.size}{tag})"


class CombinedField:
    """Weighted sum of fields, evaluated term by term"""

    def __init__(self, fields: List[VectorField], weights: np.ndarray):
        active = [(f, float(w)) for f, w in zip(fields, weights) if w != 0.0]
        self.terms = active
        self.dimension = fields[0].dimension

    def evaluate(self, y: np.ndarray) -> np.ndarray:
        value = np.zeros(self.dimension)
        for f, w in self.terms:
            value += w * f.evaluate(y)
        return value

    def jacobian(self, y: np.ndarray) -> np.ndarray:
        value = np.zeros((self.dimension, self.dimension))
        for f, w in self.terms:
            value += w * f.jacobian(y)
        return value

# ============================================================================
# Builtin Families
# ============================================================================

@lru_cache(maxsize=None)
def _signature_ode_matrices(depth: int, width: int) -> Tuple[np.ndarray, ...]:
    d = flat_dimension(width, depth)
    offsets = [flat_dimension(width, k - 1) if k > 0 else 0 for k in range(depth + 1)]
    matrices = []
    for i in range(width):
        a = np.zeros((d, d))
        for k in range(1, depth + 1):
            for w in range(width ** (k - 1)):
                a[offsets[k] + w * width + i, offsets[k - 1] + w] = 1.0
        a.setflags(write=False)
        matrices.append(a)
    return tuple(matrices)


def signature_ode_family(depth: int, width: int) -> VectorFieldFamily:
    """
    Linear fields f^i(a) = a ⊗ e_i on T^(N)(R^n) in flattened coordinates,
    so that the solution started at the unit element is the signature.
    """
    if depth < 1 or width < 1:
        raise DomainError("signature-ode needs N ≥ 1 and n ≥ 1")
    fields = [LinearField(a) for a in _signature_ode_matrices(depth, width)]
    return VectorFieldFamily(fields, builtin='signature-ode', parameters={'N': depth, 'n': width})


BUILTIN_FIELDS = {
    'rotation': (2, [["-y2", "y1"]]),
    'bracket-demo': (2, [["1", "0"], ["0", "y1"]]),
    'heisenberg': (3, [["1", "0", "-y2/2"], ["0", "1", "y1/2"]]),
}


def builtin_family(name: str, **parameters) -> VectorFieldFamily:
    if name == 'signature-ode':
        try:
            return signature_ode_family(int(parameters['N']), int(parameters['n']))
        except KeyError as e:
            raise InputError(f"builtin signature-ode needs parameter {e}") from None
    if name not in BUILTIN_FIELDS:
        raise InputError(f"unknown builtin family {name!r}; available: signature-ode, {', '.join(BUILTIN_FIELDS)}")
    dimension, texts = BUILTIN_FIELDS[name]
    fields = [SymbolicField.from_texts(components, dimension) for components in texts]
    return VectorFieldFamily(fields, builtin=name)


class FamilyFactory:
    """Builds families from their JSON description"""

    @staticmethod
    def create_family(spec: Dict[str, Any]) -> VectorFieldFamily:
        if not isinstance(spec, dict):
            raise InputError("a vector-field family must be a JSON object")

        if 'builtin' in spec:
            parameters = {k: v for k, v in spec.items() if k in ('N', 'n')}
            family = builtin_family(str(spec['builtin']), **parameters)
            logger.debug("Built builtin family %r", family)
            return family

        try:
            d = int(spec['d'])
            n = int(spec['n'])
            rows = spec['fields']
        except (KeyError, TypeError, ValueError) as e:
            raise InputError(f"family JSON needs integer 'd', 'n' and a 'fields' list: {e}") from None
        if not isinstance(rows, list) or len(rows) != n:
            raise DimensionError(f"family declares n={n} but lists {len(rows) if isinstance(rows, list) else 0} fields")

        fields = []
        for index, components in enumerate(rows):
            if not isinstance(components, list) or len(components) != d:
                raise DimensionError(f"field {index} must list exactly d={d} component expressions")
            try:
                fields.append(SymbolicField.from_texts([str(c) for c in components], d))
            except ParseError as e:
                raise ParseError(f"field {index}: {e.detail}", e.position) from None

        family = VectorFieldFamily(fields)
        box = spec.get('box', [-1.0, 1.0])
        family.validate_on_box(float(box[0]), float(box[1]))
        logger.debug("Parsed family %r", family)
        return family
