# tensor_algebra.py
"""
Truncated tensor algebra T^(N)(R^n), its group of group-like elements G^(N)(R^n)
and the free Lie algebra of Lie polynomials.

Level k of a tensor is stored as a dense array of n^k coefficients, indexed
lexicographically by words (i_1, ..., i_k) with letters 0..n-1 (the word
(i_1, ..., i_k) sits at index i_1 n^(k-1) + ... + i_k).
"""

import itertools
from functools import lru_cache
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .exceptions import DimensionError, DomainError

Word = Tuple[int, ...]

DEFAULT_SHUFFLE_TOL = 1e-10
DEFAULT_LIE_TOL = 1e-10


class TruncatedTensor:
    """Immutable element of T^(N)(R^n)"""

    # Storage grows like n^N; raise the cap through the configuration if needed
    max_depth = 6

    __slots__ = ('width', 'depth', 'levels')

    def __init__(self, width: int, depth: int, levels: Sequence[Iterable[float]]):
        if width < 1 or depth < 1:
            raise DomainError(f"width and depth must be positive, got n={width}, N={depth}")
        if depth > self.max_depth:
            raise DomainError(f"depth {depth} exceeds the configured maximum {self.max_depth}")
        if len(levels) != depth + 1:
            raise DimensionError(f"expected {depth + 1} levels, got {len(levels)}")

        arrays = []
        for k, level in enumerate(levels):
            array = np.array(level, dtype=float).reshape(-1)
            if array.size != width ** k:
                raise DimensionError(f"level {k} must hold {width ** k} coefficients, got {array.size}")
            if not np.all(np.isfinite(array)):
                raise DomainError(f"level {k} contains non-finite coefficients")
            array.setflags(write=False)
            arrays.append(array)

        object.__setattr__(self, 'width', width)
        object.__setattr__(self, 'depth', depth)
        object.__setattr__(self, 'levels', tuple(arrays))

    def __setattr__(self, name, value):
        raise AttributeError("TruncatedTensor is immutable")

    # ------------------------------------------------------------------
    # Constructors
    # ------------------------------------------------------------------

    @classmethod
    def zero(cls, width: int, depth: int) -> 'TruncatedTensor':
        return cls(width, depth, [np.zeros(width ** k) for k in range(depth + 1)])

    @classmethod
    def identity(cls, width: int, depth: int) -> 'TruncatedTensor':
        levels = [np.zeros(width ** k) for k in range(depth + 1)]
        levels[0][0] = 1.0
        return cls(width, depth, levels)

    @classmethod
    def from_flat(cls, width: int, depth: int, flat: Sequence[float]) -> 'TruncatedTensor':
        """Inverse of flatten(): levels concatenated in order 0..N"""
        flat = np.asarray(flat, dtype=float).reshape(-1)
        expected = flat_dimension(width, depth)
        if flat.size != expected:
            raise DimensionError(f"flat vector must have {expected} entries, got {flat.size}")
        levels, offset = [], 0
        for k in range(depth + 1):
            size = width ** k
            levels.append(flat[offset:offset + size])
            offset += size
        return cls(width, depth, levels)

    @classmethod
    def from_vector(cls, vector: Sequence[float], depth: int, scalar: float = 0.0) -> 'TruncatedTensor':
        """Tensor with the given level-1 part, scalar level 0 and zero higher levels"""
        vector = np.asarray(vector, dtype=float).reshape(-1)
        tensor = cls.zero(vector.size, depth)
        levels = [level.copy() for level in tensor.levels]
        levels[0][0] = scalar
        levels[1] = vector
        return cls(vector.size, depth, levels)

    # ------------------------------------------------------------------
    # Accessors
    # ------------------------------------------------------------------

    @property
    def scalar(self) -> float:
        return float(self.levels[0][0])

    def level(self, k: int) -> np.ndarray:
        return self.levels[k]

    def level_tensor(self, k: int) -> np.ndarray:
        """Level k reshaped to an array with k axes of length n"""
        return self.levels[k].reshape((self.width,) * k)

    def coefficient(self, word: Word) -> float:
        return float(self.levels[len(word)][word_index(word, self.width)])

    def flatten(self) -> np.ndarray:
        return np.concatenate(self.levels)

    def truncate(self, depth: int) -> 'TruncatedTensor':
        if depth > self.depth:
            raise DimensionError(f"cannot truncate depth {self.depth} tensor to depth {depth}")
        return TruncatedTensor(self.width, depth, self.levels[:depth + 1])

    def max_abs_difference(self, other: 'TruncatedTensor') -> float:
        _check_compatible(self, other)
        return max(float(np.max(np.abs(a - b))) for a, b in zip(self.levels, other.levels))

    def allclose(self, other: 'TruncatedTensor', atol: float = 1e-12) -> bool:
        return self.max_abs_difference(other) <= atol

    # ------------------------------------------------------------------
    # Linear structure
    # ------------------------------------------------------------------

    def __add__(self, other: 'TruncatedTensor') -> 'TruncatedTensor':
        _check_compatible(self, other)
        return TruncatedTensor(self.width, self.depth, [a + b for a, b in zip(self.levels, other.levels)])

    def __sub__(self, other: 'TruncatedTensor') -> 'TruncatedTensor':
        _check_compatible(self, other)
        return TruncatedTensor(self.width, self.depth, [a - b for a, b in zip(self.levels, other.levels)])

    def __neg__(self) -> 'TruncatedTensor':
        return TruncatedTensor(self.width, self.depth, [-a for a in self.levels])

    def scale(self, factor: float) -> 'TruncatedTensor':
        return TruncatedTensor(self.width, self.depth, [factor * a for a in self.levels])

    def dilate(self, factor: float) -> 'TruncatedTensor':
        """Multiply level k by factor^k"""
        return TruncatedTensor(self.width, self.depth,
                               [factor ** k * a for k, a in enumerate(self.levels)])

    def __repr__(self) -> str:
        return f"TruncatedTensor(n={self.width}, N={self.depth}, levels={[a.tolist() for a in self.levels]})"

    # ------------------------------------------------------------------
    # JSON form {"n":..., "N":..., "levels":[[...], ...]}
    # ------------------------------------------------------------------

    def to_json(self) -> Dict:
        return {'n': self.width, 'N': self.depth, 'levels': [a.tolist() for a in self.levels]}

    @classmethod
    def from_json(cls, data: Dict) -> 'TruncatedTensor':
        try:
            return cls(int(data['n']), int(data['N']), data['levels'])
        except KeyError as e:
            raise DomainError(f"tensor JSON is missing field {e}") from None


class ShuffleCheck(NamedTuple):
    passed: bool
    violation: float


# ----------------------------------------------------------------------
# Word helpers
# ----------------------------------------------------------------------

def flat_dimension(width: int, depth: int) -> int:
    """1 + n + ... + n^N"""
    return sum(width ** k for k in range(depth + 1))


def word_index(word: Word, width: int) -> int:
    index = 0
    for letter in word:
        index = index * width + letter
    return index


def words(width: int, length: int) -> Iterable[Word]:
    return itertools.product(range(width), repeat=length)


@lru_cache(maxsize=None)
def shuffle_product(u: Word, v: Word) -> Tuple[Tuple[Word, int], ...]:
    """u ⧢ v as (word, multiplicity) pairs"""
    if not u:
        return ((v, 1),)
    if not v:
        return ((u, 1),)
    result: Dict[Word, int] = {}
    for word, count in shuffle_product(u[1:], v):
        key = (u[0],) + word
        result[key] = result.get(key, 0) + count
    for word, count in shuffle_product(u, v[1:]):
        key = (v[0],) + word
        result[key] = result.get(key, 0) + count
    return tuple(sorted(result.items()))


def _check_compatible(a: TruncatedTensor, b: TruncatedTensor):
    if a.width != b.width or a.depth != b.depth:
        raise DimensionError(
            f"incompatible tensors: (n={a.width}, N={a.depth}) vs (n={b.width}, N={b.depth})")


# ----------------------------------------------------------------------
# Algebra operations
# ----------------------------------------------------------------------

def tensor_mul(a: TruncatedTensor, b: TruncatedTensor) -> TruncatedTensor:
    """Truncated tensor product: level k = sum_j a_j ⊗ b_(k-j)"""
    _check_compatible(a, b)
    levels = []
    for k in range(a.depth + 1):
        total = np.zeros(a.width ** k)
        for j in range(k + 1):
            total += np.outer(a.levels[j], b.levels[k - j]).reshape(-1)
        levels.append(total)
    return TruncatedTensor(a.width, a.depth, levels)


def tensor_exp(x: TruncatedTensor) -> TruncatedTensor:
    """Group exponential; the series stops at N because x has no scalar part"""
    if x.scalar != 0.0:
        raise DomainError(f"tensor_exp needs a zero scalar level, got {x.scalar}")
    result = TruncatedTensor.identity(x.width, x.depth)
    term = result
    for k in range(1, x.depth + 1):
        term = tensor_mul(term, x).scale(1.0 / k)
        result = result + term
    return result


def tensor_log(g: TruncatedTensor) -> TruncatedTensor:
    """Inverse of tensor_exp on elements with unit scalar level"""
    if g.scalar != 1.0:
        raise DomainError(f"tensor_log needs a unit scalar level, got {g.scalar}")
    h = g - TruncatedTensor.identity(g.width, g.depth)
    result = TruncatedTensor.zero(g.width, g.depth)
    power = h
    for k in range(1, g.depth + 1):
        sign = 1.0 if k % 2 == 1 else -1.0
        result = result + power.scale(sign / k)
        power = tensor_mul(power, h)
    return result


def tensor_inverse(g: TruncatedTensor) -> TruncatedTensor:
    """Group inverse exp(-log g)"""
    return tensor_exp(-tensor_log(g))


def segment_exp(increment: Sequence[float], depth: int) -> TruncatedTensor:
    """exp of a pure level-1 element in closed form: v^{⊗k}/k!"""
    v = np.asarray(increment, dtype=float).reshape(-1)
    levels = [np.ones(1)]
    for k in range(1, depth + 1):
        levels.append(np.outer(levels[-1], v).reshape(-1) / k)
    return TruncatedTensor(v.size, depth, levels)


def shuffle_check(g: TruncatedTensor, tol: float = DEFAULT_SHUFFLE_TOL) -> ShuffleCheck:
    """Check <g,u><g,v> = <g, u ⧢ v> for every word pair with |u|+|v| <= N"""
    if g.scalar != 1.0:
        raise DomainError(f"shuffle_check needs a unit scalar level, got {g.scalar}")

    worst = 0.0
    n, depth = g.width, g.depth
    for len_u in range(1, depth // 2 + 1):
        for len_v in range(len_u, depth - len_u + 1):
            for u in words(n, len_u):
                g_u = g.coefficient(u)
                for v in words(n, len_v):
                    if len_u == len_v and v < u:
                        continue
                    shuffled = sum(count * g.coefficient(w) for w, count in shuffle_product(u, v))
                    worst = max(worst, abs(g_u * g.coefficient(v) - shuffled))
    return ShuffleCheck(worst <= tol, worst)


# ----------------------------------------------------------------------
# Free Lie algebra
# ----------------------------------------------------------------------

def _right_bracketing(level: np.ndarray, width: int, k: int) -> np.ndarray:
    """Linear extension of i1..ik -> [i1,[i2,[...,ik]]] on one homogeneous level"""
    if k <= 1:
        return level.copy()
    rows = level.reshape(width, width ** (k - 1))
    inner = np.stack([_right_bracketing(rows[i], width, k - 1) for i in range(width)])
    # e_i ⊗ R(w) - R(w) ⊗ e_i
    return inner.reshape(-1) - inner.T.reshape(-1)


def lie_projection(x: TruncatedTensor) -> Tuple[TruncatedTensor, float]:
    """Dynkin projection sum_k R(x_k)/k; returns the projection and the max residual"""
    levels = [np.zeros(1)]
    for k in range(1, x.depth + 1):
        levels.append(_right_bracketing(x.levels[k], x.width, k) / k)
    projected = TruncatedTensor(x.width, x.depth, levels)
    residual = max(float(np.max(np.abs(a - b))) for a, b in zip(x.levels, projected.levels))
    residual = max(residual, abs(x.scalar))
    return projected, residual


class LieElement:
    """Element of the free Lie algebra L^(N)(R^n), e.g. a log-signature"""

    # Projection residual accepted by the constructor; set from tensor.lie_tol
    default_tol = DEFAULT_LIE_TOL

    __slots__ = ('tensor',)

    def __init__(self, tensor: TruncatedTensor, tol: Optional[float] = None):
        tol = self.default_tol if tol is None else tol
        if tensor.scalar != 0.0:
            raise DomainError("a Lie element has zero scalar level")
        _, residual = lie_projection(tensor)
        if residual > tol:
            raise DomainError(f"not a Lie polynomial: projection residual {residual:.3e} > {tol:.1e}")
        object.__setattr__(self, 'tensor', tensor)

    def __setattr__(self, name, value):
        raise AttributeError("LieElement is immutable")

    @classmethod
    def from_drift_area(cls, drift: Sequence[float], area, depth: int = 2) -> 'LieElement':
        """λ + Σ_{i<j} μ_ij [e_i, e_j]; μ must be exactly antisymmetric"""
        drift = np.asarray(drift, dtype=float).reshape(-1)
        area = np.asarray(area, dtype=float)
        n = drift.size
        if area.shape != (n, n):
            raise DimensionError(f"area must be {n}x{n}, got {area.shape}")
        if np.any(area + area.T != 0.0):
            raise DomainError("area matrix must be exactly antisymmetric")
        levels = [np.zeros(n ** k) for k in range(depth + 1)]
        levels[1] = drift
        if depth >= 2:
            levels[2] = area.reshape(-1)
        return cls(TruncatedTensor(n, depth, levels))

    @property
    def width(self) -> int:
        return self.tensor.width

    @property
    def depth(self) -> int:
        return self.tensor.depth

    @property
    def drift(self) -> np.ndarray:
        return self.tensor.levels[1].copy()

    @property
    def area(self) -> np.ndarray:
        """Antisymmetric level-2 part as an n x n matrix"""
        if self.depth < 2:
            return np.zeros((self.width, self.width))
        matrix = self.tensor.level_tensor(2)
        return (matrix - matrix.T) / 2.0

    def exp(self) -> TruncatedTensor:
        return tensor_exp(self.tensor)


def log_signature(g: TruncatedTensor, tol: Optional[float] = None) -> LieElement:
    return LieElement(tensor_log(g), tol=tol)


def basis_tensor(width: int, depth: int, word: Word, value: float = 1.0) -> TruncatedTensor:
    """value · e_{i1} ⊗ ... ⊗ e_{ik}"""
    levels: List[np.ndarray] = [np.zeros(width ** k) for k in range(depth + 1)]
    levels[len(word)][word_index(word, width)] = value
    return TruncatedTensor(width, depth, levels)
