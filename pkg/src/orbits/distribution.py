# distribution.py
"""
Estimates of the distribution P_D(y) spanned along the orbit of a family.

Two estimators are provided: the flow estimator collects pushforwards
g_*(f^i(g^{-1}(y))) along random D-diffeomorphisms g, and the bracket
estimator evaluates iterated Lie brackets at y. The bracket rank is a lower
bound for dim P_D(y) and equals it for bracket-generating families.
"""

import concurrent.futures
import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..config.data_structures import DDiffeo, DistributionEstimate
from ..core.exceptions import BlowUpError, DimensionError, DomainError, EstimationError
from ..fields.flows import IntegratorSettings, apply_ddiffeo, apply_with_pushforward
from ..fields.vector_fields import VectorField, VectorFieldFamily

logger = logging.getLogger(__name__)

# Singular values below this are zero whatever the largest one is
ABSOLUTE_RANK_FLOOR = 1e-12


@dataclass(frozen=True)
class SamplingSettings:
    tau: float = 0.3
    mean_length: float = 2.0
    rank_tol: float = 1e-8
    budget: int = 50
    bracket_depth: int = 3

    @classmethod
    def from_config(cls, config) -> 'SamplingSettings':
        return cls(tau=float(config.get('orbit.tau', cls.tau)),
                   mean_length=float(config.get('orbit.mean_length', cls.mean_length)),
                   rank_tol=float(config.get('orbit.rank_tol', cls.rank_tol)),
                   budget=int(config.get('orbit.budget', cls.budget)),
                   bracket_depth=int(config.get('orbit.bracket_depth', cls.bracket_depth)))


def numerical_rank(vectors: Sequence[np.ndarray], dimension: int,
                   rank_tol: float = 1e-8) -> Tuple[int, np.ndarray, np.ndarray]:
    """Rank, singular values and orthonormal basis (columns) of the span of `vectors`"""
    if not vectors:
        return 0, np.zeros(0), np.zeros((dimension, 0))
    matrix = np.column_stack(vectors)
    u, s, _ = np.linalg.svd(matrix, full_matrices=False)
    threshold = max(rank_tol * (s[0] if s.size else 0.0), ABSOLUTE_RANK_FLOOR)
    rank = int(np.sum(s > threshold))
    return rank, s, u[:, :rank]


def sample_ddiffeo(size: int, rng: np.random.Generator, tau: float, mean_length: float) -> DDiffeo:
    """Geometric length with the given mean, uniform indices, times uniform in [-tau, tau]"""
    length = int(rng.geometric(1.0 / mean_length)) if mean_length > 1.0 else 1
    indices = rng.integers(0, size, size=length)
    times = rng.uniform(-tau, tau, size=length)
    return DDiffeo(tuple(zip(indices.tolist(), times.tolist())))


def _collect_sample(family: VectorFieldFamily, y: np.ndarray, seed: int, index: int,
                    settings: SamplingSettings, integrator: IntegratorSettings):
    """Vectors g_*(f^i(g^{-1}(y))) for one sampled g, or None when integration blows up"""
    rng = np.random.default_rng([seed, index])
    g = sample_ddiffeo(family.size, rng, settings.tau, settings.mean_length)
    try:
        base = apply_ddiffeo(family, g.inverse(), y, integrator)
        result = apply_with_pushforward(family, g, base, integrator)
    except BlowUpError as e:
        logger.debug("Sample %d skipped: %s", index, e)
        return g, None
    vectors = [result.jacobian @ family.evaluate(i, base) for i in range(family.size)]
    return g, vectors


def distribution_rank(family: VectorFieldFamily, y: Sequence[float], budget: Optional[int] = None,
                      seed: int = 0, settings: SamplingSettings = SamplingSettings(),
                      integrator: IntegratorSettings = IntegratorSettings(),
                      threads: int = 1) -> DistributionEstimate:
    """
    Flow estimate of P_D(y).

    Starts from {f^i(y)} and adds pushforwards from sampled D-diffeomorphisms
    until the rank reaches d or the budget is spent. Sample k draws from its
    own generator seeded by (seed, k), so batches can be computed in parallel
    and reduced in order with results independent of the thread count.
    """
    y = np.array(y, dtype=float)
    if y.size != family.dimension:
        raise DimensionError(f"point has {y.size} coordinates, family lives on R^{family.dimension}")
    budget = settings.budget if budget is None else budget
    if budget < 0:
        raise DomainError(f"budget must be non-negative, got {budget}")

    d = family.dimension
    vectors = [family.evaluate(i, y) for i in range(family.size)]
    generators: List[Dict[str, Any]] = [{'ddiffeo': [], 'field': i} for i in range(family.size)]
    rank, singular_values, basis = numerical_rank(vectors, d, settings.rank_tol)
    naive_rank = rank

    used = failed = 0
    batch = max(1, threads)
    next_index = 0
    with concurrent.futures.ThreadPoolExecutor(max_workers=batch) as pool:
        while rank < d and next_index < budget:
            indices = range(next_index, min(next_index + batch, budget))
            futures = [pool.submit(_collect_sample, family, y, seed, k, settings, integrator) for k in indices]
            results = [f.result() for f in futures]
            for k, (g, sample_vectors) in zip(indices, results):
                next_index = k + 1
                used += 1
                if sample_vectors is None:
                    failed += 1
                    continue
                vectors.extend(sample_vectors)
                generators.extend({'ddiffeo': g.to_json(), 'field': i, 'sample': k}
                                  for i in range(family.size))
                rank, singular_values, basis = numerical_rank(vectors, d, settings.rank_tol)
                if rank == d:
                    break

    if used > 0 and failed == used and rank < d:
        raise EstimationError(f"all {used} sampled D-diffeomorphisms blew up at {y.tolist()}")
    if failed:
        logger.warning("⚠️ %d of %d orbit samples failed and were skipped", failed, used)
    logger.debug("P_D rank %d at %s (naive %d, %d samples)", rank, y.tolist(), naive_rank, used)

    return DistributionEstimate(point=y, rank=rank, singular_values=singular_values, basis=basis,
                                vectors=vectors, generators=generators, samples_used=used,
                                samples_failed=failed, naive_rank=naive_rank)


def iterated_brackets(family: VectorFieldFamily, depth: int) -> List[Tuple[Tuple[int, ...], VectorField]]:
    """Right-nested brackets [f^{i1},[f^{i2},[...,f^{ik}]]] for k ≤ depth, tagged by index word"""
    if depth < 1:
        raise DomainError(f"bracket depth must be at least 1, got {depth}")
    layer = [((i,), family.field(i)) for i in range(family.size)]
    collected = list(layer)
    for _ in range(depth - 1):
        next_layer = []
        for i in range(family.size):
            for word, inner in layer:
                if len(word) == 1 and word[0] == i:
                    continue
                next_layer.append(((i,) + word, family.field(i).bracket(inner)))
        layer = next_layer
        collected.extend(layer)
    return collected


def bracket_span_rank(family: VectorFieldFamily, y: Sequence[float], depth: int,
                      rank_tol: float = 1e-8) -> Tuple[int, np.ndarray, np.ndarray]:
    """Rank, singular values and basis of all iterated brackets of length ≤ depth at y"""
    y = np.array(y, dtype=float)
    if y.size != family.dimension:
        raise DimensionError(f"point has {y.size} coordinates, family lives on R^{family.dimension}")
    vectors = [field.evaluate(y) for _, field in iterated_brackets(family, depth)]
    return numerical_rank(vectors, family.dimension, rank_tol)


def rank_profile(family: VectorFieldFamily, trajectory: Sequence[Sequence[float]], budget: Optional[int] = None,
                 seed: int = 0, settings: SamplingSettings = SamplingSettings(),
                 integrator: IntegratorSettings = IntegratorSettings(),
                 threads: int = 1) -> Tuple[List[int], bool]:
    """distribution_rank at every trajectory point and whether they all agree"""
    if len(trajectory) == 0:
        raise DomainError("rank profile needs a nonempty trajectory")
    ranks = [distribution_rank(family, point, budget, seed, settings, integrator, threads).rank
             for point in trajectory]
    consistent = len(set(ranks)) == 1
    if not consistent:
        logger.warning("⚠️ Distribution rank varies along the trajectory: %s", ranks)
    return ranks, consistent
