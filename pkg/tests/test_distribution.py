import numpy as np
import pytest

from src.config.config_manager import ConfigManager
from src.config.data_structures import DDiffeo
from src.core.exceptions import DimensionError, DomainError, EstimationError
from src.fields.flows import IntegratorSettings, apply_ddiffeo, apply_with_pushforward
from src.fields.vector_fields import SymbolicField, VectorFieldFamily
from src.orbits.distribution import (SamplingSettings, bracket_span_rank, distribution_rank, iterated_brackets,
                                     numerical_rank, rank_profile, sample_ddiffeo)
from src.solvers.rde_solver import pure_area, solve_rde


@pytest.fixture(scope='module')
def constant_frame():
    return VectorFieldFamily([SymbolicField.from_texts(c, 3) for c in (["1", "0", "0"], ["0", "1", "0"],
                                                                          ["0", "0", "1"])])


class TestNumericalRank:

    def test_empty(self):
        rank, s, basis = numerical_rank([], 3)
        assert rank == 0 and s.size == 0 and basis.shape == (3, 0)

    def test_relative_threshold(self):
        rank, _, _ = numerical_rank([np.array([1e6, 0.0]), np.array([0.0, 1e-3])], 2)
        assert rank == 1
        rank, _, _ = numerical_rank([np.array([1.0, 0.0]), np.array([0.0, 1e-3])], 2)
        assert rank == 2

    def test_zero_vectors_have_rank_zero(self):
        rank, _, _ = numerical_rank([np.zeros(2), np.zeros(2)], 2)
        assert rank == 0

    def test_basis_is_orthonormal(self, rng):
        vectors = list(rng.normal(size=(5, 4)))
        rank, _, basis = numerical_rank(vectors, 4)
        assert rank == 4
        np.testing.assert_allclose(basis.T @ basis, np.eye(4), atol=1e-12)


class TestDistributionRank:

    def test_constant_frame_needs_no_samples(self, constant_frame):
        estimate = distribution_rank(constant_frame, [0.5, -1.0, 2.0], budget=50)
        assert estimate.rank == 3
        assert estimate.samples_used == 0

    def test_rotation_at_fixed_point(self, rotation):
        estimate = distribution_rank(rotation, [0.0, 0.0], budget=50, seed=0)
        assert estimate.rank == 0
        assert estimate.samples_used == 50

    def test_rotation_off_the_origin(self, rotation):
        assert distribution_rank(rotation, [1.0, 0.0], budget=50, seed=0).rank == 1

    def test_bracket_demo_at_origin(self, bracket_demo):
        estimate = distribution_rank(bracket_demo, [0.0, 0.0], budget=50, seed=0)
        assert estimate.naive_rank == 1
        assert estimate.rank == 2
        assert 0 < estimate.samples_used <= 50
        np.testing.assert_allclose(estimate.basis.T @ estimate.basis, np.eye(2), atol=1e-12)

    def test_heisenberg_reaches_full_rank(self, heisenberg):
        estimate = distribution_rank(heisenberg, [0.2, -0.4, 1.0], budget=50, seed=3)
        assert estimate.naive_rank == 2
        assert estimate.rank == 3

    def test_zero_budget_is_naive(self, bracket_demo):
        estimate = distribution_rank(bracket_demo, [0.0, 0.0], budget=0)
        assert estimate.rank == estimate.naive_rank == 1

    def test_monotone_in_budget(self, heisenberg, bracket_demo, rng):
        for family in (heisenberg, bracket_demo):
            y = rng.uniform(-1.0, 1.0, size=family.dimension)
            ranks = [distribution_rank(family, y, budget=b, seed=7).rank for b in range(6)]
            assert ranks == sorted(ranks)
            assert ranks[-1] <= family.dimension
            assert ranks[0] >= distribution_rank(family, y, budget=0).naive_rank

    def test_deterministic_and_thread_independent(self, heisenberg):
        one = distribution_rank(heisenberg, [0.1, 0.2, 0.3], budget=20, seed=11, threads=1)
        again = distribution_rank(heisenberg, [0.1, 0.2, 0.3], budget=20, seed=11, threads=1)
        many = distribution_rank(heisenberg, [0.1, 0.2, 0.3], budget=20, seed=11, threads=4)
        assert one.generators == again.generators == many.generators
        np.testing.assert_array_equal(one.singular_values, many.singular_values)

    def test_generators_reproduce_vectors(self, bracket_demo):
        y = np.array([0.0, 0.0])
        estimate = distribution_rank(bracket_demo, y, budget=50, seed=0)
        assert len(estimate.generators) == len(estimate.vectors)
        for record, vector in zip(estimate.generators, estimate.vectors):
            g = DDiffeo(tuple(tuple(stage) for stage in record['ddiffeo']))
            base = apply_ddiffeo(bracket_demo, g.inverse(), y)
            jac = apply_with_pushforward(bracket_demo, g, base).jacobian
            np.testing.assert_array_equal(jac @ bracket_demo.evaluate(record['field'], base), vector)

    def test_all_samples_failing(self, rotation):
        with pytest.raises(EstimationError):
            distribution_rank(rotation, [1.0, 0.0], budget=5, integrator=IntegratorSettings(blowup_threshold=0.5))

    def test_argument_checks(self, rotation):
        with pytest.raises(DomainError):
            distribution_rank(rotation, [1.0, 0.0], budget=-1)
        with pytest.raises(DimensionError):
            distribution_rank(rotation, [1.0, 0.0, 0.0])

    def test_rank_is_invariant_under_ddiffeos(self, bracket_demo, rotation, rng):
        for family, y in ((bracket_demo, np.array([0.0, 0.0])), (rotation, np.array([0.6, 0.8]))):
            base_rank = distribution_rank(family, y, budget=50).rank
            for _ in range(3):
                g = sample_ddiffeo(family.size, rng, 0.5, 2.0)
                moved = apply_ddiffeo(family, g, y)
                assert distribution_rank(family, moved, budget=50).rank == base_rank


class TestSampling:

    def test_sample_shape(self, rng):
        for _ in range(50):
            g = sample_ddiffeo(3, rng, 0.3, 2.0)
            assert len(g) >= 1
            assert all(0 <= index < 3 and -0.3 <= time <= 0.3 for index, time in g.stages)

    def test_mean_length(self, rng):
        lengths = [len(sample_ddiffeo(2, rng, 0.3, 2.0)) for _ in range(4000)]
        assert np.mean(lengths) == pytest.approx(2.0, abs=0.1)

    def test_settings_from_config(self):
        config = ConfigManager(None)
        config.set('orbit.tau', 0.5)
        assert SamplingSettings.from_config(config) == SamplingSettings(tau=0.5)


class TestBrackets:

    def test_iterated_bracket_words(self, bracket_demo):
        words = [word for word, _ in iterated_brackets(bracket_demo, 3)]
        assert words[:4] == [(0,), (1,), (0, 1), (1, 0)]
        assert len(words) == 8
        with pytest.raises(DomainError):
            iterated_brackets(bracket_demo, 0)

    def test_constant_frame(self, constant_frame):
        assert bracket_span_rank(constant_frame, [1.0, 2.0, 3.0], 1)[0] == 3

    def test_bracket_demo(self, bracket_demo):
        assert bracket_span_rank(bracket_demo, [0.0, 0.0], 1)[0] == 1
        assert bracket_span_rank(bracket_demo, [0.0, 0.0], 2)[0] == 2

    @pytest.mark.parametrize("depth", [1, 2, 3])
    def test_rotation(self, rotation, depth):
        assert bracket_span_rank(rotation, [0.0, 0.0], depth)[0] == 0
        assert bracket_span_rank(rotation, [0.3, -2.0], depth)[0] == 1

    def test_flow_estimate_agrees_with_brackets(self, rotation, bracket_demo, heisenberg, rng):
        for family in (rotation, bracket_demo, heisenberg):
            for y in rng.uniform(-1.0, 1.0, size=(3, family.dimension)):
                flow_rank = distribution_rank(family, y, budget=50).rank
                assert flow_rank == bracket_span_rank(family, y, 3)[0]


class TestRankProfile:

    def test_bracket_demo_along_rde_trajectory(self, bracket_demo):
        rough = pure_area(2, (0, 1), 1.0, intervals=9)
        trajectory = solve_rde(bracket_demo, rough, [0.0, 0.0]).states
        ranks, consistent = rank_profile(bracket_demo, trajectory, budget=50, seed=0)
        assert ranks == [2] * 10
        assert consistent

    def test_rotation_on_unit_circle(self, rotation):
        angles = np.linspace(0.0, 2 * np.pi, 7)
        ranks, consistent = rank_profile(rotation, np.column_stack([np.cos(angles), np.sin(angles)]))
        assert ranks == [1] * 7 and consistent

    def test_inconsistent_profile_is_flagged(self, rotation):
        ranks, consistent = rank_profile(rotation, [[0.0, 0.0], [1.0, 0.0]], budget=5)
        assert ranks == [0, 1]
        assert not consistent

    def test_empty_trajectory(self, rotation):
        with pytest.raises(DomainError):
            rank_profile(rotation, [])
