import numpy as np
import pytest
from scipy.linalg import expm

from src.config.config_manager import ConfigManager
from src.config.data_structures import DDiffeo, FlowRequest
from src.core.exceptions import BlowUpError, DimensionError, DomainError
from src.fields.flows import (IntegratorSettings, apply_ddiffeo, apply_with_pushforward, flow,
                              flow_with_jacobian, inverse_ddiffeo, pushforward)
from src.fields.vector_fields import LinearField, SymbolicField, VectorFieldFamily


def family_of(d, *fields):
    return VectorFieldFamily([SymbolicField.from_texts(components, d) for components in fields])


@pytest.fixture(scope='module')
def wavy():
    return family_of(2, ["sin(y2)", "0.5"], ["y1*y2/4", "cos(y1)"], ["1", "0"])


class TestIntegratorSettings:

    @pytest.mark.parametrize("duration, step, expected", [
        (0.1, None, 64),
        (1.0, None, 100),
        (-2.5, None, 250),
        (1.0, 0.001, 1000),
        (0.3, 0.1, 3),
    ])
    def test_step_counts(self, duration, step, expected):
        assert IntegratorSettings().steps_for(duration, step) == expected

    def test_from_config(self):
        config = ConfigManager(None)
        config.set("integrator.min_steps", 8)
        config.set("integrator.max_step", 0.5)
        config.set("integrator.blowup_threshold", 10.0)
        settings = IntegratorSettings.from_config(config)
        assert settings == IntegratorSettings(min_steps=8, max_step=0.5, blowup_threshold=10.0)


class TestFlow:

    def test_zero_field(self, rng):
        family = family_of(2, ["0", "0"])
        y = rng.normal(size=2)
        np.testing.assert_array_equal(flow(family, FlowRequest(y, 3.7, index=0)), y)

    def test_zero_time_is_identity(self, wavy, rng):
        y = rng.normal(size=2)
        np.testing.assert_array_equal(flow(wavy, FlowRequest(y, 0.0, index=1)), y)

    def test_quarter_rotation(self, rotation):
        endpoint = flow(rotation, FlowRequest([1.0, 0.0], np.pi / 2, index=0, step=1e-3))
        np.testing.assert_allclose(endpoint, [0.0, 1.0], atol=1e-10)

    def test_quarter_rotation_default_step(self, rotation):
        endpoint = flow(rotation, FlowRequest([1.0, 0.0], np.pi / 2, index=0))
        np.testing.assert_allclose(endpoint, [0.0, 1.0], atol=1e-9)

    def test_group_law(self, rotation, wavy, rng):
        for _ in range(100):
            s, t = rng.uniform(-1.0, 1.0, size=2)
            y = rng.uniform(-1.0, 1.0, size=2)
            family, index = (rotation, 0) if rng.random() < 0.5 else (wavy, int(rng.integers(3)))
            middle = flow(family, FlowRequest(y, s, index=index))
            twice = flow(family, FlowRequest(middle, t, index=index))
            once = flow(family, FlowRequest(y, s + t, index=index))
            np.testing.assert_allclose(twice, once, atol=1e-9)

    def test_backward_flow_inverts(self, wavy, rng):
        for _ in range(20):
            y = rng.uniform(-1.0, 1.0, size=2)
            t = rng.uniform(-1.0, 1.0)
            there = flow(wavy, FlowRequest(y, t, index=1))
            np.testing.assert_allclose(flow(wavy, FlowRequest(there, -t, index=1)), y, atol=1e-9)

    def test_direction_flow(self, heisenberg):
        endpoint = flow(heisenberg, FlowRequest([0.0, 0.0, 0.0], 1.0, direction=[1.0, 1.0]))
        np.testing.assert_allclose(endpoint, [1.0, 1.0, 0.0], atol=1e-14)

    def test_rk4_is_fourth_order(self, rotation):
        exact = np.array([np.cos(1.0), np.sin(1.0)])
        coarse = flow(rotation, FlowRequest([1.0, 0.0], 1.0, index=0, step=0.1))
        fine = flow(rotation, FlowRequest([1.0, 0.0], 1.0, index=0, step=0.05))
        ratio = np.linalg.norm(coarse - exact) / np.linalg.norm(fine - exact)
        assert 14.0 < ratio < 18.0

    def test_blow_up(self):
        family = VectorFieldFamily([SymbolicField.from_texts(["y1^2"], 1)])
        with pytest.raises(BlowUpError) as info:
            flow(family, FlowRequest([1.0], 2.0, index=0))
        assert 0.9 < info.value.last_time < 1.1

    def test_start_dimension_checked(self, rotation):
        with pytest.raises(DimensionError):
            flow(rotation, FlowRequest([1.0, 0.0, 0.0], 1.0, index=0))

    def test_request_validation(self):
        with pytest.raises(DomainError):
            FlowRequest([0.0], 1.0)
        with pytest.raises(DomainError):
            FlowRequest([0.0], 1.0, index=0, direction=[1.0])
        with pytest.raises(DomainError):
            FlowRequest([0.0], np.inf, index=0)
        with pytest.raises(DomainError):
            FlowRequest([0.0], 1.0, index=0, step=0.0)


class TestDDiffeo:

    def test_empty_is_identity(self, wavy, rng):
        y = rng.normal(size=2)
        result = apply_with_pushforward(wavy, DDiffeo(), y)
        np.testing.assert_array_equal(result.endpoint, y)
        np.testing.assert_array_equal(result.jacobian, np.eye(2))
        assert not result.near_singular

    def test_single_stage_is_flow(self, wavy, rng):
        y = rng.normal(size=2)
        np.testing.assert_array_equal(apply_ddiffeo(wavy, DDiffeo(((2, 0.7),)), y),
                                      flow(wavy, FlowRequest(y, 0.7, index=2)))

    def test_inverse(self, wavy, rng):
        for _ in range(20):
            stages = tuple((int(rng.integers(3)), float(rng.uniform(-1.0, 1.0))) for _ in range(3))
            g = DDiffeo(stages)
            y = rng.uniform(-1.0, 1.0, size=2)
            back = apply_ddiffeo(wavy, inverse_ddiffeo(g), apply_ddiffeo(wavy, g, y))
            np.testing.assert_allclose(back, y, atol=1e-9)

    def test_inverse_reverses_and_negates(self):
        g = DDiffeo(((0, 1.0), (2, -0.5)))
        assert inverse_ddiffeo(g).stages == ((2, 0.5), (0, -1.0))

    def test_constant_fields_commute(self, rng):
        family = family_of(2, ["1", "0.5"], ["-2", "3"])
        y = rng.normal(size=2)
        a, b = rng.normal(size=2)
        first = apply_ddiffeo(family, DDiffeo(((0, a), (1, b))), y)
        second = apply_ddiffeo(family, DDiffeo(((1, b), (0, a))), y)
        np.testing.assert_allclose(first, second, atol=1e-12)

    def test_blow_up_names_stage(self):
        family = VectorFieldFamily([SymbolicField.from_texts(["y1^2"], 1)])
        with pytest.raises(BlowUpError) as info:
            apply_ddiffeo(family, DDiffeo(((0, 0.1), (0, 5.0))), [1.0])
        assert info.value.stage == 1
        assert "stage 1" in str(info.value)

    def test_bad_index(self, rotation):
        with pytest.raises(DomainError):
            apply_ddiffeo(rotation, DDiffeo(((1, 1.0),)), [1.0, 0.0])


class TestPushforward:

    def test_linear_field_gives_matrix_exponential(self, rng):
        for _ in range(10):
            a = rng.normal(scale=0.3, size=(3, 3))
            family = VectorFieldFamily([LinearField(a)])
            t = float(rng.uniform(-1.0, 1.0))
            jac = pushforward(family, DDiffeo(((0, t),)), rng.normal(size=3))
            np.testing.assert_allclose(jac, expm(t * a), atol=1e-8)

    def test_matches_finite_differences(self, wavy, rng):
        h = 1e-5
        for _ in range(50):
            g = DDiffeo(tuple((int(rng.integers(3)), float(rng.uniform(-1.0, 1.0))) for _ in range(2)))
            y = rng.uniform(-1.0, 1.0, size=2)
            jac = pushforward(wavy, g, y)
            for i in range(2):
                step = np.zeros(2)
                step[i] = h
                column = (apply_ddiffeo(wavy, g, y + step) - apply_ddiffeo(wavy, g, y - step)) / (2 * h)
                assert np.linalg.norm(jac[:, i] - column) <= 1e-4 * max(1.0, np.linalg.norm(column))

    def test_cocycle(self, wavy, rng):
        for _ in range(10):
            g1 = DDiffeo(((0, float(rng.uniform(-1, 1))), (1, float(rng.uniform(-1, 1)))))
            g2 = DDiffeo(((2, float(rng.uniform(-1, 1))), (0, float(rng.uniform(-1, 1)))))
            y = rng.uniform(-1.0, 1.0, size=2)
            composed = pushforward(wavy, DDiffeo(g1.stages + g2.stages), y)
            chained = pushforward(wavy, g2, apply_ddiffeo(wavy, g1, y)) @ pushforward(wavy, g1, y)
            np.testing.assert_allclose(composed, chained, atol=1e-8)

    def test_flow_with_jacobian_of_rotation(self, rotation):
        result = flow_with_jacobian(rotation, FlowRequest([1.0, 0.0], np.pi / 2, index=0, step=1e-3))
        np.testing.assert_allclose(result.jacobian, [[0.0, -1.0], [1.0, 0.0]], atol=1e-10)
        assert abs(np.linalg.det(result.jacobian) - 1.0) < 1e-10
        assert not result.near_singular
