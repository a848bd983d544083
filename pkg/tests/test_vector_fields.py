import numpy as np
import pytest

from src.core.exceptions import DimensionError, DomainError, EvaluationError, InputError, ParseError
from src.fields.vector_fields import (FamilyFactory, LinearField, SymbolicField, VectorFieldFamily,
                                      builtin_family, signature_ode_family)


def family_of(d, *fields):
    return VectorFieldFamily([SymbolicField.from_texts(components, d) for components in fields])


class TestBrackets:

    def test_constant_fields_commute(self):
        family = family_of(2, ["1", "0"], ["0", "1"])
        bracket = family.lie_bracket(0, 1)
        assert bracket.component_texts() == ["0", "0"]

    def test_bracket_demo(self, bracket_demo, rng):
        bracket = bracket_demo.lie_bracket(0, 1)
        for y in rng.normal(size=(10, 2)):
            np.testing.assert_array_equal(bracket.evaluate(y), [0.0, 1.0])

    def test_heisenberg_bracket_is_vertical(self, heisenberg, rng):
        bracket = heisenberg.lie_bracket(0, 1)
        for y in rng.normal(size=(10, 3)):
            np.testing.assert_allclose(bracket.evaluate(y), [0.0, 0.0, 1.0], atol=1e-15)

    def test_signature_ode_bracket(self, sig2, rng):
        bracket = sig2.lie_bracket(0, 1)
        for a in rng.normal(size=(10, 7)):
            expected = np.zeros(7)
            expected[4] = a[0]
            expected[5] = -a[0]
            np.testing.assert_allclose(bracket.evaluate(a), expected, atol=1e-15)

    def test_antisymmetry(self, rng):
        family = family_of(2, ["sin(y2)", "y1^2"], ["exp(y1)*y2", "cos(y1 - y2)"])
        forward, backward = family.lie_bracket(0, 1), family.lie_bracket(1, 0)
        for y in rng.uniform(-2.0, 2.0, size=(100, 2)):
            np.testing.assert_allclose(forward.evaluate(y), -backward.evaluate(y), atol=1e-10)

    def test_jacobi_identity(self, rng):
        family = family_of(3, ["y2", "y1*y3", "1"], ["y3^2", "0", "y1 - y2"], ["y1*y2", "y3", "y2^2"])

        def nested(a, b, c):
            return family.lie_bracket(a, b).bracket(family.field(c))

        cyclic = [nested(0, 1, 2), nested(1, 2, 0), nested(2, 0, 1)]
        for y in rng.uniform(-1.0, 1.0, size=(50, 3)):
            total = sum(f.evaluate(y) for f in cyclic)
            np.testing.assert_allclose(total, 0.0, atol=1e-8)

    def test_brackets_are_cached(self, heisenberg):
        assert heisenberg.lie_bracket(0, 1) is heisenberg.lie_bracket(0, 1)

    def test_index_bounds(self, rotation):
        with pytest.raises(DomainError):
            rotation.lie_bracket(0, 1)


class TestLinearFields:

    def test_bracket_is_commutator(self, rng):
        a, b = rng.normal(size=(2, 3, 3))
        bracket = LinearField(a).bracket(LinearField(b))
        y = rng.normal(size=3)
        np.testing.assert_allclose(bracket.evaluate(y), (b @ a - a @ b) @ y, atol=1e-14)

    def test_symbolic_view_agrees(self, rng):
        matrix = rng.normal(size=(2, 2))
        field = LinearField(matrix)
        y = rng.normal(size=2)
        np.testing.assert_allclose(field.as_symbolic().evaluate(y), field.evaluate(y), atol=1e-14)

    def test_mixed_bracket(self, rng):
        linear = LinearField([[0.0, -1.0], [1.0, 0.0]])
        symbolic = SymbolicField.from_texts(["-y2", "y1"], 2)
        bracket = linear.bracket(symbolic)
        np.testing.assert_allclose(bracket.evaluate(rng.normal(size=2)), 0.0, atol=1e-14)

    def test_square_matrix_required(self):
        with pytest.raises(DimensionError):
            LinearField(np.zeros((2, 3)))


class TestFamilies:

    def test_signature_ode_dimensions(self, sig3):
        assert sig3.dimension == 15
        assert sig3.size == 2
        assert sig3.to_json() == {'builtin': 'signature-ode', 'N': 3, 'n': 2}

    def test_signature_ode_fields(self, sig2):
        a = np.arange(1.0, 8.0)
        # f^1(a) = (0, a_0, 0, a_1, 0, a_2, 0)
        np.testing.assert_array_equal(sig2.evaluate(0, a), [0, 1, 0, 2, 0, 3, 0])
        np.testing.assert_array_equal(sig2.evaluate(1, a), [0, 0, 1, 0, 2, 0, 3])

    def test_frame(self, heisenberg):
        frame = heisenberg.frame(np.array([2.0, 4.0, 0.0]))
        np.testing.assert_allclose(frame, [[1.0, 0.0], [0.0, 1.0], [-2.0, 1.0]])

    def test_combination(self, heisenberg):
        combined = heisenberg.combination([2.0, -1.0])
        np.testing.assert_allclose(combined.evaluate(np.array([0.0, 2.0, 0.0])), [2.0, -1.0, -2.0])
        with pytest.raises(DimensionError):
            heisenberg.combination([1.0])

    def test_log_ode_field_adds_brackets(self, heisenberg):
        field = heisenberg.log_ode_field(np.zeros(2), np.array([[0.0, 0.5], [-0.5, 0.0]]))
        np.testing.assert_allclose(field.evaluate(np.ones(3)), [0.0, 0.0, 0.5])

    def test_json_round_trip(self, heisenberg, rng):
        texts = [f.component_texts() for f in heisenberg.fields]
        rebuilt = FamilyFactory.create_family(family_of(3, *texts).to_json())
        assert rebuilt.to_json() == {'d': 3, 'n': 2, 'fields': texts}
        for y in rng.normal(size=(5, 3)):
            np.testing.assert_allclose(rebuilt.frame(y), heisenberg.frame(y), atol=1e-15)

    def test_unknown_builtin(self):
        with pytest.raises(InputError):
            builtin_family('lorenz')

    def test_signature_ode_needs_parameters(self):
        with pytest.raises(InputError):
            FamilyFactory.create_family({'builtin': 'signature-ode', 'N': 2})
        with pytest.raises(DomainError):
            signature_ode_family(0, 2)


class TestFactory:

    def test_parse_error_names_field(self):
        with pytest.raises(ParseError) as info:
            FamilyFactory.create_family({'d': 2, 'n': 2, 'fields': [["1", "0"], ["0", "y3"]]})
        assert "field 1" in str(info.value)
        assert info.value.position == 0

    def test_component_count(self):
        with pytest.raises(DimensionError):
            FamilyFactory.create_family({'d': 2, 'n': 1, 'fields': [["1"]]})

    def test_field_count(self):
        with pytest.raises(DimensionError):
            FamilyFactory.create_family({'d': 2, 'n': 2, 'fields': [["1", "0"]]})

    def test_missing_keys(self):
        with pytest.raises(InputError):
            FamilyFactory.create_family({'fields': []})
        with pytest.raises(InputError):
            FamilyFactory.create_family([1, 2])

    def test_field_failing_on_box(self):
        with pytest.raises(EvaluationError):
            FamilyFactory.create_family({'d': 1, 'n': 1, 'fields': [["1/y1"]]})

    def test_custom_box(self):
        family = FamilyFactory.create_family({'d': 1, 'n': 1, 'fields': [["1/y1"]], 'box': [1.0, 2.0]})
        assert family.evaluate(0, np.array([2.0]))[0] == 0.5
