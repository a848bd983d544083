import math

import numpy as np
import pytest

from src.core.exceptions import DomainError, EvaluationError, ParseError
from src.fields.expressions import constant, diff, evaluate, evaluate_all, gradient, parse, to_text


class TestParse:

    @pytest.mark.parametrize("text, point, expected", [
        ("1 + 2*3", [0.0], 7.0),
        ("2^3^2", [0.0], 64.0),
        ("-y1^2", [3.0], -9.0),
        ("y1/y2", [1.0, 4.0], 0.25),
        ("sin(pi/2) + cos(0) + exp(0)", [0.0], 3.0),
        ("y1 - y2 - y3", [1.0, 2.0, 3.0], -4.0),
        ("y2^-1", [0.0, 2.0], 0.5),
        ("1.5e1 * .5", [0.0], 7.5),
    ])
    def test_values(self, text, point, expected):
        assert evaluate(parse(text, len(point)), point) == pytest.approx(expected, rel=1e-15)

    def test_whitespace_insensitive(self):
        assert to_text(parse(" y1*  ( y2+1 ) ", 2)) == to_text(parse("y1*(y2+1)", 2))

    @pytest.mark.parametrize("text, position", [
        ("y1 +", 4),
        ("sin y1", 4),
        ("y1 $ 2", 3),
        ("(y1", 3),
        ("y1 y2", 3),
    ])
    def test_syntax_errors_carry_positions(self, text, position):
        with pytest.raises(ParseError) as info:
            parse(text, 2)
        assert info.value.position == position

    def test_variable_out_of_range(self):
        with pytest.raises(ParseError) as info:
            parse("y1 + y3", 2)
        assert "y3" in str(info.value)
        assert info.value.position == 5

    def test_y0_is_out_of_range(self):
        with pytest.raises(ParseError):
            parse("y0", 2)

    def test_unknown_identifier(self):
        with pytest.raises(ParseError) as info:
            parse("tan(y1)", 1)
        assert "tan" in str(info.value)

    def test_non_integer_exponent(self):
        with pytest.raises(ParseError) as info:
            parse("y1^0.5", 1)
        assert "integer" in str(info.value)
        with pytest.raises(ParseError):
            parse("y1^y1", 1)

    def test_dimension_must_be_positive(self):
        with pytest.raises(DomainError):
            parse("1", 0)


class TestEvaluate:

    def test_division_by_zero(self):
        with pytest.raises(EvaluationError):
            evaluate(parse("1/y1", 1), [0.0])

    def test_overflow(self):
        with pytest.raises(EvaluationError):
            evaluate(parse("exp(y1)", 1), [1000.0])

    def test_wrong_point_size(self):
        with pytest.raises(DomainError):
            evaluate(parse("y1", 1), [1.0, 2.0])

    def test_evaluate_all(self):
        components = [parse("y1 * y2", 2), parse("-y2", 2), parse("pi", 2)]
        np.testing.assert_array_equal(evaluate_all(components, [2.0, 3.0]), [6.0, -3.0, math.pi])


class TestDiff:

    @pytest.mark.parametrize("text, index, point, expected", [
        ("y1*y2", 1, [2.0, 3.0], 3.0),
        ("y1^3", 1, [2.0], 12.0),
        ("sin(y1)*y2", 2, [0.3, 1.0], math.sin(0.3)),
        ("exp(2*y1)", 1, [0.0], 2.0),
        ("1/y1", 1, [2.0], -0.25),
        ("cos(y1)", 1, [0.0], 0.0),
    ])
    def test_known_derivatives(self, text, index, point, expected):
        e = parse(text, len(point))
        assert evaluate(diff(e, index), point) == pytest.approx(expected, abs=1e-15)

    def test_constant_derivative_is_zero(self):
        assert diff(parse("pi + 3", 2), 2).is_zero

    def test_bad_index(self):
        with pytest.raises(DomainError):
            diff(parse("y1", 2), 3)
        with pytest.raises(DomainError):
            diff(parse("y1", 2), 0)

    def test_against_central_differences(self, rng):
        atoms = ["y1", "y2", "y3", "0.5", "2"]
        templates = ["({a}+{b})", "({a}*{b})", "sin({a})", "cos({a})", "exp(0.3*{a})",
                     "({a})^2", "({a}-{b})", "({a})/(2+({b})^2)"]

        def random_expression(depth):
            if depth == 0:
                return atoms[rng.integers(len(atoms))]
            template = templates[rng.integers(len(templates))]
            return template.format(a=random_expression(depth - 1), b=random_expression(depth - 1))

        h = 1e-5
        for _ in range(100):
            e = parse(random_expression(3), 3)
            y = rng.uniform(-1.0, 1.0, size=3)
            grad = gradient(e)
            for i in range(3):
                step = np.zeros(3)
                step[i] = h
                numeric = (evaluate(e, y + step) - evaluate(e, y - step)) / (2 * h)
                exact = evaluate(grad[i], y)
                assert exact == pytest.approx(numeric, rel=1e-6, abs=1e-6)


class TestPrinting:

    @pytest.mark.parametrize("text", [
        "y1^2 + 3*y2",
        "sin(y1)*exp(-y2)",
        "(y1 + 1)^-2",
        "0.1*y1 - pi",
        "y1/(y2 - 2)",
        "exp(1)*cos(y2^3)",
    ])
    def test_printed_text_parses_back(self, text):
        e = parse(text, 2)
        again = parse(to_text(e), 2)
        for y in ([0.3, -0.7], [1.1, 0.4], [-2.0, 5.0]):
            assert evaluate(again, y) == pytest.approx(evaluate(e, y), rel=1e-14)

    def test_power_uses_caret(self):
        assert "^" in to_text(parse("y1^3", 1))
        assert "**" not in to_text(parse("y1^3", 1))

    def test_float_literal_is_exact(self):
        assert to_text(parse("0.1", 1)) == "0.1"


def test_constant():
    assert evaluate(constant(2.5, 3), [0.0, 0.0, 0.0]) == 2.5
    assert to_text(constant(4.0, 1)) == "4"
