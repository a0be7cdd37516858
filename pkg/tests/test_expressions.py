import math

import numpy as np
import pytest

from normkam.expressions import Expression, ExpressionError


def test_basic_evaluation():
    e = Expression("arctan(x) + 0.5*tanh(x)")
    assert e(1.0) == pytest.approx(math.atan(1.0) + 0.5 * math.tanh(1.0))
    xs = np.array([0.0, 1.0, -2.0])
    assert np.allclose(e(xs), np.arctan(xs) + 0.5 * np.tanh(xs))


def test_rational_and_power():
    e = Expression("x / sqrt(1 + x*x)")
    assert e(3.0) == pytest.approx(3.0 / math.sqrt(10.0))
    assert Expression("x**2 / (1 + x**2)")(2.0) == pytest.approx(0.8)


def test_evenness_detection():
    assert Expression("tanh(x*x)").is_even()
    assert Expression("x*x / (1 + x*x)").is_even()
    assert not Expression("arctan(x)").is_even()


def test_rejects_unknown_names():
    with pytest.raises(ExpressionError):
        Expression("y + 1")
    with pytest.raises(ExpressionError):
        Expression("__import__('os')")
    with pytest.raises(ExpressionError):
        Expression("eval('1')")
    with pytest.raises(ExpressionError):
        Expression("x.real")


def test_rejects_bad_syntax():
    with pytest.raises(ExpressionError):
        Expression("x +")
    with pytest.raises(ExpressionError):
        Expression("lambda x: x")


def test_alternative_function_table():
    e = Expression("arctan(x)")
    fn = e.as_callable({"arctan": lambda v: 7.0 * v})
    assert fn(2.0) == 14.0
