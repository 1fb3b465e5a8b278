"""Problem parsing, symbolic differentiation, and point data."""

import random
from fractions import Fraction

import pytest

from aubincheck.exactlin import RatMat, vec
from aubincheck.problem import (
    Expr,
    InfeasibleReferenceError,
    ProblemError,
    lagrangian_gradient,
    parse_expr,
    parse_problem,
    point_data,
)
from conftest import EXAMPLE_TEXT, INFEASIBLE_REFERENCE_TEXT

F = Fraction


def test_parse_example(example_spec):
    assert (example_spec.m, example_spec.n, example_spec.s) == (1, 2, 2)
    assert example_spec.qtilde_value() == vec(0, 0)


def test_infeasible_reference_rejected():
    with pytest.raises(InfeasibleReferenceError) as err:
        parse_problem(INFEASIBLE_REFERENCE_TEXT)
    # qt(pbar, xbar) = (1, 1) violates both orthant rows
    assert "(1, 1)" in str(err.value)
    assert "row" in str(err.value)


def test_inner_variable_in_f_rejected():
    bad = EXAMPLE_TEXT.replace("f1 = x1 - p1", "f1 = y1")
    with pytest.raises(ProblemError) as err:
        parse_problem(bad)
    assert "inner variables" in str(err.value)


def test_syntax_error_carries_position():
    with pytest.raises(ProblemError) as err:
        parse_expr("x1 + + ", m=1, n=1, line=7, col0=0)
    assert err.value.line == 7
    assert err.value.col is not None


def test_expr_rejects_unknown_names_and_ranges():
    with pytest.raises(ProblemError):
        parse_expr("x3", m=1, n=2, line=1)
    with pytest.raises(ProblemError):
        parse_expr("p2", m=1, n=2, line=1)
    with pytest.raises(ProblemError):
        parse_expr("x1 x2", m=1, n=2, line=1)  # implicit product


def test_differentiate_examples():
    m, n = 1, 2
    e = parse_expr("-x2 + x2^2", m, n)
    # d/dx2 -> -1 + 2 x2
    want = parse_expr("-1 + 2*x2", m, n)
    assert e.diff(m + 1) == want
    q = parse_expr("p1 - x1 + 2*y1 - 4*y2", m, n)
    assert q.diff(m + n + 0) == Expr.constant(F(2), m + 2 * n)
    assert Expr.constant(F(5), m + 2 * n).diff(0) == Expr.constant(F(0), m + 2 * n)


def test_point_data_example(example_spec):
    pd = point_data(example_spec)
    assert pd.b == RatMat.from_rows([[2, -4], [2, 4]])
    assert pd.grad_qtilde == RatMat.from_rows([[1, 1, -4], [0, 1, 4]])
    assert pd.grad_f == RatMat.from_rows([[-1, 1, 0], [0, 0, -1]])


def test_lagrangian_gradient(example_spec):
    pd = point_data(example_spec)
    assert lagrangian_gradient(pd, vec(0, 0)) == pd.grad_f
    # bilinear inner term: q1 = x1*y1 with no parameters
    text = """
[problem]
m = 0
n = 1
s = 1
[functions]
f1 = x1
q1 = x1*y1
[set]
ineq: 1 <= 0
[reference]
p =
x = 0
"""
    spec = parse_problem(text)
    pd2 = point_data(spec)
    assert pd2.b == RatMat.from_rows([[0]])  # x1 evaluated at 0
    assert pd2.hess_b == (RatMat.from_rows([[1]]),)
    assert lagrangian_gradient(pd2, vec(2)) == RatMat.from_rows([[3]])


def test_differentiation_order_consistency_random():
    """Substitute-then-differentiate equals chain rule, as exact polynomials."""
    rng = random.Random(77)
    m, n = 2, 2
    nvars = m + 2 * n
    for _ in range(40):
        e = Expr.constant(F(0), nvars)
        for _ in range(rng.randint(1, 5)):
            term = Expr.constant(F(rng.randint(-3, 3)), nvars)
            for _ in range(rng.randint(0, 3)):
                term = term * Expr.variable(rng.randrange(nvars), nvars)
            e = e + term
        for j in range(n):
            direct = e.substitute_y_with_x(m, n).diff(m + j)
            chained = (e.diff(m + j) + e.diff(m + n + j)).substitute_y_with_x(m, n)
            assert direct == chained


def test_evaluation_matches_symbolic_derivative():
    """Derivative evaluation agrees with polynomial identity testing.

    A univariate restriction of degree d is pinned by d+1 sample values, so
    comparing the evaluated derivative against difference quotients of the
    exact restriction at rational nodes is a complete check.
    """
    m, n = 1, 1
    e = parse_expr("3*x1^3 - x1*p1 + 2", m, n)
    var = 1  # x1
    rng = random.Random(13)
    for _ in range(10):
        p_val = F(rng.randint(-3, 3), rng.randint(1, 4))
        x_val = F(rng.randint(-3, 3), rng.randint(1, 4))
        h_step = F(1, rng.randint(2, 9))
        # exact quotient of the cubic through symmetric nodes of spacing h:
        # (e(x+h) - e(x-h)) / (2h) = e'(x) + (h^2/6) e'''(x)
        up = e.evaluate((p_val, x_val + h_step, F(0)))
        down = e.evaluate((p_val, x_val - h_step, F(0)))
        quotient = (up - down) / (2 * h_step)
        third = e.diff(var).diff(var).diff(var).evaluate((p_val, x_val, F(0)))
        expected = e.diff(var).evaluate((p_val, x_val, F(0))) + h_step**2 * third / 6
        assert quotient == expected


def test_dimension_mismatches_rejected():
    with pytest.raises(ProblemError):
        parse_problem(EXAMPLE_TEXT.replace("ineq: 1 0 <= 0", "ineq: 1 0 0 <= 0"))
    with pytest.raises(ProblemError):
        parse_problem(EXAMPLE_TEXT.replace("x = 0 0", "x = 0"))
    with pytest.raises(ProblemError):
        parse_problem(EXAMPLE_TEXT.replace("f2 = -x2 + x2^2\n", ""))
