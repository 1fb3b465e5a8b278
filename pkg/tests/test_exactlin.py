"""Exact linear algebra: solver certification, rank, literal round-trips."""

import random
from fractions import Fraction

import pytest

from aubincheck.exactlin import (
    RatMat,
    RatVec,
    RatParseError,
    format_rat,
    in_span,
    kernel_basis,
    parse_rat,
    rank,
    row_space_basis,
    solve_linear,
    vec,
)


def test_solve_identity():
    solved = solve_linear(RatMat.identity(2), vec(3, 4))
    assert solved is not None
    particular, basis = solved
    assert particular == vec(3, 4)
    assert basis == ()


def test_solve_single_equation_nullspace():
    solved = solve_linear(RatMat.from_rows([[1, 1]]), vec(0))
    assert solved is not None
    particular, basis = solved
    assert particular == vec(0, 0)
    assert basis == (vec(1, -1),)


def test_solve_inconsistent():
    assert solve_linear(RatMat.from_rows([[1], [1]]), vec(0, 1)) is None


def test_rank_examples():
    assert rank(RatMat.from_rows([[2, -4], [2, 4]])) == 2
    assert rank(RatMat.from_rows([[1, -4], [1, 4]])) == 2
    assert rank(RatMat.zero(3, 3)) == 0


def test_solver_certificates_random():
    rng = random.Random(20240)
    for _ in range(120):
        rows = rng.randint(1, 5)
        cols = rng.randint(1, 5)
        A = RatMat.from_rows(
            [
                [Fraction(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(cols)]
                for _ in range(rows)
            ]
        )
        b = RatVec(tuple(Fraction(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(rows)))
        solved = solve_linear(A, b)
        if solved is None:
            # infeasibility certificate: rank increases with the rhs appended
            aug = RatMat.from_rows(
                [list(A.row(i).entries) + [b[i]] for i in range(rows)]
            )
            assert rank(aug) == rank(A) + 1
            continue
        particular, basis = solved
        assert A.matvec(particular) == b
        for n in basis:
            assert A.matvec(n) == RatVec.zero(rows)
        assert len(basis) == cols - rank(A)


def test_rank_transpose_random():
    rng = random.Random(3)
    for _ in range(80):
        rows = rng.randint(1, 5)
        cols = rng.randint(1, 5)
        A = RatMat.from_rows(
            [[Fraction(rng.randint(-3, 3)) for _ in range(cols)] for _ in range(rows)]
        )
        assert rank(A) == rank(A.transpose())


def test_rat_literal_roundtrip():
    for text in ("25/16", "-1", "0", "7", "-3/4", "+2"):
        q = parse_rat(text)
        assert parse_rat(format_rat(q)) == q
    # canonical strings reproduce exactly
    for text in ("25/16", "-1", "0", "-3/4"):
        assert format_rat(parse_rat(text)) == text


def test_rat_literal_rejections():
    for text in ("1.5", "1e3", "1/-2", "", "a/b", "1/0", "--1"):
        with pytest.raises(RatParseError):
            parse_rat(text)


def test_row_space_and_span():
    basis = row_space_basis([vec(1, 1, 0), vec(2, 2, 0), vec(0, 0, 1)])
    assert len(basis) == 2
    assert in_span(vec(3, 3, 5), basis)
    assert not in_span(vec(1, 0, 0), basis)


def test_kernel_basis_zero_matrix():
    basis = kernel_basis(RatMat.zero(1, 2))
    assert basis == (vec(1, 0), vec(0, 1))
