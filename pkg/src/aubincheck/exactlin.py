"""Exact rational scalars, vectors, matrices, and linear solvers.

Scalars are ``fractions.Fraction`` values, which Python already keeps in
lowest terms with a positive denominator.  Vectors and matrices are immutable
tuples of them.  Nothing in this module (or in anything built on top of it)
touches floating point: solvers certify their output structurally
(``A @ x == b`` holds exactly), and equality of values is ordinary structural
equality.

Elimination is fraction-free (Bareiss pivoting on denominator-cleared integer
rows), which bounds intermediate growth at the small dimensions this library
targets; back substitution then reintroduces fractions only for the final
solution values.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence, Union

Rat = Fraction
RatLike = Union[Rat, int, str]

_RAT_LITERAL = re.compile(r"^[+-]?[0-9]+(?:/[0-9]+)?$")


class RatParseError(ValueError):
    """Raised for text that is not a valid rational literal."""


def parse_rat(text: str) -> Rat:
    """Parse a rational literal: optional sign, integer, optional "/posint"."""
    text = text.strip()
    if not _RAT_LITERAL.match(text):
        raise RatParseError(f"not a rational literal: {text!r}")
    if "/" in text:
        num, den = text.split("/")
        if int(den) == 0:
            raise RatParseError(f"zero denominator in rational literal: {text!r}")
        return Fraction(int(num), int(den))
    return Fraction(int(text))


def format_rat(q: Rat) -> str:
    """Canonical text form, inverse of :func:`parse_rat` on canonical input."""
    return str(q)


def as_rat(value: RatLike) -> Rat:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rat(value)
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


@dataclass(frozen=True)
class RatVec:
    """Immutable vector of exact rationals."""

    entries: tuple[Rat, ...]

    @staticmethod
    def from_values(values: Iterable[RatLike]) -> "RatVec":
        return RatVec(tuple(as_rat(v) for v in values))

    @staticmethod
    def zero(dim: int) -> "RatVec":
        return RatVec((Fraction(0),) * dim)

    @staticmethod
    def unit(dim: int, index: int) -> "RatVec":
        return RatVec(tuple(Fraction(1 if i == index else 0) for i in range(dim)))

    @property
    def dim(self) -> int:
        return len(self.entries)

    def __getitem__(self, i: int) -> Rat:
        return self.entries[i]

    def __iter__(self):
        return iter(self.entries)

    def __add__(self, other: "RatVec") -> "RatVec":
        self._check_dim(other)
        return RatVec(tuple(a + b for a, b in zip(self.entries, other.entries)))

    def __sub__(self, other: "RatVec") -> "RatVec":
        self._check_dim(other)
        return RatVec(tuple(a - b for a, b in zip(self.entries, other.entries)))

    def __neg__(self) -> "RatVec":
        return RatVec(tuple(-a for a in self.entries))

    def scale(self, c: RatLike) -> "RatVec":
        c = as_rat(c)
        return RatVec(tuple(c * a for a in self.entries))

    def dot(self, other: "RatVec") -> Rat:
        self._check_dim(other)
        return sum((a * b for a, b in zip(self.entries, other.entries)), Fraction(0))

    def is_zero(self) -> bool:
        return all(a == 0 for a in self.entries)

    def concat(self, other: "RatVec") -> "RatVec":
        return RatVec(self.entries + other.entries)

    def take(self, indices: Sequence[int]) -> "RatVec":
        return RatVec(tuple(self.entries[i] for i in indices))

    def _check_dim(self, other: "RatVec") -> None:
        if self.dim != other.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __str__(self) -> str:
        return "(" + ", ".join(format_rat(a) for a in self.entries) + ")"


def vec(*values: RatLike) -> RatVec:
    """Shorthand constructor: ``vec(1, "-2/3", 0)``."""
    return RatVec.from_values(values)


@dataclass(frozen=True)
class RatMat:
    """Immutable matrix of exact rationals, stored row-major."""

    entries: tuple[Rat, ...]
    rows: int
    cols: int

    def __post_init__(self):
        if len(self.entries) != self.rows * self.cols:
            raise ValueError("entry count does not match rows x cols")

    @staticmethod
    def from_rows(rows: Sequence[Sequence[RatLike]]) -> "RatMat":
        nrows = len(rows)
        ncols = len(rows[0]) if nrows else 0
        flat: list[Rat] = []
        for r in rows:
            if len(r) != ncols:
                raise ValueError("ragged rows")
            flat.extend(as_rat(v) for v in r)
        return RatMat(tuple(flat), nrows, ncols)

    @staticmethod
    def from_row_vectors(rows: Sequence[RatVec], cols: int | None = None) -> "RatMat":
        if rows:
            cols = rows[0].dim
        elif cols is None:
            raise ValueError("empty matrix needs an explicit column count")
        flat: list[Rat] = []
        for r in rows:
            if r.dim != cols:
                raise ValueError("ragged rows")
            flat.extend(r.entries)
        return RatMat(tuple(flat), len(rows), cols)

    @staticmethod
    def zero(rows: int, cols: int) -> "RatMat":
        return RatMat((Fraction(0),) * (rows * cols), rows, cols)

    @staticmethod
    def identity(n: int) -> "RatMat":
        return RatMat.from_rows([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    def __getitem__(self, key: tuple[int, int]) -> Rat:
        i, j = key
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> RatVec:
        return RatVec(self.entries[i * self.cols : (i + 1) * self.cols])

    def col(self, j: int) -> RatVec:
        return RatVec(tuple(self.entries[i * self.cols + j] for i in range(self.rows)))

    @property
    def row_vectors(self) -> tuple[RatVec, ...]:
        return tuple(self.row(i) for i in range(self.rows))

    def transpose(self) -> "RatMat":
        return RatMat(
            tuple(self.entries[i * self.cols + j] for j in range(self.cols) for i in range(self.rows)),
            self.cols,
            self.rows,
        )

    def matvec(self, v: RatVec) -> RatVec:
        if v.dim != self.cols:
            raise ValueError(f"dimension mismatch: {self.cols}-column matrix, {v.dim}-vector")
        return RatVec(tuple(self.row(i).dot(v) for i in range(self.rows)))

    def matmul(self, other: "RatMat") -> "RatMat":
        if self.cols != other.rows:
            raise ValueError("dimension mismatch in matrix product")
        cols = [other.col(j) for j in range(other.cols)]
        return RatMat.from_rows(
            [[self.row(i).dot(c) for c in cols] for i in range(self.rows)]
        )

    def __add__(self, other: "RatMat") -> "RatMat":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("dimension mismatch in matrix sum")
        return RatMat(tuple(a + b for a, b in zip(self.entries, other.entries)), self.rows, self.cols)

    def scale(self, c: RatLike) -> "RatMat":
        c = as_rat(c)
        return RatMat(tuple(c * a for a in self.entries), self.rows, self.cols)

    def submatrix_cols(self, cols: Sequence[int]) -> "RatMat":
        return RatMat.from_rows(
            [[self[i, j] for j in cols] for i in range(self.rows)]
        ) if self.rows else RatMat((), 0, len(cols))

    def __str__(self) -> str:
        return "[" + "; ".join(str(self.row(i)) for i in range(self.rows)) + "]"


def _int_rows(rows: Sequence[RatVec], rhs: Sequence[Rat] | None = None) -> list[list[int]]:
    """Clear denominators row-wise (a valid row operation), keeping any rhs."""
    out: list[list[int]] = []
    for idx, r in enumerate(rows):
        vals = list(r.entries) + ([rhs[idx]] if rhs is not None else [])
        scale = lcm(*(v.denominator for v in vals)) if vals else 1
        out.append([int(v * scale) for v in vals])
    return out


def _bareiss(rows: list[list[int]]) -> tuple[list[list[int]], list[tuple[int, int]]]:
    """Fraction-free forward elimination; returns reduced rows and pivots."""
    m = len(rows)
    ncols = len(rows[0]) if m else 0
    pivots: list[tuple[int, int]] = []
    prev = 1
    r = 0
    for c in range(ncols):
        if r == m:
            break
        p = next((i for i in range(r, m) if rows[i][c] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        for i in range(r + 1, m):
            for j in range(c + 1, ncols):
                num = rows[r][c] * rows[i][j] - rows[i][c] * rows[r][j]
                q, rem = divmod(num, prev)
                if rem:  # Bareiss division is exact; anything else is a bug
                    raise ArithmeticError("inexact division in fraction-free elimination")
                rows[i][j] = q
            rows[i][c] = 0
        prev = rows[r][c]
        pivots.append((r, c))
        r += 1
    return rows, pivots


def rank(A: RatMat) -> int:
    """Exact rank via fraction-free elimination."""
    if A.rows == 0 or A.cols == 0:
        return 0
    _, pivots = _bareiss(_int_rows(A.row_vectors))
    return len(pivots)


def rank_rows(rows: Sequence[RatVec]) -> int:
    if not rows:
        return 0
    _, pivots = _bareiss(_int_rows(rows))
    return len(pivots)


def _canon_kernel_vector(v: RatVec) -> RatVec:
    """Primitive integer form with the first nonzero entry positive."""
    nz = [a for a in v.entries if a != 0]
    if not nz:
        return v
    scale = Fraction(lcm(*(a.denominator for a in nz)))
    ints = [a * scale for a in v.entries]
    from math import gcd

    g = 0
    for a in ints:
        g = gcd(g, int(a))
    out = [a / g for a in ints]
    first = next(a for a in out if a != 0)
    if first < 0:
        out = [-a for a in out]
    return RatVec(tuple(out))


def solve_linear(A: RatMat, b: RatVec) -> tuple[RatVec, tuple[RatVec, ...]] | None:
    """Solve ``A x = b`` exactly.

    Returns ``None`` when the system is infeasible; otherwise a particular
    solution (free variables set to zero) together with a canonical basis of
    ``ker A``.
    """
    if A.rows != b.dim:
        raise ValueError(f"dimension mismatch: {A.rows} equations, rhs of dim {b.dim}")
    n = A.cols
    reduced, pivots = _bareiss(_int_rows(A.row_vectors, b.entries))
    if any(c == n for _, c in pivots):
        return None
    pivot_cols = [c for _, c in pivots]
    free_cols = [c for c in range(n) if c not in pivot_cols]

    def back_substitute(free_values: dict[int, Rat], rhs_col: bool) -> RatVec:
        x: list[Rat] = [Fraction(0)] * n
        for c, val in free_values.items():
            x[c] = val
        for (r, c) in reversed(pivots):
            s = Fraction(reduced[r][n]) if rhs_col else Fraction(0)
            for j in range(c + 1, n):
                s -= reduced[r][j] * x[j]
            x[c] = s / reduced[r][c]
        return RatVec(tuple(x))

    particular = back_substitute({}, rhs_col=True)
    basis = tuple(
        _canon_kernel_vector(back_substitute({f: Fraction(1)}, rhs_col=False))
        for f in free_cols
    )
    return particular, basis


def kernel_basis(A: RatMat) -> tuple[RatVec, ...]:
    """Canonical basis of ``ker A``."""
    solved = solve_linear(A, RatVec.zero(A.rows))
    assert solved is not None  # homogeneous systems are always consistent
    return solved[1]


def row_space_basis(rows: Sequence[RatVec]) -> tuple[RatVec, ...]:
    """Canonical (reduced-echelon, primitive) basis of the span of ``rows``."""
    work = [list(r.entries) for r in rows if not r.is_zero()]
    if not work:
        return ()
    ncols = len(work[0])
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(work)) if work[i][c] != 0), None)
        if p is None:
            continue
        work[r], work[p] = work[p], work[r]
        pivot = work[r][c]
        work[r] = [a / pivot for a in work[r]]
        for i in range(len(work)):
            if i != r and work[i][c] != 0:
                factor = work[i][c]
                work[i] = [a - factor * bb for a, bb in zip(work[i], work[r])]
        r += 1
        if r == len(work):
            break
    basis = [RatVec(tuple(row)) for row in work[:r]]
    return tuple(_canon_kernel_vector(v) for v in basis)


def in_span(v: RatVec, basis: Sequence[RatVec]) -> bool:
    """Exact membership of ``v`` in the span of ``basis``."""
    if v.is_zero():
        return True
    if not basis:
        return False
    cols = RatMat.from_row_vectors(list(basis)).transpose()
    return solve_linear(cols, v) is not None
