"""Problem ingestion: polynomial data, symbolic differentiation, point data.

A problem consists of polynomial maps ``f`` (in parameters ``p1..pm`` and
states ``x1..xn``) and ``q`` (additionally in the inner variables
``y1..yn``), a polyhedral set ``D`` in H-representation, and a reference
point.  Everything downstream only needs exact first-order data of the
substituted map ``qt(p, x) = q(p, x, x)``, of ``f``, and of the rows of the
inner-gradient matrix ``b(p, x)`` (the y-gradient of ``q`` evaluated at
``y = x``), all at the reference point.

Polynomials are kept in a canonical normal form (exponent tuple -> rational
coefficient), so expression equality is structural equality and both
differentiation orders through the substitution ``y = x`` can be compared
exactly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .cones import HPolyhedron
from .exactlin import Rat, RatMat, RatVec, format_rat, parse_rat

__all__ = [
    "Expr",
    "ProblemSpec",
    "PointData",
    "ProblemError",
    "ExprSyntaxError",
    "InfeasibleReferenceError",
    "parse_expr",
    "parse_problem",
    "differentiate",
    "point_data",
    "lagrangian_gradient",
]


class ProblemError(ValueError):
    """Invalid problem input (syntax, dimensions, or infeasible reference)."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        loc = ""
        if line is not None:
            loc = f"line {line}"
            if col is not None:
                loc += f", col {col}"
            loc += ": "
        super().__init__(loc + message)
        self.line = line
        self.col = col


class ExprSyntaxError(ProblemError):
    pass


class InfeasibleReferenceError(ProblemError):
    pass


@dataclass(frozen=True)
class Expr:
    """Polynomial over a fixed variable tuple, in canonical normal form."""

    nvars: int
    terms: tuple[tuple[tuple[int, ...], Rat], ...]  # sorted (exponents, coeff)

    @staticmethod
    def _make(nvars: int, raw: Mapping[tuple[int, ...], Rat]) -> "Expr":
        cleaned = {e: c for e, c in raw.items() if c != 0}
        return Expr(nvars, tuple(sorted(cleaned.items())))

    @staticmethod
    def constant(c: Rat, nvars: int) -> "Expr":
        return Expr._make(nvars, {(0,) * nvars: Fraction(c)})

    @staticmethod
    def variable(index: int, nvars: int) -> "Expr":
        e = [0] * nvars
        e[index] = 1
        return Expr._make(nvars, {tuple(e): Fraction(1)})

    def _dict(self) -> dict[tuple[int, ...], Rat]:
        return dict(self.terms)

    def __add__(self, other: "Expr") -> "Expr":
        d = self._dict()
        for e, c in other.terms:
            d[e] = d.get(e, Fraction(0)) + c
        return Expr._make(self.nvars, d)

    def __sub__(self, other: "Expr") -> "Expr":
        return self + (-other)

    def __neg__(self) -> "Expr":
        return Expr._make(self.nvars, {e: -c for e, c in self.terms})

    def __mul__(self, other: "Expr") -> "Expr":
        d: dict[tuple[int, ...], Rat] = {}
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                e = tuple(a + b for a, b in zip(e1, e2))
                d[e] = d.get(e, Fraction(0)) + c1 * c2
        return Expr._make(self.nvars, d)

    def __pow__(self, k: int) -> "Expr":
        if k < 0:
            raise ValueError("only nonnegative integer powers are allowed")
        out = Expr.constant(Fraction(1), self.nvars)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def diff(self, var: int) -> "Expr":
        d: dict[tuple[int, ...], Rat] = {}
        for e, c in self.terms:
            if e[var] == 0:
                continue
            new = list(e)
            new[var] -= 1
            key = tuple(new)
            d[key] = d.get(key, Fraction(0)) + c * e[var]
        return Expr._make(self.nvars, d)

    def evaluate(self, values: Sequence[Rat]) -> Rat:
        if len(values) != self.nvars:
            raise ValueError("evaluation point has the wrong dimension")
        total = Fraction(0)
        for e, c in self.terms:
            term = c
            for v, k in zip(values, e):
                if k:
                    term *= v**k
            total += term
        return total

    def uses_any(self, var_indices: Sequence[int]) -> bool:
        return any(any(e[i] for i in var_indices) for e, _ in self.terms)

    def substitute_y_with_x(self, m: int, n: int) -> "Expr":
        """Fold each ``y_j`` exponent onto ``x_j`` (variables stay in place)."""
        d: dict[tuple[int, ...], Rat] = {}
        for e, c in self.terms:
            new = list(e)
            for j in range(n):
                new[m + j] += new[m + n + j]
                new[m + n + j] = 0
            key = tuple(new)
            d[key] = d.get(key, Fraction(0)) + c
        return Expr._make(self.nvars, d)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.terms:
            vars_txt = "*".join(
                f"v{i}" + (f"^{k}" if k > 1 else "")
                for i, k in enumerate(e)
                if k
            )
            parts.append(format_rat(c) + ("*" + vars_txt if vars_txt else ""))
        return " + ".join(parts)


def differentiate(e: Expr, var: int) -> Expr:
    """Exact partial derivative with respect to variable index ``var``."""
    return e.diff(var)


# -- expression parsing ------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>[0-9]+(?:/[0-9]+)?)|(?P<name>[pxy][0-9]+)|(?P<op>[-+*^()]))"
)


class _ExprParser:
    """Recursive-descent parser for ``+ - * ^`` polynomials over p/x/y."""

    def __init__(self, text: str, m: int, n: int, line: int | None, col0: int):
        self.text = text
        self.m = m
        self.n = n
        self.nvars = m + 2 * n
        self.line = line
        self.col0 = col0
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            mt = _TOKEN.match(text, pos)
            if not mt or mt.end() == pos:
                rest = text[pos:].lstrip()
                if not rest:
                    break
                self._fail(f"unexpected character {rest[0]!r}", pos)
            kind = mt.lastgroup
            assert kind is not None
            self.tokens.append((kind, mt.group(kind), mt.start(kind)))
            pos = mt.end()
        self.i = 0

    def _fail(self, msg: str, pos: int):
        raise ExprSyntaxError(msg, line=self.line, col=self.col0 + pos + 1)

    def _peek(self) -> tuple[str, str, int] | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def _next(self) -> tuple[str, str, int]:
        tok = self._peek()
        if tok is None:
            self._fail("unexpected end of expression", len(self.text))
        self.i += 1
        return tok

    def parse(self) -> Expr:
        e = self._expr()
        tok = self._peek()
        if tok is not None:
            self._fail(f"unexpected token {tok[1]!r}", tok[2])
        return e

    def _expr(self) -> Expr:
        tok = self._peek()
        negate = False
        if tok and tok[0] == "op" and tok[1] in "+-":
            self._next()
            negate = tok[1] == "-"
        e = self._term()
        if negate:
            e = -e
        while True:
            tok = self._peek()
            if tok and tok[0] == "op" and tok[1] in "+-":
                self._next()
                rhs = self._term()
                e = e + rhs if tok[1] == "+" else e - rhs
            else:
                return e

    def _term(self) -> Expr:
        e = self._factor()
        while True:
            tok = self._peek()
            if tok and tok[0] == "op" and tok[1] == "*":
                self._next()
                e = e * self._factor()
            else:
                return e

    def _factor(self) -> Expr:
        tok = self._peek()
        if tok and tok[0] == "op" and tok[1] in "+-":
            self._next()
            inner = self._factor()
            return -inner if tok[1] == "-" else inner
        e = self._atom()
        tok = self._peek()
        if tok and tok[0] == "op" and tok[1] == "^":
            self._next()
            kind, text, pos = self._next()
            if kind != "num" or "/" in text:
                self._fail("exponent must be a nonnegative integer", pos)
            e = e ** int(text)
        return e

    def _atom(self) -> Expr:
        kind, text, pos = self._next()
        if kind == "num":
            return Expr.constant(parse_rat(text), self.nvars)
        if kind == "name":
            block, idx = text[0], int(text[1:])
            if block == "p":
                if not (1 <= idx <= self.m):
                    self._fail(f"parameter index out of range: {text}", pos)
                return Expr.variable(idx - 1, self.nvars)
            if block == "x":
                if not (1 <= idx <= self.n):
                    self._fail(f"state index out of range: {text}", pos)
                return Expr.variable(self.m + idx - 1, self.nvars)
            if not (1 <= idx <= self.n):
                self._fail(f"inner-variable index out of range: {text}", pos)
            return Expr.variable(self.m + self.n + idx - 1, self.nvars)
        if kind == "op" and text == "(":
            e = self._expr()
            tok = self._next()
            if tok[0] != "op" or tok[1] != ")":
                self._fail("expected ')'", tok[2])
            return e
        self._fail(f"unexpected token {text!r}", pos)
        raise AssertionError("unreachable")


def parse_expr(text: str, m: int, n: int, line: int | None = None, col0: int = 0) -> Expr:
    return _ExprParser(text, m, n, line, col0).parse()


# -- problem specification ---------------------------------------------------


@dataclass(frozen=True)
class ProblemSpec:
    """Parsed and validated problem: maps, constraint set, reference point."""

    m: int
    n: int
    s: int
    f: tuple[Expr, ...]
    q: tuple[Expr, ...]
    D: HPolyhedron
    pbar: RatVec
    xbar: RatVec

    def reference_values(self) -> tuple[Rat, ...]:
        """Value tuple (pbar, xbar, xbar) over the full variable space."""
        return self.pbar.entries + self.xbar.entries + self.xbar.entries

    def qtilde_value(self) -> RatVec:
        ref = self.reference_values()
        return RatVec(tuple(qi.evaluate(ref) for qi in self.q))

    def f_value(self) -> RatVec:
        ref = self.reference_values()
        return RatVec(tuple(fi.evaluate(ref) for fi in self.f))


def _parse_rat_list(text: str, line: int) -> list[Rat]:
    parts = text.split()
    try:
        return [parse_rat(p) for p in parts]
    except ValueError as exc:
        raise ProblemError(str(exc), line=line) from None


def parse_problem(text: str) -> ProblemSpec:
    """Parse the line-oriented problem format.

    Sections (in square brackets): ``[problem]`` with ``m= n= s=``,
    ``[functions]`` with ``f<i> = <expr>`` and ``q<j> = <expr>``, ``[set]``
    with ``ineq:``/``eq:`` rows over ``u1..us``, and ``[reference]`` with
    ``p = ...`` and ``x = ...``.  ``#`` starts a comment.
    """
    dims: dict[str, int] = {}
    fun_texts: dict[str, tuple[str, int, int]] = {}
    set_rows: list[tuple[str, list[Rat], Rat, int]] = []
    ref_vals: dict[str, list[Rat]] = {}
    section = None

    def parse_assignments(chunk: str, line_no: int) -> None:
        for item in chunk.split():
            if "=" not in item:
                raise ProblemError(f"expected name=value, got {item!r}", line=line_no)
            key, val = item.split("=", 1)
            if key not in ("m", "n", "s"):
                raise ProblemError(f"unknown dimension {key!r}", line=line_no)
            try:
                dims[key] = int(val)
            except ValueError:
                raise ProblemError(f"bad dimension value {val!r}", line=line_no) from None

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        stripped = line.strip()
        if stripped.startswith("["):
            end = stripped.find("]")
            if end < 0:
                raise ProblemError("unterminated section header", line=line_no)
            section = stripped[1:end].strip().lower()
            if section not in ("problem", "functions", "set", "reference"):
                raise ProblemError(f"unknown section [{section}]", line=line_no)
            rest = stripped[end + 1 :].strip()
            if rest:
                if section == "problem":
                    parse_assignments(rest.replace("=", "= ").replace("=  ", "= ").replace("= ", "="), line_no)
                else:
                    raise ProblemError("content on a section header line", line=line_no)
            continue
        if section is None:
            raise ProblemError("content before the first section header", line=line_no)
        if section == "problem":
            parse_assignments(stripped.replace(" = ", "=").replace("= ", "=").replace(" =", "="), line_no)
        elif section == "functions":
            if "=" not in stripped:
                raise ProblemError("expected f<i> = <expr> or q<j> = <expr>", line=line_no)
            name, expr_text = stripped.split("=", 1)
            name = name.strip()
            if not re.fullmatch(r"[fq][0-9]+", name):
                raise ProblemError(f"bad function name {name!r}", line=line_no)
            if name in fun_texts:
                raise ProblemError(f"duplicate definition of {name}", line=line_no)
            col0 = raw.index("=") + 1
            body = expr_text.strip()
            if body.startswith('"') and body.endswith('"') and len(body) >= 2:
                body = body[1:-1]
            fun_texts[name] = (body, line_no, col0)
        elif section == "set":
            mrow = re.fullmatch(r"(ineq|eq)\s*:\s*(.*?)\s*(<=|=)\s*(\S+)", stripped)
            if not mrow:
                raise ProblemError(
                    "expected 'ineq: <coeffs> <= <rhs>' or 'eq: <coeffs> = <rhs>'",
                    line=line_no,
                )
            kind, coeff_text, rel, rhs_text = mrow.groups()
            if (kind == "ineq") != (rel == "<="):
                raise ProblemError(f"row kind {kind!r} does not match relation {rel!r}", line=line_no)
            coeffs = _parse_rat_list(coeff_text, line_no)
            try:
                rhs = parse_rat(rhs_text)
            except ValueError as exc:
                raise ProblemError(str(exc), line=line_no) from None
            set_rows.append((kind, coeffs, rhs, line_no))
        elif section == "reference":
            for piece in stripped.split(","):
                piece = piece.strip()
                if not piece:
                    continue
                if "=" not in piece:
                    raise ProblemError("expected 'p = ...' or 'x = ...'", line=line_no)
                key, vals = piece.split("=", 1)
                key = key.strip()
                if key not in ("p", "x"):
                    raise ProblemError(f"unknown reference block {key!r}", line=line_no)
                if key in ref_vals:
                    raise ProblemError(f"duplicate reference block {key!r}", line=line_no)
                ref_vals[key] = _parse_rat_list(vals, line_no)

    for want in ("m", "n", "s"):
        if want not in dims:
            raise ProblemError(f"missing dimension {want} in [problem] section")
        if dims[want] < 0:
            raise ProblemError(f"dimension {want} must be nonnegative")
    m, n, s = dims["m"], dims["n"], dims["s"]
    if n == 0:
        raise ProblemError("state dimension n must be positive")

    f_list: list[Expr] = []
    for i in range(1, n + 1):
        key = f"f{i}"
        if key not in fun_texts:
            raise ProblemError(f"missing function {key}")
        body, line_no, col0 = fun_texts[key]
        e = parse_expr(body, m, n, line=line_no, col0=col0)
        if e.uses_any(range(m + n, m + 2 * n)):
            raise ProblemError(f"{key} must not use inner variables y1..y{n}", line=line_no)
        f_list.append(e)
    q_list: list[Expr] = []
    for j in range(1, s + 1):
        key = f"q{j}"
        if key not in fun_texts:
            raise ProblemError(f"missing function {key}")
        body, line_no, col0 = fun_texts[key]
        q_list.append(parse_expr(body, m, n, line=line_no, col0=col0))
    extra = set(fun_texts) - {f"f{i}" for i in range(1, n + 1)} - {f"q{j}" for j in range(1, s + 1)}
    if extra:
        raise ProblemError(f"function(s) out of declared range: {sorted(extra)}")

    ineq_rows: list[tuple[list[Rat], Rat]] = []
    eq_rows: list[tuple[list[Rat], Rat]] = []
    for kind, coeffs, rhs, line_no in set_rows:
        if len(coeffs) != s:
            raise ProblemError(
                f"set row has {len(coeffs)} coefficients, expected s={s}", line=line_no
            )
        (ineq_rows if kind == "ineq" else eq_rows).append((coeffs, rhs))
    D = HPolyhedron.from_rows(ineq_rows, eq_rows, s)

    if "p" not in ref_vals or "x" not in ref_vals:
        raise ProblemError("missing 'p =' or 'x =' in [reference] section")
    if len(ref_vals["p"]) != m:
        raise ProblemError(f"reference p has {len(ref_vals['p'])} entries, expected m={m}")
    if len(ref_vals["x"]) != n:
        raise ProblemError(f"reference x has {len(ref_vals['x'])} entries, expected n={n}")
    spec = ProblemSpec(
        m=m,
        n=n,
        s=s,
        f=tuple(f_list),
        q=tuple(q_list),
        D=D,
        pbar=RatVec(tuple(ref_vals["p"])),
        xbar=RatVec(tuple(ref_vals["x"])),
    )
    qt = spec.qtilde_value()
    if not D.contains(qt):
        detail = "; ".join(D.violated_rows(qt))
        raise InfeasibleReferenceError(
            f"reference point is infeasible: qt(pbar, xbar) = {qt} violates {detail}"
        )
    return spec


# -- point data --------------------------------------------------------------


@dataclass(frozen=True)
class PointData:
    """All exact first-order data at the reference point.

    ``hess_b[i]`` is the Jacobian (n rows, m+n columns) of row ``i`` of the
    inner-gradient matrix after the substitution ``y = x``; it carries the
    second-order information of ``q`` that enters the Lagrangian gradient.
    """

    m: int
    n: int
    s: int
    qtilde_val: RatVec
    grad_qtilde: RatMat  # s x (m+n)
    b: RatMat  # s x n
    grad_f: RatMat  # n x (m+n)
    hess_b: tuple[RatMat, ...]  # s matrices, each n x (m+n)

    def grad_qtilde_p(self) -> RatMat:
        return self.grad_qtilde.submatrix_cols(range(self.m))

    def grad_qtilde_x(self) -> RatMat:
        return self.grad_qtilde.submatrix_cols(range(self.m, self.m + self.n))


def point_data(spec: ProblemSpec) -> PointData:
    """Evaluate all derivative data symbolically, then at the reference point.

    The state block of the substituted gradient is additionally recomputed
    through the other differentiation order (differentiate first, then
    substitute) and the two must agree exactly.
    """
    m, n, s = spec.m, spec.n, spec.s
    ref = spec.reference_values()
    first_order = list(range(m + n))

    qt = [qi.substitute_y_with_x(m, n) for qi in spec.q]
    qtilde_val = RatVec(tuple(e.evaluate(ref) for e in qt))
    grad_qtilde = RatMat.from_rows(
        [[e.diff(j).evaluate(ref) for j in first_order] for e in qt]
    )

    # chain-rule consistency through y = x, as exact polynomial identities
    for i, qi in enumerate(spec.q):
        for j in range(n):
            direct = qt[i].diff(m + j)
            via_chain = (qi.diff(m + j) + qi.diff(m + n + j)).substitute_y_with_x(m, n)
            assert direct == via_chain, "chain-rule consistency failure in point data"

    b_rows = [
        [qi.diff(m + n + j).substitute_y_with_x(m, n) for j in range(n)]
        for qi in spec.q
    ]
    b = RatMat.from_rows([[e.evaluate(ref) for e in row] for row in b_rows])
    grad_f = RatMat.from_rows(
        [[fi.diff(j).evaluate(ref) for j in first_order] for fi in spec.f]
    )
    hess_b = tuple(
        RatMat.from_rows(
            [[b_rows[i][j].diff(l).evaluate(ref) for l in first_order] for j in range(n)]
        )
        for i in range(s)
    )
    return PointData(
        m=m,
        n=n,
        s=s,
        qtilde_val=qtilde_val,
        grad_qtilde=grad_qtilde,
        b=b,
        grad_f=grad_f,
        hess_b=hess_b,
    )


def lagrangian_gradient(pd: PointData, lam: RatVec) -> RatMat:
    """Gradient of ``f + b(.)^T lam`` at the reference point (n x (m+n))."""
    if lam.dim != pd.s:
        raise ValueError(f"multiplier has dim {lam.dim}, expected s={pd.s}")
    out = pd.grad_f
    for i in range(pd.s):
        if lam[i] != 0:
            out = out + pd.hess_b[i].scale(lam[i])
    return out
