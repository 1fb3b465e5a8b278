"""Shared fixtures: the bundled example and a family of small instances."""

from __future__ import annotations

import pytest

from aubincheck import example_problem_path
from aubincheck.cones import critical_cone, tangent_normal
from aubincheck.exactlin import RatVec
from aubincheck.problem import parse_problem, point_data
from aubincheck.verifier import solve_base_multiplier

with open(example_problem_path(), "r", encoding="utf-8") as _fh:
    EXAMPLE_TEXT = _fh.read()

# same data with the constraint pushed strictly inside: a smooth-equation case
INTERIOR_TEXT = """
[problem]
m = 1
n = 2
s = 2
[functions]
f1 = x1 - p1
f2 = -x2 + x2^2
q1 = p1 - x1 + 2*y1 - 4*y2 - 1
q2 = -x1 + 2*y1 + 4*y2 - 1
[set]
ineq: 1 0 <= 0
ineq: 0 1 <= 0
[reference]
p = 0
x = 0 0
"""

# constraints independent of the inner variable (b = 0), inactive at the reference
SMOOTH_B0_TEXT = """
[problem]
m = 1
n = 1
s = 1
[functions]
f1 = x1 + p1
q1 = p1 - 1
[set]
ineq: 1 <= 0
[reference]
p = 0
x = 0
"""

# state gradient of the substituted constraint vanishes: span rank condition fails
SPAN_RANK_FAIL_TEXT = """
[problem]
m = 1
n = 1
s = 1
[functions]
f1 = x1
q1 = p1 + y1 - x1
[set]
ineq: 1 <= 0
[reference]
p = 0
x = 0
"""

# zero second-order state block: the positivity condition fails
POSITIVITY_FAIL_TEXT = """
[problem]
m = 1
n = 2
s = 1
[functions]
f1 = p1
f2 = p1
q1 = y1
[set]
ineq: 1 <= 0
[reference]
p = 0
x = 0 0
"""

# constraints without inner variables at a vertex: nondegeneracy fails
NONDEGENERACY_FAIL_TEXT = """
[problem]
m = 1
n = 1
s = 2
[functions]
f1 = x1
q1 = p1 - x1
q2 = x1
[set]
ineq: 1 0 <= 0
ineq: 0 1 <= 0
[reference]
p = 0
x = 0
"""

# reference point solves nothing: the multiplier system is infeasible
MULTIPLIER_INFEASIBLE_TEXT = EXAMPLE_TEXT.replace("f1 = x1 - p1", "f1 = x1 - p1 + 1")

# reference point outside the constraint set
INFEASIBLE_REFERENCE_TEXT = EXAMPLE_TEXT.replace("x = 0 0", "x = 1 0")

# instances the full pipeline should run on (nondegenerate ones)
VERDICT_TEXTS = {
    "example": EXAMPLE_TEXT,
    "interior": INTERIOR_TEXT,
    "smooth_b0": SMOOTH_B0_TEXT,
    "span_rank_fail": SPAN_RANK_FAIL_TEXT,
    "positivity_fail": POSITIVITY_FAIL_TEXT,
}


@pytest.fixture(scope="session")
def example_spec():
    return parse_problem(EXAMPLE_TEXT)


@pytest.fixture(scope="session")
def example_setup(example_spec):
    """(spec, point data, critical cone, base multiplier) of the example."""
    pd = point_data(example_spec)
    mult = solve_base_multiplier(pd, example_spec.D, example_spec.f_value())
    T, _ = tangent_normal(example_spec.D, pd.qtilde_val)
    K = critical_cone(T, mult.lam)
    return example_spec, pd, K, mult.lam


@pytest.fixture(scope="session")
def all_verdicts():
    """Pipeline verdicts for every nondegenerate fixture instance."""
    from aubincheck.verifier import verdict

    return {name: verdict(parse_problem(text)) for name, text in VERDICT_TEXTS.items()}
