"""Exact-arithmetic verifier for Lipschitz stability (the Aubin property) of
solution maps of parameterized variational systems whose polyhedral
constraints depend on both the parameter and the state, plus the graphical
derivative of those solution maps.

Everything is computed in exact rational arithmetic; there is no floating
point anywhere in the pipeline.
"""

from importlib import resources

from .exactlin import Rat, RatMat, RatVec, format_rat, parse_rat, vec

__version__ = "0.1.0"

__all__ = [
    "Rat",
    "RatVec",
    "RatMat",
    "vec",
    "parse_rat",
    "format_rat",
    "example_problem_path",
]


def example_problem_path() -> str:
    """Filesystem path of the bundled two-dimensional example problem."""
    return str(resources.files("aubincheck").joinpath("data/example.prob"))
