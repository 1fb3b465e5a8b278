"""Cone calculus: conversion, polars, faces, face pairs, graph normals."""

import random
from fractions import Fraction
from itertools import product

import pytest

from aubincheck.cones import (
    ConeError,
    Face,
    HPolyhedron,
    PolyCone,
    admissible_face_pairs,
    critical_cone,
    dd_convert,
    dlnc_gph_normal,
    face_difference,
    faces,
    feasible_point,
    gph_normal_products,
    in_generated_cone,
    minimal_face_at,
    normal_cone_at,
    polar,
    span_normal_cone,
    tangent_normal,
    verify_vrep,
)
from aubincheck.exactlin import RatVec, in_span, vec

F = Fraction

R2_MINUS = PolyCone.nonpositive_orthant(2)


def orthant_polyhedron(dim: int) -> HPolyhedron:
    return HPolyhedron.from_rows(
        [([1 if j == i else 0 for j in range(dim)], F(0)) for i in range(dim)], [], dim
    )


# -- double description -------------------------------------------------------


def test_dd_orthant():
    C = dd_convert(PolyCone.nonpositive_orthant(2))
    assert set(C.rays) == {vec(-1, 0), vec(0, -1)}
    assert C.lineality == ()


def test_dd_hyperplane():
    C = PolyCone((), (vec(1, 1),), 2)
    assert C.rays == ()
    assert C.lineality == (vec(1, -1),)


def test_dd_mixed_with_lattice_oracle():
    C = PolyCone((vec(1, 0, 0), vec(0, 1, 0)), (), 3)
    assert set(C.rays) == {vec(-1, 0, 0), vec(0, -1, 0)}
    assert C.lineality == (vec(0, 0, 1),)
    # brute-force membership agreement on an integer lattice
    for point in product(range(-2, 3), repeat=3):
        u = vec(*point)
        in_h = C.contains(u)
        in_v = in_generated_cone(u, C.rays, C.lineality)
        assert in_h == in_v, f"membership mismatch at {u}"


# -- polar ---------------------------------------------------------------------


def test_polar_examples():
    assert polar(R2_MINUS).same_set(PolyCone((vec(-1, 0), vec(0, -1)), (), 2))
    assert polar(PolyCone.zero_cone(2)).same_set(PolyCone.full_space(2))
    half = PolyCone((vec(1, 1),), (), 2)
    ray = polar(half)
    assert ray.same_set(PolyCone.from_generators([vec(1, 1)], [], 2))
    # sampled polarity: every member of the halfspace pairs nonpositively
    for point in product(range(-2, 3), repeat=2):
        u = vec(*point)
        if half.contains(u):
            assert vec(1, 1).dot(u) <= 0


def test_polar_involution_random():
    rng = random.Random(11)
    for _ in range(40):
        dim = rng.randint(1, 5)
        rows = [
            vec(*[rng.randint(-3, 3) for _ in range(dim)])
            for _ in range(rng.randint(1, dim + 2))
        ]
        rows = [r for r in rows if not r.is_zero()] or [RatVec.unit(dim, 0)]
        C = PolyCone(tuple(rows), (), dim)
        assert polar(polar(C)).same_set(C)


# -- tangent and critical cones -------------------------------------------------


def test_tangent_normal_vertex():
    D = orthant_polyhedron(2)
    T, N = tangent_normal(D, vec(0, 0))
    assert T.same_set(R2_MINUS)
    assert N.same_set(PolyCone((vec(-1, 0), vec(0, -1)), (), 2))


def test_tangent_normal_edge_and_interior():
    D = orthant_polyhedron(2)
    T, N = tangent_normal(D, vec(-1, 0))
    assert T.same_set(PolyCone((vec(0, 1),), (), 2))
    assert N.same_set(PolyCone.from_generators([vec(0, 1)], [], 2))
    T2, N2 = tangent_normal(D, vec(-1, -1))
    assert T2.same_set(PolyCone.full_space(2))
    assert N2.is_trivial()


def test_tangent_normal_rejects_outsider():
    with pytest.raises(ConeError):
        tangent_normal(orthant_polyhedron(2), vec(1, 0))


def test_critical_cone_examples():
    assert critical_cone(R2_MINUS, vec(0, 0)).same_set(R2_MINUS)
    K = critical_cone(R2_MINUS, vec(0, 1))
    assert K.same_set(PolyCone((vec(1, 0),), (vec(0, 1),), 2))


def test_critical_cone_warns_outside_polar():
    with pytest.warns(UserWarning):
        K = critical_cone(PolyCone.full_space(2), vec(1, 0))
    assert K.same_set(PolyCone((), (vec(1, 0),), 2))


# -- faces ----------------------------------------------------------------------


def test_face_counts_orthants():
    for d in range(1, 5):
        assert len(faces(PolyCone.nonpositive_orthant(d))) == 2**d


def test_faces_halfplane():
    K = PolyCone((vec(1, 0),), (), 2)
    fs = faces(K)
    assert len(fs) == 2
    assert fs[0].cone().same_set(K)  # canonical order: fewest active rows first
    assert fs[1].cone().same_set(PolyCone((), (vec(1, 0),), 2))


def test_face_exposing_vector():
    """Every face is the cone meet the orthogonal of a polar element."""
    K = PolyCone.nonpositive_orthant(3)
    P = polar(K)
    for f in faces(K):
        zstar = RatVec.zero(3)
        for i in f.active:
            zstar = zstar + K.ineq_rows[i]
        assert P.contains(zstar)
        meet = PolyCone(K.ineq_rows, K.eq_rows + (zstar,), 3)
        assert meet.same_set(f.cone())


def test_admissible_face_pairs_example_cases():
    K = PolyCone.nonpositive_orthant(2)

    def pair_cones(v, eta):
        return [
            (p[0].cone(), p[1].cone()) for p in admissible_face_pairs(K, v, eta)
        ]

    r_minus_x_zero = PolyCone((vec(1, 0),), (vec(0, 1),), 2)
    zero_x_r_minus = PolyCone((vec(0, 1),), (vec(1, 0),), 2)
    origin = PolyCone.zero_cone(2)

    case3 = pair_cones(vec(F(-23, 7), 0), vec(0, F(1, 14)))
    assert len(case3) == 1
    assert case3[0][0].same_set(r_minus_x_zero) and case3[0][1].same_set(r_minus_x_zero)

    case2 = pair_cones(vec(-2, -1), vec(0, 0))
    assert len(case2) == 1
    assert case2[0][0].same_set(K) and case2[0][1].same_set(K)

    case1 = pair_cones(vec(0, 0), vec(F(23, 64), F(25, 64)))
    assert len(case1) == 1
    assert case1[0][0].same_set(origin) and case1[0][1].same_set(origin)

    case4 = pair_cones(vec(0, F(-25, 7)), vec(F(1, 7), 0))
    assert len(case4) == 1
    assert case4[0][0].same_set(zero_x_r_minus) and case4[0][1].same_set(zero_x_r_minus)


def test_admissible_face_pairs_preconditions():
    K = PolyCone.nonpositive_orthant(2)
    with pytest.raises(ConeError):
        admissible_face_pairs(K, vec(1, 0), vec(0, 0))
    with pytest.raises(ConeError):
        admissible_face_pairs(K, vec(-1, 0), vec(1, 0))  # eta not orthogonal


def test_face_difference_examples():
    K = PolyCone.nonpositive_orthant(2)
    by_active = {f.active: f for f in faces(K)}
    edge = next(
        f for f in faces(K) if f.cone().same_set(PolyCone((vec(1, 0),), (vec(0, 1),), 2))
    )
    assert face_difference(edge, edge).same_set(PolyCone((), (vec(0, 1),), 2))
    full = by_active[()]
    assert face_difference(full, full).same_set(PolyCone.full_space(2))
    origin = by_active[(0, 1)]
    assert face_difference(full, origin).same_set(K)
    with pytest.raises(ConeError):
        face_difference(origin, full)  # containment violated


def test_span_normal_cone_examples():
    K = PolyCone.nonpositive_orthant(2)
    assert span_normal_cone(K, vec(-2, -1)) == ()
    assert set(span_normal_cone(K, vec(0, 0))) == {vec(1, 0), vec(0, 1)}
    assert span_normal_cone(K, vec(-1, 0)) == (vec(0, 1),)
    with pytest.raises(ConeError):
        span_normal_cone(K, vec(1, 0))


def test_normal_cone_two_routes_random():
    rng = random.Random(99)
    for _ in range(40):
        dim = rng.randint(1, 4)
        rows = [
            vec(*[rng.randint(-2, 2) for _ in range(dim)])
            for _ in range(rng.randint(1, dim + 1))
        ]
        rows = [r for r in rows if not r.is_zero()] or [RatVec.unit(dim, 0)]
        K = PolyCone(tuple(rows), (), dim)
        v = RatVec.zero(dim)
        for r in K.rays:
            v = v + r.scale(F(rng.randint(0, 2)))
        for l in K.lineality:
            v = v + l.scale(F(rng.randint(-2, 2)))
        direct = normal_cone_at(K, v)
        generated = PolyCone.from_generators(
            [K.ineq_rows[i] for i in K.active_set(v)], K.eq_rows, dim
        )
        assert direct.same_set(generated)


# -- directional limiting normal cone of the graph ------------------------------


def halfline_domain() -> HPolyhedron:
    return orthant_polyhedron(1)


def _products_as_sets(products):
    return [(p, c) for p, c in products]


def test_dlnc_halfline_zero_direction():
    prods = dlnc_gph_normal(halfline_domain(), vec(0), vec(0), vec(0), vec(0))
    assert len(prods) == 3
    expected = [
        (PolyCone.full_space(1), PolyCone.zero_cone(1)),
        (PolyCone((vec(-1),), (), 1), PolyCone((vec(1),), (), 1)),
        (PolyCone.zero_cone(1), PolyCone.full_space(1)),
    ]
    for want_p, want_c in expected:
        assert any(
            p.same_set(want_p) and c.same_set(want_c) for p, c in prods
        ), f"missing product ({want_p.dump()}, {want_c.dump()})"


def test_dlnc_halfline_directional():
    prods = dlnc_gph_normal(halfline_domain(), vec(0), vec(0), vec(-1), vec(0))
    assert len(prods) == 1
    assert prods[0][0].same_set(PolyCone.zero_cone(1))
    assert prods[0][1].same_set(PolyCone.full_space(1))
    prods2 = dlnc_gph_normal(halfline_domain(), vec(0), vec(0), vec(0), vec(1))
    assert len(prods2) == 1
    assert prods2[0][0].same_set(PolyCone.full_space(1))
    assert prods2[0][1].same_set(PolyCone.zero_cone(1))


def test_dlnc_empty_direction_flagged():
    with pytest.warns(UserWarning):
        prods = dlnc_gph_normal(halfline_domain(), vec(0), vec(0), vec(1), vec(0))
    assert prods == ()


def test_dlnc_rejects_bad_multiplier():
    with pytest.raises(ConeError):
        dlnc_gph_normal(halfline_domain(), vec(0), vec(-1), vec(0), vec(0))


def test_dlnc_monotone_in_direction():
    """Zero-direction union contains every directional union (half-line, quadrant)."""
    lattice = [F(t) for t in range(-2, 3)]
    for s, directions in (
        (1, [(vec(0), vec(0)), (vec(-1), vec(0)), (vec(0), vec(1))]),
        (
            2,
            [
                (vec(0, 0), vec(0, 0)),
                (vec(-1, 0), vec(0, 1)),
                (vec(0, -2), vec(3, 0)),
                (vec(-1, -1), vec(0, 0)),
            ],
        ),
    ):
        K = PolyCone.nonpositive_orthant(s)
        central = gph_normal_products(K, RatVec.zero(s), RatVec.zero(s))
        for u, eta in directions:
            directional = gph_normal_products(K, u, eta)
            for point in product(lattice, repeat=2 * s):
                w = RatVec(tuple(point[:s]))
                z = RatVec(tuple(point[s:]))
                if any(p.contains(w) and c.contains(z) for p, c in directional):
                    assert any(
                        p.contains(w) and c.contains(z) for p, c in central
                    ), f"monotonicity violated at ({w}, {z})"


def test_face_difference_span_containment_seeded():
    """polar(F1 - F2) lies in the normal-cone span at rel-int points of F2."""
    rng = random.Random(5150)
    cones_checked = 0
    while cones_checked < 50:
        dim = rng.randint(1, 4)
        rows = [
            vec(*[rng.randint(-2, 2) for _ in range(dim)])
            for _ in range(rng.randint(1, dim + 1))
        ]
        rows = [r for r in rows if not r.is_zero()] or [RatVec.unit(dim, 0)]
        K = PolyCone(tuple(rows), (), dim)
        cones_checked += 1
        fs = faces(K)
        for f1 in fs:
            for f2 in fs:
                if not set(f2.active) >= set(f1.active):
                    continue
                v = f2.cone().relative_interior_point()
                span = span_normal_cone(K, v)
                for g in polar(face_difference(f1, f2)).generators:
                    assert in_span(g, span)


def test_vrep_verification_random():
    rng = random.Random(321)
    for _ in range(30):
        dim = rng.randint(1, 4)
        rows = [
            vec(*[rng.randint(-3, 3) for _ in range(dim)])
            for _ in range(rng.randint(1, dim + 2))
        ]
        rows = [r for r in rows if not r.is_zero()] or [RatVec.unit(dim, 0)]
        eqs = [vec(*[rng.randint(-2, 2) for _ in range(dim)])] if rng.random() < 0.4 else []
        C = PolyCone(tuple(rows), tuple(eqs), dim)
        assert verify_vrep(C) == []


def test_polyhedron_feasibility():
    # empty: u <= -1 and -u <= 0 in R
    D = HPolyhedron.from_rows([([1], F(-1)), ([-1], F(0))], [], 1)
    assert D.is_empty()
    point = feasible_point([vec(1), vec(-1)], [F(-1), F(0)], [], [], 1)
    assert point is None
    D2 = HPolyhedron.from_rows([([1], F(5))], [], 1)
    assert not D2.is_empty()


def test_minimal_face():
    K = PolyCone.nonpositive_orthant(2)
    f = minimal_face_at(K, vec(-1, 0))
    assert f.cone().same_set(PolyCone((vec(1, 0),), (vec(0, 1),), 2))
