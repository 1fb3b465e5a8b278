"""Brute-force cross-checks for the exact geometry and the branch solver.

Everything the library computes through clever polyhedral identities is
re-derived here the dumb way, on seeded random instances: generator
representations are sampled against their half-space forms, the positivity
reduction is compared with direct maximization over sampled rays, the
directional limiting normal cone of an orthant's normal-cone graph is
recomputed coordinate-by-coordinate from the graph's branches, and the
branch solver's union is compared against a dense rational grid search.

Any disagreement is reported together with the exact sample that produced
it; nothing is averaged, rounded, or ignored.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as iter_product
from typing import Iterable, Sequence

from .branches import solve_branches
from .cones import (
    HPolyhedron,
    PolyCone,
    critical_cone,
    face_difference,
    faces,
    feasible_point,
    gph_normal_products,
    in_generated_cone,
    normal_cone_at,
    polar,
    span_normal_cone,
    tangent_normal,
    verify_vrep,
)
from .exactlin import Rat, RatMat, RatVec, format_rat, in_span, kernel_basis, solve_linear
from .problem import PointData, ProblemSpec, lagrangian_gradient
from .verifier import positivity_failure


@dataclass
class OracleCheck:
    name: str
    samples: int = 0
    found: int = 0  # positive hits, where the check counts them
    disagreements: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.disagreements


@dataclass
class OracleReport:
    seed: int
    checks: list[OracleCheck] = field(default_factory=list)

    @property
    def total_disagreements(self) -> int:
        return sum(len(c.disagreements) for c in self.checks)

    def as_dict(self) -> dict:
        return {
            "seed": self.seed,
            "total_disagreements": self.total_disagreements,
            "checks": [
                {
                    "name": c.name,
                    "samples": c.samples,
                    "found": c.found,
                    "disagreements": list(c.disagreements),
                }
                for c in self.checks
            ],
        }


def _random_cone_dim(rng: random.Random, dim: int) -> PolyCone:
    n_ineq = rng.randint(1, dim + 2)
    rows = []
    for _ in range(n_ineq):
        row = [Fraction(rng.randint(-3, 3)) for _ in range(dim)]
        rows.append(RatVec(tuple(row)))
    eqs = []
    if rng.random() < 0.3:
        eqs.append(RatVec(tuple(Fraction(rng.randint(-2, 2)) for _ in range(dim))))
    rows = [r for r in rows if not r.is_zero()]
    if not rows:
        rows = [RatVec.unit(dim, 0)]
    return PolyCone(tuple(rows), tuple(eqs), dim)


def _random_cone(rng: random.Random, max_dim: int = 4) -> PolyCone:
    return _random_cone_dim(rng, rng.randint(1, max_dim))


def _random_matrix(rng: random.Random, rows: int, cols: int, lo: int = -2, hi: int = 2) -> RatMat:
    return RatMat.from_rows(
        [[Fraction(rng.randint(lo, hi)) for _ in range(cols)] for _ in range(rows)]
    )


def _cone_point(rng: random.Random, C: PolyCone) -> RatVec:
    """Random rational member: nonnegative ray combination plus lineality."""
    v = RatVec.zero(C.dim)
    for r in C.rays:
        v = v + r.scale(Fraction(rng.randint(0, 3), rng.randint(1, 3)))
    for l in C.lineality:
        v = v + l.scale(Fraction(rng.randint(-3, 3), rng.randint(1, 3)))
    return v


# -- cone calculus checks -----------------------------------------------------


def check_polar_involution(rng: random.Random, count: int) -> OracleCheck:
    """polar(polar(C)) must equal C, as sets and on random sample points."""
    check = OracleCheck("polar-involution")
    for _ in range(count):
        C = _random_cone(rng, max_dim=5)
        check.samples += 1
        CC = polar(polar(C))
        if not C.same_set(CC):
            check.disagreements.append(f"double polar differs for\n{C.dump()}")
            continue
        for _ in range(5):
            u = RatVec(tuple(Fraction(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(C.dim)))
            if C.contains(u) != CC.contains(u):
                check.disagreements.append(
                    f"membership of {u} differs between C and polar(polar(C)) for\n{C.dump()}"
                )
    return check


def check_vrep_consistency(rng: random.Random, count: int) -> OracleCheck:
    """H-form and generator form of random cones must describe the same set."""
    check = OracleCheck("generator/half-space consistency")
    for _ in range(count):
        C = _random_cone(rng)
        check.samples += 1
        for problem in verify_vrep(C):
            check.disagreements.append(problem + f" in\n{C.dump()}")
    return check


def check_normal_cone_routes(rng: random.Random, count: int) -> OracleCheck:
    """Normal cone as polar-meets-orthogonal vs the active-row construction."""
    check = OracleCheck("normal-cone two routes")
    for _ in range(count):
        K = _random_cone(rng)
        v = _cone_point(rng, K)
        check.samples += 1
        direct = normal_cone_at(K, v)
        active_rows = [K.ineq_rows[i] for i in K.active_set(v)]
        generated = PolyCone.from_generators(active_rows, K.eq_rows, K.dim)
        if not direct.same_set(generated):
            check.disagreements.append(
                f"normal cone routes differ at v={v} for\n{K.dump()}"
            )
    return check


def check_face_difference_span(rng: random.Random, count: int) -> OracleCheck:
    """polar(F1 - F2) must lie inside the normal-cone span at rel-int of F2."""
    check = OracleCheck("face-difference polar within normal span")
    done = 0
    while done < count:
        K = _random_cone(rng)
        fs = faces(K)
        for f1 in fs:
            for f2 in fs:
                if not set(f2.active) >= set(f1.active):
                    continue
                done += 1
                check.samples += 1
                v = f2.cone().relative_interior_point()
                span = span_normal_cone(K, v)
                diff_polar = polar(face_difference(f1, f2))
                for g in diff_polar.generators:
                    if not in_span(g, span):
                        check.disagreements.append(
                            f"generator {g} of polar(F1-F2) outside span at v={v}, "
                            f"faces {f1.active}/{f2.active} of\n{K.dump()}"
                        )
                if done >= count:
                    break
            if done >= count:
                break
    return check


# -- brute-force directional limiting normal cone (orthant domains) ---------


def _coordinate_pieces(
    active: bool, lam_pos: bool, u_i: Rat, eta_i: Rat
) -> list[tuple[str, str]] | None:
    """Directional normal-cone pieces of one coordinate of the graph.

    The graph of the scalar normal-cone map of the half-line splits into the
    feasible branch (normals {0} x R), the multiplier branch (normals
    R x {0}), and the corner (normals R+ x R-).  Which pieces a direction
    reaches is read off the branch geometry; ``None`` means the direction
    leaves the graph's tangent space entirely.  Cones are encoded by tags:
    '0', 'R', 'R+', 'R-'.
    """
    if not active:
        # graph is locally {(a, 0)}: only eta = 0 directions stay on it
        if eta_i != 0:
            return None
        return [("0", "R")]
    if lam_pos:
        # graph is locally {0} x R near a positive multiplier
        if u_i != 0:
            return None
        return [("R", "0")]
    if u_i < 0:
        return [("0", "R")] if eta_i == 0 else None
    if u_i > 0:
        return None
    if eta_i > 0:
        return [("R", "0")]
    if eta_i < 0:
        return None
    return [("0", "R"), ("R", "0"), ("R+", "R-")]


_TAG_MEMBER = {
    "0": lambda t: t == 0,
    "R": lambda t: True,
    "R+": lambda t: t >= 0,
    "R-": lambda t: t <= 0,
}


def bruteforce_orthant_products(
    dbar: RatVec, lam: RatVec, u: RatVec, eta: RatVec
) -> list[tuple[tuple[str, ...], tuple[str, ...]]] | None:
    """Directional limiting normal cone of gph N for a nonpositive orthant.

    Computed coordinatewise from the graph branches and assembled into
    products of tagged axis cones; ``None`` encodes the empty cone.
    """
    s = dbar.dim
    per_coord: list[list[tuple[str, str]]] = []
    for i in range(s):
        pieces = _coordinate_pieces(dbar[i] == 0, lam[i] > 0, u[i], eta[i])
        if pieces is None:
            return None
        per_coord.append(pieces)
    out = []
    for combo in iter_product(*per_coord):
        w_tags = tuple(p for p, _ in combo)
        z_tags = tuple(z for _, z in combo)
        out.append((w_tags, z_tags))
    return out


def _tagged_contains(tags: tuple[str, ...], v: RatVec) -> bool:
    return all(_TAG_MEMBER[t](x) for t, x in zip(tags, v.entries))


def check_dlnc_bruteforce(rng: random.Random, count: int) -> OracleCheck:
    """Face-pair products vs branch-wise graph normals on orthant domains.

    Compared as unions, by membership over an integer lattice in the doubled
    space, for random feasible base points and admissible directions in one
    and two dimensions.
    """
    check = OracleCheck("directional graph normals vs brute force")
    lattice_vals = [Fraction(t) for t in (-2, -1, 0, 1, 2)]
    for _ in range(count):
        s = rng.choice((1, 2))
        D = HPolyhedron.from_rows(
            [([Fraction(1 if j == i else 0) for j in range(s)], Fraction(0)) for i in range(s)],
            [],
            s,
        )
        dbar = RatVec(tuple(Fraction(rng.choice((-1, 0))) for _ in range(s)))
        lam = RatVec(
            tuple(
                Fraction(rng.choice((0, 1))) if dbar[i] == 0 else Fraction(0)
                for i in range(s)
            )
        )
        # admissible direction: u in K, eta in N_K(u)
        T, _ = tangent_normal(D, dbar)
        K = critical_cone(T, lam)
        u = _cone_point(rng, K)
        eta = _cone_point(rng, normal_cone_at(K, u))
        check.samples += 1
        products = gph_normal_products(K, u, eta)
        brute = bruteforce_orthant_products(dbar, lam, u, eta)
        assert brute is not None  # direction was constructed admissible
        for point in iter_product(lattice_vals, repeat=2 * s):
            wv = RatVec(tuple(point[:s]))
            zv = RatVec(tuple(point[s:]))
            in_products = any(P.contains(wv) and Q.contains(zv) for P, Q in products)
            in_brute = any(
                _tagged_contains(wt, wv) and _tagged_contains(zt, zv)
                for wt, zt in brute
            )
            if in_products != in_brute:
                check.disagreements.append(
                    f"membership of ({wv}, {zv}) differs: products={in_products} "
                    f"brute={in_brute} at dbar={dbar} lam={lam} dir=({u}, {eta})"
                )
                break
    return check


def check_dlnc_monotone(rng: random.Random, count: int) -> OracleCheck:
    """The zero-direction product union contains every directional one."""
    check = OracleCheck("directional graph normals monotone in direction")
    lattice_vals = [Fraction(t) for t in (-2, -1, 0, 1, 2)]
    for _ in range(count):
        s = rng.choice((1, 2))
        K = PolyCone.nonpositive_orthant(s)
        u = _cone_point(rng, K)
        eta = _cone_point(rng, normal_cone_at(K, u))
        check.samples += 1
        directional = gph_normal_products(K, u, eta)
        central = gph_normal_products(K, RatVec.zero(s), RatVec.zero(s))
        for point in iter_product(lattice_vals, repeat=2 * s):
            wv = RatVec(tuple(point[:s]))
            zv = RatVec(tuple(point[s:]))
            in_dir = any(P.contains(wv) and Q.contains(zv) for P, Q in directional)
            in_central = any(P.contains(wv) and Q.contains(zv) for P, Q in central)
            if in_dir and not in_central:
                check.disagreements.append(
                    f"({wv}, {zv}) in directional union but not in central union, "
                    f"dir=({u}, {eta}), s={s}"
                )
                break
    return check


# -- positivity-condition quantifier reduction --------------------------------


def _cone_samples(W: PolyCone) -> list[RatVec]:
    """Generator-spanning sample set: rays, +/- lineality, and pairwise sums."""
    base = list(W.rays) + [l for l in W.lineality] + [-l for l in W.lineality]
    out = list(base)
    for i in range(len(base)):
        for j in range(i + 1, len(base)):
            out.append(base[i] + base[j])
    seen = set()
    uniq = []
    for v in out:
        if not v.is_zero() and v.entries not in seen:
            seen.add(v.entries)
            uniq.append(v)
    return uniq


def positivity_oracle_instance(
    rng: random.Random,
) -> tuple[PolyCone, RatMat, RatMat, RatMat]:
    s = rng.randint(1, 3)
    n = rng.randint(1, 3)
    C = _random_cone_dim(rng, s)
    A = _random_matrix(rng, n, n)
    b = _random_matrix(rng, s, n)
    M = _random_matrix(rng, s, n)
    return C, A, b, M


def check_positivity_reduction(rng: random.Random, count: int) -> OracleCheck:
    """Failure-cone reduction vs sampled maximization, plus polar identity.

    Per instance: (a) the generator form of ``W = {w | b w in C}`` is
    completeness-checked against its half-space form; (b) for every sampled
    ``w`` the reduction's pointwise verdict (is ``A^T w`` an adjoint image of
    a polar element) must match direct maximization of ``w^T A wt`` over
    generators of ``{wt | M wt in C}``; (c) the polar of that preimage cone
    is compared with the adjoint image ``M^T polar(C)`` by mutual generator
    membership.
    """
    check = OracleCheck("positivity quantifier reduction")
    for _ in range(count):
        C, A, b, M = positivity_oracle_instance(rng)
        s, n = C.dim, A.rows
        check.samples += 1
        W = PolyCone(
            [RatVec(b.transpose().matvec(r).entries) for r in C.ineq_rows],
            [RatVec(b.transpose().matvec(e).entries) for e in C.eq_rows],
            n,
        )
        Wt = PolyCone(
            [RatVec(M.transpose().matvec(r).entries) for r in C.ineq_rows],
            [RatVec(M.transpose().matvec(e).entries) for e in C.eq_rows],
            n,
        )
        complete = not verify_vrep(W) and not verify_vrep(Wt)
        if not complete:
            check.disagreements.append(
                f"sampled rays are not generator-complete for\n{W.dump()}\nor\n{Wt.dump()}"
            )
            continue
        P = C.polar()
        reduction = positivity_failure(C, A, b, M)
        samples = _cone_samples(W)
        if reduction is not None:
            samples.append(reduction[0])
        wt_gens = list(Wt.rays) + [l for l in Wt.lineality] + [-l for l in Wt.lineality]
        at = A.transpose()
        mt = M.transpose()
        for w in samples:
            if not W.contains(w):
                continue
            target = at.matvec(w)
            oracle_good = any(target.dot(g) > 0 for g in wt_gens)
            # reduction side: A^T w in M^T polar(C)?
            mu = feasible_point(
                P.ineq_rows,
                [Fraction(0)] * len(P.ineq_rows),
                list(P.eq_rows) + list(mt.row_vectors),
                [Fraction(0)] * len(P.eq_rows) + list(target.entries),
                s,
            )
            reduction_bad = mu is not None
            if oracle_good == reduction_bad:
                check.disagreements.append(
                    f"pointwise disagreement at w={w}: sampled max positive={oracle_good}, "
                    f"adjoint-image membership={reduction_bad}, instance A={A}, b={b}, "
                    f"M={M}, C:\n{C.dump()}"
                )
        # polar identity: polar(M^{-1} C) == M^T polar(C)
        wt_polar = polar(Wt)
        for g in wt_polar.generators + tuple(-l for l in wt_polar.lineality):
            mu = feasible_point(
                P.ineq_rows,
                [Fraction(0)] * len(P.ineq_rows),
                list(P.eq_rows) + list(mt.row_vectors),
                [Fraction(0)] * len(P.eq_rows) + list(g.entries),
                s,
            )
            if mu is None:
                check.disagreements.append(
                    f"polar identity fails: generator {g} of polar(preimage) has no "
                    f"polar preimage under M^T, instance M={M}, C:\n{C.dump()}"
                )
        for g in P.generators + tuple(-l for l in P.lineality):
            img = mt.matvec(g)
            if not wt_polar.contains(img):
                check.disagreements.append(
                    f"polar identity fails: M^T {g} = {img} outside polar(preimage), "
                    f"instance M={M}, C:\n{C.dump()}"
                )
    return check


# -- branch-solver grid oracle -------------------------------------------------


def branch_grid_check(
    pd: PointData,
    K: PolyCone,
    lam: RatVec,
    h: RatVec,
    denominator: int = 56,
    bound: int = 2,
) -> OracleCheck:
    """Grid search for directional-system solutions outside the branch union.

    State directions ``k`` run over a rational grid; for each, the multiplier
    direction is recovered from the stationarity equations (requiring ``b^T``
    to have full column rank, which the grid oracle needs anyway to be
    meaningful) and the membership conditions are tested directly, without
    any face machinery.  Every grid solution must land inside some branch.
    """
    check = OracleCheck(f"branch coverage grid (h = {h})")
    n, s = pd.n, pd.s
    bt = pd.b.transpose()
    if len(kernel_basis(bt)) > 0:
        check.disagreements.append(
            "grid oracle requires injective b^T; instance is degenerate"
        )
        return check
    grad_l = lagrangian_gradient(pd, lam)
    lp = grad_l.submatrix_cols(range(pd.m))
    lx = grad_l.submatrix_cols(range(pd.m, pd.m + n))
    gq_p = pd.grad_qtilde_p()
    gq_x = pd.grad_qtilde_x()
    lp_h = lp.matvec(h)
    gq_p_h = gq_p.matvec(h)
    branches = solve_branches(pd, K, lam, h)
    polar_k = K.polar()

    # invert b^T on an independent row subset, once; verify the rest per point
    sub_rows: list[int] = []
    from .exactlin import rank_rows

    for i in range(n):
        if rank_rows([bt.row(j) for j in sub_rows + [i]]) == len(sub_rows) + 1:
            sub_rows.append(i)
        if len(sub_rows) == s:
            break
    sub = RatMat.from_row_vectors([bt.row(i) for i in sub_rows])
    inv_cols = []
    for j in range(s):
        solved = solve_linear(sub, RatVec.unit(s, j))
        assert solved is not None
        inv_cols.append(solved[0].entries)
    inv_rows = tuple(tuple(inv_cols[j][i] for j in range(s)) for i in range(s))
    other_rows = [i for i in range(n) if i not in sub_rows]

    lx_rows = tuple(tuple(lx.row(i).entries) for i in range(n))
    bt_rows = tuple(tuple(bt.row(i).entries) for i in range(n))
    gqx_rows = tuple(tuple(gq_x.row(i).entries) for i in range(s))
    k_ineq = tuple(tuple(r.entries) for r in K.ineq_rows)
    k_eq = tuple(tuple(r.entries) for r in K.eq_rows)
    p_ineq = tuple(tuple(r.entries) for r in polar_k.ineq_rows)
    p_eq = tuple(tuple(r.entries) for r in polar_k.eq_rows)

    values = [Fraction(i, denominator) for i in range(-bound * denominator, bound * denominator + 1)]
    for combo in iter_product(values, repeat=n):
        check.samples += 1
        rhs = [-(lp_h[i] + sum(c * kk for c, kk in zip(lx_rows[i], combo))) for i in range(n)]
        eta = tuple(
            sum(inv_rows[i][j] * rhs[sub_rows[j]] for j in range(s)) for i in range(s)
        )
        if any(
            sum(c * e for c, e in zip(bt_rows[i], eta)) != rhs[i] for i in other_rows
        ):
            continue
        v = tuple(
            gq_p_h[i] + sum(c * kk for c, kk in zip(gqx_rows[i], combo))
            for i in range(s)
        )
        if any(sum(c * vv for c, vv in zip(row, v)) > 0 for row in k_ineq):
            continue
        if any(sum(c * vv for c, vv in zip(row, v)) != 0 for row in k_eq):
            continue
        if any(sum(c * e for c, e in zip(row, eta)) > 0 for row in p_ineq):
            continue
        if any(sum(c * e for c, e in zip(row, eta)) != 0 for row in p_eq):
            continue
        if sum(e * vv for e, vv in zip(eta, v)) != 0:
            continue
        check.found += 1
        k_vec = RatVec(tuple(combo))
        eta_vec = RatVec(eta)
        if not any(br.contains(k_vec, eta_vec) for br in branches):
            check.disagreements.append(
                f"grid solution k={k_vec}, eta={eta_vec} lies outside the branch union"
            )
    return check


def homogeneity_check(
    pd: PointData, K: PolyCone, lam: RatVec, h: RatVec, factors: Sequence[Rat]
) -> OracleCheck:
    """Solutions for ``t h`` must be exactly ``t`` times the solutions for ``h``."""
    from .branches import solution_points

    check = OracleCheck(f"positive homogeneity (h = {h})")
    base_points, base_exh = solution_points(solve_branches(pd, K, lam, h))
    for t in factors:
        check.samples += 1
        scaled_points, scaled_exh = solution_points(
            solve_branches(pd, K, lam, h.scale(t))
        )
        if not (base_exh and scaled_exh):
            check.disagreements.append(
                f"homogeneity check needs isolated solution sets (t = {format_rat(t)})"
            )
            continue
        expected = {
            (k.scale(t).entries, e.scale(t).entries) for k, e in base_points
        }
        got = {(k.entries, e.entries) for k, e in scaled_points}
        if expected != got:
            check.disagreements.append(
                f"solution set for {format_rat(t)}*h is not {format_rat(t)} times the one for h"
            )
    return check


def eta_uniqueness_check(pd: PointData, K: PolyCone, lam: RatVec, h: RatVec) -> OracleCheck:
    """Per representative: multiplier directions are pinned given (h, k)."""
    from .branches import multiplier_direction_unique

    check = OracleCheck(f"multiplier-direction uniqueness (h = {h})")
    gq_p = pd.grad_qtilde_p()
    gq_x = pd.grad_qtilde_x()
    for br in solve_branches(pd, K, lam, h):
        for k, eta in br.representatives:
            check.samples += 1
            v = gq_p.matvec(h) + gq_x.matvec(k)
            if not multiplier_direction_unique(pd, normal_cone_at(K, v)):
                check.disagreements.append(
                    f"multiplier direction not unique at k={k} on face {br.face.active}"
                )
    return check


# -- entry point ----------------------------------------------------------------


def run_oracle(
    samples: int,
    seed: int,
    spec: ProblemSpec | None = None,
    pd: PointData | None = None,
    K: PolyCone | None = None,
    lam: RatVec | None = None,
    grid_denominator: int = 56,
) -> OracleReport:
    """Run all sampling cross-checks with a deterministic generator.

    ``samples`` scales the per-check instance counts.  When a problem is
    supplied (with its point data, critical cone, and base multiplier) the
    branch-solver checks run on it as well.
    """
    if samples <= 0:
        raise ValueError("oracle requires a positive sample count")
    rng = random.Random(seed)
    report = OracleReport(seed=seed)
    n_small = max(1, min(samples, 60))
    n_medium = max(1, min(samples, 120))
    report.checks.append(check_polar_involution(rng, n_medium))
    report.checks.append(check_vrep_consistency(rng, n_small))
    report.checks.append(check_normal_cone_routes(rng, n_small))
    report.checks.append(check_face_difference_span(rng, n_small))
    report.checks.append(check_dlnc_bruteforce(rng, max(1, min(samples, 25))))
    report.checks.append(check_dlnc_monotone(rng, max(1, min(samples, 25))))
    report.checks.append(check_positivity_reduction(rng, n_medium))
    if spec is not None and pd is not None and K is not None and lam is not None:
        if spec.m == 1:
            one = RatVec((Fraction(1),))
            for h in (one, -one):
                report.checks.append(
                    branch_grid_check(pd, K, lam, h, denominator=grid_denominator)
                )
                report.checks.append(
                    homogeneity_check(pd, K, lam, h, (Fraction(2), Fraction(1, 3)))
                )
                report.checks.append(eta_uniqueness_check(pd, K, lam, h))
    return report
