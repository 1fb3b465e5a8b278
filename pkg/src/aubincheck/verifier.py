"""Stability checks and the aggregated verdict.

The pipeline establishes the Aubin (Lipschitz-like) property of the solution
map at the reference point through one of three sufficient-condition routes,
ordered from cheapest to most refined bookkeeping:

* route ``thm6``: a rank condition on the span of the normal cone at each
  solution's constraint direction, plus the pairwise positivity condition;
* route ``cor1``: the rank condition verified on the polar of every
  admissible face difference (this route certifies the needed directional
  metric subregularity at the same time), plus positivity;
* route ``thm5``: a weaker face-difference condition (state-kernel normals
  must also kill the parameter gradient) plus positivity, combined with a
  separate directional metric subregularity certificate.

Every failing check returns a machine-checkable witness; witnesses re-verify
against their defining relations in exact arithmetic.

The positivity condition ("for every w != 0 with b w in C there is a wt with
M wt in C and w^T A wt > 0") is decided exactly through its failure cone

    Z = {(w, mu) | b w in C, mu in polar(C), A^T w = M^T mu}:

the condition holds iff Z projects onto w = 0.  This rests on two polyhedral
identities (positivity of a linear functional somewhere on a cone happens
iff it is positive on a generator, and the polar of a linear preimage of a
polyhedral cone is the adjoint image of its polar); both are cross-validated
against a sampling oracle in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as iter_product
from typing import Iterable, Sequence

from .branches import (
    BranchSolution,
    ds_graphical_derivative,
    solve_branches,
    solution_points,
)
from .cones import (
    ConeError,
    Face,
    HPolyhedron,
    PolyCone,
    _canon_ray,
    admissible_face_pairs,
    critical_cone,
    face_difference,
    feasible_point,
    gph_normal_products_with_pairs,
    span_normal_cone,
    tangent_normal,
)
from .exactlin import (
    Rat,
    RatMat,
    RatVec,
    format_rat,
    in_span,
    kernel_basis,
    rank_rows,
    row_space_basis,
)
from .problem import PointData, ProblemSpec, lagrangian_gradient, point_data

HOLDS = "holds"
FAILS = "fails"
INDETERMINATE = "indeterminate"
NOT_ESTABLISHED = "not-established"

WITNESS_KINDS = (
    "A-violation",
    "existence-gap",
    "thm6i-violation",
    "thm6ii-violation",
    "thm5-violation",
    "cor1-violation",
    "subreg-gap",
    "nondirectional-solution",
)


class VerifierError(RuntimeError):
    pass


class ReferenceNotSolutionError(VerifierError):
    """The reference point does not solve the generalized equation."""


class InternalConsistencyError(VerifierError):
    """An invariant guaranteed by nondegeneracy failed to hold."""


@dataclass(frozen=True)
class Multiplier:
    lam: RatVec


@dataclass(frozen=True)
class Witness:
    """Counterexample certificate; ``payload`` holds the certifying vectors."""

    kind: str
    payload: dict
    description: str

    def __post_init__(self):
        if self.kind not in WITNESS_KINDS:
            raise ValueError(f"unknown witness kind {self.kind!r}")


@dataclass(frozen=True)
class CheckResult:
    status: str
    witness: Witness | None = None
    reason: str | None = None

    @property
    def holds(self) -> bool:
        return self.status == HOLDS


# -- assumption (A) and base multiplier -------------------------------------


def check_assumption_A(pd: PointData, D: HPolyhedron) -> CheckResult:
    """Nondegeneracy of the constraint system at the reference point.

    Holds iff ``b^T lam = 0`` forces ``lam = 0`` within the span of the
    normal cone of ``D`` at the substituted constraint value.  The dual
    surjectivity form (``b`` maps onto the quotient by the tangent cone's
    lineality) is computed as well and must agree.
    """
    T, _ = tangent_normal(D, pd.qtilde_val)
    span = row_space_basis(
        [D.A.row(i) for i in D.active_rows(pd.qtilde_val)] + list(D.E.row_vectors)
    )
    if span:
        cols = RatMat.from_row_vectors(list(span)).transpose()  # s x r
        ker = kernel_basis(pd.b.transpose().matmul(cols))
    else:
        ker = ()
    # equivalent surjectivity form: b R^n + lin T_D = R^s
    lin_t = kernel_basis(
        RatMat.from_row_vectors(
            [D.A.row(i) for i in D.active_rows(pd.qtilde_val)] + list(D.E.row_vectors),
            D.dim,
        )
    )
    surjective = rank_rows(list(pd.b.transpose().row_vectors) + list(lin_t)) == pd.s
    implication_holds = not ker
    if implication_holds != surjective:
        raise InternalConsistencyError(
            "nondegeneracy rank test disagrees with its surjectivity form"
        )
    if implication_holds:
        return CheckResult(HOLDS, reason=f"normal-cone span has dimension {len(span)}")
    coeffs = ker[0]
    lam = RatVec.zero(pd.s)
    for c, basis_vec in zip(coeffs.entries, span):
        lam = lam + basis_vec.scale(c)
    return CheckResult(
        FAILS,
        witness=Witness(
            kind="A-violation",
            payload={"lam": lam},
            description="nonzero multiplier in the normal-cone span killed by b^T",
        ),
    )


def solve_base_multiplier(pd: PointData, D: HPolyhedron, f_val: RatVec) -> Multiplier:
    """The unique multiplier closing the generalized equation at the reference.

    Solves ``f + b^T lam = 0`` with ``lam`` in the normal cone of ``D`` at
    the substituted constraint value; infeasibility means the reference point
    is not a solution, non-uniqueness contradicts nondegeneracy.
    """
    T, N = tangent_normal(D, pd.qtilde_val)
    bt = pd.b.transpose()
    lam = feasible_point(
        N.ineq_rows,
        [Fraction(0)] * len(N.ineq_rows),
        list(N.eq_rows) + list(bt.row_vectors),
        [Fraction(0)] * len(N.eq_rows) + [-v for v in f_val.entries],
        pd.s,
    )
    if lam is None:
        raise ReferenceNotSolutionError(
            "reference point does not solve the generalized equation: "
            f"no multiplier in the normal cone satisfies f + b^T lam = 0 (f = {f_val})"
        )
    span = row_space_basis(list(N.generators))
    if span:
        cols = RatMat.from_row_vectors(list(span)).transpose()
        if kernel_basis(bt.matmul(cols)):
            raise InternalConsistencyError(
                "base multiplier is not unique although nondegeneracy holds"
            )
    return Multiplier(lam=lam)


# -- existence of directional solutions -------------------------------------


def check_existence(
    pd: PointData, K: PolyCone, lam: RatVec, directions: Sequence[RatVec]
) -> CheckResult:
    """Every listed direction must admit a directional-system solution."""
    for h in directions:
        if not solve_branches(pd, K, lam, h):
            return CheckResult(
                FAILS,
                witness=Witness(
                    kind="existence-gap",
                    payload={"h": h},
                    description="no branch of the directional system is solvable",
                ),
            )
    return CheckResult(HOLDS)


# -- per-pair primitives -----------------------------------------------------


def state_kernel_normals(C: PolyCone, state_grad: RatMat) -> tuple[RatVec, ...]:
    """Generators of ``{mu in polar(C) | state_grad^T mu = 0}``."""
    P = C.polar()
    cone = PolyCone(
        P.ineq_rows,
        P.eq_rows + state_grad.transpose().row_vectors,
        C.dim,
    )
    return cone.generators + tuple(-l for l in cone.lineality)


def pair_injectivity(C: PolyCone, state_grad: RatMat) -> RatVec | None:
    """``None`` when only ``mu = 0`` survives; otherwise a nonzero witness."""
    gens = state_kernel_normals(C, state_grad)
    for g in gens:
        if not g.is_zero():
            return g
    return None


def pair_parameter_vanishing(
    C: PolyCone, state_grad: RatMat, param_grad: RatMat
) -> RatVec | None:
    """Witness ``mu`` with ``state_grad^T mu = 0`` but ``param_grad^T mu != 0``."""
    pt = param_grad.transpose()
    for g in state_kernel_normals(C, state_grad):
        if not pt.matvec(g).is_zero():
            return g
    return None


def pair_full_injectivity(C: PolyCone, full_grad: RatMat) -> bool:
    return pair_injectivity(C, full_grad) is None


def positivity_failure(
    C: PolyCone, a_xx: RatMat, b: RatMat, state_grad: RatMat
) -> tuple[RatVec, RatVec] | None:
    """Failure-cone decision of the positivity condition on ``C``.

    Returns ``None`` when for every ``w != 0`` with ``b w in C`` some ``wt``
    with ``state_grad wt in C`` achieves ``w^T a_xx wt > 0``; otherwise a
    certified failing pair ``(w, mu)`` with ``b w in C``, ``mu in polar(C)``
    and ``a_xx^T w = state_grad^T mu``.
    """
    n = a_xx.rows
    s = C.dim
    P = C.polar()
    ineq_rows: list[RatVec] = []
    eq_rows: list[RatVec] = []
    for row in C.ineq_rows:  # b w in C
        ineq_rows.append(RatVec(b.transpose().matvec(row).entries).concat(RatVec.zero(s)))
    for row in C.eq_rows:
        eq_rows.append(RatVec(b.transpose().matvec(row).entries).concat(RatVec.zero(s)))
    for row in P.ineq_rows:  # mu in polar(C)
        ineq_rows.append(RatVec.zero(n).concat(row))
    for row in P.eq_rows:
        eq_rows.append(RatVec.zero(n).concat(row))
    at = a_xx.transpose()
    mt = state_grad.transpose()
    for i in range(n):  # a_xx^T w - state_grad^T mu = 0
        eq_rows.append(at.row(i).concat(-mt.row(i)))
    Z = PolyCone(ineq_rows, eq_rows, n + s)
    for g in Z.generators:
        w = RatVec(g.entries[:n])
        if not w.is_zero():
            return w, RatVec(g.entries[n:])
    return None


# -- representative-level evaluation ----------------------------------------


@dataclass(frozen=True)
class RepPoint:
    h: RatVec
    k: RatVec
    eta: RatVec
    v: RatVec  # constraint direction grad_qt (h, k)

    def is_zero_direction(self) -> bool:
        return self.h.is_zero() and self.k.is_zero()


def branch_rep_points(pd: PointData, branch: BranchSolution) -> tuple[RepPoint, ...]:
    """Nonzero representative solutions of a branch, with constraint directions."""
    gp = pd.grad_qtilde_p()
    gx = pd.grad_qtilde_x()
    out = []
    for k, eta in branch.representatives:
        rp = RepPoint(branch.h, k, eta, gp.matvec(branch.h) + gx.matvec(k))
        if not rp.is_zero_direction():
            out.append(rp)
    return tuple(out)


def _aggregate(
    branch: BranchSolution,
    rep_results: Sequence[tuple[RepPoint, Witness | None]],
    contexts: Sequence[tuple],
) -> CheckResult:
    """Combine per-representative outcomes into one branch verdict.

    A single isolated solution decides directly.  On a positive-dimensional
    branch the finite representative set is not proven exhaustive, so mixed
    outcomes, or a face-pair context that varies across representatives,
    yield an indeterminate verdict.
    """
    if not rep_results:
        return CheckResult(HOLDS, reason="no nonzero solutions on this branch")
    witnesses = [w for _, w in rep_results if w is not None]
    all_fail = len(witnesses) == len(rep_results)
    all_hold = not witnesses
    if branch.continuum and len(set(contexts)) > 1:
        return CheckResult(
            INDETERMINATE,
            witness=witnesses[0] if witnesses else None,
            reason="face-pair context varies over a positive-dimensional branch",
        )
    if all_hold:
        return CheckResult(HOLDS)
    if all_fail:
        return CheckResult(FAILS, witness=witnesses[0])
    return CheckResult(
        INDETERMINATE,
        witness=witnesses[0],
        reason="outcome varies across representatives of a positive-dimensional branch",
    )


def _pairs_for(rep: RepPoint, K: PolyCone) -> tuple[tuple[Face, Face], ...]:
    return admissible_face_pairs(K, rep.v, rep.eta)


def _pair_context(pairs: Iterable[tuple[Face, Face]]) -> tuple:
    return tuple((f1.active, f2.active) for f1, f2 in pairs)


def check_thm6_i(pd: PointData, K: PolyCone, branch: BranchSolution) -> CheckResult:
    """Rank condition on the span of the normal cone at each solution.

    The state gradient must be injective on that span; a surviving nonzero
    ``mu`` is the witness.
    """
    reps = branch_rep_points(pd, branch)
    results: list[tuple[RepPoint, Witness | None]] = []
    contexts: list[tuple] = []
    for rep in reps:
        span = span_normal_cone(K, rep.v)
        contexts.append(tuple(b.entries for b in span))
        witness = None
        if span:
            cols = RatMat.from_row_vectors(list(span)).transpose()
            ker = kernel_basis(pd.grad_qtilde_x().transpose().matmul(cols))
            if ker:
                mu = RatVec.zero(pd.s)
                for c, bvec in zip(ker[0].entries, span):
                    mu = mu + bvec.scale(c)
                witness = Witness(
                    kind="thm6i-violation",
                    payload={"mu": mu, "h": rep.h, "k": rep.k, "eta": rep.eta},
                    description="nonzero mu in the normal-cone span with state_grad^T mu = 0",
                )
        results.append((rep, witness))
    return _aggregate(branch, results, contexts)


def _check_pairs(
    pd: PointData,
    K: PolyCone,
    branch: BranchSolution,
    kind: str,
    pair_test,
) -> CheckResult:
    """Run a per-face-pair test at every nonzero representative."""
    reps = branch_rep_points(pd, branch)
    results: list[tuple[RepPoint, Witness | None]] = []
    contexts: list[tuple] = []
    for rep in reps:
        pairs = _pairs_for(rep, K)
        contexts.append(_pair_context(pairs))
        witness = None
        for f1, f2 in pairs:
            C = face_difference(f1, f2)
            payload = pair_test(C)
            if payload is not None:
                payload.update(
                    {
                        "h": rep.h,
                        "k": rep.k,
                        "eta": rep.eta,
                        "face1_active": f1.active,
                        "face2_active": f2.active,
                    }
                )
                witness = Witness(kind=kind, payload=payload, description=payload.pop("note"))
                break
        results.append((rep, witness))
    return _aggregate(branch, results, contexts)


def check_thm6_ii(pd: PointData, K: PolyCone, branch: BranchSolution) -> CheckResult:
    """Positivity condition over all admissible face pairs of a branch."""
    a_xx = lagrangian_gradient_xx(pd, branch)
    b = pd.b
    m2 = pd.grad_qtilde_x()

    def test(C: PolyCone):
        bad = positivity_failure(C, a_xx, b, m2)
        if bad is None:
            return None
        w, mu = bad
        return {"w": w, "mu": mu, "note": "w != 0 with b w in C and a_xx^T w = state_grad^T mu, mu in polar(C)"}

    return _check_pairs(pd, K, branch, "thm6ii-violation", test)


def check_thm5(pd: PointData, K: PolyCone, branch: BranchSolution) -> CheckResult:
    """Parameter-vanishing condition plus positivity, per admissible pair."""
    a_xx = lagrangian_gradient_xx(pd, branch)
    b = pd.b
    m2 = pd.grad_qtilde_x()
    m1 = pd.grad_qtilde_p()

    def test(C: PolyCone):
        mu = pair_parameter_vanishing(C, m2, m1)
        if mu is not None:
            return {"mu": mu, "note": "state-kernel normal with nonzero parameter image"}
        bad = positivity_failure(C, a_xx, b, m2)
        if bad is None:
            return None
        w, mu2 = bad
        return {"w": w, "mu": mu2, "note": "positivity condition fails at w"}

    return _check_pairs(pd, K, branch, "thm5-violation", test)


def check_cor1(pd: PointData, K: PolyCone, branch: BranchSolution) -> CheckResult:
    """Face-polar injectivity plus positivity, per admissible pair.

    When this route holds it also certifies the directional metric
    subregularity needed by the weakest route.
    """
    a_xx = lagrangian_gradient_xx(pd, branch)
    b = pd.b
    m2 = pd.grad_qtilde_x()

    def test(C: PolyCone):
        mu = pair_injectivity(C, m2)
        if mu is not None:
            return {"mu": mu, "note": "nonzero mu in polar(face difference) with state_grad^T mu = 0"}
        bad = positivity_failure(C, a_xx, b, m2)
        if bad is None:
            return None
        w, mu2 = bad
        return {"w": w, "mu": mu2, "note": "positivity condition fails at w"}

    return _check_pairs(pd, K, branch, "cor1-violation", test)


def check_dir_subregularity(pd: PointData, K: PolyCone, branch: BranchSolution) -> CheckResult:
    """Sufficient condition for directional metric subregularity.

    Only ever reports ``holds`` or ``not-established``: the criterion is
    sufficient, so its failure proves nothing.
    """
    reps = branch_rep_points(pd, branch)
    full = pd.grad_qtilde
    results = []
    contexts: list[tuple] = []
    for rep in reps:
        pairs = _pairs_for(rep, K)
        contexts.append(_pair_context(pairs))
        ok = all(pair_full_injectivity(face_difference(f1, f2), full) for f1, f2 in pairs)
        results.append((rep, ok))
    if not results:
        return CheckResult(HOLDS, reason="no nonzero solutions on this branch")
    if all(ok for _, ok in results):
        if branch.continuum and len(set(contexts)) > 1:
            return CheckResult(
                INDETERMINATE,
                reason="face-pair context varies over a positive-dimensional branch",
            )
        return CheckResult(HOLDS)
    return CheckResult(
        NOT_ESTABLISHED,
        reason="polar of some face difference meets the full-gradient kernel nontrivially",
    )


def lagrangian_gradient_xx(pd: PointData, branch: BranchSolution) -> RatMat:
    """State block of the Lagrangian gradient at the branch's base multiplier."""
    return _grad_l_xx(pd, branch.lam)


def _grad_l_xx(pd: PointData, lam: RatVec) -> RatMat:
    return lagrangian_gradient(pd, lam).submatrix_cols(range(pd.m, pd.m + pd.n))


# -- the coderivative implication, directional and non-directional ----------


def _implication_failure(
    pd: PointData,
    lam: RatVec,
    products: Sequence[tuple[Face, Face, PolyCone, PolyCone]],
) -> dict | None:
    """Search the product cones for a nontrivial ``(v, w, p*)`` solution.

    Solves, per product ``(polar(C), C)``, the cone of pairs ``(v, w)`` with
    the state block of ``grad_L^T v + grad_qt^T w`` vanishing, ``w`` in
    ``polar(C)`` and ``-b v`` in ``C`` (the coderivative membership
    orientation).  Nontrivial means ``v != 0`` or a nonzero parameter block
    ``p*``; the first nontrivial generator is returned.
    """
    n, s, m = pd.n, pd.s, pd.m
    grad_l_t = lagrangian_gradient(pd, lam).transpose()  # (m+n) x n
    gq_t = pd.grad_qtilde.transpose()  # (m+n) x s
    bt = pd.b.transpose()  # n x s
    for f1, f2, polar_c, C in products:
        ineq_rows: list[RatVec] = []
        eq_rows: list[RatVec] = []
        for j in range(n):  # state block of grad_L^T v + grad_qt^T w = 0
            eq_rows.append(grad_l_t.row(m + j).concat(gq_t.row(m + j)))
        for row in polar_c.ineq_rows:  # w in polar(C)
            ineq_rows.append(RatVec.zero(n).concat(row))
        for row in polar_c.eq_rows:
            eq_rows.append(RatVec.zero(n).concat(row))
        for row in C.ineq_rows:  # -b v in C
            ineq_rows.append(RatVec(bt.matvec(row).scale(-1).entries).concat(RatVec.zero(s)))
        for row in C.eq_rows:
            eq_rows.append(RatVec(bt.matvec(row).scale(-1).entries).concat(RatVec.zero(s)))
        Z = PolyCone(ineq_rows, eq_rows, n + s)
        for g in Z.generators:
            v = RatVec(g.entries[:n])
            w = RatVec(g.entries[n:])
            pstar = RatVec(
                tuple(
                    grad_l_t.row(i).dot(v) + gq_t.row(i).dot(w) for i in range(m)
                )
            )
            if not (v.is_zero() and pstar.is_zero()):
                return {
                    "v": v,
                    "w": w,
                    "pstar": pstar,
                    "face1_active": f1.active,
                    "face2_active": f2.active,
                }
    return None


def check_nondirectional(pd: PointData, K: PolyCone, lam: RatVec) -> CheckResult:
    """The comparison condition built on non-directional limiting normals.

    This is the zero-direction instance of the coderivative implication: the
    product union runs over *all* face pairs of the critical cone.  Failing
    is expected for problems whose stability only the directional analysis
    can certify; the witness is the nontrivial solution found.
    """
    products = gph_normal_products_with_pairs(K, RatVec.zero(pd.s), RatVec.zero(pd.s))
    bad = _implication_failure(pd, lam, products)
    if bad is None:
        return CheckResult(HOLDS)
    return CheckResult(
        FAILS,
        witness=Witness(
            kind="nondirectional-solution",
            payload=bad,
            description="nontrivial (v, w, p*) solving the non-directional implication premise",
        ),
    )


def check_dir_implication(pd: PointData, K: PolyCone, lam: RatVec, branch: BranchSolution) -> CheckResult:
    """Direct evaluation of the directional coderivative implication.

    Not a verdict route by itself (the face-pair routes certify it more
    cheaply); used for reporting and the hierarchy cross-checks.
    """
    reps = branch_rep_points(pd, branch)
    results: list[tuple[RepPoint, Witness | None]] = []
    contexts: list[tuple] = []
    for rep in reps:
        products = gph_normal_products_with_pairs(K, rep.v, rep.eta)
        contexts.append(_pair_context((f1, f2) for f1, f2, _, _ in products))
        bad = _implication_failure(pd, lam, products)
        witness = None
        if bad is not None:
            bad.update({"h": rep.h, "k": rep.k, "eta": rep.eta})
            witness = Witness(
                kind="nondirectional-solution",
                payload=bad,
                description="nontrivial (v, w, p*) solving the directional implication premise",
            )
        results.append((rep, witness))
    return _aggregate(branch, results, contexts)


# -- witness re-verification --------------------------------------------------


def reverify_witness(
    w: Witness,
    pd: PointData,
    D: HPolyhedron,
    K: PolyCone | None,
    lam: RatVec | None,
) -> bool:
    """Re-check a witness against its defining relations, exactly."""
    if w.kind == "A-violation":
        lam_w: RatVec = w.payload["lam"]
        span = row_space_basis(
            [D.A.row(i) for i in D.active_rows(pd.qtilde_val)] + list(D.E.row_vectors)
        )
        return (
            not lam_w.is_zero()
            and pd.b.transpose().matvec(lam_w).is_zero()
            and in_span(lam_w, span)
        )
    if w.kind == "existence-gap":
        assert K is not None and lam is not None
        return not solve_branches(pd, K, lam, w.payload["h"])
    if w.kind == "thm6i-violation":
        assert K is not None
        mu: RatVec = w.payload["mu"]
        gp = pd.grad_qtilde_p()
        gx = pd.grad_qtilde_x()
        v = gp.matvec(w.payload["h"]) + gx.matvec(w.payload["k"])
        return (
            not mu.is_zero()
            and gx.transpose().matvec(mu).is_zero()
            and in_span(mu, span_normal_cone(K, v))
        )
    if w.kind in ("thm6ii-violation", "thm5-violation", "cor1-violation"):
        assert K is not None and lam is not None
        C = _face_difference_from_payload(K, w.payload)
        if "w" in w.payload:
            wv: RatVec = w.payload["w"]
            mu = w.payload["mu"]
            a_xx = _grad_l_xx(pd, lam)
            return (
                not wv.is_zero()
                and C.contains(pd.b.matvec(wv))
                and C.in_polar(mu)
                and a_xx.transpose().matvec(wv)
                == pd.grad_qtilde_x().transpose().matvec(mu)
            )
        mu = w.payload["mu"]
        ok = not mu.is_zero() and C.in_polar(mu) and pd.grad_qtilde_x().transpose().matvec(mu).is_zero()
        if w.kind == "thm5-violation":
            ok = ok and not pd.grad_qtilde_p().transpose().matvec(mu).is_zero()
        return ok
    if w.kind == "nondirectional-solution":
        assert K is not None and lam is not None
        C = _face_difference_from_payload(K, w.payload)
        v = w.payload["v"]
        wv = w.payload["w"]
        pstar = w.payload["pstar"]
        grad_l_t = lagrangian_gradient(pd, lam).transpose()
        gq_t = pd.grad_qtilde.transpose()
        m, n = pd.m, pd.n
        for j in range(n):
            if grad_l_t.row(m + j).dot(v) + gq_t.row(m + j).dot(wv) != 0:
                return False
        for i in range(m):
            if grad_l_t.row(i).dot(v) + gq_t.row(i).dot(wv) != pstar[i]:
                return False
        return (
            (not v.is_zero() or not pstar.is_zero())
            and C.polar().contains(wv)
            and C.contains(pd.b.matvec(v).scale(-1))
        )
    raise ValueError(f"cannot re-verify witness kind {w.kind!r}")


def _face_difference_from_payload(K: PolyCone, payload: dict) -> PolyCone:
    f1 = Face(K, tuple(payload["face1_active"]))
    f2 = Face(K, tuple(payload["face2_active"]))
    return face_difference(f1, f2)


# -- direction selection ------------------------------------------------------


def default_directions(m: int, grid_resolution: int = 2) -> tuple[RatVec, ...]:
    """Canonical direction set: exact for one parameter, sampled otherwise.

    For ``m = 1`` positive homogeneity reduces all nonzero directions to
    ``{1, -1}``; the zero direction is kept because solutions with a zero
    parameter direction but nonzero state direction are still quantified
    over.  For ``m >= 2`` a deterministic rational grid on the boundary of
    the unit cube is used and verdicts are qualified as sampled.
    """
    if m == 0:
        return (RatVec.zero(0),)
    if m == 1:
        return (RatVec((Fraction(1),)), RatVec((Fraction(-1),)), RatVec((Fraction(0),)))
    g = grid_resolution
    values = [Fraction(i, g) for i in range(-g, g + 1)]
    seen: set[tuple[Rat, ...]] = set()
    out: list[RatVec] = []
    for combo in iter_product(values, repeat=m):
        if max(abs(c) for c in combo) != 1:
            continue
        v = RatVec(tuple(combo))
        key = _canon_ray(v).entries
        if key not in seen:
            seen.add(key)
            out.append(v)
    out.append(RatVec.zero(m))
    return tuple(out)


# -- verdict pipeline ---------------------------------------------------------

ROUTES = ("thm6", "cor1", "thm5")
ROUTE_TOKENS = ("auto", "thm5", "thm6", "cor1")


@dataclass(frozen=True)
class VerdictOptions:
    directions: tuple[RatVec, ...] = ()
    route: str = "auto"
    grid_resolution: int = 2


@dataclass
class BranchReport:
    h: RatVec
    face_active: tuple[int, ...]
    solutions: tuple[tuple[RatVec, RatVec], ...]
    continuum: bool
    conditions: dict[str, CheckResult] = field(default_factory=dict)


@dataclass
class Verdict:
    """Aggregated outcome of the verification pipeline."""

    spec: ProblemSpec
    pd: PointData
    assumption_a: CheckResult
    multiplier: RatVec | None = None
    critical_cone: PolyCone | None = None
    directions: tuple[RatVec, ...] = ()
    exactness: str = ""
    existence: CheckResult | None = None
    branch_reports: list[BranchReport] = field(default_factory=list)
    direction_solutions: dict[tuple, tuple] = field(default_factory=dict)
    ds_tables: dict[tuple, tuple] = field(default_factory=dict)
    nondirectional: CheckResult | None = None
    route_status: dict[str, str] = field(default_factory=dict)
    route_used: str | None = None
    overall: str = NOT_ESTABLISHED
    fatal: str | None = None

    @property
    def established(self) -> bool:
        return self.overall == "established"


def _route_ok(
    branch_reports: Sequence[BranchReport], existence: CheckResult, names: Sequence[str]
) -> str:
    """Route verdict: holds only when every constituent check holds everywhere.

    A failed check disproves the route's premise; an indeterminate or merely
    not-established one leaves the route open without completing it.
    """
    if not existence.holds:
        return FAILS
    statuses = [br.conditions[name].status for br in branch_reports for name in names]
    if all(st == HOLDS for st in statuses):
        return HOLDS
    if any(st == FAILS for st in statuses):
        return FAILS
    return INDETERMINATE


def verdict(spec: ProblemSpec, options: VerdictOptions | None = None) -> Verdict:
    """Full pipeline: nondegeneracy, base multiplier, branch conditions, routes.

    Raises :class:`ReferenceNotSolutionError` when the reference point is not
    a solution of the generalized equation; a nondegeneracy failure is a
    reported outcome, not an exception.
    """
    options = options or VerdictOptions()
    if options.route not in ROUTE_TOKENS:
        raise ValueError(f"unknown route {options.route!r}")
    pd = point_data(spec)
    a_res = check_assumption_A(pd, spec.D)
    out = Verdict(spec=spec, pd=pd, assumption_a=a_res)
    if not a_res.holds:
        out.fatal = "nondegeneracy fails at the reference point"
        return out
    mult = solve_base_multiplier(pd, spec.D, spec.f_value())
    out.multiplier = mult.lam
    T, _ = tangent_normal(spec.D, pd.qtilde_val)
    K = critical_cone(T, mult.lam)
    out.critical_cone = K

    directions = list(default_directions(spec.m, options.grid_resolution))
    seen = {d.entries for d in directions}
    for d in options.directions:
        if d.dim != spec.m:
            raise ValueError(f"direction {d} has wrong dimension (expected m={spec.m})")
        if d.entries not in seen:
            seen.add(d.entries)
            directions.append(d)
    out.directions = tuple(directions)
    out.exactness = (
        "exact (homogeneity reduction over all parameter directions)"
        if spec.m <= 1
        else "verified on sampled directions"
    )

    out.existence = check_existence(pd, K, mult.lam, out.directions)
    for h in out.directions:
        branches = solve_branches(pd, K, mult.lam, h)
        points, exhaustive = solution_points(branches)
        out.direction_solutions[h.entries] = (points, exhaustive)
        for br in branches:
            report = BranchReport(
                h=h,
                face_active=br.face.active,
                solutions=br.basic_points,
                continuum=br.continuum,
            )
            report.conditions["thm6_i"] = check_thm6_i(pd, K, br)
            report.conditions["thm6_ii"] = check_thm6_ii(pd, K, br)
            report.conditions["thm5"] = check_thm5(pd, K, br)
            report.conditions["cor1"] = check_cor1(pd, K, br)
            report.conditions["dir_subregularity"] = check_dir_subregularity(pd, K, br)
            report.conditions["dir_implication"] = check_dir_implication(pd, K, mult.lam, br)
            out.branch_reports.append(report)

    out.route_status["thm6"] = _route_ok(out.branch_reports, out.existence, ("thm6_i", "thm6_ii"))
    out.route_status["cor1"] = _route_ok(out.branch_reports, out.existence, ("cor1",))
    out.route_status["thm5"] = _route_ok(
        out.branch_reports, out.existence, ("thm5", "dir_subregularity")
    )
    out.nondirectional = check_nondirectional(pd, K, mult.lam)

    candidates = ROUTES if options.route == "auto" else (options.route,)
    for route in candidates:
        if out.route_status[route] == HOLDS:
            out.route_used = route
            out.overall = "established"
            break
    else:
        out.overall = NOT_ESTABLISHED

    established = out.established
    for h in out.directions:
        ds = ds_graphical_derivative(pd, K, mult.lam, h, aubin_established=established)
        out.ds_tables[h.entries] = (ds.k_points, ds.exhaustive, ds.caveat)
    return out
