"""Branch-wise solution of the directional linear system.

For a fixed parameter direction ``h`` the system couples a state direction
``k`` and a multiplier direction ``eta``::

    0 = grad_L (h, k) + b^T eta,    eta in N_K(grad_qt (h, k))

where ``K`` is the critical cone of the constraint set at the reference
point and ``grad_L`` is the Lagrangian gradient.  The graph of ``N_K``
decomposes into finitely many products ``F x F^conj`` over the faces ``F``
of ``K`` (``F^conj = polar(K) meet F^perp``), so the solution set is the
union over faces of the polyhedra

    { (k, eta) | grad_L (h,k) + b^T eta = 0,  grad_qt (h,k) in F,  eta in F^conj }.

Each nonempty branch is solved exactly; its generator form supplies
representative solutions (all basic points, ray and lineality samples, and a
relative-interior point).  Positive-dimensional branches are flagged as a
continuum.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .cones import (
    Face,
    PolyCone,
    conjugate_face,
    faces,
    feasible_point,
    minimal_face_at,
    normal_cone_at,
    polyhedron_vrep,
)
from .exactlin import Rat, RatMat, RatVec, kernel_basis, row_space_basis
from .problem import PointData, lagrangian_gradient


class NoSolutionError(RuntimeError):
    """The queried point does not solve the directional system."""


class NonUniqueMultiplierError(RuntimeError):
    """Multiplier directions are not unique; the nondegeneracy premise failed."""


@dataclass(frozen=True)
class BranchSystem:
    """H-form of one branch's constraints over ``z = (k, eta)``."""

    eq_rows: tuple[RatVec, ...]
    eq_rhs: tuple[Rat, ...]
    ineq_rows: tuple[RatVec, ...]
    ineq_rhs: tuple[Rat, ...]
    dim: int

    def contains(self, z: RatVec) -> bool:
        return all(r.dot(z) == c for r, c in zip(self.eq_rows, self.eq_rhs)) and all(
            r.dot(z) <= c for r, c in zip(self.ineq_rows, self.ineq_rhs)
        )


@dataclass(frozen=True)
class BranchSolution:
    """Solutions of the directional system on one face of the critical cone."""

    h: RatVec
    lam: RatVec  # base multiplier the system was linearized at
    face: Face
    particular: tuple[RatVec, RatVec]  # one exact (k, eta) solution
    basic_points: tuple[tuple[RatVec, RatVec], ...]
    recession: tuple[tuple[RatVec, RatVec], ...]
    lineality: tuple[tuple[RatVec, RatVec], ...]
    representatives: tuple[tuple[RatVec, RatVec], ...]
    continuum: bool
    system: BranchSystem

    def contains(self, k: RatVec, eta: RatVec) -> bool:
        return self.system.contains(k.concat(eta))


def _split(z: RatVec, n: int) -> tuple[RatVec, RatVec]:
    return RatVec(z.entries[:n]), RatVec(z.entries[n:])


def _direction_vector(pd: PointData, h: RatVec, k: RatVec) -> RatVec:
    """Image of the direction pair under the substituted constraint gradient."""
    return pd.grad_qtilde_p().matvec(h) + pd.grad_qtilde_x().matvec(k)


def solve_branches(
    pd: PointData, K: PolyCone, lam: RatVec, h: RatVec
) -> tuple[BranchSolution, ...]:
    """All nonempty branches of the directional system for direction ``h``.

    The union of the returned branch solution sets is exactly the solution
    set of the directional system; solutions on face boundaries appear in
    every branch whose face contains them.  Branches come back in canonical
    face order; representative lists are deduplicated exactly.
    """
    if h.dim != pd.m:
        raise ValueError(f"direction has dim {h.dim}, expected m={pd.m}")
    n, s = pd.n, pd.s
    grad_l = lagrangian_gradient(pd, lam)
    lp = grad_l.submatrix_cols(range(pd.m))
    lx = grad_l.submatrix_cols(range(pd.m, pd.m + n))
    bt = pd.b.transpose()  # n x s
    gq_p = pd.grad_qtilde_p()
    gq_x = pd.grad_qtilde_x()
    lp_h = lp.matvec(h)
    gq_p_h = gq_p.matvec(h)
    dim = n + s
    out: list[BranchSolution] = []
    for face in faces(K):
        eq_rows: list[RatVec] = []
        eq_rhs: list[Rat] = []
        ineq_rows: list[RatVec] = []
        ineq_rhs: list[Rat] = []
        # stationarity: grad_L (h, k) + b^T eta = 0
        for i in range(n):
            eq_rows.append(lx.row(i).concat(bt.row(i)))
            eq_rhs.append(-lp_h[i])
        # grad_qt (h, k) in face: parent equalities, active rows, other rows
        active = set(face.active)
        for e in K.eq_rows:
            eq_rows.append(RatVec(gq_x.transpose().matvec(e).entries).concat(RatVec.zero(s)))
            eq_rhs.append(-e.dot(gq_p_h))
        for i, a in enumerate(K.ineq_rows):
            row = RatVec(gq_x.transpose().matvec(a).entries).concat(RatVec.zero(s))
            rhs = -a.dot(gq_p_h)
            if i in active:
                eq_rows.append(row)
                eq_rhs.append(rhs)
            else:
                ineq_rows.append(row)
                ineq_rhs.append(rhs)
        # eta in the conjugate face
        conj = conjugate_face(K, face)
        for e in conj.eq_rows:
            eq_rows.append(RatVec.zero(n).concat(e))
            eq_rhs.append(Fraction(0))
        for a in conj.ineq_rows:
            ineq_rows.append(RatVec.zero(n).concat(a))
            ineq_rhs.append(Fraction(0))

        vrep = polyhedron_vrep(ineq_rows, ineq_rhs, eq_rows, eq_rhs, dim)
        if not vrep.feasible:
            continue
        system = BranchSystem(
            tuple(eq_rows), tuple(eq_rhs), tuple(ineq_rows), tuple(ineq_rhs), dim
        )
        basic = tuple(_split(p, n) for p in vrep.points)
        rec = tuple(_split(r, n) for r in vrep.rays)
        lin = tuple(_split(l, n) for l in vrep.lineality)
        continuum = len(vrep.points) > 1 or bool(vrep.rays) or bool(vrep.lineality)
        relint = vrep.relative_interior_point()
        assert relint is not None
        samples: list[RatVec] = list(vrep.points)
        for r in vrep.rays:
            samples.append(relint + r)
        for l in vrep.lineality:
            samples.append(relint + l)
            samples.append(relint - l)
        samples.append(relint)
        seen: set[tuple[Rat, ...]] = set()
        reps: list[tuple[RatVec, RatVec]] = []
        for z in samples:
            if z.entries not in seen:
                seen.add(z.entries)
                reps.append(_split(z, n))
        out.append(
            BranchSolution(
                h=h,
                lam=lam,
                face=face,
                particular=basic[0],
                basic_points=basic,
                recession=rec,
                lineality=lin,
                representatives=tuple(reps),
                continuum=continuum,
                system=system,
            )
        )
    return tuple(out)


def solution_points(
    branches: Sequence[BranchSolution],
) -> tuple[tuple[tuple[RatVec, RatVec], ...], bool]:
    """Deduplicated ``(k, eta)`` solutions across branches.

    The second value reports exhaustiveness: it is ``True`` when every branch
    is an isolated point, in which case the returned tuple *is* the complete
    solution set of the directional system.
    """
    seen: set[tuple[Rat, ...]] = set()
    points: list[tuple[RatVec, RatVec]] = []
    exhaustive = True
    for br in branches:
        if br.continuum:
            exhaustive = False
        for k, eta in br.basic_points:
            key = k.entries + eta.entries
            if key not in seen:
                seen.add(key)
                points.append((k, eta))
    return tuple(points), exhaustive


def multiplier_direction_unique(pd: PointData, normal_cone: PolyCone) -> bool:
    """Whether ``b^T eta = rhs`` pins ``eta`` inside the given normal cone.

    Two admissible multiplier directions differ by a span element of the
    normal cone killed by ``b^T``; under the nondegeneracy assumption that
    space is trivial.
    """
    span = row_space_basis(list(normal_cone.generators))
    if not span:
        return True
    bt = pd.b.transpose()
    cols = RatMat.from_row_vectors(list(span)).transpose()  # s x r
    return not kernel_basis(bt.matmul(cols))


def unique_eta(
    pd: PointData, K: PolyCone, lam: RatVec, h: RatVec, k: RatVec
) -> RatVec:
    """The unique multiplier direction paired with a solving ``(h, k)``.

    Solves ``b^T eta = -grad_L (h, k)`` subject to ``eta`` lying in the
    normal cone of ``K`` at ``grad_qt (h, k)``; raises when no admissible
    multiplier exists (the input does not solve the directional system) and
    flags the internal inconsistency when more than one does.
    """
    v = _direction_vector(pd, h, k)
    if not K.contains(v):
        raise NoSolutionError(
            f"constraint direction {v} leaves the critical cone: no admissible multiplier"
        )
    ncone = normal_cone_at(K, v)
    grad_l = lagrangian_gradient(pd, lam)
    rhs = -grad_l.matvec(RatVec(h.entries + k.entries))
    bt = pd.b.transpose()
    eta = feasible_point(
        ncone.ineq_rows,
        [Fraction(0)] * len(ncone.ineq_rows),
        list(ncone.eq_rows) + list(bt.row_vectors),
        [Fraction(0)] * len(ncone.eq_rows) + list(rhs.entries),
        pd.s,
    )
    if eta is None:
        raise NoSolutionError(f"(h, k) = ({h}, {k}) does not solve the directional system")
    if not multiplier_direction_unique(pd, ncone):
        raise NonUniqueMultiplierError(
            "multiplier direction is not unique; nondegeneracy must have failed"
        )
    return eta


@dataclass(frozen=True)
class DmDerivative:
    """Graphical derivative value: an offset plus the image of a normal cone.

    ``contains`` decides membership exactly by solving for a preimage
    multiplier inside the normal cone.
    """

    offset: RatVec
    normal_cone: PolyCone | None  # None encodes the empty set
    b: RatMat

    @property
    def is_empty(self) -> bool:
        return self.normal_cone is None

    def contains(self, y: RatVec) -> bool:
        if self.normal_cone is None:
            return False
        bt = self.b.transpose()
        target = y - self.offset
        point = feasible_point(
            self.normal_cone.ineq_rows,
            [Fraction(0)] * len(self.normal_cone.ineq_rows),
            list(self.normal_cone.eq_rows) + list(bt.row_vectors),
            [Fraction(0)] * len(self.normal_cone.eq_rows) + list(target.entries),
            self.b.rows,
        )
        return point is not None

    def contains_zero(self) -> bool:
        return self.contains(RatVec.zero(self.offset.dim))

    def image_generators(self) -> tuple[tuple[RatVec, ...], tuple[RatVec, ...]]:
        """Rays and lineality of the cone part, pushed through ``b^T``."""
        if self.normal_cone is None:
            return (), ()
        bt = self.b.transpose()
        rays = tuple(bt.matvec(r) for r in self.normal_cone.rays)
        lin = tuple(bt.matvec(l) for l in self.normal_cone.lineality)
        return rays, lin


def dm_graphical_derivative(
    pd: PointData, K: PolyCone, lam: RatVec, h: RatVec, k: RatVec
) -> DmDerivative:
    """Graphical derivative of the variational system's field at ``(h, k)``:
    the Lagrangian-gradient offset plus ``b^T`` applied to the normal cone of
    the critical cone at the constraint direction.  Empty when that direction
    leaves the critical cone."""
    grad_l = lagrangian_gradient(pd, lam)
    offset = grad_l.matvec(RatVec(h.entries + k.entries))
    v = _direction_vector(pd, h, k)
    if not K.contains(v):
        return DmDerivative(offset=offset, normal_cone=None, b=pd.b)
    return DmDerivative(offset=offset, normal_cone=normal_cone_at(K, v), b=pd.b)


@dataclass(frozen=True)
class DsDerivative:
    """Graphical derivative of the solution map in one parameter direction."""

    h: RatVec
    k_points: tuple[RatVec, ...]
    exhaustive: bool
    caveat: str | None


def ds_graphical_derivative(
    pd: PointData,
    K: PolyCone,
    lam: RatVec,
    h: RatVec,
    aubin_established: bool | None = None,
) -> DsDerivative:
    """State directions solving the directional system (the ``k`` projection).

    The result equals the graphical derivative of the solution map only when
    the stability verdict has been established; callers that have not
    established it get the same set with a caveat attached.
    """
    branches = solve_branches(pd, K, lam, h)
    points, exhaustive = solution_points(branches)
    seen: set[tuple[Rat, ...]] = set()
    ks: list[RatVec] = []
    for k, _ in points:
        if k.entries not in seen:
            seen.add(k.entries)
            ks.append(k)
    caveat = None
    if aubin_established is False:
        caveat = "stability not established: this is the directional solution set only"
    elif aubin_established is None:
        caveat = "stability verdict not supplied"
    if not exhaustive:
        extra = "branch solution set is positive-dimensional; listed points are representatives"
        caveat = f"{caveat}; {extra}" if caveat else extra
    return DsDerivative(h=h, k_points=tuple(ks), exhaustive=exhaustive, caveat=caveat)
