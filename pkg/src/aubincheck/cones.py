"""Exact polyhedral convex geometry.

H-representation polyhedra and cones, double-description conversion between
half-space and generator form, polars, tangent/normal/critical cones, the
face lattice with canonical active sets, face differences, and the
directional limiting normal cone of the graph of a polyhedral normal-cone
map in its face-pair product form.

Conventions
-----------
* A ``PolyCone`` is ``{u | A u <= 0, E u = 0}``.  Rows are normalized to
  primitive integer vectors (inequalities keep their orientation; equality
  rows are reduced to a canonical echelon basis) and sorted, so two cones
  built from equivalent data have identical representations.
* Generator form is ``cone(rays) + span(lineality)`` with inclusion-minimal
  rays, computed lazily, once, by Motzkin insertion with an exact rank-based
  adjacency test.
* Faces are stored as canonical active index sets into the parent cone's
  inequality rows: the active set always lists *every* inequality that is
  tight on the whole face.
"""

from __future__ import annotations

import threading
import warnings
from dataclasses import dataclass
from fractions import Fraction
from itertools import chain, combinations
from math import gcd, lcm
from typing import Iterable, Sequence

from .exactlin import (
    Rat,
    RatMat,
    RatVec,
    format_rat,
    rank_rows,
    row_space_basis,
    solve_linear,
)


class ConeError(ValueError):
    """Raised on violated geometric preconditions."""


def _canon_ray(v: RatVec) -> RatVec:
    """Primitive integer representative of the ray through ``v`` (positive scale)."""
    if v.is_zero():
        raise ConeError("zero vector is not a ray")
    scale = Fraction(lcm(*(a.denominator for a in v.entries)))
    ints = [int(a * scale) for a in v.entries]
    g = 0
    for a in ints:
        g = gcd(g, a)
    return RatVec(tuple(Fraction(a, g) for a in ints))


def _canon_row(v: RatVec) -> RatVec:
    """Primitive integer form of an inequality normal (orientation preserved)."""
    return _canon_ray(v)


def _dedup(vectors: Iterable[RatVec]) -> list[RatVec]:
    seen: set[tuple[Rat, ...]] = set()
    out: list[RatVec] = []
    for v in vectors:
        if v.entries not in seen:
            seen.add(v.entries)
            out.append(v)
    return out


def double_description(
    ineq_rows: Sequence[RatVec], eq_rows: Sequence[RatVec], dim: int
) -> tuple[tuple[RatVec, ...], tuple[RatVec, ...]]:
    """Generators of ``{u | a.u <= 0 for a in ineq_rows, e.u = 0 for e in eq_rows}``.

    Motzkin insertion: constraints are added one at a time.  While the
    current lineality space still meets a new constraint's normal, the
    lineality is reduced instead of combining rays; afterwards rays are
    split by sign and adjacent positive/negative pairs are combined.  Two
    rays are adjacent exactly when the constraints tight at both span a
    space of codimension ``lineality + 2``, which is decided by an exact
    rank computation.
    """
    lin: list[RatVec] = [RatVec.unit(dim, i) for i in range(dim)]
    rays: list[RatVec] = []
    inserted_ineq: list[RatVec] = []
    inserted_eq: list[RatVec] = []

    def insert(a: RatVec, is_eq: bool) -> None:
        nonlocal lin, rays
        vals_lin = [a.dot(l) for l in lin]
        j = next((idx for idx, v in enumerate(vals_lin) if v != 0), None)
        if j is not None:
            l0 = lin[j] if vals_lin[j] > 0 else -lin[j]
            t = a.dot(l0)
            lin = [l - l0.scale(a.dot(l) / t) for idx, l in enumerate(lin) if idx != j]
            rays = [_canon_ray(r - l0.scale(a.dot(r) / t)) for r in rays]
            if not is_eq:
                rays.append(_canon_ray(-l0))
        else:
            vals = [a.dot(r) for r in rays]
            tight = [
                frozenset(i for i, c in enumerate(inserted_ineq) if c.dot(r) == 0)
                for r in rays
            ]

            def adjacent(ip: int, ineg: int) -> bool:
                common = tight[ip] & tight[ineg]
                mat_rows = list(inserted_eq) + [inserted_ineq[i] for i in sorted(common)]
                return dim - rank_rows(mat_rows) == len(lin) + 2

            keep = [
                r for r, v in zip(rays, vals) if v == 0 or (not is_eq and v < 0)
            ]
            new: list[RatVec] = []
            for ip, (rp, vp) in enumerate(zip(rays, vals)):
                if vp <= 0:
                    continue
                for ineg, (rn, vn) in enumerate(zip(rays, vals)):
                    if vn >= 0:
                        continue
                    if adjacent(ip, ineg):
                        new.append(_canon_ray(rn.scale(vp) - rp.scale(vn)))
            rays = _dedup(keep + new)
        (inserted_eq if is_eq else inserted_ineq).append(a)

    for e in eq_rows:
        if not e.is_zero():
            insert(e, is_eq=True)
    for a in ineq_rows:
        if not a.is_zero():
            insert(a, is_eq=False)

    rays_out = tuple(sorted(rays, key=lambda r: r.entries))
    lin_out = row_space_basis(lin)
    return rays_out, lin_out


class PolyCone:
    """Polyhedral convex cone ``{u | A u <= 0, E u = 0}`` with lazy generators."""

    __slots__ = ("dim", "ineq_rows", "eq_rows", "_vrep", "_lock", "_polar", "_faces")

    def __init__(
        self,
        ineq_rows: Sequence[RatVec] = (),
        eq_rows: Sequence[RatVec] = (),
        dim: int | None = None,
    ):
        if dim is None:
            if not ineq_rows and not eq_rows:
                raise ConeError("ambient dimension required for an unconstrained cone")
            dim = (list(ineq_rows) + list(eq_rows))[0].dim
        for r in chain(ineq_rows, eq_rows):
            if r.dim != dim:
                raise ConeError("row dimension mismatch")
        self.dim = dim
        ineqs = _dedup(_canon_row(r) for r in ineq_rows if not r.is_zero())
        self.ineq_rows: tuple[RatVec, ...] = tuple(sorted(ineqs, key=lambda r: r.entries))
        self.eq_rows: tuple[RatVec, ...] = row_space_basis(list(eq_rows))
        self._vrep: tuple[tuple[RatVec, ...], tuple[RatVec, ...]] | None = None
        self._lock = threading.Lock()
        self._polar: "PolyCone | None" = None
        self._faces: tuple["Face", ...] | None = None

    # -- construction helpers -------------------------------------------------

    @staticmethod
    def full_space(dim: int) -> "PolyCone":
        return PolyCone((), (), dim)

    @staticmethod
    def nonpositive_orthant(dim: int) -> "PolyCone":
        return PolyCone(tuple(RatVec.unit(dim, i) for i in range(dim)), (), dim)

    @staticmethod
    def zero_cone(dim: int) -> "PolyCone":
        return PolyCone((), tuple(RatVec.unit(dim, i) for i in range(dim)), dim)

    @staticmethod
    def from_generators(
        rays: Sequence[RatVec], lineality: Sequence[RatVec], dim: int
    ) -> "PolyCone":
        """Cone spanned by rays and a lineality space, converted to H-form."""
        polar_h = PolyCone(tuple(rays), tuple(lineality), dim)
        return polar_h.polar()

    # -- basic queries ---------------------------------------------------------

    def contains(self, v: RatVec) -> bool:
        if v.dim != self.dim:
            raise ConeError("dimension mismatch")
        return all(a.dot(v) <= 0 for a in self.ineq_rows) and all(
            e.dot(v) == 0 for e in self.eq_rows
        )

    def active_set(self, v: RatVec) -> tuple[int, ...]:
        """Indices of inequality rows tight at ``v`` (requires membership)."""
        if not self.contains(v):
            raise ConeError(f"point {v} is not in the cone")
        return tuple(i for i, a in enumerate(self.ineq_rows) if a.dot(v) == 0)

    # -- generator form ----------------------------------------------------

    def _ensure_vrep(self) -> tuple[tuple[RatVec, ...], tuple[RatVec, ...]]:
        if self._vrep is None:
            with self._lock:
                if self._vrep is None:
                    self._vrep = double_description(self.ineq_rows, self.eq_rows, self.dim)
        return self._vrep

    @property
    def rays(self) -> tuple[RatVec, ...]:
        return self._ensure_vrep()[0]

    @property
    def lineality(self) -> tuple[RatVec, ...]:
        return self._ensure_vrep()[1]

    @property
    def generators(self) -> tuple[RatVec, ...]:
        return self.rays + self.lineality

    def polar(self) -> "PolyCone":
        """Negative polar ``{z | <z,u> <= 0 for all u}``.

        Generators and inequality normals swap roles: the polar's H-form is
        read off this cone's generators, and its own generators stay lazy.
        """
        if self._polar is None:
            rays, lin = self._ensure_vrep()
            self._polar = PolyCone(rays, lin, self.dim)
        return self._polar

    def in_polar(self, z: RatVec) -> bool:
        rays, lin = self._ensure_vrep()
        return all(z.dot(r) <= 0 for r in rays) and all(z.dot(l) == 0 for l in lin)

    def span_basis(self) -> tuple[RatVec, ...]:
        return row_space_basis(list(self.generators))

    def span_dim(self) -> int:
        return len(self.span_basis())

    def lineality_dim(self) -> int:
        return len(self.lineality)

    def is_trivial(self) -> bool:
        """True when the cone is exactly the origin."""
        return not self.rays and not self.lineality

    def same_set(self, other: "PolyCone") -> bool:
        """Set equality via mutual generator membership."""
        if self.dim != other.dim:
            return False
        return (
            all(other.contains(g) for g in self.rays)
            and all(other.contains(l) and other.contains(-l) for l in self.lineality)
            and all(self.contains(g) for g in other.rays)
            and all(self.contains(l) and self.contains(-l) for l in other.lineality)
        )

    def relative_interior_point(self) -> RatVec:
        """Deterministic rational point in the relative interior: the ray sum."""
        total = RatVec.zero(self.dim)
        for r in self.rays:
            total = total + r
        return total

    def dump(self) -> str:
        """Canonical text form: equality rows, then inequality rows."""
        lines = [
            "eq: " + " ".join(format_rat(a) for a in e.entries) + " = 0"
            for e in self.eq_rows
        ]
        lines += [
            "ineq: " + " ".join(format_rat(a) for a in r.entries) + " <= 0"
            for r in self.ineq_rows
        ]
        return "\n".join(lines) if lines else f"(free, dim {self.dim})"

    def __repr__(self) -> str:
        return f"PolyCone(dim={self.dim}, ineq={len(self.ineq_rows)}, eq={len(self.eq_rows)})"


def dd_convert(C: PolyCone) -> PolyCone:
    """Populate (and return) the cone with its generator representation."""
    C._ensure_vrep()
    return C


def polar(C: PolyCone) -> PolyCone:
    return C.polar()


def verify_vrep(C: PolyCone) -> list[str]:
    """Cross-check H-form against generator form; returns disagreements.

    Generator membership checks ``V subset H``.  For ``H subset V`` the polar
    trick is used: the generators of ``{z | <z,ray> <= 0, <z,lin> = 0}``
    (an independent double-description run) must all be nonnegative
    combinations of the H-form's own rows.
    """
    problems: list[str] = []
    for r in C.rays:
        if not C.contains(r):
            problems.append(f"ray {r} violates H-form")
    for l in C.lineality:
        if not (C.contains(l) and C.contains(-l)):
            problems.append(f"lineality vector {l} violates H-form")
    polar_cone = C.polar()
    for g in polar_cone.generators + tuple(-l for l in polar_cone.lineality):
        if not in_generated_cone(g, C.ineq_rows, C.eq_rows):
            problems.append(f"polar generator {g} not generated by H rows")
    return problems


# -- polyhedra (inhomogeneous systems) ------------------------------------


@dataclass(frozen=True)
class HPolyhedron:
    """Polyhedron ``{u | A u <= c, E u = d}`` in H-representation."""

    A: RatMat
    c: RatVec
    E: RatMat
    d: RatVec

    def __post_init__(self):
        if self.A.rows != self.c.dim or self.E.rows != self.d.dim:
            raise ConeError("right-hand side dimension mismatch")
        if self.E.rows and self.A.cols != self.E.cols and self.A.rows:
            raise ConeError("ambient dimension mismatch between A and E")

    @staticmethod
    def from_rows(
        ineq: Sequence[tuple[Sequence, Rat]],
        eq: Sequence[tuple[Sequence, Rat]],
        dim: int,
    ) -> "HPolyhedron":
        A = RatMat.from_row_vectors([RatVec.from_values(r) for r, _ in ineq], dim)
        c = RatVec.from_values([rhs for _, rhs in ineq])
        E = RatMat.from_row_vectors([RatVec.from_values(r) for r, _ in eq], dim)
        d = RatVec.from_values([rhs for _, rhs in eq])
        return HPolyhedron(A, c, E, d)

    @property
    def dim(self) -> int:
        return self.A.cols if self.A.rows else self.E.cols

    def contains(self, u: RatVec) -> bool:
        return all(self.A.row(i).dot(u) <= self.c[i] for i in range(self.A.rows)) and all(
            self.E.row(i).dot(u) == self.d[i] for i in range(self.E.rows)
        )

    def violated_rows(self, u: RatVec) -> list[str]:
        out = []
        for i in range(self.A.rows):
            if self.A.row(i).dot(u) > self.c[i]:
                out.append(f"ineq row {i + 1}: {self.A.row(i)} . u <= {format_rat(self.c[i])}")
        for i in range(self.E.rows):
            if self.E.row(i).dot(u) != self.d[i]:
                out.append(f"eq row {i + 1}: {self.E.row(i)} . u = {format_rat(self.d[i])}")
        return out

    def active_rows(self, u: RatVec) -> tuple[int, ...]:
        if not self.contains(u):
            raise ConeError(f"point {u} is not in the polyhedron")
        return tuple(i for i in range(self.A.rows) if self.A.row(i).dot(u) == self.c[i])

    def is_empty(self) -> bool:
        return not polyhedron_vrep(
            self.A.row_vectors, self.c, self.E.row_vectors, self.d, self.dim
        ).feasible


@dataclass(frozen=True)
class PolyVRep:
    """Generator form of a polyhedron: points + recession rays + lineality."""

    points: tuple[RatVec, ...]
    rays: tuple[RatVec, ...]
    lineality: tuple[RatVec, ...]
    feasible: bool

    def relative_interior_point(self) -> RatVec | None:
        if not self.feasible:
            return None
        total = RatVec.zero(self.points[0].dim)
        for p in self.points:
            total = total + p
        total = total.scale(Fraction(1, len(self.points)))
        for r in self.rays:
            total = total + r
        return total


def polyhedron_vrep(
    ineq_rows: Sequence[RatVec],
    ineq_rhs: RatVec | Sequence[Rat],
    eq_rows: Sequence[RatVec],
    eq_rhs: RatVec | Sequence[Rat],
    dim: int,
) -> PolyVRep:
    """Exact generator form of ``{u | G u <= g, H u = e}`` via homogenization.

    The polyhedron is lifted to the cone ``{(u,t) | G u - g t <= 0,
    H u - e t = 0, t >= 0}``; generators with positive last coordinate scale
    to points, the ones with zero last coordinate are recession directions.
    """
    g = list(ineq_rhs)
    e = list(eq_rhs)
    lifted_ineq = [r.concat(RatVec((-g[i],))) for i, r in enumerate(ineq_rows)]
    lifted_ineq.append(RatVec.zero(dim).concat(RatVec((Fraction(-1),))))
    lifted_eq = [r.concat(RatVec((-e[i],))) for i, r in enumerate(eq_rows)]
    rays, lin = double_description(lifted_ineq, lifted_eq, dim + 1)
    points: list[RatVec] = []
    rec: list[RatVec] = []
    for r in rays:
        t = r[dim]
        if t > 0:
            points.append(RatVec(r.entries[:dim]).scale(1 / t))
        else:
            assert t == 0
            rec.append(RatVec(r.entries[:dim]))
    lineality = []
    for l in lin:
        assert l[dim] == 0
        lineality.append(RatVec(l.entries[:dim]))
    rec = [r for r in rec if not r.is_zero()]
    lineality = [l for l in lineality if not l.is_zero()]
    return PolyVRep(tuple(points), tuple(rec), tuple(row_space_basis(lineality)), bool(points))


def feasible_point(
    ineq_rows: Sequence[RatVec],
    ineq_rhs: Sequence[Rat],
    eq_rows: Sequence[RatVec],
    eq_rhs: Sequence[Rat],
    dim: int,
) -> RatVec | None:
    """One exact feasible point of an H-polyhedron, or ``None``."""
    vrep = polyhedron_vrep(ineq_rows, ineq_rhs, eq_rows, eq_rhs, dim)
    return vrep.points[0] if vrep.feasible else None


def in_generated_cone(
    v: RatVec, rays: Sequence[RatVec], lineality: Sequence[RatVec]
) -> bool:
    """Exact membership of ``v`` in ``cone(rays) + span(lineality)``."""
    if v.is_zero():
        return True
    gens = list(rays) + list(lineality)
    if not gens:
        return False
    cols = RatMat.from_row_vectors(gens).transpose()
    k = len(rays)
    coeff_dim = len(gens)
    ineq = [(-RatVec.unit(coeff_dim, i)) for i in range(k)]
    point = feasible_point(
        ineq,
        [Fraction(0)] * k,
        cols.row_vectors,
        list(v.entries),
        coeff_dim,
    )
    return point is not None


# -- tangent / normal / critical cones -------------------------------------


def tangent_normal(D: HPolyhedron, u: RatVec) -> tuple[PolyCone, PolyCone]:
    """Tangent and normal cone of a polyhedron at a feasible point.

    The tangent cone keeps the active inequality rows; the normal cone is its
    polar, i.e. the nonnegative hull of those rows plus the span of equality
    rows.
    """
    active = D.active_rows(u)  # raises if u is infeasible
    T = PolyCone(
        tuple(D.A.row(i) for i in active),
        D.E.row_vectors,
        D.dim,
    )
    return T, T.polar()


def critical_cone(T: PolyCone, dstar: RatVec) -> PolyCone:
    """``T`` intersected with the hyperplane orthogonal to ``dstar``.

    The usual caller passes a normal-cone element; anything else still gives
    a well-defined cone, but is worth flagging.
    """
    if not T.in_polar(dstar):
        warnings.warn(
            "critical cone direction is not in the polar of the tangent cone",
            stacklevel=2,
        )
    return PolyCone(T.ineq_rows, T.eq_rows + (dstar,), T.dim)


def normal_cone_at(K: PolyCone, v: RatVec) -> PolyCone:
    """Normal cone to ``K`` at a member point: ``polar(K)`` meets ``[v]^perp``."""
    if not K.contains(v):
        raise ConeError(f"{v} is not in the cone")
    P = K.polar()
    return PolyCone(P.ineq_rows, P.eq_rows + (v,), K.dim)


# -- faces ------------------------------------------------------------------


class Face:
    """Face of a polyhedral cone as a canonical active set of inequality rows."""

    __slots__ = ("parent", "active", "_cone")

    def __init__(self, parent: PolyCone, active: tuple[int, ...]):
        self.parent = parent
        self.active = tuple(sorted(active))
        self._cone: PolyCone | None = None

    def cone(self) -> PolyCone:
        if self._cone is None:
            K = self.parent
            self._cone = PolyCone(
                K.ineq_rows,
                K.eq_rows + tuple(K.ineq_rows[i] for i in self.active),
                K.dim,
            )
        return self._cone

    def contains(self, v: RatVec) -> bool:
        return self.cone().contains(v)

    def is_subface_of(self, other: "Face") -> bool:
        if self.parent is not other.parent:
            raise ConeError("faces of different parent cones are not comparable")
        return set(self.active) >= set(other.active)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Face)
            and self.parent is other.parent
            and self.active == other.active
        )

    def __hash__(self) -> int:
        return hash((id(self.parent), self.active))

    def __repr__(self) -> str:
        return f"Face(active={{{', '.join(str(i) for i in self.active)}}})"


def faces(K: PolyCone) -> tuple[Face, ...]:
    """All faces of ``K``, canonicalized and deduplicated.

    Every subset of inequality rows is activated, the tight set of the
    resulting cone is recomputed (closure), and duplicates collapse.  The
    list always contains ``K`` itself (empty active set) and the lineality
    space of ``K`` (all rows active).
    """
    if K._faces is not None:
        return K._faces
    n = len(K.ineq_rows)
    found: dict[tuple[int, ...], Face] = {}
    for size in range(n + 1):
        for subset in combinations(range(n), size):
            probe = PolyCone(
                K.ineq_rows,
                K.eq_rows + tuple(K.ineq_rows[i] for i in subset),
                K.dim,
            )
            gens = probe.generators
            closure = tuple(
                i
                for i in range(n)
                if all(K.ineq_rows[i].dot(g) == 0 for g in gens)
            )
            if closure not in found:
                face = Face(K, closure)
                face._cone = probe if closure == subset else None
                found[closure] = face
    ordered = tuple(sorted(found.values(), key=lambda f: (len(f.active), f.active)))
    K._faces = ordered
    return ordered


def minimal_face_at(K: PolyCone, v: RatVec) -> Face:
    """Smallest face of ``K`` containing ``v`` (``v`` lies in its relative interior)."""
    return Face(K, K.active_set(v))


def conjugate_face(K: PolyCone, F: Face) -> PolyCone:
    """``polar(K)`` meets the orthogonal complement of ``span(F)``."""
    P = K.polar()
    span = row_space_basis(list(F.cone().generators))
    return PolyCone(P.ineq_rows, P.eq_rows + span, K.dim)


def admissible_face_pairs(
    K: PolyCone, v: RatVec, eta: RatVec
) -> tuple[tuple[Face, Face], ...]:
    """Ordered pairs ``(F1, F2)`` with ``v in F2 <= F1 <= [eta]^perp``.

    Preconditions: ``v`` must belong to ``K`` and ``eta`` to the normal cone
    of ``K`` at ``v``.
    """
    if not K.contains(v):
        raise ConeError(f"base direction {v} is not in the cone")
    if not (K.in_polar(eta) and eta.dot(v) == 0):
        raise ConeError(f"direction {eta} is not in the normal cone at {v}")
    all_faces = faces(K)
    v_active = set(K.active_set(v))
    in_eta_perp = {
        f: all(eta.dot(g) == 0 for g in f.cone().generators) for f in all_faces
    }
    pairs: list[tuple[Face, Face]] = []
    for f1 in all_faces:
        if not in_eta_perp[f1]:
            continue
        for f2 in all_faces:
            if set(f2.active) >= set(f1.active) and set(f2.active) <= v_active:
                # v in F2 iff every row active on F2 is tight at v
                pairs.append((f1, f2))
    pairs.sort(key=lambda p: (p[0].active, p[1].active))
    return tuple(pairs)


def face_difference(F1: Face, F2: Face) -> PolyCone:
    """The cone ``F1 - F2`` for faces ``F2 <= F1`` of a common parent.

    With canonical active sets ``I1 <= I2`` the difference is
    ``{u | a_i.u = 0 (i in I1), a_i.u <= 0 (i in I2 \\ I1)}``; rows inactive
    on ``F2`` drop out entirely.
    """
    if F1.parent is not F2.parent:
        raise ConeError("faces of different parent cones")
    K = F1.parent
    i1, i2 = set(F1.active), set(F2.active)
    if not i1 <= i2:
        raise ConeError("second face is not contained in the first")
    return PolyCone(
        tuple(K.ineq_rows[i] for i in sorted(i2 - i1)),
        K.eq_rows + tuple(K.ineq_rows[i] for i in sorted(i1)),
        K.dim,
    )


def span_normal_cone(K: PolyCone, v: RatVec) -> tuple[RatVec, ...]:
    """Basis of the span of the normal cone of ``K`` at ``v``.

    Equals the span of the inequality normals active at ``v`` together with
    the row space of the equality block.
    """
    active = K.active_set(v)  # raises if v is not a member
    rows = [K.ineq_rows[i] for i in active] + list(K.eq_rows)
    return row_space_basis(rows)


# -- directional limiting normal cone of gph N_D ---------------------------


def gph_normal_products_with_pairs(
    K: PolyCone, u: RatVec, eta: RatVec
) -> tuple[tuple[Face, Face, PolyCone, PolyCone], ...]:
    """Face-pair products making up the directional limiting normal cone.

    For each admissible pair ``(F1, F2)`` of the critical cone the
    contribution is ``polar(F1 - F2) x (F1 - F2)``.  A direction ``(u, eta)``
    outside the tangent space of the graph yields no product at all.
    """
    if not (K.contains(u) and K.in_polar(eta) and u.dot(eta) == 0):
        warnings.warn(
            "direction leaves the tangent space of the graph: "
            "the directional limiting normal cone is empty",
            stacklevel=2,
        )
        return ()
    out = []
    seen: set[str] = set()
    for f1, f2 in admissible_face_pairs(K, u, eta):
        diff = face_difference(f1, f2)
        key = diff.dump()
        if key in seen:
            continue
        seen.add(key)
        out.append((f1, f2, diff.polar(), diff))
    return tuple(out)


def gph_normal_products(
    K: PolyCone, u: RatVec, eta: RatVec
) -> tuple[tuple[PolyCone, PolyCone], ...]:
    return tuple((p, c) for _, _, p, c in gph_normal_products_with_pairs(K, u, eta))


def dlnc_gph_normal(
    D: HPolyhedron, dbar: RatVec, lam: RatVec, u: RatVec, eta: RatVec
) -> tuple[tuple[PolyCone, PolyCone], ...]:
    """Directional limiting normal cone of the graph of the normal-cone map.

    Returned as the finite union of products ``(polar(C), C)`` over face
    differences ``C = F1 - F2`` of the critical cone of ``D`` at ``dbar``
    with respect to ``lam``.  Direction ``(0, 0)`` gives the full
    (non-directional) limiting normal cone.
    """
    T, N = tangent_normal(D, dbar)
    if not N.contains(lam):
        raise ConeError(f"multiplier {lam} is not in the normal cone at {dbar}")
    K = critical_cone(T, lam)
    return gph_normal_products(K, u, eta)


def product_union_contains(
    products: Sequence[tuple[PolyCone, PolyCone]], w: RatVec, z: RatVec
) -> bool:
    """Membership of ``(w, z)`` in a finite union of cone products."""
    return any(P.contains(w) and Q.contains(z) for P, Q in products)
