"""Command-line front end.

``aubincheck --problem FILE`` runs the verification pipeline and emits a
report (text or JSON); ``aubincheck --oracle N`` runs the brute-force
cross-check harness instead (problem-specific checks are included when a
problem file is given as well).

Exit codes: 0 when the Aubin property is established (or, in oracle mode,
when all cross-checks agree), 1 when it is not established (or a cross-check
disagrees), 2 on input or usage errors.

Reports are deterministic: identical configurations, including the oracle
seed, produce byte-identical output.  Rational values are serialized as
exact ``a/b`` strings, never as floats.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from .branches import solve_branches
from .cones import PolyCone, critical_cone, tangent_normal
from .exactlin import RatVec, format_rat, parse_rat
from .oracle import OracleReport, run_oracle
from .problem import ProblemError, ProblemSpec, parse_problem, point_data
from .verifier import (
    ROUTE_TOKENS,
    CheckResult,
    Verdict,
    VerdictOptions,
    VerifierError,
    Witness,
    verdict,
)

EXIT_ESTABLISHED = 0
EXIT_NOT_ESTABLISHED = 1
EXIT_ERROR = 2


def _vec_json(v: RatVec) -> list[str]:
    return [format_rat(a) for a in v.entries]


def _witness_json(w: Witness | None) -> dict | None:
    if w is None:
        return None
    payload = {}
    for key, value in w.payload.items():
        if isinstance(value, RatVec):
            payload[key] = _vec_json(value)
        elif isinstance(value, tuple):
            payload[key] = [int(i) for i in value]
        else:
            payload[key] = value
    return {"kind": w.kind, "description": w.description, "payload": payload}


def _check_json(r: CheckResult | None) -> dict | None:
    if r is None:
        return None
    out: dict = {"status": r.status}
    if r.reason:
        out["reason"] = r.reason
    witness = _witness_json(r.witness)
    if witness is not None:
        out["witness"] = witness
    return out


def _cone_json(C: PolyCone) -> dict:
    return {
        "constraints": C.dump().splitlines(),
        "rays": [_vec_json(r) for r in C.rays],
        "lineality": [_vec_json(l) for l in C.lineality],
    }


def verdict_report(v: Verdict, problem_path: str) -> dict:
    """Assemble the full report; both renderers consume this one structure."""
    spec = v.spec
    report: dict = {
        "problem": problem_path,
        "dimensions": {"m": spec.m, "n": spec.n, "s": spec.s},
        "reference": {"p": _vec_json(spec.pbar), "x": _vec_json(spec.xbar)},
        "qtilde_value": _vec_json(v.pd.qtilde_val),
        "assumption_A": _check_json(v.assumption_a),
    }
    if v.fatal:
        report["fatal"] = v.fatal
        report["verdict"] = {"overall": v.overall}
        return report
    assert v.multiplier is not None and v.critical_cone is not None
    report["multiplier"] = _vec_json(v.multiplier)
    report["critical_cone"] = _cone_json(v.critical_cone)
    report["direction_handling"] = v.exactness
    report["existence"] = _check_json(v.existence)
    directions = []
    for h in v.directions:
        points, exhaustive = v.direction_solutions[h.entries]
        ds_points, ds_exhaustive, ds_caveat = v.ds_tables[h.entries]
        directions.append(
            {
                "h": _vec_json(h),
                "solutions": [
                    {"k": _vec_json(k), "eta": _vec_json(eta)} for k, eta in points
                ],
                "solutions_exhaustive": exhaustive,
                "ds": [_vec_json(k) for k in ds_points],
                "ds_caveat": ds_caveat,
            }
        )
    report["directions"] = directions
    report["branches"] = [
        {
            "h": _vec_json(br.h),
            "face_active": [int(i) for i in br.face_active],
            "continuum": br.continuum,
            "solutions": [
                {"k": _vec_json(k), "eta": _vec_json(eta)} for k, eta in br.solutions
            ],
            "conditions": {name: _check_json(res) for name, res in br.conditions.items()},
        }
        for br in v.branch_reports
    ]
    report["nondirectional"] = _check_json(v.nondirectional)
    report["nondirectional_sign_convention"] = (
        "witness membership is taken as (w, -b v) in the graph normal cone "
        "(the standard coderivative orientation)"
    )
    report["routes"] = dict(v.route_status)
    report["verdict"] = {
        "overall": v.overall,
        "route_used": v.route_used,
        "qualification": v.exactness,
    }
    return report


def render_text(report: dict) -> str:
    lines: list[str] = []
    add = lines.append
    add("aubincheck report")
    add(f"problem: {report['problem']}")
    dims = report["dimensions"]
    add(f"dimensions: m={dims['m']} n={dims['n']} s={dims['s']}")
    ref = report["reference"]
    add(f"reference: p = ({', '.join(ref['p'])})  x = ({', '.join(ref['x'])})")
    add(f"qtilde(pbar, xbar) = ({', '.join(report['qtilde_value'])})")
    add("")
    add("[assumption A / nondegeneracy]")
    _render_check(add, report["assumption_A"])
    if "fatal" in report:
        add("")
        add(f"FATAL: {report['fatal']}")
        add("verdict: not-established")
        return "\n".join(lines) + "\n"
    add("")
    add("[base multiplier]")
    add(f"lambda_bar = ({', '.join(report['multiplier'])})")
    add("")
    add("[critical cone]")
    cone = report["critical_cone"]
    for c in cone["constraints"]:
        add(c)
    add("rays: " + (", ".join(f"({', '.join(r)})" for r in cone["rays"]) or "(none)"))
    add(
        "lineality: "
        + (", ".join(f"({', '.join(l)})" for l in cone["lineality"]) or "(none)")
    )
    add("")
    add(f"[existence of directional solutions] ({report['direction_handling']})")
    _render_check(add, report["existence"])
    for entry in report["directions"]:
        add("")
        add(f"[direction h = ({', '.join(entry['h'])})]")
        if entry["solutions"]:
            add("solutions (k; eta):")
            for sol in entry["solutions"]:
                add(f"  k = ({', '.join(sol['k'])})   eta = ({', '.join(sol['eta'])})")
        else:
            add("solutions: none")
        if not entry["solutions_exhaustive"]:
            add("  (positive-dimensional solution set; listed points are representatives)")
        add("DS(h) = { " + "; ".join(f"({', '.join(k)})" for k in entry["ds"]) + " }")
        if entry["ds_caveat"]:
            add(f"  caveat: {entry['ds_caveat']}")
    add("")
    add("[branch conditions]")
    header = "  {:<12} {:<12} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9}".format(
        "h", "face", "thm6_i", "thm6_ii", "thm5", "cor1", "subreg", "eq-impl"
    )
    add(header)
    for br in report["branches"]:
        conds = br["conditions"]

        def st(name: str) -> str:
            return {"holds": "holds", "fails": "FAILS", "indeterminate": "indet",
                    "not-established": "open"}[conds[name]["status"]]

        face = "{" + " ".join(str(i + 1) for i in br["face_active"]) + "}"
        add(
            "  {:<12} {:<12} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9}".format(
                "(" + ", ".join(br["h"]) + ")",
                face,
                st("thm6_i"),
                st("thm6_ii"),
                st("thm5"),
                st("cor1"),
                st("dir_subregularity"),
                st("dir_implication"),
            )
        )
    add("")
    add("[non-directional comparison]")
    _render_check(add, report["nondirectional"])
    add(f"sign convention: {report['nondirectional_sign_convention']}")
    add("")
    add("[routes]")
    for route in ("thm6", "cor1", "thm5"):
        add(f"  {route}: {report['routes'][route]}")
    add("")
    vd = report["verdict"]
    add(f"verdict: Aubin property {vd['overall']}")
    if vd["route_used"]:
        add(f"route used: {vd['route_used']}")
    add(f"qualification: {vd['qualification']}")
    return "\n".join(lines) + "\n"


def _render_check(add, check: dict | None) -> None:
    assert check is not None
    status = check["status"]
    add(f"status: {status}")
    if check.get("reason"):
        add(f"reason: {check['reason']}")
    witness = check.get("witness")
    if witness:
        add(f"witness ({witness['kind']}): {witness['description']}")
        for key, value in witness["payload"].items():
            if isinstance(value, list):
                add(f"  {key} = ({', '.join(str(x) for x in value)})")
            else:
                add(f"  {key} = {value}")


def render_oracle_text(report: OracleReport) -> str:
    lines = [f"aubincheck oracle report (seed = {report.seed})"]
    for c in report.checks:
        verdict_txt = "ok" if c.ok else f"{len(c.disagreements)} DISAGREEMENTS"
        found = f", found {c.found}" if c.found else ""
        lines.append(f"  {c.name}: {c.samples} samples{found}: {verdict_txt}")
        for d in c.disagreements:
            lines.append("    !! " + d.replace("\n", " | "))
    lines.append(f"total disagreements: {report.total_disagreements}")
    return "\n".join(lines) + "\n"


def _parse_direction(text: str, m: int) -> RatVec:
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if len(parts) != m:
        raise ProblemError(f"direction '{text}' has {len(parts)} entries, expected m={m}")
    return RatVec(tuple(parse_rat(p) for p in parts))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aubincheck",
        description=(
            "Exact-arithmetic verifier for the Aubin property of solution maps "
            "of parameterized variational systems with polyhedral constraints, "
            "with graphical-derivative output."
        ),
    )
    parser.add_argument("--problem", help="problem file path")
    parser.add_argument(
        "--direction",
        action="append",
        default=[],
        metavar="CSV",
        help="extra parameter direction as comma-separated rationals (repeatable)",
    )
    parser.add_argument(
        "--route",
        choices=list(ROUTE_TOKENS),
        default="auto",
        help="verification route (default: auto = try thm6, then cor1, then thm5)",
    )
    parser.add_argument(
        "--format", choices=["text", "json"], default="text", help="report format"
    )
    parser.add_argument(
        "--oracle",
        type=int,
        default=None,
        metavar="N",
        help="run the brute-force cross-check harness with sample budget N",
    )
    parser.add_argument("--seed", type=int, default=0, help="oracle RNG seed")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.oracle is not None:
            return _run_oracle_mode(args)
        if not args.problem:
            print("error: --problem is required (or use --oracle N)", file=sys.stderr)
            return EXIT_ERROR
        return _run_verdict_mode(args)
    except (ProblemError, VerifierError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def _load_spec(path: str) -> ProblemSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_problem(fh.read())


def _run_verdict_mode(args) -> int:
    spec = _load_spec(args.problem)
    extra = tuple(_parse_direction(d, spec.m) for d in args.direction)
    options = VerdictOptions(directions=extra, route=args.route)
    v = verdict(spec, options)
    report = verdict_report(v, args.problem)
    if args.format == "json":
        print(json.dumps(report, indent=2))
    else:
        print(render_text(report), end="")
    return EXIT_ESTABLISHED if v.established else EXIT_NOT_ESTABLISHED


def _run_oracle_mode(args) -> int:
    if args.oracle <= 0:
        print("error: --oracle requires a positive sample count", file=sys.stderr)
        return EXIT_ERROR
    spec = pd = K = lam = None
    if args.problem:
        spec = _load_spec(args.problem)
        pd = point_data(spec)
        from .verifier import check_assumption_A, solve_base_multiplier

        if check_assumption_A(pd, spec.D).holds:
            mult = solve_base_multiplier(pd, spec.D, spec.f_value())
            lam = mult.lam
            T, _ = tangent_normal(spec.D, pd.qtilde_val)
            K = critical_cone(T, lam)
        else:
            spec = pd = None
    report = run_oracle(args.oracle, args.seed, spec=spec, pd=pd, K=K, lam=lam)
    if args.format == "json":
        print(json.dumps(report.as_dict(), indent=2))
    else:
        print(render_oracle_text(report), end="")
    return EXIT_ESTABLISHED if report.total_disagreements == 0 else EXIT_NOT_ESTABLISHED


if __name__ == "__main__":
    sys.exit(main())
