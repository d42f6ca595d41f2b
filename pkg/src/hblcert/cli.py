"""Command-line front end.

Commands run the library pipelines on datum/presentation/candidate files and
emit text or JSON reports (DOT for diagram export). Exit status 0 means a
positive verdict (valid, feasible, dominated), 1 a mathematically negative
verdict with the report attached, and 2 malformed input or usage errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from hblcert import builder as builder_mod
from hblcert import formats
from hblcert.data import (
    CandidateLattice,
    check_scaling,
    find_critical,
    find_violation,
    generate_lattice,
)
from hblcert.flowgraph import decompose_flow, project_graph, project_weight, total_mass
from hblcert.oracle import GaussianInput, GridFunction, gaussian_ascent, gaussian_ratio, quadrature_check
from hblcert.presentation import bound_constant, export_dot, verify_presentation


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hblcert",
        description="verify, construct and cross-check graph certificates "
                    "for Holder-Brascamp-Lieb finiteness",
    )
    parser.add_argument("command", choices=[
        "verify", "check-data", "polytope", "build", "bound",
        "decompose-flow", "project", "gaussian", "quadrature", "export-dot",
    ])
    parser.add_argument("--data", help="datum file")
    parser.add_argument("--presentation", help="presentation file")
    parser.add_argument("--candidates", help="candidate subspace file")
    parser.add_argument("--max-lattice", type=int, default=512,
                        help="cap on generated candidate lattices (default 512)")
    parser.add_argument("--tol", type=float, default=1e-9,
                        help="tolerance for floating-point checks (default 1e-9)")
    parser.add_argument("--seed", type=int, default=0,
                        help="seed for all randomized probes (default 0)")
    parser.add_argument("--map-index", type=int, default=0,
                        help="map index for the project command (default 0)")
    parser.add_argument("--out", help="write the report or artifact here instead of stdout")
    parser.add_argument("--format", choices=["text", "json", "dot"], default="text")
    return parser


def _read(path: str | None, what: str) -> str:
    if not path:
        raise formats.ParseError(f"missing required --{what}")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise formats.ParseError(f"cannot read {what} file: {exc}") from None


def _load_datum(args):
    return formats.parse_datum(_read(args.data, "data"))


def _load_presentation(args):
    return formats.parse_presentation(_read(args.presentation, "presentation"))


def _load_candidates(args, datum) -> CandidateLattice:
    if args.candidates:
        subs = formats.parse_candidates(_read(args.candidates, "candidates"), datum.dim)
        return CandidateLattice.from_subspaces(datum.dim, subs)
    return generate_lattice(datum, max_size=args.max_lattice)


def _describe(graph, i: int) -> str:
    return graph.describe_vertex(i)


def _cmd_verify(args) -> tuple[int, dict]:
    datum = _load_datum(args)
    pres = _load_presentation(args)
    report = verify_presentation(datum, pres)
    out = {
        "command": "verify",
        "verdict": "valid" if report.valid else "invalid",
        "problems": list(report.problems),
        "sigma": [str(x) for x in report.sigma],
        "sigma_mass": str(report.sigma_mass),
        "map_masses": [str(c.mass) for c in report.map_checks],
    }
    if report.valid:
        cert = bound_constant(datum, pres)
        out["bound"] = _certificate_dict(cert, pres)
    return (0 if report.valid else 1), out


def _certificate_dict(cert, pres) -> dict:
    return {
        "value": cert.value,
        "exact_one": cert.exact_one,
        "factors": [
            {"map": f.map_index, "edge": list(pres.graph.edges[f.edge]),
             "base": str(f.base), "exponent": str(f.exponent)}
            for f in cert.factors
        ],
    }


def _cmd_check_data(args) -> tuple[int, dict]:
    datum = _load_datum(args)
    candidates = _load_candidates(args, datum)
    holds, lhs, rhs = check_scaling(datum)
    violation = find_violation(datum, candidates)
    criticals = find_critical(datum, candidates)
    out = {
        "command": "check-data",
        "verdict": "feasible" if violation is None else "violation",
        "scaling": {"holds": holds, "lhs": str(lhs), "rhs": str(rhs)},
        "lattice": {"size": len(candidates.subspaces), "closed": candidates.closed},
        "criticals": [
            {"dim": r.subspace.dim,
             "basis": [[str(x) for x in row] for row in r.subspace.basis_rows()]}
            for r in criticals
        ],
    }
    if violation is not None:
        out["violation"] = {
            "dim": violation.subspace.dim,
            "slack": str(violation.slack),
            "classification": violation.classification,
            "basis": [[str(x) for x in row] for row in violation.subspace.basis_rows()],
        }
    return (0 if violation is None else 1), out


def _cmd_polytope(args) -> tuple[int, dict]:
    datum = _load_datum(args)
    candidates = _load_candidates(args, datum)
    poly = builder_mod.polytope_from_candidates(datum, candidates)
    extremes = builder_mod.enumerate_extremes(poly)
    violated = poly.member(datum.exponents)
    out = {
        "command": "polytope",
        "verdict": "feasible" if extremes.points else "infeasible",
        "vertices": [[str(x) for x in p] for p in extremes.points],
        "truncated": extremes.truncated,
        "member": violated is None,
    }
    if violated is not None:
        out["violated_row"] = violated.provenance
    return (0 if extremes.points else 1), out


def _cmd_build(args) -> tuple[int, dict]:
    datum = _load_datum(args)
    candidates = _load_candidates(args, datum)
    trace: list[str] = []
    try:
        pres = builder_mod.build_presentation(
            datum, candidates, max_lattice=args.max_lattice, trace=trace
        )
    except builder_mod.BuildError as exc:
        return 1, {"command": "build", "verdict": "failed", "reason": str(exc),
                   "trace": trace}
    text = formats.serialize_presentation(pres)
    out = {
        "command": "build",
        "verdict": "built",
        "vertices": len(pres.graph.vertices),
        "edges": len(pres.graph.edges),
        "trace": trace,
        "presentation": json.loads(text),
    }
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        out["written"] = args.out
    return 0, out


def _cmd_bound(args) -> tuple[int, dict]:
    datum = _load_datum(args)
    pres = _load_presentation(args)
    report = verify_presentation(datum, pres)
    if not report.valid:
        return 1, {"command": "bound", "verdict": "invalid",
                   "problems": list(report.problems)}
    cert = bound_constant(datum, pres)
    return 0, {"command": "bound", "verdict": "ok",
               "bound": _certificate_dict(cert, pres)}


def _cmd_decompose_flow(args) -> tuple[int, dict]:
    pres = _load_presentation(args)
    decomposition = decompose_flow(pres.graph, pres.theta)
    masses = total_mass(pres.graph, pres.theta)
    out = {
        "command": "decompose-flow",
        "verdict": "ok",
        "masses": [str(x) for x in masses],
        "terms": [
            {"component": t.component, "coefficient": str(t.coefficient),
             "edges": [list(pres.graph.edges[k]) for k in t.edges]}
            for t in decomposition.terms
        ],
    }
    return 0, out


def _cmd_project(args) -> tuple[int, dict]:
    datum = _load_datum(args)
    pres = _load_presentation(args)
    i = args.map_index
    if not (0 <= i < datum.n_maps):
        raise formats.ParseError(f"--map-index {i} out of range for {datum.n_maps} maps")
    projected, edge_map = project_graph(pres.graph, datum.maps[i])
    weight = project_weight(pres.graph, pres.theta, datum.maps[i])
    out = {
        "command": "project",
        "verdict": "ok",
        "map": datum.names[i],
        "vertices": [_describe(projected, k) for k in range(len(projected.vertices))],
        "edges": [
            {"from": a, "to": b, "weight": [str(x) for x in weight.values[k]]}
            for k, (a, b) in enumerate(projected.edges)
        ],
        "edge_map": [None if e is None else e for e in edge_map],
        "masses": [str(x) for x in total_mass(projected, weight)],
    }
    return 0, out


def _cmd_gaussian(args) -> tuple[int, dict]:
    datum = _load_datum(args)
    sup, diverged = gaussian_ascent(datum, iterations=400, seed=args.seed)
    identity_ratio = gaussian_ratio(datum, GaussianInput.identity(datum))
    out = {
        "command": "gaussian",
        "verdict": "diverged" if diverged else "bounded",
        "sup_estimate": sup,
        "identity_ratio": identity_ratio,
        "seed": args.seed,
    }
    return (1 if diverged else 0), out


def _cmd_quadrature(args) -> tuple[int, dict]:
    datum = _load_datum(args)
    pres = _load_presentation(args)
    report = verify_presentation(datum, pres)
    if not report.valid:
        return 1, {"command": "quadrature", "verdict": "invalid",
                   "problems": list(report.problems)}
    cert = bound_constant(datum, pres)
    rng = np.random.default_rng(args.seed)
    trials = []
    worst = 0.0
    for _ in range(8):
        fs = []
        for r in datum.ranks:
            if r == 0:
                raise formats.ParseError("quadrature needs positive-rank maps")
            blocks = rng.uniform(0.0, 1.0, size=(4,) * r)
            values = blocks
            for axis in range(r):
                values = values.repeat(8, axis)
            fs.append(GridFunction(((0.0, 1.0),) * r, values))
        lhs, rhs, ratio = quadrature_check(
            datum, cert.value, fs, box=((0.0, 1.0),) * datum.dim, resolution=32
        )
        trials.append({"lhs": lhs, "rhs": rhs, "ratio": ratio})
        worst = max(worst, ratio)
    dominated = worst <= 1 + args.tol
    out = {
        "command": "quadrature",
        "verdict": "dominated" if dominated else "exceeded",
        "bound_value": cert.value,
        "worst_ratio": worst,
        "trials": trials,
        "seed": args.seed,
    }
    return (0 if dominated else 1), out


def _cmd_export_dot(args) -> tuple[int, dict]:
    datum = _load_datum(args)
    pres = _load_presentation(args)
    dot = export_dot(datum, pres)
    return 0, {"command": "export-dot", "verdict": "ok", "dot": dot}


_COMMANDS = {
    "verify": _cmd_verify,
    "check-data": _cmd_check_data,
    "polytope": _cmd_polytope,
    "build": _cmd_build,
    "bound": _cmd_bound,
    "decompose-flow": _cmd_decompose_flow,
    "project": _cmd_project,
    "gaussian": _cmd_gaussian,
    "quadrature": _cmd_quadrature,
    "export-dot": _cmd_export_dot,
}


def _render_text(report: dict) -> str:
    lines = [f"{report['command']}: {report['verdict']}"]
    for key, value in report.items():
        if key in ("command", "verdict", "dot", "presentation"):
            continue
        if isinstance(value, list) and value and isinstance(value[0], (dict, list)):
            lines.append(f"{key}:")
            for item in value:
                lines.append(f"  {json.dumps(item)}")
        else:
            lines.append(f"{key}: {json.dumps(value)}")
    if "dot" in report:
        lines.append(report["dot"].rstrip("\n"))
    return "\n".join(lines) + "\n"


def run(args: argparse.Namespace) -> tuple[int, str]:
    """Execute one command; returns (exit status, rendered report)."""
    status, report = _COMMANDS[args.command](args)
    if args.format == "json":
        rendered = json.dumps(report, indent=2) + "\n"
    elif args.format == "dot":
        if "dot" not in report:
            raise formats.ParseError("--format dot is only valid for export-dot")
        rendered = report["dot"]
    else:
        rendered = _render_text(report)
    return status, rendered


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.tol <= 0:
        parser.error("--tol must be positive")
    try:
        status, rendered = run(args)
    except formats.ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.out and args.command != "build":
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(rendered)
    else:
        sys.stdout.write(rendered)
    return status


if __name__ == "__main__":
    sys.exit(main())
