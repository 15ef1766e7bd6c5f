"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from . import formats
from .equations import build_equation
from .errors import SemError
from .expr import ZeroTester, evaluate, to_json, to_text
from .flow import build_flow_network, find_accessory_set
from .oracle.certify import certify
from .solver import identify, identify_all

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _load(path: str) -> formats.ModelDocument:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None
    return formats.parse_model(text, source_name=path)


def _target(doc: formats.ModelDocument, name: str | None) -> int | None:
    if name is None:
        return None
    try:
        return doc.diagram.index[name]
    except KeyError:
        raise UsageError(f"unknown target variable {name!r}") from None


def _require_target(doc, name) -> int:
    j = _target(doc, name)
    if j is None:
        raise UsageError("--target is required for this command")
    return j


def cmd_identify(args) -> tuple[str, int]:
    doc = _load(args.model)
    d = doc.diagram
    j = _target(doc, args.target)
    tester = ZeroTester(d, seed=args.seed)
    results = identify_all(d, tester) if j is None else [identify(d, j, tester)]
    return formats.render_report(results, d, args.format), EXIT_OK


def cmd_equations(args) -> tuple[str, int]:
    doc = _load(args.model)
    d = doc.diagram
    j = _require_target(doc, args.target)
    eqs = [build_equation(d, j, k) for k in range(j)]
    if args.format == "json":
        nm = d.variables
        data = [{
            "name": nm[e.name],
            "lhs": to_json(e.lhs, nm),
            "c_term": e.c_term,
            "alpha_terms": {nm[i]: to_json(c, nm) for i, c in sorted(e.alpha_terms.items())},
        } for e in eqs]
        return json.dumps(data, indent=2, sort_keys=True) + "\n", EXIT_OK
    return "".join(e.render(d) + "\n" for e in eqs), EXIT_OK


def cmd_accessory(args) -> tuple[str, int]:
    doc = _load(args.model)
    d = doc.diagram
    nm = d.variables
    j = _require_target(doc, args.target)
    acc = find_accessory_set(d, j)
    if args.format == "json":
        data = {
            "target": nm[j],
            "Z": [nm[z] for z in acc.Z],
            "X": [nm[x] for x in acc.X],
            "paths": [p.render(nm) for p in acc.paths],
        }
        if args.dump_flow:
            data["network"] = build_flow_network(d, j).dump(nm).splitlines()
        return json.dumps(data, indent=2, sort_keys=True) + "\n", EXIT_OK
    if acc.size == 0:
        lines = ["accessory set is empty"]
    else:
        lines = [
            "Z = {" + ", ".join(nm[z] for z in acc.Z) + "}",
            "X = {" + ", ".join(nm[x] for x in acc.X) + "}",
        ]
        lines += [f"p{i}: {p.render(nm)}" for i, p in enumerate(acc.paths, start=1)]
    if args.dump_flow:
        lines.append("flow network:")
        lines.append(build_flow_network(d, j).dump(nm))
    return "\n".join(lines) + "\n", EXIT_OK


def cmd_verify(args) -> tuple[str, int]:
    doc = _load(args.model)
    d = doc.diagram
    results = identify_all(d, ZeroTester(d, seed=args.seed))
    report = certify(d, results, trials=args.trials, seed=args.seed, tol=args.tol)
    code = EXIT_OK if report.passed else EXIT_FAIL
    if args.format == "json":
        return json.dumps(report.to_json(d), indent=2, sort_keys=True) + "\n", code
    return report.render(d) + "\n", code


def cmd_eval(args) -> tuple[str, int]:
    doc = _load(args.model)
    d = doc.diagram
    nm = d.variables
    try:
        cov_text = Path(args.cov).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {args.cov}: {exc.strerror or exc}") from None
    sigma = formats.parse_covariance(cov_text, nm)
    header = formats.covariance_header(cov_text)
    results = identify_all(d, ZeroTester(d, seed=args.seed))
    lines = []
    if header != list(nm):
        lines.append(f"# covariance columns reordered from {','.join(header)} to {','.join(nm)}")
    estimates, constraints = [], []
    for r in results:
        for k, f in r.identified().items():
            label = formats.coefficient_label(d, r.target, k)
            try:
                v = evaluate(f, sigma)
                estimates.append({"coefficient": label, "value": v})
                lines.append(f"{label} = {v:.10g}")
            except SemError as exc:
                estimates.append({"coefficient": label, "error": f"{type(exc).__name__}: {exc}"})
                lines.append(f"{label}: {type(exc).__name__}: {exc}")
        for e in r.constraints:
            text = to_text(e, nm)
            try:
                v = evaluate(e, sigma)
                ok = abs(v) <= args.tol
                constraints.append({"constraint": text, "value": v, "status": "pass" if ok else "fail"})
                lines.append(f"constraint [{nm[r.target]}] {text} = {v:.3e} {'PASS' if ok else 'FAIL'}")
            except SemError as exc:
                constraints.append({"constraint": text, "error": f"{type(exc).__name__}: {exc}"})
                lines.append(f"constraint [{nm[r.target]}] {text}: {type(exc).__name__}: {exc}")
    if args.format == "json":
        data = {"estimates": estimates, "constraints": constraints, "reordered": header != list(nm)}
        return json.dumps(data, indent=2, sort_keys=True) + "\n", EXIT_OK
    return "\n".join(lines) + ("\n" if lines else ""), EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pregid",
        description="Identify path coefficients of recursive linear SEMs with accessory sets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, target_required=False):
        p.add_argument("model", help="model file in .sem format")
        p.add_argument("--target", required=target_required, help="target variable name")
        p.add_argument("--format", choices=("text", "json"), default="text")
        p.add_argument("-o", "--output", help="write output to this file instead of stdout")
        p.add_argument("--seed", type=int, default=0, help="seed for randomized numeric tests")

    p = sub.add_parser("identify", help="report identified coefficients and constraints")
    common(p)
    p.set_defaults(func=cmd_identify)

    p = sub.add_parser("equations", help="print the partial regression equations of a target")
    common(p, target_required=True)
    p.set_defaults(func=cmd_equations)

    p = sub.add_parser("accessory", help="print a maximum accessory set for a target")
    common(p, target_required=True)
    p.add_argument("--dump-flow", action="store_true", help="also print the flow network arcs")
    p.set_defaults(func=cmd_accessory)

    p = sub.add_parser("verify", help="certify all claims on random parameterizations")
    common(p)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("eval", help="evaluate formulas on a covariance CSV")
    common(p)
    p.add_argument("--cov", required=True, help="covariance CSV with a header of variable names")
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        out, code = args.func(args)
    except (UsageError, SemError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.output:
        Path(args.output).write_text(out)
    else:
        sys.stdout.write(out)
    return code


if __name__ == "__main__":
    sys.exit(main())
