"""Text formats: ``.sem`` models, covariance CSV files and result reports.

A model file looks like::

    # instrument
    var Z X Y
    Z -> X
    X -> Y
    X <-> Y

``#`` starts a comment, blank lines are ignored, the single ``var`` line
fixes the causal order and must come before any edge.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import re
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    DiagramError,
    DimensionMismatch,
    MissingVarLine,
    ModelSyntaxError,
    NotSymmetric,
    UnknownLabel,
)
from .expr import to_json, to_text
from .model import CausalDiagram, CovarianceMatrix, build_diagram
from .solver import IDENTIFIED, UNDECIDED, IdentificationResult

log = logging.getLogger(__name__)

EDGE_RE = re.compile(r"^(\S+?)\s*(<->|->)\s*(\S+)$")
SYMMETRY_TOL = 1e-9


@dataclass(frozen=True)
class ModelDocument:
    diagram: CausalDiagram
    source_name: str = "<string>"
    line_map: dict = field(default_factory=dict)  # ("->"|"<->", a, b) -> line number


def parse_model(text: str, source_name: str = "<string>") -> ModelDocument:
    names: list[str] | None = None
    var_line = 0
    directed: list[tuple[str, str]] = []
    bidirected: list[tuple[str, str]] = []
    dir_lines: list[int] = []
    bi_lines: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head = line.split()
        if head[0] == "var":
            if names is not None:
                raise ModelSyntaxError(f"second var line (first on line {var_line})", line=lineno)
            names = head[1:]
            var_line = lineno
            if not names:
                raise ModelSyntaxError("var line lists no variables", line=lineno)
            continue
        m = EDGE_RE.match(line)
        if not m:
            raise ModelSyntaxError(f"cannot parse {line!r}; expected 'A -> B' or 'A <-> B'", line=lineno)
        if names is None:
            raise MissingVarLine("edge before the var line", line=lineno)
        a, arrow, b = m.groups()
        if arrow == "->":
            directed.append((a, b))
            dir_lines.append(lineno)
        else:
            bidirected.append((a, b))
            bi_lines.append(lineno)
    if names is None:
        raise MissingVarLine("no var line")
    edge_lines = dir_lines + bi_lines
    try:
        d = build_diagram(names, directed, bidirected)
    except DiagramError as exc:
        exc.line = edge_lines[exc.item] if exc.item is not None else var_line
        raise
    line_map = {}
    for (a, b), ln in zip(directed, dir_lines):
        line_map[("->", d.index[a], d.index[b])] = ln
    for (a, b), ln in zip(bidirected, bi_lines):
        i, l = sorted((d.index[a], d.index[b]))
        line_map[("<->", i, l)] = ln
    return ModelDocument(d, source_name, line_map)


def serialize_model(d: CausalDiagram) -> str:
    """Canonical text: var line, directed edges, then bidirected edges, sorted."""
    nm = d.variables
    lines = ["var " + " ".join(nm)]
    lines += [f"{nm[k]} -> {nm[j]}" for k, j in sorted(d.directed)]
    lines += [f"{nm[i]} <-> {nm[l]}" for i, l in sorted(d.bidirected)]
    return "\n".join(lines) + "\n"


def covariance_header(text: str) -> list[str]:
    rows = [r for r in csv.reader(io.StringIO(text)) if any(c.strip() for c in r)]
    return [c.strip() for c in rows[0]] if rows else []


def parse_covariance(text: str, expected_labels: Sequence[str]) -> CovarianceMatrix:
    """Read a labelled covariance CSV, reordering columns to ``expected_labels``."""
    rows = [r for r in csv.reader(io.StringIO(text)) if any(c.strip() for c in r)]
    if not rows:
        raise DimensionMismatch("empty covariance file")
    header = [c.strip() for c in rows[0]]
    expected = list(expected_labels)
    n = len(header)
    if n != len(expected):
        raise DimensionMismatch(f"header has {n} labels, model has {len(expected)} variables")
    if len(set(header)) != n or set(header) != set(expected):
        unknown = sorted(set(header) - set(expected)) or sorted(set(expected) - set(header))
        raise UnknownLabel(f"labels do not match the model variables: {unknown}")
    body = rows[1:]
    if len(body) != n or any(len(r) != n for r in body):
        raise DimensionMismatch(f"expected {n} rows of {n} numbers")
    try:
        values = np.array([[float(c) for c in r] for r in body])
    except ValueError as exc:
        raise DimensionMismatch(f"non-numeric entry: {exc}") from None
    scale = max(1.0, float(np.max(np.abs(values))))
    if np.max(np.abs(values - values.T)) > SYMMETRY_TOL * scale:
        raise NotSymmetric("covariance matrix is not symmetric")
    if header != expected:
        log.info("reordering covariance columns %s to model order %s", header, expected)
        perm = [header.index(x) for x in expected]
        values = values[np.ix_(perm, perm)]
    return CovarianceMatrix(tuple(expected), 0.5 * (values + values.T))


def coefficient_label(d: CausalDiagram, j: int, k: int) -> str:
    return f"c_{{{d.name(j)},{d.name(k)}}}"


def render_report(results: Sequence[IdentificationResult], d: CausalDiagram, format: str = "text") -> str:
    """Per-coefficient status lines followed by the constraints, or JSON."""
    if format == "json":
        return json.dumps(report_json(results, d), indent=2, sort_keys=True) + "\n"
    if format != "text":
        raise ValueError(f"unknown format {format!r}")
    if not results:
        return ""
    nm = d.variables
    lines = []
    for r in results:
        for k, f in r.coefficients.items():
            if r.status(k) == IDENTIFIED:
                lines.append(f"IDENTIFIED {coefficient_label(d, r.target, k)} = {to_text(f, nm)}")
            else:
                lines.append(f"UNDECIDED {coefficient_label(d, r.target, k)}")
    lines.append("CONSTRAINTS")
    n_cons = 0
    for r in results:
        for e in r.constraints:
            lines.append(f"  [{nm[r.target]}] {to_text(e, nm)} = 0")
            n_cons += 1
    if not n_cons:
        lines.append("  (none)")
    return "\n".join(lines) + "\n"


def report_json(results: Sequence[IdentificationResult], d: CausalDiagram) -> list[dict]:
    nm = d.variables
    out = []
    for r in results:
        cons = [to_json(e, nm) for e in r.constraints]
        for k, f in r.coefficients.items():
            ident = r.status(k) == IDENTIFIED
            out.append({
                "target": nm[r.target],
                "source": nm[k],
                "status": IDENTIFIED if ident else UNDECIDED,
                "formula": to_json(f, nm) if ident else None,
                "constraints": cons,
            })
    return out
