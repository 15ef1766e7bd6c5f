"""Monte-Carlo certification of identification output against ground truth."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import SemError
from ..expr import SymExpr, evaluate, to_text
from ..model import CausalDiagram
from .numeric import oracle_trial

EQUATION_TOL = 1e-8


@dataclass
class ClaimCheck:
    """One checked claim: an identified coefficient or a constraint."""

    kind: str  # "coefficient" | "constraint"
    target: int
    source: int | None
    expr: SymExpr
    max_residual: float = 0.0
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def label(self, d: CausalDiagram) -> str:
        if self.kind == "coefficient":
            return f"c_{{{d.name(self.target)},{d.name(self.source)}}}"
        return f"constraint[{d.name(self.target)}] {to_text(self.expr, d.variables)} = 0"


@dataclass
class CertificationReport:
    trials: int
    seed: int
    tol: float
    claims: list[ClaimCheck]
    equation_residual: float
    trial_errors: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return (
            all(c.passed for c in self.claims)
            and self.equation_residual < EQUATION_TOL
            and not self.trial_errors
        )

    def render(self, d: CausalDiagram) -> str:
        lines = [f"trials={self.trials} seed={self.seed} tol={self.tol:g}",
                 f"max partial-regression-equation residual: {self.equation_residual:.3e}"]
        for c in self.claims:
            lines.append(f"{'PASS' if c.passed else 'FAIL'} {c.label(d)} max_residual={c.max_residual:.3e}")
            lines.extend(f"    {f}" for f in c.failures[:5])
        lines.extend(f"trial error: {e}" for e in self.trial_errors)
        lines.append("VERIFIED" if self.passed else "FAILED")
        return "\n".join(lines)

    def to_json(self, d: CausalDiagram) -> dict:
        return {
            "trials": self.trials,
            "seed": self.seed,
            "tol": self.tol,
            "equation_residual": self.equation_residual,
            "passed": self.passed,
            "claims": [
                {"claim": c.label(d), "kind": c.kind, "status": "pass" if c.passed else "fail",
                 "max_residual": c.max_residual}
                for c in self.claims
            ],
            "trial_errors": self.trial_errors,
        }


def relative_error(estimate: float, truth: float) -> float:
    """|estimate - truth| scaled by max(1, |truth|)."""
    return abs(estimate - truth) / max(1.0, abs(truth))


def certify(d: CausalDiagram, results: Sequence, trials: int = 100, seed: int = 0,
            tol: float = 1e-6) -> CertificationReport:
    """Check every identified formula and constraint on ``trials`` sampled models.

    Each trial draws a standardized parameterization, so the truth for an
    identified ``c_jk`` is the standardized path coefficient.  Errors inside a
    trial are recorded against the claim and do not stop the batch.
    """
    claims: list[ClaimCheck] = []
    for r in results:
        for k, f in r.identified().items():
            claims.append(ClaimCheck("coefficient", r.target, k, f))
        for e in r.constraints:
            claims.append(ClaimCheck("constraint", r.target, None, e))
    eq_res = 0.0
    trial_errors: list[str] = []
    for t in range(trials):
        try:
            tr = oracle_trial(d, seed, t)
            res = tr.equation_residuals()
        except (SemError, np.linalg.LinAlgError) as exc:
            trial_errors.append(f"trial {t}: {exc}")
            continue
        eq_res = max(eq_res, float(np.max(np.abs(res))) if res.size else 0.0)
        C = tr.parameterization.C
        for c in claims:
            try:
                value = evaluate(c.expr, tr.sigma)
            except SemError as exc:
                c.failures.append(f"trial {t}: {type(exc).__name__}: {exc}")
                continue
            if c.kind == "coefficient":
                err = relative_error(value, C[c.target, c.source])
            else:
                err = abs(value)
            c.max_residual = max(c.max_residual, err)
            if not err <= tol:
                c.failures.append(f"trial {t}: residual {err:.3e}")
    return CertificationReport(trials, seed, tol, claims, eq_res, trial_errors)
