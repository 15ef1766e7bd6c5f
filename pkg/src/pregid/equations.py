"""Partial regression equations for one target variable.

Equation (V_k) for target V_j reads::

    beta_{jk.S_jk} = [c_jk] + alpha_jk - sum_{k<l<j} beta_{lk.S_lk} alpha_jl

Terms whose alpha vanishes structurally, or whose beta coefficient has no
active path behind it, are left out.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .errors import IndexOutOfRange, NotAParent
from .expr import ONE, ZERO, Beta, Neg, SymExpr, add, mul, neg, sub, to_text
from .graph import alpha_nonzero, beta_structurally_nonzero, classify, s_set
from .model import CausalDiagram


def s_beta(j: int, k: int) -> Beta:
    """The atom beta_{jk.S_jk}."""
    return Beta(j, k, tuple(s_set(j, k)))


@dataclass(frozen=True)
class PregEquation:
    """``lhs = [c_jk] + sum_i alpha_terms[i] * alpha_ji``."""

    target: int
    name: int
    lhs: SymExpr
    c_term: bool
    alpha_terms: Mapping[int, SymExpr] = field(default_factory=dict)

    @property
    def unknowns(self) -> frozenset[int]:
        return frozenset(self.alpha_terms)

    def render(self, d: CausalDiagram) -> str:
        names = d.variables
        j, k = self.target, self.name
        parts = []
        if self.c_term:
            parts.append(f"c_{{{names[j]},{names[k]}}}")
        for i in sorted(self.alpha_terms):
            coef = self.alpha_terms[i]
            a = f"alpha_{{{names[j]},{names[i]}}}"
            if coef == ONE:
                term = a
            elif isinstance(coef, Neg):
                term = f"- {to_text(coef.arg, names)} * {a}"
            else:
                term = f"({to_text(coef, names)}) * {a}"
            parts.append(term)
        rhs = " + ".join(parts).replace("+ -", "-") if parts else "0"
        if rhs.startswith("- "):
            rhs = "-" + rhs[2:]
        return f"({names[k]}): {to_text(self.lhs, names)} = {rhs}"


@dataclass(frozen=True)
class EquationSystem:
    target: int
    equations: tuple[PregEquation, ...]

    @property
    def unknowns(self) -> frozenset[int]:
        out: set[int] = set()
        for eq in self.equations:
            out |= eq.unknowns
        return frozenset(out)


def build_equation(d: CausalDiagram, j: int, k: int) -> PregEquation:
    if not 0 <= k < j < d.n:
        raise IndexOutOfRange(f"need 0 <= k < j < n, got j={j}, k={k}")
    terms: dict[int, SymExpr] = {}
    if alpha_nonzero(d, j, k):
        terms[k] = ONE
    for i in range(k + 1, j):
        if alpha_nonzero(d, j, i) and beta_structurally_nonzero(d, i, k):
            terms[i] = neg(s_beta(i, k))
    return PregEquation(j, k, s_beta(j, k), d.has_directed(k, j), terms)


def build_np_system(d: CausalDiagram, j: int) -> EquationSystem:
    """Equations (V_k) for every non-parent V_k of V_j, c-terms absent.

    A structurally zero left-hand side becomes ``Const(0)``; such an equation
    is dropped when it also has no unknowns (it reads 0 = 0).
    """
    if not 0 <= j < d.n:
        raise IndexOutOfRange(f"target {j} outside 0..{d.n - 1}")
    eqs = []
    for k in sorted(classify(d, j).non_parents):
        eq = build_equation(d, j, k)
        if not beta_structurally_nonzero(d, j, k):
            if not eq.alpha_terms:
                continue
            eq = PregEquation(j, k, ZERO, False, eq.alpha_terms)
        eqs.append(eq)
    return EquationSystem(j, tuple(eqs))


class Undecided:
    """Marker: the coefficient needs an alpha that was not solved."""

    __slots__ = ("missing",)

    def __init__(self, missing: frozenset[int]):
        self.missing = missing

    def __repr__(self):
        return f"Undecided(missing={sorted(self.missing)})"

    def __eq__(self, other):
        return isinstance(other, Undecided) and other.missing == self.missing

    def __hash__(self):
        return hash(("Undecided", self.missing))


def coefficient_formula(
    d: CausalDiagram, j: int, k: int, alpha_solutions: Mapping[int, SymExpr]
) -> SymExpr | Undecided:
    """c_jk = beta_{jk.S_jk} - alpha_jk + sum_{k<l<j} beta_{lk.S_lk} alpha_jl."""
    if not d.has_directed(k, j):
        raise NotAParent(f"{d.name(k)} is not a parent of {d.name(j)}")
    needed: list[tuple[int, SymExpr | None]] = []  # (alpha index, beta multiplier)
    if alpha_nonzero(d, j, k):
        needed.append((k, None))
    for l in range(k + 1, j):
        if alpha_nonzero(d, j, l) and beta_structurally_nonzero(d, l, k):
            needed.append((l, s_beta(l, k)))
    missing = frozenset(i for i, _ in needed if i not in alpha_solutions)
    if missing:
        return Undecided(missing)
    out: SymExpr = s_beta(j, k)
    for i, m in needed:
        sol = alpha_solutions[i]
        if m is None:
            out = sub(out, sol)
        else:
            out = add(out, mul(m, sol))
    return out
