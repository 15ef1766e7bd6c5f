"""Solving the accessory-set equations and turning solved alphas into
path-coefficient formulas.

The loop repeatedly finds the minimal self-contained subsets (as many
equations as unknowns) of the active system, solves them symbolically,
substitutes the solutions everywhere and drops them.  Equations of the
remaining non-parents never contribute solutions; once all solved alphas are
substituted into them, those left without unknowns become covariance
constraints.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import networkx as nx
import numpy as np

from .equations import Undecided, build_np_system, coefficient_formula
from .errors import DegenerateBlock, IllConditionedExpression
from .expr import ZERO, SymExpr, ZeroTester, atoms, div, mul, sub
from .flow import AccessorySet, find_accessory_set
from .graph import classify
from .model import CausalDiagram

log = logging.getLogger(__name__)

EXHAUSTIVE_LIMIT = 16


@dataclass
class ActiveEquation:
    """``lhs = sum_u terms[u] * alpha_u`` with everything known moved into lhs."""

    name: int
    lhs: SymExpr
    terms: dict[int, SymExpr]

    @property
    def unknowns(self) -> frozenset[int]:
        return frozenset(self.terms)


@dataclass
class SolveState:
    active: list[ActiveEquation] = field(default_factory=list)
    solved: dict[int, SymExpr] = field(default_factory=dict)
    constraints: list[tuple[int, SymExpr]] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


def _substitute(eq: ActiveEquation, solved: Mapping[int, SymExpr]) -> ActiveEquation:
    lhs = eq.lhs
    terms = {}
    for u, coef in sorted(eq.terms.items()):
        if u in solved:
            lhs = sub(lhs, mul(coef, solved[u]))
        else:
            terms[u] = coef
    return ActiveEquation(eq.name, lhs, terms)


# -- block decomposition ------------------------------------------------------

def _minimal_by_enumeration(eqs: Sequence[ActiveEquation]) -> list[list[int]]:
    """Minimal self-contained subsets by checking every subset, smallest first."""
    if len(eqs) > EXHAUSTIVE_LIMIT:
        raise ValueError(f"exhaustive search over {len(eqs)} equations is too large")
    found: list[frozenset[int]] = []
    for size in range(1, len(eqs) + 1):
        for combo in itertools.combinations(eqs, size):
            names = frozenset(e.name for e in combo)
            if any(f <= names for f in found):
                continue
            if len(frozenset().union(*(e.unknowns for e in combo))) == size:
                found.append(names)
    return sorted((sorted(f) for f in found), key=lambda b: b[0])


def decompose_self_contained(state: SolveState) -> list[list[int]]:
    """Minimal self-contained subsets of the active equations, as name lists.

    With a matching that covers every equation, a subset is self-contained
    exactly when it is closed under "contains the unknown matched to"; the
    minimal ones are the sink components of that relation that do not touch
    an unmatched unknown.  Such blocks are pairwise disjoint and independent,
    so they are returned ordered by their first equation.  Systems without an
    equation-covering matching (which the accessory-set equations always
    have) fall back to enumeration.
    """
    eqs = [e for e in state.active if e.terms]
    if not eqs:
        return []
    g = nx.Graph()
    eq_nodes = [("e", e.name) for e in eqs]
    g.add_nodes_from(eq_nodes)
    for e in eqs:
        for u in e.terms:
            g.add_edge(("e", e.name), ("u", u))
    matching = nx.bipartite.hopcroft_karp_matching(g, top_nodes=eq_nodes)
    if any(v not in matching for v in eq_nodes):
        return _minimal_by_enumeration(eqs)
    owner = {matching[("e", e.name)][1]: e.name for e in eqs}
    dg = nx.DiGraph()
    dg.add_nodes_from(e.name for e in eqs)
    touches_free = set()
    for e in eqs:
        for u in e.terms:
            if u in owner:
                if owner[u] != e.name:
                    dg.add_edge(e.name, owner[u])
            else:
                touches_free.add(e.name)
    cond = nx.condensation(dg)
    blocks = []
    for c in cond.nodes:
        if cond.out_degree(c) == 0:
            members = cond.nodes[c]["members"]
            if not members & touches_free:
                blocks.append(sorted(members))
    return sorted(blocks, key=lambda b: b[0])


# -- solving ------------------------------------------------------------------

def _numeric_block(rows: Sequence[ActiveEquation], unknowns: Sequence[int], tester: ZeroTester):
    """Coefficient matrices of the block evaluated on each trial covariance."""
    mats = []
    for t, sigma in enumerate(tester.sigmas):
        m = np.zeros((len(rows), len(unknowns)))
        for r, eq in enumerate(rows):
            for c, u in enumerate(unknowns):
                coef = eq.terms.get(u)
                if coef is None:
                    continue
                val = tester.values(coef)[t]
                if val is None:
                    return None
                m[r, c] = val[0]
        mats.append(m)
    return mats


def _is_singular(mats) -> bool:
    for m in mats:
        s = np.linalg.svd(m, compute_uv=False)
        if s[-1] > 1e-9 * max(1.0, s[0]):
            return False
    return True


def solve_block(block: Sequence[int], state: SolveState, tester: ZeroTester) -> SolveState:
    """Solve one self-contained block by symbolic Gauss-Jordan elimination."""
    by_name = {e.name: e for e in state.active}
    rows = [by_name[n] for n in block]
    unknowns = sorted(frozenset().union(*(e.unknowns for e in rows)))
    if len(unknowns) != len(rows):
        raise ValueError("block is not self-contained")
    mats = _numeric_block(rows, unknowns, tester)
    if mats is None or _is_singular(mats):
        raise DegenerateBlock(f"coefficient matrix of block {list(block)} vanishes on random trials")

    m = len(rows)
    A = [[e.terms.get(u, ZERO) for u in unknowns] for e in rows]
    b = [e.lhs for e in rows]
    for col in range(m):
        pivot = None
        for r in range(col, m):
            if A[r][col] == ZERO:
                continue
            try:
                if not tester.is_zero(A[r][col]):
                    pivot = r
                    break
            except IllConditionedExpression:
                continue
        if pivot is None:
            raise DegenerateBlock(f"no usable pivot for alpha column {unknowns[col]}")
        A[col], A[pivot] = A[pivot], A[col]
        b[col], b[pivot] = b[pivot], b[col]
        p = A[col][col]
        for r in range(m):
            if r == col or A[r][col] == ZERO:
                continue
            f = div(A[r][col], p)
            A[r] = [ZERO if c == col else sub(A[r][c], mul(f, A[col][c])) for c in range(m)]
            b[r] = sub(b[r], mul(f, b[col]))
    solutions = {u: div(b[c], A[c][c]) for c, u in enumerate(unknowns)}

    solved = {**state.solved, **solutions}
    remaining = []
    constraints = list(state.constraints)
    for eq in state.active:
        if eq.name in block:
            continue
        eq = _substitute(eq, solutions)
        if eq.terms:
            remaining.append(eq)
        elif eq.lhs != ZERO:
            constraints.append((eq.name, eq.lhs))
    return SolveState(remaining, solved, constraints, list(state.warnings))


def solve_system(
    d: CausalDiagram, j: int, acc: AccessorySet, tester: ZeroTester | None = None
) -> SolveState:
    """Run identify / solve / substitute on E(Z), then derive constraints."""
    tester = tester or ZeroTester(d)
    system = build_np_system(d, j)
    z = set(acc.Z)
    state = SolveState(
        active=[ActiveEquation(e.name, e.lhs, dict(e.alpha_terms)) for e in system.equations if e.name in z]
    )
    rest = [ActiveEquation(e.name, e.lhs, dict(e.alpha_terms)) for e in system.equations if e.name not in z]
    stuck: set[int] = set()
    while True:
        blocks = [b for b in decompose_self_contained(state) if not set(b) & stuck]
        if not blocks:
            break
        for block in blocks:
            try:
                state = solve_block(block, state, tester)
            except DegenerateBlock as exc:
                log.warning("target %s: %s", d.name(j), exc)
                state.warnings.append(str(exc))
                stuck |= set(block)
    for eq in rest:
        eq = _substitute(eq, state.solved)
        if not eq.terms and eq.lhs != ZERO:
            state.constraints.append((eq.name, eq.lhs))
    return state


IDENTIFIED = "Identified"
UNDECIDED = "UndecidedByCriterion"


@dataclass
class IdentificationResult:
    target: int
    coefficients: dict[int, SymExpr | Undecided]
    alpha_solutions: dict[int, SymExpr]
    constraints: list[SymExpr]
    accessory_set: AccessorySet
    warnings: list[str] = field(default_factory=list)

    def status(self, k: int) -> str:
        return UNDECIDED if isinstance(self.coefficients[k], Undecided) else IDENTIFIED

    def identified(self) -> dict[int, SymExpr]:
        return {k: f for k, f in self.coefficients.items() if not isinstance(f, Undecided)}


def identify(d: CausalDiagram, j: int, tester: ZeroTester | None = None) -> IdentificationResult:
    cls = classify(d, j)
    acc = find_accessory_set(d, j)
    state = solve_system(d, j, acc, tester or ZeroTester(d))
    coefs = {k: coefficient_formula(d, j, k, state.solved) for k in sorted(cls.parents)}
    return IdentificationResult(
        target=j,
        coefficients=coefs,
        alpha_solutions=dict(sorted(state.solved.items())),
        constraints=[e for _, e in state.constraints],
        accessory_set=acc,
        warnings=state.warnings,
    )


def identify_all(d: CausalDiagram, tester: ZeroTester | None = None) -> list[IdentificationResult]:
    """One result per variable that has at least one parent, in causal order."""
    tester = tester or ZeroTester(d)
    return [identify(d, j, tester) for j in range(d.n) if d.parents[j]]


def all_atoms_valid(result: IdentificationResult) -> bool:
    """Every atom in the formulas and constraints is a valid regression coefficient."""
    exprs = list(result.identified().values()) + list(result.constraints)
    return all(a.k not in a.S and a.j not in a.S for e in exprs for a in atoms(e))
