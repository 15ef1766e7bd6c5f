"""Causal diagrams, parameterizations and covariance matrices.

Variables are addressed by their 0-based position in the declared order.
Position encodes the causal order: a directed edge always runs from a lower
index to a higher one.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DuplicateEdge,
    DuplicateVariable,
    InvalidName,
    NotPositiveDefinite,
    OrderViolation,
    ParameterizationError,
    SelfLoop,
    SupportMismatch,
    UnknownVariable,
)

NAME_RE = re.compile(r"[A-Za-z0-9_.]+\Z")

Edge = tuple[int, int]


@dataclass(frozen=True)
class CausalDiagram:
    """Ordered variables with directed and bidirected edges.

    ``directed`` holds ``(k, j)`` pairs meaning ``V_k -> V_j`` with ``k < j``.
    ``bidirected`` holds ``(i, l)`` pairs with ``i < l``.
    """

    variables: tuple[str, ...]
    directed: frozenset[Edge] = frozenset()
    bidirected: frozenset[Edge] = frozenset()

    @property
    def n(self) -> int:
        return len(self.variables)

    @cached_property
    def index(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.variables)}

    @cached_property
    def parents(self) -> tuple[frozenset[int], ...]:
        pa: list[set[int]] = [set() for _ in range(self.n)]
        for k, j in self.directed:
            pa[j].add(k)
        return tuple(frozenset(p) for p in pa)

    @cached_property
    def children(self) -> tuple[frozenset[int], ...]:
        ch: list[set[int]] = [set() for _ in range(self.n)]
        for k, j in self.directed:
            ch[k].add(j)
        return tuple(frozenset(c) for c in ch)

    @cached_property
    def siblings(self) -> tuple[frozenset[int], ...]:
        """Bidirected neighbours of each variable."""
        sib: list[set[int]] = [set() for _ in range(self.n)]
        for i, l in self.bidirected:
            sib[i].add(l)
            sib[l].add(i)
        return tuple(frozenset(s) for s in sib)

    def name(self, i: int) -> str:
        return self.variables[i]

    def has_directed(self, k: int, j: int) -> bool:
        return (k, j) in self.directed

    def has_bidirected(self, i: int, l: int) -> bool:
        return (min(i, l), max(i, l)) in self.bidirected

    def __repr__(self) -> str:
        dir_s = ", ".join(f"{self.variables[k]}->{self.variables[j]}" for k, j in sorted(self.directed))
        bi_s = ", ".join(f"{self.variables[i]}<->{self.variables[l]}" for i, l in sorted(self.bidirected))
        return f"CausalDiagram([{' '.join(self.variables)}]; {dir_s}; {bi_s})"


def build_diagram(
    names: Sequence[str],
    directed: Iterable[tuple[str, str]] = (),
    bidirected: Iterable[tuple[str, str]] = (),
) -> CausalDiagram:
    """Validate names and edges and return a :class:`CausalDiagram`.

    Edge errors carry ``item``, the position of the edge in the concatenated
    ``directed + bidirected`` lists, so callers can map them back to input.
    """
    names = tuple(names)
    index: dict[str, int] = {}
    for pos, nm in enumerate(names):
        if not isinstance(nm, str) or not NAME_RE.match(nm):
            raise InvalidName(f"invalid variable name {nm!r}")
        if nm in index:
            raise DuplicateVariable(f"variable {nm!r} declared twice")
        index[nm] = pos

    def lookup(nm: str, item: int) -> int:
        try:
            return index[nm]
        except (KeyError, TypeError):
            raise UnknownVariable(f"unknown variable {nm!r}", item=item) from None

    dir_set: set[Edge] = set()
    item = 0
    for a, b in directed:
        k, j = lookup(a, item), lookup(b, item)
        if k == j:
            raise SelfLoop(f"self-loop {a} -> {b}", item=item)
        if k > j:
            raise OrderViolation(f"edge {a} -> {b} points from a later to an earlier variable", item=item)
        if (k, j) in dir_set:
            raise DuplicateEdge(f"duplicate edge {a} -> {b}", item=item)
        dir_set.add((k, j))
        item += 1

    bi_set: set[Edge] = set()
    for a, b in bidirected:
        i, l = lookup(a, item), lookup(b, item)
        if i == l:
            raise SelfLoop(f"self-loop {a} <-> {b}", item=item)
        e = (min(i, l), max(i, l))
        if e in bi_set:
            raise DuplicateEdge(f"duplicate edge {a} <-> {b}", item=item)
        bi_set.add(e)
        item += 1

    return CausalDiagram(names, frozenset(dir_set), frozenset(bi_set))


@dataclass(frozen=True)
class Parameterization:
    """Path coefficients ``C[j, k] = c_jk`` and error covariances ``Psi``."""

    diagram: CausalDiagram
    C: np.ndarray
    Psi: np.ndarray

    def __post_init__(self):
        for arr in (self.C, self.Psi):
            arr.setflags(write=False)


@dataclass(frozen=True)
class CovarianceMatrix:
    labels: tuple[str, ...]
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.values.setflags(write=False)

    @property
    def n(self) -> int:
        return len(self.labels)


def is_positive_definite(a: np.ndarray) -> bool:
    try:
        np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        return False
    return True


def validate_parameterization(p: Parameterization) -> list[ParameterizationError]:
    """Return every support or definiteness violation; an empty list means ok."""
    d = p.diagram
    n = d.n
    if p.C.shape != (n, n) or p.Psi.shape != (n, n):
        return [ParameterizationError(f"matrices must be {n}x{n}")]
    problems: list[ParameterizationError] = []
    for j in range(n):
        for k in range(n):
            nonzero = p.C[j, k] != 0.0
            if nonzero != d.has_directed(k, j):
                what = "nonzero" if nonzero else "zero"
                problems.append(SupportMismatch(
                    f"C[{d.name(j)},{d.name(k)}] is {what} but edge {d.name(k)} -> {d.name(j)} is "
                    f"{'absent' if nonzero else 'present'}"))
    for i in range(n):
        for l in range(i + 1, n):
            if p.Psi[i, l] != p.Psi[l, i]:
                problems.append(SupportMismatch(f"Psi not symmetric at ({d.name(i)},{d.name(l)})"))
            nonzero = p.Psi[i, l] != 0.0
            if nonzero != d.has_bidirected(i, l):
                what = "nonzero" if nonzero else "zero"
                problems.append(SupportMismatch(
                    f"Psi[{d.name(i)},{d.name(l)}] is {what} but edge {d.name(i)} <-> {d.name(l)} is "
                    f"{'absent' if nonzero else 'present'}"))
    if not is_positive_definite(0.5 * (p.Psi + p.Psi.T)):
        problems.append(NotPositiveDefinite("Psi is not positive definite"))
    return problems
