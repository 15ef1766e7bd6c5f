"""Graphical predicates over a causal diagram.

Everything here looks at structure only: which orthogonalization
coefficients vanish, which partial regression coefficients vanish, and how
the predecessors of a target split into parents, non-parents and the
variables with a live alpha.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable

from .errors import EndpointInConditioningSet, IndexOutOfRange
from .model import CausalDiagram

TAIL, HEAD = 0, 1


def _check(d: CausalDiagram, *idx: int) -> None:
    for i in idx:
        if not 0 <= i < d.n:
            raise IndexOutOfRange(f"variable index {i} outside 0..{d.n - 1}")


def s_set(j: int, k: int, n: int | None = None) -> frozenset[int]:
    """Conditioning set {0, ..., j-1} minus {k} for the pair (j, k)."""
    if not 0 <= k < j or (n is not None and j >= n):
        raise IndexOutOfRange(f"need 0 <= k < j{' < n' if n is not None else ''}, got j={j}, k={k}")
    return frozenset(i for i in range(j) if i != k)


def alpha_nonzero(d: CausalDiagram, j: int, k: int) -> bool:
    """True when alpha_jk is not identically zero.

    That is the case iff V_k and V_j are joined by a bidirected path whose
    intermediate nodes all precede V_k.
    """
    _check(d, j, k)
    if not k < j:
        raise IndexOutOfRange(f"alpha_nonzero needs k < j, got j={j}, k={k}")
    sib = d.siblings
    seen = {k}
    queue = deque([k])
    while queue:
        v = queue.popleft()
        if j in sib[v]:
            return True
        for w in sib[v]:
            if w < k and w not in seen:
                seen.add(w)
                queue.append(w)
    return False


def ancestors(d: CausalDiagram, nodes: Iterable[int]) -> frozenset[int]:
    """The given nodes together with everything that has a directed path into them."""
    out = set(nodes)
    stack = list(out)
    while stack:
        v = stack.pop()
        for p in d.parents[v]:
            if p not in out:
                out.add(p)
                stack.append(p)
    return frozenset(out)


def _incidences(d: CausalDiagram, v: int):
    """(neighbour, mark at v, mark at neighbour) for every edge at v."""
    for c in d.children[v]:
        yield c, TAIL, HEAD
    for p in d.parents[v]:
        yield p, HEAD, TAIL
    for s in d.siblings[v]:
        yield s, HEAD, HEAD


def exists_active_path(d: CausalDiagram, a: int, b: int, Z: Iterable[int]) -> bool:
    """Is there a path between a and b that is active given Z?

    Reachability over (node, mark of the arriving edge) states.  A node
    entered and left through arrowheads is a collider and must lie in Z or
    be an ancestor of Z; any other intermediate node must stay outside Z.
    """
    Z = frozenset(Z)
    _check(d, a, b, *Z)
    if a == b:
        raise IndexOutOfRange("endpoints must differ")
    if a in Z or b in Z:
        raise EndpointInConditioningSet(f"endpoint in conditioning set {sorted(Z)}")
    anc = ancestors(d, Z)
    seen: set[tuple[int, int]] = set()
    queue: deque[tuple[int, int]] = deque()
    for w, _, mark_w in _incidences(d, a):
        if (w, mark_w) not in seen:
            seen.add((w, mark_w))
            queue.append((w, mark_w))
    while queue:
        v, arrived = queue.popleft()
        if v == b:
            return True
        for w, mark_v, mark_w in _incidences(d, v):
            if arrived == HEAD and mark_v == HEAD:
                if v not in anc:
                    continue
            elif v in Z:
                continue
            if (w, mark_w) not in seen:
                seen.add((w, mark_w))
                queue.append((w, mark_w))
    return False


def beta_structurally_nonzero(d: CausalDiagram, j: int, k: int) -> bool:
    """Generic non-vanishing of beta_{jk.S_jk}: an active path given S_jk exists."""
    _check(d, j, k)
    return exists_active_path(d, j, k, s_set(j, k))


@dataclass(frozen=True)
class VariableClassification:
    target: int
    parents: frozenset[int]
    non_parents: frozenset[int]
    alpha_live: frozenset[int]


def classify(d: CausalDiagram, j: int) -> VariableClassification:
    """Split the predecessors of V_j into Pa_j, NP_j and (overlapping) Ne_j."""
    _check(d, j)
    before = frozenset(range(j))
    pa = d.parents[j]
    return VariableClassification(
        target=j,
        parents=pa,
        non_parents=before - pa,
        alpha_live=frozenset(k for k in range(j) if alpha_nonzero(d, j, k)),
    )
