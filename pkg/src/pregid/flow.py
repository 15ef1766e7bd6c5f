"""Maximum accessory sets via unit-capacity maximum flow.

For a target V_j the network has a minus node and a plus node for every
predecessor V_i.  ``V_i- -> V_i+`` stands for the variable itself,
``V_a- -> V_b+`` for a directed edge ``V_a -> V_b`` and ``V_a+ -> V_b+`` for a
bidirected edge.  The source feeds the minus nodes of non-parents, the plus
nodes of variables with a live alpha drain into the sink.  With unit arc and
node capacities a maximum flow decomposes into disjoint paths, each of which
reads back as a collider path in the causal diagram.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Sequence

from .errors import Def2ViolationInternal, IndexOutOfRange, MalformedPath
from .graph import classify
from .model import CausalDiagram

Node = tuple  # ("s",), ("t",), ("-", i) or ("+", i)
SOURCE: Node = ("s",)
SINK: Node = ("t",)

FWD, BACK, BI = "->", "<-", "<->"


def minus(i: int) -> Node:
    return ("-", i)


def plus(i: int) -> Node:
    return ("+", i)


def node_key(v: Node) -> tuple:
    if v == SOURCE:
        return (-1, 0)
    if v == SINK:
        return (float("inf"), 0)
    return (v[1], 0 if v[0] == "-" else 1)


def node_label(v: Node, names: Sequence[str]) -> str:
    if v in (SOURCE, SINK):
        return v[0]
    return f"{names[v[1]]}{v[0]}"


@dataclass(frozen=True)
class Arc:
    u: Node
    v: Node
    meaning: tuple  # ("node", a) | ("directed", a, b) | ("bidirected", a, b) | ("source", a) | ("sink", a)


@dataclass(frozen=True)
class FlowNetwork:
    target: int
    nodes: tuple[Node, ...]
    arcs: tuple[Arc, ...]

    def dump(self, names: Sequence[str]) -> str:
        """Deterministic arc listing, one ``u -> v cap=1 [meaning]`` per line."""
        lines = []
        for a in self.arcs:
            kind, *ends = a.meaning
            if kind == "directed":
                what = f"edge {names[ends[0]]} -> {names[ends[1]]}"
            elif kind == "bidirected":
                what = f"edge {names[ends[0]]} <-> {names[ends[1]]}"
            else:
                what = f"{kind} {names[ends[0]]}"
            lines.append(f"{node_label(a.u, names)} -> {node_label(a.v, names)} cap=1 [{what}]")
        return "\n".join(lines)


def build_flow_network(d: CausalDiagram, j: int) -> FlowNetwork:
    if not 0 <= j < d.n:
        raise IndexOutOfRange(f"target {j} outside 0..{d.n - 1}")
    cls = classify(d, j)
    arcs: list[Arc] = []
    for i in range(j):
        arcs.append(Arc(minus(i), plus(i), ("node", i)))
    for a, b in d.directed:
        if b < j:
            arcs.append(Arc(minus(a), plus(b), ("directed", a, b)))
    for a, b in d.bidirected:
        if b < j:
            arcs.append(Arc(plus(a), plus(b), ("bidirected", a, b)))
            arcs.append(Arc(plus(b), plus(a), ("bidirected", b, a)))
    for i in sorted(cls.alpha_live):
        arcs.append(Arc(plus(i), SINK, ("sink", i)))
    for i in sorted(cls.non_parents):
        arcs.append(Arc(SOURCE, minus(i), ("source", i)))
    arcs.sort(key=lambda a: (node_key(a.u), node_key(a.v)))
    nodes = [SOURCE] + [x for i in range(j) for x in (minus(i), plus(i))] + [SINK]
    return FlowNetwork(j, tuple(nodes), tuple(arcs))


def max_flow(net: FlowNetwork) -> list[tuple[Node, ...]]:
    """Maximum s-t flow under unit arc and node capacities, as disjoint paths.

    Shortest augmenting paths (breadth-first), scanning neighbours in
    ascending variable order; every network node except s and t is split into
    an (in, out) pair joined by a unit arc.
    """
    def inn(v):
        return v if v in (SOURCE, SINK) else (v, "in")

    def out(v):
        return v if v in (SOURCE, SINK) else (v, "out")

    def key(x):
        if x in (SOURCE, SINK):
            return node_key(x)
        return node_key(x[0]) + (0 if x[1] == "in" else 1,)

    cap: dict = {}
    adj: dict = {}

    def add_arc(u, v):
        cap[(u, v)] = cap.get((u, v), 0) + 1
        cap.setdefault((v, u), 0)
        adj.setdefault(u, set()).add(v)
        adj.setdefault(v, set()).add(u)

    for v in net.nodes:
        if v not in (SOURCE, SINK):
            add_arc(inn(v), out(v))
    for a in net.arcs:
        add_arc(out(a.u), inn(a.v))
    order = {u: sorted(vs, key=key) for u, vs in adj.items()}

    flow_value = 0
    while SOURCE in order:
        parent = {SOURCE: None}
        queue = deque([SOURCE])
        while queue and SINK not in parent:
            u = queue.popleft()
            for w in order[u]:
                if w not in parent and cap[(u, w)] > 0:
                    parent[w] = u
                    queue.append(w)
        if SINK not in parent:
            break
        w = SINK
        while parent[w] is not None:
            u = parent[w]
            cap[(u, w)] -= 1
            cap[(w, u)] += 1
            w = u
        flow_value += 1

    # an original arc u->v carries flow iff its reverse residual is positive
    carried = {(a.u, a.v) for a in net.arcs if cap[(inn(a.v), out(a.u))] > 0}
    succ: dict = {}
    for u, v in sorted(carried, key=lambda e: (node_key(e[0]), node_key(e[1]))):
        succ.setdefault(u, []).append(v)
    paths = []
    for first in list(succ.get(SOURCE, [])):
        path = [SOURCE, first]
        while path[-1] != SINK:
            nxt = succ[path[-1]]
            path.append(nxt.pop(0))
        paths.append(tuple(path))
    assert len(paths) == flow_value
    return paths


@dataclass(frozen=True)
class DiagramPath:
    """A path in the causal diagram; ``edges[i]`` joins ``nodes[i]`` and ``nodes[i+1]``.

    Edge marks: ``"->"`` (towards the later path position), ``"<-"`` or ``"<->"``.
    """

    nodes: tuple[int, ...]
    edges: tuple[str, ...] = ()

    @property
    def start(self) -> int:
        return self.nodes[0]

    @property
    def end(self) -> int:
        return self.nodes[-1]

    @property
    def degenerate(self) -> bool:
        return len(self.nodes) == 1

    def prefix(self, upto: int) -> "DiagramPath":
        """Subpath from the start through position ``upto``."""
        return DiagramPath(self.nodes[: upto + 1], self.edges[:upto])

    def render(self, names: Sequence[str]) -> str:
        out = names[self.nodes[0]]
        for e, v in zip(self.edges, self.nodes[1:]):
            out += f" {e} {names[v]}"
        return out


def interpret_paths(net: FlowNetwork, network_paths: Sequence[Sequence[Node]]) -> list[DiagramPath]:
    """Read each network path back as a causal-diagram path."""
    meanings = {(a.u, a.v): a.meaning for a in net.arcs}
    result = []
    for q in network_paths:
        if len(q) < 4 or q[0] != SOURCE or q[-1] != SINK or q[1][0] != "-":
            raise MalformedPath(f"not a source-to-sink path through a minus node: {q}")
        nodes = [q[1][1]]
        edges: list[str] = []
        for u, v in zip(q[1:-2], q[2:-1]):
            m = meanings.get((u, v))
            if m is None:
                raise MalformedPath(f"arc {u} -> {v} is not in the network")
            kind = m[0]
            if kind == "node":
                continue
            if kind == "directed":
                edges.append(FWD)
            elif kind == "bidirected":
                edges.append(BI)
            else:
                raise MalformedPath(f"unexpected {kind} arc inside a path")
            nodes.append(v[1])
        # the source variable can come back through its plus node; shortcut the loop
        z = nodes[0]
        if z in nodes[1:]:
            pos = len(nodes) - 1 - nodes[::-1].index(z)
            nodes = nodes[pos:]
            edges = edges[pos:]
        if len(set(nodes)) != len(nodes):
            raise MalformedPath(f"path revisits a variable: {nodes}")
        result.append(DiagramPath(tuple(nodes), tuple(edges)))
    return result


@dataclass(frozen=True)
class AccessorySet:
    target: int
    Z: tuple[int, ...]
    X: tuple[int, ...]
    paths: tuple[DiagramPath, ...]

    @property
    def size(self) -> int:
        return len(self.Z)


def fixup_and_assemble(d: CausalDiagram, j: int, paths: Sequence[DiagramPath]) -> AccessorySet:
    """Move each path's end to its latest-ordered variable and assemble the set."""
    live = classify(d, j).alpha_live
    fixed = []
    for p in paths:
        last = max(range(len(p.nodes)), key=lambda i: p.nodes[i])
        fixed.append(p.prefix(last))
    ends = [p.end for p in fixed]
    for p, orig in zip(fixed, paths):
        if p.end not in live:
            raise Def2ViolationInternal(f"moved endpoint {d.name(p.end)} has no live alpha")
    if len(set(ends)) != len(ends):
        raise Def2ViolationInternal(f"moved endpoints collide: {[d.name(e) for e in ends]}")
    fixed.sort(key=lambda p: p.start)
    acc = AccessorySet(j, tuple(p.start for p in fixed), tuple(p.end for p in fixed), tuple(fixed))
    problems = accessory_set_problems(d, acc)
    if problems:
        raise Def2ViolationInternal("; ".join(problems))
    return acc


def find_accessory_set(d: CausalDiagram, j: int) -> AccessorySet:
    net = build_flow_network(d, j)
    return fixup_and_assemble(d, j, interpret_paths(net, max_flow(net)))


# -- validation ---------------------------------------------------------------

def _marks(edge: str) -> tuple[bool, bool]:
    """(arrowhead at the earlier path node, arrowhead at the later one)."""
    return {FWD: (False, True), BACK: (True, False), BI: (True, True)}[edge]


def _edge_exists(d: CausalDiagram, a: int, b: int, edge: str) -> bool:
    if edge == FWD:
        return d.has_directed(a, b)
    if edge == BACK:
        return d.has_directed(b, a)
    return d.has_bidirected(a, b)


def _edge_id(a: int, b: int, edge: str) -> tuple:
    if edge == FWD:
        return ("d", a, b)
    if edge == BACK:
        return ("d", b, a)
    return ("b", min(a, b), max(a, b))


def _head_at(p: DiagramPath, pos: int) -> tuple[bool, bool]:
    """Arrowheads at path position ``pos`` from the incoming and outgoing edges."""
    into = _marks(p.edges[pos - 1])[1] if pos > 0 else False
    outof = _marks(p.edges[pos])[0] if pos < len(p.edges) else False
    return into, outof


def accessory_set_problems(d: CausalDiagram, acc: AccessorySet) -> list[str]:
    """Every way ``acc`` fails the accessory-set conditions (empty when valid)."""
    cls = classify(d, acc.target)
    nm = d.variables
    probs: list[str] = []
    k = len(acc.Z)
    if not (len(acc.X) == len(acc.paths) == k):
        return ["Z, X and paths differ in length"]
    if len(set(acc.Z)) != k or len(set(acc.X)) != k:
        probs.append("Z or X has repeated variables")
    for z, x, p in zip(acc.Z, acc.X, acc.paths):
        tag = f"path {p.render(nm)}"
        if z not in cls.non_parents:
            probs.append(f"{tag}: {nm[z]} is a parent of the target")
        if x not in cls.alpha_live:
            probs.append(f"{tag}: alpha for {nm[x]} vanishes")
        if p.start != z or p.end != x:
            probs.append(f"{tag}: endpoints differ from ({nm[z]}, {nm[x]})")
        if len(set(p.nodes)) != len(p.nodes) or len(p.edges) != len(p.nodes) - 1:
            probs.append(f"{tag}: not a simple path")
            continue
        for a, b, e in zip(p.nodes, p.nodes[1:], p.edges):
            if not _edge_exists(d, a, b, e):
                probs.append(f"{tag}: missing edge {nm[a]} {e} {nm[b]}")
        if p.degenerate:
            continue
        if not z < x:
            probs.append(f"{tag}: start not ordered before end")
        for pos in range(1, len(p.nodes) - 1):
            v = p.nodes[pos]
            if _head_at(p, pos) != (True, True):
                probs.append(f"{tag}: {nm[v]} is not a collider")
            if not v < x:
                probs.append(f"{tag}: {nm[v]} not ordered before the end")
    for a in range(k):
        for b in range(a + 1, k):
            probs.extend(_pair_problems(d, acc, a, b))
    return probs


def _pair_problems(d: CausalDiagram, acc: AccessorySet, a: int, b: int) -> list[str]:
    nm = d.variables
    pa, pb = acc.paths[a], acc.paths[b]
    ids_a = {_edge_id(u, v, e) for u, v, e in zip(pa.nodes, pa.nodes[1:], pa.edges)}
    ids_b = {_edge_id(u, v, e) for u, v, e in zip(pb.nodes, pb.nodes[1:], pb.edges)}
    probs = []
    if ids_a & ids_b:
        probs.append(f"paths {a + 1} and {b + 1} share an edge")
    for v in set(pa.nodes) & set(pb.nodes):
        ok = False
        for own, other, oi in ((a, pb, b), (b, pa, a)):
            # v must be the start of path `own`, which leaves it by a tail,
            # and path `other` must point into v there.
            p_own = acc.paths[own]
            if v != acc.Z[own] or p_own.degenerate or acc.X[own] == v:
                continue
            if _head_at(p_own, 0)[1]:
                continue
            pos = other.nodes.index(v)
            into, outof = _head_at(other, pos)
            if pos == len(other.nodes) - 1:
                good = into
            elif pos == 0:
                good = False
            else:
                good = into and outof
            if good:
                ok = True
        if not ok:
            probs.append(f"paths {a + 1} and {b + 1} share {nm[v]} illegally")
    return probs
