"""Symbolic rational expressions over partial regression coefficients.

Expressions are immutable trees (shared subtrees make them DAGs).  Only
trivial identities are folded at construction time (``x * 1``, ``x + 0``,
double negation, sign pull-out); there is no canonical form.  Equality and
zero tests are numeric, by evaluating on covariance matrices sampled from the
model.
"""

from __future__ import annotations

from dataclasses import dataclass
from numbers import Real
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import DivisionByZero, IllConditionedExpression, SemError
from .model import CausalDiagram, CovarianceMatrix
from .oracle.numeric import oracle_trial, partial_regression

DIV_TOL = 1e-12
ZERO_TOL = 1e-9


class SymExpr:
    """Base class; arithmetic operators build new nodes."""

    __slots__ = ()

    def __add__(self, other):
        return add(self, _lift(other))

    def __radd__(self, other):
        return add(_lift(other), self)

    def __sub__(self, other):
        return sub(self, _lift(other))

    def __rsub__(self, other):
        return sub(_lift(other), self)

    def __mul__(self, other):
        return mul(self, _lift(other))

    def __rmul__(self, other):
        return mul(_lift(other), self)

    def __truediv__(self, other):
        return div(self, _lift(other))

    def __rtruediv__(self, other):
        return div(_lift(other), self)

    def __neg__(self):
        return neg(self)


@dataclass(frozen=True, eq=True, repr=False)
class Beta(SymExpr):
    """beta_{jk.S}: coefficient of V_k when regressing V_j on {V_k} and S."""

    j: int
    k: int
    S: tuple[int, ...] = ()

    def __post_init__(self):
        if self.j == self.k or self.j in self.S or self.k in self.S:
            raise ValueError(f"invalid partial regression atom ({self.j},{self.k}|{self.S})")
        object.__setattr__(self, "S", tuple(sorted(set(self.S))))

    def __repr__(self):
        return f"Beta({self.j},{self.k},{self.S})"


@dataclass(frozen=True, eq=True, repr=False)
class Const(SymExpr):
    value: float

    def __repr__(self):
        return f"Const({self.value!r})"


@dataclass(frozen=True, eq=True, repr=False)
class Neg(SymExpr):
    arg: SymExpr

    def __repr__(self):
        return f"Neg({self.arg!r})"


@dataclass(frozen=True, eq=True, repr=False)
class _Binary(SymExpr):
    left: SymExpr
    right: SymExpr

    def __post_init__(self):
        pass

    def __repr__(self):
        return f"{type(self).__name__}({self.left!r}, {self.right!r})"


class Add(_Binary):
    pass


class Sub(_Binary):
    pass


class Mul(_Binary):
    pass


class Div(_Binary):
    def __post_init__(self):
        if isinstance(self.right, Const) and self.right.value == 0:
            raise DivisionByZero("division by the literal constant 0")


ZERO = Const(0.0)
ONE = Const(1.0)


def _lift(x) -> SymExpr:
    if isinstance(x, SymExpr):
        return x
    if isinstance(x, Real):
        return Const(float(x))
    raise TypeError(f"cannot use {type(x).__name__} in an expression")


def _is_const(e: SymExpr, value: float | None = None) -> bool:
    return isinstance(e, Const) and (value is None or e.value == value)


def neg(a: SymExpr) -> SymExpr:
    if isinstance(a, Neg):
        return a.arg
    if isinstance(a, Const):
        return Const(-a.value)
    return Neg(a)


def add(a: SymExpr, b: SymExpr) -> SymExpr:
    if _is_const(a) and _is_const(b):
        return Const(a.value + b.value)
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    if isinstance(b, Neg):
        return Sub(a, b.arg)
    return Add(a, b)


def sub(a: SymExpr, b: SymExpr) -> SymExpr:
    if _is_const(a) and _is_const(b):
        return Const(a.value - b.value)
    if _is_const(b, 0.0):
        return a
    if _is_const(a, 0.0):
        return neg(b)
    if isinstance(b, Neg):
        return Add(a, b.arg)
    return Sub(a, b)


def mul(a: SymExpr, b: SymExpr) -> SymExpr:
    if _is_const(a) and _is_const(b):
        return Const(a.value * b.value)
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return ZERO
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    if _is_const(a, -1.0):
        return neg(b)
    if _is_const(b, -1.0):
        return neg(a)
    if isinstance(a, Neg) or isinstance(b, Neg):
        sign = isinstance(a, Neg) != isinstance(b, Neg)
        core = mul(a.arg if isinstance(a, Neg) else a, b.arg if isinstance(b, Neg) else b)
        return neg(core) if sign else core
    return Mul(a, b)


def div(a: SymExpr, b: SymExpr) -> SymExpr:
    if _is_const(b, 0.0):
        raise DivisionByZero("division by the literal constant 0")
    if _is_const(a) and _is_const(b):
        return Const(a.value / b.value)
    if _is_const(a, 0.0):
        return ZERO
    if _is_const(b, 1.0):
        return a
    if _is_const(b, -1.0):
        return neg(a)
    if isinstance(a, Neg) or isinstance(b, Neg):
        sign = isinstance(a, Neg) != isinstance(b, Neg)
        core = div(a.arg if isinstance(a, Neg) else a, b.arg if isinstance(b, Neg) else b)
        return neg(core) if sign else core
    return Div(a, b)


def atoms(e: SymExpr) -> set[Beta]:
    out: set[Beta] = set()
    seen: set[int] = set()
    stack = [e]
    while stack:
        x = stack.pop()
        if id(x) in seen:
            continue
        seen.add(id(x))
        if isinstance(x, Beta):
            out.add(x)
        elif isinstance(x, Neg):
            stack.append(x.arg)
        elif isinstance(x, _Binary):
            stack.extend((x.left, x.right))
    return out


# -- evaluation --------------------------------------------------------------

def _fold(e: SymExpr, atom_value: Callable[[Beta], float]) -> tuple[float, float]:
    """Evaluate ``e``; returns ``(value, largest intermediate magnitude)``."""
    memo: dict[int, float] = {}
    scale = 0.0

    def go(x: SymExpr) -> float:
        nonlocal scale
        key = id(x)
        if key in memo:
            return memo[key]
        if isinstance(x, Beta):
            v = atom_value(x)
        elif isinstance(x, Const):
            v = x.value
        elif isinstance(x, Neg):
            v = -go(x.arg)
        elif isinstance(x, Add):
            v = go(x.left) + go(x.right)
        elif isinstance(x, Sub):
            v = go(x.left) - go(x.right)
        elif isinstance(x, Mul):
            v = go(x.left) * go(x.right)
        elif isinstance(x, Div):
            den = go(x.right)
            if abs(den) < DIV_TOL:
                raise DivisionByZero(f"divisor evaluates to {den:.3g}")
            v = go(x.left) / den
        else:
            raise TypeError(f"not an expression node: {x!r}")
        memo[key] = v
        scale = max(scale, abs(v))
        return v

    value = go(e)
    return value, scale


def evaluate(e: SymExpr, sigma: CovarianceMatrix | np.ndarray) -> float:
    """Numeric value of ``e`` with every atom computed from ``sigma``."""
    values = sigma.values if isinstance(sigma, CovarianceMatrix) else np.asarray(sigma)
    n = values.shape[0]
    cache: dict[Beta, float] = {}

    def atom(b: Beta) -> float:
        if b not in cache:
            if max(b.j, b.k, *b.S) >= n:
                raise IndexError(f"atom {b!r} outside a {n}x{n} covariance matrix")
            cache[b] = partial_regression(values, b.j, b.k, b.S)
        return cache[b]

    return _fold(e, atom)[0]


class ZeroTester:
    """Randomized numeric zero test bound to one diagram.

    Holds ``trials`` oracle covariance matrices drawn from generic
    parameterizations of the diagram and caches atom values across calls.
    """

    def __init__(self, d: CausalDiagram, trials: int = 4, seed: int = 0):
        if trials < 1:
            raise ValueError("trials must be >= 1")
        self.diagram = d
        self.trials = trials
        self.seed = seed
        self._sigmas: list[np.ndarray] | None = None
        self._atoms: list[dict[Beta, float]] = [{} for _ in range(trials)]

    @property
    def sigmas(self) -> list[np.ndarray]:
        if self._sigmas is None:
            self._sigmas = [oracle_trial(self.diagram, self.seed, t).sigma.values for t in range(self.trials)]
        return self._sigmas

    def values(self, e: SymExpr) -> list[tuple[float, float] | None]:
        """``(value, scale)`` per trial, or None where a division blew up."""
        out: list[tuple[float, float] | None] = []
        for sigma, cache in zip(self.sigmas, self._atoms):
            def atom(b: Beta, sigma=sigma, cache=cache) -> float:
                if b not in cache:
                    cache[b] = partial_regression(sigma, b.j, b.k, b.S)
                return cache[b]
            try:
                out.append(_fold(e, atom))
            except DivisionByZero:
                out.append(None)
        return out

    def is_zero(self, e: SymExpr) -> bool:
        if isinstance(e, Const):
            return e.value == 0.0
        vals = self.values(e)
        good = [v for v in vals if v is not None]
        if 2 * len(good) <= len(vals):
            raise IllConditionedExpression("division by (near) zero in at least half of the trials")
        return all(abs(v) < ZERO_TOL * (1.0 + s) for v, s in good)


def is_probably_zero(e: SymExpr, d: CausalDiagram, trials: int = 4, seed: int = 0) -> bool:
    """True iff ``e`` vanishes on every sampled covariance matrix of ``d``."""
    return ZeroTester(d, trials, seed).is_zero(e)


# -- rendering and JSON ------------------------------------------------------

_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2}
_SYM = {Add: "+", Sub: "-", Mul: "*", Div: "/"}
_OPS = {Add: "add", Sub: "sub", Mul: "mul", Div: "div"}


def format_beta(b: Beta, names: Sequence[str]) -> str:
    head = f"{names[b.j]},{names[b.k]}"
    if b.S:
        head += "|" + ",".join(names[s] for s in b.S)
    return f"b({head})"


def to_text(e: SymExpr, names: Sequence[str]) -> str:
    def go(x: SymExpr) -> tuple[str, int]:
        if isinstance(x, Beta):
            return format_beta(x, names), 4
        if isinstance(x, Const):
            v = x.value
            s = repr(int(v)) if v == int(v) and abs(v) < 1e15 else repr(v)
            return s, (4 if v >= 0 else 3)
        if isinstance(x, Neg):
            s, p = go(x.arg)
            return "-" + (s if p >= 3 else f"({s})"), 3
        prec = _PREC[type(x)]
        ls, lp = go(x.left)
        rs, rp = go(x.right)
        if lp < prec:
            ls = f"({ls})"
        # right operand of - and / binds tighter; also parenthesize equal precedence
        if rp < prec or (rp == prec and not isinstance(x, (Add, Mul))):
            rs = f"({rs})"
        return f"{ls} {_SYM[type(x)]} {rs}", prec

    return go(e)[0]


def to_json(e: SymExpr, names: Sequence[str]) -> dict:
    if isinstance(e, Beta):
        return {"beta": [names[e.j], names[e.k], [names[s] for s in e.S]]}
    if isinstance(e, Const):
        return {"const": e.value}
    if isinstance(e, Neg):
        return {"op": "neg", "args": [to_json(e.arg, names)]}
    return {"op": _OPS[type(e)], "args": [to_json(e.left, names), to_json(e.right, names)]}


_FROM_OP = {v: k for k, v in _OPS.items()}


def from_json(obj: dict, names: Sequence[str]) -> SymExpr:
    """Inverse of :func:`to_json` (no simplification is applied)."""
    index = {nm: i for i, nm in enumerate(names)}
    if "beta" in obj:
        j, k, S = obj["beta"]
        return Beta(index[j], index[k], tuple(index[s] for s in S))
    if "const" in obj:
        return Const(float(obj["const"]))
    op, args = obj["op"], [from_json(a, names) for a in obj["args"]]
    if op == "neg":
        return Neg(args[0])
    return _FROM_OP[op](*args)


def evaluate_all(exprs: Iterable[SymExpr], sigma) -> list[float | SemError]:
    """Evaluate several expressions; failures are returned in place of values."""
    out: list[float | SemError] = []
    for e in exprs:
        try:
            out.append(evaluate(e, sigma))
        except SemError as exc:
            out.append(exc)
    return out
