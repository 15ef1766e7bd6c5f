"""Named example models and a seeded random-diagram generator."""

import numpy as np

from pregid.model import CausalDiagram, build_diagram

INSTRUMENT_TEXT = "var Z X Y\nZ -> X\nX -> Y\nX <-> Y\n"
TWO_ROUTE_TEXT = "var X W Z Y\nX -> W\nX -> Z\nW -> Y\nZ -> Y\nX <-> Z\nW <-> Y\n"

# Seven variables; target V7 has a two-path accessory set, one identified
# coefficient, two undecided ones and a tetrad constraint.
SEVEN_TEXT = """var V1 V2 V3 V4 V5 V6 V7
V1 -> V2
V2 -> V5
V2 -> V6
V3 -> V4
V4 -> V7
V5 -> V7
V6 -> V7
V2 <-> V4
V4 <-> V7
V5 <-> V7
V6 <-> V7
"""


def instrument():
    return build_diagram(["Z", "X", "Y"], [("Z", "X"), ("X", "Y")], [("X", "Y")])


def two_route():
    return build_diagram(
        ["X", "W", "Z", "Y"],
        [("X", "W"), ("X", "Z"), ("W", "Y"), ("Z", "Y")],
        [("X", "Z"), ("W", "Y")],
    )


def seven():
    from pregid.formats import parse_model

    return parse_model(SEVEN_TEXT).diagram


def random_diagram(rng: np.random.Generator, n: int) -> CausalDiagram:
    """Random recursive diagram with random directed and bidirected densities."""
    pd = rng.uniform(0.15, 0.7)
    pb = rng.uniform(0.1, 0.7)
    directed = frozenset((k, j) for j in range(n) for k in range(j) if rng.random() < pd)
    bidirected = frozenset((i, l) for l in range(n) for i in range(l) if rng.random() < pb)
    return CausalDiagram(tuple(f"V{i + 1}" for i in range(n)), directed, bidirected)


def random_corpus(seed: int, count: int, n_min: int = 2, n_max: int = 8) -> list[CausalDiagram]:
    rng = np.random.default_rng(seed)
    return [random_diagram(rng, int(rng.integers(n_min, n_max + 1))) for _ in range(count)]
