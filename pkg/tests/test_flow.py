import numpy as np
import pytest

from corpus import random_diagram
from oracles import brute_max_accessory, check_accessory
from pregid.errors import Def2ViolationInternal, MalformedPath
from pregid.flow import (
    SINK,
    SOURCE,
    AccessorySet,
    DiagramPath,
    accessory_set_problems,
    build_flow_network,
    find_accessory_set,
    fixup_and_assemble,
    interpret_paths,
    max_flow,
    minus,
    plus,
)
from pregid.model import build_diagram


def test_instrument(instrument):
    acc = find_accessory_set(instrument, 2)
    assert acc.Z == (0,) and acc.X == (1,)
    assert acc.paths[0].render(instrument.variables) == "Z -> X"
    assert find_accessory_set(instrument, 1).size == 0


def test_two_route(two_route):
    acc = find_accessory_set(two_route, 3)
    assert (acc.Z, acc.X) == ((0,), (1,))
    assert check_accessory(two_route, acc) == []


def test_seven_has_two_paths(seven):
    acc = find_accessory_set(seven, 6)
    assert acc.size == 2 == brute_max_accessory(seven, 6)
    assert accessory_set_problems(seven, acc) == []
    assert check_accessory(seven, acc) == []


def test_network_dump(instrument):
    text = build_flow_network(instrument, 2).dump(instrument.variables)
    assert "s -> Z- cap=1 [source Z]" in text
    assert "Z- -> X+ cap=1 [edge Z -> X]" in text
    assert "X+ -> t cap=1 [sink X]" in text


def test_flow_paths_are_vertex_disjoint():
    rng = np.random.default_rng(31)
    for _ in range(200):
        n = int(rng.integers(3, 9))
        d = random_diagram(rng, n)
        paths = max_flow(build_flow_network(d, n - 1))
        inner = [v for p in paths for v in p[1:-1]]
        assert len(inner) == len(set(inner))


def test_random_sets_are_valid_and_maximum():
    rng = np.random.default_rng(32)
    for _ in range(150):
        n = int(rng.integers(2, 8))
        d = random_diagram(rng, n)
        acc = find_accessory_set(d, n - 1)
        assert check_accessory(d, acc) == []
        assert acc.size == brute_max_accessory(d, n - 1)


def test_endpoint_moves_to_latest_variable():
    # V1 -> V5 <-> V3 read up to V3 would pass V5 > V3; the set keeps V1 -> V5
    d = build_diagram([f"V{i}" for i in range(1, 7)],
                      [("V1", "V5")], [("V3", "V5"), ("V5", "V6"), ("V3", "V6")])
    acc = fixup_and_assemble(d, 5, [DiagramPath((0, 4, 2), ("->", "<->"))])
    assert acc.Z == (0,) and acc.X == (4,)
    assert acc.paths[0] == DiagramPath((0, 4), ("->",))


def test_moved_endpoints_may_not_collide():
    d = build_diagram([f"V{i}" for i in range(1, 7)],
                      [("V1", "V5"), ("V2", "V5")], [("V3", "V5"), ("V4", "V5"), ("V5", "V6")])
    with pytest.raises(Def2ViolationInternal):
        fixup_and_assemble(d, 5, [DiagramPath((0, 4, 2), ("->", "<->")),
                                  DiagramPath((1, 4, 3), ("->", "<->"))])


def test_loop_through_source_is_shortcut():
    d = build_diagram(["A", "B", "T"], [("A", "B")], [("A", "B"), ("A", "T")])
    net = build_flow_network(d, 2)
    paths = interpret_paths(net, [(SOURCE, minus(0), plus(1), plus(0), SINK)])
    assert paths == [DiagramPath((0,), ())]


def test_malformed_paths(instrument):
    net = build_flow_network(instrument, 2)
    with pytest.raises(MalformedPath):
        interpret_paths(net, [(SOURCE, plus(0), SINK)])
    with pytest.raises(MalformedPath):
        interpret_paths(net, [(SOURCE, minus(0), plus(0), plus(1), SINK)])


def test_problem_checker_flags_bad_sets(instrument):
    bad = AccessorySet(2, (1,), (1,), (DiagramPath((1,), ()),))  # X is a parent of Y
    assert any("parent" in p for p in accessory_set_problems(instrument, bad))
    bad = AccessorySet(2, (0,), (1,), (DiagramPath((0, 1), ("<->",)),))
    assert any("missing edge" in p for p in accessory_set_problems(instrument, bad))
