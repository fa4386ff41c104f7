import random

import pytest

from seqcalc.grammar import (ClosureViolation, ProductionRule, UnknownCharacter,
                             build_system, derives, derives_eventually,
                             empty_system, format_system, parse_system,
                             reachable, reachability_index, s4_system,
                             s5_system)
from seqcalc.syntax import Character, str_of
from helpers import enumerate_path_strings, random_prop_graph, random_system

A, B, C = Character("a"), Character("b"), Character("c")


def test_closure_violation():
    with pytest.raises(ClosureViolation):
        build_system({A}, [ProductionRule(A, ())])


def test_unknown_character():
    with pytest.raises(UnknownCharacter):
        build_system({A}, [ProductionRule(A, (B,))], auto_close=True)


def test_s4_system_is_closed():
    s4 = s4_system()
    assert ProductionRule(A, ()) in s4.rules
    assert ProductionRule(A, (A, A)) in s4.rules
    assert ProductionRule(A.conv, ()) in s4.rules
    assert ProductionRule(A.conv, (A.conv, A.conv)) in s4.rules
    assert len(s4.rules) == 4


def test_auto_close_adds_converse_images():
    system = build_system({A, B, C},
                          [ProductionRule(A, (B, B.conv)),
                           ProductionRule(B.conv, (B.conv, C, A))],
                          auto_close=True)
    assert ProductionRule(A.conv, (B, B.conv)) in system.rules
    assert ProductionRule(B, (A.conv, C.conv, B)) in system.rules
    assert len(system.rules) == 4


def test_derives_reflexive():
    assert derives(empty_system(), (A,), (A,), 0)


def test_derives_one_step_example():
    # a.b rewrites to b.b.b or a.b' in one step
    system = build_system(
        {A, B},
        [ProductionRule(A, (B, B)), ProductionRule(A.conv, (B.conv, B.conv)),
         ProductionRule(B, (B.conv,)), ProductionRule(B.conv, (B,))])
    assert derives(system, (A, B), (B, B, B), 1)
    assert derives(system, (A, B), (A, B.conv), 1)
    assert not derives(system, (A, B), (B, B), 1)


def test_derives_s4_chain():
    assert derives(s4_system(), (A,), (A, A, A), 2)
    assert not derives(s4_system(), (A,), (A, A, A), 1)


def test_reachable_paper_path():
    # edges from R_a(w,v), R_b'(u,v), R_c(z,v); w=0, u=1, v=2, z=3
    w, u, v, z = 0, 1, 2, 3
    edges = set()
    for (x, s, d) in [(A, w, v), (B.conv, u, v), (C, z, v)]:
        edges.add((s, d, x))
        edges.add((d, s, x.conv))
    system = build_system({A, B, C},
                          [ProductionRule(A, (A, B, B.conv, C.conv))],
                          auto_close=True)
    wit = reachable([w, u, v, z], edges, system, A, w, z)
    assert wit is not None
    assert wit.vertices == (w, v, u, v, z)
    assert wit.string == (A, B, B.conv, C.conv)
    assert derives_eventually(system, (A,), wit.string)


def test_reachable_empty_system():
    edges = {(0, 1, A), (1, 0, A.conv)}
    wit = reachable([0, 1], edges, empty_system(), A, 0, 1)
    assert wit is not None and wit.string == (A,)
    assert reachable([0, 1], edges, empty_system(), A, 1, 0) is None


def test_reachable_epsilon_self_loop():
    system = build_system({A}, [ProductionRule(A, ())], auto_close=True)
    wit = reachable([0], set(), system, A, 0, 0)
    assert wit is not None and wit.string == ()


def test_reachable_agrees_with_brute_force():
    rng = random.Random(42)
    checked = 0
    for _ in range(200):
        vertices, edges = random_prop_graph(rng)
        system = random_system(rng)
        x = rng.choice(sorted(system.alphabet))
        w, u = rng.choice(vertices), rng.choice(vertices)
        wit = reachable(vertices, edges, system, x, w, u)
        oracle = any(derives(system, (x,), s, 6)
                     for s in enumerate_path_strings(edges, w, u, 8))
        if oracle:
            assert wit is not None, (edges, system, x, w, u)
        if wit is not None:
            assert wit.source == w and wit.target == u
            assert all(step in edges for step in wit.steps())
            assert derives_eventually(system, (x,), wit.string)
        checked += 1
    assert checked == 200


def test_saturation_monotone_under_edges():
    rng = random.Random(3)
    for _ in range(60):
        vertices, edges = random_prop_graph(rng)
        system = random_system(rng)
        x = rng.choice(sorted(system.alphabet))
        w, u = rng.choice(vertices), rng.choice(vertices)
        before = reachable(vertices, edges, system, x, w, u)
        extra_v, extra_u = rng.choice(vertices), rng.choice(vertices)
        c = rng.choice(sorted(system.alphabet))
        bigger = set(edges) | {(extra_v, extra_u, c), (extra_u, extra_v, c.conv)}
        after = reachable(vertices, bigger, system, x, w, u)
        if before is not None:
            assert after is not None


def test_converse_symmetry_of_reachability():
    rng = random.Random(4)
    for _ in range(80):
        vertices, edges = random_prop_graph(rng)
        system = random_system(rng)
        x = rng.choice(sorted(system.alphabet))
        w, u = rng.choice(vertices), rng.choice(vertices)
        fwd = reachable(vertices, edges, system, x, w, u)
        bwd = reachable(vertices, edges, system, x.conv, u, w)
        assert (fwd is None) == (bwd is None)


def test_index_is_cached():
    vertices, edges = [0, 1], frozenset({(0, 1, A), (1, 0, A.conv)})
    i1 = reachability_index(vertices, edges, empty_system())
    i2 = reachability_index(vertices, edges, empty_system())
    assert i1 is i2


def test_file_format_round_trip():
    text = """
# a comment
alphabet: a b
a -> a b
b -> eps
a' -> b' a'
b' -> eps
"""
    system = parse_system(text)
    assert ProductionRule(A, (A, B)) in system.rules
    assert ProductionRule(B, ()) in system.rules
    again = parse_system(format_system(system))
    assert again == system


def test_file_format_auto_close():
    system = parse_system("alphabet: a\na -> eps\n", auto_close=True)
    assert ProductionRule(A.conv, ()) in system.rules


def test_s5_system():
    s5 = s5_system()
    assert ProductionRule(A, (A.conv, A)) in s5.rules
    assert derives(s5, (A,), (A.conv, A.conv, A, A), 3)
