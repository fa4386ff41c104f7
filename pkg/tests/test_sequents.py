import random

import pytest

from seqcalc.sequents import (CRel, GRel, Ideal, LabelledSequent, NotForest,
                              choice_trees, classify, graphs_isomorphic,
                              parse_sequent, propagation_graph, render_sequent,
                              sequent, sequent_from_json, sequent_graph,
                              sequent_to_json, undirected_path)
from seqcalc.syntax import Character, Lit, Or, parse_formula
from helpers import random_choice_atoms, random_tree_sequent, undirected_bfs

A, B, D = Character("a"), Character("b"), Character("d")


def paper_tree_sequent():
    # R_b'(w,v), R_b(w,u), R_a(u,c), R_d'(u,p) |- w:q, w:r, v:~q, u:q|r
    w, v, u, c, p = 0, 1, 2, 3, 4
    return LabelledSequent.make(
        [GRel(B.conv, w, v), GRel(B, w, u), GRel(A, u, c), GRel(D.conv, u, p)],
        [(w, Lit("q")), (w, Lit("r")), (v, Lit("q", False)),
         (u, Or(Lit("q"), Lit("r")))])


def test_sequent_graph_paper_example():
    seq = paper_tree_sequent()
    g = sequent_graph(seq)
    assert g.vertices == frozenset(range(5))
    assert len(g.edges) == 4
    assert g.label_of(0) == (False, (Lit("q"), Lit("r")))
    assert g.label_of(3) == (False, ())
    assert classify(seq) == "tree"


def test_sequent_graph_single_vertex():
    seq = sequent(formulas=[(0, Lit("p"))])
    g = sequent_graph(seq)
    assert g.vertices == frozenset({0}) and g.edges == ()


def test_sequent_graph_self_loop():
    seq = sequent(atoms=[GRel(A, 0, 0)])
    g = sequent_graph(seq)
    assert g.edges == ((0, 0, A),)
    assert classify(seq) == "general"


def test_classify_forest_and_dag():
    two_chains = sequent(atoms=[CRel(0, 1), CRel(2, 3)])
    assert classify(two_chains) == "forest"
    backward = sequent(atoms=[GRel(A, 0, 2), GRel(A, 1, 2)])
    assert classify(backward) == "dag"
    cycle = sequent(atoms=[GRel(A, 0, 1), GRel(A, 1, 0)])
    assert classify(cycle) == "general"


def test_classify_relabeling_invariance():
    rng = random.Random(5)
    for _ in range(200):
        seq = random_tree_sequent(rng)
        shift = {v: v + 17 for v in seq.labels()}
        relabeled = LabelledSequent.make(
            [GRel(a.char, shift[a.src], shift[a.dst]) for a in seq.atoms],
            [(shift[w], f) for (w, f) in seq.formulas])
        assert classify(relabeled) == classify(seq) == "tree"


def test_propagation_graph_edges():
    seq = sequent(atoms=[GRel(A, 0, 2), GRel(B.conv, 1, 2)])
    pg = propagation_graph(seq)
    assert (0, 2, A) in pg.edges and (2, 0, A.conv) in pg.edges
    assert (1, 2, B.conv) in pg.edges and (2, 1, B) in pg.edges


def test_propagation_graph_self_loop():
    pg = propagation_graph(sequent(atoms=[GRel(A, 0, 0)]))
    assert (0, 0, A) in pg.edges and (0, 0, A.conv) in pg.edges


def test_undirected_path_basics():
    atoms = [CRel(0, 1)]
    assert undirected_path(atoms, 0, 1)
    assert undirected_path(atoms, 1, 0)
    assert undirected_path(atoms, 0, 0)
    assert not undirected_path([], 0, 1)
    assert undirected_path([], 2, 2)


def test_undirected_path_matches_bfs():
    rng = random.Random(6)
    for _ in range(500):
        atoms, n = random_choice_atoms(rng)
        w, u = rng.randrange(n), rng.randrange(n)
        assert undirected_path(atoms, w, u) == undirected_bfs(atoms, w, u)


def test_undirected_path_equivalence_relation():
    rng = random.Random(60)
    for _ in range(10_000):
        atoms, n = random_choice_atoms(rng, max_labels=6, max_atoms=5)
        labels = range(n)
        w, u, v = (rng.randrange(n) for _ in range(3))
        assert undirected_path(atoms, w, w)
        assert undirected_path(atoms, w, u) == undirected_path(atoms, u, w)
        if undirected_path(atoms, w, u) and undirected_path(atoms, u, v):
            assert undirected_path(atoms, w, v)


def test_choice_trees_example():
    # three trees rooted at 0, 3 and 5
    seq = sequent(atoms=[CRel(0, 1), CRel(0, 2), CRel(3, 4), CRel(5, 6),
                         Ideal(2), Ideal(3)])
    trees = choice_trees(seq)
    assert trees == [(0, [0, 1, 2]), (3, [3, 4]), (5, [5, 6])]
    merged = choice_trees(seq.add_atoms([CRel(0, 3)]))
    assert len(merged) == 2


def test_choice_trees_singleton():
    assert choice_trees(sequent(formulas=[(0, Lit("p"))])) == [(0, [0])]


def test_choice_trees_rejects_non_forest():
    with pytest.raises(NotForest):
        choice_trees(sequent(atoms=[CRel(0, 1), CRel(2, 1)]))


def test_render_and_parse_round_trip():
    seq = LabelledSequent.make(
        [GRel(A, 0, 1), Ideal(2), CRel(2, 3)],
        [(0, parse_formula("p & q")), (3, parse_formula("~r"))])
    text = render_sequent(seq)
    assert "|-" in text
    assert parse_sequent(text) == seq


def test_json_round_trip():
    seq = paper_tree_sequent()
    assert sequent_from_json(sequent_to_json(seq)) == seq


def test_multiset_equality_is_canonical():
    s1 = sequent(formulas=[(0, Lit("p")), (0, Lit("q")), (0, Lit("p"))])
    s2 = sequent(formulas=[(0, Lit("q")), (0, Lit("p")), (0, Lit("p"))])
    s3 = sequent(formulas=[(0, Lit("p")), (0, Lit("q"))])
    assert s1 == s2
    assert s1 != s3


def test_graph_isomorphism():
    seq = paper_tree_sequent()
    shift = {v: 9 - v for v in seq.labels()}
    relabeled = LabelledSequent.make(
        [GRel(a.char, shift[a.src], shift[a.dst]) for a in seq.atoms],
        [(shift[w], f) for (w, f) in seq.formulas])
    assert graphs_isomorphic(sequent_graph(seq), sequent_graph(relabeled))
    other = seq.add_formulas([(0, Lit("z"))])
    assert not graphs_isomorphic(sequent_graph(seq), sequent_graph(other))
