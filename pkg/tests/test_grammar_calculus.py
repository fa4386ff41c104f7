import random

import pytest

from seqcalc.grammar import ProductionRule, build_system, empty_system
from seqcalc.grammar_calculus import (AtomNotFound, Budget, EigenvariableClash,
                                      GProof, InvalidProof, Refuted, Unknown,
                                      Valid, check_proof, counter_model,
                                      flip_atom, gproof_from_json,
                                      gproof_to_json, proof_to_labelled,
                                      proof_to_nested, prove_bounded,
                                      prove_sequent, to_labelled, to_nested,
                                      weaken_proof)
from seqcalc.semantics import check_sigma, globally_true_sigma, random_sigma_models
from seqcalc.sequents import (GRel, LabelledSequent, NotTree, classify,
                              graphs_isomorphic, parse_sequent,
                              propagation_graph, root_of, sequent,
                              sequent_graph)
from seqcalc.syntax import (And, Character, GBox, GDia, Lit, Or, Top, family,
                            negate, parse_formula)
from helpers import random_formula, random_tree_sequent, random_system

A, B = Character("a"), Character("b")
EMPTY = empty_system()


def a2_proof():
    result = prove_bounded(EMPTY, parse_formula("~p | [a]<a'>p"))
    assert isinstance(result, Valid)
    return result.proof


def test_a2_proof_checks():
    check_proof(EMPTY, a2_proof())


def test_spec_derivation_consumed_principals():
    # hand-built derivation with principals consumed rather than retained
    phi = parse_formula("~p | [a]<a'>p")
    s0 = sequent(formulas=[(0, phi)])
    s1 = sequent(formulas=[(0, Lit("p", False)), (0, parse_formula("[a]<a'>p"))])
    s2 = sequent(atoms=[GRel(A, 0, 1)],
                 formulas=[(0, Lit("p", False)), (1, parse_formula("<a'>p"))])
    s3 = s2.add_formulas([(0, Lit("p"))])
    leaf = GProof("Id", s3, principal=(0, Lit("p")))
    prdia = GProof("PrDia", s2, (leaf,),
                   principal=(1, parse_formula("<a'>p")), target=0)
    boxr = GProof("BoxR", s1, (prdia,),
                  principal=(0, parse_formula("[a]<a'>p")), fresh=1)
    orr = GProof("OrR", s0, (boxr,), principal=(0, phi))
    check_proof(EMPTY, orr)


def test_id_leaf_checks():
    seq = sequent(formulas=[(0, Lit("p")), (0, Lit("p", False))])
    check_proof(EMPTY, GProof("Id", seq, principal=(0, Lit("p"))))


def test_eigenvariable_clash_detected():
    proof = a2_proof()

    def corrupt(node):
        if node.rule == "BoxR":
            # reuse the conclusion's own label as the "fresh" one
            bad_label = min(node.conclusion.labels())
            premise = node.premises[0]
            bad_premise_seq = LabelledSequent.make(
                [GRel(node.principal[1].char, node.principal[0], bad_label)
                 if isinstance(a, GRel) and a.dst == node.fresh else a
                 for a in premise.conclusion.atoms],
                [(bad_label if w == node.fresh else w, f)
                 for (w, f) in premise.conclusion.formulas])
            bad_premise = GProof(premise.rule, bad_premise_seq, premise.premises,
                                 principal=premise.principal, fresh=premise.fresh,
                                 target=premise.target)
            return GProof(node.rule, node.conclusion, (bad_premise,),
                          principal=node.principal, fresh=bad_label)
        return GProof(node.rule, node.conclusion,
                      tuple(corrupt(p) for p in node.premises),
                      principal=node.principal, fresh=node.fresh,
                      target=node.target, path=node.path)

    with pytest.raises(InvalidProof):
        check_proof(EMPTY, corrupt(proof))


def test_side_condition_failure_detected():
    # a propagation against the edge direction with the empty system
    s_concl = sequent(atoms=[GRel(A, 0, 1)],
                      formulas=[(1, GDia(A, Lit("p")))])
    s_prem = s_concl.add_formulas([(0, Lit("p"))])
    leaf = GProof("Id", s_prem, principal=(0, Lit("p")))  # not closable, but shape-checked first
    bad = GProof("PrDia", s_concl, (leaf,), principal=(1, GDia(A, Lit("p"))), target=0)
    with pytest.raises(InvalidProof):
        check_proof(EMPTY, bad)


def test_prove_bounded_a2_and_path_axiom():
    assert isinstance(prove_bounded(EMPTY, parse_formula("~p | [a]<a'>p")), Valid)
    system = build_system({A}, [ProductionRule(A, ())], auto_close=True)
    assert isinstance(prove_bounded(system, parse_formula("~p | <a>p")), Valid)


def test_prove_bounded_refutes_box_introduction():
    result = prove_bounded(EMPTY, parse_formula("~p | [a]p"))
    assert isinstance(result, Refuted)
    assert len(result.model.worlds) == 2
    assert result.model.valuation["p"] == frozenset({0})
    assert not check_sigma(result.model, result.world, parse_formula("~p | [a]p"))


def test_prove_bounded_rejects_wrong_family():
    with pytest.raises(ValueError):
        prove_bounded(EMPTY, parse_formula("[0]p"))


def test_prove_bounded_unknown_on_tiny_budget():
    system = build_system({A}, [ProductionRule(A, (A, A))], auto_close=True)
    # transitivity makes box chains grow; a tiny label budget must give up
    result = prove_bounded(system, parse_formula("<a>~p | [a][a][a][a]p"),
                           Budget(max_labels=2, max_steps=50))
    assert isinstance(result, Unknown)


def test_valid_proofs_are_tree_derivations_with_fixed_root():
    rng = random.Random(21)
    found = 0
    while found < 30:
        f = random_formula(rng, rng.randint(1, 3), "grammar")
        result = prove_bounded(EMPTY, f, Budget(max_labels=10, max_steps=800))
        if not isinstance(result, Valid):
            continue
        found += 1
        for node in result.proof.nodes():
            assert classify(node.conclusion) == "tree"
            assert root_of(node.conclusion) == 0


def test_statistical_soundness():
    rng = random.Random(22)
    found = 0
    while found < 30:
        system = random_system(rng, max_rules=4)
        f = random_formula(rng, rng.randint(1, 3), "grammar")
        result = prove_bounded(system, f, Budget(max_labels=10, max_steps=800))
        if not isinstance(result, Valid):
            continue
        found += 1
        for m in random_sigma_models(rng.randint(0, 10**6), system, 5):
            assert globally_true_sigma(m, f)


def test_refuted_models_verified():
    rng = random.Random(23)
    found = 0
    while found < 40:
        system = random_system(rng, max_rules=2)
        f = random_formula(rng, rng.randint(1, 3), "grammar")
        result = prove_bounded(system, f, Budget(max_labels=10, max_steps=800))
        if not isinstance(result, Refuted):
            continue
        found += 1
        assert not check_sigma(result.model, result.world, f)


def test_prdia_preserves_propagation_graph():
    rng = random.Random(24)
    found = 0
    while found < 25:
        f = random_formula(rng, rng.randint(1, 3), "grammar")
        result = prove_bounded(EMPTY, f, Budget(max_labels=10, max_steps=800))
        if not isinstance(result, Valid):
            continue
        found += 1
        for node in result.proof.nodes():
            if node.rule == "PrDia":
                assert propagation_graph(node.conclusion) == \
                    propagation_graph(node.premises[0].conclusion)


def test_to_nested_paper_example():
    seq = parse_sequent(
        "R_a(w,u), R_a(u,v), R_b'(w,z) |- w: q, w: <b>q, u: p & ~p, "
        "v: q, v: r, z: c, z: p")
    assert str(to_nested(seq)) == "q, <b>q, (a){p & ~p, (a){q, r}}, (b'){c, p}"


def test_to_nested_single_label():
    x = to_nested(sequent(formulas=[(0, Lit("p"))]))
    assert x.formulas == (Lit("p"),) and x.children == ()


def test_to_nested_requires_tree():
    with pytest.raises(NotTree):
        to_nested(sequent(atoms=[GRel(A, 0, 1), GRel(A, 2, 1)]))


def test_translation_round_trip_graphs():
    rng = random.Random(25)
    for _ in range(1000):
        seq = random_tree_sequent(rng)
        back = to_labelled(to_nested(seq))
        assert graphs_isomorphic(sequent_graph(seq), sequent_graph(back))


def test_proof_translation_round_trip():
    rng = random.Random(26)
    found = 0
    while found < 100:
        f = random_formula(rng, rng.randint(1, 3), "grammar")
        result = prove_bounded(EMPTY, f, Budget(max_labels=10, max_steps=800))
        if not isinstance(result, Valid):
            continue
        found += 1
        nested_proof = proof_to_nested(result.proof)
        back = proof_to_labelled(nested_proof)
        check_proof(EMPTY, back)
        assert graphs_isomorphic(sequent_graph(result.proof.conclusion),
                                 sequent_graph(back.conclusion))


def test_flip_atom_round_trip_and_validity():
    seq = sequent(atoms=[GRel(A, 0, 1)],
                  formulas=[(0, GDia(A, Lit("p"))), (1, Lit("p", False))])
    result = prove_sequent(EMPTY, seq)
    assert isinstance(result, Valid)
    atom = GRel(A, 0, 1)
    flipped = flip_atom(result.proof, atom)
    check_proof(EMPTY, flipped)
    assert GRel(A.conv, 1, 0) in flipped.conclusion.atoms
    again = flip_atom(flipped, GRel(A.conv, 1, 0))
    assert again.conclusion == result.proof.conclusion
    for node, orig in zip(flipped.nodes(), result.proof.nodes()):
        assert propagation_graph(node.conclusion) == propagation_graph(orig.conclusion)


def test_flip_atom_missing():
    with pytest.raises(AtomNotFound):
        flip_atom(a2_proof(), GRel(B, 0, 1))


def test_flip_atom_feeding_a_witness():
    # the flipped atom is exactly the edge the propagation step used
    seq = sequent(atoms=[GRel(A, 0, 1)],
                  formulas=[(0, GDia(A, Lit("p"))), (1, Lit("p", False))])
    result = prove_sequent(EMPTY, seq)
    flipped = flip_atom(result.proof, GRel(A, 0, 1))
    check_proof(EMPTY, flipped)  # side condition revalidated from the graph


def test_weaken_proof_renames_clashing_eigenvariables():
    proof = a2_proof()
    eigen = next(n.fresh for n in proof.nodes() if n.rule == "BoxR")
    weakened = weaken_proof(proof, extra_formulas=[(eigen, Lit("z"))])
    check_proof(EMPTY, weakened)
    assert (eigen, Lit("z")) in weakened.conclusion.formulas


def test_proof_json_round_trip():
    proof = a2_proof()
    data = gproof_to_json(proof)
    assert gproof_from_json(data) == proof


def test_counter_model_reads_negative_literals():
    seq = sequent(atoms=[GRel(A, 0, 1)],
                  formulas=[(0, Lit("p", False)), (1, Lit("q"))])
    m = counter_model(EMPTY, seq)
    assert m.valuation["p"] == frozenset({0})
    assert m.valuation["q"] == frozenset()
