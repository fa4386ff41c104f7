"""Interpolant extraction from grammar-calculus proofs.

An interpolant here is a set of flat sequents (labelled formulas, no
relational atoms).  A proof of a two-part sequent is replayed bottom-up;
each node hands its partition to the premises (new formulas join the
analyzed side) and combines their interpolants: closing rules seed a
constant or a literal, conjunction unions the two branch interpolants,
a box wraps the eigenvariable's formulas into one boxed disjunction,
and everything else passes through.  A node whose analyzed formula sits
in the left part is handled by flipping the partition, applying the
right-side combination, and flipping back with the orthogonal
operation, which negates one chosen formula from every flat sequent.

The pay-off is effective: alongside each node's interpolant the replay
builds, for every flat sequent X in it, a checkable proof of
``atoms |- left, X``, and for every sequent in its orthogonal a proof
of ``orth |- right``-shape.  At the root these assemble into the two
implication witnesses, and every literal of the final formula occurs
with the same polarity on both sides of the input implication.
"""
from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass

from .grammar import CfcstSystem
from .grammar_calculus import (Budget, GProof, InvalidProof, Refuted, Unknown,
                               check_proof, prove_sequent, weaken_to)
from .sequents import GRel, LabelledSequent, sequent
from .syntax import (And, Bot, Formula, GBox, GDia, Lit, Or, Top, family, fmt,
                     formula_key, literals, negate, GRAMMAR)

# A flat sequent is a sorted tuple of distinct (label, formula) pairs; an
# interpolant is a frozenset of flat sequents.
FlatSequent = tuple
Interpolant = frozenset


class MixedLabels(ValueError):
    pass


class PartitionMismatch(ValueError):
    pass


def _fkey(item):
    label, f = item
    return (label, formula_key(f))


def _skey(s):
    return tuple(_fkey(item) for item in s)


def flat(items) -> FlatSequent:
    return tuple(sorted(set(items), key=_fkey))


def interpolant(seqs) -> Interpolant:
    return frozenset(flat(s) for s in seqs)


def orthogonal(interp: Interpolant) -> Interpolant:
    """All ways of negating one formula from each flat sequent.

    The orthogonal of the empty interpolant is the single empty flat
    sequent; an interpolant containing an empty flat sequent has an
    empty orthogonal (there is nothing to choose).
    """
    seqs = sorted(interp, key=_skey)
    if any(len(s) == 0 for s in seqs):
        return frozenset()
    out = set()
    for choice in itertools.product(*seqs):
        out.add(flat((w, negate(f)) for (w, f) in choice))
    return frozenset(out) if seqs else frozenset({()})


def or_fold(formulas) -> Formula:
    """Right-associated disjunction; empty gives bot."""
    formulas = list(formulas)
    if not formulas:
        return Bot()
    out = formulas[-1]
    for f in reversed(formulas[:-1]):
        out = Or(f, out)
    return out


def and_fold(formulas) -> Formula:
    """Right-associated conjunction; empty gives top."""
    formulas = list(formulas)
    if not formulas:
        return Top()
    out = formulas[-1]
    for f in reversed(formulas[:-1]):
        out = And(f, out)
    return out


def boxed(interp: Interpolant, char, w: int, u: int) -> Interpolant:
    """Box the u-labelled block of every flat sequent over to label w.

    Each sequent's u-formulas become one formula w:[char](f1 | ... | fn)
    (w:[char]bot when the block is empty), leaving other labels alone.
    """
    out = set()
    for s in sorted(interp, key=_skey):
        block = [f for (lab, f) in s if lab == u]
        rest = [(lab, f) for (lab, f) in s if lab != u]
        out.add(flat(rest + [(w, GBox(char, or_fold(block)))]))
    return frozenset(out)


def interpolant_formula(interp: Interpolant, w: int) -> Formula:
    """Conjunction over sequents of the disjunction of their formulas."""
    for s in interp:
        for (lab, _) in s:
            if lab != w:
                raise MixedLabels(f"formula at label w{lab}, expected w{w}")
    return and_fold([or_fold([f for (_, f) in s]) for s in sorted(interp, key=_skey)])


def interpolant_literals(interp: Interpolant) -> frozenset:
    out = frozenset()
    for s in interp:
        for (_, f) in s:
            out |= literals(f)
    return out


@dataclass(frozen=True)
class InterpNode:
    """One node of the annotated derivation: partition plus interpolant."""

    sequent: LabelledSequent
    left: tuple
    right: tuple
    interpolant: Interpolant
    children: tuple


# ---------------------------------------------------------------------------
# The replay.  _annotate returns, besides the interpolant, proof maps
#   map_i:  flat sequent X in I          -> proof of  atoms |- left  + X
#   map_ii: flat sequent T in orth(I)    -> proof of  atoms |- T + right
# which realize the two halves of the interpolation statement at every
# node and make the final witnesses a matter of folding.
# ---------------------------------------------------------------------------


def _mk(atoms, items) -> LabelledSequent:
    return LabelledSequent.make(atoms, items)


def _attach_or(sub: GProof, w, a, b, conclusion) -> GProof:
    premise = weaken_to(sub, conclusion.add_formulas([(w, a), (w, b)]))
    return GProof("OrR", conclusion, (premise,), principal=(w, Or(a, b)))


def _attach_and(sub_a: GProof, sub_b: GProof, w, a, b, conclusion) -> GProof:
    pa = weaken_to(sub_a, conclusion.add_formulas([(w, a)]))
    pb = weaken_to(sub_b, conclusion.add_formulas([(w, b)]))
    return GProof("AndR", conclusion, (pa, pb), principal=(w, And(a, b)))


def _attach_box(sub: GProof, char, w, u, body, conclusion) -> GProof:
    premise = weaken_to(sub, conclusion.add_atoms([GRel(char, w, u)])
                        .add_formulas([(u, body)]))
    return GProof("BoxR", conclusion, (premise,), principal=(w, GBox(char, body)),
                  fresh=u)


def _attach_prdia(sub: GProof, char, w, u, body, conclusion) -> GProof:
    premise = weaken_to(sub, conclusion.add_formulas([(u, body)]))
    return GProof("PrDia", conclusion, (premise,), principal=(w, GDia(char, body)),
                  target=u)


def _id_leaf(seq, w, name) -> GProof:
    return GProof("Id", seq, principal=(w, Lit(name)))


def _top_leaf(seq, w) -> GProof:
    return GProof("TopR", seq, principal=(w, Top()))


def _added_formulas(premise: LabelledSequent, conclusion: LabelledSequent):
    diff = Counter(premise.formulas) - Counter(conclusion.formulas)
    if Counter(conclusion.formulas) - Counter(premise.formulas):
        raise InvalidProof("annotation needs contraction-absorbed proofs")
    return diff


def _annotate(node: GProof, left: Counter, right: Counter):
    rule = node.rule
    atoms = node.conclusion.atoms
    left_items = tuple(sorted(left.elements(), key=_fkey))
    right_items = tuple(sorted(right.elements(), key=_fkey))

    if rule in ("Id", "TopR"):
        w = node.principal[0]
        if rule == "Id":
            pos, neg = node.principal[1], negate(node.principal[1])
        else:
            pos, neg = Top(), None
        lp, rp = left[(w, pos)] > 0, right[(w, pos)] > 0
        ln = rn = False
        if neg is not None:
            ln, rn = left[(w, neg)] > 0, right[(w, neg)] > 0

        if rule == "TopR":
            if rp:
                interp = interpolant([[(w, Top())]])
                mi = {flat([(w, Top())]): _top_leaf(_mk(atoms, left_items + ((w, Top()),)), w)}
                mii = {flat([(w, Bot())]): _top_leaf(_mk(atoms, right_items + ((w, Bot()),)), w)}
            else:
                interp = interpolant([[(w, Bot())]])
                mi = {flat([(w, Bot())]): _top_leaf(_mk(atoms, left_items + ((w, Bot()),)), w)}
                mii = {flat([(w, Top())]): _top_leaf(_mk(atoms, right_items + ((w, Top()),)), w)}
            return interp, mi, mii

        name = node.principal[1].name
        if rp and rn:  # both in the right part: top
            interp = interpolant([[(w, Top())]])
            mi = {flat([(w, Top())]): _top_leaf(_mk(atoms, left_items + ((w, Top()),)), w)}
            mii = {flat([(w, Bot())]): _id_leaf(_mk(atoms, right_items + ((w, Bot()),)), w, name)}
        elif ln and rp:  # negative left, positive right: the literal itself
            interp = interpolant([[(w, pos)]])
            mi = {flat([(w, pos)]): _id_leaf(_mk(atoms, left_items + ((w, pos),)), w, name)}
            mii = {flat([(w, neg)]): _id_leaf(_mk(atoms, right_items + ((w, neg),)), w, name)}
        elif lp and rn:  # positive left, negative right: the negated literal
            interp = interpolant([[(w, neg)]])
            mi = {flat([(w, neg)]): _id_leaf(_mk(atoms, left_items + ((w, neg),)), w, name)}
            mii = {flat([(w, pos)]): _id_leaf(_mk(atoms, right_items + ((w, pos),)), w, name)}
        elif lp and ln:  # both in the left part: bot
            interp = interpolant([[(w, Bot())]])
            mi = {flat([(w, Bot())]): _id_leaf(_mk(atoms, left_items + ((w, Bot()),)), w, name)}
            mii = {flat([(w, Top())]): _top_leaf(_mk(atoms, right_items + ((w, Top()),)), w)}
        else:
            raise PartitionMismatch("closing pair not covered by the partition")
        return interp, mi, mii

    w, f = node.principal
    if right[(w, f)] > 0:
        return _annotate_right(node, left, right)

    if left[(w, f)] <= 0:
        raise PartitionMismatch(f"principal {fmt(f)} at w{w} is on neither side")
    # Left-hand analyzed formula: flip, combine on the right, flip back.
    inner_i, mi_flip, mii_flip = _annotate_right(node, right, left)
    interp = orthogonal(inner_i)
    mi = {x: mii_flip[x] for x in interp}
    mii = {}
    for theta in orthogonal(interp):
        delta = next(d for d in sorted(inner_i, key=_skey) if set(d) <= set(theta))
        target = _mk(atoms, tuple(theta) + right_items)
        mii[theta] = weaken_to(mi_flip[delta], target)
    return interp, mi, mii


def _annotate_right(node: GProof, left: Counter, right: Counter):
    """Combine premise interpolants when the analyzed formula is on the right."""
    atoms = node.conclusion.atoms
    w, f = node.principal
    right_items = tuple(sorted(right.elements(), key=_fkey))
    left_items = tuple(sorted(left.elements(), key=_fkey))

    def extend(premise_node, parts):
        added = _added_formulas(premise_node.conclusion, node.conclusion)
        if added != Counter(parts):
            raise InvalidProof("premise does not add the expected formulas")
        return right + Counter(parts)

    if node.rule == "OrR":
        parts = [(w, f.left), (w, f.right)]
        sub_i, sub_mi, sub_mii = _annotate(node.premises[0], left, extend(node.premises[0], parts))
        mii = {}
        for theta, proof in sub_mii.items():
            conclusion = _mk(atoms, tuple(theta) + right_items)
            mii[theta] = _attach_or(proof, w, f.left, f.right, conclusion)
        return sub_i, dict(sub_mi), mii

    if node.rule == "AndR":
        i1, mi1, mii1 = _annotate(node.premises[0], left,
                                  extend(node.premises[0], [(w, f.left)]))
        i2, mi2, mii2 = _annotate(node.premises[1], left,
                                  extend(node.premises[1], [(w, f.right)]))
        interp = i1 | i2
        mi = {x: (mi1.get(x) or mi2.get(x)) for x in interp}
        mii = {}
        for theta in orthogonal(interp):
            t1 = next(d for d in sorted(orthogonal(i1), key=_skey) if set(d) <= set(theta))
            t2 = next(d for d in sorted(orthogonal(i2), key=_skey) if set(d) <= set(theta))
            conclusion = _mk(atoms, tuple(theta) + right_items)
            mii[theta] = _attach_and(mii1[t1], mii2[t2], w, f.left, f.right, conclusion)
        return interp, mi, mii

    if node.rule == "BoxR":
        u = node.fresh
        sub_i, sub_mi, sub_mii = _annotate(
            node.premises[0], left, extend(node.premises[0], [(u, f.body)]))
        interp = boxed(sub_i, f.char, w, u)
        # A boxed sequent may collapse several premise sequents; keep them all,
        # as an orthogonal choice must pick one formula from every source.
        sources = {}
        for s in sorted(sub_i, key=_skey):
            block = tuple(g for (lab, g) in s if lab == u)
            rest = tuple((lab, g) for (lab, g) in s if lab != u)
            key = flat(rest + ((w, GBox(f.char, or_fold(block))),))
            sources.setdefault(key, []).append((s, rest, block))

        premise_atoms = node.premises[0].conclusion.atoms
        mi = {}
        for x in interp:
            source, rest, block = sources[x][0]
            proof = sub_mi[source]
            dis = or_fold(block)
            if not block:
                proof = weaken_to(proof, proof.conclusion.add_formulas([(u, Bot())]))
            else:
                items = list(block)
                while len(items) > 1:
                    a, b = items[-2], items[-1]
                    conclusion = _mk(premise_atoms,
                                     left_items + rest + tuple((u, g) for g in items[:-2])
                                     + ((u, Or(a, b)),))
                    proof = _attach_or(proof, u, a, b, conclusion)
                    items = items[:-2] + [Or(a, b)]
            conclusion = _mk(atoms, left_items + rest + ((w, GBox(f.char, dis)),))
            mi[x] = _attach_box(proof, f.char, w, u, dis, conclusion)

        mii = {}
        boxed_elems = {x: (w, GBox(f.char, or_fold(sources[x][0][2]))) for x in interp}
        for sigma in itertools.product(*(sorted(s, key=_fkey)
                                          for s in sorted(interp, key=_skey))):
            theta = flat((lab, negate(g)) for (lab, g) in sigma)
            if theta in mii:
                continue
            jobs, base_choice = [], {}
            for x, chosen in zip(sorted(interp, key=_skey), sigma):
                if chosen == boxed_elems[x]:
                    jobs.extend(sources[x])
                else:
                    for (src, _, _) in sources[x]:
                        base_choice[src] = chosen
            # Empty eigenvariable blocks close by the top rule and discharge
            # everything else, so handle them first.
            jobs.sort(key=lambda job: (len(job[2]) > 0, _skey(job[0])))
            mii[theta] = _boxed_orth_proof(
                node, sub_mii, jobs, base_choice, theta, right_items, u, f)
        return interp, mi, mii

    if node.rule == "PrDia":
        t = node.target
        sub_i, sub_mi, sub_mii = _annotate(
            node.premises[0], left, extend(node.premises[0], [(t, f.body)]))
        mii = {}
        for theta, proof in sub_mii.items():
            conclusion = _mk(atoms, tuple(theta) + right_items)
            mii[theta] = _attach_prdia(proof, f.char, w, t, f.body, conclusion)
        return sub_i, dict(sub_mi), mii

    raise InvalidProof(f"annotation does not know rule {node.rule!r}")


def _boxed_orth_proof(node, sub_mii, jobs, base_choice, theta, right_items, u, f):
    """One orth-side proof for a box node, per the chosen flat sequents.

    Sequents chosen at their boxed formula are rebuilt through the dual
    diamond: the premise proofs for each way of picking one formula from
    the eigenvariable block are conjoined, and the conjunction is
    propagated along the fresh edge before the box is reintroduced.
    ``jobs`` lists (source sequent, rest, block) triples still owing a
    diamond step; ``base_choice`` fixes the remaining sources' picks.
    """
    w = node.principal[0]
    premise_atoms = node.premises[0].conclusion.atoms

    def build(pending, fixed, target):
        if not pending:
            choice = dict(base_choice)
            choice.update(fixed)
            theta_inner = flat((lab, negate(g)) for (lab, g) in choice.values())
            return weaken_to(sub_mii[theta_inner], target)
        src, _, block = pending[0]
        conj = and_fold([negate(g) for g in block])
        if not block:
            inner = _top_leaf(target.add_formulas([(u, Top())]), u)
            return GProof("PrDia", target, (inner,),
                          principal=(w, GDia(f.char, Top())), target=u)
        proofs = []
        for g in block:
            sub_target = target.add_formulas([(u, negate(g))])
            proofs.append((negate(g),
                           build(pending[1:], {**fixed, src: (u, g)}, sub_target)))
        acc_formula, acc = proofs[-1]
        for (a, proof_a) in reversed(proofs[:-1]):
            combined = And(a, acc_formula)
            acc = _attach_and(proof_a, acc, u, a, acc_formula,
                              target.add_formulas([(u, combined)]))
            acc_formula = combined
        assert acc_formula == conj
        premise = weaken_to(acc, target.add_formulas([(u, conj)]))
        return GProof("PrDia", target, (premise,),
                      principal=(w, GDia(f.char, conj)), target=u)

    top_target = _mk(premise_atoms, tuple(theta) + right_items + ((u, f.body),))
    top = build(jobs, {}, top_target)
    conclusion = _mk(node.conclusion.atoms, tuple(theta) + right_items)
    return _attach_box(top, f.char, w, u, f.body, conclusion)


def annotate(system: CfcstSystem, proof: GProof, left_items, right_items):
    """Replay a checked proof under a partition of its end sequent.

    Returns the annotated derivation tree and the end interpolant.  The
    two item collections must together be the end sequent's formula
    multiset.
    """
    check_proof(system, proof)
    left, right = Counter(left_items), Counter(right_items)
    if left + right != Counter(proof.conclusion.formulas):
        raise PartitionMismatch("partition does not cover the end sequent")
    interp, mi, mii = _annotate(proof, left, right)

    def tree(node, l, r):
        children = []
        for premise in node.premises:
            added = Counter(premise.conclusion.formulas) - Counter(node.conclusion.formulas)
            wf = node.principal
            if r[wf] > 0:
                children.append(tree(premise, l, r + added))
            else:
                children.append(tree(premise, l + added, r))
        return InterpNode(node.conclusion, tuple(sorted(l.elements(), key=_fkey)),
                          tuple(sorted(r.elements(), key=_fkey)), interp,
                          tuple(children))

    return tree(proof, left, right), interp, mi, mii


# ---------------------------------------------------------------------------
# End-to-end interpolation.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InterpolationResult:
    chi: Formula
    left_proof: GProof   # of  |- w0: negate(phi), w0: chi
    right_proof: GProof  # of  |- w0: negate(chi), w0: psi


@dataclass(frozen=True)
class NotDerivable:
    counter_model: object
    world: object


def _assemble_left(interp, mi, phi_item) -> GProof:
    """Fold the per-sequent proofs into one proof of |- negate(phi), chi."""
    w = 0
    seqs = sorted(interp, key=_skey)
    if not seqs:
        return _top_leaf(_mk((), (phi_item, (w, Top()))), w)
    folded = []
    for s in seqs:
        proof = mi[s]
        items = [g for (_, g) in s]
        if not items:
            proof = weaken_to(proof, proof.conclusion.add_formulas([(w, Bot())]))
        while len(items) > 1:
            a, b = items[-2], items[-1]
            conclusion = _mk((), (phi_item,) + tuple((w, g) for g in items[:-2])
                             + ((w, Or(a, b)),))
            proof = _attach_or(proof, w, a, b, conclusion)
            items = items[:-2] + [Or(a, b)]
        folded.append((or_fold([g for (_, g) in s]), proof))
    acc_formula, acc = folded[-1]
    for (a, proof_a) in reversed(folded[:-1]):
        combined = And(a, acc_formula)
        conclusion = _mk((), (phi_item, (w, combined)))
        acc = _attach_and(proof_a, acc, w, a, acc_formula, conclusion)
        acc_formula = combined
    return acc


def _assemble_right(interp, mii, psi_item) -> GProof:
    """Fold the orthogonal proofs into one proof of |- negate(chi), psi.

    negate(chi) is the disjunction over flat sequents of the conjunction
    of their negated formulas; the recursion builds each conjunction from
    the orthogonal proofs and introduces the disjunction suffix by
    suffix, mirroring the shape that ``interpolant_formula`` produces.
    """
    w = 0
    seqs = sorted(interp, key=_skey)
    if not seqs:
        base = mii[()]
        return weaken_to(base, base.conclusion.add_formulas([(w, Bot())]))

    tails = {len(seqs) - 1: and_fold([negate(g) for (_, g) in seqs[-1]])}
    for i in range(len(seqs) - 2, -1, -1):
        tails[i] = Or(and_fold([negate(g) for (_, g) in seqs[i]]), tails[i + 1])

    def build(i, fixed):
        negs = tuple((w, negate(g)) for g in fixed)
        base = negs + (psi_item,)
        last = i == len(seqs) - 1
        ctx = base if last else base + ((w, tails[i + 1]),)
        items = [g for (_, g) in seqs[i]]
        conj = and_fold([negate(g) for g in items])
        if not items:
            folded = _top_leaf(_mk((), ctx + ((w, Top()),)), w)
        else:
            proofs = []
            for g in items:
                if last:
                    theta = flat((w, negate(h)) for h in fixed + [g])
                    sub = weaken_to(mii[theta], _mk((), ctx + ((w, negate(g)),)))
                else:
                    sub = build(i + 1, fixed + [g])
                proofs.append((negate(g), sub))
            acc_formula, acc = proofs[-1]
            for (a, proof_a) in reversed(proofs[:-1]):
                combined = And(a, acc_formula)
                acc = _attach_and(proof_a, acc, w, a, acc_formula,
                                  _mk((), ctx + ((w, combined),)))
                acc_formula = combined
            folded = acc
            assert acc_formula == conj
        if last:
            return folded
        return _attach_or(folded, w, conj, tails[i + 1],
                          _mk((), base + ((w, tails[i]),)))

    return build(0, [])


def lyndon_interpolate(system: CfcstSystem, phi: Formula, psi: Formula,
                       budget: Budget | None = None):
    """Interpolant with both implication witnesses, or NotDerivable/Unknown."""
    for g in (phi, psi):
        if family(g) not in (None, GRAMMAR):
            raise ValueError("interpolation expects grammar-family formulas")
    end = sequent(formulas=[(0, negate(phi)), (0, psi)])
    res = prove_sequent(system, end, budget)
    if isinstance(res, Refuted):
        return NotDerivable(res.model, res.world)
    if isinstance(res, Unknown):
        return res
    proof = res.proof
    _, interp, mi, mii = annotate(system, proof, [(0, negate(phi))], [(0, psi)])
    for s in interp:
        for (lab, _) in s:
            assert lab == 0, "interpolant uses a label outside the end sequent"
    chi = interpolant_formula(interp, 0)

    left_proof = _assemble_left(interp, mi, (0, negate(phi)))
    right_proof = _assemble_right(interp, mii, (0, psi))
    check_proof(system, left_proof)
    check_proof(system, right_proof)
    assert left_proof.conclusion == sequent(formulas=[(0, negate(phi)), (0, chi)])
    assert right_proof.conclusion == sequent(formulas=[(0, negate(chi)), (0, psi)])

    lits = interpolant_literals(interp)
    assert lits <= (literals(phi) & literals(psi)), "polarity condition violated"
    return InterpolationResult(chi, left_proof, right_proof)
