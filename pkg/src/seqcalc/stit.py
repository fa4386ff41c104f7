"""Decision procedure for the single-agent deontic choice logic.

Backward proof search over labelled forest sequents.  A branch closes on
a dual pair (or a top); otherwise blocking conditions are checked in a
fixed order -- disjunction/conjunction saturation, realization of the
settledness/choice/obligation boxes (each creating one fresh label),
propagation of the three diamonds, ideal-witness creation, and finally
choice-count reduction when the agent has at most k > 0 choices.  A
sequent meeting every blocking condition is stable: search stops and a
finite counter-model is read straight off the sequent.

Every verdict is verified before being returned: Proved re-checks the
assembled proof, Refuted validates the model's frame conditions and
confirms the input formula fails at the root world.  Termination is a
theorem of the calculus, so running out of patience here is a bug, not
an outcome; the search carries assertions for the measures that make
the theorem true (label counts bounded by subformula counts, one
propagation per formula/target pair, choice-tree count strictly
decreasing under branching).
"""
from __future__ import annotations

import sys
from dataclasses import dataclass

from .semantics import DsModel, check_ds, ds_model, validate_ds
from .sequents import (CRel, Ideal, LabelAllocator, LabelledSequent, NotForest,
                       choice_connectivity, choice_trees, classify, sequent,
                       sequent_from_json, sequent_to_json, undirected_path)
from .syntax import (And, CBox, CDia, Formula, Lit, OBox, ODia, Or, SBox, SDia,
                     Top, family, fmt, negate, parse_formula, subformulas, STIT)
from .grammar_calculus import (EigenvariableClash, InvalidProof, LeafNotInitial,
                               SideConditionFails, WrongShape, _premise_matches)


class NotStable(ValueError):
    pass


@dataclass(frozen=True)
class DsProof:
    rule: str  # Id | TopR | OrR | AndR | SBoxR | CBoxR | OBoxR |
    #            SDiaP | CDiaP | ODiaP1 | ODiaP2 | APC
    conclusion: LabelledSequent
    premises: tuple = ()
    principal: tuple | None = None  # (label, Formula)
    fresh: int | None = None
    target: int | None = None
    ideal_src: int | None = None    # ODiaP1: ideal label whose cell is targeted
    roots: tuple | None = None      # APC: the k+1 roots that were connected

    def nodes(self):
        yield self
        for p in self.premises:
            yield from p.nodes()


@dataclass(frozen=True)
class Proved:
    proof: DsProof


@dataclass(frozen=True)
class Refuted:
    model: DsModel
    world: object


@dataclass(frozen=True)
class StabilityReport:
    saturated: dict
    box_realized: dict
    choice_realized: dict
    obl_realized: dict
    dia_propagated: dict
    chdia_propagated: dict
    perm_propagated: dict
    d2_satisfied: bool
    ck_satisfied: bool
    stable: bool


def stability_report(k: int, seq: LabelledSequent) -> StabilityReport:
    """Evaluate every blocking condition literally; ``stable`` is their conjunction.

    A label carrying a dual pair (or a top, which makes the branch
    provable outright) counts as unsaturated.
    """
    if classify(seq) not in ("tree", "forest"):
        raise NotForest(f"not a labelled forest sequent: {seq}")
    labels = sorted(seq.labels())
    uf = choice_connectivity(seq.atoms)
    ideals = seq.ideal_labels()
    ideal_reach = {v for v in labels if any(uf.together(u, v) or u == v for u in ideals)}

    saturated, box_r, choice_r, obl_r = {}, {}, {}, {}
    dia_p, chdia_p, perm_p = {}, {}, {}
    for w in labels:
        fs = seq.at(w)
        saturated[w] = all(
            not seq.has(w, negate(f)) and not isinstance(f, Top)
            and (not isinstance(f, Or) or (seq.has(w, f.left) and seq.has(w, f.right)))
            and (not isinstance(f, And) or seq.has(w, f.left) or seq.has(w, f.right))
            for f in fs)
        box_r[w] = all(any(seq.has(u, f.body) for u in labels)
                       for f in fs if isinstance(f, SBox))
        choice_r[w] = all(any(seq.has(u, f.body) for u in labels
                              if u == w or uf.together(w, u))
                          for f in fs if isinstance(f, CBox))
        obl_r[w] = all(any(seq.has(u, f.body) for u in ideals)
                       for f in fs if isinstance(f, OBox))
        dia_p[w] = all(all(seq.has(u, f.body) for u in labels)
                       for f in fs if isinstance(f, SDia))
        chdia_p[w] = all(all(seq.has(u, f.body) for u in labels
                             if u == w or uf.together(w, u))
                         for f in fs if isinstance(f, CDia))
        perm_p[w] = all(all(seq.has(v, f.body) for v in ideal_reach)
                        for f in fs if isinstance(f, ODia))
    d2 = all(any(seq.has(u, f.body) for u in ideals)
             for (w, f) in seq.formulas if isinstance(f, ODia))
    ck = k == 0 or len(choice_trees(seq)) <= k
    stable = (all(saturated.values()) and all(box_r.values())
              and all(choice_r.values()) and all(obl_r.values())
              and all(dia_p.values()) and all(chdia_p.values())
              and all(perm_p.values()) and d2 and ck)
    return StabilityReport(saturated, box_r, choice_r, obl_r,
                           dia_p, chdia_p, perm_p, d2, ck, stable)


class NotApplicable(ValueError):
    pass


def apc_branches(k: int, seq: LabelledSequent):
    """Premises of one bottom-up choice-merging step.

    Applicable when the forest has more than k > 0 trees: the first k+1
    roots (creation order) are pairwise connected, one new root-to-root
    edge per branch, so every branch has one tree fewer.
    """
    if k <= 0:
        raise NotApplicable("choice bound is not positive")
    trees = choice_trees(seq)
    if len(trees) <= k:
        raise NotApplicable("at most k choice-trees, nothing to merge")
    roots = [root for (root, _) in trees][:k + 1]
    out = []
    for m in range(k):
        for j in range(m + 1, k + 1):
            branch = seq.add_atoms([CRel(roots[m], roots[j])])
            assert len(choice_trees(branch)) == len(trees) - 1
            out.append(branch)
    return roots, out


# ---------------------------------------------------------------------------
# Proof checking.
# ---------------------------------------------------------------------------


def check_ds_proof(k: int, proof: DsProof, _path=()) -> None:
    seq = proof.conclusion
    rule = proof.rule
    if rule == "Id":
        if proof.premises:
            raise WrongShape("Id takes no premises", _path)
        w, f = proof.principal or (None, None)
        if f is None or not seq.has(w, f) or not seq.has(w, negate(f)):
            raise LeafNotInitial("no dual pair at the stated label", _path)
        return
    if rule == "TopR":
        w, f = proof.principal or (None, None)
        if proof.premises or not isinstance(f, Top) or not seq.has(w, f):
            raise LeafNotInitial("no top at the stated label", _path)
        return
    if rule == "APC":
        if k <= 0:
            raise WrongShape("APC is only available for a positive choice bound", _path)
        roots = proof.roots or ()
        if len(roots) != k + 1 or len(set(roots)) != k + 1 \
                or not set(roots) <= seq.labels():
            raise WrongShape("APC wants k+1 distinct labels of the sequent", _path)
        pairs = [(m, j) for m in range(k) for j in range(m + 1, k + 1)]
        if len(proof.premises) != len(pairs):
            raise WrongShape("APC premise count is wrong", _path)
        for p, (m, j) in zip(proof.premises, pairs):
            if p.conclusion != seq.add_atoms([CRel(roots[m], roots[j])]):
                raise WrongShape(f"APC premise for pair ({m},{j}) is wrong", _path)
        for i, p in enumerate(proof.premises):
            check_ds_proof(k, p, _path + (i,))
        return

    if proof.principal is None or not seq.has(*proof.principal):
        raise WrongShape(f"{rule}: principal formula missing from conclusion", _path)
    w, f = proof.principal
    if len(proof.premises) != (2 if rule == "AndR" else 1):
        raise WrongShape(f"{rule}: wrong premise count", _path)
    premise = proof.premises[0].conclusion

    if rule == "OrR":
        if not isinstance(f, Or) or not _premise_matches(
                premise, seq, (w, f), [(w, f.left), (w, f.right)]):
            raise WrongShape("OrR premise does not decompose the principal", _path)
    elif rule == "AndR":
        right = proof.premises[1].conclusion
        if not isinstance(f, And) \
                or not _premise_matches(premise, seq, (w, f), [(w, f.left)]) \
                or not _premise_matches(right, seq, (w, f), [(w, f.right)]):
            raise WrongShape("AndR premises do not decompose the principal", _path)
    elif rule in ("SBoxR", "CBoxR", "OBoxR"):
        want_type = {"SBoxR": SBox, "CBoxR": CBox, "OBoxR": OBox}[rule]
        u = proof.fresh
        if not isinstance(f, want_type):
            raise WrongShape(f"{rule}: principal has the wrong shape", _path)
        if u is None or u in seq.labels():
            raise EigenvariableClash(f"{rule}: label is not fresh", _path)
        extra = {"SBoxR": [], "CBoxR": [CRel(w, u)], "OBoxR": [Ideal(u)]}[rule]
        if not _premise_matches(premise, seq, (w, f), [(u, f.body)], extra_atoms=extra):
            raise WrongShape(f"{rule} premise shape is wrong", _path)
    elif rule == "SDiaP":
        if not isinstance(f, SDia) or premise != seq.add_formulas([(proof.target, f.body)]):
            raise WrongShape("SDiaP premise must add exactly the propagated body", _path)
    elif rule == "CDiaP":
        if not isinstance(f, CDia) or premise != seq.add_formulas([(proof.target, f.body)]):
            raise WrongShape("CDiaP premise must add exactly the propagated body", _path)
        if not undirected_path(seq.atoms, w, proof.target):
            raise SideConditionFails("no undirected choice path to the target", _path)
    elif rule == "ODiaP1":
        u, v = proof.ideal_src, proof.target
        if not isinstance(f, ODia) or premise != seq.add_formulas([(v, f.body)]):
            raise WrongShape("ODiaP1 premise must add exactly the propagated body", _path)
        if Ideal(u) not in seq.atoms or not undirected_path(seq.atoms, u, v):
            raise SideConditionFails("target is not in an ideal label's cell", _path)
    elif rule == "ODiaP2":
        u = proof.fresh
        if not isinstance(f, ODia):
            raise WrongShape("ODiaP2: principal has the wrong shape", _path)
        if u is None or u in seq.labels():
            raise EigenvariableClash("ODiaP2: label is not fresh", _path)
        if not _premise_matches(premise, seq, (w, f), [(u, f.body)],
                                extra_atoms=[Ideal(u)]):
            raise WrongShape("ODiaP2 premise shape is wrong", _path)
    else:
        raise WrongShape(f"unknown rule {rule!r}", _path)

    for i, p in enumerate(proof.premises):
        check_ds_proof(k, p, _path + (i,))


# ---------------------------------------------------------------------------
# The search itself.
# ---------------------------------------------------------------------------

_STEP_CAP = 1_000_000  # termination is a theorem; tripping this is a bug


def _label_budget(f: Formula) -> int:
    subs = set(subformulas(f))
    roots = 1 + sum(isinstance(g, (SBox, OBox, ODia)) for g in subs)
    return roots * (1 + sum(isinstance(g, CBox) for g in subs))


class _DsSearch:
    def __init__(self, k: int, alloc: LabelAllocator, label_budget: int):
        self.k = k
        self.alloc = alloc
        self.label_budget = label_budget
        self.steps = 0

    def spend(self, seq):
        self.steps += 1
        assert self.steps <= _STEP_CAP, "search failed to terminate"
        assert classify(seq) in ("tree", "forest"), "non-forest sequent generated"
        assert len(seq.labels()) <= self.label_budget, "label budget exceeded"

    def search(self, seq: LabelledSequent):
        """Returns ('proof', DsProof) or ('stable', sequent)."""
        self.spend(seq)
        for (w, f) in seq.formulas:
            if seq.has(w, negate(f)):
                return "proof", DsProof("Id", seq, principal=(w, f))
            if isinstance(f, Top):
                return "proof", DsProof("TopR", seq, principal=(w, f))

        for (w, f) in seq.formulas:
            if isinstance(f, Or) and not (seq.has(w, f.left) and seq.has(w, f.right)):
                kind, sub = self.search(seq.add_formulas([(w, f.left), (w, f.right)]))
                if kind != "proof":
                    return kind, sub
                return "proof", DsProof("OrR", seq, (sub,), principal=(w, f))

        for (w, f) in seq.formulas:
            if isinstance(f, And) and not (seq.has(w, f.left) or seq.has(w, f.right)):
                kind, left = self.search(seq.add_formulas([(w, f.left)]))
                if kind != "proof":
                    return kind, left
                kind, right = self.search(seq.add_formulas([(w, f.right)]))
                if kind != "proof":
                    return kind, right
                return "proof", DsProof("AndR", seq, (left, right), principal=(w, f))

        labels = sorted(seq.labels())
        uf = choice_connectivity(seq.atoms)
        ideals = seq.ideal_labels()

        for (w, f) in seq.formulas:
            if isinstance(f, SBox) and not any(seq.has(u, f.body) for u in labels):
                v = self.alloc.fresh()
                premise = seq.add_formulas([(v, f.body)])
                kind, sub = self.search(premise)
                if kind != "proof":
                    return kind, sub
                return "proof", DsProof("SBoxR", seq, (sub,), principal=(w, f), fresh=v)

        for (w, f) in seq.formulas:
            if isinstance(f, CBox) and not any(
                    seq.has(u, f.body) for u in labels if u == w or uf.together(w, u)):
                v = self.alloc.fresh()
                premise = seq.add_atoms([CRel(w, v)]).add_formulas([(v, f.body)])
                kind, sub = self.search(premise)
                if kind != "proof":
                    return kind, sub
                return "proof", DsProof("CBoxR", seq, (sub,), principal=(w, f), fresh=v)

        for (w, f) in seq.formulas:
            if isinstance(f, OBox) and not any(seq.has(u, f.body) for u in ideals):
                v = self.alloc.fresh()
                premise = seq.add_atoms([Ideal(v)]).add_formulas([(v, f.body)])
                kind, sub = self.search(premise)
                if kind != "proof":
                    return kind, sub
                return "proof", DsProof("OBoxR", seq, (sub,), principal=(w, f), fresh=v)

        for (w, f) in seq.formulas:
            if isinstance(f, SDia):
                for u in labels:
                    if seq.has(u, f.body):
                        continue
                    kind, sub = self.search(seq.add_formulas([(u, f.body)]))
                    if kind != "proof":
                        return kind, sub
                    return "proof", DsProof("SDiaP", seq, (sub,), principal=(w, f),
                                            target=u)

        for (w, f) in seq.formulas:
            if isinstance(f, CDia):
                for u in labels:
                    if not (u == w or uf.together(w, u)) or seq.has(u, f.body):
                        continue
                    kind, sub = self.search(seq.add_formulas([(u, f.body)]))
                    if kind != "proof":
                        return kind, sub
                    return "proof", DsProof("CDiaP", seq, (sub,), principal=(w, f),
                                            target=u)

        for (w, f) in seq.formulas:
            if isinstance(f, ODia):
                for v in labels:
                    src = next((u for u in ideals if u == v or uf.together(u, v)), None)
                    if src is None or seq.has(v, f.body):
                        continue
                    kind, sub = self.search(seq.add_formulas([(v, f.body)]))
                    if kind != "proof":
                        return kind, sub
                    return "proof", DsProof("ODiaP1", seq, (sub,), principal=(w, f),
                                            ideal_src=src, target=v)

        for (w, f) in seq.formulas:
            if isinstance(f, ODia) and not any(seq.has(u, f.body) for u in ideals):
                v = self.alloc.fresh()
                premise = seq.add_atoms([Ideal(v)]).add_formulas([(v, f.body)])
                kind, sub = self.search(premise)
                if kind != "proof":
                    return kind, sub
                return "proof", DsProof("ODiaP2", seq, (sub,), principal=(w, f), fresh=v)

        if self.k > 0 and len(choice_trees(seq)) > self.k:
            roots, branches = apc_branches(self.k, seq)
            subs = []
            for branch in branches:
                kind, sub = self.search(branch)
                if kind != "proof":
                    return kind, sub
                subs.append(sub)
            return "proof", DsProof("APC", seq, tuple(subs), roots=tuple(roots))

        return "stable", seq


def extract_model(k: int, seq: LabelledSequent, root: int | None = None) -> DsModel:
    """Counter-model read off a stable sequent.

    Worlds are the labels, the choice relation is undirected
    connectivity, and the ideal worlds are the cells of ideal-marked
    labels when any exist, the root's cell otherwise.  The valuation
    falsifies every literal where it occurs: atoms with a positive
    occurrence are true everywhere else, atoms occurring only negatively
    are true exactly where they occur negated.
    """
    if not stability_report(k, seq).stable:
        raise NotStable(f"sequent is not stable: {seq}")
    labels = sorted(seq.labels())
    root = min(labels) if root is None else root
    uf = choice_connectivity(seq.atoms)
    choice = {(w, u) for w in labels for u in labels if w == u or uf.together(w, u)}
    ideals = seq.ideal_labels()
    if ideals:
        ideal = {v for v in labels if any(u == v or uf.together(u, v) for u in ideals)}
    else:
        ideal = {v for v in labels if v == root or uf.together(root, v)}
    names = {f.name for (_, f) in seq.formulas if isinstance(f, Lit)}
    valuation = {}
    for p in names:
        pos = {w for (w, f) in seq.formulas if f == Lit(p)}
        neg = {w for (w, f) in seq.formulas if f == Lit(p, False)}
        valuation[p] = set(labels) - pos if pos else neg
    model = ds_model(labels, choice, ideal, valuation, k)
    assert validate_ds(model) == []
    return model


def prove_ds(k: int, f: Formula):
    """Proved(proof) or Refuted(model, root world); both verified before returning."""
    if k < 0:
        raise ValueError("the choice bound must be non-negative")
    if family(f) not in (None, STIT):
        raise ValueError("prove_ds expects an agentive-family formula")
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 100000))
    seq = sequent(formulas=[(0, f)])
    search = _DsSearch(k, LabelAllocator.above(seq), _label_budget(f))
    kind, result = search.search(seq)
    if kind == "proof":
        check_ds_proof(k, result)
        for node in result.nodes():
            assert classify(node.conclusion) in ("tree", "forest")
        return Proved(result)
    model = extract_model(k, result, root=0)
    assert not check_ds(model, 0, f), "stable sequent failed to falsify the input"
    return Refuted(model, 0)


# ---------------------------------------------------------------------------
# JSON form.
# ---------------------------------------------------------------------------


def dsproof_to_json(proof: DsProof) -> dict:
    out = {
        "family": "stit",
        "rule": proof.rule,
        "conclusion": sequent_to_json(proof.conclusion),
        "premises": [dsproof_to_json(p) for p in proof.premises],
    }
    if proof.principal is not None:
        w, f = proof.principal
        out["principal"] = {"label": f"w{w}", "formula": fmt(f)}
    witness = {}
    for key in ("fresh", "target", "ideal_src"):
        value = getattr(proof, key)
        if value is not None:
            witness[key] = f"w{value}"
    if proof.roots is not None:
        witness["roots"] = [f"w{r}" for r in proof.roots]
    if witness:
        out["witness"] = witness
    return out


def dsproof_from_json(data: dict) -> DsProof:
    principal = None
    if "principal" in data:
        principal = (int(data["principal"]["label"][1:]),
                     parse_formula(data["principal"]["formula"]))
    witness = data.get("witness", {})

    def num(key):
        return int(witness[key][1:]) if key in witness else None

    return DsProof(
        rule=data["rule"],
        conclusion=sequent_from_json(data["conclusion"]),
        premises=tuple(dsproof_from_json(p) for p in data.get("premises", ())),
        principal=principal,
        fresh=num("fresh"),
        target=num("target"),
        ideal_src=num("ideal_src"),
        roots=tuple(int(r[1:]) for r in witness["roots"]) if "roots" in witness else None,
    )
