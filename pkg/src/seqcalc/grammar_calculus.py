"""Refined labelled calculus for the grammar family.

Rules: Id and TopR close a branch; OrR/AndR decompose at a label; BoxR
introduces a fresh successor; PrDia copies a diamond's body to any label
reachable by a propagation path whose string lies in the language of the
diamond's character.  The checker accepts both plain rule instances and
contraction-absorbed ones (premise keeps the analyzed formula), since
the bounded prover always retains principals.

``prove_bounded`` is a saturation-style backward search.  The logic is
undecidable in general, so the search is honest about its limits: it
returns Valid with a checkable proof, Refuted with a model that has been
saturated and re-checked to falsify the input, or Unknown.

Labelled tree sequents translate to nested sequents and back
(``to_nested``/``to_labelled``); whole proofs translate node by node,
and ``flip_atom`` realizes the residuation step that replaces an atom
R_x(w,u) by R_x'(u,w) throughout a proof.
"""
from __future__ import annotations

import sys
from dataclasses import dataclass

from .grammar import CfcstSystem, PathWitness, reachability_index
from .semantics import SigmaModel, check_sigma, saturate, sigma_model
from .sequents import (GRel, LabelAllocator, LabelledSequent, NotTree, classify,
                       propagation_graph, root_of, sequent, sequent_graph,
                       sequent_to_json, sequent_from_json)
from .syntax import (And, Bot, Character, Formula, GBox, GDia, Lit, Or, Top,
                     family, fmt, formula_key, parse_character, parse_formula,
                     GRAMMAR)


class InvalidProof(ValueError):
    def __init__(self, message, path=()):
        super().__init__(f"{message} (at node {'/'.join(map(str, path)) or 'root'})")
        self.path = path


class WrongShape(InvalidProof):
    pass


class EigenvariableClash(InvalidProof):
    pass


class SideConditionFails(InvalidProof):
    pass


class LeafNotInitial(InvalidProof):
    pass


class NotTreeProof(InvalidProof):
    pass


class AtomNotFound(ValueError):
    pass


@dataclass(frozen=True)
class GProof:
    rule: str  # Id | TopR | OrR | AndR | BoxR | PrDia
    conclusion: LabelledSequent
    premises: tuple = ()
    principal: tuple | None = None  # (label, Formula)
    fresh: int | None = None        # BoxR eigenvariable
    target: int | None = None       # PrDia target label
    path: PathWitness | None = None  # PrDia witness, optional

    def nodes(self):
        yield self
        for p in self.premises:
            yield from p.nodes()

    def end_sequent(self) -> LabelledSequent:
        return self.conclusion


def _with_parts(seq: LabelledSequent, principal, parts, drop_principal: bool):
    formulas = list(seq.formulas)
    if drop_principal:
        formulas.remove(principal)
    return LabelledSequent.make(seq.atoms, formulas + list(parts))


def _premise_matches(premise, conclusion, principal, parts, extra_atoms=()):
    """True if premise is the rule's premise with the principal kept or consumed."""
    for drop in (False, True):
        formulas = list(conclusion.formulas)
        if drop:
            formulas.remove(principal)
        want = LabelledSequent.make(tuple(conclusion.atoms) + tuple(extra_atoms),
                                    formulas + list(parts))
        if premise == want:
            return True
    return False


def check_proof(system: CfcstSystem, proof: GProof, _path=()) -> None:
    """Raise InvalidProof (with the offending node's path) unless every node checks."""
    seq = proof.conclusion
    rule = proof.rule
    if rule == "Id":
        if proof.premises:
            raise WrongShape("Id takes no premises", _path)
        w, lit = proof.principal or (None, None)
        if not isinstance(lit, Lit) or not seq.has(w, lit) \
                or not seq.has(w, Lit(lit.name, not lit.positive)):
            raise LeafNotInitial("no dual literal pair at the stated label", _path)
        return
    if rule == "TopR":
        if proof.premises:
            raise WrongShape("TopR takes no premises", _path)
        w, f = proof.principal or (None, None)
        if not isinstance(f, Top) or not seq.has(w, f):
            raise LeafNotInitial("no top at the stated label", _path)
        return

    if proof.principal is None or not seq.has(*proof.principal):
        raise WrongShape(f"{rule}: principal formula missing from conclusion", _path)
    w, f = proof.principal

    if rule == "OrR":
        if not isinstance(f, Or) or len(proof.premises) != 1:
            raise WrongShape("OrR wants one premise and an Or principal", _path)
        if not _premise_matches(proof.premises[0].conclusion, seq, (w, f),
                                [(w, f.left), (w, f.right)]):
            raise WrongShape("OrR premise does not decompose the principal", _path)
    elif rule == "AndR":
        if not isinstance(f, And) or len(proof.premises) != 2:
            raise WrongShape("AndR wants two premises and an And principal", _path)
        left, right = (p.conclusion for p in proof.premises)
        if not (_premise_matches(left, seq, (w, f), [(w, f.left)])
                and _premise_matches(right, seq, (w, f), [(w, f.right)])):
            raise WrongShape("AndR premises do not decompose the principal", _path)
    elif rule == "BoxR":
        if not isinstance(f, GBox) or len(proof.premises) != 1:
            raise WrongShape("BoxR wants one premise and a box principal", _path)
        u = proof.fresh
        if u is None or u in seq.labels():
            raise EigenvariableClash("BoxR label is not fresh", _path)
        if not _premise_matches(proof.premises[0].conclusion, seq, (w, f),
                                [(u, f.body)], extra_atoms=[GRel(f.char, w, u)]):
            raise WrongShape("BoxR premise shape is wrong", _path)
    elif rule == "PrDia":
        if not isinstance(f, GDia) or len(proof.premises) != 1:
            raise WrongShape("PrDia wants one premise and a diamond principal", _path)
        u = proof.target
        premise = proof.premises[0].conclusion
        want = seq.add_formulas([(u, f.body)])
        if premise != want:
            raise WrongShape("PrDia premise must add exactly the propagated body", _path)
        pg = propagation_graph(seq)
        idx = reachability_index(pg.vertices, pg.edges, system)
        wit = idx.query(f.char, w, u)
        if wit is None:
            raise SideConditionFails(
                f"no {f.char}-language path from w{w} to w{u}", _path)
        if proof.path is not None:
            if proof.path.source != w or proof.path.target != u \
                    or any(s not in pg.edges for s in proof.path.steps()):
                raise SideConditionFails("stored path witness is not in the graph", _path)
    else:
        raise WrongShape(f"unknown rule {rule!r}", _path)

    for i, p in enumerate(proof.premises):
        check_proof(system, p, _path + (i,))


# ---------------------------------------------------------------------------
# Bounded backward proof search.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Valid:
    proof: GProof


@dataclass(frozen=True)
class Refuted:
    model: SigmaModel
    world: object


@dataclass(frozen=True)
class Unknown:
    reason: str


@dataclass
class Budget:
    max_labels: int = 24
    max_steps: int = 4000


class _Exhausted(Exception):
    pass


class _GSearch:
    def __init__(self, system: CfcstSystem, budget: Budget, allocator: LabelAllocator):
        self.system = system
        self.budget = budget
        self.alloc = allocator
        self.steps = 0

    def spend(self):
        self.steps += 1
        if self.steps > self.budget.max_steps:
            raise _Exhausted

    def fresh(self):
        if self.alloc.next_label >= self.budget.max_labels:
            raise _Exhausted
        return self.alloc.fresh()

    def index(self, seq):
        pg = propagation_graph(seq)
        return reachability_index(pg.vertices, pg.edges, self.system)

    def search(self, seq: LabelledSequent):
        """Returns ('proof', GProof) or ('stable', sequent)."""
        for (w, f) in seq.formulas:
            if isinstance(f, Lit) and seq.has(w, Lit(f.name, not f.positive)):
                lit = f if f.positive else Lit(f.name)
                return "proof", GProof("Id", seq, principal=(w, lit))
            if isinstance(f, Top):
                return "proof", GProof("TopR", seq, principal=(w, f))

        for (w, f) in seq.formulas:
            if isinstance(f, Or) and not (seq.has(w, f.left) and seq.has(w, f.right)):
                self.spend()
                premise = seq.add_formulas([(w, f.left), (w, f.right)])
                kind, sub = self.search(premise)
                if kind != "proof":
                    return kind, sub
                return "proof", GProof("OrR", seq, (sub,), principal=(w, f))

        for (w, f) in seq.formulas:
            if isinstance(f, And) and not (seq.has(w, f.left) or seq.has(w, f.right)):
                self.spend()
                kind, left = self.search(seq.add_formulas([(w, f.left)]))
                if kind != "proof":
                    return kind, left
                kind, right = self.search(seq.add_formulas([(w, f.right)]))
                if kind != "proof":
                    return kind, right
                return "proof", GProof("AndR", seq, (left, right), principal=(w, f))

        pg = propagation_graph(seq)
        for (w, f) in seq.formulas:
            if isinstance(f, GBox):
                if any((w, u, f.char) in pg.edges and seq.has(u, f.body)
                       for u in pg.vertices):
                    continue
                self.spend()
                u = self.fresh()
                premise = seq.add_atoms([GRel(f.char, w, u)]).add_formulas([(u, f.body)])
                kind, sub = self.search(premise)
                if kind != "proof":
                    return kind, sub
                return "proof", GProof("BoxR", seq, (sub,), principal=(w, f), fresh=u)

        idx = self.index(seq)
        for (w, f) in seq.formulas:
            if isinstance(f, GDia):
                for u in idx.targets(f.char, w):
                    if seq.has(u, f.body):
                        continue
                    self.spend()
                    premise = seq.add_formulas([(u, f.body)])
                    kind, sub = self.search(premise)
                    if kind != "proof":
                        return kind, sub
                    return "proof", GProof("PrDia", seq, (sub,), principal=(w, f),
                                           target=u, path=idx.query(f.char, w, u))

        return "stable", seq


def counter_model(system: CfcstSystem, seq: LabelledSequent) -> SigmaModel:
    """Model read off a stable sequent, then saturated under the system."""
    worlds = seq.labels() or {0}
    relations = {}
    for a in seq.atoms:
        if isinstance(a, GRel):
            relations.setdefault(a.char, set()).add((a.src, a.dst))
    atoms = {f.name for (_, f) in seq.formulas if isinstance(f, Lit)}
    valuation = {p: {w for (w, f) in seq.formulas
                     if isinstance(f, Lit) and not f.positive and f.name == p}
                 for p in atoms}
    return saturate(system, sigma_model(worlds, relations, valuation))


def prove_sequent(system: CfcstSystem, seq: LabelledSequent,
                  budget: Budget | None = None, root: int = 0):
    budget = budget or Budget()
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))
    search = _GSearch(system, budget, LabelAllocator.above(seq))
    try:
        kind, result = search.search(seq)
    except _Exhausted:
        return Unknown("budget exhausted")
    if kind == "proof":
        check_proof(system, result)
        return Valid(result)
    model = counter_model(system, result)
    if all(not check_sigma(model, w, f) for (w, f) in seq.formulas):
        return Refuted(model, root)
    return Unknown("stable sequent not falsifying after saturation")


def prove_bounded(system: CfcstSystem, f: Formula, budget: Budget | None = None):
    """Valid(proof) / Refuted(model, world) / Unknown for one formula at a root label."""
    if family(f) not in (None, GRAMMAR):
        raise ValueError("prove_bounded expects a grammar-family formula")
    return prove_sequent(system, sequent(formulas=[(0, f)]), budget, root=0)


# ---------------------------------------------------------------------------
# Nested sequents and proof translation.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NestedSequent:
    formulas: tuple  # sorted
    children: tuple  # ordered (Character, NestedSequent) pairs

    def __str__(self) -> str:
        return render_nested(self)


def nested(formulas=(), children=()) -> NestedSequent:
    return NestedSequent(tuple(sorted(formulas, key=formula_key)), tuple(children))


def render_nested(x: NestedSequent) -> str:
    parts = [fmt(f) for f in x.formulas]
    parts += [f"({c}){{{render_nested(sub)}}}" for (c, sub) in x.children]
    return ", ".join(parts)


def _children_of(seq: LabelledSequent, v):
    out = []
    for a in seq.atoms:
        if isinstance(a, GRel) and a.src == v:
            out.append((a.dst, a.char))
    return sorted(out)  # child label order = creation order


def to_nested(seq: LabelledSequent) -> NestedSequent:
    """Nested form of a labelled tree sequent (NotTree otherwise)."""
    root = root_of(seq)

    def build(v):
        return NestedSequent(tuple(sorted(seq.at(v), key=formula_key)),
                             tuple((c, build(u)) for (u, c) in _children_of(seq, v)))

    return build(root)


def to_labelled(x: NestedSequent, allocator: LabelAllocator | None = None) -> LabelledSequent:
    """Labelled form of a nested sequent; labels are allocated in DFS preorder."""
    alloc = allocator or LabelAllocator()
    atoms, formulas = [], []

    def build(node, v):
        formulas.extend((v, f) for f in node.formulas)
        for (c, sub) in node.children:
            u = alloc.fresh()
            atoms.append(GRel(c, v, u))
            build(sub, u)

    build(x, alloc.fresh())
    return LabelledSequent.make(atoms, formulas)


def _address_map(seq: LabelledSequent):
    """label -> address (child-index path) in the nested form of a tree sequent."""
    root = root_of(seq)
    out = {}

    def walk(v, addr):
        out[v] = addr
        for i, (u, _) in enumerate(_children_of(seq, v)):
            walk(u, addr + (i,))

    walk(root, ())
    return out


@dataclass(frozen=True)
class NestedProof:
    rule: str
    conclusion: NestedSequent
    premises: tuple = ()
    principal_addr: tuple | None = None
    principal: Formula | None = None
    target_addr: tuple | None = None

    def nodes(self):
        yield self
        for p in self.premises:
            yield from p.nodes()


def proof_to_nested(proof: GProof) -> NestedProof:
    """Node-by-node notation change; every sequent in the proof must be a tree."""
    for node in proof.nodes():
        if classify(node.conclusion) != "tree":
            raise NotTreeProof("proof contains a non-tree sequent")

    def conv(node: GProof) -> NestedProof:
        addr = _address_map(node.conclusion)
        w, f = node.principal
        return NestedProof(
            rule=node.rule,
            conclusion=to_nested(node.conclusion),
            premises=tuple(conv(p) for p in node.premises),
            principal_addr=addr[w],
            principal=f,
            target_addr=addr[node.target] if node.rule == "PrDia" else None,
        )

    return conv(proof)


def _node_at(x: NestedSequent, addr):
    for i in addr:
        x = x.children[i][1]
    return x


def proof_to_labelled(np: NestedProof) -> GProof:
    """Inverse notation change; fresh labels are re-allocated deterministically."""
    alloc = LabelAllocator()
    root_map = {}

    def allocate(node, addr):
        root_map[addr] = alloc.fresh()
        for i, (_, sub) in enumerate(node.children):
            allocate(sub, addr + (i,))

    allocate(np.conclusion, ())

    def realize(node: NestedSequent, addr, amap):
        atoms, formulas = [], []

        def build(n, a):
            v = amap[a]
            formulas.extend((v, f) for f in n.formulas)
            for i, (c, sub) in enumerate(n.children):
                atoms.append(GRel(c, v, amap[a + (i,)]))
                build(sub, a + (i,))

        build(node, addr)
        return LabelledSequent.make(atoms, formulas)

    def conv(node: NestedProof, amap) -> GProof:
        seq = realize(node.conclusion, (), amap)
        w = amap[node.principal_addr]
        fresh = target = None
        if node.rule == "BoxR":
            parent = _node_at(node.conclusion, node.principal_addr)
            new_addr = node.principal_addr + (len(parent.children),)
            amap = dict(amap)
            amap[new_addr] = fresh = alloc.fresh()
        elif node.rule == "PrDia":
            target = amap[node.target_addr]
        premises = tuple(conv(p, amap) for p in node.premises)
        return GProof(node.rule, seq, premises, principal=(w, node.principal),
                      fresh=fresh, target=target)

    return conv(np, root_map)


def flip_atom(proof: GProof, atom: GRel) -> GProof:
    """Replace R_x(w,u) by R_x'(u,w) everywhere; propagation graphs are unchanged."""
    if atom not in proof.conclusion.atoms:
        raise AtomNotFound(f"{atom} does not occur in the end sequent")
    flipped = GRel(atom.char.conv, atom.dst, atom.src)

    def conv(node: GProof) -> GProof:
        atoms = [flipped if a == atom else a for a in node.conclusion.atoms]
        seq = LabelledSequent.make(atoms, node.conclusion.formulas)
        return GProof(node.rule, seq, tuple(conv(p) for p in node.premises),
                      principal=node.principal, fresh=node.fresh,
                      target=node.target, path=None)

    return conv(proof)


# ---------------------------------------------------------------------------
# Proof surgery: label substitution and admissible weakening.  Weakening
# first renames any box eigenvariable that collides with the added
# material (eigenvariables occur only above their introduction, so the
# renaming is local to that subtree).
# ---------------------------------------------------------------------------


def proof_labels(proof: GProof) -> set:
    out = set()
    for node in proof.nodes():
        out |= node.conclusion.labels()
        if node.fresh is not None:
            out.add(node.fresh)
    return out


def subst_proof(proof: GProof, mapping: dict) -> GProof:
    def m(v):
        return mapping.get(v, v)

    def conv_atom(a):
        return GRel(a.char, m(a.src), m(a.dst))

    def conv(node: GProof) -> GProof:
        seq = LabelledSequent.make(
            [conv_atom(a) for a in node.conclusion.atoms],
            [(m(w), f) for (w, f) in node.conclusion.formulas])
        path = node.path
        if path is not None:
            path = PathWitness(tuple(m(v) for v in path.vertices), path.chars)
        principal = (m(node.principal[0]), node.principal[1]) if node.principal else None
        return GProof(node.rule, seq, tuple(conv(p) for p in node.premises),
                      principal=principal,
                      fresh=m(node.fresh) if node.fresh is not None else None,
                      target=m(node.target) if node.target is not None else None,
                      path=path)

    return conv(proof)


def weaken_proof(proof: GProof, extra_atoms=(), extra_formulas=()) -> GProof:
    extra_atoms = tuple(extra_atoms)
    extra_formulas = tuple(extra_formulas)
    forbidden = {w for (w, _) in extra_formulas}
    for a in extra_atoms:
        forbidden |= {a.src, a.dst}
    alloc = LabelAllocator(max(proof_labels(proof) | forbidden, default=-1) + 1)

    def rename(node: GProof) -> GProof:
        premises = tuple(rename(p) for p in node.premises)
        fresh = node.fresh
        if node.rule == "BoxR" and fresh in forbidden:
            new = alloc.fresh()
            premises = tuple(subst_proof(p, {fresh: new}) for p in premises)
            fresh = new
        return GProof(node.rule, node.conclusion, premises,
                      principal=node.principal, fresh=fresh,
                      target=node.target, path=node.path)

    def widen(node: GProof) -> GProof:
        seq = node.conclusion.add_atoms(extra_atoms).add_formulas(extra_formulas)
        return GProof(node.rule, seq, tuple(widen(p) for p in node.premises),
                      principal=node.principal, fresh=node.fresh,
                      target=node.target, path=node.path)

    return widen(rename(proof))


def weaken_to(proof: GProof, target: LabelledSequent) -> GProof:
    """Weaken a proof so its end sequent becomes exactly ``target``."""
    from collections import Counter
    have, want = proof.conclusion, target
    atom_diff = Counter(want.atoms) - Counter(have.atoms)
    formula_diff = Counter(want.formulas) - Counter(have.formulas)
    assert not (Counter(have.atoms) - Counter(want.atoms)), "target drops atoms"
    assert not (Counter(have.formulas) - Counter(want.formulas)), "target drops formulas"
    if not atom_diff and not formula_diff:
        return proof
    out = weaken_proof(proof, tuple(atom_diff.elements()), tuple(formula_diff.elements()))
    assert out.conclusion == target
    return out


# ---------------------------------------------------------------------------
# JSON forms of proofs.
# ---------------------------------------------------------------------------


def gproof_to_json(proof: GProof) -> dict:
    out = {
        "family": "grammar",
        "rule": proof.rule,
        "conclusion": sequent_to_json(proof.conclusion),
        "premises": [gproof_to_json(p) for p in proof.premises],
    }
    if proof.principal is not None:
        w, f = proof.principal
        out["principal"] = {"label": f"w{w}", "formula": fmt(f)}
    witness = {}
    if proof.fresh is not None:
        witness["fresh"] = f"w{proof.fresh}"
    if proof.target is not None:
        witness["target"] = f"w{proof.target}"
    if proof.path is not None:
        witness["path"] = {"vertices": [f"w{v}" for v in proof.path.vertices],
                           "string": [str(c) for c in proof.path.chars]}
    if witness:
        out["witness"] = witness
    return out


def _label_num(name: str) -> int:
    return int(name[1:])


def gproof_from_json(data: dict) -> GProof:
    principal = None
    if "principal" in data:
        principal = (_label_num(data["principal"]["label"]),
                     parse_formula(data["principal"]["formula"]))
    witness = data.get("witness", {})
    path = None
    if "path" in witness:
        path = PathWitness(tuple(_label_num(v) for v in witness["path"]["vertices"]),
                           tuple(parse_character(c) for c in witness["path"]["string"]))
    return GProof(
        rule=data["rule"],
        conclusion=sequent_from_json(data["conclusion"]),
        premises=tuple(gproof_from_json(p) for p in data.get("premises", ())),
        principal=principal,
        fresh=_label_num(witness["fresh"]) if "fresh" in witness else None,
        target=_label_num(witness["target"]) if "target" in witness else None,
        path=path,
    )
