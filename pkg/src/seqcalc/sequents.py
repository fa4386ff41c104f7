"""Labelled sequents and the graphs they encode.

A labelled sequent pairs a multiset of relational atoms with a multiset
of labelled formulas.  Grammar-family sequents use character-indexed
atoms ``R_a(w,u)``; agentive sequents use the choice relation
``R_[0](w,u)`` and ideal-world marks ``I(w)``.  Labels are small
integers allocated monotonically (rendered ``w0``, ``w1``, ...), so
creation order is just numeric order.

Both multisets are kept sorted, making equality and hashing canonical:
two sequents are equal exactly when their atom and formula multisets
are.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

from .syntax import Character, Formula, formula_key, fmt, parse_formula

Label = int


class NotForest(ValueError):
    pass


class NotTree(ValueError):
    pass


@dataclass(frozen=True)
class GRel:
    """R_x(src,dst): dst is an x-successor of src."""

    char: Character
    src: Label
    dst: Label


@dataclass(frozen=True)
class CRel:
    """R_[0](src,dst): src and dst lie in the same choice cell."""

    src: Label
    dst: Label


@dataclass(frozen=True)
class Ideal:
    """I(label): the label stands for an ideal world."""

    label: Label


def atom_key(a):
    if isinstance(a, GRel):
        return (0, a.char, a.src, a.dst)
    if isinstance(a, CRel):
        return (1, a.src, a.dst)
    return (2, a.label)


def _lf_key(lf):
    label, f = lf
    return (label, formula_key(f))


@dataclass(frozen=True)
class LabelledSequent:
    atoms: tuple
    formulas: tuple  # of (Label, Formula) pairs

    @staticmethod
    def make(atoms, formulas) -> "LabelledSequent":
        return LabelledSequent(tuple(sorted(atoms, key=atom_key)),
                               tuple(sorted(formulas, key=_lf_key)))

    def labels(self) -> set:
        out = set()
        for a in self.atoms:
            out |= {a.label} if isinstance(a, Ideal) else {a.src, a.dst}
        out.update(label for label, _ in self.formulas)
        return out

    def at(self, label: Label):
        """Formulas attached to one label (with multiplicity)."""
        return [f for (w, f) in self.formulas if w == label]

    def has(self, label: Label, f: Formula) -> bool:
        return (label, f) in self.formulas

    def add_formulas(self, new) -> "LabelledSequent":
        return LabelledSequent.make(self.atoms, self.formulas + tuple(new))

    def add_atoms(self, new) -> "LabelledSequent":
        return LabelledSequent.make(self.atoms + tuple(new), self.formulas)

    def ideal_labels(self):
        return sorted({a.label for a in self.atoms if isinstance(a, Ideal)})

    def __str__(self) -> str:
        return render_sequent(self)


def sequent(atoms=(), formulas=()) -> LabelledSequent:
    return LabelledSequent.make(atoms, formulas)


def _edges(seq: LabelledSequent):
    """Directed edges of the sequent graph, one per relational atom occurrence."""
    out = []
    for a in seq.atoms:
        if isinstance(a, GRel):
            out.append((a.src, a.dst, a.char))
        elif isinstance(a, CRel):
            out.append((a.src, a.dst, "[0]"))
    return out


@dataclass(frozen=True)
class SequentGraph:
    vertices: frozenset
    edges: tuple  # (src, dst, tag) with multiplicity
    labeling: tuple  # (vertex, (ideal?, formulas)) pairs, sorted

    def label_of(self, v):
        for vertex, data in self.labeling:
            if vertex == v:
                return data
        raise KeyError(v)


def sequent_graph(seq: LabelledSequent) -> SequentGraph:
    verts = seq.labels()
    labeling = tuple(
        (v, (v in set(seq.ideal_labels()), tuple(sorted(seq.at(v), key=formula_key))))
        for v in sorted(verts))
    return SequentGraph(frozenset(verts), tuple(_edges(seq)), labeling)


def classify(seq: LabelledSequent) -> str:
    """Most specific shape of the sequent graph: tree, forest, dag or general."""
    verts = seq.labels()
    edges = _edges(seq)
    succ = {}
    indeg = {v: 0 for v in verts}
    for (s, d, _) in edges:
        succ.setdefault(s, []).append(d)
        indeg[d] += 1

    # Directed-cycle check (self loops included).
    color = {v: 0 for v in verts}

    def cyclic(v):
        color[v] = 1
        for d in succ.get(v, ()):
            if color[d] == 1 or (color[d] == 0 and cyclic(d)):
                return True
        color[v] = 2
        return False

    if any(color[v] == 0 and cyclic(v) for v in sorted(verts)):
        return "general"
    if any(n > 1 for n in indeg.values()):
        return "dag"
    roots = [v for v in verts if indeg[v] == 0]
    return "tree" if len(roots) <= 1 else "forest"


def root_of(seq: LabelledSequent) -> Label:
    """Root of a labelled tree sequent."""
    if classify(seq) != "tree":
        raise NotTree(f"not a labelled tree sequent: {seq}")
    verts = seq.labels()
    if not verts:
        raise NotTree("empty sequent has no root")
    targets = {d for (_, d, _) in _edges(seq)}
    (root,) = verts - targets if verts - targets else (min(verts),)
    return root


@dataclass(frozen=True)
class PropGraph:
    """Directed character-labelled graph driving the propagation rules.

    Every grammar atom R_x(w,u) contributes the edge (w,u,x) and its
    converse (u,w,x').  Rules that only touch formulas leave this graph
    unchanged, which is what makes their side conditions stable between
    premise and conclusion.
    """

    vertices: frozenset
    edges: frozenset  # (src, dst, Character)


def propagation_graph(seq: LabelledSequent) -> PropGraph:
    edges = set()
    for a in seq.atoms:
        if isinstance(a, GRel):
            edges.add((a.src, a.dst, a.char))
            edges.add((a.dst, a.src, a.char.conv))
    return PropGraph(frozenset(seq.labels()), frozenset(edges))


class UnionFind:
    def __init__(self):
        self.parent = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)

    def together(self, a, b) -> bool:
        return self.find(a) == self.find(b)


def choice_connectivity(atoms) -> UnionFind:
    uf = UnionFind()
    for a in atoms:
        if isinstance(a, CRel):
            uf.union(a.src, a.dst)
    return uf


def undirected_path(atoms, w: Label, u: Label) -> bool:
    """Is there an undirected chain of choice atoms joining w and u (or w == u)?"""
    if w == u:
        return True
    return choice_connectivity(atoms).together(w, u)


def choice_trees(seq: LabelledSequent):
    """Partition of a labelled forest sequent into its trees.

    Returns a list of (root, sorted labels) pairs ordered by root
    creation order.
    """
    if classify(seq) not in ("tree", "forest"):
        raise NotForest(f"not a labelled forest sequent: {seq}")
    uf = choice_connectivity(seq.atoms)
    groups = {}
    for v in seq.labels():
        groups.setdefault(uf.find(v), set()).add(v)
    indeg = {v: 0 for v in seq.labels()}
    for (_, d, _) in _edges(seq):
        indeg[d] += 1
    out = []
    for members in groups.values():
        roots = [v for v in members if indeg[v] == 0]
        assert len(roots) == 1, "forest tree must have exactly one root"
        out.append((roots[0], sorted(members)))
    return sorted(out)


# ---------------------------------------------------------------------------
# Rendering: text form `R_a(w0,w1), I(w2) |- w0: p, w1: q` and JSON.
# ---------------------------------------------------------------------------


def _label_name(v: Label) -> str:
    return f"w{v}"


def render_atom(a) -> str:
    if isinstance(a, GRel):
        return f"R_{a.char}({_label_name(a.src)},{_label_name(a.dst)})"
    if isinstance(a, CRel):
        return f"R_[0]({_label_name(a.src)},{_label_name(a.dst)})"
    return f"I({_label_name(a.label)})"


def render_sequent(seq: LabelledSequent) -> str:
    left = ", ".join(render_atom(a) for a in seq.atoms)
    right = ", ".join(f"{_label_name(w)}: {fmt(f)}" for (w, f) in seq.formulas)
    return f"{left} |- {right}"


def sequent_to_json(seq: LabelledSequent) -> dict:
    atoms = []
    for a in seq.atoms:
        if isinstance(a, GRel):
            atoms.append({"rel": str(a.char), "src": _label_name(a.src),
                          "dst": _label_name(a.dst)})
        elif isinstance(a, CRel):
            atoms.append({"rel": "[0]", "src": _label_name(a.src),
                          "dst": _label_name(a.dst)})
        else:
            atoms.append({"ideal": _label_name(a.label)})
    formulas = [{"label": _label_name(w), "formula": fmt(f)} for (w, f) in seq.formulas]
    return {"atoms": atoms, "formulas": formulas}


def _label_from_name(name: str) -> Label:
    if not name.startswith("w") or not name[1:].isdigit():
        raise ValueError(f"bad label name {name!r}")
    return int(name[1:])


def sequent_from_json(data: dict) -> LabelledSequent:
    atoms = []
    for a in data.get("atoms", ()):
        if "ideal" in a:
            atoms.append(Ideal(_label_from_name(a["ideal"])))
        elif a["rel"] == "[0]":
            atoms.append(CRel(_label_from_name(a["src"]), _label_from_name(a["dst"])))
        else:
            from .syntax import parse_character
            atoms.append(GRel(parse_character(a["rel"]),
                              _label_from_name(a["src"]), _label_from_name(a["dst"])))
    formulas = [(_label_from_name(e["label"]), parse_formula(e["formula"]))
                for e in data.get("formulas", ())]
    return LabelledSequent.make(atoms, formulas)


def parse_sequent(text: str) -> LabelledSequent:
    """Inverse of render_sequent; label names may be arbitrary identifiers."""
    if "|-" not in text:
        raise ValueError("sequent text needs a '|-'")
    left, right = text.split("|-", 1)
    names: dict[str, Label] = {}

    def lab(name: str) -> Label:
        name = name.strip()
        if name not in names:
            names[name] = int(name[1:]) if name.startswith("w") and name[1:].isdigit() \
                else len(names)
        return names[name]

    atoms = []
    for part in _split_commas(left):
        if part.startswith("I(") and part.endswith(")"):
            atoms.append(Ideal(lab(part[2:-1])))
            continue
        if not (part.startswith("R_") and part.endswith(")")):
            raise ValueError(f"bad relational atom {part!r}")
        relname, args = part[2:-1].split("(", 1)
        src, dst = (lab(x) for x in args.split(","))
        if relname == "[0]":
            atoms.append(CRel(src, dst))
        else:
            from .syntax import parse_character
            atoms.append(GRel(parse_character(relname), src, dst))
    formulas = []
    for part in _split_commas(right):
        name, ftext = part.split(":", 1)
        formulas.append((lab(name), parse_formula(ftext)))
    return LabelledSequent.make(atoms, formulas)


def _split_commas(text: str):
    """Split on top-level commas (commas inside (), [] or <> do not count)."""
    parts, depth, cur = [], 0, []
    prev = ""
    for ch in text:
        if ch in "([<":
            depth += 1
        elif ch in ")]" or (ch == ">" and prev != "-"):  # '->' is not a bracket
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
        prev = ch
    tail = "".join(cur).strip()
    if tail:
        parts.append(tail)
    return [p for p in parts if p]


def graphs_isomorphic(g1: SequentGraph, g2: SequentGraph) -> bool:
    """Backtracking isomorphism test preserving edge tags and vertex decoration."""
    v1, v2 = sorted(g1.vertices), sorted(g2.vertices)
    if len(v1) != len(v2) or len(g1.edges) != len(g2.edges):
        return False

    def signature(g, v):
        ideal, formulas = g.label_of(v)
        out = sorted((str(t) for (s, _, t) in g.edges if s == v))
        inc = sorted((str(t) for (_, d, t) in g.edges if d == v))
        return (ideal, tuple(formula_key(f) for f in formulas), tuple(out), tuple(inc))

    sig1 = {v: signature(g1, v) for v in v1}
    sig2 = {v: signature(g2, v) for v in v2}
    if sorted(sig1.values()) != sorted(sig2.values()):
        return False

    from collections import Counter
    e1, e2 = Counter(g1.edges), Counter(g2.edges)

    def extend(mapping, remaining):
        if not remaining:
            mapped = Counter(((mapping[s], mapping[d], t) for (s, d, t) in g1.edges))
            return mapped == e2
        v = remaining[0]
        for u in v2:
            if u in mapping.values() or sig1[v] != sig2[u]:
                continue
            mapping[v] = u
            if extend(mapping, remaining[1:]):
                return True
            del mapping[v]
        return False

    return extend({}, v1)


class LabelAllocator:
    """Monotone fresh-label source; one per derivation keeps runs reproducible."""

    def __init__(self, start: int = 0):
        self.next_label = start

    @staticmethod
    def above(seq: LabelledSequent) -> "LabelAllocator":
        labels = seq.labels()
        return LabelAllocator(max(labels) + 1 if labels else 0)

    def fresh(self) -> Label:
        v = self.next_label
        self.next_label += 1
        return v


def dumps_sequent(seq: LabelledSequent) -> str:
    return json.dumps(sequent_to_json(seq), indent=2, sort_keys=True)
