"""Shared generators and brute-force oracles for the test suite."""
from __future__ import annotations

import itertools
import random

from seqcalc.grammar import CfcstSystem, ProductionRule, build_system
from seqcalc.sequents import CRel, GRel, LabelledSequent
from seqcalc.syntax import (And, Bot, CBox, CDia, Character, Formula, GBox,
                            GDia, Lit, OBox, ODia, Or, SBox, SDia, Top,
                            complexity)

CHARS = [Character("a"), Character("b"), Character("a", False), Character("b", False)]


def random_formula(rng: random.Random, depth: int, kind: str, atoms=("p", "q")):
    """Random NNF formula of the given family with nesting up to ``depth``."""
    if depth == 0 or rng.random() < 0.3:
        name = rng.choice(atoms)
        return Lit(name, rng.random() < 0.5)
    roll = rng.random()
    if roll < 0.25:
        return Or(random_formula(rng, depth - 1, kind, atoms),
                  random_formula(rng, depth - 1, kind, atoms))
    if roll < 0.5:
        return And(random_formula(rng, depth - 1, kind, atoms),
                   random_formula(rng, depth - 1, kind, atoms))
    body = random_formula(rng, depth - 1, kind, atoms)
    if kind == "grammar":
        ctor = rng.choice([GDia, GBox])
        return ctor(rng.choice(CHARS), body)
    ctor = rng.choice([SDia, SBox, CDia, CBox, ODia, OBox])
    return ctor(body)


def random_formula_any(rng: random.Random, depth: int):
    """Random formula over either family, occasionally with constants."""
    if rng.random() < 0.1:
        return rng.choice([Top(), Bot()])
    return random_formula(rng, depth, rng.choice(["grammar", "stit"]))


def random_stit_formula(rng: random.Random, max_complexity: int = 8):
    while True:
        f = random_formula(rng, rng.randint(1, 4), "stit")
        if complexity(f) <= max_complexity:
            return f


def random_system(rng: random.Random, max_rules: int = 6, max_tail: int = 2,
                  bases="ab") -> CfcstSystem:
    chars = [Character(b) for b in bases]
    chars += [c.conv for c in chars]
    rules = []
    for _ in range(rng.randint(0, max_rules // 2)):
        head = rng.choice(chars)
        tail = tuple(rng.choice(chars) for _ in range(rng.randint(0, max_tail)))
        rules.append(ProductionRule(head, tail))
    return build_system(chars, rules, auto_close=True)


def random_prop_graph(rng: random.Random, max_vertices: int = 6, max_edges: int = 7):
    """Random propagation-style graph (edges closed under converses)."""
    n = rng.randint(1, max_vertices)
    vertices = list(range(n))
    edges = set()
    for _ in range(rng.randint(0, max_edges)):
        w, u = rng.choice(vertices), rng.choice(vertices)
        c = rng.choice(CHARS)
        edges.add((w, u, c))
        edges.add((u, w, c.conv))
    return vertices, frozenset(edges)


def enumerate_path_strings(edges, start, end, max_len: int):
    """Strings of all walks from start to end with at most ``max_len`` edges."""
    out = set()
    succ = {}
    for (w, u, c) in edges:
        succ.setdefault(w, []).append((u, c))

    def walk(v, string):
        if v == end:
            out.add(tuple(string))
        if len(string) == max_len:
            return
        for (u, c) in succ.get(v, ()):
            walk(u, string + [c])

    walk(start, [])
    return out


def random_tree_sequent(rng: random.Random, max_nodes: int = 6, atoms=("p", "q")):
    n = rng.randint(1, max_nodes)
    rel = []
    for child in range(1, n):
        parent = rng.randrange(child)
        rel.append(GRel(rng.choice(CHARS), parent, child))
    formulas = [(0, random_formula(rng, rng.randint(0, 2), "grammar", atoms))]
    for v in range(n):
        for _ in range(rng.randint(0, 2)):
            formulas.append((v, random_formula(rng, rng.randint(0, 2), "grammar", atoms)))
    return LabelledSequent.make(rel, formulas)


def random_choice_atoms(rng: random.Random, max_labels: int = 10, max_atoms: int = 8):
    n = rng.randint(1, max_labels)
    return [CRel(rng.randrange(n), rng.randrange(n))
            for _ in range(rng.randint(0, max_atoms))], n


def undirected_bfs(atoms, w, u) -> bool:
    adj = {}
    for a in atoms:
        adj.setdefault(a.src, set()).add(a.dst)
        adj.setdefault(a.dst, set()).add(a.src)
    seen, frontier = {w}, [w]
    while frontier:
        v = frontier.pop()
        if v == u:
            return True
        for nxt in adj.get(v, ()):
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return w == u


def prop_atoms(f: Formula):
    if isinstance(f, Lit):
        return {f.name}
    if isinstance(f, (Top, Bot)):
        return set()
    if isinstance(f, (Or, And)):
        return prop_atoms(f.left) | prop_atoms(f.right)
    return prop_atoms(f.body)


def eval_prop(f: Formula, assignment: dict) -> bool:
    if isinstance(f, Lit):
        return assignment[f.name] == f.positive
    if isinstance(f, Top):
        return True
    if isinstance(f, Bot):
        return False
    if isinstance(f, And):
        return eval_prop(f.left, assignment) and eval_prop(f.right, assignment)
    if isinstance(f, Or):
        return eval_prop(f.left, assignment) or eval_prop(f.right, assignment)
    raise ValueError(f"not propositional: {f}")


def truth_table_valid(f: Formula) -> bool:
    names = sorted(prop_atoms(f))
    return all(eval_prop(f, dict(zip(names, bits)))
               for bits in itertools.product([False, True], repeat=len(names)))


def prop_equivalent(f: Formula, g: Formula) -> bool:
    names = sorted(prop_atoms(f) | prop_atoms(g))
    return all(eval_prop(f, a) == eval_prop(g, a)
               for bits in [None]
               for a in (dict(zip(names, vals))
                         for vals in itertools.product([False, True], repeat=len(names))))


def random_prop_formula(rng: random.Random, depth: int, atoms=("p", "q")):
    if depth == 0 or rng.random() < 0.35:
        return Lit(rng.choice(atoms), rng.random() < 0.5)
    ctor = rng.choice([And, Or])
    return ctor(random_prop_formula(rng, depth - 1, atoms),
                random_prop_formula(rng, depth - 1, atoms))


def resolution_closes(flat_sequents) -> bool:
    """Can the empty clause be reached, resolving on identical labelled formulas?

    Flat sequents are read as clauses of labelled literals; two clauses
    resolve when one contains (w, f) and the other (w, negate(f)).
    """
    from seqcalc.syntax import negate

    clauses = {frozenset(s) for s in flat_sequents}
    changed = True
    while changed:
        if frozenset() in clauses:
            return True
        changed = False
        for c1, c2 in itertools.combinations(sorted(clauses, key=sorted_key), 2):
            for (w, f) in c1:
                if (w, negate(f)) in c2:
                    resolvent = frozenset((c1 - {(w, f)}) | (c2 - {(w, negate(f))}))
                    if resolvent not in clauses:
                        clauses.add(resolvent)
                        changed = True
    return frozenset() in clauses


def sorted_key(clause):
    from seqcalc.syntax import formula_key
    return sorted((w, formula_key(f)) for (w, f) in clause)
