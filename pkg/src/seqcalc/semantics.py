"""Finite Kripke models for both formula families.

Sigma-models carry one relation per alphabet character; the converse
condition ((w,u) in R_x iff (u,w) in R_x') is restored by ``saturate``,
which also closes the relations under every production rule of the
active rewriting system: for x -> s, any composite path along s forces
the direct x-pair (an empty tail seeds the diagonal).  Saturation is a
plain fixpoint over a finite lattice.

DS-models carry the choice equivalence, the set of ideal worlds and the
choice bound k; ``validate_ds`` names every frame condition a candidate
model violates.  Random generators emit only saturated / valid models
and are deterministic per seed, which makes them usable as soundness
oracles for the provers.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

from .grammar import CfcstSystem
from .syntax import (And, Bot, CBox, CDia, Character, Formula, GBox, GDia, Lit,
                     OBox, ODia, Or, SBox, SDia, Top, parse_character)


class UnknownWorld(KeyError):
    pass


@dataclass(frozen=True)
class SigmaModel:
    worlds: frozenset
    relations: dict  # Character -> frozenset of (w, u)
    valuation: dict  # atom name -> frozenset of worlds

    def pairs(self, char: Character) -> frozenset:
        return self.relations.get(char, frozenset())

    def __eq__(self, other):
        if not isinstance(other, SigmaModel):
            return NotImplemented
        return (self.worlds == other.worlds
                and {c: p for c, p in self.relations.items() if p}
                == {c: p for c, p in other.relations.items() if p}
                and {a: v for a, v in self.valuation.items() if v}
                == {a: v for a, v in other.valuation.items() if v})

    __hash__ = None


def sigma_model(worlds, relations, valuation) -> SigmaModel:
    return SigmaModel(frozenset(worlds),
                      {c: frozenset(p) for c, p in relations.items()},
                      {a: frozenset(v) for a, v in valuation.items()})


def _compose(pairs_a, pairs_b):
    by_src = {}
    for (w, u) in pairs_b:
        by_src.setdefault(w, set()).add(u)
    return {(w, v) for (w, u) in pairs_a for v in by_src.get(u, ())}


def string_relation(model: SigmaModel, s) -> set:
    """Relation along a character string; the empty string is the diagonal."""
    pairs = {(w, w) for w in model.worlds}
    for c in s:
        pairs = _compose(pairs, model.pairs(c))
    return pairs


def saturate(system: CfcstSystem, model: SigmaModel) -> SigmaModel:
    """Least extension closed under converses and the system's productions."""
    rels = {c: set(p) for c, p in model.relations.items()}

    def get(c):
        return rels.setdefault(c, set())

    changed = True
    while changed:
        changed = False
        for c in list(rels):
            for (w, u) in list(rels[c]):
                if (u, w) not in get(c.conv):
                    rels[c.conv].add((u, w))
                    changed = True
        for rule in system.rules:
            pairs = {(w, w) for w in model.worlds}
            for c in rule.tail:
                pairs = _compose(pairs, rels.get(c, set()))
            head = get(rule.head)
            new = pairs - head
            if new:
                head |= new
                changed = True
    return SigmaModel(model.worlds, {c: frozenset(p) for c, p in rels.items()},
                      dict(model.valuation))


def satisfies_system(system: CfcstSystem, model: SigmaModel) -> bool:
    if any(model.pairs(c) != {(u, w) for (w, u) in model.pairs(c.conv)}
           for c in set(model.relations) | {c for r in system.rules for c in (r.head, *r.tail)}):
        return False
    return all(string_relation(model, r.tail) <= model.pairs(r.head)
               for r in system.rules)


def check_sigma(model: SigmaModel, world, f: Formula) -> bool:
    if world not in model.worlds:
        raise UnknownWorld(world)
    if isinstance(f, Lit):
        return (world in model.valuation.get(f.name, frozenset())) == f.positive
    if isinstance(f, Top):
        return True
    if isinstance(f, Bot):
        return False
    if isinstance(f, And):
        return check_sigma(model, world, f.left) and check_sigma(model, world, f.right)
    if isinstance(f, Or):
        return check_sigma(model, world, f.left) or check_sigma(model, world, f.right)
    if isinstance(f, GBox):
        return all(check_sigma(model, u, f.body)
                   for (w, u) in model.pairs(f.char) if w == world)
    if isinstance(f, GDia):
        return any(check_sigma(model, u, f.body)
                   for (w, u) in model.pairs(f.char) if w == world)
    raise ValueError(f"not a grammar-family formula: {f}")


def globally_true_sigma(model: SigmaModel, f: Formula) -> bool:
    return all(check_sigma(model, w, f) for w in model.worlds)


@dataclass(frozen=True)
class DsModel:
    worlds: frozenset
    choice: frozenset  # pairs of the single agent's choice equivalence
    ideal: frozenset
    valuation: dict
    k: int = 0

    def choice_cell(self, world) -> frozenset:
        return frozenset(u for (w, u) in self.choice if w == world)

    def __eq__(self, other):
        if not isinstance(other, DsModel):
            return NotImplemented
        return (self.worlds, self.choice, self.ideal, self.k) == \
            (other.worlds, other.choice, other.ideal, other.k) and \
            {a: v for a, v in self.valuation.items() if v} == \
            {a: v for a, v in other.valuation.items() if v}

    __hash__ = None


def ds_model(worlds, choice, ideal, valuation, k=0) -> DsModel:
    return DsModel(frozenset(worlds), frozenset(choice), frozenset(ideal),
                   {a: frozenset(v) for a, v in valuation.items()}, k)


def validate_ds(model: DsModel):
    """Names of all violated frame conditions; an empty list means the model is valid."""
    out = []
    W, R, I = model.worlds, model.choice, model.ideal
    if not all(w in W and u in W for (w, u) in R):
        out.append("P")  # relation must live on W
    elif not (all((w, w) in R for w in W)
              and all((u, w) in R for (w, u) in R)
              and all((w, v) in R for (w, u) in R for (x, v) in R if x == u)):
        out.append("P")
    if model.k > 0 and "P" not in out:
        cells = {frozenset(model.choice_cell(w)) for w in W}
        if len(cells) > model.k:
            out.append("Ck")
    if not I <= W:
        out.append("D1")
    if not I:
        out.append("D2")
    if not all(u in I for w in I for (x, u) in R if x == w):
        out.append("D3")
    return out


def check_ds(model: DsModel, world, f: Formula) -> bool:
    if world not in model.worlds:
        raise UnknownWorld(world)
    if isinstance(f, Lit):
        return (world in model.valuation.get(f.name, frozenset())) == f.positive
    if isinstance(f, Top):
        return True
    if isinstance(f, Bot):
        return False
    if isinstance(f, And):
        return check_ds(model, world, f.left) and check_ds(model, world, f.right)
    if isinstance(f, Or):
        return check_ds(model, world, f.left) or check_ds(model, world, f.right)
    if isinstance(f, SBox):
        return all(check_ds(model, u, f.body) for u in model.worlds)
    if isinstance(f, SDia):
        return any(check_ds(model, u, f.body) for u in model.worlds)
    if isinstance(f, CBox):
        return all(check_ds(model, u, f.body) for u in model.choice_cell(world))
    if isinstance(f, CDia):
        return any(check_ds(model, u, f.body) for u in model.choice_cell(world))
    if isinstance(f, OBox):
        return all(check_ds(model, u, f.body) for u in model.ideal)
    if isinstance(f, ODia):
        return any(check_ds(model, u, f.body) for u in model.ideal)
    raise ValueError(f"not an agentive-family formula: {f}")


def globally_true_ds(model: DsModel, f: Formula) -> bool:
    return all(check_ds(model, w, f) for w in model.worlds)


# ---------------------------------------------------------------------------
# Random model streams (deterministic per seed).
# ---------------------------------------------------------------------------


def random_sigma_models(seed: int, system: CfcstSystem, count: int,
                        max_worlds: int = 5, atoms=("p", "q")):
    """Saturated sigma-models over the system's alphabet."""
    rng = random.Random(seed)
    chars = sorted({c for c in system.alphabet if c.forward}) or [Character("a")]
    for _ in range(count):
        n = rng.randint(1, max_worlds)
        worlds = [f"m{i}" for i in range(n)]
        relations = {}
        for c in chars:
            pairs = {(w, u) for w in worlds for u in worlds if rng.random() < 0.3}
            relations[c] = pairs
        valuation = {a: {w for w in worlds if rng.random() < 0.5} for a in atoms}
        yield saturate(system, sigma_model(worlds, relations, valuation))


def random_ds_models(seed: int, count: int, k: int = 0, max_worlds: int = 6,
                     atoms=("p", "q")):
    """Valid DS-models: choice cells sampled directly, ideal a union of cells."""
    rng = random.Random(seed)
    for _ in range(count):
        n = rng.randint(1, max_worlds)
        worlds = [f"m{i}" for i in range(n)]
        n_cells = rng.randint(1, k) if k > 0 else rng.randint(1, n)
        n_cells = min(n_cells, n)
        cells = [[] for _ in range(n_cells)]
        for i, w in enumerate(worlds):
            cells[i % n_cells].append(w)  # every cell non-empty
        choice = {(w, u) for cell in cells for w in cell for u in cell}
        ideal_cells = rng.sample(range(n_cells), rng.randint(1, n_cells))
        ideal = {w for i in ideal_cells for w in cells[i]}
        valuation = {a: {w for w in worlds if rng.random() < 0.5} for a in atoms}
        model = ds_model(worlds, choice, ideal, valuation, k)
        assert validate_ds(model) == []
        yield model


# ---------------------------------------------------------------------------
# JSON forms.
# ---------------------------------------------------------------------------


def sigma_to_json(model: SigmaModel) -> dict:
    return {
        "worlds": sorted(str(w) for w in model.worlds),
        "relations": {str(c): sorted([str(w), str(u)] for (w, u) in p)
                      for c, p in sorted(model.relations.items(), key=lambda kv: str(kv[0]))
                      if p},
        "valuation": {a: sorted(str(w) for w in v)
                      for a, v in sorted(model.valuation.items()) if v},
    }


def sigma_from_json(data: dict) -> SigmaModel:
    return sigma_model(
        data["worlds"],
        {parse_character(c): {(w, u) for (w, u) in map(tuple, pairs)}
         for c, pairs in data.get("relations", {}).items()},
        {a: set(v) for a, v in data.get("valuation", {}).items()})


def ds_to_json(model: DsModel) -> dict:
    return {
        "worlds": sorted(str(w) for w in model.worlds),
        "choice": sorted([str(w), str(u)] for (w, u) in model.choice),
        "ideal": sorted(str(w) for w in model.ideal),
        "k": model.k,
        "valuation": {a: sorted(str(w) for w in v)
                      for a, v in sorted(model.valuation.items()) if v},
    }


def ds_from_json(data: dict) -> DsModel:
    return ds_model(data["worlds"],
                    {(w, u) for (w, u) in map(tuple, data.get("choice", ()))},
                    data.get("ideal", ()),
                    {a: set(v) for a, v in data.get("valuation", {}).items()},
                    data.get("k", 0))


def ds_models_isomorphic(m1: DsModel, m2: DsModel) -> bool:
    """Brute-force isomorphism over the relevant atoms of the two models."""
    if (len(m1.worlds), len(m1.ideal), len(m1.choice), m1.k) != \
            (len(m2.worlds), len(m2.ideal), len(m2.choice), m2.k):
        return False
    atoms = {a for a, v in m1.valuation.items() if v} | \
            {a for a, v in m2.valuation.items() if v}
    import itertools
    w1, w2 = sorted(m1.worlds, key=str), sorted(m2.worlds, key=str)
    for perm in itertools.permutations(w2):
        m = dict(zip(w1, perm))
        if {(m[w], m[u]) for (w, u) in m1.choice} != set(m2.choice):
            continue
        if {m[w] for w in m1.ideal} != set(m2.ideal):
            continue
        if all({m[w] for w in m1.valuation.get(a, frozenset())}
               == set(m2.valuation.get(a, frozenset())) for a in atoms):
            return True
    return False
