"""Axiom corpus used as executable fixtures.

The agentive axioms (classical tautologies, the normality axioms, both
S5 blocks, deontic consistency, the obligation/choice bridge, and the
choice-limitation schema for small bounds) must all be Proved by the
decision procedure.  On the grammar side, every alphabet character
contributes a converse axiom, and every production rule of a rewriting
system contributes a path axiom; these must come out Valid under the
bounded prover.
"""
from __future__ import annotations

import random

from .grammar import CfcstSystem, ProductionRule, build_system
from .grammar_calculus import Budget, Valid, prove_bounded
from .stit import Proved, prove_ds
from .syntax import (And, CBox, CDia, Character, GBox, GDia, Lit, OBox, ODia,
                     Or, SBox, SDia, implies, negate, parse_formula)

TAUTOLOGIES = [
    "p | ~p",
    "p -> p | q",
    "p & q -> p",
    "p & (p -> q) -> q",
    "(p -> q) | (q -> p)",
    "p & (q | r) -> p & q | p & r",
]


def ds_axiom_instances():
    """(name, k, formula) triples; k is the smallest bound the instance needs."""
    p, q = Lit("p"), Lit("q")
    out = [(f"A0.{i}", 0, parse_formula(text)) for i, text in enumerate(TAUTOLOGIES)]
    singles = {
        "A4": lambda f: implies(SBox(f), CBox(f)),
        "A5": lambda f: implies(SBox(f), OBox(f)),
        "A6": lambda f: implies(SBox(f), f),
        "A7": lambda f: implies(SDia(f), SBox(SDia(f))),
        "A8": lambda f: implies(CBox(f), f),
        "A9": lambda f: implies(CDia(f), CBox(CDia(f))),
        "A10": lambda f: implies(OBox(f), ODia(f)),
        "A11": lambda f: implies(SDia(OBox(f)), SBox(OBox(f))),
        "A12": lambda f: implies(OBox(f), OBox(CBox(f))),
    }
    doubles = {
        "A1": lambda f, g: implies(SBox(implies(f, g)), implies(SBox(f), SBox(g))),
        "A2": lambda f, g: implies(CBox(implies(f, g)), implies(CBox(f), CBox(g))),
        "A3": lambda f, g: implies(OBox(implies(f, g)), implies(OBox(f), OBox(g))),
    }
    for name, mk in sorted(doubles.items()):
        for f in (p, q):
            for g in (p, q):
                out.append((f"{name}[{f},{g}]", 0, mk(f, g)))
    for name, mk in sorted(singles.items()):
        for f in (p, q):
            out.append((f"{name}[{f}]", 0, mk(f)))
    for f in (p, q):  # choice limitation, one choice
        out.append((f"A14.k1[{f}]", 1, implies(SDia(CBox(f)), f)))
    for f in (p, q):  # choice limitation, two choices
        for g in (p, q):
            ante = And(SDia(CBox(f)), SDia(And(negate(f), CBox(g))))
            out.append((f"A14.k2[{f},{g}]", 2, implies(ante, Or(f, g))))
    return out


def dia_string(chars, body):
    for c in reversed(tuple(chars)):
        body = GDia(c, body)
    return body


def grammar_axiom_instances(system: CfcstSystem):
    """Converse axioms for each character and path axioms for each rule."""
    p = Lit("p")
    out = []
    for c in sorted(system.alphabet):
        out.append((f"conv[{c}]", implies(p, GBox(c, GDia(c.conv, p)))))
    for r in sorted(system.rules):
        out.append((f"path[{r}]", implies(dia_string(r.tail, p), GDia(r.head, p))))
    return out


def random_cfcst(rng: random.Random, max_bases: int = 4, max_rules: int = 5,
                 max_tail: int = 2) -> CfcstSystem:
    bases = [Character(b) for b in "abcd"[:rng.randint(1, max_bases)]]
    chars = bases + [c.conv for c in bases]
    rules = []
    for _ in range(rng.randint(0, max_rules)):
        head = rng.choice(chars)
        tail = tuple(rng.choice(chars) for _ in range(rng.randint(0, max_tail)))
        rules.append(ProductionRule(head, tail))
    return build_system(chars, rules, auto_close=True)


def run(seed: int = 0, systems: int = 10, verbose: bool = False) -> int:
    """Prove the whole corpus; returns the number of failures."""
    failures = 0

    def report(name, ok):
        nonlocal failures
        if not ok:
            failures += 1
        if verbose:
            print(f"{'PASS' if ok else 'FAIL'} {name}")

    for name, k, formula in ds_axiom_instances():
        result = prove_ds(k, formula)
        report(f"stit {name}", isinstance(result, Proved))

    rng = random.Random(seed)
    budget = Budget(max_labels=16, max_steps=4000)
    for i in range(systems):
        system = random_cfcst(rng)
        for name, formula in grammar_axiom_instances(system):
            result = prove_bounded(system, formula, budget)
            report(f"grammar#{i} {name}", isinstance(result, Valid))
    if verbose:
        print("all passed" if failures == 0 else f"{failures} failures")
    return failures
