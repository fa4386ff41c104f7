"""Converse-closed context-free string rewriting and path reachability.

A rewriting system is a set of production rules ``head -> tail`` whose
head is a single character; the system must contain the converse image
``head' -> reverse-converse(tail)`` of every rule.  ``derives`` answers
bounded string-to-string derivability by breadth-first search over
one-step rewrites and serves as the independent oracle for ``reachable``.

``reachable`` decides the side condition of the propagation rules: given
a directed character-labelled graph, a system S and a character x, is
there a path from w to u whose label string lies in the language of x?
It runs a cubic worklist saturation over triples (v1, symbol, v2) after
binarizing long tails, and reconstructs a concrete path witness from
back-pointers.  Witnesses are not minimal; only existence matters for
rule applicability.
"""
from __future__ import annotations

from dataclasses import dataclass

from .syntax import Character, Str, conv_str, parse_character, str_of


class ClosureViolation(ValueError):
    pass


class UnknownCharacter(ValueError):
    pass


@dataclass(frozen=True, order=True)
class ProductionRule:
    head: Character
    tail: Str  # tuple of Character, possibly empty

    @property
    def conv(self) -> "ProductionRule":
        return ProductionRule(self.head.conv, conv_str(self.tail))

    def __str__(self) -> str:
        rhs = " ".join(str(c) for c in self.tail) if self.tail else "eps"
        return f"{self.head} -> {rhs}"


@dataclass(frozen=True)
class CfcstSystem:
    alphabet: frozenset
    rules: frozenset

    def __str__(self) -> str:
        return "{" + ", ".join(str(r) for r in sorted(self.rules)) + "}"


def build_system(alphabet, rules, auto_close: bool = False) -> CfcstSystem:
    """Assemble a system, closing the alphabet under converses.

    With ``auto_close`` the converse image of every rule is added;
    otherwise a missing converse image raises ClosureViolation.  A rule
    character outside the alphabet raises UnknownCharacter.
    """
    alpha = set(alphabet) | {c.conv for c in alphabet}
    ruleset = {ProductionRule(r.head, tuple(r.tail)) for r in rules}
    for r in ruleset:
        for c in (r.head, *r.tail):
            if c not in alpha:
                raise UnknownCharacter(f"character {c} not in the alphabet")
    if auto_close:
        ruleset |= {r.conv for r in ruleset}
    else:
        for r in ruleset:
            if r.conv not in ruleset:
                raise ClosureViolation(f"missing converse image of rule {r}")
    return CfcstSystem(frozenset(alpha), frozenset(ruleset))


def derives(system: CfcstSystem, start: Str, target: Str, max_steps: int) -> bool:
    """Bounded one-step-rewrite reachability from ``start`` to ``target``.

    Plain BFS over rewrite successors.  States longer than
    ``len(target) + steps remaining`` are pruned: a step shrinks a string
    by at most one character, so they can never reach the target.
    """
    start, target = tuple(start), tuple(target)
    if start == target:
        return True
    frontier = {start}
    seen = {start}
    for step in range(max_steps):
        remaining = max_steps - step - 1
        nxt = set()
        for s in frontier:
            for i, c in enumerate(s):
                for r in system.rules:
                    if r.head != c:
                        continue
                    t = s[:i] + r.tail + s[i + 1:]
                    if t == target:
                        return True
                    if t in seen or len(t) > len(target) + remaining:
                        continue
                    seen.add(t)
                    nxt.add(t)
        if not nxt:
            return False
        frontier = nxt
    return False


def derives_eventually(system: CfcstSystem, start: Str, target: Str,
                       max_depth: int = 64) -> bool:
    """Iterative-deepening wrapper around ``derives`` (used to revalidate witnesses)."""
    for depth in range(max_depth + 1):
        if derives(system, start, target, depth):
            return True
    return False


@dataclass(frozen=True)
class PathWitness:
    """Alternating vertex/character sequence certifying one propagation path.

    ``vertices`` has one more entry than ``chars``; consecutive
    (vertices[i], vertices[i+1], chars[i]) triples are edges of the graph
    the witness was produced against.  The empty witness at w has a
    single vertex and the empty string.
    """

    vertices: tuple
    chars: Str

    @property
    def source(self):
        return self.vertices[0]

    @property
    def target(self):
        return self.vertices[-1]

    @property
    def string(self) -> Str:
        return self.chars

    def steps(self):
        return list(zip(self.vertices, self.vertices[1:], self.chars))


def _binarize(system: CfcstSystem):
    """Split long tails with fresh symbols; returns (eps, unit, binary) rule tables.

    Fresh symbols are plain ints (alphabet characters are Character
    values), so the two namespaces cannot collide.
    """
    eps_heads = set()
    unit = {}    # symbol -> set of heads producing it by a unit rule
    binary = {}  # (left, right) -> set of heads
    counter = 0
    for r in sorted(system.rules):
        if not r.tail:
            eps_heads.add(r.head)
            continue
        if len(r.tail) == 1:
            unit.setdefault(r.tail[0], set()).add(r.head)
            continue
        head = r.head
        rest = r.tail
        while len(rest) > 2:
            fresh = counter
            counter += 1
            binary.setdefault((rest[0], fresh), set()).add(head)
            head = fresh
            rest = rest[1:]
        binary.setdefault((rest[0], rest[1]), set()).add(head)
    return eps_heads, unit, binary


class ReachabilityIndex:
    """Saturated path-language triples for one (graph, system) pair.

    A triple (v1, A, v2) is recorded when some path from v1 to v2 spells
    a string derivable from symbol A.  Seeds: every edge derives its own
    label, and every vertex carries an empty path for each character with
    an eps-rule.  Composition follows the binarized productions.
    """

    def __init__(self, vertices, edges, system: CfcstSystem):
        self.vertices = frozenset(vertices)
        self.edges = frozenset(edges)  # (v1, v2, Character)
        self.system = system
        self._saturate()

    def _add(self, triple, reason, worklist):
        if triple not in self.back:
            self.back[triple] = reason
            worklist.append(triple)

    def _saturate(self):
        eps_heads, unit, binary = _binarize(self.system)
        self.back = {}
        by_src = {}   # (A, v1) -> set of v2
        by_dst = {}   # (A, v2) -> set of v1
        left_of = {}  # A -> [(B, C)] where B -> A C
        right_of = {}  # C -> [(B, A)] where B -> A C
        for (a, c), heads in binary.items():
            for b in heads:
                left_of.setdefault(a, []).append((b, c))
                right_of.setdefault(c, []).append((b, a))

        work = []
        for (v1, v2, c) in sorted(self.edges, key=lambda e: (str(e[2]), e[0], e[1])):
            self._add((v1, c, v2), ("edge", c), work)
        for x in sorted(eps_heads):
            for v in sorted(self.vertices):
                self._add((v, x, v), ("eps",), work)

        while work:
            t = work.pop()
            v1, a, v2 = t
            by_src.setdefault((a, v1), set()).add(v2)
            by_dst.setdefault((a, v2), set()).add(v1)
            for b in unit.get(a, ()):
                self._add((v1, b, v2), ("unit", t), work)
            for (b, c) in left_of.get(a, ()):
                for v3 in by_src.get((c, v2), ()):
                    self._add((v1, b, v3), ("concat", t, (v2, c, v3)), work)
            for (b, c) in right_of.get(a, ()):
                for v0 in by_dst.get((c, v1), ()):
                    self._add((v0, b, v2), ("concat", (v0, c, v1), t), work)

    def _path(self, triple):
        reason = self.back[triple]
        v1, _, v2 = triple
        if reason[0] == "edge":
            return (v1, v2), (reason[1],)
        if reason[0] == "eps":
            return (v1,), ()
        if reason[0] == "unit":
            return self._path(reason[1])
        lv, lc = self._path(reason[1])
        rv, rc = self._path(reason[2])
        return lv + rv[1:], lc + rc

    def query(self, x: Character, w, u) -> PathWitness | None:
        if w not in self.vertices or u not in self.vertices:
            return None
        t = (w, x, u)
        if t not in self.back:
            return None
        vertices, chars = self._path(t)
        return PathWitness(vertices, chars)

    def targets(self, x: Character, w):
        """All u with a witnessed x-path from w, in a deterministic order."""
        return sorted(u for (v1, a, u) in self.back if v1 == w and a == x)


_INDEX_CACHE: dict = {}


def reachability_index(vertices, edges, system: CfcstSystem) -> ReachabilityIndex:
    key = (frozenset(vertices), frozenset(edges), system)
    idx = _INDEX_CACHE.get(key)
    if idx is None:
        idx = _INDEX_CACHE[key] = ReachabilityIndex(vertices, edges, system)
    return idx


def reachable(vertices, edges, system: CfcstSystem, x: Character, w, u) -> PathWitness | None:
    """Witness for an x-language path from w to u in the given graph, if any.

    The returned witness is checked against the graph and endpoints
    before being handed back.
    """
    wit = reachability_index(vertices, edges, system).query(x, w, u)
    if wit is not None:
        assert wit.source == w and wit.target == u
        assert all(step in edges for step in wit.steps())
    return wit


# ---------------------------------------------------------------------------
# File format: one "alphabet:" line, then one rule per line, '#' comments.
#
#   alphabet: a b c
#   a -> a b
#   b -> eps
#
# A trailing apostrophe picks the converse copy of a character.
# ---------------------------------------------------------------------------


def parse_system(text: str, auto_close: bool = False) -> CfcstSystem:
    alphabet = None
    rules = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("alphabet:"):
            alphabet = {parse_character(tok) for tok in line[len("alphabet:"):].split()}
            continue
        if "->" not in line:
            raise ValueError(f"line {lineno}: expected 'head -> tail'")
        head_text, tail_text = line.split("->", 1)
        head = parse_character(head_text.strip())
        rules.append(ProductionRule(head, str_of(tail_text)))
    if alphabet is None:
        alphabet = {c for r in rules for c in (r.head, *r.tail)}
    return build_system(alphabet, rules, auto_close=auto_close)


def format_system(system: CfcstSystem) -> str:
    bases = sorted({c.base for c in system.alphabet})
    lines = ["alphabet: " + " ".join(bases)]
    lines += [str(r) for r in sorted(system.rules)]
    return "\n".join(lines) + "\n"


def empty_system() -> CfcstSystem:
    return CfcstSystem(frozenset(), frozenset())


def s4_system(base: str = "a") -> CfcstSystem:
    a = Character(base)
    return build_system({a}, [ProductionRule(a, ()), ProductionRule(a, (a, a))],
                        auto_close=True)


def s5_system(base: str = "a") -> CfcstSystem:
    a = Character(base)
    return build_system({a}, [ProductionRule(a, ()), ProductionRule(a, (a.conv, a))],
                        auto_close=True)
