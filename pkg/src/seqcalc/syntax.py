"""Negation-normal-form formulas for two modal families.

Grammar-logic formulas index their modalities with alphabet characters;
every character has an involutive converse, written with a trailing
apostrophe (``<a'>`` is the converse diamond of ``<a>``).  The agentive
family covers a single agent's settledness (``[*]``/``<*>``), choice
(``[0]``/``<0>``) and obligation (``[o]``/``<o>``) modalities.

Negation occurs only on atoms.  ``negate`` flips every literal,
connective and modality to its dual.  ``top`` and ``bot`` are primitive
constants (rather than abbreviations over a fixed variable) so that
formulas assembled from interpolants carry no spurious literals.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

GRAMMAR = "grammar"
STIT = "stit"


@dataclass(frozen=True, order=True)
class Character:
    """One alphabet character; ``forward=False`` is the converse copy."""

    base: str
    forward: bool = True

    @property
    def conv(self) -> "Character":
        return Character(self.base, not self.forward)

    def __str__(self) -> str:
        return self.base if self.forward else self.base + "'"


# Strings over the alphabet are plain tuples of characters.
Str = tuple


def conv_str(s: Str) -> Str:
    """Converse of a string: reverse it and converse each character."""
    return tuple(c.conv for c in reversed(s))


def str_of(text: str) -> Str:
    """Parse a whitespace-separated character string, '' or 'eps' for the empty one."""
    text = text.strip()
    if text in ("", "eps"):
        return ()
    return tuple(parse_character(tok) for tok in text.split())


def parse_character(tok: str) -> Character:
    if tok.endswith("'"):
        return Character(tok[:-1], False)
    return Character(tok)


class Formula:
    """Base class; subclasses are immutable and hashable."""

    __slots__ = ()


@dataclass(frozen=True)
class Lit(Formula):
    name: str
    positive: bool = True

    def __str__(self) -> str:
        return self.name if self.positive else "~" + self.name


@dataclass(frozen=True)
class Top(Formula):
    def __str__(self) -> str:
        return "top"


@dataclass(frozen=True)
class Bot(Formula):
    def __str__(self) -> str:
        return "bot"


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula

    def __str__(self) -> str:
        return _fmt(self, 0)


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula

    def __str__(self) -> str:
        return _fmt(self, 0)


@dataclass(frozen=True)
class GDia(Formula):
    char: Character
    body: Formula

    def __str__(self) -> str:
        return _fmt(self, 0)


@dataclass(frozen=True)
class GBox(Formula):
    char: Character
    body: Formula

    def __str__(self) -> str:
        return _fmt(self, 0)


@dataclass(frozen=True)
class SDia(Formula):  # <*>: true somewhere in the moment
    body: Formula

    def __str__(self) -> str:
        return _fmt(self, 0)


@dataclass(frozen=True)
class SBox(Formula):  # [*]: settled true
    body: Formula

    def __str__(self) -> str:
        return _fmt(self, 0)


@dataclass(frozen=True)
class CDia(Formula):  # <0>: true in some world of the agent's current choice
    body: Formula

    def __str__(self) -> str:
        return _fmt(self, 0)


@dataclass(frozen=True)
class CBox(Formula):  # [0]: the agent sees to it
    body: Formula

    def __str__(self) -> str:
        return _fmt(self, 0)


@dataclass(frozen=True)
class ODia(Formula):  # <o>: permitted (true in some ideal world)
    body: Formula

    def __str__(self) -> str:
        return _fmt(self, 0)


@dataclass(frozen=True)
class OBox(Formula):  # [o]: obligatory (true in all ideal worlds)
    body: Formula

    def __str__(self) -> str:
        return _fmt(self, 0)


_STIT_NODES = (SDia, SBox, CDia, CBox, ODia, OBox)
_DUALS = {Or: And, And: Or, GDia: GBox, GBox: GDia, SDia: SBox, SBox: SDia,
          CDia: CBox, CBox: CDia, ODia: OBox, OBox: ODia}


def negate(f: Formula) -> Formula:
    """Dual of ``f``: swap each literal, connective and modality with its dual."""
    if isinstance(f, Lit):
        return Lit(f.name, not f.positive)
    if isinstance(f, Top):
        return Bot()
    if isinstance(f, Bot):
        return Top()
    if isinstance(f, (Or, And)):
        return _DUALS[type(f)](negate(f.left), negate(f.right))
    if isinstance(f, (GDia, GBox)):
        return _DUALS[type(f)](f.char, negate(f.body))
    return _DUALS[type(f)](negate(f.body))


def implies(f: Formula, g: Formula) -> Formula:
    return Or(negate(f), g)


def complexity(f: Formula) -> int:
    """Number of binary connectives and modalities along a deepest branch.

    Literals count 0; ``top``/``bot`` count 1 (they stand in for a
    one-connective tautology/contradiction).
    """
    if isinstance(f, Lit):
        return 0
    if isinstance(f, (Top, Bot)):
        return 1
    if isinstance(f, (Or, And)):
        return max(complexity(f.left), complexity(f.right)) + 1
    return complexity(f.body) + 1


def literals(f: Formula) -> frozenset:
    """Set of (atom name, polarity) pairs occurring in ``f``."""
    if isinstance(f, Lit):
        return frozenset([(f.name, f.positive)])
    if isinstance(f, (Top, Bot)):
        return frozenset()
    if isinstance(f, (Or, And)):
        return literals(f.left) | literals(f.right)
    return literals(f.body)


def subformulas(f: Formula):
    """All subformula occurrences of ``f``, including ``f`` itself."""
    out = [f]
    if isinstance(f, (Or, And)):
        out += subformulas(f.left) + subformulas(f.right)
    elif isinstance(f, (GDia, GBox, SDia, SBox, CDia, CBox, ODia, OBox)):
        out += subformulas(f.body)
    return out


def family(f: Formula) -> str | None:
    """GRAMMAR, STIT, or None for purely propositional formulas."""
    fams = set()
    for g in subformulas(f):
        if isinstance(g, (GDia, GBox)):
            fams.add(GRAMMAR)
        elif isinstance(g, _STIT_NODES):
            fams.add(STIT)
    if len(fams) > 1:
        raise ValueError("formula mixes modal families")
    return fams.pop() if fams else None


def formula_key(f: Formula):
    """Total order on formulas, used for canonical (multiset) sequent forms."""
    if isinstance(f, Lit):
        return (0, f.name, f.positive)
    if isinstance(f, Bot):
        return (1,)
    if isinstance(f, Top):
        return (2,)
    if isinstance(f, Or):
        return (3, formula_key(f.left), formula_key(f.right))
    if isinstance(f, And):
        return (4, formula_key(f.left), formula_key(f.right))
    if isinstance(f, GDia):
        return (5, f.char, formula_key(f.body))
    if isinstance(f, GBox):
        return (6, f.char, formula_key(f.body))
    order = {SDia: 7, SBox: 8, CDia: 9, CBox: 10, ODia: 11, OBox: 12}
    return (order[type(f)], formula_key(f.body))


# ---------------------------------------------------------------------------
# Concrete syntax
# ---------------------------------------------------------------------------
#
#   phi ::= ATOM | "~" ATOM | "top" | "bot" | "(" phi ")"
#         | phi "&" phi | phi "|" phi | phi "->" phi
#         | "<" IDX ">" phi | "[" IDX "]" phi
#
# Precedence: modalities/~ bind tightest, then &, then |, then -> (right
# associative).  "&" and "|" associate to the left.  IDX is "*", "0" or "o"
# for the agentive modalities and any other identifier (with optional
# trailing apostrophe) for a grammar character; "a -> b" desugars to
# "~a | b" via negate, so parsed formulas are always in NNF.


class ParseError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


_TOKEN = re.compile(r"\s*(->|[~&|()\[\]<>*']|[A-Za-z_][A-Za-z_0-9]*|\d+|.)")

_RESERVED_IDX = {"*": (SDia, SBox), "0": (CDia, CBox), "o": (ODia, OBox)}


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = []  # (token, offset)
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m or not m.group(1).strip():
                break
            self.tokens.append((m.group(1), m.start(1)))
            pos = m.end()
        self.i = 0
        self.family: str | None = None

    def peek(self):
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def offset(self):
        return self.tokens[self.i][1] if self.i < len(self.tokens) else len(self.text)

    def take(self, expected=None):
        tok = self.peek()
        if tok is None or (expected is not None and tok != expected):
            want = repr(expected) if expected else "a token"
            raise ParseError(f"expected {want}, found {tok!r}", self.offset())
        self.i += 1
        return tok

    def set_family(self, fam: str):
        if self.family is None:
            self.family = fam
        elif self.family != fam:
            raise ParseError("formula mixes modal families", self.offset())

    def parse(self) -> Formula:
        f = self.imp()
        if self.peek() is not None:
            raise ParseError(f"unexpected trailing {self.peek()!r}", self.offset())
        return f

    def imp(self) -> Formula:
        lhs = self.disj()
        if self.peek() == "->":
            self.take()
            return Or(negate(lhs), self.imp())
        return lhs

    def disj(self) -> Formula:
        f = self.conj()
        while self.peek() == "|":
            self.take()
            f = Or(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.unary()
        while self.peek() == "&":
            self.take()
            f = And(f, self.unary())
        return f

    def modal_index(self):
        tok = self.take()
        if tok in _RESERVED_IDX:
            self.set_family(STIT)
            return _RESERVED_IDX[tok]
        if not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", tok):
            raise ParseError(f"bad modal index {tok!r}", self.offset())
        self.set_family(GRAMMAR)
        ch = Character(tok)
        if self.peek() == "'":
            self.take()
            ch = ch.conv
        return ch

    def unary(self) -> Formula:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input", self.offset())
        if tok == "~":
            self.take()
            name = self.take()
            if not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", name) or name in ("top", "bot"):
                raise ParseError("negation applies to atoms only", self.offset())
            return Lit(name, False)
        if tok == "(":
            self.take()
            f = self.imp()
            self.take(")")
            return f
        if tok == "<":
            self.take()
            idx = self.modal_index()
            self.take(">")
            body = self.unary()
            return GDia(idx, body) if isinstance(idx, Character) else idx[0](body)
        if tok == "[":
            self.take()
            idx = self.modal_index()
            self.take("]")
            body = self.unary()
            return GBox(idx, body) if isinstance(idx, Character) else idx[1](body)
        if tok == "top":
            self.take()
            return Top()
        if tok == "bot":
            self.take()
            return Bot()
        if re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", tok):
            self.take()
            return Lit(tok)
        raise ParseError(f"unexpected {tok!r}", self.offset())


def parse_formula(text: str, expect_family: str | None = None) -> Formula:
    p = _Parser(text)
    f = p.parse()
    if expect_family is not None and p.family not in (None, expect_family):
        raise ParseError(f"expected a {expect_family}-family formula", 0)
    return f


_PREC_OR, _PREC_AND, _PREC_UNARY = 1, 2, 3


def _fmt(f: Formula, prec: int) -> str:
    if isinstance(f, (Lit, Top, Bot)):
        return Lit.__str__(f) if isinstance(f, Lit) else ("top" if isinstance(f, Top) else "bot")
    if isinstance(f, Or):
        s = f"{_fmt(f.left, _PREC_OR)} | {_fmt(f.right, _PREC_OR + 1)}"
        return f"({s})" if prec > _PREC_OR else s
    if isinstance(f, And):
        s = f"{_fmt(f.left, _PREC_AND)} & {_fmt(f.right, _PREC_AND + 1)}"
        return f"({s})" if prec > _PREC_AND else s
    if isinstance(f, GDia):
        return f"<{f.char}>{_fmt(f.body, _PREC_UNARY)}"
    if isinstance(f, GBox):
        return f"[{f.char}]{_fmt(f.body, _PREC_UNARY)}"
    sym = {SDia: "<*>", SBox: "[*]", CDia: "<0>", CBox: "[0]", ODia: "<o>", OBox: "[o]"}
    return f"{sym[type(f)]}{_fmt(f.body, _PREC_UNARY)}"


def fmt(f: Formula) -> str:
    """Render ``f`` in the concrete syntax; ``parse_formula`` inverts this."""
    return _fmt(f, 0)
