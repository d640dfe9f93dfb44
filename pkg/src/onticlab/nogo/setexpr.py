"""A tiny language for assertions about sets of ontic states.

Grammar (unicode or ASCII operators)::

    assertion := expr REL expr
    REL       := "=" | "⊆" | "<=" | "≠" | "!=" | "⟶" | "->"
    expr      := term (("∪" | "|") term)*
    term      := factor (("∩" | "&") factor)*
    factor    := atom | "∅" | "{}" | "(" expr ")"
    atom      := "L[" prep [";" outcome [";" member]] "]"

``L[p]`` is the ontic support of preparation p, ``L[p;o;m]`` the part of it
that can yield outcome o when member m is applied before the measurement, and
``L[p;o]`` the member-independent version licensed by ontic indifference.
``A ⟶ B`` says B is the time-evolved image of A.  Intersection binds tighter
than union.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from ..errors import TraceSyntaxError


@dataclass(frozen=True)
class Atom:
    prep: str
    outcome: str | None = None
    member: str | None = None

    def __str__(self) -> str:
        parts = [self.prep] + [x for x in (self.outcome, self.member) if x is not None]
        return "L[" + ";".join(parts) + "]"


@dataclass(frozen=True)
class Empty:
    def __str__(self) -> str:
        return "∅"


@dataclass(frozen=True)
class Inter:
    args: tuple["Expr", ...]

    def __str__(self) -> str:
        return " ∩ ".join(f"({a})" if isinstance(a, Union_) else str(a) for a in self.args)


@dataclass(frozen=True)
class Union_:
    args: tuple["Expr", ...]

    def __str__(self) -> str:
        return " ∪ ".join(f"({a})" if isinstance(a, Union_) else str(a) for a in self.args)


Expr = Union[Atom, Empty, Inter, Union_]

RELATIONS = {"=": "=", "⊆": "⊆", "<=": "⊆", "≠": "≠", "!=": "≠", "⟶": "⟶", "->": "⟶"}


@dataclass(frozen=True)
class Assertion:
    lhs: Expr
    rel: str  # "=", "⊆", "≠" or "⟶"
    rhs: Expr

    def __str__(self) -> str:
        return f"{self.lhs} {self.rel} {self.rhs}"


def inter(*args: Expr) -> Expr:
    return args[0] if len(args) == 1 else Inter(tuple(args))


def union(*args: Expr) -> Expr:
    return args[0] if len(args) == 1 else Union_(tuple(args))


# parsing ---------------------------------------------------------------------------------


def _tokenize(text: str) -> list[str]:
    toks = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
        elif text.startswith("L[", i):
            j = text.find("]", i)
            if j < 0:
                raise TraceSyntaxError(f"unterminated atom at {i} in {text!r}")
            toks.append(text[i : j + 1])
            i = j + 1
        elif text.startswith(("<=", "!=", "->", "{}"), i):
            toks.append(text[i : i + 2])
            i += 2
        elif ch in "=⊆≠⟶∪∩|&∅()":
            toks.append(ch)
            i += 1
        else:
            raise TraceSyntaxError(f"unexpected character {ch!r} at {i} in {text!r}")
    return toks


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.pos = 0

    def peek(self) -> str | None:
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def take(self) -> str:
        tok = self.peek()
        if tok is None:
            raise TraceSyntaxError(f"unexpected end of {self.text!r}")
        self.pos += 1
        return tok

    def assertion(self) -> Assertion:
        lhs = self.expr()
        rel = self.take()
        if rel not in RELATIONS:
            raise TraceSyntaxError(f"expected a relation, got {rel!r} in {self.text!r}")
        rhs = self.expr()
        if self.peek() is not None:
            raise TraceSyntaxError(f"trailing tokens in {self.text!r}")
        return Assertion(lhs, RELATIONS[rel], rhs)

    def expr(self) -> Expr:
        args = [self.term()]
        while self.peek() in ("∪", "|"):
            self.take()
            args.append(self.term())
        return union(*args)

    def term(self) -> Expr:
        args = [self.factor()]
        while self.peek() in ("∩", "&"):
            self.take()
            args.append(self.factor())
        return inter(*args)

    def factor(self) -> Expr:
        tok = self.take()
        if tok in ("∅", "{}"):
            return Empty()
        if tok == "(":
            e = self.expr()
            if self.take() != ")":
                raise TraceSyntaxError(f"missing ')' in {self.text!r}")
            return e
        if tok.startswith("L["):
            parts = [p.strip() for p in tok[2:-1].split(";")]
            if not parts[0] or len(parts) > 3 or any(not p for p in parts):
                raise TraceSyntaxError(f"malformed atom {tok!r}")
            return Atom(*parts)
        raise TraceSyntaxError(f"unexpected token {tok!r} in {self.text!r}")


def parse_assertion(text: str) -> Assertion:
    return _Parser(text).assertion()


def parse_expr(text: str) -> Expr:
    p = _Parser(text)
    e = p.expr()
    if p.peek() is not None:
        raise TraceSyntaxError(f"trailing tokens in {text!r}")
    return e


# semantics -------------------------------------------------------------------------------


def atoms_of(node) -> set[Atom]:
    if isinstance(node, Assertion):
        return atoms_of(node.lhs) | atoms_of(node.rhs)
    if isinstance(node, Atom):
        return {node}
    if isinstance(node, (Inter, Union_)):
        out: set[Atom] = set()
        for a in node.args:
            out |= atoms_of(a)
        return out
    return set()


MAX_ATOMS = 22


def _eval(e: Expr, masks: dict[Atom, int], full: int) -> int:
    if isinstance(e, Atom):
        return masks[e]
    if isinstance(e, Empty):
        return 0
    vals = [_eval(a, masks, full) for a in e.args]
    out = full if isinstance(e, Inter) else 0
    for v in vals:
        out = out & v if isinstance(e, Inter) else out | v
    return out


def _rows_satisfying(a: Assertion, masks: dict[Atom, int], full: int) -> int:
    lhs, rhs = _eval(a.lhs, masks, full), _eval(a.rhs, masks, full)
    if a.rel == "=":
        return ~(lhs ^ rhs) & full
    if a.rel == "⊆":
        return (~lhs | rhs) & full
    raise ValueError(f"relation {a.rel} has no set-algebra meaning")


def _substitute(e: Expr, rep: dict[Atom, Atom]) -> Expr:
    if isinstance(e, Atom):
        return rep.get(e, e)
    if isinstance(e, Empty):
        return e
    return type(e)(tuple(_substitute(a, rep) for a in e.args))


def _merge_atom_equalities(premises: list[Assertion], conclusion: Assertion):
    """Replace atoms equated by a premise ``A = B`` with one representative.

    This leaves entailment unchanged and keeps the truth table small.
    """
    parent: dict[Atom, Atom] = {}

    def find(a: Atom) -> Atom:
        while parent.get(a, a) != a:
            a = parent[a]
        return a

    rest = []
    for p in premises:
        if p.rel == "=" and isinstance(p.lhs, Atom) and isinstance(p.rhs, Atom):
            x, y = sorted((find(p.lhs), find(p.rhs)), key=str)
            if x != y:
                parent[y] = x
        else:
            rest.append(p)
    rep = {a: find(a) for a in parent}
    sub = lambda a: Assertion(_substitute(a.lhs, rep), a.rel, _substitute(a.rhs, rep))
    return [sub(p) for p in rest], sub(conclusion)


def entails(premises: list[Assertion], conclusion: Assertion) -> bool:
    """Boolean-algebra entailment among (in)equalities of set expressions.

    A set identity holds iff it holds for each element separately, so checking
    every truth assignment of element-membership in the atoms is complete.
    Each atom gets a bitmask over the 2^k assignment rows.
    """
    for a in [*premises, conclusion]:
        if a.rel not in ("=", "⊆"):
            return False
    premises, conclusion = _merge_atom_equalities(list(premises), conclusion)
    atoms = sorted(set().union(*(atoms_of(a) for a in [*premises, conclusion])), key=str)
    k = len(atoms)
    if k > MAX_ATOMS:
        raise ValueError(f"{k} atoms exceed the truth-table limit {MAX_ATOMS}")
    rows = 1 << k
    full = (1 << rows) - 1
    masks = {}
    for i, atom in enumerate(atoms):
        half = 1 << i
        block = ((1 << half) - 1) << half  # ones where bit i of the row index is set
        period = (1 << (2 * half)) - 1
        masks[atom] = block * (full // period)
    ok_rows = full
    for p in premises:
        ok_rows &= _rows_satisfying(p, masks, full)
    return ok_rows & ~_rows_satisfying(conclusion, masks, full) & full == 0
