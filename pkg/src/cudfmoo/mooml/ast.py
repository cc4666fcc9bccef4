"""MooML abstract syntax.

Nodes are frozen dataclasses; source positions are carried but excluded
from equality so that parse/print round-trips compare structurally.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

Pos = Optional[Tuple[int, int]]


class Label(str):
    """An enumeration label such as ``'stable``."""

    __slots__ = ()

    def __repr__(self) -> str:
        return f"Label({str(self)!r})"


LitValue = Union[bool, int, str, Label]


def _pos():
    return field(default=None, compare=False, repr=False)


# --- type expressions (ascriptions) -----------------------------------------


@dataclass(frozen=True)
class TyName:
    """A named type: int, bool, string, unit, version, pkgname, formula, vpkglist, package, request."""

    name: str


@dataclass(frozen=True)
class TyVar:
    name: str


@dataclass(frozen=True)
class TyEnum:
    labels: Tuple[str, ...]


@dataclass(frozen=True)
class TyList:
    item: "TypeExpr"


@dataclass(frozen=True)
class TyTuple:
    items: Tuple["TypeExpr", ...]


@dataclass(frozen=True)
class TyArrow:
    arg: "TypeExpr"
    result: "TypeExpr"


TypeExpr = Union[TyName, TyVar, TyEnum, TyList, TyTuple, TyArrow]


# --- patterns ---------------------------------------------------------------


@dataclass(frozen=True)
class PVar:
    name: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class PConst:
    value: Union[bool, int, str]
    pos: Pos = _pos()

    def __eq__(self, other):
        return (isinstance(other, PConst) and type(self.value) is type(other.value)
                and self.value == other.value)

    def __hash__(self):
        return hash((type(self.value), self.value))


@dataclass(frozen=True)
class PEnum:
    label: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class PUnit:
    pos: Pos = _pos()


@dataclass(frozen=True)
class PTuple:
    items: Tuple["Pattern", ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class PRecord:
    fields: Tuple[Tuple[str, "Pattern"], ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class PNil:
    pos: Pos = _pos()


@dataclass(frozen=True)
class PCons:
    head: "Pattern"
    tail: "Pattern"
    pos: Pos = _pos()


@dataclass(frozen=True)
class PWild:
    pos: Pos = _pos()


Pattern = Union[PVar, PConst, PEnum, PUnit, PTuple, PRecord, PNil, PCons, PWild]


def pattern_vars(pat: Pattern) -> Tuple[str, ...]:
    if isinstance(pat, PVar):
        return (pat.name,)
    if isinstance(pat, PTuple):
        return tuple(v for p in pat.items for v in pattern_vars(p))
    if isinstance(pat, PRecord):
        return tuple(v for _, p in pat.fields for v in pattern_vars(p))
    if isinstance(pat, PCons):
        return pattern_vars(pat.head) + pattern_vars(pat.tail)
    return ()


# --- expressions ------------------------------------------------------------


@dataclass(frozen=True)
class Var:
    name: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class Lit:
    value: LitValue
    pos: Pos = _pos()

    def __eq__(self, other):
        # True == 1 in Python; literals of different MooML types must differ
        return (isinstance(other, Lit) and type(self.value) is type(other.value)
                and self.value == other.value)

    def __hash__(self):
        return hash((type(self.value), self.value))


@dataclass(frozen=True)
class Fun:
    param: str
    body: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class App:
    fn: "Expr"
    arg: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class Unit:
    pos: Pos = _pos()


@dataclass(frozen=True)
class Tuple_:
    items: Tuple["Expr", ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class Record:
    fields: Tuple[Tuple[str, "Expr"], ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class Nil:
    pos: Pos = _pos()


@dataclass(frozen=True)
class Cons:
    head: "Expr"
    tail: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class Proj:
    expr: "Expr"
    label: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class Let:
    pattern: Pattern
    bound: "Expr"
    body: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class Match:
    scrutinee: "Expr"
    arms: Tuple[Tuple[Pattern, "Expr"], ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class Ascribe:
    expr: "Expr"
    type: TypeExpr
    pos: Pos = _pos()


Expr = Union[Var, Lit, Fun, App, Unit, Tuple_, Record, Nil, Cons, Proj, Let, Match, Ascribe]


MINIMIZE = "minimize"
MAXIMIZE = "maximize"


@dataclass(frozen=True)
class Program:
    definitions: Tuple[Tuple[str, Expr], ...] = ()
    constraint: Optional[Expr] = None
    criteria: Tuple[Tuple[str, Expr], ...] = ()


# Operator spellings as they appear in Var nodes after desugaring.
BINARY_OPS = ("||", "&&", "==", "!=", "<", "<=", ">", ">=", "+", "-")
UNARY_OPS = ("not",)


def children(e: Expr) -> Tuple[Expr, ...]:
    if isinstance(e, Fun):
        return (e.body,)
    if isinstance(e, App):
        return (e.fn, e.arg)
    if isinstance(e, Tuple_):
        return e.items
    if isinstance(e, Record):
        return tuple(x for _, x in e.fields)
    if isinstance(e, Cons):
        return (e.head, e.tail)
    if isinstance(e, Proj):
        return (e.expr,)
    if isinstance(e, Let):
        return (e.bound, e.body)
    if isinstance(e, Match):
        return (e.scrutinee,) + tuple(x for _, x in e.arms)
    if isinstance(e, Ascribe):
        return (e.expr,)
    return ()


def walk(e: Expr):
    """Yield ``e`` and all sub-expressions, pre-order."""
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


def free_vars(e: Expr) -> frozenset:
    if isinstance(e, Var):
        return frozenset((e.name,))
    if isinstance(e, Fun):
        return free_vars(e.body) - {e.param}
    if isinstance(e, Let):
        return free_vars(e.bound) | (free_vars(e.body) - set(pattern_vars(e.pattern)))
    if isinstance(e, Match):
        out = free_vars(e.scrutinee)
        for pat, body in e.arms:
            out |= free_vars(body) - set(pattern_vars(pat))
        return out
    out = frozenset()
    for c in children(e):
        out |= free_vars(c)
    return out


def size(e: Expr) -> int:
    return sum(1 for _ in walk(e))
