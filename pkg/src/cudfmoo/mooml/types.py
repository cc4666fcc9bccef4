"""Damas-Milner type inference for MooML, with package-record safety.

Package records carry a *safety* component: a variable, ``safe`` or
``unsafe``.  Projecting ``is-installed`` (directly, through a record
pattern, or implicitly through structural equality) forces ``unsafe``.
Safety variables generalize like type variables, so library combinators
and user functions stay safety-polymorphic.

Locality analysis re-types a closed expression under the premise that
``u`` is a list of ``safe`` packages; see :func:`classify_locality`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Tuple

from ..model import EMPTY_PREAMBLE, KEEP_LABELS, Preamble, PropertyType
from . import ast as A

SAFE = "safe"
UNSAFE = "unsafe"
GENERIC = 10**9


class MoomlTypeError(Exception):
    def __init__(self, message: str, pos: A.Pos = None):
        self.message = message
        self.pos = pos
        where = f"{pos[0]}:{pos[1]}: " if pos else ""
        super().__init__(where + message)


class LocalityError(Exception):
    """The expression is not a closed function from packages."""


_ids = itertools.count()


class TVar:
    __slots__ = ("id", "ref", "level")

    def __init__(self, level: int):
        self.id = next(_ids)
        self.ref = None
        self.level = level


class SVar:
    __slots__ = ("id", "ref", "level")

    def __init__(self, level: int):
        self.id = next(_ids)
        self.ref = None
        self.level = level


class TCon:
    """Constructed type: base types, ``list``, ``->``, ``*`` (tuple), ``request``."""

    __slots__ = ("name", "args")

    def __init__(self, name: str, args: tuple = ()):
        self.name = name
        self.args = args


class TEnum:
    __slots__ = ("labels",)

    def __init__(self, labels):
        self.labels = frozenset(labels)


class TPkg:
    __slots__ = ("safety",)

    def __init__(self, safety):
        self.safety = safety


class TRec:
    """Anonymous record type of a literal that matches neither schema."""

    __slots__ = ("fields",)

    def __init__(self, fields: Dict[str, object]):
        self.fields = dict(sorted(fields.items()))


INT = TCon("int")
BOOL = TCon("bool")
STRING = TCon("string")
UNIT = TCon("unit")
VERSION = TCon("version")
PKGNAME = TCon("pkgname")
FORMULA = TCon("formula")
VPKGLIST = TCon("vpkglist")
REQUEST = TCon("request")
KEEP_ENUM = TEnum(KEEP_LABELS)


def list_of(t) -> TCon:
    return TCon("list", (t,))


def arrow(a, b) -> TCon:
    return TCon("->", (a, b))


def tuple_of(items) -> TCon:
    return TCon("*", tuple(items))


def prune(t):
    while isinstance(t, TVar) and t.ref is not None:
        if isinstance(t.ref, TVar) and t.ref.ref is not None:
            t.ref = t.ref.ref
        t = t.ref
    return t


def prune_s(s):
    while isinstance(s, SVar) and s.ref is not None:
        s = s.ref
    return s


def is_arrow_from_package(t) -> bool:
    t = prune(t)
    return isinstance(t, TCon) and t.name == "->" and isinstance(prune(t.args[0]), TPkg)


@dataclass(frozen=True)
class Scheme:
    tvars: Tuple[TVar, ...]
    svars: Tuple[SVar, ...]
    body: object

    def __str__(self) -> str:
        return scheme_to_str(self)


def mono(t) -> Scheme:
    return Scheme((), (), t)


# ---------------------------------------------------------------------------
# printing


def _namer():
    names: Dict[int, str] = {}

    def name(v) -> str:
        if v.id not in names:
            k = len(names)
            names[v.id] = chr(ord("a") + k % 26) + (str(k // 26) if k >= 26 else "")
        return "'" + names[v.id]

    return name


def type_to_str(t, _name=None) -> str:
    name = _name or _namer()

    def go(t, ctx: int) -> str:
        # ctx: 0 top, 1 arrow argument, 2 tuple item, 3 list argument
        t = prune(t)
        if isinstance(t, TVar):
            return name(t)
        if isinstance(t, TEnum):
            return "enum(" + ", ".join(sorted(t.labels)) + ")"
        if isinstance(t, TPkg):
            return "package[unsafe]" if prune_s(t.safety) == UNSAFE else "package"
        if isinstance(t, TRec):
            return "{" + ", ".join(f"{k} : {go(v, 0)}" for k, v in t.fields.items()) + "}"
        if t.name == "list":
            return f"{go(t.args[0], 3)} list"
        if t.name == "->":
            s = f"{go(t.args[0], 1)} -> {go(t.args[1], 0)}"
            return f"({s})" if ctx >= 1 else s
        if t.name == "*":
            s = " * ".join(go(x, 2) for x in t.args)
            return f"({s})" if ctx >= 2 else s
        return t.name

    return go(t, 0)


def _occurring_vars(t, out: List[TVar]) -> None:
    t = prune(t)
    if isinstance(t, TVar):
        if t not in out:
            out.append(t)
    elif isinstance(t, TCon):
        for a in t.args:
            _occurring_vars(a, out)
    elif isinstance(t, TRec):
        for v in t.fields.values():
            _occurring_vars(v, out)


def scheme_to_str(s: Scheme) -> str:
    name = _namer()
    order: List[TVar] = []
    _occurring_vars(s.body, order)
    quantified = [v for v in order if v in s.tvars]
    if not quantified:
        return type_to_str(s.body, name)
    head = " ".join(name(v) for v in quantified)
    return f"forall {head}. {type_to_str(s.body, name)}"


# ---------------------------------------------------------------------------
# schemas


def property_type_to_type(ptype: PropertyType):
    return {
        "int": INT,
        "bool": BOOL,
        "string": STRING,
        "pkgname": PKGNAME,
        "vpkglist": VPKGLIST,
        "vpkgformula": FORMULA,
    }.get(ptype.kind) or TEnum(ptype.labels)


def package_schema(preamble: Preamble) -> Dict[str, object]:
    fields = {
        "name": PKGNAME,
        "version": VERSION,
        "depends": FORMULA,
        "conflicts": VPKGLIST,
        "provides": VPKGLIST,
        "keep": KEEP_ENUM,
        "was-installed": BOOL,
        "is-installed": BOOL,
    }
    for name, ptype in preamble.declarations:
        fields[name] = property_type_to_type(ptype)
    return fields


REQUEST_SCHEMA = {"install": VPKGLIST, "remove": VPKGLIST, "upgrade": VPKGLIST}


# ---------------------------------------------------------------------------
# standard library


def _poly(n_types: int, build) -> Scheme:
    vs = [TVar(GENERIC) for _ in range(n_types)]
    return Scheme(tuple(vs), (), build(*vs))


def stdlib_schemes() -> Dict[str, Scheme]:
    int2 = mono(arrow(INT, arrow(INT, INT)))
    bool2 = mono(arrow(BOOL, arrow(BOOL, BOOL)))
    pred_list = lambda result: _poly(1, lambda a: arrow(arrow(a, BOOL), arrow(list_of(a), result)))  # noqa: E731
    rel = lambda: _poly(1, lambda a: arrow(a, arrow(a, BOOL)))  # noqa: E731
    return {
        "fold": _poly(2, lambda a, b: arrow(arrow(a, arrow(b, b)), arrow(list_of(a), arrow(b, b)))),
        "map": _poly(2, lambda a, b: arrow(arrow(a, b), arrow(list_of(a), list_of(b)))),
        "filter": _poly(1, lambda a: arrow(arrow(a, BOOL), arrow(list_of(a), list_of(a)))),
        "length": _poly(1, lambda a: arrow(list_of(a), INT)),
        "sum": mono(arrow(list_of(INT), INT)),
        "max": mono(arrow(list_of(INT), INT)),
        "min": mono(arrow(list_of(INT), INT)),
        "forall": pred_list(BOOL),
        "exists": pred_list(BOOL),
        "cardinality": pred_list(INT),
        "add": int2,
        "sub": int2,
        "+": int2,
        "-": int2,
        "&&": bool2,
        "||": bool2,
        "not": mono(arrow(BOOL, BOOL)),
        "==": rel(),
        "!=": rel(),
        "<": rel(),
        "<=": rel(),
        ">": rel(),
        ">=": rel(),
    }


STDLIB = stdlib_schemes()
EQ_OPS = frozenset(("==", "!="))
ORD_OPS = frozenset(("<", "<=", ">", ">="))
STDLIB_NAMES = frozenset(STDLIB)


# ---------------------------------------------------------------------------
# inference


def _fmt(t) -> str:
    return type_to_str(t)


class Inferencer:
    """One inference run; unification state is local to the instance."""

    def __init__(self, preamble: Optional[Preamble] = None, safe_universe: bool = False):
        self.preamble = preamble or EMPTY_PREAMBLE
        self.pkg_fields = package_schema(self.preamble)
        self.enum_sets = {KEEP_ENUM.labels}
        for _, ptype in self.preamble.declarations:
            if ptype.kind == "enum":
                self.enum_sets.add(frozenset(ptype.labels))
        self.level = 0
        self.pending: List[Tuple[str, object, A.Pos]] = []
        self.node_types: Dict[int, object] = {}
        self.nodes: List[A.Expr] = []  # keeps annotated nodes alive so ids stay unique
        universe = TPkg(SAFE if safe_universe else UNSAFE)
        self.env: Dict[str, Scheme] = dict(STDLIB)
        self.env["u"] = mono(list_of(universe))
        self.env["r"] = mono(REQUEST)

    # -- variables
    def fresh(self) -> TVar:
        return TVar(self.level)

    def fresh_s(self) -> SVar:
        return SVar(self.level)

    def instantiate(self, s: Scheme):
        if not s.tvars and not s.svars:
            return s.body
        tmap = {v.id: self.fresh() for v in s.tvars}
        smap = {v.id: self.fresh_s() for v in s.svars}

        def copy(t):
            t = prune(t)
            if isinstance(t, TVar):
                return tmap.get(t.id, t)
            if isinstance(t, TCon):
                return TCon(t.name, tuple(copy(a) for a in t.args)) if t.args else t
            if isinstance(t, TPkg):
                sv = prune_s(t.safety)
                return TPkg(smap.get(sv.id, sv) if isinstance(sv, SVar) else sv)
            if isinstance(t, TRec):
                return TRec({k: copy(v) for k, v in t.fields.items()})
            return t

        return copy(s.body)

    def _blocked(self) -> set:
        out: List[TVar] = []
        for kind, t, _ in self.pending:
            _occurring_vars(t, out)
        return {v.id for v in out}

    def generalize(self, t) -> Scheme:
        blocked = self._blocked()
        tvars: List[TVar] = []
        svars: List[SVar] = []

        def scan(t):
            t = prune(t)
            if isinstance(t, TVar):
                if t.level > self.level and t.id not in blocked and t not in tvars:
                    tvars.append(t)
            elif isinstance(t, TCon):
                for a in t.args:
                    scan(a)
            elif isinstance(t, TPkg):
                s = prune_s(t.safety)
                if isinstance(s, SVar) and s.level > self.level and s not in svars:
                    svars.append(s)
            elif isinstance(t, TRec):
                for v in t.fields.values():
                    scan(v)

        scan(t)
        return Scheme(tuple(tvars), tuple(svars), t)

    # -- unification
    def unify(self, a, b, pos: A.Pos, context: str = "") -> None:
        try:
            self._unify(a, b)
        except _Clash as exc:
            msg = f"type mismatch: {_fmt(a)} vs {_fmt(b)}"
            if exc.detail:
                msg += f" ({exc.detail})"
            if context:
                msg = f"{context}: {msg}"
            raise MoomlTypeError(msg, pos) from None

    def _unify(self, a, b) -> None:
        a, b = prune(a), prune(b)
        if a is b:
            return
        if isinstance(a, TVar):
            self._bind(a, b)
            return
        if isinstance(b, TVar):
            self._bind(b, a)
            return
        if isinstance(a, TCon) and isinstance(b, TCon):
            if a.name != b.name or len(a.args) != len(b.args):
                raise _Clash()
            for x, y in zip(a.args, b.args):
                self._unify(x, y)
            return
        if isinstance(a, TEnum) and isinstance(b, TEnum):
            if a.labels != b.labels:
                raise _Clash("different enumerations")
            return
        if isinstance(a, TPkg) and isinstance(b, TPkg):
            self.unify_safety(a.safety, b.safety)
            return
        if isinstance(a, TRec) and isinstance(b, TRec):
            if a.fields.keys() != b.fields.keys():
                raise _Clash("different record labels")
            for k in a.fields:
                self._unify(a.fields[k], b.fields[k])
            return
        raise _Clash()

    def _bind(self, v: TVar, t) -> None:
        def visit(t):
            t = prune(t)
            if t is v:
                raise _Clash("infinite type")
            if isinstance(t, TVar):
                t.level = min(t.level, v.level)
            elif isinstance(t, TCon):
                for a in t.args:
                    visit(a)
            elif isinstance(t, TPkg):
                s = prune_s(t.safety)
                if isinstance(s, SVar):
                    s.level = min(s.level, v.level)
            elif isinstance(t, TRec):
                for x in t.fields.values():
                    visit(x)

        visit(t)
        v.ref = t

    def unify_safety(self, a, b) -> None:
        a, b = prune_s(a), prune_s(b)
        if a is b:
            return
        if isinstance(a, SVar):
            if isinstance(b, SVar):
                b.level = min(a.level, b.level)
            a.ref = b
            return
        if isinstance(b, SVar):
            b.ref = a
            return
        if a != b:
            raise _Clash("is-installed is read from a package of the safe universe")

    def force_unsafe(self, t, pos: A.Pos, why: str) -> None:
        t = prune(t)
        if isinstance(t, TPkg):
            try:
                self.unify_safety(t.safety, UNSAFE)
            except _Clash:
                raise MoomlTypeError(f"{why} reads is-installed of a safe package", pos) from None
        elif isinstance(t, TCon):
            for a in t.args:
                self.force_unsafe(a, pos, why)
        elif isinstance(t, TRec):
            for v in t.fields.values():
                self.force_unsafe(v, pos, why)

    # -- record and enum resolution
    def _record_type(self, labels, pos: A.Pos, what: str):
        """Nominal resolution of a projection or record pattern by its labels."""
        in_pkg = all(label in self.pkg_fields for label in labels)
        in_req = all(label in REQUEST_SCHEMA for label in labels)
        if in_pkg and in_req:
            raise MoomlTypeError(
                f"ambiguous {what} {', '.join(labels)}: add a type ascription such as (e : package)", pos)
        if in_pkg:
            return TPkg(self.fresh_s())
        if in_req:
            return REQUEST
        missing = [label for label in labels if label not in self.pkg_fields and label not in REQUEST_SCHEMA]
        if missing:
            raise MoomlTypeError(f"unknown label {missing[0]}", pos)
        raise MoomlTypeError(f"no record type has all of the labels {', '.join(labels)}", pos)

    def field_type(self, rec, label: str, pos: A.Pos):
        rec = prune(rec)
        if isinstance(rec, TVar):
            resolved = self._record_type([label], pos, "label")
            self.unify(rec, resolved, pos)
            rec = resolved
        if isinstance(rec, TPkg):
            if label not in self.pkg_fields:
                raise MoomlTypeError(f"unknown label {label} for package records", pos)
            if label == "is-installed":
                try:
                    self.unify_safety(rec.safety, UNSAFE)
                except _Clash:
                    raise MoomlTypeError("is-installed is read from a package of the safe universe", pos) from None
            return self.pkg_fields[label]
        if isinstance(rec, TCon) and rec.name == "request":
            if label not in REQUEST_SCHEMA:
                raise MoomlTypeError(f"unknown label {label} for the request record", pos)
            return REQUEST_SCHEMA[label]
        if isinstance(rec, TRec):
            if label not in rec.fields:
                raise MoomlTypeError(f"unknown label {label} for record {_fmt(rec)}", pos)
            return rec.fields[label]
        raise MoomlTypeError(f"projection .{label} on a non-record of type {_fmt(rec)}", pos)

    def enum_type(self, label: str, pos: A.Pos) -> TEnum:
        sets = [s for s in self.enum_sets if label in s]
        if not sets:
            raise MoomlTypeError(f"unknown enumeration label '{label}", pos)
        if len(sets) > 1:
            raise MoomlTypeError(f"ambiguous enumeration label '{label}: add a type ascription", pos)
        return TEnum(sets[0])

    # -- type expressions
    def from_type_expr(self, te: A.TypeExpr, tyvars: Dict[str, TVar]):
        if isinstance(te, A.TyName):
            if te.name == "package":
                return TPkg(self.fresh_s())
            return {"int": INT, "bool": BOOL, "string": STRING, "unit": UNIT, "version": VERSION,
                    "pkgname": PKGNAME, "formula": FORMULA, "vpkglist": VPKGLIST, "request": REQUEST}[te.name]
        if isinstance(te, A.TyVar):
            if te.name not in tyvars:
                tyvars[te.name] = self.fresh()
            return tyvars[te.name]
        if isinstance(te, A.TyEnum):
            return TEnum(te.labels)
        if isinstance(te, A.TyList):
            return list_of(self.from_type_expr(te.item, tyvars))
        if isinstance(te, A.TyTuple):
            return tuple_of(self.from_type_expr(x, tyvars) for x in te.items)
        return arrow(self.from_type_expr(te.arg, tyvars), self.from_type_expr(te.result, tyvars))

    # -- expressions
    def infer(self, e: A.Expr, env: Dict[str, Scheme]):
        t = self._infer(e, env)
        self.node_types[id(e)] = t
        self.nodes.append(e)
        return t

    def _infer(self, e: A.Expr, env: Dict[str, Scheme]):
        if isinstance(e, A.Var):
            scheme = env.get(e.name)
            if scheme is None:
                raise MoomlTypeError(f"unbound identifier {e.name}", e.pos)
            t = self.instantiate(scheme)
            if scheme is STDLIB.get(e.name):
                if e.name in EQ_OPS:
                    self.pending.append(("eq", prune(t).args[0], e.pos))
                elif e.name in ORD_OPS:
                    self.pending.append(("ord", prune(t).args[0], e.pos))
            return t
        if isinstance(e, A.Lit):
            v = e.value
            if isinstance(v, bool):
                return BOOL
            if isinstance(v, A.Label):
                return self.enum_type(v, e.pos)
            if isinstance(v, int):
                return INT
            return STRING
        if isinstance(e, A.Fun):
            tv = self.fresh()
            body = self.infer(e.body, {**env, e.param: mono(tv)})
            return arrow(tv, body)
        if isinstance(e, A.App):
            tf = self.infer(e.fn, env)
            ta = self.infer(e.arg, env)
            fn = prune(tf)
            if isinstance(fn, TCon) and fn.name == "->":
                self.unify(fn.args[0], ta, e.arg.pos or e.pos, "argument")
                return fn.args[1]
            if isinstance(fn, TVar):
                result = self.fresh()
                self.unify(fn, arrow(ta, result), e.pos)
                return result
            raise MoomlTypeError(f"applying a non-function of type {_fmt(fn)}", e.pos)
        if isinstance(e, A.Unit):
            return UNIT
        if isinstance(e, A.Tuple_):
            return tuple_of(self.infer(x, env) for x in e.items)
        if isinstance(e, A.Record):
            labels = [k for k, _ in e.fields]
            types = {k: self.infer(x, env) for k, x in e.fields}
            if set(labels) == set(self.pkg_fields):
                for k, t in types.items():
                    self.unify(t, self.pkg_fields[k], e.pos, f"field {k}")
                return TPkg(self.fresh_s())
            if set(labels) == set(REQUEST_SCHEMA):
                for k, t in types.items():
                    self.unify(t, REQUEST_SCHEMA[k], e.pos, f"field {k}")
                return REQUEST
            return TRec(types)
        if isinstance(e, A.Nil):
            return list_of(self.fresh())
        if isinstance(e, A.Cons):
            th = self.infer(e.head, env)
            tt = self.infer(e.tail, env)
            self.unify(tt, list_of(th), e.pos, "list tail")
            return tt
        if isinstance(e, A.Proj):
            rec = self.infer(e.expr, env)
            return self.field_type(rec, e.label, e.pos)
        if isinstance(e, A.Let):
            if isinstance(e.pattern, A.PVar):
                self.level += 1
                tb = self.infer(e.bound, env)
                self.level -= 1
                scheme = self.generalize(tb)
                return self.infer(e.body, {**env, e.pattern.name: scheme})
            tb = self.infer(e.bound, env)
            inner = self.bind_pattern(e.pattern, tb, dict(env))
            return self.infer(e.body, inner)
        if isinstance(e, A.Match):
            ts = self.infer(e.scrutinee, env)
            result = self.fresh()
            for pat, body in e.arms:
                inner = self.bind_pattern(pat, ts, dict(env))
                tb = self.infer(body, inner)
                self.unify(result, tb, body.pos or e.pos, "match arm")
            return result
        if isinstance(e, A.Ascribe):
            target = self.from_type_expr(e.type, {})
            if isinstance(e.expr, A.Lit) and isinstance(e.expr.value, A.Label) and isinstance(target, TEnum):
                if e.expr.value not in target.labels:
                    raise MoomlTypeError(f"label '{e.expr.value} is not in {_fmt(target)}", e.pos)
                self.node_types[id(e.expr)] = target
                self.nodes.append(e.expr)
                return target
            t = self.infer(e.expr, env)
            self.unify(t, target, e.pos, "ascription")
            return target
        raise TypeError(f"not an expression: {e!r}")

    def bind_pattern(self, pat: A.Pattern, t, env: Dict[str, Scheme]) -> Dict[str, Scheme]:
        if isinstance(pat, A.PVar):
            env[pat.name] = mono(t)
        elif isinstance(pat, A.PWild):
            pass
        elif isinstance(pat, A.PConst):
            v = pat.value
            lt = BOOL if isinstance(v, bool) else INT if isinstance(v, int) else STRING
            self.unify(t, lt, pat.pos, "pattern")
        elif isinstance(pat, A.PEnum):
            target = prune(t)
            if isinstance(target, TEnum):
                if pat.label not in target.labels:
                    raise MoomlTypeError(f"label '{pat.label} is not in {_fmt(target)}", pat.pos)
            else:
                self.unify(t, self.enum_type(pat.label, pat.pos), pat.pos, "pattern")
        elif isinstance(pat, A.PUnit):
            self.unify(t, UNIT, pat.pos, "pattern")
        elif isinstance(pat, A.PTuple):
            items = [self.fresh() for _ in pat.items]
            self.unify(t, tuple_of(items), pat.pos, "pattern")
            for p, it in zip(pat.items, items):
                self.bind_pattern(p, it, env)
        elif isinstance(pat, A.PRecord):
            labels = [k for k, _ in pat.fields]
            rec = prune(t)
            if isinstance(rec, TVar):
                resolved = self._record_type(labels, pat.pos, "record pattern")
                self.unify(rec, resolved, pat.pos)
            for k, p in pat.fields:
                self.bind_pattern(p, self.field_type(t, k, pat.pos), env)
        elif isinstance(pat, A.PNil):
            self.unify(t, list_of(self.fresh()), pat.pos, "pattern")
        elif isinstance(pat, A.PCons):
            item = self.fresh()
            self.unify(t, list_of(item), pat.pos, "pattern")
            self.bind_pattern(pat.head, item, env)
            self.bind_pattern(pat.tail, t, env)
        else:
            raise TypeError(f"not a pattern: {pat!r}")
        return env

    def finish(self) -> None:
        """Discharge deferred equality and ordering constraints."""
        for kind, t, pos in self.pending:
            if kind == "eq":
                self.force_unsafe(t, pos, "structural equality")
            else:
                r = prune(t)
                bad = (isinstance(r, (TPkg, TRec))
                       or isinstance(r, TCon) and r.name in ("->", "request", "formula", "vpkglist", "unit"))
                if bad:
                    raise MoomlTypeError(f"values of type {_fmt(r)} cannot be ordered", pos)
        self.pending = []


class _Clash(Exception):
    def __init__(self, detail: str = ""):
        self.detail = detail


# ---------------------------------------------------------------------------
# public API


@dataclass
class TypedProgram:
    program: A.Program
    schemes: Dict[str, Scheme]
    node_types: Dict[int, object]
    _keepalive: list

    def type_of(self, node: A.Expr):
        return prune(self.node_types[id(node)])


def infer_program(program: A.Program, preamble: Optional[Preamble] = None) -> TypedProgram:
    """Type a whole program; raises :class:`MoomlTypeError`."""
    inf = Inferencer(preamble)
    env = inf.env
    schemes: Dict[str, Scheme] = {}
    for name, body in program.definitions:
        inf.level += 1
        t = inf.infer(body, env)
        inf.level -= 1
        scheme = inf.generalize(t)
        env = {**env, name: scheme}
        schemes[name] = scheme
    if program.constraint is not None:
        t = inf.infer(program.constraint, env)
        inf.unify(t, BOOL, program.constraint.pos, "the constraint must be boolean")
    for polarity, e in program.criteria:
        t = inf.infer(e, env)
        inf.unify(t, INT, e.pos, f"{polarity} criteria must be integers")
    inf.finish()
    return TypedProgram(program, schemes, inf.node_types, inf.nodes)


def infer_expr(e: A.Expr, preamble: Optional[Preamble] = None, safe_universe: bool = False,
               env: Optional[Dict[str, Scheme]] = None):
    """Infer the type of a single expression; returns a generalized :class:`Scheme`."""
    inf = Inferencer(preamble, safe_universe)
    if env:
        inf.env.update(env)
    inf.level += 1
    t = inf.infer(e, inf.env)
    inf.level -= 1
    inf.finish()
    return inf.generalize(t)


def stdlib_scheme(name: str) -> Scheme:
    return STDLIB[name]


class Locality(Enum):
    LOCAL_A = "LocalA"
    LOCAL_B = "LocalB"
    NON_LOCAL = "NonLocal"


def classify_locality(e: A.Expr, preamble: Optional[Preamble] = None) -> Locality:
    """Classify a closed expression of type ``package -> t``.

    LOCAL_A: independent of every is-installed value.  LOCAL_B: depends on
    the is-installed value of its argument only.  NON_LOCAL otherwise.
    """
    unbound = set(A.free_vars(e)) - STDLIB_NAMES - {"u", "r"}
    if unbound:
        raise LocalityError(f"expression has free identifiers: {', '.join(sorted(unbound))}")
    try:
        scheme = infer_expr(e, preamble)
    except MoomlTypeError as exc:
        raise LocalityError(f"expression is ill-typed: {exc}") from None
    if not is_arrow_from_package(scheme.body):
        raise LocalityError(f"expression has type {type_to_str(scheme.body)}, not package -> t")
    try:
        safe = infer_expr(e, preamble, safe_universe=True)
    except MoomlTypeError:
        return Locality.NON_LOCAL
    arg = prune(prune(safe.body).args[0])
    return Locality.LOCAL_B if prune_s(arg.safety) == UNSAFE else Locality.LOCAL_A
