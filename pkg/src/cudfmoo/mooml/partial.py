"""Partial evaluation: pre-compute local package functions into fresh CUDF properties.

A closed sub-expression of type ``package -> t`` that is *local* does not
depend on the proposed solution, except possibly through its own
argument's ``is-installed``.  Such an expression can be evaluated once per
package of the universe (LocalA), or twice, once per ``is-installed``
value (LocalB).  The results become fresh properties that a
:class:`Transformer` adds to the document, and the expression is replaced
by a projection of those properties.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Tuple

from ..model import RESERVED_PROPERTIES, CudfDoc, PackageKey, Preamble, PropertyType
from . import ast as A
from .evaluator import EnvBuilder, ExecError, RecordValue, eval_expr
from .types import (
    BOOL,
    FORMULA,
    INT,
    PKGNAME,
    STDLIB_NAMES,
    STRING,
    VPKGLIST,
    Locality,
    MoomlTypeError,
    TCon,
    TEnum,
    classify_locality,
    infer_expr,
    infer_program,
    is_arrow_from_package,
    package_schema,
    prune,
)

FRESH_PREFIX = "mooml-pe-"


class TransformerError(ValueError):
    """The transformer cannot be applied to the given document."""


@dataclass(frozen=True)
class FreshProperty:
    name: str
    ptype: PropertyType
    values: Tuple[Tuple[PackageKey, object], ...]

    def value_map(self) -> Dict[PackageKey, object]:
        return dict(self.values)


@dataclass(frozen=True)
class Transformer:
    """Fresh properties to add to any document shaped like the source one."""

    properties: Tuple[FreshProperty, ...] = ()
    source_preamble: Preamble = Preamble()

    def __post_init__(self):
        names = [p.name for p in self.properties]
        if len(set(names)) != len(names):
            raise ValueError("fresh property names must be distinct")

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(p.name for p in self.properties)


def apply_transformer(t: Transformer, doc: CudfDoc) -> CudfDoc:
    """Return ``doc`` extended with the fresh declarations and per-package values."""
    if not t.properties:
        return doc
    if doc.declarations != t.source_preamble:
        raise TransformerError("transformer not applicable: preamble declarations differ")
    maps = [p.value_map() for p in t.properties]
    keys = {p.key for p in doc.universe}
    for prop, values in zip(t.properties, maps):
        missing = sorted(set(values) - keys)
        if missing:
            name, version = missing[0]
            raise TransformerError(f"transformer not applicable: no package {name} version {version}")
    universe = []
    for pkg in doc.universe:
        extra = []
        for prop, values in zip(t.properties, maps):
            if pkg.key not in values:
                raise TransformerError(
                    f"transformer not applicable: no value of {prop.name} for {pkg.name} {pkg.version}")
            extra.append((prop.name, values[pkg.key]))
        universe.append(pkg.with_extra(extra))
    preamble = doc.declarations.extend((p.name, p.ptype) for p in t.properties)
    return CudfDoc(preamble, tuple(universe), doc.request)


# ---------------------------------------------------------------------------
# substitution and inlining


def all_names(e: A.Expr) -> set:
    out = set()
    for node in A.walk(e):
        if isinstance(node, A.Var):
            out.add(node.name)
        elif isinstance(node, A.Fun):
            out.add(node.param)
        elif isinstance(node, A.Let):
            out.update(A.pattern_vars(node.pattern))
        elif isinstance(node, A.Match):
            for pat, _ in node.arms:
                out.update(A.pattern_vars(pat))
    return out


def _rename_pattern(p: A.Pattern, ren: Dict[str, str]) -> A.Pattern:
    if isinstance(p, A.PVar):
        return A.PVar(ren.get(p.name, p.name), p.pos)
    if isinstance(p, A.PTuple):
        return A.PTuple(tuple(_rename_pattern(x, ren) for x in p.items), p.pos)
    if isinstance(p, A.PRecord):
        return A.PRecord(tuple((k, _rename_pattern(x, ren)) for k, x in p.fields), p.pos)
    if isinstance(p, A.PCons):
        return A.PCons(_rename_pattern(p.head, ren), _rename_pattern(p.tail, ren), p.pos)
    return p


class _Fresh:
    def __init__(self, avoid: Iterable[str]):
        self.avoid = set(avoid)

    def name(self, base: str) -> str:
        for k in itertools.count(1):
            cand = f"{base}-{k}"
            if cand not in self.avoid:
                self.avoid.add(cand)
                return cand
        raise AssertionError("unreachable")


def substitute(e: A.Expr, mapping: Dict[str, A.Expr]) -> A.Expr:
    """Capture-avoiding substitution of variables by expressions."""
    if not mapping:
        return e
    avoid = all_names(e)
    for v in mapping.values():
        avoid |= all_names(v)
    return _subst(e, mapping, _Fresh(avoid))


def _binder(names: Tuple[str, ...], mapping: Dict[str, A.Expr], fresh: _Fresh):
    """Drop shadowed names from ``mapping`` and rename binders that would capture."""
    inner = {k: v for k, v in mapping.items() if k not in names}
    danger = set()
    for v in inner.values():
        danger |= A.free_vars(v)
    ren = {n: fresh.name(n) for n in names if n in danger}
    if ren:
        inner = {**inner, **{old: A.Var(new) for old, new in ren.items()}}
    return inner, ren


def _subst(e: A.Expr, m: Dict[str, A.Expr], fresh: _Fresh) -> A.Expr:
    if not m:
        return e
    if isinstance(e, A.Var):
        return m.get(e.name, e)
    if isinstance(e, (A.Lit, A.Unit, A.Nil)):
        return e
    if isinstance(e, A.Fun):
        inner, ren = _binder((e.param,), m, fresh)
        return A.Fun(ren.get(e.param, e.param), _subst(e.body, inner, fresh), e.pos)
    if isinstance(e, A.App):
        return A.App(_subst(e.fn, m, fresh), _subst(e.arg, m, fresh), e.pos)
    if isinstance(e, A.Tuple_):
        return A.Tuple_(tuple(_subst(x, m, fresh) for x in e.items), e.pos)
    if isinstance(e, A.Record):
        return A.Record(tuple((k, _subst(x, m, fresh)) for k, x in e.fields), e.pos)
    if isinstance(e, A.Cons):
        return A.Cons(_subst(e.head, m, fresh), _subst(e.tail, m, fresh), e.pos)
    if isinstance(e, A.Proj):
        return A.Proj(_subst(e.expr, m, fresh), e.label, e.pos)
    if isinstance(e, A.Let):
        inner, ren = _binder(A.pattern_vars(e.pattern), m, fresh)
        return A.Let(_rename_pattern(e.pattern, ren), _subst(e.bound, m, fresh), _subst(e.body, inner, fresh), e.pos)
    if isinstance(e, A.Match):
        arms = []
        for pat, body in e.arms:
            inner, ren = _binder(A.pattern_vars(pat), m, fresh)
            arms.append((_rename_pattern(pat, ren), _subst(body, inner, fresh)))
        return A.Match(_subst(e.scrutinee, m, fresh), tuple(arms), e.pos)
    if isinstance(e, A.Ascribe):
        return A.Ascribe(_subst(e.expr, m, fresh), e.type, e.pos)
    raise TypeError(f"not an expression: {e!r}")


def inline_definitions(program: A.Program) -> A.Program:
    """Substitute every definition into its uses; the result has no definitions."""
    env: Dict[str, A.Expr] = {}
    for name, body in program.definitions:
        env[name] = substitute(body, env)
    constraint = substitute(program.constraint, env) if program.constraint is not None else None
    criteria = tuple((pol, substitute(e, env)) for pol, e in program.criteria)
    return A.Program((), constraint, criteria)


# ---------------------------------------------------------------------------
# the pass


def is_trivial_projection(e: A.Expr) -> bool:
    return (isinstance(e, A.Fun) and isinstance(e.body, A.Proj)
            and isinstance(e.body.expr, A.Var) and e.body.expr.name == e.param)


def storable_type(t) -> Optional[PropertyType]:
    """CUDF property type able to hold values of MooML type ``t``, if any."""
    t = prune(t)
    if isinstance(t, TEnum):
        return PropertyType("enum", tuple(sorted(t.labels)))
    if isinstance(t, TCon):
        kind = {id(INT): "int", id(BOOL): "bool", id(STRING): "string", id(PKGNAME): "pkgname",
                id(VPKGLIST): "vpkglist", id(FORMULA): "vpkgformula"}.get(id(t))
        if kind is None and not t.args:
            kind = {"int": "int", "bool": "bool", "string": "string", "pkgname": "pkgname",
                    "vpkglist": "vpkglist", "formula": "vpkgformula"}.get(t.name)
        if kind:
            return PropertyType(kind)
    return None


def _to_cudf(value, ptype: PropertyType):
    if ptype.kind == "enum":
        return str(value)
    if ptype.kind == "vpkglist":
        return tuple(value)
    return value


def _binders(e: A.Expr) -> List[Tuple[A.Expr, Tuple[str, ...]]]:
    """Children of ``e`` with the names each child sees bound by ``e``."""
    if isinstance(e, A.Fun):
        return [(e.body, (e.param,))]
    if isinstance(e, A.Let):
        return [(e.bound, ()), (e.body, A.pattern_vars(e.pattern))]
    if isinstance(e, A.Match):
        return [(e.scrutinee, ())] + [(body, A.pattern_vars(pat)) for pat, body in e.arms]
    return [(c, ()) for c in A.children(e)]


def _rebuild(e: A.Expr, kids: List[A.Expr]) -> A.Expr:
    if isinstance(e, A.Fun):
        return A.Fun(e.param, kids[0], e.pos)
    if isinstance(e, A.App):
        return A.App(kids[0], kids[1], e.pos)
    if isinstance(e, A.Tuple_):
        return A.Tuple_(tuple(kids), e.pos)
    if isinstance(e, A.Record):
        return A.Record(tuple((k, x) for (k, _), x in zip(e.fields, kids)), e.pos)
    if isinstance(e, A.Cons):
        return A.Cons(kids[0], kids[1], e.pos)
    if isinstance(e, A.Proj):
        return A.Proj(kids[0], e.label, e.pos)
    if isinstance(e, A.Let):
        return A.Let(e.pattern, kids[0], kids[1], e.pos)
    if isinstance(e, A.Match):
        return A.Match(kids[0], tuple((pat, x) for (pat, _), x in zip(e.arms, kids[1:])), e.pos)
    if isinstance(e, A.Ascribe):
        return A.Ascribe(kids[0], e.type, e.pos)
    return e


def _projection(name: str) -> A.Expr:
    return A.Fun("p", A.Proj(A.Var("p"), name))


def _dispatch(if_installed: str, if_not: str) -> A.Expr:
    p = A.Var("p")
    return A.Fun("p", A.Match(A.Proj(p, "is-installed"), (
        (A.PConst(True), A.Proj(p, if_installed)),
        (A.PConst(False), A.Proj(p, if_not)),
    )))


class PartialEvaluator:
    def __init__(self, doc: CudfDoc):
        self.source = doc
        self.working = doc
        self.properties: List[FreshProperty] = []
        self.counter = 0
        self.inlined: Dict[str, A.Expr] = {}

    # -- names and precomputation
    def _fresh_name(self) -> str:
        taken = set(self.working.declarations.names()) | set(RESERVED_PROPERTIES)
        while True:
            name = f"{FRESH_PREFIX}{self.counter}"
            self.counter += 1
            if name not in taken:
                return name

    def _add(self, ptype: PropertyType, values: List[Tuple[PackageKey, object]]) -> str:
        name = self._fresh_name()
        prop = FreshProperty(name, ptype, tuple(values))
        self.properties.append(prop)
        self.working = apply_transformer(
            Transformer((prop,), self.working.declarations), self.working)
        return name

    def _evaluate(self, inlined: A.Expr, ptype: PropertyType, variants: Tuple[Optional[bool], ...]):
        """Values of ``inlined`` on every package, once per is-installed variant."""
        env = EnvBuilder(self.working).build(self.working.installed_status())
        try:
            fn = eval_expr(env, inlined)
            out: List[List[Tuple[PackageKey, object]]] = [[] for _ in variants]
            for pkg, rec in zip(self.working.universe, env.u):
                for k, flag in enumerate(variants):
                    arg = rec if flag is None else RecordValue({**rec.fields, "is-installed": flag})
                    out[k].append((pkg.key, _to_cudf(fn.call(arg), ptype)))
        except ExecError:
            return None
        return out

    def try_replace(self, e: A.Expr) -> Optional[A.Expr]:
        if isinstance(e, (A.Lit, A.Unit, A.Nil)) or is_trivial_projection(e):
            return None
        if isinstance(e, A.Var) and (e.name in STDLIB_NAMES or e.name in ("u", "r")) and e.name not in self.inlined:
            return None
        inlined = substitute(e, self.inlined)
        if is_trivial_projection(inlined):
            return None
        preamble = self.working.declarations
        try:
            scheme = infer_expr(inlined, preamble)
        except MoomlTypeError:
            return None
        if not is_arrow_from_package(scheme.body):
            return None
        ptype = storable_type(prune(scheme.body).args[1])
        if ptype is None:
            return None
        kind = classify_locality(inlined, preamble)
        if kind is Locality.LOCAL_A:
            values = self._evaluate(inlined, ptype, (None,))
            if values is None:
                return None
            return _projection(self._add(ptype, values[0]))
        if kind is Locality.LOCAL_B:
            values = self._evaluate(inlined, ptype, (True, False))
            if values is None:
                return None
            yes = self._add(ptype, values[0])
            no = self._add(ptype, values[1])
            return _dispatch(yes, no)
        return None

    def rewrite(self, e: A.Expr, bound: frozenset = frozenset()) -> A.Expr:
        if not (A.free_vars(e) & bound):
            replaced = self.try_replace(e)
            if replaced is not None:
                return replaced
        kids = [self.rewrite(child, bound | set(names)) for child, names in _binders(e)]
        if all(k is c for k, (c, _) in zip(kids, _binders(e))):
            return e
        return _rebuild(e, kids)

    def builds_packages(self, program: A.Program) -> bool:
        """Whether the program writes package record literals, which would lack the fresh fields."""
        fields = set(package_schema(self.source.declarations))
        exprs = [b for _, b in program.definitions] + [c for _, c in program.criteria]
        if program.constraint is not None:
            exprs.append(program.constraint)
        return any(isinstance(n, A.Record) and {k for k, _ in n.fields} == fields
                   for e in exprs for n in A.walk(e))

    def run(self, program: A.Program) -> Tuple[A.Program, Transformer]:
        if self.builds_packages(program):
            return program, Transformer((), self.source.declarations)
        definitions = []
        for name, body in program.definitions:
            new_body = self.rewrite(body)
            definitions.append((name, new_body))
            self.inlined[name] = substitute(new_body, self.inlined)
        constraint = self.rewrite(program.constraint) if program.constraint is not None else None
        criteria = tuple((pol, self.rewrite(e)) for pol, e in program.criteria)
        transformer = Transformer(tuple(self.properties), self.source.declarations)
        return A.Program(tuple(definitions), constraint, criteria), transformer


def partially_evaluate(doc: CudfDoc, program: A.Program) -> Tuple[A.Program, Transformer]:
    """Return ``(program', transformer)``.

    For every solution ``s`` of a document ``c`` shaped like ``doc``,
    ``program`` on ``(c, s)`` and ``program'`` on ``(apply_transformer(t, c), s)``
    produce the same outcome.
    """
    infer_program(program, doc.declarations)
    return PartialEvaluator(doc).run(program)
