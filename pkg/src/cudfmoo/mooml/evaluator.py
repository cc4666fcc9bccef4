"""Call-by-value evaluation of MooML over a CUDF document and a candidate solution.

Expressions are compiled once into Python closures with variables resolved
to frame slots, so one program can be run against thousands of candidate
solutions cheaply.  Runtime values:

========================  =========================================
MooML                     Python
========================  =========================================
int, version              int
bool                      bool
string, pkgname           str
enumeration label         :class:`~cudfmoo.mooml.ast.Label`
unit                      :data:`UNIT`
tuple                     tuple
list                      :class:`MList` (a tuple subclass)
record                    :class:`RecordValue`
vpkglist                  tuple of :class:`~cudfmoo.model.VPkg`
formula                   :class:`~cudfmoo.model.Formula`
function                  :class:`Closure` or :class:`Prim`
========================  =========================================
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from ..model import INT64_MAX, INT64_MIN, CudfDoc, PackageDesc, Solution, VPkg, vpkg
from . import ast as A

EXEC_ERROR_KINDS = ("match-failure", "empty-list-argument", "division-or-domain", "missing-field")


class ExecError(Exception):
    def __init__(self, kind: str, message: str, pos: A.Pos = None):
        if kind not in EXEC_ERROR_KINDS:
            raise ValueError(f"unknown execution error kind {kind!r}")
        self.kind = kind
        self.message = message
        self.pos = pos
        super().__init__(self._text())

    def _text(self) -> str:
        where = f"{self.pos[0]}:{self.pos[1]}: " if self.pos else ""
        return f"{where}{self.kind}: {self.message}"

    def __str__(self) -> str:
        return self._text()


class StepLimitExceeded(Exception):
    """Evaluation ran longer than the configured step ceiling."""


class _UnitType:
    __slots__ = ()

    def __repr__(self) -> str:
        return "()"


UNIT = _UnitType()


class MList(tuple):
    """A MooML list; distinct from tuples so values print and compare unambiguously."""

    __slots__ = ()

    def __repr__(self) -> str:
        return "[" + "; ".join(map(repr, self)) + "]"


class RecordValue:
    __slots__ = ("fields",)

    def __init__(self, fields: Dict[str, object]):
        self.fields = fields

    def get(self, label: str, pos: A.Pos = None):
        try:
            return self.fields[label]
        except KeyError:
            raise ExecError("missing-field", f"record has no field {label}", pos) from None

    def __eq__(self, other):
        return isinstance(other, RecordValue) and values_equal(self, other)

    def __hash__(self):
        return hash(tuple(sorted(self.fields)))

    def __repr__(self) -> str:
        return "{" + ", ".join(f"{k} = {v!r}" for k, v in self.fields.items()) + "}"


class Context:
    """Per-run state: global bindings and the step counter."""

    __slots__ = ("globals", "steps", "max_steps")

    def __init__(self, bindings: Dict[str, object], max_steps: Optional[int] = None):
        self.globals = bindings
        self.steps = 0
        self.max_steps = max_steps

    def tick(self) -> None:
        self.steps += 1
        if self.max_steps is not None and self.steps > self.max_steps:
            raise StepLimitExceeded(f"more than {self.max_steps} evaluation steps")


class Closure:
    __slots__ = ("body", "frame", "ctx")

    def __init__(self, body, frame, ctx: Context):
        self.body = body
        self.frame = frame
        self.ctx = ctx

    def call(self, arg):
        self.ctx.tick()
        return self.body([self.frame, arg], self.ctx)

    def __repr__(self) -> str:
        return "<fun>"


class Prim:
    """A primitive with fixed arity; partial applications accumulate arguments."""

    __slots__ = ("name", "arity", "impl", "args", "ctx")

    def __init__(self, name: str, arity: int, impl: Callable, args: tuple = (), ctx: Optional[Context] = None):
        self.name = name
        self.arity = arity
        self.impl = impl
        self.args = args
        self.ctx = ctx

    def call(self, arg):
        args = self.args + (arg,)
        if len(args) < self.arity:
            return Prim(self.name, self.arity, self.impl, args, self.ctx)
        if self.ctx is not None:
            self.ctx.tick()
        return self.impl(*args)

    def __repr__(self) -> str:
        return f"<prim {self.name}>"


def apply(fn, arg):
    return fn.call(arg)


# ---------------------------------------------------------------------------
# equality and ordering


def values_equal(a, b) -> bool:
    if isinstance(a, (Closure, Prim)) or isinstance(b, (Closure, Prim)):
        raise ExecError("division-or-domain", "functions cannot be compared for equality")
    if isinstance(a, RecordValue):
        if a.fields.keys() != b.fields.keys():
            return False
        return all(values_equal(a.fields[k], b.fields[k]) for k in a.fields)
    if isinstance(a, tuple):
        if len(a) != len(b):
            return False
        return all(values_equal(x, y) for x, y in zip(a, b))
    return a == b


def compare_values(a, b) -> int:
    """Total order on orderable values: ints, booleans, strings, labels and lists/tuples thereof."""
    if isinstance(a, (Closure, Prim, RecordValue)):
        raise ExecError("division-or-domain", "values of this type cannot be ordered")
    if isinstance(a, tuple):
        for x, y in zip(a, b):
            c = compare_values(x, y)
            if c:
                return c
        return (len(a) > len(b)) - (len(a) < len(b))
    return (a > b) - (a < b)


# ---------------------------------------------------------------------------
# standard library


def _check_int(v: int) -> int:
    if v < INT64_MIN or v > INT64_MAX:
        raise ExecError("division-or-domain", "64-bit integer overflow")
    return v


def _fold(f, lst, z):
    # fold f [a1; ...; an] z = f a1 (f a2 (... (f an z)))
    acc = z
    for x in reversed(lst):
        acc = f.call(x).call(acc)
    return acc


def _sum(lst):
    total = 0
    for x in lst:
        total = _check_int(total + x)
    return total


def _extremum(name, pick):
    def impl(lst):
        if not lst:
            raise ExecError("empty-list-argument", f"{name} of an empty list")
        return pick(lst)

    return impl


def _preds(f, lst) -> List[bool]:
    # every element is tested, as in the fold-based definitions
    return [f.call(x) for x in lst]


STDLIB_IMPLS: Dict[str, Tuple[int, Callable]] = {
    "fold": (3, _fold),
    "map": (2, lambda f, lst: MList(f.call(x) for x in lst)),
    "filter": (2, lambda f, lst: MList(x for x, keep in zip(lst, _preds(f, lst)) if keep)),
    "length": (1, lambda lst: len(lst)),
    "sum": (1, _sum),
    "max": (1, _extremum("max", max)),
    "min": (1, _extremum("min", min)),
    "forall": (2, lambda f, lst: all(_preds(f, lst))),
    "exists": (2, lambda f, lst: any(_preds(f, lst))),
    "cardinality": (2, lambda f, lst: sum(_preds(f, lst))),
    "add": (2, lambda a, b: _check_int(a + b)),
    "sub": (2, lambda a, b: _check_int(a - b)),
    "+": (2, lambda a, b: _check_int(a + b)),
    "-": (2, lambda a, b: _check_int(a - b)),
    "&&": (2, lambda a, b: a and b),
    "||": (2, lambda a, b: a or b),
    "not": (1, lambda a: not a),
    "==": (2, values_equal),
    "!=": (2, lambda a, b: not values_equal(a, b)),
    "<": (2, lambda a, b: compare_values(a, b) < 0),
    "<=": (2, lambda a, b: compare_values(a, b) <= 0),
    ">": (2, lambda a, b: compare_values(a, b) > 0),
    ">=": (2, lambda a, b: compare_values(a, b) >= 0),
}


def stdlib_values(ctx: Optional[Context] = None) -> Dict[str, Prim]:
    return {name: Prim(name, arity, impl, (), ctx) for name, (arity, impl) in STDLIB_IMPLS.items()}


# ---------------------------------------------------------------------------
# environment


@dataclass
class EvalEnv:
    """Global bindings for one (document, solution) pair: ``u``, ``r`` and the library."""

    u: MList
    r: RecordValue
    extra: Dict[str, object]

    def bindings(self, ctx: Context) -> Dict[str, object]:
        out: Dict[str, object] = stdlib_values(ctx)
        out["u"] = self.u
        out["r"] = self.r
        out.update(self.extra)
        return out


def _provides_list(pkg: PackageDesc) -> Tuple[VPkg, ...]:
    return tuple(vpkg(p.name) if p.version is None else vpkg(p.name, "=", p.version) for p in pkg.provides)


class EnvBuilder:
    """Precomputes the solution-independent part of package records for one document."""

    def __init__(self, doc: CudfDoc):
        self.doc = doc
        enum_props = {name for name, t in doc.declarations.declarations if t.kind == "enum"}
        self.base: List[Tuple[Tuple[str, int], Dict[str, object]]] = []
        for pkg in doc.universe:
            fields: Dict[str, object] = {
                "name": pkg.name,
                "version": pkg.version,
                "depends": pkg.depends,
                "conflicts": tuple(pkg.conflicts),
                "provides": _provides_list(pkg),
                "keep": A.Label(pkg.keep.value),
                "was-installed": pkg.installed,
            }
            for name, value in doc.extras_of(pkg).items():
                fields[name] = A.Label(value) if name in enum_props else value
            self.base.append((pkg.key, fields))
        req = doc.request
        self.r = RecordValue({
            "install": tuple(req.install),
            "remove": tuple(req.remove),
            "upgrade": tuple(req.upgrade),
        })

    def build(self, proposed: Solution) -> EvalEnv:
        installed = proposed.installed
        records = []
        for key, fields in self.base:
            rec = dict(fields)
            rec["is-installed"] = key in installed
            records.append(RecordValue(rec))
        return EvalEnv(MList(records), self.r, {})


def build_env(doc: CudfDoc, proposed: Solution) -> EvalEnv:
    return EnvBuilder(doc).build(proposed)


# ---------------------------------------------------------------------------
# compilation


class _Scope:
    __slots__ = ("names", "parent")

    def __init__(self, names: Sequence[str], parent: Optional["_Scope"]):
        self.names = list(names)
        self.parent = parent

    def lookup(self, name: str):
        depth, scope = 0, self
        while scope is not None:
            if name in scope.names:
                # last binding wins for repeated names within one frame
                return depth, len(scope.names) - 1 - scope.names[::-1].index(name)
            depth += 1
            scope = scope.parent
        return None


def _var_access(depth: int, index: int):
    i = index + 1
    if depth == 0:
        return lambda f, ctx: f[i]
    if depth == 1:
        return lambda f, ctx: f[0][i]
    if depth == 2:
        return lambda f, ctx: f[0][0][i]

    def run(f, ctx):
        for _ in range(depth):
            f = f[0]
        return f[i]

    return run


def _global_access(name: str, pos: A.Pos):
    def run(f, ctx):
        try:
            return ctx.globals[name]
        except KeyError:
            raise ExecError("missing-field", f"unbound identifier {name}", pos) from None

    return run


def _compile_pattern(p: A.Pattern):
    """Return ``m(value, out) -> bool`` appending bound values in pattern-variable order."""
    if isinstance(p, A.PVar):
        def m(v, out):
            out.append(v)
            return True
        return m
    if isinstance(p, A.PWild):
        return lambda v, out: True
    if isinstance(p, A.PConst):
        c = p.value
        return lambda v, out: v == c
    if isinstance(p, A.PEnum):
        label = p.label
        return lambda v, out: v == label
    if isinstance(p, A.PUnit):
        return lambda v, out: True
    if isinstance(p, A.PNil):
        return lambda v, out: len(v) == 0
    if isinstance(p, A.PCons):
        mh, mt = _compile_pattern(p.head), _compile_pattern(p.tail)

        def m(v, out):
            return len(v) > 0 and mh(v[0], out) and mt(MList(v[1:]), out)
        return m
    if isinstance(p, A.PTuple):
        ms = [_compile_pattern(x) for x in p.items]

        def m(v, out):
            return all(mi(vi, out) for mi, vi in zip(ms, v))
        return m
    if isinstance(p, A.PRecord):
        ms = [(k, _compile_pattern(x)) for k, x in p.fields]
        pos = p.pos

        def m(v, out):
            return all(mi(v.get(k, pos), out) for k, mi in ms)
        return m
    raise TypeError(f"not a pattern: {p!r}")


def compile_expr(e: A.Expr, scope: Optional[_Scope] = None):
    """Compile ``e`` into ``run(frame, ctx) -> value``."""
    if isinstance(e, A.Var):
        hit = scope.lookup(e.name) if scope else None
        if hit is not None:
            return _var_access(*hit)
        return _global_access(e.name, e.pos)
    if isinstance(e, A.Lit):
        v = e.value
        return lambda f, ctx: v
    if isinstance(e, A.Unit):
        return lambda f, ctx: UNIT
    if isinstance(e, A.Nil):
        empty = MList()
        return lambda f, ctx: empty
    if isinstance(e, A.Fun):
        body = compile_expr(e.body, _Scope([e.param], scope))
        return lambda f, ctx: Closure(body, f, ctx)
    if isinstance(e, A.App):
        # binary saturated primitive applications are the hot path
        fn = compile_expr(e.fn, scope)
        arg = compile_expr(e.arg, scope)
        pos = e.pos

        def run(f, ctx):
            func = fn(f, ctx)
            a = arg(f, ctx)
            try:
                return func.call(a)
            except ExecError as exc:
                if exc.pos is None:
                    exc.pos = pos
                raise
        return run
    if isinstance(e, A.Tuple_):
        items = [compile_expr(x, scope) for x in e.items]
        return lambda f, ctx: tuple(it(f, ctx) for it in items)
    if isinstance(e, A.Record):
        fields = [(k, compile_expr(x, scope)) for k, x in e.fields]
        return lambda f, ctx: RecordValue({k: c(f, ctx) for k, c in fields})
    if isinstance(e, A.Cons):
        head = compile_expr(e.head, scope)
        tail = compile_expr(e.tail, scope)

        def run(f, ctx):
            h = head(f, ctx)
            return MList((h,) + tail(f, ctx))
        return run
    if isinstance(e, A.Proj):
        inner = compile_expr(e.expr, scope)
        label, pos = e.label, e.pos

        def run(f, ctx):
            rec = inner(f, ctx)
            if not isinstance(rec, RecordValue):
                raise ExecError("missing-field", f"projection .{label} on a non-record", pos)
            return rec.get(label, pos)
        return run
    if isinstance(e, A.Let):
        bound = compile_expr(e.bound, scope)
        names = A.pattern_vars(e.pattern)
        body = compile_expr(e.body, _Scope(names, scope))
        matcher = _compile_pattern(e.pattern)
        pos = e.pos

        def run(f, ctx):
            v = bound(f, ctx)
            frame = [f]
            if not matcher(v, frame):
                raise ExecError("match-failure", "let pattern does not match", pos)
            return body(frame, ctx)
        return run
    if isinstance(e, A.Match):
        scrutinee = compile_expr(e.scrutinee, scope)
        arms = []
        for pat, body in e.arms:
            arms.append((_compile_pattern(pat), compile_expr(body, _Scope(A.pattern_vars(pat), scope))))
        pos = e.pos

        def run(f, ctx):
            v = scrutinee(f, ctx)
            for matcher, body in arms:
                frame = [f]
                if matcher(v, frame):
                    return body(frame, ctx)
            raise ExecError("match-failure", "no match arm applies", pos)
        return run
    if isinstance(e, A.Ascribe):
        return compile_expr(e.expr, scope)
    raise TypeError(f"not an expression: {e!r}")


def eval_expr(env: EvalEnv, e: A.Expr, max_steps: Optional[int] = None, ctx: Optional[Context] = None):
    """Evaluate a closed expression under ``env``; raises :class:`ExecError`."""
    if ctx is None:
        ctx = Context({}, max_steps)
        ctx.globals = env.bindings(ctx)
    return compile_expr(e)(None, ctx)


# ---------------------------------------------------------------------------
# programs and outcomes


@dataclass(frozen=True)
class Outcome:
    constraint_holds: bool
    measures: Tuple[Tuple[str, int], ...] = ()

    def __str__(self) -> str:
        lines = [f"constraint={'true' if self.constraint_holds else 'false'}"]
        lines += [f"measure[{i}]={pol[:3]}:{v}" for i, (pol, v) in enumerate(self.measures)]
        return "\n".join(lines)


class CompiledProgram:
    """A program compiled once and run against many environments."""

    def __init__(self, program: A.Program):
        self.program = program
        self.definitions = [(name, compile_expr(body)) for name, body in program.definitions]
        self.constraint = compile_expr(program.constraint) if program.constraint is not None else None
        self.criteria = [(pol, compile_expr(e)) for pol, e in program.criteria]

    def run(self, env: EvalEnv, max_steps: Optional[int] = None) -> Outcome:
        ctx = Context({}, max_steps)
        ctx.globals = env.bindings(ctx)
        for name, code in self.definitions:
            ctx.globals[name] = code(None, ctx)
        holds = True if self.constraint is None else self.constraint(None, ctx)
        measures = tuple((pol, code(None, ctx)) for pol, code in self.criteria)
        return Outcome(bool(holds), measures)

    def steps(self, env: EvalEnv) -> int:
        ctx = Context({}, None)
        ctx.globals = env.bindings(ctx)
        for name, code in self.definitions:
            ctx.globals[name] = code(None, ctx)
        if self.constraint is not None:
            self.constraint(None, ctx)
        for _, code in self.criteria:
            code(None, ctx)
        return ctx.steps


def eval_program(doc: CudfDoc, proposed: Solution, program: A.Program,
                 max_steps: Optional[int] = None) -> Outcome:
    """Outcome of ``program`` on ``proposed``; raises :class:`ExecError`."""
    return CompiledProgram(program).run(build_env(doc, proposed), max_steps)


class Comparison(Enum):
    A_BETTER = "a-better"
    B_BETTER = "b-better"
    EQUAL = "equal"
    INCOMPARABLE = "incomparable"


def compare_outcomes(a: Outcome, b: Outcome) -> Comparison:
    if tuple(p for p, _ in a.measures) != tuple(p for p, _ in b.measures):
        raise ValueError("outcomes come from programs with different criteria")
    if not a.constraint_holds and not b.constraint_holds:
        return Comparison.INCOMPARABLE
    if not a.constraint_holds:
        return Comparison.B_BETTER
    if not b.constraint_holds:
        return Comparison.A_BETTER
    for (pol, x), (_, y) in zip(a.measures, b.measures):
        if x == y:
            continue
        better = x < y if pol == A.MINIMIZE else x > y
        return Comparison.A_BETTER if better else Comparison.B_BETTER
    return Comparison.EQUAL


def outcome_key(o: Outcome) -> Tuple[int, ...]:
    """Sort key for constraint-true outcomes: smaller is better."""
    return tuple(v if pol == A.MINIMIZE else -v for pol, v in o.measures)
