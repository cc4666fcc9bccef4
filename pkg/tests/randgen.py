"""Seeded random generators for universes, solutions and well-typed MooML programs."""

import random

from cudfmoo.model import (
    CudfDoc,
    Formula,
    Keep,
    PackageDesc,
    Preamble,
    PropertyType,
    Provide,
    Request,
    Solution,
    vpkg,
)
from cudfmoo.mooml import ast as A

GEN_PREAMBLE = Preamble((
    ("size", PropertyType("int", default=0)),
    ("flag", PropertyType("bool", default=False)),
    ("tier", PropertyType("enum", ("low", "high"), default="low")),
))

NAMES = ("a", "b", "c", "d", "e")
FEATURES = ("f", "g")
OPS = ("", "", "=", "!=", "<", "<=", ">", ">=")


def _target(rng, pool):
    op = rng.choice(OPS)
    return vpkg(rng.choice(pool), op, rng.randint(1, 3) if op else None)


def random_doc(rng: random.Random, n_max: int = 12, n_min: int = 1, extras: bool = True,
               request: bool = True, keep: bool = True) -> CudfDoc:
    """A random document with at most ``n_max`` package versions and at most 3 relations per package."""
    n = rng.randint(n_min, n_max)
    k = rng.randint(1, min(len(NAMES), max(1, n)))
    names = NAMES[:k]
    keys = set()
    while len(keys) < n:
        keys.add((rng.choice(names), rng.randint(1, 1 + n // k + 1)))
    pool = names + FEATURES
    universe = []
    for name, version in sorted(keys, key=lambda kv: rng.random()):
        clauses, conflicts, provides = [], [], []
        for _ in range(rng.randint(0, 3)):
            kind = rng.random()
            if kind < 0.4:
                clauses.append(tuple(_target(rng, pool) for _ in range(rng.randint(1, 2))))
            elif kind < 0.75:
                conflicts.append(_target(rng, pool))
            else:
                f = rng.choice(FEATURES)
                provides.append(Provide(f, rng.choice((None, rng.randint(1, 3)))))
        extra = []
        if extras:
            if rng.random() < 0.7:
                extra.append(("size", rng.randint(0, 40)))
            if rng.random() < 0.5:
                extra.append(("flag", rng.random() < 0.5))
            if rng.random() < 0.5:
                extra.append(("tier", rng.choice(("low", "high"))))
        kp = Keep.NONE
        if keep and rng.random() < 0.15:
            kp = rng.choice(list(Keep))
        universe.append(PackageDesc(name, version, Formula(tuple(clauses)), tuple(conflicts),
                                    tuple(provides), rng.random() < 0.3, kp, tuple(extra)))
    req = Request()
    if request:
        req = Request(
            install=tuple(_target(rng, pool) for _ in range(rng.choice((0, 0, 1, 1, 2)))),
            remove=tuple(_target(rng, pool) for _ in range(rng.choice((0, 0, 0, 1)))),
            upgrade=tuple(_target(rng, names) for _ in range(rng.choice((0, 0, 0, 1)))),
        )
    return CudfDoc(GEN_PREAMBLE if extras else None, tuple(universe), req)


def random_solution(rng: random.Random, doc: CudfDoc) -> Solution:
    return Solution(p.key for p in doc.universe if rng.random() < 0.5)


def all_solutions(doc: CudfDoc):
    keys = sorted(p.key for p in doc.universe)
    for bits in range(1 << len(keys)):
        yield Solution(k for i, k in enumerate(keys) if bits >> i & 1)


# ---------------------------------------------------------------------------
# programs
#
# Types: "int", "bool", "pkg", "pkgs" (package list), "pred" (package -> bool),
# "pint" (package -> int).


def _app(f, *args):
    e = A.Var(f) if isinstance(f, str) else f
    for a in args:
        e = A.App(e, a)
    return e


def _bin(op, a, b):
    return _app(op, a, b)


class ProgramGen:
    def __init__(self, rng: random.Random, max_depth: int = 4, defs=()):
        self.rng = rng
        self.max_depth = max_depth
        self.defs = list(defs)  # (name, "pred" | "pint")
        self.counter = 0

    def fresh(self) -> str:
        self.counter += 1
        # reuse a few names so that shadowing happens
        return self.rng.choice(("p", "q", f"x{self.counter}", f"y{self.counter}"))

    def pkg_vars(self, scope):
        seen, out = set(), []
        for name, ty in reversed(scope):
            if name not in seen:
                seen.add(name)
                if ty == "pkg":
                    out.append(name)
        return out

    def gen(self, ty, depth, scope):
        return getattr(self, "g_" + ty)(depth, scope)

    def g_pkg(self, depth, scope):
        return A.Var(self.rng.choice(self.pkg_vars(scope)))

    def g_pkgs(self, depth, scope):
        if depth <= 0 or self.rng.random() < 0.6:
            return A.Var("u")
        return _app("filter", self.gen("pred", depth - 1, scope), self.gen("pkgs", depth - 1, scope))

    def _lambda(self, result, depth, scope):
        x = self.fresh()
        return A.Fun(x, self.gen(result, depth - 1, scope + [(x, "pkg")]))

    def g_pred(self, depth, scope):
        r = self.rng.random()
        preds = [n for n, t in self.defs if t == "pred"]
        if preds and r < 0.25:
            return A.Var(self.rng.choice(preds))
        if r < 0.35:
            x = self.fresh()
            return A.Fun(x, A.Proj(A.Var(x), self.rng.choice(("is-installed", "was-installed", "flag"))))
        return self._lambda("bool", max(depth, 1), scope)

    def g_pint(self, depth, scope):
        pints = [n for n, t in self.defs if t == "pint"]
        if pints and self.rng.random() < 0.25:
            return A.Var(self.rng.choice(pints))
        if self.rng.random() < 0.3:
            x = self.fresh()
            return A.Fun(x, A.Proj(A.Var(x), "size"))
        return self._lambda("int", max(depth, 1), scope)

    def g_bool(self, depth, scope):
        rng = self.rng
        pv = self.pkg_vars(scope)
        if depth <= 0:
            if pv and rng.random() < 0.7:
                return A.Proj(A.Var(rng.choice(pv)), rng.choice(("is-installed", "was-installed", "flag")))
            return A.Lit(rng.random() < 0.5)
        options = ["lit", "and", "or", "not", "cmp", "forall", "exists", "if"]
        if pv:
            options += ["proj", "proj", "name", "version", "tier", "defcall"]
        choice = rng.choice(options)
        d = depth - 1
        if choice == "lit":
            return A.Lit(rng.random() < 0.5)
        if choice in ("and", "or"):
            return _bin("&&" if choice == "and" else "||", self.gen("bool", d, scope), self.gen("bool", d, scope))
        if choice == "not":
            return _app("not", self.gen("bool", d, scope))
        if choice == "cmp":
            op = rng.choice(("<", "<=", ">", ">=", "==", "!="))
            return _bin(op, self.gen("int", d, scope), self.gen("int", d, scope))
        if choice in ("forall", "exists"):
            return _app(choice, self.gen("pred", d, scope), self.gen("pkgs", d, scope))
        if choice == "if":
            return A.Match(self.gen("bool", d, scope), (
                (A.PConst(True), self.gen("bool", d, scope)),
                (A.PConst(False), self.gen("bool", d, scope)),
            ))
        if choice == "proj":
            return A.Proj(A.Var(rng.choice(pv)), rng.choice(("is-installed", "was-installed", "flag")))
        if choice == "name":
            a, b = rng.choice(pv), rng.choice(pv)
            return _bin(rng.choice(("==", "!=")), A.Proj(A.Var(a), "name"), A.Proj(A.Var(b), "name"))
        if choice == "version":
            a, b = rng.choice(pv), rng.choice(pv)
            return _bin(rng.choice(("<", "<=", "==")), A.Proj(A.Var(a), "version"), A.Proj(A.Var(b), "version"))
        if choice == "tier":
            return A.Match(A.Proj(A.Var(rng.choice(pv)), "tier"), (
                (A.PEnum("low"), self.gen("bool", d, scope)),
                (A.PWild(), self.gen("bool", d, scope)),
            ))
        preds = [n for n, t in self.defs if t == "pred"]
        if preds:
            return _app(rng.choice(preds), self.gen("pkg", d, scope))
        return A.Proj(A.Var(rng.choice(pv)), "is-installed")

    def g_int(self, depth, scope):
        rng = self.rng
        pv = self.pkg_vars(scope)
        if depth <= 0:
            if pv and rng.random() < 0.5:
                return A.Proj(A.Var(rng.choice(pv)), "size")
            return A.Lit(rng.randint(-3, 20))
        options = ["lit", "add", "sub", "length", "card", "sum", "max", "fold", "let", "if"]
        if pv:
            options += ["proj", "proj", "defcall"]
        choice = rng.choice(options)
        d = depth - 1
        if choice == "lit":
            return A.Lit(rng.randint(-3, 20))
        if choice in ("add", "sub"):
            return _bin("+" if choice == "add" else "-", self.gen("int", d, scope), self.gen("int", d, scope))
        if choice == "length":
            return _app("length", self.gen("pkgs", d, scope))
        if choice == "card":
            return _app("cardinality", self.gen("pred", d, scope), self.gen("pkgs", d, scope))
        if choice == "sum":
            return _app("sum", _app("map", self.gen("pint", d, scope), self.gen("pkgs", d, scope)))
        if choice == "max":
            return _app(rng.choice(("max", "min")), _app("map", self.gen("pint", d, scope), self.gen("pkgs", d, scope)))
        if choice == "fold":
            acc, x = f"acc{self.counter}", self.fresh()
            self.counter += 1
            body = _bin("+", self.gen("int", d - 1, scope + [(x, "pkg"), (acc, "int")]), A.Var(acc))
            return _app("fold", A.Fun(x, A.Fun(acc, body)), self.gen("pkgs", d, scope), A.Lit(0))
        if choice == "let":
            v = f"k{self.counter}"
            self.counter += 1
            bound = self.gen("int", d, scope)
            return A.Let(A.PVar(v), bound, _bin("+", A.Var(v), self.gen("int", d, scope)))
        if choice == "if":
            return A.Match(self.gen("bool", d, scope), (
                (A.PConst(True), self.gen("int", d, scope)),
                (A.PConst(False), self.gen("int", d, scope)),
            ))
        if choice == "proj":
            return A.Proj(A.Var(rng.choice(pv)), "size")
        pints = [n for n, t in self.defs if t == "pint"]
        if pints:
            return _app(rng.choice(pints), self.gen("pkg", d, scope))
        return A.Proj(A.Var(rng.choice(pv)), "size")


def random_program(rng: random.Random, max_depth: int = 4) -> A.Program:
    gen = ProgramGen(rng, max_depth)
    definitions = []
    for i in range(rng.randint(0, 2)):
        ty = rng.choice(("pred", "pint"))
        name = f"def{i}"
        body = gen._lambda("bool" if ty == "pred" else "int", max_depth, [])
        definitions.append((name, body))
        gen.defs.append((name, ty))
    constraint = gen.gen("bool", max_depth, []) if rng.random() < 0.5 else None
    criteria = tuple((rng.choice((A.MINIMIZE, A.MAXIMIZE)), gen.gen("int", max_depth, []))
                     for _ in range(rng.randint(1, 2)))
    return A.Program(tuple(definitions), constraint, criteria)
