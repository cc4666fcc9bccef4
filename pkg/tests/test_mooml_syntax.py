import random

import pytest
from hypothesis import given, settings, strategies as st

from cudfmoo.mooml import ast as A
from cudfmoo.mooml import MoomlSyntaxError, parse_expr, parse_program, print_expr, print_program

from conftest import load_program
from randgen import random_program

EXAMPLES = ("size", "freshness", "pinning-strict", "pinning-count", "pinning-gap", "security", "multi-version")


def test_sum_definition():
    prog = parse_program("let sum l = fold add l 0")
    assert prog.definitions == (("sum", A.Fun("l", A.App(A.App(A.App(A.Var("fold"), A.Var("add")), A.Var("l")),
                                                        A.Lit(0)))),)
    assert prog.constraint is None and prog.criteria == ()


def test_minimize_is_one_criterion():
    prog = parse_program("minimize size (filter (fun p -> p.is-installed) u)")
    ((polarity, expr),) = prog.criteria
    assert polarity == A.MINIMIZE
    assert expr == A.App(A.Var("size"), A.App(A.App(A.Var("filter"), A.Fun("p", A.Proj(A.Var("p"), "is-installed"))),
                                              A.Var("u")))


def test_recursion_rejected():
    with pytest.raises(MoomlSyntaxError, match="recursion not permitted"):
        parse_program("let f x = f x")


def test_duplicate_definition_rejected():
    with pytest.raises(MoomlSyntaxError):
        parse_program("let f x = x\nlet f y = y")


def test_syntax_error_has_position():
    with pytest.raises(MoomlSyntaxError) as info:
        parse_program("minimize (length u")
    assert info.value.pos is not None


@pytest.mark.parametrize("name", EXAMPLES)
def test_examples_round_trip(name):
    prog = load_program(name)
    assert parse_program(print_program(prog)) == prog


def test_empty_program_prints_empty():
    assert print_program(A.Program()) == ""
    assert parse_program("") == A.Program()
    assert parse_program("(* only a comment *)") == A.Program()


@pytest.mark.parametrize("text,expected", [
    ("a || b && c", "||(a, &&(b, c))"),
    ("a - b - c", "-(-(a, b), c)"),
    ("not f x", "not(f x)"),
    ("a + b < c", "<(+(a, b), c)"),
    ("x :: y :: z", "x :: (y :: z)"),
    ("f p.q", "f (p.q)"),
])
def test_precedence(text, expected):
    def show(e):
        if isinstance(e, A.Var):
            return e.name
        if isinstance(e, A.Proj):
            return f"({show(e.expr)}.{e.label})"
        if isinstance(e, A.Cons):
            return f"{show(e.head)} :: ({show(e.tail)})" if isinstance(e.tail, A.Cons) else f"{show(e.head)} :: {show(e.tail)}"
        if isinstance(e, A.App):
            if isinstance(e.fn, A.App) and isinstance(e.fn.fn, A.Var) and e.fn.fn.name in A.BINARY_OPS:
                return f"{e.fn.fn.name}({show(e.fn.arg)}, {show(e.arg)})"
            if isinstance(e.fn, A.Var) and e.fn.name == "not":
                return f"not({show(e.arg)})"
            return f"{show(e.fn)} {show(e.arg)}"
        raise AssertionError(e)

    assert show(parse_expr(text)).replace("((p.q))", "(p.q)") == expected


def test_hyphenated_identifiers_and_subtraction():
    e = parse_expr("max-pin p - p.pin-priority")
    assert isinstance(e, A.App) and e.fn.fn == A.Var("-")
    assert e.fn.arg == A.App(A.Var("max-pin"), A.Var("p"))
    assert e.arg == A.Proj(A.Var("p"), "pin-priority")


def test_if_is_boolean_match():
    e = parse_expr("if c then 1 else 2")
    assert e == A.Match(A.Var("c"), ((A.PConst(True), A.Lit(1)), (A.PConst(False), A.Lit(2))))
    assert parse_expr("match c with true -> 1 | false => 2") == e


def test_random_typed_programs_round_trip():
    rng = random.Random(3)
    for _ in range(100):
        prog = random_program(rng)
        assert parse_program(print_program(prog)) == prog


# Untyped syntax generator covering every node kind.

idents = st.sampled_from(["x", "y", "p", "is-recent", "f2", "max-pin"])
labels = st.sampled_from(["name", "version", "is-installed", "size", "a-b"])
enum_labels = st.sampled_from(["stable", "low", "high-x"])
lits = st.one_of(st.booleans(), st.integers(-50, 50), st.text("ab \"\\\n", max_size=5),
                 enum_labels.map(A.Label))


def _linear(pattern):
    names = A.pattern_vars(pattern)
    return len(names) == len(set(names))


patterns = st.recursive(
    st.one_of(idents.map(A.PVar), st.one_of(st.booleans(), st.integers(-5, 5), st.text("ab", max_size=2)).map(A.PConst),
              enum_labels.map(A.PEnum), st.just(A.PUnit()), st.just(A.PNil()), st.just(A.PWild())),
    lambda inner: st.one_of(
        st.lists(inner, min_size=2, max_size=3).map(lambda xs: A.PTuple(tuple(xs))),
        st.dictionaries(labels, inner, min_size=1, max_size=2).map(lambda d: A.PRecord(tuple(d.items()))),
        st.tuples(inner, inner).map(lambda ht: A.PCons(*ht)),
    ),
    max_leaves=4,
).filter(_linear)

types = st.recursive(
    st.one_of(st.sampled_from(["int", "bool", "package", "string"]).map(A.TyName),
              st.sampled_from(["a", "b"]).map(A.TyVar),
              st.lists(enum_labels, min_size=1, max_size=2, unique=True).map(lambda ls: A.TyEnum(tuple(ls)))),
    lambda inner: st.one_of(
        inner.map(A.TyList),
        st.lists(inner, min_size=2, max_size=3).map(lambda xs: A.TyTuple(tuple(xs))),
        st.tuples(inner, inner).map(lambda ab: A.TyArrow(*ab)),
    ),
    max_leaves=4,
)


def _binop(op):
    return lambda ab: A.App(A.App(A.Var(op), ab[0]), ab[1])


exprs = st.recursive(
    st.one_of(idents.map(A.Var), lits.map(A.Lit), st.just(A.Unit()), st.just(A.Nil())),
    lambda inner: st.one_of(
        st.tuples(idents, inner).map(lambda a: A.Fun(*a)),
        st.tuples(inner, inner).map(lambda a: A.App(*a)),
        st.lists(inner, min_size=2, max_size=3).map(lambda xs: A.Tuple_(tuple(xs))),
        st.dictionaries(labels, inner, min_size=1, max_size=2).map(lambda d: A.Record(tuple(d.items()))),
        st.tuples(inner, inner).map(lambda a: A.Cons(*a)),
        st.tuples(inner, labels).map(lambda a: A.Proj(*a)),
        st.tuples(patterns, inner, inner).map(lambda a: A.Let(*a)),
        st.tuples(inner, st.lists(st.tuples(patterns, inner), min_size=1, max_size=3))
          .map(lambda a: A.Match(a[0], tuple(a[1]))),
        st.tuples(inner, types).map(lambda a: A.Ascribe(*a)),
        st.tuples(st.sampled_from(A.BINARY_OPS), inner, inner).map(lambda a: _binop(a[0])(a[1:])),
        inner.map(lambda a: A.App(A.Var("not"), a)),
    ),
    max_leaves=8,
)


@settings(max_examples=300, deadline=None)
@given(exprs)
def test_expression_round_trip(e):
    text = print_expr(e)
    assert parse_expr(text) == e, text


@settings(max_examples=100, deadline=None)
@given(st.lists(exprs, min_size=0, max_size=2), st.one_of(st.none(), exprs),
       st.lists(st.tuples(st.sampled_from([A.MINIMIZE, A.MAXIMIZE]), exprs), max_size=2))
def test_program_round_trip(bodies, constraint, criteria):
    definitions = tuple((f"d{i}", A.Fun("x", b)) for i, b in enumerate(bodies))
    prog = A.Program(definitions, constraint, tuple(criteria))
    assert parse_program(print_program(prog)) == prog
