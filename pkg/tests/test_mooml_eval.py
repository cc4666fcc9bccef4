import random
from concurrent.futures import ThreadPoolExecutor

import pytest
from hypothesis import given, strategies as st

from cudfmoo.model import CudfDoc, PackageDesc, Preamble, PropertyType, Request, Solution
from cudfmoo.mooml import ast as A
from cudfmoo.mooml import infer_program, parse_expr, parse_program
from cudfmoo.mooml.evaluator import (
    Comparison, CompiledProgram, EvalEnv, ExecError, MList, Outcome, build_env, compare_outcomes, eval_expr, eval_program,
)

from conftest import load_doc, load_program
from randgen import all_solutions, random_doc, random_program, random_solution

EMPTY_DOC = CudfDoc(None, (), Request())


def ev(text, doc=EMPTY_DOC, solution=Solution()):
    return eval_expr(build_env(doc, solution), parse_expr(text))


def test_fold_and_sum():
    assert ev("fold add [3; 2; 1] 0") == 6
    assert ev("sum []") == 0
    # the head of the list is applied outermost
    assert ev("fold (fun x -> fun acc -> x :: acc) [1; 2; 3] []") == (1, 2, 3)
    assert ev("fold (fun x -> fun acc -> acc - x) [1; 2; 3] 10") == 4


def test_build_env_sample(sample_doc):
    env = build_env(sample_doc, sample_doc.installed_status())
    by_name = {r.get("name"): r for r in env.u}
    car = by_name["car"]
    assert car.get("was-installed") is True and car.get("is-installed") is True and car.get("bugs") == 183
    assert by_name["bicycle"].get("suite") == A.Label("unstable")
    assert by_name["electric-engine"].get("suite") == A.Label("stable")
    assert [r.get("name") for r in env.u] == [p.name for p in sample_doc.universe]
    env = build_env(sample_doc, Solution())
    assert not any(r.get("is-installed") for r in env.u)


def test_request_record(sample_doc):
    assert ev("length r.install", sample_doc) == 2
    assert ev("length r.upgrade", sample_doc) == 2


def test_cardinality_on_sample(sample_doc):
    sol = Solution([("car", 1), ("gasoline-engine", 1)])
    assert ev("cardinality (fun p -> p.is-installed) u", sample_doc, sol) == 2


def _sized(*sizes):
    decl = Preamble((("installed-size", PropertyType("int")),))
    universe = tuple(PackageDesc(f"p{i}", 1, extra=(("installed-size", s),)) for i, s in enumerate(sizes))
    return CudfDoc(decl, universe, Request())


def test_example1_toy():
    doc = _sized(10, 20)
    outcome = eval_program(doc, Solution(p.key for p in doc.universe), load_program("size"))
    assert outcome == Outcome(True, (("minimize", 30),))
    assert str(outcome) == "constraint=true\nmeasure[0]=min:30"


def test_empty_program():
    assert eval_program(EMPTY_DOC, Solution(), A.Program()) == Outcome(True, ())


def test_strict_pinning_rejects_low_priority():
    doc = load_doc("pinning")
    preferred = {}
    for p in doc.universe:
        prio = doc.extras_of(p)["pin-priority"]
        preferred[p.name] = max(preferred.get(p.name, prio), prio)
    low = next(p for p in doc.universe if doc.extras_of(p)["pin-priority"] < preferred[p.name])
    outcome = eval_program(doc, Solution([low.key]), load_program("pinning-strict"))
    assert outcome.constraint_holds is False
    assert eval_program(doc, Solution(), load_program("pinning-strict")).constraint_holds is True


@pytest.mark.parametrize("text,kind", [
    ("max []", "empty-list-argument"),
    ("min []", "empty-list-argument"),
    ("match 3 with 1 => true", "match-failure"),
    ("9223372036854775807 + 1", "division-or-domain"),
    ("0 - 9223372036854775807 - 2", "division-or-domain"),
    ("sum [9223372036854775807; 1]", "division-or-domain"),
    ("(fun x -> x) == (fun y -> y)", "division-or-domain"),
])
def test_exec_errors(text, kind):
    with pytest.raises(ExecError) as info:
        ev(text)
    assert info.value.kind == kind


def test_exec_error_in_program_propagates():
    prog = parse_program("minimize max (map (fun p -> 1) u)")
    with pytest.raises(ExecError):
        eval_program(EMPTY_DOC, Solution(), prog)


def test_structural_equality():
    assert ev("(1, [true; false]) == (1, [true; false])") is True
    assert ev("{a = 1, b = \"x\"} == {a = 1, b = \"y\"}") is False
    assert ev("'low != 'high") is True


def test_let_and_patterns():
    assert ev("let (a, b) = (1, 2) in a + b") == 3
    assert ev("match [1; 2; 3] with [] => 0 | h :: t => h + length t") == 3
    assert ev("match {a = 1, b = 2} with {a = x, b = _} => x") == 1
    assert ev("(fun x -> fun y -> x - y) 5 2") == 3


def test_compare_outcomes_examples():
    def o(ok, pols, vals):
        return Outcome(ok, tuple(zip(pols, vals)))

    assert compare_outcomes(o(True, ["minimize"], [3]), o(True, ["minimize"], [5])) is Comparison.A_BETTER
    assert compare_outcomes(o(True, ["maximize"] * 2, [2, 9]), o(True, ["maximize"] * 2, [2, 4])) \
        is Comparison.A_BETTER
    assert compare_outcomes(o(False, ["minimize"], [0]), o(True, ["minimize"], [999])) is Comparison.B_BETTER
    assert compare_outcomes(o(False, ["minimize"], [0]), o(False, ["minimize"], [1])) is Comparison.INCOMPARABLE
    assert compare_outcomes(o(True, [], []), o(True, [], [])) is Comparison.EQUAL
    with pytest.raises(ValueError):
        compare_outcomes(o(True, ["minimize"], [1]), o(True, ["maximize"], [1]))


outcomes = st.lists(st.integers(-3, 3), min_size=2, max_size=2).map(
    lambda vs: Outcome(True, (("minimize", vs[0]), ("maximize", vs[1]))))


@given(outcomes, outcomes, outcomes)
def test_compare_is_total_preorder(a, b, c):
    ab, ba = compare_outcomes(a, b), compare_outcomes(b, a)
    assert ab is not Comparison.INCOMPARABLE
    flip = {Comparison.A_BETTER: Comparison.B_BETTER, Comparison.B_BETTER: Comparison.A_BETTER,
            Comparison.EQUAL: Comparison.EQUAL}
    assert ba is flip[ab]
    if ab is Comparison.EQUAL:
        assert a.measures == b.measures
    not_worse = (Comparison.A_BETTER, Comparison.EQUAL)
    if ab in not_worse and compare_outcomes(b, c) in not_worse:
        assert compare_outcomes(a, c) in not_worse


FOLD_DEFS = """
let my-map f l = fold (fun x -> fun acc -> f x :: acc) l []
let my-filter f l = fold (fun x -> fun acc -> if f x then x :: acc else acc) l []
let my-length l = fold (fun x -> fun acc -> acc + 1) l 0
let my-sum l = fold add l 0
let my-forall f l = fold (fun x -> fun acc -> f x && acc) l true
let my-exists f l = fold (fun x -> fun acc -> f x || acc) l false
let my-card f l = fold (fun x -> fun acc -> if f x then acc + 1 else acc) l 0
let my-max l = match l with h :: t => fold (fun x -> fun acc -> if x > acc then x else acc) t h
"""

FOLD_PAIRS = [
    ("map (fun x -> x - 2) L", "my-map (fun x -> x - 2) L"),
    ("filter (fun x -> x > 3) L", "my-filter (fun x -> x > 3) L"),
    ("length L", "my-length L"),
    ("sum L", "my-sum L"),
    ("forall (fun x -> x > 0) L", "my-forall (fun x -> x > 0) L"),
    ("exists (fun x -> x == 4) L", "my-exists (fun x -> x == 4) L"),
    ("cardinality (fun x -> x < 5) L", "my-card (fun x -> x < 5) L"),
    ("max L", "my-max L"),
]


def test_fold_equivalence():
    infer_program(parse_program(FOLD_DEFS))
    base = build_env(EMPTY_DOC, Solution())
    compiled = [(lib, CompiledProgram(parse_program(FOLD_DEFS + f"constraint ({lib}) == ({mine})")))
                for lib, mine in FOLD_PAIRS]
    rng = random.Random(1)
    for _ in range(1000):
        items = [rng.randint(-10, 10) for _ in range(rng.randint(1, 8))]
        env = EvalEnv(base.u, base.r, {"L": MList(items)})
        for lib, prog in compiled:
            assert prog.run(env).constraint_holds, (lib, items)


def test_evaluation_is_deterministic_and_thread_safe():
    doc = load_doc("freshness")
    compiled = CompiledProgram(load_program("freshness"))
    sols = list(all_solutions(doc))
    sequential = [compiled.run(build_env(doc, s)) for s in sols]
    with ThreadPoolExecutor(4) as pool:
        parallel = list(pool.map(lambda s: compiled.run(build_env(doc, s)), sols))
    assert parallel == sequential
    assert [compiled.run(build_env(doc, s)) for s in sols] == sequential


def _iterators(e):
    return sum(1 for n in A.walk(e) if isinstance(n, A.Var) and n.name in
               ("fold", "map", "filter", "length", "sum", "max", "min", "forall", "exists", "cardinality"))


def test_step_ceiling():
    rng = random.Random(13)
    for _ in range(150):
        prog = random_program(rng, max_depth=3)
        doc = random_doc(rng, n_max=6)
        env = build_env(doc, random_solution(rng, doc))
        exprs = [b for _, b in prog.definitions] + ([prog.constraint] if prog.constraint else []) + \
                [c for _, c in prog.criteria]
        total_size = sum(A.size(e) for e in exprs)
        k = sum(_iterators(e) for e in exprs)
        lists = len(doc.universe) + len(doc.request.install) + len(doc.request.remove) + len(doc.request.upgrade)
        ceiling = total_size * (lists + 1) ** max(k, 1) * 8
        try:
            steps = CompiledProgram(prog).steps(env)
        except ExecError:
            continue
        assert steps <= ceiling
