"""Pretty-printer for MooML; ``parse_program(print_program(p)) == p``."""

from __future__ import annotations

from typing import List

from . import ast as A

# binding strength of each printed form; higher binds tighter
_OR, _AND, _CMP, _CONS, _ADD, _NOT, _APP, _ATOM = 1, 2, 3, 4, 5, 7, 8, 9
_LEVEL = {"||": _OR, "&&": _AND, "==": _CMP, "!=": _CMP, "<": _CMP, "<=": _CMP,
          ">": _CMP, ">=": _CMP, "+": _ADD, "-": _ADD}


def _binary(e: A.Expr):
    """Return (op, left, right) when ``e`` is a saturated infix operator application."""
    if (isinstance(e, A.App) and isinstance(e.fn, A.App) and isinstance(e.fn.fn, A.Var)
            and e.fn.fn.name in _LEVEL):
        return e.fn.fn.name, e.fn.arg, e.arg
    return None


def _is_not(e: A.Expr) -> bool:
    return isinstance(e, A.App) and isinstance(e.fn, A.Var) and e.fn.name == "not"


def _is_if(e: A.Expr) -> bool:
    return (isinstance(e, A.Match) and len(e.arms) == 2
            and e.arms[0][0] == A.PConst(True) and e.arms[1][0] == A.PConst(False))


def _string(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def print_literal(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, A.Label):
        return "'" + v
    if isinstance(v, int):
        return str(v)
    return _string(v)


def _level(e: A.Expr) -> int:
    if isinstance(e, (A.Fun, A.Let, A.Match)):
        return 0
    b = _binary(e)
    if b:
        return _LEVEL[b[0]]
    if isinstance(e, A.Cons) and not _list_items(e):
        return _CONS
    if _is_not(e):
        return _NOT
    if isinstance(e, A.App):
        return _APP
    return _ATOM


def _list_items(e: A.Expr):
    """Items of a cons chain ending in ``[]``, or None."""
    items = []
    while isinstance(e, A.Cons):
        items.append(e.head)
        e = e.tail
    return items if isinstance(e, A.Nil) and items else None


def _at(e: A.Expr, level: int) -> str:
    """Print ``e`` so that it parses back at precedence ``level``."""
    text = print_expr(e)
    return f"({text})" if _level(e) < level else text


def print_expr(e: A.Expr) -> str:
    if isinstance(e, A.Var):
        if e.name in _LEVEL or e.name == "not":
            return f"({e.name})"
        return e.name
    if isinstance(e, A.Lit):
        return print_literal(e.value)
    if isinstance(e, A.Unit):
        return "()"
    if isinstance(e, A.Nil):
        return "[]"
    if isinstance(e, A.Tuple_):
        return "(" + ", ".join(print_expr(x) for x in e.items) + ")"
    if isinstance(e, A.Record):
        return "{" + ", ".join(f"{k} = {print_expr(v)}" for k, v in e.fields) + "}"
    if isinstance(e, A.Proj):
        return f"{_at(e.expr, _ATOM)}.{e.label}"
    if isinstance(e, A.Ascribe):
        return f"({print_expr(e.expr)} : {print_type(e.type)})"
    if isinstance(e, A.Fun):
        params = [e.param]
        body = e.body
        while isinstance(body, A.Fun):
            params.append(body.param)
            body = body.body
        return f"fun {' '.join(params)} -> {print_expr(body)}"
    if isinstance(e, A.Let):
        return f"let {print_pattern(e.pattern)} = {print_expr(e.bound)} in {print_expr(e.body)}"
    if isinstance(e, A.Match):
        if _is_if(e):
            yes, no = e.arms[0][1], e.arms[1][1]
            return f"if {print_expr(e.scrutinee)} then {print_expr(yes)} else {print_expr(no)}"
        arms = []
        for k, (pat, body) in enumerate(e.arms):
            last = k == len(e.arms) - 1
            arms.append(f"{print_pattern(pat)} => {print_expr(body) if last else _at(body, 1)}")
        return f"match {print_expr(e.scrutinee)} with " + " | ".join(arms)
    if isinstance(e, A.Cons):
        items = _list_items(e)
        if items is not None:
            return "[" + "; ".join(print_expr(x) for x in items) + "]"
        return f"{_at(e.head, _ADD)} :: {_at(e.tail, _CONS)}"
    b = _binary(e)
    if b:
        op, left, right = b
        lvl = _LEVEL[op]
        return f"{_at(left, lvl)} {'=' if op == '==' else op} {_at(right, lvl + 1)}"
    if _is_not(e):
        return f"not {_at(e.arg, _NOT)}"
    if isinstance(e, A.App):
        return f"{_at(e.fn, _APP)} {_at(e.arg, _ATOM)}"
    raise TypeError(f"not an expression: {e!r}")


def print_pattern(p: A.Pattern) -> str:
    if isinstance(p, A.PVar):
        return p.name
    if isinstance(p, A.PWild):
        return "_"
    if isinstance(p, A.PConst):
        return print_literal(p.value)
    if isinstance(p, A.PEnum):
        return "'" + p.label
    if isinstance(p, A.PUnit):
        return "()"
    if isinstance(p, A.PNil):
        return "[]"
    if isinstance(p, A.PTuple):
        return "(" + ", ".join(print_pattern(x) for x in p.items) + ")"
    if isinstance(p, A.PRecord):
        return "{" + ", ".join(f"{k} = {print_pattern(v)}" for k, v in p.fields) + "}"
    if isinstance(p, A.PCons):
        head = print_pattern(p.head)
        if isinstance(p.head, A.PCons):
            head = f"({head})"
        return f"{head} :: {print_pattern(p.tail)}"
    raise TypeError(f"not a pattern: {p!r}")


def print_type(t: A.TypeExpr) -> str:
    if isinstance(t, A.TyName):
        return t.name
    if isinstance(t, A.TyVar):
        return "'" + t.name
    if isinstance(t, A.TyEnum):
        return f"enum({', '.join(t.labels)})"
    if isinstance(t, A.TyList):
        inner = print_type(t.item)
        if isinstance(t.item, (A.TyArrow, A.TyTuple)):
            inner = f"({inner})"
        return f"{inner} list"
    if isinstance(t, A.TyTuple):
        return " * ".join(f"({print_type(x)})" if isinstance(x, (A.TyArrow, A.TyTuple)) else print_type(x)
                          for x in t.items)
    if isinstance(t, A.TyArrow):
        arg = print_type(t.arg)
        if isinstance(t.arg, A.TyArrow):
            arg = f"({arg})"
        return f"{arg} -> {print_type(t.result)}"
    raise TypeError(f"not a type: {t!r}")


def print_program(p: A.Program) -> str:
    lines: List[str] = []
    for name, body in p.definitions:
        params = []
        while isinstance(body, A.Fun):
            params.append(body.param)
            body = body.body
        head = " ".join([name] + params)
        lines.append(f"let {head} = {print_expr(body)}")
    if p.constraint is not None:
        lines.append(f"constraint {print_expr(p.constraint)}")
    for polarity, e in p.criteria:
        lines.append(f"{polarity} {print_expr(e)}")
    return "".join(line + "\n" for line in lines)
