"""Lexer and recursive-descent parser for MooML.

Operator precedence, loosest first: ``||``, ``&&``, comparisons, ``::``
(right associative), ``+ -``, ``*`` (reserved), prefix ``not``,
application, projection.  Infix operators desugar to applications of the
like-named primitives; ``if`` desugars to a boolean ``match``.

A ``-`` is subtraction only with whitespace on both sides; ``-1`` is a
negative literal and ``max-pin`` is an identifier.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import List, Optional, Tuple

from ..text import ParseDiagnostic
from . import ast as A

KEYWORDS = frozenset(
    "let in fun match with if then else true false not constraint minimize maximize".split()
)
TYPE_NAMES = frozenset("int bool string unit version pkgname formula vpkglist package request".split())

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*(?:-[A-Za-z0-9_]+)*")
_LABEL_RE = re.compile(r"'([a-z][a-z0-9]*(?:-[a-z0-9]+)*)")
_INT_RE = re.compile(r"-?[0-9]+")
_SYMBOLS = ("::", "->", "=>", "==", "!=", "<=", ">=", "&&", "||",
            "(", ")", "[", "]", "{", "}", ",", ";", ".", ":", "|", "=", "<", ">", "+", "*")
_OPEN = "([{,;=|:<>+*"


class MoomlSyntaxError(Exception):
    def __init__(self, message: str, pos: Optional[Tuple[int, int]] = None):
        self.message = message
        self.pos = pos
        line, col = pos or (1, 1)
        self.diagnostics = [ParseDiagnostic(line, col, message)]
        super().__init__(f"{line}:{col}: {message}")


@dataclass(frozen=True)
class Token:
    kind: str  # INT STRING LABEL IDENT KW SYM EOF
    value: object
    pos: Tuple[int, int]


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)

    def advance(k: int) -> None:
        nonlocal i, line, col
        for ch in text[i:i + k]:
            if ch == "\n":
                line += 1
                col = 1
            else:
                col += 1
        i += k

    while i < n:
        ch = text[i]
        if ch in " \t\r\n":
            advance(1)
            continue
        pos = (line, col)
        if text.startswith("(*", i):
            end = text.find("*)", i + 2)
            if end < 0:
                raise MoomlSyntaxError("unterminated comment", pos)
            advance(end + 2 - i)
            continue
        if ch == "-":
            prev = text[i - 1] if i > 0 else " "
            nxt = text[i + 1] if i + 1 < n else " "
            if nxt == ">":
                tokens.append(Token("SYM", "->", pos))
                advance(2)
                continue
            if nxt.isdigit() and (prev.isspace() or prev in _OPEN):
                m = _INT_RE.match(text, i)
                tokens.append(Token("INT", int(m.group()), pos))
                advance(m.end() - i)
                continue
            if (prev.isspace() or prev == "(") and (nxt.isspace() or nxt == ")"):
                tokens.append(Token("SYM", "-", pos))
                advance(1)
                continue
            raise MoomlSyntaxError("subtraction '-' must be surrounded by whitespace", pos)
        if ch.isdigit():
            m = _INT_RE.match(text, i)
            tokens.append(Token("INT", int(m.group()), pos))
            advance(m.end() - i)
            continue
        if ch == '"':
            j = i + 1
            out = []
            while True:
                if j >= n or text[j] == "\n":
                    raise MoomlSyntaxError("unterminated string", pos)
                c = text[j]
                if c == "\\":
                    esc = text[j + 1] if j + 1 < n else ""
                    if esc not in ('"', "\\", "n"):
                        raise MoomlSyntaxError("invalid escape in string", (line, col + j - i))
                    out.append("\n" if esc == "n" else esc)
                    j += 2
                    continue
                if c == '"':
                    break
                out.append(c)
                j += 1
            tokens.append(Token("STRING", "".join(out), pos))
            advance(j + 1 - i)
            continue
        if ch == "'":
            m = _LABEL_RE.match(text, i)
            if not m:
                raise MoomlSyntaxError("malformed enumeration label", pos)
            tokens.append(Token("LABEL", m.group(1), pos))
            advance(m.end() - i)
            continue
        if ch.isalpha() or ch == "_":
            m = _IDENT_RE.match(text, i)
            word = m.group()
            tokens.append(Token("KW" if word in KEYWORDS else "IDENT", word, pos))
            advance(m.end() - i)
            continue
        for sym in _SYMBOLS:
            if text.startswith(sym, i):
                tokens.append(Token("SYM", sym, pos))
                advance(len(sym))
                break
        else:
            raise MoomlSyntaxError(f"unexpected character {ch!r}", pos)
    tokens.append(Token("EOF", None, (line, col)))
    return tokens


_CMP = {"==": "==", "=": "==", "!=": "!=", "<": "<", "<=": "<=", ">": ">", ">=": ">="}
_ATOM_START_SYM = ("(", "[", "{")


class Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0

    # -- token helpers
    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def at(self, kind: str, value: object = None) -> bool:
        t = self.tok
        return t.kind == kind and (value is None or t.value == value)

    def at_sym(self, *values: str) -> bool:
        return self.tok.kind == "SYM" and self.tok.value in values

    def at_kw(self, *values: str) -> bool:
        return self.tok.kind == "KW" and self.tok.value in values

    def next(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def expect_sym(self, value: str) -> Token:
        if not self.at_sym(value):
            self.fail(f"expected '{value}'")
        return self.next()

    def expect_kw(self, value: str) -> Token:
        if not self.at_kw(value):
            self.fail(f"expected '{value}'")
        return self.next()

    def ident(self) -> Token:
        if not self.at("IDENT"):
            self.fail("expected an identifier")
        return self.next()

    def label(self) -> str:
        if self.tok.kind in ("IDENT", "KW"):
            return self.next().value
        self.fail("expected a field label")

    def fail(self, message: str):
        t = self.tok
        found = "end of input" if t.kind == "EOF" else repr(t.value)
        raise MoomlSyntaxError(f"{message}, found {found}", t.pos)

    # -- programs
    def program(self) -> A.Program:
        defs: List[Tuple[str, A.Expr]] = []
        names = set()
        constraint = None
        criteria: List[Tuple[str, A.Expr]] = []
        while not self.at("EOF"):
            t = self.tok
            if self.at_kw("let"):
                if constraint is not None or criteria:
                    self.fail("definitions must precede the constraint and criteria")
                self.next()
                name_tok = self.ident()
                name = name_tok.value
                params = []
                while self.at("IDENT"):
                    params.append(self.next().value)
                self.expect_sym("=")
                body = self.expr()
                for p in reversed(params):
                    body = A.Fun(p, body, name_tok.pos)
                if name in names:
                    raise MoomlSyntaxError(f"{name} is defined twice", name_tok.pos)
                if name in A.free_vars(body):
                    raise MoomlSyntaxError(f"recursion not permitted: {name} refers to itself", name_tok.pos)
                if self.at_kw("in"):
                    self.fail("local 'let ... in' is not allowed at top level")
                names.add(name)
                defs.append((name, body))
            elif self.at_kw("constraint"):
                if constraint is not None:
                    self.fail("only one constraint is allowed")
                if criteria:
                    self.fail("the constraint must precede the criteria")
                self.next()
                constraint = self.expr()
            elif self.at_kw("minimize", "maximize"):
                polarity = self.next().value
                criteria.append((polarity, self.expr()))
            else:
                self.fail("expected let, constraint, minimize or maximize")
            if not (self.at("EOF") or self.at_kw("let", "constraint", "minimize", "maximize")):
                self.fail(f"unexpected token after {t.value}")
        return A.Program(tuple(defs), constraint, tuple(criteria))

    # -- expressions
    def expr(self) -> A.Expr:
        t = self.tok
        if self.at_kw("fun"):
            self.next()
            params = [self.ident().value]
            while self.at("IDENT"):
                params.append(self.next().value)
            self.expect_sym("->")
            body = self.expr()
            for p in reversed(params):
                body = A.Fun(p, body, t.pos)
            return body
        if self.at_kw("let"):
            self.next()
            if self.at("IDENT") and self.peek().kind == "IDENT":
                name = self.next().value
                params = []
                while self.at("IDENT"):
                    params.append(self.next().value)
                self.expect_sym("=")
                bound = self.expr()
                for p in reversed(params):
                    bound = A.Fun(p, bound, t.pos)
                pat: A.Pattern = A.PVar(name, t.pos)
            else:
                pat = self.pattern()
                self.expect_sym("=")
                bound = self.expr()
            self.expect_kw("in")
            return A.Let(pat, bound, self.expr(), t.pos)
        if self.at_kw("match"):
            self.next()
            scrutinee = self.expr()
            self.expect_kw("with")
            if self.at_sym("|"):
                self.next()
            arms = [self.arm()]
            while self.at_sym("|"):
                self.next()
                arms.append(self.arm())
            return A.Match(scrutinee, tuple(arms), t.pos)
        if self.at_kw("if"):
            self.next()
            cond = self.expr()
            self.expect_kw("then")
            yes = self.expr()
            self.expect_kw("else")
            no = self.expr()
            return A.Match(cond, ((A.PConst(True), yes), (A.PConst(False), no)), t.pos)
        return self.or_expr()

    def arm(self) -> Tuple[A.Pattern, A.Expr]:
        pat = self.pattern()
        if not self.at_sym("=>", "->"):
            self.fail("expected '=>'")
        self.next()
        return pat, self.expr()

    def _binop(self, op: str, left: A.Expr, right: A.Expr, pos) -> A.Expr:
        return A.App(A.App(A.Var(op, pos), left, pos), right, pos)

    def or_expr(self) -> A.Expr:
        left = self.and_expr()
        while self.at_sym("||"):
            t = self.next()
            left = self._binop("||", left, self.and_expr(), t.pos)
        return left

    def and_expr(self) -> A.Expr:
        left = self.cmp_expr()
        while self.at_sym("&&"):
            t = self.next()
            left = self._binop("&&", left, self.cmp_expr(), t.pos)
        return left

    def cmp_expr(self) -> A.Expr:
        left = self.cons_expr()
        while self.tok.kind == "SYM" and self.tok.value in _CMP:
            t = self.next()
            left = self._binop(_CMP[t.value], left, self.cons_expr(), t.pos)
        return left

    def cons_expr(self) -> A.Expr:
        head = self.add_expr()
        if self.at_sym("::"):
            t = self.next()
            return A.Cons(head, self.cons_expr(), t.pos)
        return head

    def add_expr(self) -> A.Expr:
        left = self.mul_expr()
        while self.at_sym("+", "-"):
            t = self.next()
            left = self._binop(t.value, left, self.mul_expr(), t.pos)
        return left

    def mul_expr(self) -> A.Expr:
        left = self.unary()
        if self.at_sym("*"):
            self.fail("operator '*' is reserved")
        return left

    def unary(self) -> A.Expr:
        if self.at_kw("not"):
            t = self.next()
            return A.App(A.Var("not", t.pos), self.unary(), t.pos)
        return self.application()

    def _starts_atom(self) -> bool:
        t = self.tok
        if t.kind in ("INT", "STRING", "LABEL", "IDENT"):
            return True
        if t.kind == "KW":
            return t.value in ("true", "false")
        return t.kind == "SYM" and t.value in _ATOM_START_SYM

    def application(self) -> A.Expr:
        fn = self.postfix()
        while self._starts_atom():
            t = self.tok
            fn = A.App(fn, self.postfix(), t.pos)
        return fn

    def postfix(self) -> A.Expr:
        e = self.atom()
        while self.at_sym("."):
            t = self.next()
            e = A.Proj(e, self.label(), t.pos)
        return e

    def atom(self) -> A.Expr:
        t = self.tok
        if t.kind == "INT":
            self.next()
            return A.Lit(t.value, t.pos)
        if t.kind == "STRING":
            self.next()
            return A.Lit(t.value, t.pos)
        if t.kind == "LABEL":
            self.next()
            return A.Lit(A.Label(t.value), t.pos)
        if self.at_kw("true", "false"):
            self.next()
            return A.Lit(t.value == "true", t.pos)
        if t.kind == "IDENT":
            self.next()
            return A.Var(t.value, t.pos)
        if self.at_sym("("):
            self.next()
            if self.at_sym(")"):
                self.next()
                return A.Unit(t.pos)
            # operator section such as (+) or (&&)
            nxt = self.peek()
            if nxt.kind == "SYM" and nxt.value == ")":
                op = self.tok
                name = None
                if op.kind == "SYM" and (op.value in A.BINARY_OPS or op.value in _CMP):
                    name = _CMP.get(op.value, op.value)
                elif op.kind == "KW" and op.value == "not":
                    name = "not"
                if name is not None:
                    self.next()
                    self.next()
                    return A.Var(name, op.pos)
            first = self.expr()
            if self.at_sym(":"):
                self.next()
                ty = self.type_expr()
                self.expect_sym(")")
                return A.Ascribe(first, ty, t.pos)
            if self.at_sym(","):
                items = [first]
                while self.at_sym(","):
                    self.next()
                    items.append(self.expr())
                self.expect_sym(")")
                return A.Tuple_(tuple(items), t.pos)
            self.expect_sym(")")
            return first
        if self.at_sym("["):
            self.next()
            if self.at_sym("]"):
                self.next()
                return A.Nil(t.pos)
            items = [self.expr()]
            while self.at_sym(";"):
                self.next()
                items.append(self.expr())
            self.expect_sym("]")
            out: A.Expr = A.Nil(t.pos)
            for item in reversed(items):
                out = A.Cons(item, out, t.pos)
            return out
        if self.at_sym("{"):
            self.next()
            fields = []
            seen = set()
            while True:
                lt = self.tok
                name = self.label()
                if name in seen:
                    raise MoomlSyntaxError(f"duplicate record label {name}", lt.pos)
                seen.add(name)
                self.expect_sym("=")
                fields.append((name, self.expr()))
                if self.at_sym(","):
                    self.next()
                    continue
                break
            self.expect_sym("}")
            return A.Record(tuple(fields), t.pos)
        self.fail("expected an expression")

    # -- patterns
    def pattern(self) -> A.Pattern:
        start = self.tok.pos
        pat = self._cons_pattern()
        names = A.pattern_vars(pat)
        if len(set(names)) != len(names):
            raise MoomlSyntaxError("a variable occurs twice in one pattern", start)
        return pat

    def _cons_pattern(self) -> A.Pattern:
        head = self._atom_pattern()
        if self.at_sym("::"):
            t = self.next()
            return A.PCons(head, self._cons_pattern(), t.pos)
        return head

    def _atom_pattern(self) -> A.Pattern:
        t = self.tok
        if t.kind == "IDENT":
            self.next()
            return A.PWild(t.pos) if t.value == "_" else A.PVar(t.value, t.pos)
        if self.at_sym("*"):
            self.next()
            return A.PWild(t.pos)
        if t.kind in ("INT", "STRING"):
            self.next()
            return A.PConst(t.value, t.pos)
        if t.kind == "LABEL":
            self.next()
            return A.PEnum(t.value, t.pos)
        if self.at_kw("true", "false"):
            self.next()
            return A.PConst(t.value == "true", t.pos)
        if self.at_sym("("):
            self.next()
            if self.at_sym(")"):
                self.next()
                return A.PUnit(t.pos)
            items = [self._cons_pattern()]
            while self.at_sym(","):
                self.next()
                items.append(self._cons_pattern())
            self.expect_sym(")")
            return items[0] if len(items) == 1 else A.PTuple(tuple(items), t.pos)
        if self.at_sym("["):
            self.next()
            if self.at_sym("]"):
                self.next()
                return A.PNil(t.pos)
            items = [self._cons_pattern()]
            while self.at_sym(";"):
                self.next()
                items.append(self._cons_pattern())
            self.expect_sym("]")
            out: A.Pattern = A.PNil(t.pos)
            for item in reversed(items):
                out = A.PCons(item, out, t.pos)
            return out
        if self.at_sym("{"):
            self.next()
            fields = []
            seen = set()
            while True:
                lt = self.tok
                name = self.label()
                if name in seen:
                    raise MoomlSyntaxError(f"duplicate record label {name}", lt.pos)
                seen.add(name)
                self.expect_sym("=")
                fields.append((name, self._cons_pattern()))
                if self.at_sym(","):
                    self.next()
                    continue
                break
            self.expect_sym("}")
            return A.PRecord(tuple(fields), t.pos)
        self.fail("expected a pattern")

    # -- type expressions
    def type_expr(self) -> A.TypeExpr:
        left = self._tuple_type()
        if self.at_sym("->"):
            self.next()
            return A.TyArrow(left, self.type_expr())
        return left

    def _tuple_type(self) -> A.TypeExpr:
        items = [self._app_type()]
        while self.at_sym("*"):
            self.next()
            items.append(self._app_type())
        return items[0] if len(items) == 1 else A.TyTuple(tuple(items))

    def _app_type(self) -> A.TypeExpr:
        ty = self._atom_type()
        while self.at("IDENT", "list"):
            self.next()
            ty = A.TyList(ty)
        return ty

    def _atom_type(self) -> A.TypeExpr:
        t = self.tok
        if t.kind == "LABEL":
            self.next()
            return A.TyVar(t.value)
        if t.kind == "IDENT" and t.value == "enum":
            self.next()
            self.expect_sym("(")
            labels = [self.ident().value]
            while self.at_sym(","):
                self.next()
                labels.append(self.ident().value)
            self.expect_sym(")")
            return A.TyEnum(tuple(labels))
        if t.kind == "IDENT" and t.value in TYPE_NAMES:
            self.next()
            return A.TyName(t.value)
        if self.at_sym("("):
            self.next()
            ty = self.type_expr()
            self.expect_sym(")")
            return ty
        self.fail("expected a type")


def parse_program(text: str) -> A.Program:
    """Parse MooML source; raises :class:`MoomlSyntaxError`."""
    return Parser(text).program()


def parse_expr(text: str) -> A.Expr:
    p = Parser(text)
    e = p.expr()
    if not p.at("EOF"):
        p.fail("unexpected trailing input")
    return e
