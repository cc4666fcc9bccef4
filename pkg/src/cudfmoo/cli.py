"""``cudfmoo`` command line tool.

Exit codes: 0 success or positive verdict, 1 negative verdict, 2 input
rejected (parse or type errors, limits), 3 I/O failure.  Reports go to
standard output, diagnostics to standard error.
"""

from __future__ import annotations

import argparse
import sys
from typing import List, Optional, Sequence

from .model import CudfDoc
from .mooml.ast import Program
from .mooml.evaluator import CompiledProgram, EnvBuilder, ExecError
from .mooml.parser import MoomlSyntaxError, parse_program
from .mooml.partial import apply_transformer, partially_evaluate
from .mooml.printer import print_program
from .mooml.types import MoomlTypeError, infer_program, scheme_to_str
from .semantics import is_consistent, is_valid_solution
from .solver import DEFAULT_LIMIT, SolverLimitError, solve_optimal
from .text import CudfParseError, parse_document, parse_solution, print_document, print_solution

EXIT_OK, EXIT_NEGATIVE, EXIT_REJECTED, EXIT_IO = 0, 1, 2, 3


class _Rejected(Exception):
    def __init__(self, lines: List[str], code: int = EXIT_REJECTED):
        self.lines = lines
        self.code = code


def _read(path: str) -> bytes:
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise _Rejected([f"{path}: {exc.strerror or exc}"], EXIT_IO) from None


def _write(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise _Rejected([f"{path}: {exc.strerror or exc}"], EXIT_IO) from None


def _doc(path: str) -> CudfDoc:
    data = _read(path)
    try:
        return parse_document(data)
    except CudfParseError as exc:
        raise _Rejected([f"{path}:{d}" for d in exc.diagnostics]) from None


def _program(doc: Optional[CudfDoc], args, required: bool = False) -> Program:
    """Program from ``--preferences`` or the document's embedded preferences."""
    embedded = doc.request.preferences if doc is not None else None
    path = getattr(args, "preferences", None)
    if path is not None:
        if embedded is not None:
            print("warning: --preferences overrides the preferences embedded in the document", file=sys.stderr)
        origin = path
        try:
            text = _read(path).decode("utf-8")
        except UnicodeDecodeError:
            raise _Rejected([f"{path}: not valid UTF-8"]) from None
    elif embedded is not None:
        origin, text = "preferences", embedded
    elif required:
        raise _Rejected(["no preferences: pass --preferences or embed them in the request"])
    else:
        origin, text = "<empty>", ""
    try:
        program = parse_program(text)
    except MoomlSyntaxError as exc:
        raise _Rejected([f"{origin}:{exc}"]) from None
    try:
        infer_program(program, doc.declarations if doc is not None else None)
    except MoomlTypeError as exc:
        raise _Rejected([f"{origin}:{exc}"]) from None
    return program


def _report(violations) -> int:
    for v in violations:
        print(v)
    return EXIT_OK if not violations else EXIT_NEGATIVE


def cmd_check(args) -> int:
    doc = _doc(args.doc)
    result = is_consistent(doc)
    if args.verbose:
        print(f"{len(doc.universe)} packages, {len(doc.installed_status())} installed", file=sys.stderr)
    return _report(result.violations)


def cmd_check_solution(args) -> int:
    doc = _doc(args.doc)
    try:
        solution = parse_solution(_read(args.solution), doc)
    except CudfParseError as exc:
        raise _Rejected([f"{args.solution}:{d}" for d in exc.diagnostics]) from None
    return _report(is_valid_solution(doc, solution).violations)


def cmd_eval(args) -> int:
    doc = _doc(args.doc)
    try:
        solution = parse_solution(_read(args.solution), doc)
    except CudfParseError as exc:
        raise _Rejected([f"{args.solution}:{d}" for d in exc.diagnostics]) from None
    program = _program(doc, args)
    try:
        outcome = CompiledProgram(program).run(EnvBuilder(doc).build(solution))
    except ExecError as exc:
        print(f"error: {exc}")
        return EXIT_NEGATIVE
    print(outcome)
    return EXIT_OK


def cmd_typecheck(args) -> int:
    doc = _doc(args.doc) if args.doc else None
    try:
        text = _read(args.program).decode("utf-8")
        program = parse_program(text)
        typed = infer_program(program, doc.declarations if doc is not None else None)
    except UnicodeDecodeError:
        raise _Rejected([f"{args.program}: not valid UTF-8"]) from None
    except (MoomlSyntaxError, MoomlTypeError) as exc:
        raise _Rejected([f"{args.program}:{exc}"]) from None
    for name, scheme in typed.schemes.items():
        print(f"{name} : {scheme_to_str(scheme)}")
    if program.constraint is not None:
        print("constraint : bool")
    for i, (polarity, _) in enumerate(program.criteria):
        print(f"{polarity}[{i}] : int")
    return EXIT_OK


def cmd_pe(args) -> int:
    doc = _doc(args.doc)
    program = _program(doc, args, required=True)
    new_program, transformer = partially_evaluate(doc, program)
    new_doc = apply_transformer(transformer, doc)
    _write(args.out_doc, print_document(new_doc))
    _write(args.out_program, print_program(new_program))
    if args.verbose:
        names = ", ".join(transformer.names) or "none"
        print(f"fresh properties: {names}", file=sys.stderr)
    return EXIT_OK


def cmd_solve(args) -> int:
    doc = _doc(args.doc)
    program = _program(doc, args)
    try:
        result = solve_optimal(doc, program, limit=args.limit, typecheck=False)
    except SolverLimitError as exc:
        raise _Rejected([str(exc)]) from None
    if args.verbose:
        print(f"explored {result.explored} statuses, {result.valid_count} valid, "
              f"{result.feasible} satisfy the constraint, {result.errors} execution errors, "
              f"{result.ties} optimal", file=sys.stderr)
    if result.best is None:
        print("unsatisfiable")
        return EXIT_NEGATIVE
    sys.stdout.write(print_solution(doc, result.best))
    print(result.outcome)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--verbose", "-v", action="store_true", help="print statistics to standard error")
    parser = argparse.ArgumentParser(prog="cudfmoo", description="CUDF checking, MooML preferences and solving.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="check that the installed status of a document is consistent")
    p.add_argument("doc")
    p.set_defaults(run=cmd_check)

    p = sub.add_parser("check-solution", parents=[common], help="check that a proposed solution is valid")
    p.add_argument("doc")
    p.add_argument("solution")
    p.set_defaults(run=cmd_check_solution)

    p = sub.add_parser("eval", parents=[common], help="evaluate preferences on a proposed solution")
    p.add_argument("doc")
    p.add_argument("solution")
    p.add_argument("--preferences", metavar="PATH", help="MooML program; overrides embedded preferences")
    p.set_defaults(run=cmd_eval)

    p = sub.add_parser("typecheck", parents=[common], help="print the principal type schemes of a MooML program")
    p.add_argument("program")
    p.add_argument("--doc", help="document whose preamble declares extra properties")
    p.set_defaults(run=cmd_typecheck)

    p = sub.add_parser("pe", parents=[common], help="partially evaluate a program against a document")
    p.add_argument("doc")
    p.add_argument("--preferences", metavar="PATH")
    p.add_argument("--out-doc", required=True, metavar="PATH")
    p.add_argument("--out-program", required=True, metavar="PATH")
    p.set_defaults(run=cmd_pe)

    p = sub.add_parser("solve", parents=[common], help="find an optimal solution by exhaustive enumeration")
    p.add_argument("doc")
    p.add_argument("--preferences", metavar="PATH")
    p.add_argument("--limit", type=int, default=DEFAULT_LIMIT, help="maximum number of package versions")
    p.set_defaults(run=cmd_solve)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.run(args)
    except _Rejected as exc:
        for line in exc.lines:
            print(line, file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
