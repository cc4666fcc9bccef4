"""MooML: a small functional language for user preferences over CUDF solutions."""

from .ast import Program
from .parser import MoomlSyntaxError, parse_expr, parse_program
from .printer import print_expr, print_program
from .types import Locality, LocalityError, MoomlTypeError, classify_locality, infer_expr, infer_program

__all__ = [
    "Program", "MoomlSyntaxError", "parse_expr", "parse_program", "print_expr", "print_program",
    "Locality", "LocalityError", "MoomlTypeError", "classify_locality", "infer_expr", "infer_program",
]
