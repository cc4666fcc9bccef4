"""Exhaustive optimal solver for small universes.

Every status of the universe is enumerated as a bit-vector over the
packages sorted by (name, version), bit ``i`` standing for the ``i``-th
package, in increasing integer order.  This is the ground truth that the
other components are tested against, not a scalable solver.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional

from .model import CudfDoc, Solution
from .mooml.ast import Program
from .mooml.evaluator import CompiledProgram, EnvBuilder, ExecError, Outcome, outcome_key
from .mooml.types import infer_program
from .semantics import BitChecker

DEFAULT_LIMIT = 20


class SolverLimitError(ValueError):
    """The universe is too large for exhaustive enumeration."""


@dataclass(frozen=True)
class SolveResult:
    best: Optional[Solution]
    outcome: Optional[Outcome]
    explored: int
    valid_count: int
    ties: int
    errors: int = 0
    feasible: int = 0

    @property
    def satisfiable(self) -> bool:
        return self.best is not None


def _checker(doc: CudfDoc, limit: int) -> BitChecker:
    n = len(doc.universe)
    if n > limit:
        raise SolverLimitError(
            f"universe has {n} package versions, more than the enumeration limit of {limit}")
    return BitChecker(doc)


def enumerate_valid_bits(doc: CudfDoc, limit: int = DEFAULT_LIMIT) -> Iterator[int]:
    checker = _checker(doc, limit)
    valid = checker.valid
    for bits in range(1 << len(checker.packages)):
        if valid(bits):
            yield bits


def enumerate_valid(doc: CudfDoc, limit: int = DEFAULT_LIMIT) -> Iterator[Solution]:
    """Yield every valid solution of ``doc`` in bit-vector order."""
    checker = _checker(doc, limit)
    for bits in range(1 << len(checker.packages)):
        if checker.valid(bits):
            yield checker.solution(bits)


def solve_optimal(doc: CudfDoc, program: Program, limit: int = DEFAULT_LIMIT,
                  typecheck: bool = True) -> SolveResult:
    """Best valid solution under ``program``; ties go to the smallest bit-vector.

    Candidates whose evaluation raises an execution error are skipped and
    counted in ``errors``.
    """
    checker = _checker(doc, limit)
    if typecheck:
        infer_program(program, doc.declarations)
    compiled = CompiledProgram(program)
    builder = EnvBuilder(doc)
    explored = 1 << len(checker.packages)
    valid_count = errors = feasible = ties = 0
    best_bits: Optional[int] = None
    best_outcome: Optional[Outcome] = None
    best_key = None
    for bits in range(explored):
        if not checker.valid(bits):
            continue
        valid_count += 1
        try:
            outcome = compiled.run(builder.build(checker.solution(bits)))
        except ExecError:
            errors += 1
            continue
        if not outcome.constraint_holds:
            continue
        feasible += 1
        key = outcome_key(outcome)
        if best_key is None or key < best_key:
            best_bits, best_outcome, best_key, ties = bits, outcome, key, 1
        elif key == best_key:
            ties += 1
    best = checker.solution(best_bits) if best_bits is not None else None
    return SolveResult(best, best_outcome, explored, valid_count, ties, errors, feasible)
