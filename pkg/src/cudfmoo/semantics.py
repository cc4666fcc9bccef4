"""Consistency of package statuses and validity of proposed solutions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple, Union

from .model import (
    CudfDoc,
    InstalledIndex,
    Keep,
    PackageDesc,
    PackageKey,
    Provide,
    Request,
    Solution,
    VPkg,
    vpkg,
)

VIOLATION_KINDS = (
    "abundance",
    "peace",
    "install-unsat",
    "remove-unsat",
    "upgrade-unsat",
    "upgrade-multi-version",
    "upgrade-downgrade",
    "keep-broken",
)


@dataclass(frozen=True)
class Violation:
    kind: str
    subject: Union[PackageKey, VPkg]
    detail: str

    def __post_init__(self):
        if self.kind not in VIOLATION_KINDS:
            raise ValueError(f"unknown violation kind {self.kind!r}")

    def sort_key(self):
        subject = self.subject
        if isinstance(subject, VPkg):
            subject = (subject.name, 0, str(subject))
        return (VIOLATION_KINDS.index(self.kind), subject, self.detail)

    def __str__(self) -> str:
        subject = self.subject
        if isinstance(subject, tuple):
            subject = f"{subject[0]} {subject[1]}"
        return f"{self.kind}: {subject}: {self.detail}"


@dataclass(frozen=True)
class CheckResult:
    violations: Tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def _sorted(violations: List[Violation]) -> List[Violation]:
    return sorted(violations, key=Violation.sort_key)


def check_abundance(universe: Sequence[PackageDesc], status: Solution) -> List[Violation]:
    index = InstalledIndex(status, universe)
    out = []
    for pkg in universe:
        if pkg.key not in status:
            continue
        for clause in pkg.depends.clauses:
            if not any(index.satisfies(v) for v in clause):
                text = " | ".join(str(v) for v in clause)
                out.append(Violation("abundance", pkg.key, f"dependency {text} is not satisfied"))
    return _sorted(out)


def check_peace(universe: Sequence[PackageDesc], status: Solution) -> List[Violation]:
    index = InstalledIndex(status, universe)
    out = []
    for pkg in universe:
        if pkg.key not in status:
            continue
        for conflict in pkg.conflicts:
            culprits = {q.key for q in index.providers(conflict) if q.key != pkg.key}
            for name, version in sorted(culprits):
                out.append(Violation("peace", pkg.key, f"conflict {conflict} with installed {name} {version}"))
    return _sorted(out)


def check_request(universe: Sequence[PackageDesc], initial: Solution, proposed: Solution,
                  request: Request) -> List[Violation]:
    index = InstalledIndex(proposed, universe)
    out = []
    for item in request.install:
        if not index.satisfies(item):
            out.append(Violation("install-unsat", item, f"install {item} is not satisfied"))
    for item in request.remove:
        culprits = sorted({q.key for q in index.providers(item)})
        for name, version in culprits:
            out.append(Violation("remove-unsat", item, f"remove {item} violated by {name} {version}"))
    for item in request.upgrade:
        if not index.satisfies(item):
            out.append(Violation("upgrade-unsat", item, f"upgrade {item} is not satisfied"))
        now = sorted(p.version for p in universe if p.name == item.name and p.key in proposed)
        if len(now) != 1:
            out.append(Violation("upgrade-multi-version", item,
                                 f"{item.name} installed in {len(now)} versions, expected exactly one"))
        before = [p.version for p in universe if p.name == item.name and p.key in initial]
        if before:
            newest = max(before)
            for v in now:
                if v < newest:
                    out.append(Violation("upgrade-downgrade", item,
                                         f"{item.name} {v} is older than previously installed {newest}"))
    return _sorted(out)


def _feature_target(prov: Provide) -> VPkg:
    return vpkg(prov.name) if prov.version is None else vpkg(prov.name, "=", prov.version)


def check_keep(universe: Sequence[PackageDesc], initial: Solution, proposed: Solution) -> List[Violation]:
    index = InstalledIndex(proposed, universe)
    out = []
    for pkg in universe:
        if pkg.key not in initial or pkg.keep is Keep.NONE:
            continue
        if pkg.keep is Keep.VERSION:
            if pkg.key not in proposed:
                out.append(Violation("keep-broken", pkg.key, "keep: version, but this version is removed"))
        elif pkg.keep is Keep.PACKAGE:
            if not any(name == pkg.name for name, _ in proposed.installed):
                out.append(Violation("keep-broken", pkg.key, "keep: package, but no version remains installed"))
        else:
            for prov in pkg.provides:
                if not index.satisfies(_feature_target(prov)):
                    out.append(Violation("keep-broken", pkg.key, f"keep: feature, but {prov} is no longer provided"))
    return _sorted(out)


def is_consistent(doc: CudfDoc) -> CheckResult:
    status = doc.installed_status()
    found = check_abundance(doc.universe, status) + check_peace(doc.universe, status)
    return CheckResult(tuple(_sorted(found)))


def is_valid_solution(doc: CudfDoc, proposed: Solution) -> CheckResult:
    proposed.check_against(doc.universe)
    initial = doc.installed_status()
    found = (
        check_abundance(doc.universe, proposed)
        + check_peace(doc.universe, proposed)
        + check_request(doc.universe, initial, proposed, doc.request)
        + check_keep(doc.universe, initial, proposed)
    )
    return CheckResult(tuple(_sorted(found)))


class BitChecker:
    """Validity test over installation bit-vectors for a fixed document.

    Bit ``i`` stands for ``packages[i]``; ``packages`` is the universe sorted by
    (name, version).  Every relation is precompiled to masks, so one test is a
    handful of integer operations.  Agrees with :func:`is_valid_solution`.
    """

    def __init__(self, doc: CudfDoc):
        self.doc = doc
        self.packages = sorted(doc.universe, key=lambda p: p.key)
        pos = {p.key: i for i, p in enumerate(self.packages)}
        self.position = pos

        def mask_of(target: VPkg, exclude: int = -1) -> int:
            m = 0
            for i, q in enumerate(self.packages):
                if i != exclude and q.matches(target):
                    m |= 1 << i
            return m

        self.initial = sum(1 << pos[p.key] for p in doc.universe if p.installed)
        # (bit, [clause masks]) for depends, (bit, mask) for conflicts
        self.depends = []
        self.conflicts = []
        for i, p in enumerate(self.packages):
            clauses = []
            for clause in p.depends.clauses:
                m = 0
                for v in clause:
                    m |= mask_of(v)
                clauses.append(m)
            if clauses:
                self.depends.append((1 << i, clauses))
            cm = 0
            for c in p.conflicts:
                cm |= mask_of(c, exclude=i)
            if cm:
                self.conflicts.append((1 << i, cm))
        req = doc.request
        self.install = [mask_of(v) for v in req.install]
        self.remove = 0
        for v in req.remove:
            self.remove |= mask_of(v)
        # (satisfying mask, per-version bits of that name, allowed-version mask)
        self.upgrade = []
        for v in req.upgrade:
            same = [(i, q) for i, q in enumerate(self.packages) if q.name == v.name]
            before = [q.version for i, q in same if self.initial >> i & 1]
            newest = max(before) if before else 0
            bits = [1 << i for i, _ in same]
            allowed = sum(1 << i for i, q in same if q.version >= newest)
            self.upgrade.append((mask_of(v), bits, allowed))
        self.keep = []  # list of "at least one of" masks
        for i, p in enumerate(self.packages):
            if not self.initial >> i & 1 or p.keep is Keep.NONE:
                continue
            if p.keep is Keep.VERSION:
                self.keep.append(1 << i)
            elif p.keep is Keep.PACKAGE:
                self.keep.append(sum(1 << j for j, q in enumerate(self.packages) if q.name == p.name))
            else:
                for prov in p.provides:
                    self.keep.append(mask_of(_feature_target(prov)))

    def valid(self, bits: int) -> bool:
        for bit, clauses in self.depends:
            if bits & bit:
                for m in clauses:
                    if not bits & m:
                        return False
        for bit, m in self.conflicts:
            if bits & bit and bits & m:
                return False
        for m in self.install:
            if not bits & m:
                return False
        if bits & self.remove:
            return False
        for m, version_bits, allowed in self.upgrade:
            if not bits & m:
                return False
            present = [b for b in version_bits if bits & b]
            if len(present) != 1 or not present[0] & allowed:
                return False
        for m in self.keep:
            if not bits & m:
                return False
        return True

    def solution(self, bits: int) -> Solution:
        return Solution(p.key for i, p in enumerate(self.packages) if bits >> i & 1)

    def bits_of(self, solution: Solution) -> int:
        return sum(1 << self.position[k] for k in solution.installed)
