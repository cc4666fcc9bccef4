"""In-memory model of CUDF documents and the primitive satisfaction relations."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Mapping, Optional, Sequence, Tuple, Union

NAME_RE = re.compile(r"[a-z0-9][a-z0-9+.\-]*\Z")
PROPERTY_RE = re.compile(r"[a-z][a-z0-9]*(-[a-z0-9]+)*\Z")
LABEL_RE = PROPERTY_RE

CORE_PROPERTIES = ("package", "version", "depends", "provides", "conflicts", "installed", "keep")
# Names the MooML package record uses on top of the declared properties.
RESERVED_PROPERTIES = CORE_PROPERTIES + ("name", "was-installed", "is-installed")

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1

PackageKey = Tuple[str, int]


def compare_versions(a: int, b: int) -> int:
    """Return -1, 0 or 1 as ``a`` is older than, equal to or newer than ``b``."""
    return (a > b) - (a < b)


class Op(Enum):
    EQ = "="
    NEQ = "!="
    LT = "<"
    LEQ = "<="
    GT = ">"
    GEQ = ">="
    ANY = ""


_OP_TEST = {
    Op.EQ: lambda c: c == 0,
    Op.NEQ: lambda c: c != 0,
    Op.LT: lambda c: c < 0,
    Op.LEQ: lambda c: c <= 0,
    Op.GT: lambda c: c > 0,
    Op.GEQ: lambda c: c >= 0,
}


def check_name(name: str) -> str:
    if not isinstance(name, str) or not NAME_RE.match(name):
        raise ValueError(f"invalid package name {name!r}")
    return name


def check_version(version: int) -> int:
    if isinstance(version, bool) or not isinstance(version, int) or version < 1:
        raise ValueError(f"invalid version {version!r}: must be a positive integer")
    return version


@dataclass(frozen=True)
class Constraint:
    op: Op = Op.ANY
    version: Optional[int] = None

    def __post_init__(self):
        if self.op is Op.ANY:
            if self.version is not None:
                raise ValueError("unconstrained vpkg cannot carry a version")
        else:
            if self.version is None:
                raise ValueError(f"constraint {self.op.value} needs a version")
            check_version(self.version)

    def accepts(self, version: int) -> bool:
        if self.op is Op.ANY:
            return True
        return _OP_TEST[self.op](compare_versions(version, self.version))

    def __str__(self) -> str:
        return "" if self.op is Op.ANY else f"{self.op.value} {self.version}"


ANY = Constraint()


@dataclass(frozen=True)
class VPkg:
    name: str
    constraint: Constraint = ANY

    def __post_init__(self):
        check_name(self.name)

    def __str__(self) -> str:
        return self.name if self.constraint.op is Op.ANY else f"{self.name} {self.constraint}"


def vpkg(name: str, op: str = "", version: Optional[int] = None) -> VPkg:
    """Shorthand constructor: ``vpkg("wheel", ">", 2)``."""
    return VPkg(name, Constraint(Op(op), version))


@dataclass(frozen=True)
class Formula:
    """Conjunction of disjunctions of versioned packages; no clauses is ``true``."""

    clauses: Tuple[Tuple[VPkg, ...], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "clauses", tuple(tuple(c) for c in self.clauses))
        for clause in self.clauses:
            if not clause:
                raise ValueError("empty disjunction in formula")

    @classmethod
    def of(cls, *clauses: Union[VPkg, Sequence[VPkg]]) -> "Formula":
        return cls(tuple((c,) if isinstance(c, VPkg) else tuple(c) for c in clauses))

    def __bool__(self) -> bool:
        return bool(self.clauses)

    def __str__(self) -> str:
        return ", ".join(" | ".join(str(v) for v in clause) for clause in self.clauses)


TRUE_FORMULA = Formula()


@dataclass(frozen=True)
class Provide:
    name: str
    version: Optional[int] = None

    def __post_init__(self):
        check_name(self.name)
        if self.version is not None:
            check_version(self.version)

    def __str__(self) -> str:
        return self.name if self.version is None else f"{self.name} = {self.version}"


class Keep(Enum):
    NONE = "none"
    VERSION = "version"
    PACKAGE = "package"
    FEATURE = "feature"


KEEP_LABELS = frozenset(k.value for k in Keep)

PROPERTY_KINDS = ("int", "bool", "string", "enum", "pkgname", "vpkglist", "vpkgformula")


@dataclass(frozen=True)
class PropertyType:
    kind: str
    labels: Tuple[str, ...] = ()
    default: object = None

    def __post_init__(self):
        if self.kind not in PROPERTY_KINDS:
            raise ValueError(f"unknown property type {self.kind!r}")
        object.__setattr__(self, "labels", tuple(self.labels))
        if self.kind == "enum":
            if not self.labels:
                raise ValueError("enum type needs at least one label")
            for label in self.labels:
                if not LABEL_RE.match(label):
                    raise ValueError(f"invalid enum label {label!r}")
        elif self.labels:
            raise ValueError("only enum types carry labels")
        if self.default is not None:
            self.validate(self.default)

    def validate(self, value: object) -> object:
        """Return ``value`` if it inhabits this type, else raise ``ValueError``."""
        ok = {
            "int": lambda v: isinstance(v, int) and not isinstance(v, bool) and INT64_MIN <= v <= INT64_MAX,
            "bool": lambda v: isinstance(v, bool),
            "string": lambda v: isinstance(v, str),
            "enum": lambda v: isinstance(v, str) and v in self.labels,
            "pkgname": lambda v: isinstance(v, str) and bool(NAME_RE.match(v)),
            "vpkglist": lambda v: isinstance(v, tuple) and all(isinstance(x, VPkg) for x in v),
            "vpkgformula": lambda v: isinstance(v, Formula),
        }[self.kind]
        if not ok(value):
            raise ValueError(f"value {value!r} is not of type {self.type_name()}")
        return value

    def type_name(self) -> str:
        if self.kind == "enum":
            return f"enum({','.join(self.labels)})"
        return self.kind


@dataclass(frozen=True)
class Preamble:
    declarations: Tuple[Tuple[str, PropertyType], ...] = ()

    def __post_init__(self):
        decls = tuple(self.declarations.items()) if isinstance(self.declarations, Mapping) else tuple(self.declarations)
        object.__setattr__(self, "declarations", decls)
        seen = set()
        for name, ptype in decls:
            if not PROPERTY_RE.match(name):
                raise ValueError(f"invalid property name {name!r}")
            if name in RESERVED_PROPERTIES:
                raise ValueError(f"property {name!r} shadows a core property")
            if name in seen:
                raise ValueError(f"property {name!r} declared twice")
            if not isinstance(ptype, PropertyType):
                raise TypeError(f"declaration of {name!r} is not a PropertyType")
            seen.add(name)

    def get(self, name: str) -> Optional[PropertyType]:
        for n, t in self.declarations:
            if n == name:
                return t
        return None

    def names(self) -> Tuple[str, ...]:
        return tuple(n for n, _ in self.declarations)

    def __contains__(self, name: str) -> bool:
        return self.get(name) is not None

    def extend(self, extra: Iterable[Tuple[str, PropertyType]]) -> "Preamble":
        return Preamble(self.declarations + tuple(extra))


EMPTY_PREAMBLE = Preamble()


@dataclass(frozen=True)
class PackageDesc:
    name: str
    version: int
    depends: Formula = TRUE_FORMULA
    conflicts: Tuple[VPkg, ...] = ()
    provides: Tuple[Provide, ...] = ()
    installed: bool = False
    keep: Keep = Keep.NONE
    # Explicitly given extra properties, in preamble order; defaults are not copied in.
    extra: Tuple[Tuple[str, object], ...] = ()

    def __post_init__(self):
        check_name(self.name)
        check_version(self.version)
        object.__setattr__(self, "conflicts", tuple(self.conflicts))
        object.__setattr__(self, "provides", tuple(self.provides))
        extra = tuple(self.extra.items()) if isinstance(self.extra, Mapping) else tuple(self.extra)
        object.__setattr__(self, "extra", extra)
        if len({k for k, _ in extra}) != len(extra):
            raise ValueError(f"duplicate extra property in {self.name} {self.version}")

    @property
    def key(self) -> PackageKey:
        return (self.name, self.version)

    def get_extra(self, name: str, default: object = None) -> object:
        for k, v in self.extra:
            if k == name:
                return v
        return default

    def with_extra(self, items: Iterable[Tuple[str, object]]) -> "PackageDesc":
        return PackageDesc(self.name, self.version, self.depends, self.conflicts, self.provides,
                           self.installed, self.keep, self.extra + tuple(items))

    def matches(self, target: VPkg) -> bool:
        """Whether this package, if installed, satisfies ``target`` (by name or by provides)."""
        if self.name == target.name and target.constraint.accepts(self.version):
            return True
        for prov in self.provides:
            if prov.name == target.name and (prov.version is None or target.constraint.accepts(prov.version)):
                return True
        return False


@dataclass(frozen=True)
class Request:
    install: Tuple[VPkg, ...] = ()
    remove: Tuple[VPkg, ...] = ()
    upgrade: Tuple[VPkg, ...] = ()
    preferences: Optional[str] = None

    def __post_init__(self):
        for attr in ("install", "remove", "upgrade"):
            object.__setattr__(self, attr, tuple(getattr(self, attr)))


@dataclass(frozen=True)
class CudfDoc:
    preamble: Optional[Preamble] = None
    universe: Tuple[PackageDesc, ...] = ()
    request: Request = field(default_factory=Request)

    def __post_init__(self):
        object.__setattr__(self, "universe", tuple(self.universe))
        seen = set()
        decls = self.declarations
        for pkg in self.universe:
            if pkg.key in seen:
                raise ValueError(f"duplicate package {pkg.name} version {pkg.version}")
            seen.add(pkg.key)
            for name, value in pkg.extra:
                ptype = decls.get(name)
                if ptype is None:
                    raise ValueError(f"undeclared property {name} in {pkg.name} {pkg.version}")
                ptype.validate(value)
            for name, ptype in decls.declarations:
                if ptype.default is None and pkg.get_extra(name) is None:
                    raise ValueError(f"package {pkg.name} {pkg.version} lacks required property {name}")

    @property
    def declarations(self) -> Preamble:
        return self.preamble if self.preamble is not None else EMPTY_PREAMBLE

    def installed_status(self) -> "Solution":
        return Solution(p.key for p in self.universe if p.installed)

    def package(self, name: str, version: int) -> Optional[PackageDesc]:
        for pkg in self.universe:
            if pkg.name == name and pkg.version == version:
                return pkg
        return None

    def extras_of(self, pkg: PackageDesc) -> dict:
        """All declared extra properties of ``pkg`` with defaults filled in."""
        out = {}
        for name, ptype in self.declarations.declarations:
            out[name] = pkg.get_extra(name, ptype.default)
        return out


class Solution:
    """An immutable set of installed (name, version) pairs."""

    __slots__ = ("installed",)

    def __init__(self, installed: Iterable[PackageKey] = ()):
        object.__setattr__(self, "installed", frozenset((n, v) for n, v in installed))

    def __setattr__(self, name, value):
        raise AttributeError("Solution is immutable")

    def __contains__(self, key: object) -> bool:
        return key in self.installed

    def __iter__(self) -> Iterator[PackageKey]:
        return iter(sorted(self.installed))

    def __len__(self) -> int:
        return len(self.installed)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Solution) and self.installed == other.installed

    def __hash__(self) -> int:
        return hash(self.installed)

    def __le__(self, other: "Solution") -> bool:
        return self.installed <= other.installed

    def __repr__(self) -> str:
        body = ", ".join(f"{n} {v}" for n, v in self)
        return f"Solution({{{body}}})"

    def check_against(self, universe: Sequence[PackageDesc]) -> None:
        keys = {p.key for p in universe}
        unknown = self.installed - keys
        if unknown:
            name, version = sorted(unknown)[0]
            raise ValueError(f"solution names {name} {version}, which is not in the universe")


class InstalledIndex:
    """Lookup of installed packages by the names they answer to (own name or provided feature)."""

    def __init__(self, status: Solution, universe: Sequence[PackageDesc]):
        self.status = status
        # name -> list of (package, version it answers with, or None for all versions)
        self.by_name: dict = {}
        for pkg in universe:
            if pkg.key in status:
                self.by_name.setdefault(pkg.name, []).append((pkg, pkg.version))
                for prov in pkg.provides:
                    self.by_name.setdefault(prov.name, []).append((pkg, prov.version))

    def providers(self, target: VPkg) -> list:
        """Installed packages satisfying ``target``, possibly with repeats."""
        accepts = target.constraint.accepts
        return [pkg for pkg, v in self.by_name.get(target.name, ()) if v is None or accepts(v)]

    def satisfies(self, target: VPkg) -> bool:
        accepts = target.constraint.accepts
        return any(v is None or accepts(v) for _, v in self.by_name.get(target.name, ()))

    def satisfies_formula(self, formula: Formula) -> bool:
        return all(any(self.satisfies(v) for v in clause) for clause in formula.clauses)


def vpkg_satisfied(status: Solution, universe: Sequence[PackageDesc], target: VPkg) -> bool:
    return InstalledIndex(status, universe).satisfies(target)


def formula_satisfied(status: Solution, universe: Sequence[PackageDesc], formula: Formula) -> bool:
    return InstalledIndex(status, universe).satisfies_formula(formula)
