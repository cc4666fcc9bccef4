"""Plain-text CUDF parser and printer.

The format is stanza based: stanzas are separated by blank lines and hold
``name: value`` property lines.  A line ending in a backslash is joined with
the following line (leading whitespace of the continuation is dropped).
Lines whose first non-blank character is ``#`` are comments.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

from .model import (
    INT64_MAX,
    INT64_MIN,
    KEEP_LABELS,
    LABEL_RE,
    NAME_RE,
    PROPERTY_RE,
    RESERVED_PROPERTIES,
    Constraint,
    CudfDoc,
    Formula,
    Keep,
    Op,
    PackageDesc,
    Preamble,
    PropertyType,
    Provide,
    Request,
    Solution,
    VPkg,
)


@dataclass(frozen=True)
class ParseDiagnostic:
    line: int
    column: int
    message: str
    severity: str = "error"

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.severity}: {self.message}"


class CudfParseError(Exception):
    def __init__(self, diagnostics: Sequence[ParseDiagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


class _ValueError(Exception):
    pass


@dataclass
class _Prop:
    name: str
    value: str
    line: int
    column: int  # column where the value starts


_VPKG_RE = re.compile(r"\s*([a-z0-9][a-z0-9+.\-]*)\s*(?:(!=|<=|>=|=|<|>)\s*([0-9]+))?\s*\Z")
_INT_RE = re.compile(r"[+-]?[0-9]+\Z")
_DECL_RE = re.compile(r"\s*([^:\s]+)\s*:\s*(.*?)\s*\Z", re.S)
_STRING_ESCAPES = {'"': '"', "\\": "\\", "n": "\n"}


# ---------------------------------------------------------------------------
# value parsing


def parse_int(text: str) -> int:
    if not _INT_RE.match(text):
        raise _ValueError(f"expected an integer, got {text!r}")
    value = int(text)
    if not INT64_MIN <= value <= INT64_MAX:
        raise _ValueError(f"integer {text} out of 64-bit range")
    return value


def parse_version(text: str) -> int:
    if not text.isdigit() or not text.isascii():
        raise _ValueError(f"expected a positive integer version, got {text!r}")
    value = int(text)
    if value < 1:
        raise _ValueError("versions must be positive")
    return value


def parse_bool(text: str) -> bool:
    if text == "true":
        return True
    if text == "false":
        return False
    raise _ValueError(f"expected true or false, got {text!r}")


def parse_name(text: str) -> str:
    if not NAME_RE.match(text):
        raise _ValueError(f"invalid package name {text!r}")
    return text


def _unquote(text: str) -> Tuple[str, str]:
    """Parse a double-quoted string at the start of ``text``; return (value, rest)."""
    assert text.startswith('"')
    out = []
    i = 1
    while i < len(text):
        ch = text[i]
        if ch == "\\":
            if i + 1 >= len(text) or text[i + 1] not in _STRING_ESCAPES:
                raise _ValueError("invalid escape sequence in string")
            out.append(_STRING_ESCAPES[text[i + 1]])
            i += 2
            continue
        if ch == '"':
            return "".join(out), text[i + 1:]
        out.append(ch)
        i += 1
    raise _ValueError("unterminated string")


def parse_string(text: str) -> str:
    if text.startswith('"'):
        value, rest = _unquote(text)
        if rest.strip():
            raise _ValueError("trailing characters after string")
        return value
    return text


def parse_vpkg(text: str) -> VPkg:
    m = _VPKG_RE.match(text)
    if not m:
        raise _ValueError(f"invalid versioned package {text.strip()!r}")
    name, op, ver = m.groups()
    if op is None:
        return VPkg(name)
    return VPkg(name, Constraint(Op(op), parse_version(ver)))


def parse_vpkglist(text: str) -> Tuple[VPkg, ...]:
    if not text.strip():
        return ()
    return tuple(parse_vpkg(part) for part in text.split(","))


def parse_formula(text: str) -> Formula:
    if not text.strip():
        return Formula()
    return Formula(tuple(tuple(parse_vpkg(alt) for alt in clause.split("|")) for clause in text.split(",")))


def parse_provides(text: str) -> Tuple[Provide, ...]:
    out = []
    for item in parse_vpkglist(text):
        op = item.constraint.op
        if op is Op.ANY:
            out.append(Provide(item.name))
        elif op is Op.EQ:
            out.append(Provide(item.name, item.constraint.version))
        else:
            raise _ValueError(f"provides only admits '= version', got {item}")
    return tuple(out)


def parse_label(text: str, labels: Sequence[str]) -> str:
    value = parse_string(text) if text.startswith('"') else text
    if value not in labels:
        raise _ValueError(f"{value!r} is not one of {', '.join(labels)}")
    return value


def parse_typed_value(text: str, ptype: PropertyType) -> object:
    kind = ptype.kind
    if kind == "int":
        return parse_int(text)
    if kind == "bool":
        return parse_bool(text)
    if kind == "string":
        return parse_string(text)
    if kind == "enum":
        return parse_label(text, ptype.labels)
    if kind == "pkgname":
        return parse_name(text)
    if kind == "vpkglist":
        return parse_vpkglist(text)
    return parse_formula(text)


_TYPE_RE = re.compile(r"(int|bool|string|pkgname|vpkglist|vpkgformula)\Z|enum\s*\(([^)]*)\)\Z")


def parse_property_type(text: str) -> PropertyType:
    """Parse ``<type> [= <default>]`` as found in a preamble declaration."""
    if "=" in text:
        type_text, default_text = text.split("=", 1)
        type_text, default_text = type_text.strip(), default_text.strip()
    else:
        type_text, default_text = text.strip(), None
    m = _TYPE_RE.match(type_text)
    if not m:
        raise _ValueError(f"unknown property type {type_text!r}")
    if m.group(1):
        ptype = PropertyType(m.group(1))
    else:
        labels = tuple(label.strip() for label in m.group(2).split(","))
        for label in labels:
            if not LABEL_RE.match(label):
                raise _ValueError(f"invalid enum label {label!r}")
        if len(set(labels)) != len(labels):
            raise _ValueError("duplicate enum label")
        ptype = PropertyType("enum", labels)
    if default_text is None:
        return ptype
    default = parse_typed_value(default_text, ptype)
    return PropertyType(ptype.kind, ptype.labels, default)


# ---------------------------------------------------------------------------
# stanza splitting


def _decode(text: Union[str, bytes]) -> str:
    if isinstance(text, bytes):
        try:
            return text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise CudfParseError([ParseDiagnostic(1, 1, f"input is not valid UTF-8: {exc.reason}")])
    return text


def _stanzas(text: str, diags: List[ParseDiagnostic]) -> List[List[_Prop]]:
    stanzas: List[List[_Prop]] = []
    current: List[_Prop] = []
    lines = text.split("\n")
    i = 0
    while i < len(lines):
        raw = lines[i].rstrip("\r")
        lineno = i + 1
        i += 1
        stripped = raw.strip()
        if not stripped:
            if current:
                stanzas.append(current)
                current = []
            continue
        if stripped.startswith("#"):
            continue
        if raw[0] in " \t":
            diags.append(ParseDiagnostic(lineno, 1, "unexpected indented line (continuations need a trailing backslash)"))
            continue
        logical = raw
        while logical.endswith("\\") and i < len(lines):
            logical = logical[:-1] + lines[i].rstrip("\r").lstrip()
            i += 1
        if logical.endswith("\\"):
            logical = logical[:-1]
        colon = logical.find(":")
        if colon < 0:
            diags.append(ParseDiagnostic(lineno, 1, "expected 'name: value'"))
            continue
        name = logical[:colon]
        if not PROPERTY_RE.match(name):
            diags.append(ParseDiagnostic(lineno, 1, f"invalid property name {name!r}"))
            continue
        rest = logical[colon + 1:]
        value = rest.strip()
        column = colon + 2 + (len(rest) - len(rest.lstrip()))
        current.append(_Prop(name, value, lineno, column))
    if current:
        stanzas.append(current)
    return stanzas


def _err(diags: List[ParseDiagnostic], prop: _Prop, message: str) -> None:
    diags.append(ParseDiagnostic(prop.line, prop.column, message))


def _parse_preamble(stanza: List[_Prop], diags: List[ParseDiagnostic]) -> Preamble:
    decls: List[Tuple[str, PropertyType]] = []
    names = set()
    for prop in stanza[1:]:
        if prop.name != "property":
            _err(diags, prop, f"unknown preamble property {prop.name}")
            continue
        # one declaration per line: a default may itself contain commas
        m = _DECL_RE.match(prop.value)
        if not m:
            _err(diags, prop, f"malformed property declaration {prop.value!r}")
            continue
        name, type_text = m.groups()
        if not PROPERTY_RE.match(name):
            _err(diags, prop, f"invalid property name {name!r}")
            continue
        if name in RESERVED_PROPERTIES:
            _err(diags, prop, f"property {name} shadows a core property")
            continue
        if name in names:
            _err(diags, prop, f"property {name} declared twice")
            continue
        try:
            ptype = parse_property_type(type_text)
        except (_ValueError, ValueError) as exc:
            _err(diags, prop, f"property {name}: {exc}")
            continue
        names.add(name)
        decls.append((name, ptype))
    return Preamble(tuple(decls))


def _parse_package(stanza: List[_Prop], preamble: Preamble, diags: List[ParseDiagnostic]) -> Optional[PackageDesc]:
    start = len(diags)
    fields: dict = {}
    extra: dict = {}
    seen = set()
    for prop in stanza:
        if prop.name in seen:
            _err(diags, prop, f"duplicate property {prop.name}")
            continue
        seen.add(prop.name)
        try:
            if prop.name == "package":
                fields["name"] = parse_name(prop.value)
            elif prop.name == "version":
                fields["version"] = parse_version(prop.value)
            elif prop.name == "depends":
                fields["depends"] = parse_formula(prop.value)
            elif prop.name == "conflicts":
                fields["conflicts"] = parse_vpkglist(prop.value)
            elif prop.name == "provides":
                fields["provides"] = parse_provides(prop.value)
            elif prop.name == "installed":
                fields["installed"] = parse_bool(prop.value)
            elif prop.name == "keep":
                fields["keep"] = Keep(parse_label(prop.value, sorted(KEEP_LABELS)))
            else:
                ptype = preamble.get(prop.name)
                if ptype is None:
                    _err(diags, prop, f"undeclared property {prop.name}")
                    continue
                extra[prop.name] = parse_typed_value(prop.value, ptype)
        except (_ValueError, ValueError) as exc:
            _err(diags, prop, f"{prop.name}: {exc}")
    head = stanza[0]
    if "version" not in fields and "version" not in seen:
        _err(diags, head, f"package {head.value} has no version")
    for name, ptype in preamble.declarations:
        if ptype.default is None and name not in extra and name not in seen:
            _err(diags, head, f"package {head.value} lacks required property {name}")
    if len(diags) > start:
        return None
    ordered = tuple((n, extra[n]) for n in preamble.names() if n in extra)
    try:
        return PackageDesc(extra=ordered, **fields)
    except ValueError as exc:
        _err(diags, head, str(exc))
        return None


def _parse_request(stanza: List[_Prop], diags: List[ParseDiagnostic]) -> Request:
    fields: dict = {}
    seen = set()
    for prop in stanza[1:]:
        if prop.name in seen:
            _err(diags, prop, f"duplicate property {prop.name}")
            continue
        seen.add(prop.name)
        try:
            if prop.name in ("install", "remove", "upgrade"):
                fields[prop.name] = parse_vpkglist(prop.value)
            elif prop.name == "preferences":
                fields["preferences"] = prop.value
            else:
                _err(diags, prop, f"unknown request property {prop.name}")
        except (_ValueError, ValueError) as exc:
            _err(diags, prop, f"{prop.name}: {exc}")
    return Request(**fields)


def parse_document(text: Union[str, bytes]) -> CudfDoc:
    """Parse a CUDF document, raising :class:`CudfParseError` with all diagnostics on failure."""
    text = _decode(text)
    diags: List[ParseDiagnostic] = []
    stanzas = _stanzas(text, diags)
    preamble: Optional[Preamble] = None
    packages: List[PackageDesc] = []
    request: Optional[Request] = None
    keys: dict = {}
    for index, stanza in enumerate(stanzas):
        head = stanza[0]
        if request is not None:
            _err(diags, head, "stanza after the request stanza")
            break
        if head.name == "preamble":
            if index != 0:
                _err(diags, head, "the preamble must be the first stanza")
                continue
            preamble = _parse_preamble(stanza, diags)
        elif head.name == "package":
            pkg = _parse_package(stanza, preamble or Preamble(), diags)
            if pkg is None:
                continue
            if pkg.key in keys:
                _err(diags, head, f"duplicate package {pkg.name} version {pkg.version} (first at line {keys[pkg.key]})")
                continue
            keys[pkg.key] = head.line
            packages.append(pkg)
        elif head.name == "request":
            request = _parse_request(stanza, diags)
        else:
            _err(diags, head, f"stanza must start with preamble, package or request, not {head.name}")
    if request is None:
        diags.append(ParseDiagnostic(max(1, text.count("\n")), 1, "missing request stanza"))
    if diags:
        raise CudfParseError(diags)
    try:
        return CudfDoc(preamble, tuple(packages), request)
    except ValueError as exc:
        raise CudfParseError([ParseDiagnostic(1, 1, str(exc))]) from None


def parse_solution(text: Union[str, bytes], against: CudfDoc) -> Solution:
    """Parse a package-list fragment; stanzas with ``installed: true`` form the solution."""
    text = _decode(text)
    diags: List[ParseDiagnostic] = []
    stanzas = _stanzas(text, diags)
    keys = {p.key for p in against.universe}
    installed = []
    for index, stanza in enumerate(stanzas):
        head = stanza[0]
        if head.name == "preamble" and index == 0:
            continue
        if head.name != "package":
            _err(diags, head, f"solutions hold package stanzas only, found {head.name}")
            continue
        props = {p.name: p for p in stanza}
        try:
            name = parse_name(head.value)
            if "version" not in props:
                raise _ValueError(f"package {name} has no version")
            version = parse_version(props["version"].value)
            flag = parse_bool(props["installed"].value) if "installed" in props else False
        except _ValueError as exc:
            _err(diags, head, str(exc))
            continue
        if (name, version) not in keys:
            _err(diags, head, f"package {name} version {version} is not in the universe")
            continue
        if flag:
            installed.append((name, version))
    if diags:
        raise CudfParseError(diags)
    return Solution(installed)


# ---------------------------------------------------------------------------
# printing

_BARE_STRING_RE = re.compile(r'[^"\\\s]([^"\\\n]*[^"\\\s])?\Z')


def format_string(value: str) -> str:
    if _BARE_STRING_RE.match(value) and not value.startswith("#"):
        return value
    escaped = value.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
    return f'"{escaped}"'


def format_value(value: object, ptype: PropertyType) -> str:
    kind = ptype.kind
    if kind == "bool":
        return "true" if value else "false"
    if kind == "int":
        return str(value)
    if kind == "string":
        return format_string(value)
    if kind == "vpkglist":
        return ", ".join(str(v) for v in value)
    return str(value)


def format_property_type(ptype: PropertyType) -> str:
    text = ptype.type_name()
    if ptype.default is not None:
        text += f" = {format_value(ptype.default, ptype)}"
    return text


def _line(name: str, value: str) -> str:
    return f"{name}: {value}" if value else f"{name}:"


def format_package(pkg: PackageDesc, preamble: Preamble) -> List[str]:
    lines = [_line("package", pkg.name), _line("version", str(pkg.version))]
    if pkg.depends:
        lines.append(_line("depends", str(pkg.depends)))
    if pkg.provides:
        lines.append(_line("provides", ", ".join(str(p) for p in pkg.provides)))
    if pkg.conflicts:
        lines.append(_line("conflicts", ", ".join(str(c) for c in pkg.conflicts)))
    if pkg.installed:
        lines.append("installed: true")
    if pkg.keep is not Keep.NONE:
        lines.append(_line("keep", pkg.keep.value))
    given = dict(pkg.extra)
    for name, ptype in preamble.declarations:
        if name in given:
            lines.append(_line(name, format_value(given[name], ptype)))
    return lines


def format_preferences(text: str) -> List[str]:
    lines = [line.strip() for line in text.split("\n")]
    lines = [line for line in lines if line] or [""]
    out = [_line("preferences", lines[0])]
    for line in lines[1:]:
        out[-1] += " \\"
        out.append(" " + line)
    return out


def print_document(doc: CudfDoc) -> str:
    stanzas: List[List[str]] = []
    if doc.preamble is not None:
        stanza = ["preamble:"]
        for name, ptype in doc.preamble.declarations:
            stanza.append(f"property: {name}: {format_property_type(ptype)}")
        stanzas.append(stanza)
    decls = doc.declarations
    for pkg in doc.universe:
        stanzas.append(format_package(pkg, decls))
    req = doc.request
    stanza = ["request:"]
    for attr in ("install", "remove", "upgrade"):
        items = getattr(req, attr)
        if items:
            stanza.append(_line(attr, ", ".join(str(v) for v in items)))
    if req.preferences is not None:
        stanza.extend(format_preferences(req.preferences))
    stanzas.append(stanza)
    return "\n\n".join("\n".join(s) for s in stanzas) + "\n"


def print_solution(doc: CudfDoc, solution: Solution, all_packages: bool = False) -> str:
    """Print ``solution`` as a package list; by default only installed packages are listed."""
    stanzas = []
    for pkg in doc.universe:
        flag = pkg.key in solution
        if flag or all_packages:
            stanzas.append(f"package: {pkg.name}\nversion: {pkg.version}\ninstalled: {'true' if flag else 'false'}")
    return "".join(s + "\n\n" for s in stanzas)


def load_document(path) -> CudfDoc:
    with open(path, "rb") as fh:
        return parse_document(fh.read())
