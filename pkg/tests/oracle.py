"""Brute-force transcription of the CUDF validity rules, kept independent of cudfmoo.semantics.

Only the raw data attributes of the model are used, never its matching
helpers, so a bug in those helpers cannot be mirrored here.
"""

import itertools

_OPS = {
    "": lambda v, w: True,
    "=": lambda v, w: v == w,
    "!=": lambda v, w: v != w,
    "<": lambda v, w: v < w,
    "<=": lambda v, w: v <= w,
    ">": lambda v, w: v > w,
    ">=": lambda v, w: v >= w,
}


def answers(pkg, vp):
    """Does package ``pkg`` answer the versioned package ``vp`` (by name or through provides)?"""
    op, bound = vp.constraint.op.value, vp.constraint.version
    if pkg.name == vp.name and _OPS[op](pkg.version, bound):
        return True
    for prov in pkg.provides:
        if prov.name != vp.name:
            continue
        if prov.version is None or _OPS[op](prov.version, bound):
            return True
    return False


def valid(doc, keys):
    """Whether the set of (name, version) pairs ``keys`` is a valid solution of ``doc``."""
    S = [p for p in doc.universe if p.key in keys]
    initial = [p for p in doc.universe if p.installed]
    # abundance
    for p in S:
        for clause in p.depends.clauses:
            if not any(answers(q, v) for q in S for v in clause):
                return False
    # peace: conflicts with oneself are ignored
    for p in S:
        for c in p.conflicts:
            if any(answers(q, c) for q in S if q.key != p.key):
                return False
    req = doc.request
    for v in req.install:
        if not any(answers(q, v) for q in S):
            return False
    for v in req.remove:
        if any(answers(q, v) for q in S):
            return False
    for v in req.upgrade:
        if not any(answers(q, v) for q in S):
            return False
        now = [q.version for q in S if q.name == v.name]
        if len(now) != 1:
            return False
        before = [q.version for q in initial if q.name == v.name]
        if before and now[0] < max(before):
            return False
    for p in initial:
        keep = p.keep.value
        if keep == "version" and p.key not in keys:
            return False
        if keep == "package" and not any(q.name == p.name for q in S):
            return False
        if keep == "feature":
            for prov in p.provides:
                if not any(q.name == prov.name and (prov.version is None or q.version == prov.version)
                           or any(r.name == prov.name and (prov.version is None or r.version is None
                                                            or r.version == prov.version)
                                  for r in q.provides)
                           for q in S):
                    return False
    return True


def all_statuses(doc):
    keys = sorted(p.key for p in doc.universe)
    for bits in range(1 << len(keys)):
        yield bits, frozenset(k for i, k in enumerate(keys) if bits >> i & 1)


def subsets(items):
    items = list(items)
    for r in range(len(items) + 1):
        yield from itertools.combinations(items, r)
